//! Regular scalar fields over the normalized cube `[-1, 1]^3`.
//!
//! Grid nodes sit on the cube corners: node `(i, j, k)` has normalized
//! coordinate `-1 + 2 i / (R - 1)` along each axis. Values are stored
//! row-major with `z` varying fastest.

use crate::error::{Error, Result};
use crate::{Point, Vec3};

/// Cube side as a multiple of the bounding box's largest extent.
pub const CUBE_MARGIN_FACTOR: f64 = 1.4;
pub const DEFAULT_RESOLUTION: usize = 64;
pub const DEFAULT_TRUNCATION: f64 = 0.1;

/// Snap distance for lattice coordinates; keeps node queries exact.
const NODE_SNAP: f64 = 1e-9;
const DOMAIN_SLACK: f64 = 1e-9;

/// Maps world coordinates into the normalized cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeTransform {
    pub center: Point,
    pub scale: f64,
}

impl NormalizeTransform {
    pub fn new(center: Point, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Degenerate(format!("transform scale {scale} must be positive")));
        }
        Ok(Self { center, scale })
    }

    pub fn identity() -> Self {
        Self {
            center: Point::origin(),
            scale: 1.0,
        }
    }

    /// World to normalized.
    pub fn apply(&self, world: &Point) -> Point {
        Point::from((world - self.center) * self.scale)
    }

    /// Normalized to world.
    pub fn inverse(&self, normalized: &Point) -> Point {
        self.center + normalized.coords / self.scale
    }

    /// World-space bounding box whose normalized image is the model box
    /// this transform was built for (cube of the largest extent).
    pub fn nominal_bbox(&self) -> (Point, Point) {
        let half = 1.0 / (self.scale * CUBE_MARGIN_FACTOR);
        let h = Vec3::repeat(half);
        (self.center - h, self.center + h)
    }
}

/// Expand a bounding box to a centered cube with a 20% margin on the largest
/// extent and build the transform that maps that cube onto `[-1, 1]^3`.
pub fn make_transform(bbox_min: &Point, bbox_max: &Point) -> Result<NormalizeTransform> {
    let extent = bbox_max - bbox_min;
    let largest = extent.max();
    if !(largest > 0.0) || !largest.is_finite() {
        return Err(Error::Degenerate(format!(
            "bounding box has zero diagonal (extent {:?})",
            extent.as_slice()
        )));
    }
    let center = Point::from((bbox_min.coords + bbox_max.coords) * 0.5);
    let side = CUBE_MARGIN_FACTOR * largest;
    NormalizeTransform::new(center, 2.0 / side)
}

/// Normalized coordinate of lattice index `i` at resolution `resolution`.
#[inline]
pub fn node_coord(i: usize, resolution: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / (resolution - 1) as f64
}

/// One scalar sampled on the regular lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3 {
    resolution: usize,
    values: Vec<f32>,
    transform: NormalizeTransform,
    truncation: f64,
}

impl ScalarField3 {
    pub fn new(
        resolution: usize,
        values: Vec<f32>,
        transform: NormalizeTransform,
        truncation: f64,
    ) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidArgument(format!(
                "resolution {resolution} must be at least 2"
            )));
        }
        if !(truncation > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation {truncation} must be positive"
            )));
        }
        let expected = resolution.pow(3);
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, expected {expected}",
                values.len()
            )));
        }
        let tau = truncation as f32;
        if let Some(bad) = values.iter().position(|v| !(v.abs() <= tau)) {
            return Err(Error::InvalidArgument(format!(
                "value {} at index {bad} outside [-{truncation}, {truncation}]",
                values[bad]
            )));
        }
        Ok(Self {
            resolution,
            values,
            transform,
            truncation,
        })
    }

    /// Sample `f` at every node (normalized coordinates), clamping to `±truncation`.
    pub fn from_fn(
        resolution: usize,
        transform: NormalizeTransform,
        truncation: f64,
        f: impl Fn(&Point) -> f64 + Sync,
    ) -> Result<Self> {
        use rayon::prelude::*;
        if resolution < 2 {
            return Err(Error::InvalidArgument(format!(
                "resolution {resolution} must be at least 2"
            )));
        }
        let r = resolution;
        let values = (0..r * r * r)
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = (idx / (r * r), (idx / r) % r, idx % r);
                let p = Point::new(node_coord(i, r), node_coord(j, r), node_coord(k, r));
                clamp_to(f(&p), truncation)
            })
            .collect();
        Self::new(resolution, values, transform, truncation)
    }

    #[inline]
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    #[inline]
    pub fn transform(&self) -> &NormalizeTransform {
        &self.transform
    }

    #[inline]
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    #[inline]
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.resolution + j) * self.resolution + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)] as f64
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Point {
        let r = self.resolution;
        Point::new(node_coord(i, r), node_coord(j, r), node_coord(k, r))
    }

    /// Spacing between adjacent nodes in normalized units.
    pub fn spacing(&self) -> f64 {
        2.0 / (self.resolution - 1) as f64
    }

    /// Trilinear interpolation of the eight nodes around `p`.
    pub fn sample_trilinear(&self, p: &Point) -> Result<f64> {
        if p.iter().any(|c| !(c.abs() <= 1.0 + DOMAIN_SLACK)) {
            return Err(Error::OutOfDomain {
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
        let (i, fx) = self.lattice(p.x);
        let (j, fy) = self.lattice(p.y);
        let (k, fz) = self.lattice(p.z);
        let lerp = |a: f64, b: f64, t: f64| a * (1.0 - t) + b * t;
        let c = |di: usize, dj: usize, dk: usize| self.get(i + di, j + dj, k + dk);
        let x00 = lerp(c(0, 0, 0), c(1, 0, 0), fx);
        let x01 = lerp(c(0, 0, 1), c(1, 0, 1), fx);
        let x10 = lerp(c(0, 1, 0), c(1, 1, 0), fx);
        let x11 = lerp(c(0, 1, 1), c(1, 1, 1), fx);
        let y0 = lerp(x00, x10, fy);
        let y1 = lerp(x01, x11, fy);
        Ok(lerp(y0, y1, fz))
    }

    /// Cell index and in-cell fraction along one axis.
    fn lattice(&self, coord: f64) -> (usize, f64) {
        let cells = (self.resolution - 1) as f64;
        let mut g = ((coord + 1.0) * 0.5 * cells).clamp(0.0, cells);
        let nearest = g.round();
        if (g - nearest).abs() < NODE_SNAP {
            g = nearest;
        }
        let i = (g.floor() as usize).min(self.resolution - 2);
        (i, g - i as f64)
    }

    /// Lattice indices of the nodes on the outer faces of the grid.
    pub fn is_boundary_node(&self, i: usize, j: usize, k: usize) -> bool {
        let last = self.resolution - 1;
        i == 0 || j == 0 || k == 0 || i == last || j == last || k == last
    }
}

#[inline]
pub(crate) fn clamp_to(value: f64, truncation: f64) -> f32 {
    value.clamp(-truncation, truncation) as f32
}

/// Signed distance field plus one unsigned distance field per B-Rep face,
/// all on the same lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct BrDf {
    pub sdf: ScalarField3,
    pub udfs: Vec<ScalarField3>,
}

impl BrDf {
    pub fn new(sdf: ScalarField3, udfs: Vec<ScalarField3>) -> Result<Self> {
        if udfs.is_empty() {
            return Err(Error::InvalidArgument("a BR-DF needs at least one face UDF".into()));
        }
        for (f, udf) in udfs.iter().enumerate() {
            if udf.resolution != sdf.resolution
                || udf.transform != sdf.transform
                || udf.truncation != sdf.truncation
            {
                return Err(Error::InvalidArgument(format!(
                    "UDF {f} does not share the SDF's lattice"
                )));
            }
            if let Some(bad) = udf.values.iter().position(|v| *v < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "UDF {f} has negative value {} at index {bad}",
                    udf.values[bad]
                )));
            }
        }
        Ok(Self { sdf, udfs })
    }

    pub fn face_count(&self) -> usize {
        self.udfs.len()
    }

    pub fn resolution(&self) -> usize {
        self.sdf.resolution
    }

    pub fn transform(&self) -> &NormalizeTransform {
        &self.sdf.transform
    }

    pub fn truncation(&self) -> f64 {
        self.sdf.truncation
    }
}
