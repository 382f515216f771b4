//! Boundary fitting, re-embedding, smoothing and simplification of MCT
//! output. Every step keeps the B-Rep topology intact.

mod fit;
mod simplify;
mod smooth;

pub use self::fit::{
    arc_length_params, fit_boundary, fit_curve, fit_polynomial, CurveFit, FitParams,
    DEFAULT_ENDPOINT_WEIGHT, DEFAULT_RESIDUAL_THRESHOLD,
};
pub use self::simplify::{simplify, DEFAULT_SIMPLIFY_RATIO};
pub use self::smooth::{smooth, vertex_roles, VertexRole, DEFAULT_DAMPING, DEFAULT_SMOOTH_ITERATIONS};

use crate::brep::FacetedBRep;
use crate::encode::geometry::{closest_barycentric, segment_parameter};
use crate::error::Result;
use crate::mct::{split_mesh, BoundaryLayout, LabeledSurfaceMesh, MctOutput, VertexOrigin};
use crate::mesh::SegmentedMesh;
use crate::{Point, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostprocessParams {
    pub fit: FitParams,
    pub smooth_iterations: usize,
    pub damping: f64,
    pub simplify_ratio: f64,
}

impl Default for PostprocessParams {
    fn default() -> Self {
        Self {
            fit: FitParams::default(),
            smooth_iterations: DEFAULT_SMOOTH_ITERATIONS,
            damping: DEFAULT_DAMPING,
            simplify_ratio: DEFAULT_SIMPLIFY_RATIO,
        }
    }
}

/// Fit every open B-Rep edge and move each crossing to where its mesh edge
/// meets the fitted curve, i.e. the point of the edge nearest the curve's
/// local tangent line. Closed loops are left as extracted.
pub fn fitted_layout(out: &MctOutput, params: &FitParams) -> Result<BoundaryLayout> {
    let surface = &out.labeled.mesh;
    let mut layout = out.layout.clone();
    for (e, edge) in out.brep.edges.iter().enumerate() {
        if edge.is_closed() {
            continue;
        }
        let fitted = fit_boundary(&out.brep.edge_points(e), params)?;
        let n = fitted.len();
        for i in 1..n - 1 {
            let (v, p) = (edge.polyline[i], &fitted[i]);
            match out.origins[v] {
                VertexOrigin::Crossing(key) => {
                    let (a, b) = (&surface.vertices[key.0], &surface.vertices[key.1]);
                    let tangent = fitted[i + 1] - fitted[i - 1];
                    layout.crossings.insert(key, edge_meets_line(a, b, p, &tangent));
                }
                VertexOrigin::CoVertex(t) => {
                    let [a, b, c] = surface.triangle_points(t);
                    layout.covertices.insert(t, closest_barycentric(p, &a, &b, &c));
                }
                VertexOrigin::Surface(_) => {}
            }
        }
    }
    Ok(layout)
}

/// Parameter on segment `ab` closest to the line through `p` along `dir`;
/// plain closest point to `p` when the two are nearly parallel.
fn edge_meets_line(a: &Point, b: &Point, p: &Point, dir: &Vec3) -> f64 {
    let len = dir.norm();
    if len == 0.0 {
        return segment_parameter(p, a, b);
    }
    let d = dir / len;
    let e = b - a;
    let w = a - p;
    let e_perp = e - d * e.dot(&d);
    let w_perp = w - d * w.dot(&d);
    let denom = e_perp.norm_squared();
    if denom <= 1e-12 * e.norm_squared() {
        return segment_parameter(p, a, b);
    }
    (-w_perp.dot(&e_perp) / denom).clamp(0.0, 1.0)
}

/// Re-triangulate the surface so every boundary runs along mesh edges.
pub fn embed_boundaries(labeled: &LabeledSurfaceMesh, layout: &BoundaryLayout) -> SegmentedMesh {
    split_mesh(labeled, layout).mesh
}

/// Fit, embed, smooth and simplify.
pub fn postprocess(out: &MctOutput, params: &PostprocessParams) -> Result<FacetedBRep> {
    let layout = fitted_layout(out, &params.fit)?;
    let embedded = embed_boundaries(&out.labeled, &layout);
    let smoothed = smooth(&embedded, params.smooth_iterations, params.damping);
    let simplified = simplify(&smoothed, params.simplify_ratio)?;
    Ok(FacetedBRep::from_segmented(simplified))
}
