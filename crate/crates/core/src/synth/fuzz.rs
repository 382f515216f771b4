//! Random BR-DFs for totality testing.
//!
//! The solid is a smooth-min blend of spheres and rotated boxes. Its surface
//! is split into faces by a Voronoi diagram of seed sites projected onto
//! the surface; face `f`'s field is `|sdf| + d_f - min_g d_g`, which
//! vanishes exactly on the part of the surface owned by seed `f`.

use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{clamp_to, node_coord, BrDf, NormalizeTransform, ScalarField3};
use crate::{Point, Vec3};

/// Solids stay inside this box so boundary nodes are outside.
const EXTENT: f64 = 0.8;
const BLEND: f64 = 0.08;

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Sphere { center: Point, radius: f64 },
    Box { center: Point, half: Vec3, rotation: Rotation3<f64> },
}

impl Primitive {
    pub fn sdf(&self, p: &Point) -> f64 {
        match self {
            Primitive::Sphere { center, radius } => (p - center).norm() - radius,
            Primitive::Box { center, half, rotation } => {
                let q = rotation.inverse() * (p - center);
                let d = q.abs() - half;
                let outside = d.map(|x| x.max(0.0)).norm();
                outside + d.max().min(0.0)
            }
        }
    }
}

/// Polynomial smooth minimum.
fn smin(a: f64, b: f64, k: f64) -> f64 {
    let h = (0.5 + 0.5 * (b - a) / k).clamp(0.0, 1.0);
    b + (a - b) * h - k * h * (1.0 - h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzShape {
    pub primitives: Vec<Primitive>,
    pub seeds: Vec<Point>,
    pub truncation: f64,
}

impl FuzzShape {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = rng.gen_range(1..=5);
        let primitives: Vec<Primitive> = (0..count)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    let radius = rng.gen_range(0.15..0.45);
                    let reach = EXTENT - radius;
                    let center = Point::from(Vec3::from_fn(|_, _| rng.gen_range(-reach..reach)));
                    Primitive::Sphere { center, radius }
                } else {
                    let half = Vec3::from_fn(|_, _| rng.gen_range(0.08..0.35));
                    let reach = EXTENT - half.norm();
                    let center = Point::from(Vec3::from_fn(|_, _| rng.gen_range(-reach..reach)));
                    let rotation = Rotation3::from_euler_angles(
                        rng.gen_range(0.0..std::f64::consts::TAU),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    );
                    Primitive::Box { center, half, rotation }
                }
            })
            .collect();
        let truncation = if seed % 2 == 0 { 0.1 } else { 1.0 };
        let mut shape = Self {
            primitives,
            seeds: Vec::new(),
            truncation,
        };
        let sites = rng.gen_range(3..=15);
        shape.seeds = (0..sites)
            .map(|_| {
                let start = Point::from(Vec3::from_fn(|_, _| rng.gen_range(-EXTENT..EXTENT)));
                shape.project(start)
            })
            .collect();
        shape
    }

    pub fn sdf(&self, p: &Point) -> f64 {
        self.primitives
            .iter()
            .map(|s| s.sdf(p))
            .reduce(|a, b| smin(a, b, BLEND))
            .unwrap_or(f64::INFINITY)
    }

    fn gradient(&self, p: &Point) -> Vec3 {
        let h = 1e-6;
        Vec3::from_fn(|i, _| {
            let mut e = Vec3::zeros();
            e[i] = h;
            (self.sdf(&(p + e)) - self.sdf(&(p - e))) / (2.0 * h)
        })
    }

    /// Move `p` onto the zero level set by Newton steps along the gradient.
    pub fn project(&self, mut p: Point) -> Point {
        for _ in 0..50 {
            let d = self.sdf(&p);
            if d.abs() < 1e-10 {
                break;
            }
            let g = self.gradient(&p);
            let g2 = g.norm_squared();
            if g2 < 1e-12 {
                break;
            }
            p -= g * (d / g2);
        }
        p
    }

    /// Face fields at `p`: `|sdf| + d_f - min d`.
    pub fn face_values(&self, p: &Point) -> Vec<f64> {
        let s = self.sdf(p).abs();
        let d: Vec<f64> = self.seeds.iter().map(|q| (p - q).norm()).collect();
        let m = d.iter().copied().fold(f64::INFINITY, f64::min);
        d.iter().map(|x| s + x - m).collect()
    }

    /// Sample on the identity lattice at `resolution`.
    pub fn to_brdf(&self, resolution: usize) -> Result<BrDf> {
        let r = resolution;
        let tau = self.truncation;
        let faces = self.seeds.len();
        let rows: Vec<(f32, Vec<f32>)> = (0..r * r * r)
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = (idx / (r * r), (idx / r) % r, idx % r);
                let p = Point::new(node_coord(i, r), node_coord(j, r), node_coord(k, r));
                let udf = self.face_values(&p).into_iter().map(|v| clamp_to(v, tau)).collect();
                (clamp_to(self.sdf(&p), tau), udf)
            })
            .collect();
        let t = NormalizeTransform::identity();
        let sdf = ScalarField3::new(r, rows.iter().map(|row| row.0).collect(), t, tau)?;
        let udfs = (0..faces)
            .map(|f| ScalarField3::new(r, rows.iter().map(|row| row.1[f]).collect(), t, tau))
            .collect::<Result<Vec<_>>>()?;
        BrDf::new(sdf, udfs)
    }
}

/// `count` fuzz models with seeds `base..base + count`.
pub fn fuzz_corpus(count: usize, base: u64, resolution: usize) -> Result<Vec<BrDf>> {
    (0..count as u64)
        .map(|i| FuzzShape::random(base + i).to_brdf(resolution))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(FuzzShape::random(9), FuzzShape::random(9));
        assert_ne!(FuzzShape::random(9), FuzzShape::random(10));
    }

    #[test]
    fn seeds_on_surface_and_counts_in_range() {
        for s in 0..30 {
            let shape = FuzzShape::random(s);
            assert!((1..=5).contains(&shape.primitives.len()));
            assert!((3..=15).contains(&shape.seeds.len()));
            for q in &shape.seeds {
                assert!(shape.sdf(q).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn boundary_nodes_outside() {
        for s in 0..10 {
            let b = FuzzShape::random(s).to_brdf(16).unwrap();
            assert_eq!(crate::mct::open_boundary_nodes(&b), 0);
        }
    }

    #[test]
    fn own_face_vanishes_on_surface() {
        let shape = FuzzShape::random(4);
        for q in &shape.seeds {
            let v = shape.face_values(q);
            assert!(v.iter().copied().fold(f64::INFINITY, f64::min).abs() < 1e-8);
        }
    }

    #[test]
    fn box_sdf() {
        let b = Primitive::Box {
            center: Point::origin(),
            half: Vec3::new(0.5, 0.25, 0.25),
            rotation: Rotation3::identity(),
        };
        assert!((b.sdf(&Point::origin()) + 0.25).abs() < 1e-12);
        assert!((b.sdf(&Point::new(1.0, 0.0, 0.0)) - 0.5).abs() < 1e-12);
    }
}
