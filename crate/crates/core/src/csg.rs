//! Boolean combination of BR-DF models on a shared lattice.

use std::fmt;
use std::str::FromStr;

use crate::brep::FacetedBRep;
use crate::error::{Error, Result};
use crate::grid::{make_transform, BrDf, NormalizeTransform, ScalarField3};
use crate::mesh::SegmentedMesh;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsgOp {
    Union,
    Intersection,
}

impl CsgOp {
    fn merge(self, a: f64, b: f64) -> f64 {
        match self {
            CsgOp::Union => a.min(b),
            CsgOp::Intersection => a.max(b),
        }
    }
}

impl FromStr for CsgOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "union" => Ok(CsgOp::Union),
            "intersection" => Ok(CsgOp::Intersection),
            other => Err(Error::InvalidArgument(format!("unknown CSG operation {other:?}"))),
        }
    }
}

impl fmt::Display for CsgOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CsgOp::Union => "union",
            CsgOp::Intersection => "intersection",
        })
    }
}

/// Lattice shared by all inputs: the max resolution and truncation over a
/// transform covering every input's model box. Inputs already on one
/// lattice keep it unchanged.
pub fn common_lattice(models: &[BrDf]) -> Result<(usize, NormalizeTransform, f64)> {
    let first = models.first().ok_or(Error::Empty("CSG input list"))?;
    let resolution = models.iter().map(BrDf::resolution).max().unwrap_or(0);
    let truncation = models.iter().map(BrDf::truncation).fold(0.0, f64::max);
    if models.iter().all(|m| m.transform() == first.transform()) {
        return Ok((resolution, *first.transform(), truncation));
    }
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for m in models {
        let (a, b) = m.transform().nominal_bbox();
        lo = lo.inf(&a);
        hi = hi.sup(&b);
    }
    Ok((resolution, make_transform(&lo, &hi)?, truncation))
}

/// Value of `field` at a world point, in the target lattice's units.
/// Points outside the source domain read as `outside`.
fn resample(
    field: &ScalarField3,
    world: &Point,
    target: &NormalizeTransform,
    outside: f64,
) -> f64 {
    let p = field.transform().apply(world);
    let ratio = target.scale / field.transform().scale;
    if p.iter().any(|c| c.abs() > 1.0 + 1e-9) {
        return outside;
    }
    field.sample_trilinear(&p).map_or(outside, |v| v * ratio)
}

/// Union or intersection of two or more models. The output SDF is the
/// pointwise min or max of the inputs; the output UDF list is every
/// input's UDFs in order, resampled but otherwise unmodified.
pub fn combine(models: &[BrDf], op: CsgOp) -> Result<BrDf> {
    if models.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "CSG needs at least two models, got {}",
            models.len()
        )));
    }
    let (r, transform, tau) = common_lattice(models)?;
    let same_lattice = models
        .iter()
        .all(|m| m.resolution() == r && *m.transform() == transform && m.truncation() == tau);

    let field = |sample: &(dyn Fn(&Point) -> f64 + Sync)| {
        ScalarField3::from_fn(r, transform, tau, |p| sample(&transform.inverse(p)))
    };

    if same_lattice {
        let values: Vec<f32> = (0..r * r * r)
            .map(|idx| {
                models
                    .iter()
                    .map(|m| m.sdf.values()[idx] as f64)
                    .reduce(|a, b| op.merge(a, b))
                    .unwrap() as f32
            })
            .collect();
        let sdf = ScalarField3::new(r, values, transform, tau)?;
        let udfs = models.iter().flat_map(|m| m.udfs.iter().cloned()).collect();
        return BrDf::new(sdf, udfs);
    }

    let sdf = field(&|w| {
        models
            .iter()
            .map(|m| resample(&m.sdf, w, &transform, tau))
            .reduce(|a, b| op.merge(a, b))
            .unwrap()
    })?;
    let mut udfs = Vec::new();
    for m in models {
        for u in &m.udfs {
            udfs.push(field(&|w| resample(u, w, &transform, tau).max(0.0))?);
        }
    }
    BrDf::new(sdf, udfs)
}

/// Drop faces that received no triangles and renumber the rest.
pub fn prune_empty_faces(b: FacetedBRep) -> FacetedBRep {
    if b.faces.iter().all(|f| !f.triangles.is_empty()) {
        return b;
    }
    let mut remap = vec![usize::MAX; b.mesh.face_count];
    let mut next = 0;
    for &l in &b.mesh.labels {
        if remap[l] == usize::MAX {
            remap[l] = 0;
        }
    }
    for slot in remap.iter_mut().filter(|s| **s == 0) {
        *slot = next;
        next += 1;
    }
    let mesh = SegmentedMesh {
        labels: b.mesh.labels.iter().map(|&l| remap[l]).collect(),
        face_count: next,
        vertices: b.mesh.vertices,
        triangles: b.mesh.triangles,
    };
    FacetedBRep::from_segmented(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brep::validate_topology;
    use crate::encode::encode_brdf;
    use crate::mct::extract;
    use crate::synth::shapes;

    fn ball(center: [f64; 3], radius: f64) -> BrDf {
        let t = NormalizeTransform::identity();
        let c = Point::from(center);
        let sdf = ScalarField3::from_fn(24, t, 0.1, |p| (p - c).norm() - radius).unwrap();
        let udf = ScalarField3::from_fn(24, t, 0.1, |p| ((p - c).norm() - radius).abs()).unwrap();
        BrDf::new(sdf, vec![udf]).unwrap()
    }

    #[test]
    fn op_parsing() {
        assert_eq!("union".parse::<CsgOp>().unwrap(), CsgOp::Union);
        assert_eq!("Intersection".parse::<CsgOp>().unwrap(), CsgOp::Intersection);
        assert!("difference".parse::<CsgOp>().is_err());
        assert_eq!(CsgOp::Union.to_string(), "union");
    }

    #[test]
    fn needs_two_models() {
        assert!(combine(&[ball([0.0; 3], 0.3)], CsgOp::Union).is_err());
        assert!(combine(&[], CsgOp::Union).is_err());
    }

    #[test]
    fn self_union_is_identity() {
        let a = ball([0.1, 0.0, 0.0], 0.4);
        let u = combine(&[a.clone(), a.clone()], CsgOp::Union).unwrap();
        assert_eq!(u.sdf, a.sdf);
        assert_eq!(u.face_count(), 2);
    }

    #[test]
    fn pointwise_min_max() {
        let t = NormalizeTransform::identity();
        let a = BrDf::new(
            ScalarField3::from_fn(4, t, 0.1, |_| -0.05).unwrap(),
            vec![ScalarField3::from_fn(4, t, 0.1, |_| 0.05).unwrap()],
        )
        .unwrap();
        let b = BrDf::new(
            ScalarField3::from_fn(4, t, 0.1, |_| 0.1).unwrap(),
            vec![ScalarField3::from_fn(4, t, 0.1, |_| 0.1).unwrap()],
        )
        .unwrap();
        let u = combine(&[a.clone(), b.clone()], CsgOp::Union).unwrap();
        let i = combine(&[a, b], CsgOp::Intersection).unwrap();
        assert_eq!(u.sdf.get(1, 2, 3), -0.05f32 as f64);
        assert_eq!(i.sdf.get(1, 2, 3), 0.1f32 as f64);
    }

    #[test]
    fn union_contains_inputs() {
        let a = encode_brdf(&shapes::centered_box(1.0, 1.0, 1.0), 32, 0.1).unwrap();
        let b = encode_brdf(&shapes::translated(shapes::centered_box(0.8, 0.8, 0.8), [0.5, 0.3, 0.0]), 32, 0.1)
            .unwrap();
        let u = combine(&[a.clone(), b.clone()], CsgOp::Union).unwrap();
        let t = *u.transform();
        // deep inside either input is inside the union
        for (m, probe) in [(&a, Point::new(-0.3, 0.0, 0.0)), (&b, Point::new(0.7, 0.4, 0.0))] {
            let pa = m.transform().apply(&probe);
            assert!(m.sdf.sample_trilinear(&pa).unwrap() < 0.0);
            assert!(u.sdf.sample_trilinear(&t.apply(&probe)).unwrap() < 0.0);
        }
    }

    #[test]
    fn union_of_overlapping_cubes_is_valid_after_pruning() {
        let a = encode_brdf(&shapes::centered_box(1.0, 1.0, 1.0), 32, 0.1).unwrap();
        // the small cube's -x face lies inside the big one
        let b = encode_brdf(&shapes::translated(shapes::centered_box(0.6, 0.6, 0.6), [0.5, 0.0, 0.0]), 32, 0.1)
            .unwrap();
        let u = combine(&[a, b], CsgOp::Union).unwrap();
        let brep = prune_empty_faces(extract(&u).unwrap().brep);
        assert!(validate_topology(&brep).is_valid(), "{:?}", validate_topology(&brep));
        assert!(brep.faces.iter().all(|f| !f.triangles.is_empty()));
        assert_eq!(brep.faces.len(), 11);
    }

    #[test]
    fn prune_without_empty_faces_is_identity() {
        let out = extract(&encode_brdf(&shapes::centered_box(1.0, 1.0, 1.0), 24, 0.1).unwrap()).unwrap();
        let b = out.brep.clone();
        assert_eq!(prune_empty_faces(b), out.brep);
    }
}
