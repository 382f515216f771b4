//! End-to-end conversions used by the command-line tool and evaluations.

use serde::Serialize;

use crate::brep::{compare_topology, validate_topology, FacetedBRep, TopologyMatch};
use crate::encode::encode_brdf;
use crate::error::Result;
use crate::grid::BrDf;
use crate::mct::{extract, MctOutput};
use crate::mesh::SegmentedMesh;
use crate::metrics::{surface_chamfer, RECONSTRUCTION_SAMPLES};
use crate::postproc::{postprocess, PostprocessParams};

/// MCT followed by optional post-processing.
pub fn decode(brdf: &BrDf, params: Option<&PostprocessParams>) -> Result<FacetedBRep> {
    let out = extract(brdf)?;
    match params {
        Some(p) => postprocess(&out, p),
        None => Ok(out.brep),
    }
}

/// Reconstruction quality of one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundtripReport {
    pub reference_counts: (usize, usize, usize),
    pub raw_counts: (usize, usize, usize),
    pub post_counts: (usize, usize, usize),
    pub valid_raw: bool,
    pub valid_post: bool,
    pub same_topology_raw: bool,
    pub same_topology_post: bool,
    pub chamfer_raw: f64,
    pub chamfer_post: f64,
}

impl RoundtripReport {
    pub fn valid(&self) -> bool {
        self.valid_raw && self.valid_post
    }
}

/// Everything a roundtrip produces, for callers that need the meshes.
#[derive(Debug, Clone)]
pub struct Roundtrip {
    pub reference: FacetedBRep,
    pub mct: MctOutput,
    pub post: FacetedBRep,
    pub report: RoundtripReport,
}

/// Encode `mesh`, extract it again, post-process, and compare both results
/// with the input in normalized coordinates.
pub fn roundtrip(
    mesh: &SegmentedMesh,
    resolution: usize,
    truncation: f64,
    params: &PostprocessParams,
    seed: u64,
) -> Result<Roundtrip> {
    let brdf = encode_brdf(mesh, resolution, truncation)?;
    let t = *brdf.transform();
    let reference = FacetedBRep::from_segmented(mesh.transformed(|p| t.apply(p)));
    let mct = extract(&brdf)?;
    let post = postprocess(&mct, params)?;
    let sig = reference.signature();
    let same = |b: &FacetedBRep| compare_topology(&sig, &b.signature()) == TopologyMatch::Same;
    let cd = |b: &FacetedBRep| surface_chamfer(&reference.mesh, &b.mesh, RECONSTRUCTION_SAMPLES, seed);
    let report = RoundtripReport {
        reference_counts: reference.counts(),
        raw_counts: mct.brep.counts(),
        post_counts: post.counts(),
        valid_raw: validate_topology(&mct.brep).is_valid(),
        valid_post: validate_topology(&post).is_valid(),
        same_topology_raw: same(&mct.brep),
        same_topology_post: same(&post),
        chamfer_raw: cd(&mct.brep)?,
        chamfer_post: cd(&post)?,
    };
    Ok(Roundtrip {
        reference,
        mct,
        post,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::shapes;

    #[test]
    fn cube_roundtrip() {
        let r = roundtrip(&shapes::centered_box(1.0, 1.0, 1.0), 64, 0.1, &PostprocessParams::default(), 0)
            .unwrap()
            .report;
        assert!(r.valid());
        assert!(r.same_topology_raw && r.same_topology_post);
        assert!(r.chamfer_raw <= 2e-3, "{}", r.chamfer_raw);
        assert!(r.chamfer_post <= 5e-3, "{}", r.chamfer_post);
        assert_eq!(r.post_counts, (8, 12, 6));
    }

    #[test]
    fn decode_modes() {
        let b = encode_brdf(&shapes::wedge(1.0, 0.8, 0.6), 32, 0.1).unwrap();
        let raw = decode(&b, None).unwrap();
        let post = decode(&b, Some(&PostprocessParams::default())).unwrap();
        assert_eq!(raw.counts(), post.counts());
        assert!(post.mesh.triangles.len() < raw.mesh.triangles.len());
    }
}
