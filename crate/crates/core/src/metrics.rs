//! Reconstruction and set-level evaluation measures.

use std::io::Write;

use rstar::RTree;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::brep::{compare_topology, FacetedBRep, TopologyMatch, TopologySignature};
use crate::encode::geometry::point_triangle_distance_sq;
use crate::encode::Bvh;
use crate::error::{Error, Result};
use crate::mesh::TriMeshRef;
use crate::Point;

/// Points per shape for reconstruction Chamfer distance.
pub const RECONSTRUCTION_SAMPLES: usize = 5000;
/// Points per shape for set-level comparison.
pub const SET_SAMPLES: usize = 2000;
/// Cells per axis of the occupancy grid used by JSD.
pub const JSD_RESOLUTION: usize = 28;

/// Area-weighted uniform samples on a triangle mesh, reproducible per seed.
pub fn sample_surface<'a>(mesh: impl Into<TriMeshRef<'a>>, n: usize, seed: u64) -> Result<Vec<Point>> {
    let mesh = mesh.into();
    if mesh.triangles.is_empty() {
        return Err(Error::Empty("mesh to sample"));
    }
    let tri = |t: usize| mesh.triangles[t].map(|v| mesh.vertices[v]);
    let areas: Vec<f64> = (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = tri(t);
            0.5 * (b - a).cross(&(c - a)).norm()
        })
        .collect();
    let pick = WeightedIndex::new(&areas)
        .map_err(|e| Error::Degenerate(format!("cannot sample mesh: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let [a, b, c] = tri(pick.sample(&mut rng));
            let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
            let s = r1.sqrt();
            Point::from(a.coords * (1.0 - s) + b.coords * (s * (1.0 - r2)) + c.coords * (s * r2))
        })
        .collect())
}

fn tree(points: &[Point]) -> RTree<[f64; 3]> {
    RTree::bulk_load(points.iter().map(|p| [p.x, p.y, p.z]).collect())
}

fn mean_nearest(from: &[Point], to: &RTree<[f64; 3]>) -> f64 {
    let sum: f64 = from
        .par_iter()
        .map(|p| {
            let q = to.nearest_neighbor(&[p.x, p.y, p.z]).expect("non-empty tree");
            (Point::from(*q) - p).norm()
        })
        .sum();
    sum / from.len() as f64
}

/// Symmetric Chamfer distance: half the sum of the two mean nearest
/// neighbour distances (not squared).
pub fn chamfer(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("point set for Chamfer distance"));
    }
    Ok(0.5 * (mean_nearest(a, &tree(b)) + mean_nearest(b, &tree(a))))
}

/// Mean distance from `points` to the nearest triangle of `mesh`.
fn mean_to_surface(points: &[Point], mesh: TriMeshRef<'_>) -> f64 {
    let tris: Vec<[Point; 3]> = mesh
        .triangles
        .iter()
        .map(|t| t.map(|v| mesh.vertices[v]))
        .collect();
    let bvh = Bvh::build(mesh.vertices, mesh.triangles);
    let sum: f64 = points
        .par_iter()
        .map(|p| {
            bvh.nearest(p, |t| Some(point_triangle_distance_sq(p, &tris[t])))
                .map_or(f64::INFINITY, |(d, _)| d.sqrt())
        })
        .sum();
    sum / points.len() as f64
}

/// Chamfer distance between two surfaces: `n` samples on each side, each
/// measured against the other surface itself rather than its samples.
pub fn surface_chamfer<'a, 'b>(
    a: impl Into<TriMeshRef<'a>>,
    b: impl Into<TriMeshRef<'b>>,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let (a, b) = (a.into(), b.into());
    let sa = sample_surface(a, n, seed)?;
    let sb = sample_surface(b, n, seed.wrapping_add(1))?;
    Ok(0.5 * (mean_to_surface(&sa, b) + mean_to_surface(&sb, a)))
}

/// A conversion succeeded and produced a topologically valid B-Rep.
pub fn conversion_valid(result: &Result<FacetedBRep>) -> bool {
    matches!(result, Ok(b) if crate::brep::validate_topology(b).is_valid())
}

fn percentage(hits: usize, total: usize, what: &'static str) -> Result<f64> {
    if total == 0 {
        return Err(Error::Empty(what));
    }
    Ok(100.0 * hits as f64 / total as f64)
}

/// Percentage of failed conversions.
pub fn invalid_rate(valid: &[bool]) -> Result<f64> {
    percentage(valid.iter().filter(|v| !**v).count(), valid.len(), "conversion results")
}

/// Percentage of pairs with matching topology. Undecided comparisons count
/// as mismatches.
pub fn same_topology_rate(pairs: &[(TopologySignature, TopologySignature)]) -> Result<f64> {
    let hits = pairs
        .par_iter()
        .filter(|(a, b)| compare_topology(a, b) == TopologyMatch::Same)
        .count();
    percentage(hits, pairs.len(), "signature pairs")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SetMetrics {
    /// Percentage of reference shapes that are some generated shape's
    /// nearest reference.
    pub cov: f64,
    /// Mean over references of the smallest Chamfer distance to a generated shape.
    pub mmd: f64,
    pub jsd: f64,
}

/// COV, MMD and JSD between a generated and a reference set of point clouds.
pub fn set_metrics(generated: &[Vec<Point>], reference: &[Vec<Point>]) -> Result<SetMetrics> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::Empty("shape set"));
    }
    let gen_trees: Vec<_> = generated.iter().map(|g| tree(g)).collect();
    let ref_trees: Vec<_> = reference.iter().map(|r| tree(r)).collect();
    // cd[g][r]
    let cd: Vec<Vec<f64>> = generated
        .par_iter()
        .enumerate()
        .map(|(gi, g)| {
            if g.is_empty() {
                return Err(Error::Empty("generated point set"));
            }
            reference
                .iter()
                .enumerate()
                .map(|(ri, r)| {
                    if r.is_empty() {
                        return Err(Error::Empty("reference point set"));
                    }
                    Ok(0.5 * (mean_nearest(g, &ref_trees[ri]) + mean_nearest(r, &gen_trees[gi])))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut matched = vec![false; reference.len()];
    for row in &cd {
        let best = (0..row.len()).min_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        matched[best] = true;
    }
    let cov = percentage(matched.iter().filter(|m| **m).count(), reference.len(), "reference set")?;
    let mmd = (0..reference.len())
        .map(|r| cd.iter().map(|row| row[r]).fold(f64::INFINITY, f64::min))
        .sum::<f64>()
        / reference.len() as f64;
    let jsd = jensen_shannon(&occupancy_histogram(generated), &occupancy_histogram(reference))?;
    Ok(SetMetrics { cov, mmd, jsd })
}

/// Occupied `28^3` cells of `[-1, 1]^3`, counted once per shape and summed
/// over the set, then normalized to a distribution.
pub fn occupancy_histogram(shapes: &[Vec<Point>]) -> Vec<f64> {
    let r = JSD_RESOLUTION;
    let cell = |x: f64| (((x + 1.0) / 2.0 * r as f64).floor().max(0.0) as usize).min(r - 1);
    let mut counts = vec![0.0; r * r * r];
    for shape in shapes {
        let mut occupied = vec![false; r * r * r];
        for p in shape {
            occupied[(cell(p.x) * r + cell(p.y)) * r + cell(p.z)] = true;
        }
        for (c, o) in counts.iter_mut().zip(occupied) {
            *c += f64::from(u8::from(o));
        }
    }
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        counts.iter_mut().for_each(|c| *c /= total);
    }
    counts
}

/// Jensen-Shannon divergence (natural log) of two distributions.
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "histograms of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    let kl = |a: f64, m: f64| if a > 0.0 { a * (a / m).ln() } else { 0.0 };
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        d += 0.5 * kl(a, m) + 0.5 * kl(b, m);
    }
    Ok(d.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DedupReport {
    /// Percentage of entries whose topology appears only once.
    pub unique: f64,
    /// Groups of indices with identical topology, singletons omitted.
    pub duplicates: Vec<Vec<usize>>,
}

/// Group signatures that agree in topology and quantized positions.
pub fn dedup(signatures: &[TopologySignature]) -> DedupReport {
    let n = signatures.len();
    let mut group = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if group[i] != usize::MAX {
            continue;
        }
        group[i] = groups.len();
        let mut members = vec![i];
        for j in i + 1..n {
            if group[j] == usize::MAX
                && compare_topology(&signatures[i], &signatures[j]) == TopologyMatch::Same
            {
                group[j] = groups.len();
                members.push(j);
            }
        }
        groups.push(members);
    }
    let singles = groups.iter().filter(|g| g.len() == 1).count();
    DedupReport {
        unique: if n == 0 { 0.0 } else { 100.0 * singles as f64 / n as f64 },
        duplicates: groups.into_iter().filter(|g| g.len() > 1).collect(),
    }
}

/// Percentage of generated signatures matching no training signature.
pub fn novel_rate(generated: &[TopologySignature], training: &[TopologySignature]) -> Result<f64> {
    let fresh = generated
        .par_iter()
        .filter(|g| {
            !training
                .iter()
                .any(|t| compare_topology(g, t) == TopologyMatch::Same)
        })
        .count();
    percentage(fresh, generated.len(), "generated signatures")
}

/// One line of a metric report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRecord {
    pub metric: String,
    pub ids: Vec<String>,
    pub value: f64,
}

impl MetricRecord {
    pub fn new(metric: impl Into<String>, ids: &[&str], value: f64) -> Self {
        Self {
            metric: metric.into(),
            ids: ids.iter().map(|s| s.to_string()).collect(),
            value,
        }
    }
}

/// Write records as JSON lines.
pub fn write_report(mut out: impl Write, records: &[MetricRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;
    use crate::synth::shapes;

    fn tri_mesh(tris: &[[Point; 3]]) -> TriMesh {
        TriMesh::new(
            tris.iter().flatten().copied().collect(),
            (0..tris.len()).map(|t| [3 * t, 3 * t + 1, 3 * t + 2]).collect(),
        )
    }

    #[test]
    fn samples_inside_single_triangle() {
        let (a, b, c) = (Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0));
        let pts = sample_surface(&tri_mesh(&[[a, b, c]]), 3, 7).unwrap();
        assert_eq!(pts.len(), 3);
        for p in pts {
            assert!(p.x >= 0.0 && p.y >= 0.0 && p.x + p.y <= 1.0 + 1e-12 && p.z == 0.0);
        }
    }

    #[test]
    fn samples_follow_area() {
        // areas 1 and 9
        let small = [Point::new(0.0, 0.0, 0.0), Point::new(2.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        let big = [Point::new(10.0, 0.0, 0.0), Point::new(16.0, 0.0, 0.0), Point::new(10.0, 3.0, 0.0)];
        let pts = sample_surface(&tri_mesh(&[small, big]), 10_000, 1).unwrap();
        let in_big = pts.iter().filter(|p| p.x >= 10.0).count();
        assert!((8700..=9300).contains(&in_big), "{in_big}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = shapes::centered_box(1.0, 1.0, 1.0);
        assert_eq!(sample_surface(&m, 100, 5).unwrap(), sample_surface(&m, 100, 5).unwrap());
        assert_ne!(sample_surface(&m, 100, 5).unwrap(), sample_surface(&m, 100, 6).unwrap());
        assert!(sample_surface(&TriMesh::default(), 10, 0).is_err());
    }

    #[test]
    fn chamfer_basics() {
        let m = shapes::centered_box(1.0, 1.0, 1.0);
        let a = sample_surface(&m, 500, 1).unwrap();
        let b = sample_surface(&m, 500, 2).unwrap();
        assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
        assert_eq!(chamfer(&a, &b).unwrap(), chamfer(&b, &a).unwrap());
        assert!(chamfer(&a, &[]).is_err());
        // many coincident and coplanar points
        let same = vec![Point::new(0.1, 0.2, 0.3); 200];
        let d = chamfer(&same, &[Point::new(0.1, 0.2, 0.4)]).unwrap();
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn surface_chamfer_measures_geometry() {
        let m = shapes::centered_box(1.0, 1.0, 1.0);
        let fine = shapes::tessellated_box([1.0, 1.0, 1.0], 5);
        assert!(surface_chamfer(&m, &fine, 2000, 4).unwrap() < 1e-12);
        // a grown box sits 0.05 off every face
        let grown = shapes::centered_box(1.1, 1.1, 1.1);
        let d = surface_chamfer(&m, &grown, 2000, 4).unwrap();
        assert!((d - 0.05).abs() < 1e-3, "{d}");
    }

    #[test]
    fn rates() {
        assert_eq!(invalid_rate(&[true; 20]).unwrap(), 0.0);
        let mut v = vec![true; 20];
        v[3] = false;
        assert!((invalid_rate(&v).unwrap() - 5.0).abs() < 1e-12);
        assert!(invalid_rate(&[]).is_err());
        assert!(same_topology_rate(&[]).is_err());
    }

    #[test]
    fn jsd_properties() {
        let p = vec![0.25, 0.25, 0.5, 0.0];
        let q = vec![0.0, 0.5, 0.0, 0.5];
        assert_eq!(jensen_shannon(&p, &p).unwrap(), 0.0);
        let d = jensen_shannon(&p, &q).unwrap();
        assert!(d > 0.0 && d <= std::f64::consts::LN_2);
        assert!((d - jensen_shannon(&q, &p).unwrap()).abs() < 1e-15);
        let disjoint = jensen_shannon(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((disjoint - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn set_metrics_self_and_pigeonhole() {
        let shapes: Vec<Vec<Point>> = [shapes::centered_box(1.0, 1.0, 1.0), shapes::centered_box(1.0, 0.4, 0.4)]
            .iter()
            .map(|m| sample_surface(m, 400, 3).unwrap())
            .collect();
        let s = set_metrics(&shapes, &shapes).unwrap();
        assert_eq!(s.cov, 100.0);
        assert_eq!(s.mmd, 0.0);
        assert_eq!(s.jsd, 0.0);
        let one = set_metrics(&shapes[..1], &shapes).unwrap();
        assert_eq!(one.cov, 50.0);
        assert!(set_metrics(&[], &shapes).is_err());
    }

    #[test]
    fn report_lines() {
        let mut buf = Vec::new();
        write_report(&mut buf, &[MetricRecord::new("cd", &["cube"], 0.5), MetricRecord::new("ir", &[], 0.0)])
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"metric":"cd","ids":["cube"],"value":0.5}"#);
        assert_eq!(lines.len(), 2);
    }
}
