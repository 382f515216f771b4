//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a criterion's outcome differs from `KNOWN_RED`.

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use brdf_core::brep::{
    check_watertight, compare_topology, quantize, validate_topology, FacetedBRep, TopologyMatch,
};
use brdf_core::csg::{combine, prune_empty_faces, CsgOp};
use brdf_core::encode::encode_brdf;
use brdf_core::mct::{
    edge_crossing, extract, interior_covertex, split_mesh, triangle_segments, BoundaryLayout,
    LabeledSurfaceMesh, MctOutput, SegmentEnd, VertexOrigin,
};
use brdf_core::mesh::{EdgeKey, SegmentedMesh, TriMesh};
use brdf_core::metrics::{
    chamfer, dedup, jensen_shannon, occupancy_histogram, sample_surface, RECONSTRUCTION_SAMPLES,
};
use brdf_core::pipeline::{roundtrip, Roundtrip};
use brdf_core::postproc::{
    embed_boundaries, fitted_layout, simplify, smooth, FitParams, PostprocessParams,
};
use brdf_core::synth::fuzz::FuzzShape;
use brdf_core::synth::shapes::{axis_box, centered_box, primitive_suite, translated};
use brdf_core::Point;

const RESOLUTION: usize = 64;
const TRUNCATION: f64 = 0.1;
const FUZZ_MODELS: u64 = 200;

/// Criteria expected to fail; see the README for the analysis.
const KNOWN_RED: &[usize] = &[3];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

struct FuzzStats {
    models: usize,
    valid: usize,
    max_time: Duration,
    total_time: Duration,
    leaky_meshes: usize,
    partition_violations: usize,
    shared_edges: usize,
    shared_mismatches: usize,
    junctions: usize,
}

struct SuiteModel {
    name: &'static str,
    run: Roundtrip,
    min_face_span: f64,
    leaky_meshes: usize,
    partition_violations: usize,
}

fn fuzz() -> &'static FuzzStats {
    static CELL: OnceLock<FuzzStats> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut s = FuzzStats {
            models: 0,
            valid: 0,
            max_time: Duration::ZERO,
            total_time: Duration::ZERO,
            leaky_meshes: 0,
            partition_violations: 0,
            shared_edges: 0,
            shared_mismatches: 0,
            junctions: 0,
        };
        for seed in 0..FUZZ_MODELS {
            let brdf = FuzzShape::random(seed).to_brdf(RESOLUTION).expect("fuzz model");
            let start = Instant::now();
            let out = extract(&brdf);
            let valid = matches!(&out, Ok(o) if validate_topology(&o.brep).is_valid());
            let elapsed = start.elapsed();
            s.models += 1;
            s.total_time += elapsed;
            s.max_time = s.max_time.max(elapsed);
            if valid {
                s.valid += 1;
            }
            let Ok(out) = out else { continue };
            let (leaky, partition) = mesh_checks(&out);
            s.leaky_meshes += leaky;
            s.partition_violations += partition;
            let (edges, bad) = shared_edge_check(&out.labeled);
            s.shared_edges += edges;
            s.shared_mismatches += bad;
            s.junctions += out.layout.covertices.len();
        }
        s
    })
}

fn suite() -> &'static Vec<SuiteModel> {
    static CELL: OnceLock<Vec<SuiteModel>> = OnceLock::new();
    CELL.get_or_init(|| {
        let spacing = 2.0 / (RESOLUTION - 1) as f64;
        primitive_suite()
            .into_iter()
            .map(|(name, mesh)| {
                let run = roundtrip(&mesh, RESOLUTION, TRUNCATION, &PostprocessParams::default(), 7)
                    .expect("roundtrip");
                let (leaky_meshes, partition_violations) = mesh_checks(&run.mct);
                let min_face_span = face_spans(&run.reference)
                    .into_iter()
                    .fold(f64::INFINITY, f64::min)
                    / spacing;
                SuiteModel {
                    name,
                    run,
                    min_face_span,
                    leaky_meshes,
                    partition_violations,
                }
            })
            .collect()
    })
}

/// Watertight failures over the MC, split and embedded meshes, and
/// partition violations of the split and embedded meshes.
fn mesh_checks(out: &MctOutput) -> (usize, usize) {
    let fitted = fitted_layout(out, &FitParams::default()).expect("fitted layout");
    let embedded = embed_boundaries(&out.labeled, &fitted);
    let leaky = [
        check_watertight(&out.labeled.mesh).is_watertight(),
        check_watertight(&out.brep.mesh).is_watertight(),
        check_watertight(&embedded).is_watertight(),
    ]
    .iter()
    .filter(|ok| !**ok)
    .count();
    let partition = partition_violations(&out.labeled, &out.layout)
        + partition_violations(&out.labeled, &fitted)
        + label_range_violations(&embedded);
    (leaky, partition)
}

fn label_range_violations(m: &SegmentedMesh) -> usize {
    usize::from(m.labels.len() != m.triangles.len())
        + m.labels.iter().filter(|&&l| l >= m.face_count).count()
}

fn trimesh_area(m: &TriMesh) -> f64 {
    (0..m.triangles.len()).map(|t| m.triangle_area(t)).sum()
}

/// Each sub-triangle must carry the label of the surface vertex it contains,
/// and the pieces of every source triangle must cover it exactly.
fn partition_violations(labeled: &LabeledSurfaceMesh, layout: &BoundaryLayout) -> usize {
    let split = split_mesh(labeled, layout);
    let m = &split.mesh;
    let mut bad = label_range_violations(m);
    for (t, tri) in m.triangles.iter().enumerate() {
        for &v in tri {
            if let VertexOrigin::Surface(s) = split.origins[v] {
                if labeled.min_face[s] != m.labels[t] {
                    bad += 1;
                }
            }
        }
    }
    let before = trimesh_area(&labeled.mesh);
    let after = trimesh_area(&m.to_trimesh());
    if (before - after).abs() > 1e-9 * before {
        bad += 1;
    }
    bad
}

/// Crossings on every label-changing edge, as seen from both triangles.
fn shared_edge_check(labeled: &LabeledSurfaceMesh) -> (usize, usize) {
    let mut seen: HashMap<EdgeKey, Vec<[u64; 3]>> = HashMap::new();
    for t in 0..labeled.mesh.triangles.len() {
        for seg in triangle_segments(labeled, t).1 {
            for end in seg.ends {
                if let SegmentEnd::Edge { edge, point } = end {
                    seen.entry(edge)
                        .or_default()
                        .push([point.x.to_bits(), point.y.to_bits(), point.z.to_bits()]);
                }
            }
        }
    }
    let bad = seen
        .values()
        .filter(|pts| pts.len() != 2 || pts[0] != pts[1])
        .count();
    (seen.len(), bad)
}

/// Smaller in-plane bounding-box extent of every face.
fn face_spans(b: &FacetedBRep) -> Vec<f64> {
    b.faces
        .iter()
        .filter(|f| !f.triangles.is_empty())
        .map(|f| {
            let mut lo = Point::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
            let mut hi = -lo;
            for &t in &f.triangles {
                for v in b.mesh.triangles[t] {
                    lo = lo.inf(&b.mesh.vertices[v]);
                    hi = hi.sup(&b.mesh.vertices[v]);
                }
            }
            let mut ext = [hi.x - lo.x, hi.y - lo.y, hi.z - lo.z];
            ext.sort_by(f64::total_cmp);
            ext[1]
        })
        .collect()
}

fn rate(hits: usize, total: usize) -> f64 {
    100.0 * hits as f64 / total.max(1) as f64
}

fn totality() -> Outcome {
    let s = fuzz();
    let pass = s.models >= 200
        && s.valid == s.models
        && s.max_time <= Duration::from_secs(2)
        && s.total_time <= Duration::from_secs(600);
    Outcome::new(
        pass,
        format!(
            "valid {:.1}% of {} fuzz models, {} junctions, max {:.3}s, total {:.1}s",
            rate(s.valid, s.models),
            s.models,
            s.junctions,
            s.max_time.as_secs_f64(),
            s.total_time.as_secs_f64()
        ),
    )
}

fn reconstruction_topology() -> Outcome {
    let models = suite();
    let n = models.len();
    let invalid = models.iter().filter(|m| !m.run.report.valid()).count();
    let same = models
        .iter()
        .filter(|m| m.run.report.same_topology_raw && m.run.report.same_topology_post)
        .count();
    let span = models.iter().map(|m| m.min_face_span).fold(f64::INFINITY, f64::min);
    let failed: Vec<&str> = models
        .iter()
        .filter(|m| !(m.run.report.valid() && m.run.report.same_topology_post))
        .map(|m| m.name)
        .collect();
    Outcome::new(
        n >= 12 && invalid == 0 && same == n && span >= 3.0,
        format!(
            "{n} models, IR {:.2}%, STR {:.1}%, smallest face spans {span:.1} cells{}",
            rate(invalid, n),
            rate(same, n),
            if failed.is_empty() { String::new() } else { format!(", failing {failed:?}") }
        ),
    )
}

fn reconstruction_chamfer() -> Outcome {
    let models = suite();
    let stats = |f: fn(&SuiteModel) -> f64| {
        let v: Vec<f64> = models.iter().map(f).collect();
        (v.iter().sum::<f64>() / v.len() as f64, v.iter().copied().fold(0.0, f64::max))
    };
    let (raw_mean, raw_max) = stats(|m| m.run.report.chamfer_raw);
    let (post_mean, post_max) = stats(|m| m.run.report.chamfer_post);
    let half_cell = 0.5 * 2.0 / (RESOLUTION - 1) as f64;
    let ok = |mean: f64, max: f64| mean <= 2e-3 && max <= 5e-3 && max <= half_cell;
    Outcome::new(
        ok(raw_mean, raw_max) && ok(post_mean, post_max),
        format!(
            "raw mean {raw_mean:.2e} max {raw_max:.2e}; post mean {post_mean:.2e} max {post_max:.2e} \
             ({RECONSTRUCTION_SAMPLES} samples)"
        ),
    )
}

fn watertightness() -> Outcome {
    let f = fuzz();
    let suite_leaks: usize = suite().iter().map(|m| m.leaky_meshes).sum();
    Outcome::new(
        f.leaky_meshes + suite_leaks == 0,
        format!("{} fuzz and {} suite exceptions", f.leaky_meshes, suite_leaks),
    )
}

fn partition() -> Outcome {
    let f = fuzz();
    let suite_bad: usize = suite().iter().map(|m| m.partition_violations).sum();
    Outcome::new(
        f.partition_violations + suite_bad == 0,
        format!("{} fuzz and {} suite exceptions", f.partition_violations, suite_bad),
    )
}

/// Root of the linear UDF difference by bisection.
fn bisect_crossing(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let f = |t: f64| (1.0 - t) * (a1 - b1) + t * (a2 - b2);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let lo_sign = f(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer of the largest pairwise UDF gap: a 200x200 barycentric grid,
/// then repeated 200x200 grids over a shrinking window around the best node.
fn grid_covertex(v: [[f64; 3]; 3]) -> ([f64; 3], f64) {
    let gap = |l0: f64, l1: f64| {
        let l = [l0, l1, 1.0 - l0 - l1];
        let f = |k: usize| l[0] * v[0][k] + l[1] * v[1][k] + l[2] * v[2][k];
        let (a, b, c) = (f(0), f(1), f(2));
        (a - b).abs().max((b - c).abs()).max((a - c).abs())
    };
    const N: usize = 200;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let consider = |l0: f64, l1: f64, best: &mut (f64, f64, f64)| {
        if l0 < 0.0 || l1 < 0.0 || l0 + l1 > 1.0 {
            return;
        }
        let g = gap(l0, l1);
        if g < best.0 {
            *best = (g, l0, l1);
        }
    };
    for i in 0..=N {
        for j in 0..=N - i {
            consider(i as f64 / N as f64, j as f64 / N as f64, &mut best);
        }
    }
    let mut half = 2.0 / N as f64;
    for _ in 0..6 {
        let (c0, c1) = (best.1, best.2);
        let step = 2.0 * half / N as f64;
        for i in 0..=N {
            for j in 0..=N {
                consider(c0 - half + i as f64 * step, c1 - half + j as f64 * step, &mut best);
            }
        }
        half = 2.0 * step;
    }
    ([best.1, best.2, 1.0 - best.1 - best.2], best.0)
}

fn interpolation_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut crossing_err: f64 = 0.0;
    let mut crossings = 0;
    while crossings < 10_000 {
        let [a1, b1, a2, b2]: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..0.2));
        if (a1 - b1) * (a2 - b2) >= 0.0 {
            continue;
        }
        crossings += 1;
        crossing_err = crossing_err.max((edge_crossing(a1, b1, a2, b2) - bisect_crossing(a1, b1, a2, b2)).abs());
    }

    let mut covertex_err: f64 = 0.0;
    let (mut interior, mut fallback, mut fallback_bad) = (0, 0, 0);
    while interior < 1000 {
        let v: [[f64; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(0.0..0.1)));
        // an ABC triangle: vertex i is closest to face i
        if (0..3).any(|i| (0..3).any(|f| f != i && v[i][f] <= v[i][i])) {
            continue;
        }
        let (oracle, gap) = grid_covertex(v);
        let got = interior_covertex(v);
        if gap < 1e-9 && oracle.iter().all(|&x| x > 1e-6) {
            interior += 1;
            let err = (0..3).map(|k| (got[k] - oracle[k]).abs()).fold(0.0, f64::max);
            covertex_err = covertex_err.max(err);
        } else if gap > 1e-6 {
            // no interior solution: centroid expected
            fallback += 1;
            if got.iter().any(|&x| (x - 1.0 / 3.0).abs() > 1e-15) {
                fallback_bad += 1;
            }
        }
    }
    Outcome::new(
        crossing_err <= 1e-12 && covertex_err <= 1e-4 && fallback_bad == 0,
        format!(
            "edge_crossing max err {crossing_err:.1e} over {crossings}; interior_covertex max err \
             {covertex_err:.1e} over {interior}, {fallback} centroid fallbacks ({fallback_bad} wrong)"
        ),
    )
}

fn shared_edge_consistency() -> Outcome {
    let s = fuzz();
    Outcome::new(
        s.shared_mismatches == 0 && s.shared_edges > 0,
        format!("{} exceptions over {} label-changing edges", s.shared_mismatches, s.shared_edges),
    )
}

fn components(mesh: &SegmentedMesh) -> usize {
    let mut parent: Vec<usize> = (0..mesh.vertices.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for t in &mesh.triangles {
        for k in 1..3 {
            let (a, b) = (find(&mut parent, t[0]), find(&mut parent, t[k]));
            parent[a] = b;
        }
    }
    let mut roots: Vec<usize> = mesh
        .triangles
        .iter()
        .map(|t| find(&mut parent, t[0]))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Every expected quantized corner pairs with a distinct decoded vertex at
/// most one bucket away on each axis.
fn corners_match(expected: &[[u8; 3]], got: &[[u8; 3]]) -> bool {
    fn search(i: usize, expected: &[[u8; 3]], got: &[[u8; 3]], used: &mut Vec<bool>) -> bool {
        if i == expected.len() {
            return true;
        }
        for j in 0..got.len() {
            let near = (0..3).all(|k| expected[i][k].abs_diff(got[j][k]) <= 1);
            if !used[j] && near {
                used[j] = true;
                if search(i + 1, expected, got, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    expected.len() == got.len() && search(0, expected, got, &mut vec![false; got.len()])
}

fn csg() -> Outcome {
    let p = Point::new;
    let a = encode_brdf(&axis_box(p(-0.5, -0.5, -0.5), p(0.5, 0.5, 0.5)), RESOLUTION, TRUNCATION).unwrap();
    let b = encode_brdf(&axis_box(p(0.0, -0.2, 0.1), p(1.0, 0.8, 1.1)), RESOLUTION, TRUNCATION).unwrap();
    let meet = combine(&[a.clone(), b], CsgOp::Intersection).unwrap();
    let t = *meet.transform();
    let inter = prune_empty_faces(extract(&meet).unwrap().brep);
    let (lo, hi) = (p(0.0, -0.2, 0.1), p(0.5, 0.5, 0.5));
    let expected: Vec<[u8; 3]> = (0..8)
        .map(|i| {
            let c = p(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            );
            t.apply(&c).coords.map(quantize).into()
        })
        .collect();
    let got: Vec<[u8; 3]> = inter
        .vertices
        .iter()
        .map(|v| v.position.coords.map(quantize).into())
        .collect();
    let inter_ok = validate_topology(&inter).is_valid()
        && inter.counts() == (8, 12, 6)
        && corners_match(&expected, &got);

    let far = encode_brdf(&translated(centered_box(1.0, 1.0, 1.0), [1.5, 0.0, 0.0]), RESOLUTION, TRUNCATION).unwrap();
    let join = prune_empty_faces(extract(&combine(&[a, far], CsgOp::Union).unwrap()).unwrap().brep);
    let parts = components(&join.mesh);
    let union_ok = validate_topology(&join).is_valid()
        && check_watertight(&join.mesh).is_watertight()
        && parts == 2
        && join.counts().2 == 12;
    Outcome::new(
        inter_ok && union_ok,
        format!(
            "intersection V/E/F {:?}, corners within one bucket: {}; union {} components, {} faces",
            inter.counts(),
            corners_match(&expected, &got),
            parts,
            join.counts().2
        ),
    )
}

fn postprocess_topology() -> Outcome {
    let models = suite();
    let mut same = 0;
    let mut failing = Vec::new();
    for m in models {
        let layout = fitted_layout(&m.run.mct, &FitParams::default()).unwrap();
        let embedded = embed_boundaries(&m.run.mct.labeled, &layout);
        let before = FacetedBRep::from_segmented(embedded.clone()).signature();
        let smoothed = smooth(&embedded, 10, 0.5);
        let after_smooth = FacetedBRep::from_segmented(smoothed.clone()).signature();
        let after_simplify = FacetedBRep::from_segmented(simplify(&smoothed, 0.5).unwrap()).signature();
        if compare_topology(&before, &after_smooth) == TopologyMatch::Same
            && compare_topology(&before, &after_simplify) == TopologyMatch::Same
        {
            same += 1;
        } else {
            failing.push(m.name);
        }
    }
    Outcome::new(
        same == models.len(),
        format!("{:.1}% of {} models preserved{}", rate(same, models.len()), models.len(),
            if failing.is_empty() { String::new() } else { format!(", failing {failing:?}") }),
    )
}

fn square(z: f64) -> SegmentedMesh {
    let v = vec![
        Point::new(0.0, 0.0, z),
        Point::new(1.0, 0.0, z),
        Point::new(1.0, 1.0, z),
        Point::new(0.0, 1.0, z),
    ];
    SegmentedMesh::new(v, vec![[0, 1, 2], [0, 2, 3]], vec![0, 0]).unwrap()
}

fn metric_sanity() -> Outcome {
    let cube = centered_box(1.0, 1.0, 1.0);
    let pts = sample_surface(&cube, 5000, 1).unwrap();
    let self_cd = chamfer(&pts, &pts).unwrap();

    let d = 0.1;
    let lower = sample_surface(&square(0.0), 5000, 2).unwrap();
    let upper = sample_surface(&square(d), 5000, 3).unwrap();
    let plane_cd = chamfer(&lower, &upper).unwrap();
    let plane_err = (plane_cd - d).abs() / d;

    let set = vec![pts.clone(), lower.clone()];
    let hist = occupancy_histogram(&set);
    let jsd = jensen_shannon(&hist, &occupancy_histogram(&set)).unwrap();

    let sig = FacetedBRep::from_segmented(cube.clone()).signature();
    let moved = FacetedBRep::from_segmented(translated(cube, [0.3, 0.0, 0.0])).signature();
    let report = dedup(&[sig.clone(), sig, moved]);
    let dedup_ok = report.duplicates == vec![vec![0, 1]];

    Outcome::new(
        self_cd == 0.0 && plane_err <= 0.05 && jsd == 0.0 && dedup_ok,
        format!(
            "self CD {self_cd}, plane CD {plane_cd:.4} vs {d} ({:.1}% off), JSD {jsd}, duplicates {:?}",
            100.0 * plane_err,
            report.duplicates
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "totality", totality),
        (2, "reconstruction IR/STR", reconstruction_topology),
        (3, "reconstruction CD", reconstruction_chamfer),
        (4, "watertightness", watertightness),
        (5, "partition", partition),
        (6, "interpolation oracles", interpolation_oracles),
        (7, "shared-edge consistency", shared_edge_consistency),
        (8, "CSG", csg),
        (9, "post-processing topology", postprocess_topology),
        (10, "metric sanity", metric_sanity),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        println!(
            "criterion {id:>2} {name}: {} ({}) [{:.1}s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        if outcome.pass == KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: outcomes as expected (known red: {KNOWN_RED:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
