//! Quantized topology signatures and their comparison under face relabeling.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::FacetedBRep;
use crate::Point;

/// Buckets per axis over `[-1, 1]` (4 bits).
pub const QUANT_LEVELS: u8 = 16;

/// Largest face count for which symmetric cases are searched exhaustively.
const MAX_SEARCH_FACES: usize = 12;

pub type QuantizedPoint = [u8; 3];

#[inline]
pub fn quantize(x: f64) -> u8 {
    let levels = QUANT_LEVELS as f64;
    ((x + 1.0) / 2.0 * levels).floor().clamp(0.0, levels - 1.0) as u8
}

pub fn quantize_point(p: &Point) -> QuantizedPoint {
    [quantize(p.x), quantize(p.y), quantize(p.z)]
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeGeometry {
    /// Quantized end vertices, sorted.
    Open([QuantizedPoint; 2]),
    /// Quantized lexicographically smallest polyline point of a closed edge.
    Loop(QuantizedPoint),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeRecord {
    pub geometry: EdgeGeometry,
    /// Signature-local face indices, ascending.
    pub faces: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopologySignature {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub face_count: usize,
    /// Sorted quantized vertex positions.
    pub vertices: Vec<QuantizedPoint>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyMatch {
    Same,
    Different,
    /// Too many interchangeable faces to search.
    Indeterminate,
}

impl TopologySignature {
    pub fn of(b: &FacetedBRep) -> Self {
        let mut remap = vec![usize::MAX; b.faces.len()];
        let mut face_count = 0;
        for (f, face) in b.faces.iter().enumerate() {
            if !face.triangles.is_empty() {
                remap[f] = face_count;
                face_count += 1;
            }
        }
        let mut vertices: Vec<QuantizedPoint> =
            b.vertices.iter().map(|v| quantize_point(&v.position)).collect();
        vertices.sort_unstable();
        let edges = b
            .edges
            .iter()
            .map(|e| {
                let geometry = match e.ends {
                    Some([s, t]) => {
                        let (qs, qt) = (
                            quantize_point(&b.vertices[s].position),
                            quantize_point(&b.vertices[t].position),
                        );
                        EdgeGeometry::Open([qs.min(qt), qs.max(qt)])
                    }
                    None => {
                        let smallest = e
                            .polyline
                            .iter()
                            .map(|&v| b.mesh.vertices[v])
                            .min_by(|p, q| {
                                p.x.total_cmp(&q.x)
                                    .then(p.y.total_cmp(&q.y))
                                    .then(p.z.total_cmp(&q.z))
                            })
                            .unwrap_or_else(Point::origin);
                        EdgeGeometry::Loop(quantize_point(&smallest))
                    }
                };
                let [fa, fb] = e.faces.map(|f| remap[f]);
                EdgeRecord {
                    geometry,
                    faces: [fa.min(fb), fa.max(fb)],
                }
            })
            .collect();
        Self {
            vertex_count: b.vertices.len(),
            edge_count: b.edges.len(),
            face_count,
            vertices,
            edges,
        }
    }

    /// Sorted geometry of the edges bounding each face.
    fn face_invariants(&self) -> Vec<Vec<EdgeGeometry>> {
        let mut inv = vec![Vec::new(); self.face_count];
        for e in &self.edges {
            for f in e.faces {
                if f < self.face_count {
                    inv[f].push(e.geometry.clone());
                }
            }
        }
        for v in &mut inv {
            v.sort();
        }
        inv
    }
}

pub fn same_topology(a: &TopologySignature, b: &TopologySignature) -> bool {
    compare_topology(a, b) == TopologyMatch::Same
}

/// Exact match of counts, quantized vertices, and edge records under some
/// bijection between the two face sets.
pub fn compare_topology(a: &TopologySignature, b: &TopologySignature) -> TopologyMatch {
    if (a.vertex_count, a.edge_count, a.face_count) != (b.vertex_count, b.edge_count, b.face_count)
        || a.vertices != b.vertices
    {
        return TopologyMatch::Different;
    }
    fn sorted_geometry(s: &TopologySignature) -> Vec<&EdgeGeometry> {
        let mut g: Vec<&EdgeGeometry> = s.edges.iter().map(|e| &e.geometry).collect();
        g.sort();
        g
    }
    if sorted_geometry(a) != sorted_geometry(b) {
        return TopologyMatch::Different;
    }

    let (inv_a, inv_b) = (a.face_invariants(), b.face_invariants());
    let mut groups_a: BTreeMap<&Vec<EdgeGeometry>, Vec<usize>> = BTreeMap::new();
    let mut groups_b: BTreeMap<&Vec<EdgeGeometry>, Vec<usize>> = BTreeMap::new();
    for (f, inv) in inv_a.iter().enumerate() {
        groups_a.entry(inv).or_default().push(f);
    }
    for (f, inv) in inv_b.iter().enumerate() {
        groups_b.entry(inv).or_default().push(f);
    }
    if groups_a.len() != groups_b.len()
        || groups_a
            .iter()
            .zip(&groups_b)
            .any(|((ka, va), (kb, vb))| ka != kb || va.len() != vb.len())
    {
        return TopologyMatch::Different;
    }
    let ambiguous = groups_a.values().any(|g| g.len() > 1);
    if ambiguous && a.face_count > MAX_SEARCH_FACES {
        return TopologyMatch::Indeterminate;
    }

    // candidate b-faces for each a-face
    let mut candidates = vec![Vec::new(); a.face_count];
    for (key, fa) in &groups_a {
        for &f in fa {
            candidates[f] = groups_b[key].clone();
        }
    }
    let mut remaining: HashMap<(&EdgeGeometry, [usize; 2]), i64> = HashMap::new();
    for e in &b.edges {
        *remaining.entry((&e.geometry, e.faces)).or_default() += 1;
    }
    let mut incident = vec![Vec::new(); a.face_count];
    for (i, e) in a.edges.iter().enumerate() {
        for f in e.faces {
            if f < a.face_count && !incident[f].contains(&i) {
                incident[f].push(i);
            }
        }
    }
    let mut search = Search {
        a,
        candidates: &candidates,
        incident: &incident,
        mapping: vec![None; a.face_count],
        taken: vec![false; b.face_count],
        remaining,
    };
    if search.assign(0) {
        TopologyMatch::Same
    } else {
        TopologyMatch::Different
    }
}

struct Search<'s> {
    a: &'s TopologySignature,
    candidates: &'s [Vec<usize>],
    incident: &'s [Vec<usize>],
    mapping: Vec<Option<usize>>,
    taken: Vec<bool>,
    remaining: HashMap<(&'s EdgeGeometry, [usize; 2]), i64>,
}

impl<'s> Search<'s> {
    fn assign(&mut self, f: usize) -> bool {
        if f == self.a.face_count {
            return self.remaining.values().all(|&c| c == 0);
        }
        for &g in &self.candidates[f] {
            if self.taken[g] {
                continue;
            }
            self.mapping[f] = Some(g);
            self.taken[g] = true;
            let consumed = self.consume(f);
            if let Some(keys) = &consumed {
                if self.assign(f + 1) {
                    return true;
                }
                for k in keys {
                    *self.remaining.get_mut(k).unwrap() += 1;
                }
            }
            self.mapping[f] = None;
            self.taken[g] = false;
        }
        false
    }

    /// Consume edges whose faces are now all mapped; `None` if any record
    /// has no counterpart left.
    fn consume(&mut self, f: usize) -> Option<Vec<(&'s EdgeGeometry, [usize; 2])>> {
        let mut keys = Vec::new();
        for &i in &self.incident[f] {
            let e = &self.a.edges[i];
            let [x, y] = e.faces;
            let (Some(mx), Some(my)) = (self.mapping[x], self.mapping[y]) else {
                continue;
            };
            let key = (&e.geometry, [mx.min(my), mx.max(my)]);
            match self.remaining.get_mut(&key) {
                Some(c) if *c > 0 => {
                    *c -= 1;
                    keys.push(key);
                }
                _ => {
                    for k in &keys {
                        *self.remaining.get_mut(k).unwrap() += 1;
                    }
                    return None;
                }
            }
        }
        Some(keys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brep::FacetedBRep;
    use crate::grid::make_transform;
    use crate::mesh::SegmentedMesh;
    use crate::synth::shapes;

    fn normalized_signature(m: SegmentedMesh, transform_from: &SegmentedMesh) -> TopologySignature {
        let (lo, hi) = transform_from.bbox().unwrap();
        let t = make_transform(&lo, &hi).unwrap();
        FacetedBRep::from_segmented(m.transformed(|p| t.apply(p))).signature()
    }

    fn cube() -> SegmentedMesh {
        shapes::centered_box(1.0, 1.0, 1.0)
    }

    #[test]
    fn quantization_buckets() {
        assert_eq!(quantize(-1.0), 0);
        assert_eq!(quantize(1.0), 15);
        assert_eq!(quantize(-0.875), 1);
        assert_eq!(quantize(-0.8750001), 0);
        assert_eq!(quantize(5.0), 15);
        assert_eq!(quantize(-5.0), 0);
    }

    #[test]
    fn reflexive() {
        let s = normalized_signature(cube(), &cube());
        assert!(same_topology(&s, &s));
    }

    #[test]
    fn small_translation_keeps_signature() {
        // cube corners sit at +-1/1.4 = +-0.714, 0.0357 from the nearest bucket edge
        let s = normalized_signature(cube(), &cube());
        let moved = shapes::translated(cube(), [0.02, -0.02, 0.02]);
        let t = normalized_signature(moved, &cube());
        assert!(same_topology(&s, &t));
    }

    #[test]
    fn cube_differs_from_prism() {
        let s = normalized_signature(cube(), &cube());
        let p = shapes::triangular_prism(1.0, 0.87, 0.1, 1.0);
        let t = normalized_signature(p.clone(), &p);
        assert_eq!(compare_topology(&s, &t), TopologyMatch::Different);
    }

    #[test]
    fn invariant_under_face_permutation() {
        let m = shapes::l_extrusion(1.0, 0.8, 0.4, 0.35, 0.3);
        let mut permuted = m.clone();
        let perm = [5, 3, 7, 0, 1, 6, 2, 4];
        for l in &mut permuted.labels {
            *l = perm[*l];
        }
        let a = normalized_signature(m.clone(), &m);
        let b = normalized_signature(permuted, &m);
        assert!(same_topology(&a, &b));
        assert!(same_topology(&b, &a));
    }

    #[test]
    fn beyond_bucket_perturbation_differs() {
        let s = normalized_signature(cube(), &cube());
        let moved = shapes::translated(cube(), [0.2, 0.0, 0.0]);
        let t = normalized_signature(moved, &cube());
        assert!(!same_topology(&s, &t));
    }
}
