//! Quadric-error edge collapse restricted to label interiors.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use super::smooth::{vertex_roles, VertexRole};
use crate::error::{Error, Result};
use crate::mesh::SegmentedMesh;
use crate::Point;

pub const DEFAULT_SIMPLIFY_RATIO: f64 = 0.5;

/// Symmetric 4x4 plane quadric, upper triangle row by row.
#[derive(Debug, Clone, Copy, Default)]
struct Quadric([f64; 10]);

impl Quadric {
    fn plane(n: [f64; 4]) -> Self {
        let [a, b, c, d] = n;
        Self([a * a, a * b, a * c, a * d, b * b, b * c, b * d, c * c, c * d, d * d])
    }

    fn add(&mut self, o: &Quadric) {
        self.0.iter_mut().zip(o.0).for_each(|(x, y)| *x += y);
    }

    fn eval(&self, p: &Point) -> f64 {
        let q = &self.0;
        let (x, y, z) = (p.x, p.y, p.z);
        q[0] * x * x + 2.0 * q[1] * x * y + 2.0 * q[2] * x * z + 2.0 * q[3] * x
            + q[4] * y * y + 2.0 * q[5] * y * z + 2.0 * q[6] * y
            + q[7] * z * z + 2.0 * q[8] * z
            + q[9]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    cost: f64,
    from: usize,
    to: usize,
    stamps: (u32, u32),
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, ties by vertex ids for determinism
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.from.cmp(&self.from))
            .then_with(|| other.to.cmp(&self.to))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct State<'a> {
    points: &'a [Point],
    triangles: Vec<[usize; 3]>,
    alive: Vec<bool>,
    labels: &'a [usize],
    incident: Vec<Vec<usize>>,
    removable: Vec<bool>,
    quadrics: Vec<Quadric>,
    stamps: Vec<u32>,
    remaining: Vec<usize>,
    target: Vec<usize>,
}

impl State<'_> {
    fn neighbours(&self, v: usize) -> BTreeSet<usize> {
        self.incident[v]
            .iter()
            .flat_map(|&t| self.triangles[t])
            .filter(|&w| w != v)
            .collect()
    }

    fn push_candidates(&self, u: usize, heap: &mut BinaryHeap<Candidate>) {
        if !self.removable[u] {
            return;
        }
        for v in self.neighbours(u) {
            let mut q = self.quadrics[u];
            q.add(&self.quadrics[v]);
            heap.push(Candidate {
                cost: q.eval(&self.points[v]).max(0.0),
                from: u,
                to: v,
                stamps: (self.stamps[u], self.stamps[v]),
            });
        }
    }

    fn legal(&self, u: usize, v: usize) -> bool {
        let shared: Vec<usize> = self.incident[u]
            .iter()
            .copied()
            .filter(|&t| self.triangles[t].contains(&v))
            .collect();
        if shared.len() != 2 {
            return false;
        }
        let label = self.labels[shared[0]];
        if self.remaining[label] < self.target[label] + 2 {
            return false;
        }
        // link condition
        let opposite: BTreeSet<usize> = shared
            .iter()
            .flat_map(|&t| self.triangles[t])
            .filter(|&w| w != u && w != v)
            .collect();
        let common: BTreeSet<usize> = self
            .neighbours(u)
            .intersection(&self.neighbours(v))
            .copied()
            .collect();
        if common != opposite {
            return false;
        }
        // no flipped or collapsed triangles
        for &t in &self.incident[u] {
            let tri = self.triangles[t];
            if tri.contains(&v) {
                continue;
            }
            let before = normal(self.points, tri);
            let after = normal(self.points, tri.map(|w| if w == u { v } else { w }));
            if after.norm_squared() <= 1e-24 || before.dot(&after) < 0.0 {
                return false;
            }
        }
        true
    }

    fn collapse(&mut self, u: usize, v: usize, heap: &mut BinaryHeap<Candidate>) {
        let tris = std::mem::take(&mut self.incident[u]);
        for t in tris {
            if self.triangles[t].contains(&v) {
                self.alive[t] = false;
                self.remaining[self.labels[t]] -= 1;
                for w in self.triangles[t] {
                    self.incident[w].retain(|&x| x != t);
                }
            } else {
                for w in self.triangles[t].iter_mut() {
                    if *w == u {
                        *w = v;
                    }
                }
                self.incident[v].push(t);
            }
        }
        let qu = self.quadrics[u];
        self.quadrics[v].add(&qu);
        self.removable[u] = false;
        let ring = self.neighbours(v);
        self.stamps[v] += 1;
        for &w in &ring {
            self.stamps[w] += 1;
        }
        self.push_candidates(v, heap);
        for w in ring {
            self.push_candidates(w, heap);
        }
    }
}

fn normal(points: &[Point], [a, b, c]: [usize; 3]) -> nalgebra::Vector3<f64> {
    (points[b] - points[a]).cross(&(points[c] - points[a]))
}

/// Collapse label-interior vertices into neighbours until each face keeps
/// about `target_ratio` of its triangles. Boundary polylines, junctions
/// and their positions are untouched; removed vertices are dropped.
pub fn simplify(mesh: &SegmentedMesh, target_ratio: f64) -> Result<SegmentedMesh> {
    if !(target_ratio > 0.0 && target_ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "simplify ratio {target_ratio} outside (0, 1]"
        )));
    }
    if target_ratio == 1.0 {
        return Ok(mesh.clone());
    }
    let n = mesh.vertices.len();
    let roles = vertex_roles(mesh);
    let mut incident = vec![Vec::new(); n];
    let mut quadrics = vec![Quadric::default(); n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let nrm = normal(&mesh.vertices, *tri);
        let len = nrm.norm();
        let plane = if len > 0.0 {
            let u = nrm / len;
            Quadric::plane([u.x, u.y, u.z, -u.dot(&mesh.vertices[tri[0]].coords)])
        } else {
            Quadric::default()
        };
        for &v in tri {
            incident[v].push(t);
            quadrics[v].add(&plane);
        }
    }
    let mut remaining = vec![0usize; mesh.face_count];
    for &l in &mesh.labels {
        remaining[l] += 1;
    }
    let target = remaining
        .iter()
        .map(|&c| (c as f64 * target_ratio).ceil() as usize)
        .collect();
    let mut state = State {
        points: &mesh.vertices,
        triangles: mesh.triangles.clone(),
        alive: vec![true; mesh.triangles.len()],
        labels: &mesh.labels,
        incident,
        removable: roles.iter().map(|r| matches!(r, VertexRole::Interior(_))).collect(),
        quadrics,
        stamps: vec![0; n],
        remaining,
        target,
    };
    let mut heap = BinaryHeap::new();
    for u in 0..n {
        state.push_candidates(u, &mut heap);
    }
    while let Some(c) = heap.pop() {
        let (u, v) = (c.from, c.to);
        if !state.removable[u] || c.stamps != (state.stamps[u], state.stamps[v]) {
            continue;
        }
        if state.legal(u, v) {
            state.collapse(u, v, &mut heap);
        }
    }

    let mut remap = vec![usize::MAX; n];
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut labels = Vec::new();
    for (t, tri) in state.triangles.iter().enumerate() {
        if !state.alive[t] {
            continue;
        }
        let mapped = tri.map(|v| {
            if remap[v] == usize::MAX {
                remap[v] = vertices.len();
                vertices.push(mesh.vertices[v]);
            }
            remap[v]
        });
        triangles.push(mapped);
        labels.push(mesh.labels[t]);
    }
    Ok(SegmentedMesh {
        vertices,
        triangles,
        labels,
        face_count: mesh.face_count,
    })
}
