//! Label-aware Laplacian smoothing.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::mesh::{edge_triangles, SegmentedMesh};
use crate::Point;

pub const DEFAULT_DAMPING: f64 = 0.5;
pub const DEFAULT_SMOOTH_ITERATIONS: usize = 10;

/// How a vertex may move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexRole {
    /// Inside one label patch; averages all neighbours.
    Interior(Vec<usize>),
    /// On a boundary polyline between two labels; averages its two
    /// polyline neighbours.
    Boundary([usize; 2]),
    /// Junctions, open-border and non-manifold vertices.
    Fixed,
}

pub fn vertex_roles(mesh: &SegmentedMesh) -> Vec<VertexRole> {
    let n = mesh.vertices.len();
    let mut neighbours = vec![BTreeSet::new(); n];
    let mut labels = vec![BTreeSet::new(); n];
    let mut boundary = vec![Vec::new(); n];
    let mut pinned = vec![false; n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for &v in tri {
            labels[v].insert(mesh.labels[t]);
        }
    }
    for (key, tris) in edge_triangles(&mesh.triangles) {
        let (a, b) = (key.0, key.1);
        neighbours[a].insert(b);
        neighbours[b].insert(a);
        match tris[..] {
            [t0, t1] => {
                if mesh.labels[t0] != mesh.labels[t1] {
                    boundary[a].push(b);
                    boundary[b].push(a);
                }
            }
            _ => {
                pinned[a] = true;
                pinned[b] = true;
            }
        }
    }
    (0..n)
        .map(|v| {
            if pinned[v] || neighbours[v].is_empty() {
                return VertexRole::Fixed;
            }
            match (labels[v].len(), &boundary[v][..]) {
                (1, []) => VertexRole::Interior(neighbours[v].iter().copied().collect()),
                (2, &[a, b]) => VertexRole::Boundary([a, b]),
                _ => VertexRole::Fixed,
            }
        })
        .collect()
}

/// `iterations` Jacobi steps of damped uniform Laplacian smoothing.
/// Connectivity and labels are unchanged.
pub fn smooth(mesh: &SegmentedMesh, iterations: usize, damping: f64) -> SegmentedMesh {
    let roles = vertex_roles(mesh);
    let mut out = mesh.clone();
    for _ in 0..iterations {
        let old = &out.vertices;
        let next: Vec<Point> = roles
            .par_iter()
            .enumerate()
            .map(|(v, role)| {
                let target = match role {
                    VertexRole::Interior(ns) => average(old, ns),
                    VertexRole::Boundary(ns) => average(old, ns),
                    VertexRole::Fixed => return old[v],
                };
                old[v] + (target - old[v]) * damping
            })
            .collect();
        out.vertices = next;
    }
    out
}

fn average(points: &[Point], ids: &[usize]) -> Point {
    let sum = ids.iter().fold(nalgebra::Vector3::zeros(), |acc, &i| acc + points[i].coords);
    Point::from(sum / ids.len() as f64)
}
