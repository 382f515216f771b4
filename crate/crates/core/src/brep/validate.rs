use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{check_watertight, FacetedBRep};
use crate::mesh::{edge_triangles, EdgeKey};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Underlying mesh has open or non-manifold edges, or unused vertices.
    MeshNotWatertight {
        boundary_edges: usize,
        non_manifold_edges: usize,
        isolated_vertices: usize,
    },
    /// Edge face pair references a missing face or the same face twice.
    BadFacePair { edge: usize, faces: [usize; 2] },
    /// Open edge without two valid end vertices, or closed edge with ends.
    BadEndpoints { edge: usize },
    /// Polyline step that is not a mesh edge between the edge's two faces.
    OffBoundary { edge: usize, from: usize, to: usize },
    /// Junction vertex with fewer than three incident edge ends.
    LowDegreeVertex { vertex: usize, degree: usize },
    /// Vertex edge list disagrees with edge end references.
    VertexIncidence { vertex: usize },
    /// Face edge list disagrees with edge face pairs.
    FaceIncidence { face: usize },
    /// Triangle owned by zero or several faces, or by a face of another label.
    TriangleCoverage { triangle: usize, owners: usize },
    /// Mesh edge between two faces that no B-Rep edge runs along.
    UncoveredBoundary { from: usize, to: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TopologyReport {
    pub violations: Vec<Violation>,
}

impl TopologyReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every structural invariant of `b`; an empty report means valid.
pub fn validate_topology(b: &FacetedBRep) -> TopologyReport {
    let mut violations = Vec::new();
    let mesh = &b.mesh;

    let wt = check_watertight(mesh);
    if !wt.is_watertight() {
        violations.push(Violation::MeshNotWatertight {
            boundary_edges: wt.boundary_edges.len(),
            non_manifold_edges: wt.non_manifold_edges.len(),
            isolated_vertices: wt.isolated_vertices.len(),
        });
    }

    // triangle ownership
    let mut owners = vec![0usize; mesh.triangles.len()];
    let mut owner = vec![usize::MAX; mesh.triangles.len()];
    for (f, face) in b.faces.iter().enumerate() {
        for &t in &face.triangles {
            if t < owners.len() {
                owners[t] += 1;
                owner[t] = f;
            }
        }
    }
    for (t, &n) in owners.iter().enumerate() {
        let label_ok = n == 1 && mesh.labels.get(t) == Some(&b.faces[owner[t]].label);
        if !label_ok {
            violations.push(Violation::TriangleCoverage { triangle: t, owners: n });
        }
    }

    let edge_map = edge_triangles(&mesh.triangles);
    let face_of = |t: usize| owner.get(t).copied().unwrap_or(usize::MAX);
    let mut covered: BTreeSet<EdgeKey> = BTreeSet::new();
    let mut degree = vec![0usize; b.vertices.len()];

    for (e, edge) in b.edges.iter().enumerate() {
        let [fa, fb] = edge.faces;
        if fa == fb || fa >= b.faces.len() || fb >= b.faces.len() {
            violations.push(Violation::BadFacePair { edge: e, faces: edge.faces });
            // keep one report per broken edge
            covered.extend(edge.segments().map(|(a, b)| EdgeKey::new(a, b)));
            continue;
        }
        let ends_ok = match edge.ends {
            None => edge.polyline.len() >= 2,
            Some([s, t]) => {
                s < b.vertices.len()
                    && t < b.vertices.len()
                    && edge.polyline.len() >= 2
                    && edge.polyline.first() == Some(&b.vertices[s].mesh_vertex)
                    && edge.polyline.last() == Some(&b.vertices[t].mesh_vertex)
            }
        };
        if !ends_ok {
            violations.push(Violation::BadEndpoints { edge: e });
            covered.extend(edge.segments().map(|(a, b)| EdgeKey::new(a, b)));
            continue;
        }
        if let Some([s, t]) = edge.ends {
            degree[s] += 1;
            degree[t] += 1;
        }
        let pair = [fa.min(fb), fa.max(fb)];
        for (from, to) in edge.segments() {
            let key = EdgeKey::new(from, to);
            let on_boundary = edge_map.get(&key).is_some_and(|tris| {
                tris.len() == 2 && {
                    let (x, y) = (face_of(tris[0]), face_of(tris[1]));
                    [x.min(y), x.max(y)] == pair
                }
            });
            if !on_boundary || !covered.insert(key) {
                violations.push(Violation::OffBoundary { edge: e, from, to });
                break;
            }
        }
    }

    for (v, &d) in degree.iter().enumerate() {
        if d < 3 {
            violations.push(Violation::LowDegreeVertex { vertex: v, degree: d });
        }
    }

    let mut vertex_edges: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut face_edges: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (e, edge) in b.edges.iter().enumerate() {
        if let Some(ends) = edge.ends {
            for v in ends {
                vertex_edges.entry(v).or_default().insert(e);
            }
        }
        for f in edge.faces {
            face_edges.entry(f).or_default().insert(e);
        }
    }
    for (v, vertex) in b.vertices.iter().enumerate() {
        let listed: BTreeSet<usize> = vertex.edges.iter().copied().collect();
        if listed != vertex_edges.remove(&v).unwrap_or_default() {
            violations.push(Violation::VertexIncidence { vertex: v });
        }
    }
    for (f, face) in b.faces.iter().enumerate() {
        let listed: BTreeSet<usize> = face.edges.iter().copied().collect();
        if listed != face_edges.remove(&f).unwrap_or_default() {
            violations.push(Violation::FaceIncidence { face: f });
        }
    }

    for (key, tris) in &edge_map {
        if let [x, y] = tris[..] {
            if face_of(x) != face_of(y) && !covered.contains(key) {
                violations.push(Violation::UncoveredBoundary { from: key.0, to: key.1 });
            }
        }
    }

    TopologyReport { violations }
}
