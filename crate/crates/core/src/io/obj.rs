//! Wavefront OBJ with one `g face_<id>` group per face.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::brep::check_watertight;
use crate::error::{Error, Result};
use crate::mesh::SegmentedMesh;
use crate::Point;

/// A parsed OBJ plus how far it is from a closed 2-manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjMesh {
    pub mesh: SegmentedMesh,
    /// Edges with one triangle or more than two.
    pub bad_edges: usize,
}

impl ObjMesh {
    pub fn is_manifold(&self) -> bool {
        self.bad_edges == 0
    }
}

/// Parse OBJ text. Labels follow the order in which groups first receive a
/// face; polygons are fan-triangulated from their first corner.
pub fn parse_segmented_obj(text: &str) -> Result<ObjMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut labels = Vec::new();
    let mut group_label: HashMap<String, usize> = HashMap::new();
    let mut current: Option<String> = None;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut it = line.split_whitespace();
        let Some(tag) = it.next() else { continue };
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        match tag {
            "v" => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>().map_err(|e| parse_err(format!("vertex coordinate {s:?}: {e}"))))
                    .collect::<Result<_>>()?;
                if c.len() != 3 || c.iter().any(|x| !x.is_finite()) {
                    return Err(parse_err("vertex needs three finite coordinates".into()));
                }
                vertices.push(Point::new(c[0], c[1], c[2]));
            }
            "g" | "o" => {
                let name: Vec<&str> = it.collect();
                current = Some(name.join(" "));
            }
            "f" => {
                let Some(group) = &current else {
                    return Err(parse_err("unlabeled geometry: face outside any group".into()));
                };
                let idx: Vec<usize> = it
                    .map(|s| {
                        let first = s.split('/').next().unwrap_or("");
                        let i: i64 = first
                            .parse()
                            .map_err(|e| parse_err(format!("face index {s:?}: {e}")))?;
                        let resolved = if i < 0 { vertices.len() as i64 + i } else { i - 1 };
                        if resolved < 0 || resolved >= vertices.len() as i64 {
                            return Err(parse_err(format!("face index {i} out of range")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(format!("face with {} corners", idx.len())));
                }
                let next = group_label.len();
                let label = *group_label.entry(group.clone()).or_insert(next);
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                    labels.push(label);
                }
            }
            _ => {}
        }
    }
    if triangles.is_empty() {
        return Err(Error::Empty("OBJ faces"));
    }
    let mesh = SegmentedMesh::new(vertices, triangles, labels)?;
    let report = check_watertight(&mesh);
    Ok(ObjMesh {
        bad_edges: report.boundary_edges.len() + report.non_manifold_edges.len(),
        mesh,
    })
}

pub fn read_segmented_obj(path: impl AsRef<Path>) -> Result<ObjMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_segmented_obj(&text)
}

/// OBJ text for `mesh`; faces appear in label order, each under `g face_<label>`.
pub fn format_segmented_obj(mesh: &SegmentedMesh) -> String {
    let mut s = String::new();
    for p in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    for face in 0..mesh.face_count {
        let mut tris = mesh.face_triangles(face).peekable();
        if tris.peek().is_none() {
            continue;
        }
        let _ = writeln!(s, "g face_{face}");
        for t in tris {
            let [a, b, c] = mesh.triangles[t];
            let _ = writeln!(s, "f {} {} {}", a + 1, b + 1, c + 1);
        }
    }
    s
}

pub fn write_segmented_obj(mesh: &SegmentedMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_segmented_obj(mesh)).map_err(|e| Error::io(path, e))
}
