//! Faceted B-Rep as JSON plus a companion segmented OBJ.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::obj::write_segmented_obj;
use crate::brep::FacetedBRep;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub position: [f64; 3],
    pub mesh_vertex: usize,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: usize,
    pub face_pair: [usize; 2],
    pub closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoints: Option<[usize; 2]>,
    /// Mesh vertex indices into the companion OBJ (0-based).
    pub polyline: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub id: usize,
    pub label: usize,
    pub triangles: Vec<usize>,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incidence {
    pub face_edges: Vec<Vec<usize>>,
    pub edge_vertices: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BRepDocument {
    pub mesh: String,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    pub faces: Vec<FaceRecord>,
    pub incidence: Incidence,
}

impl BRepDocument {
    /// `mesh` names the companion OBJ file.
    pub fn new(b: &FacetedBRep, mesh: impl Into<String>) -> Self {
        let edges: Vec<EdgeRecord> = b
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| EdgeRecord {
                id,
                face_pair: e.faces,
                closed: e.is_closed(),
                endpoints: e.ends,
                polyline: e.polyline.clone(),
            })
            .collect();
        let faces: Vec<FaceRecord> = b
            .faces
            .iter()
            .enumerate()
            .map(|(id, f)| FaceRecord {
                id,
                label: f.label,
                triangles: f.triangles.clone(),
                edges: f.edges.clone(),
            })
            .collect();
        Self {
            mesh: mesh.into(),
            vertices: b
                .vertices
                .iter()
                .enumerate()
                .map(|(id, v)| VertexRecord {
                    id,
                    position: [v.position.x, v.position.y, v.position.z],
                    mesh_vertex: v.mesh_vertex,
                    edges: v.edges.clone(),
                })
                .collect(),
            incidence: Incidence {
                face_edges: faces.iter().map(|f| f.edges.clone()).collect(),
                edge_vertices: edges
                    .iter()
                    .map(|e| e.endpoints.map(|p| p.to_vec()).unwrap_or_default())
                    .collect(),
            },
            edges,
            faces,
        }
    }
}

pub fn format_brep_json(b: &FacetedBRep, mesh: &str) -> String {
    let mut s = serde_json::to_string_pretty(&BRepDocument::new(b, mesh)).expect("document serializes");
    s.push('\n');
    s
}

/// Write `path` and the mesh next to it with an `.obj` extension.
/// Returns the OBJ path.
pub fn write_brep_json(b: &FacetedBRep, path: impl AsRef<Path>) -> Result<PathBuf> {
    let path = path.as_ref();
    let obj = path.with_extension("obj");
    let name = obj
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    std::fs::write(path, format_brep_json(b, &name)).map_err(|e| Error::io(path, e))?;
    write_segmented_obj(&b.mesh, &obj)?;
    Ok(obj)
}

pub fn read_brep_json(path: impl AsRef<Path>) -> Result<BRepDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}
