//! Triangle meshes, with and without per-triangle face labels.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::Point;

/// Undirected mesh edge with the smaller vertex index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey(pub usize, pub usize);

impl EdgeKey {
    #[inline]
    pub fn new(a: usize, b: usize) -> Self {
        if a < b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Self {
        Self {
            vertices,
            triangles,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn bbox(&self) -> Option<(Point, Point)> {
        bbox_of(self.vertices.iter())
    }

    /// Triangles incident to every undirected edge, in triangle order.
    pub fn edge_triangles(&self) -> BTreeMap<EdgeKey, Vec<usize>> {
        edge_triangles(&self.triangles)
    }

    /// Sum of signed tetrahedron volumes; positive for outward-facing closed meshes.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|v| self.vertices[v].coords);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn transformed(&self, f: impl Fn(&Point) -> Point) -> Self {
        Self {
            vertices: self.vertices.iter().map(f).collect(),
            triangles: self.triangles.clone(),
        }
    }
}

pub(crate) fn edge_triangles(triangles: &[[usize; 3]]) -> BTreeMap<EdgeKey, Vec<usize>> {
    let mut map: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for e in 0..3 {
            map.entry(EdgeKey::new(tri[e], tri[(e + 1) % 3]))
                .or_default()
                .push(t);
        }
    }
    map
}

pub(crate) fn bbox_of<'a>(points: impl Iterator<Item = &'a Point>) -> Option<(Point, Point)> {
    let mut it = points.peekable();
    let first = **it.peek()?;
    Some(it.fold((first, first), |(lo, hi), p| {
        (lo.inf(p), hi.sup(p))
    }))
}

/// Triangle mesh whose triangles carry a B-Rep face id in `[0, face_count)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegmentedMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub labels: Vec<usize>,
    pub face_count: usize,
}

impl SegmentedMesh {
    /// Build and validate: labels in range, every face id used, indices valid.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let face_count = labels.iter().max().map_or(0, |m| m + 1);
        let mesh = Self {
            vertices,
            triangles,
            labels,
            face_count,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Like `new` but without requiring every face id to own a triangle.
    pub fn with_face_count(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        labels: Vec<usize>,
        face_count: usize,
    ) -> Result<Self> {
        let mesh = Self {
            vertices,
            triangles,
            labels,
            face_count,
        };
        mesh.check_indices()?;
        Ok(mesh)
    }

    fn check_indices(&self) -> Result<()> {
        if self.labels.len() != self.triangles.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} triangles",
                self.labels.len(),
                self.triangles.len()
            )));
        }
        let n = self.vertices.len();
        if let Some(t) = self.triangles.iter().position(|t| t.iter().any(|&v| v >= n)) {
            return Err(Error::InvalidArgument(format!(
                "triangle {t} references a vertex beyond {n}"
            )));
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= self.face_count) {
            return Err(Error::InvalidFace {
                face: bad,
                face_count: self.face_count,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_indices()?;
        let mut used = vec![false; self.face_count];
        for &l in &self.labels {
            used[l] = true;
        }
        if let Some(f) = used.iter().position(|u| !u) {
            return Err(Error::InvalidArgument(format!("face {f} has no triangles")));
        }
        if self.face_count == 0 {
            return Err(Error::Empty("segmented mesh has no faces"));
        }
        Ok(())
    }

    /// Drop triangles that repeat a vertex index.
    pub fn cleaned(mut self) -> Self {
        let keep: Vec<bool> = self
            .triangles
            .iter()
            .map(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .collect();
        let mut k = keep.iter();
        self.triangles.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        self.labels.retain(|_| *k.next().unwrap());
        self
    }

    pub fn to_trimesh(&self) -> TriMesh {
        TriMesh::new(self.vertices.clone(), self.triangles.clone())
    }

    pub fn as_trimesh_ref(&self) -> TriMeshRef<'_> {
        TriMeshRef {
            vertices: &self.vertices,
            triangles: &self.triangles,
        }
    }

    pub fn bbox(&self) -> Option<(Point, Point)> {
        bbox_of(self.vertices.iter())
    }

    pub fn face_triangles(&self, face: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == face)
            .map(|(t, _)| t)
    }

    pub fn transformed(&self, f: impl Fn(&Point) -> Point) -> Self {
        Self {
            vertices: self.vertices.iter().map(f).collect(),
            ..self.clone()
        }
    }
}

/// Borrowed view over vertex and triangle arrays.
#[derive(Debug, Clone, Copy)]
pub struct TriMeshRef<'a> {
    pub vertices: &'a [Point],
    pub triangles: &'a [[usize; 3]],
}

impl<'a> From<&'a TriMesh> for TriMeshRef<'a> {
    fn from(m: &'a TriMesh) -> Self {
        Self {
            vertices: &m.vertices,
            triangles: &m.triangles,
        }
    }
}

impl<'a> From<&'a SegmentedMesh> for TriMeshRef<'a> {
    fn from(m: &'a SegmentedMesh) -> Self {
        m.as_trimesh_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_key_is_unordered() {
        assert_eq!(EdgeKey::new(4, 1), EdgeKey::new(1, 4));
    }

    #[test]
    fn unused_face_id_rejected() {
        let v = vec![Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        let m = SegmentedMesh::with_face_count(v, vec![[0, 1, 2]], vec![0], 2).unwrap();
        assert!(m.validate().is_err());
    }

    #[test]
    fn cleanup_drops_repeated_indices() {
        let v = vec![Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        let m = SegmentedMesh::new(v, vec![[0, 1, 2], [0, 0, 1]], vec![0, 0]).unwrap();
        let m = m.cleaned();
        assert_eq!(m.triangles.len(), 1);
        assert_eq!(m.labels.len(), 1);
    }
}
