//! The per-triangle three-way rule and its interpolation formulas.

use crate::mesh::EdgeKey;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleCase {
    /// All three vertices share a minimal face.
    Uniform,
    /// Two vertices agree; `odd` is the local index of the third.
    Split { odd: usize },
    /// Three distinct minimal faces meet inside the triangle.
    Junction,
}

pub fn triangle_rule(labels: [usize; 3]) -> TriangleCase {
    let [a, b, c] = labels;
    match (a == b, b == c, a == c) {
        (true, true, _) => TriangleCase::Uniform,
        (true, false, _) => TriangleCase::Split { odd: 2 },
        (false, true, _) => TriangleCase::Split { odd: 0 },
        (false, false, true) => TriangleCase::Split { odd: 1 },
        (false, false, false) => TriangleCase::Junction,
    }
}

/// Parameter along a mesh edge where two linearly interpolated UDFs agree.
///
/// `a1, b1` are the UDFs of faces A and B at the start of the edge and
/// `a2, b2` at its end. The caller guarantees `a1 - b1` and `a2 - b2` have
/// opposite signs; degenerate inputs are clamped into `[0, 1]`.
pub fn edge_crossing(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let d1 = a1 - b1;
    let d2 = a2 - b2;
    let denom = d1 - d2;
    if denom == 0.0 {
        return 0.5;
    }
    (d1 / denom).clamp(0.0, 1.0)
}

const CENTROID: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];

/// Barycentric point where the interpolated UDFs of faces A, B and C agree.
///
/// `values[i] = [udf_A, udf_B, udf_C]` at triangle vertex `i`. Falls back to
/// the centroid when the system is singular or the solution leaves the
/// triangle.
pub fn interior_covertex(values: [[f64; 3]; 3]) -> [f64; 3] {
    // g_i = A_i - B_i, h_i = A_i - C_i; solve sum l_i g_i = sum l_i h_i = 0, sum l_i = 1
    let g: [f64; 3] = std::array::from_fn(|i| values[i][0] - values[i][1]);
    let h: [f64; 3] = std::array::from_fn(|i| values[i][0] - values[i][2]);
    // eliminate l2 = 1 - l0 - l1
    let (m00, m01, r0) = (g[0] - g[2], g[1] - g[2], -g[2]);
    let (m10, m11, r1) = (h[0] - h[2], h[1] - h[2], -h[2]);
    let det = m00 * m11 - m01 * m10;
    let scale = (m00.abs() + m01.abs()) * (m10.abs() + m11.abs());
    if !(det.abs() > 1e-12 * scale) || scale == 0.0 {
        return CENTROID;
    }
    let l0 = (r0 * m11 - m01 * r1) / det;
    let l1 = (m00 * r1 - r0 * m10) / det;
    let l2 = 1.0 - l0 - l1;
    let l = [l0, l1, l2];
    if l.iter().all(|x| x.is_finite() && *x >= 0.0) {
        l
    } else {
        CENTROID
    }
}

/// Where a boundary segment ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentEnd {
    /// Crossing on a mesh edge.
    Edge { edge: EdgeKey, point: Point },
    /// Junction point inside a triangle.
    CoVertex { triangle: usize, point: Point },
}

impl SegmentEnd {
    pub fn point(&self) -> Point {
        match *self {
            SegmentEnd::Edge { point, .. } | SegmentEnd::CoVertex { point, .. } => point,
        }
    }
}

/// Piece of a co-minimum curve inside one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySegment {
    /// Labels of the two faces it separates, ascending.
    pub face_pair: [usize; 2],
    pub ends: [SegmentEnd; 2],
}
