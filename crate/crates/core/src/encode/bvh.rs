//! Axis-aligned bounding volume hierarchy over mesh triangles.

use crate::{Point, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Point,
    max: Point,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: Point::from(Vec3::repeat(f64::INFINITY)),
            max: Point::from(Vec3::repeat(f64::NEG_INFINITY)),
        }
    }

    fn grow(&mut self, p: &Point) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn merge(&mut self, o: &Aabb) {
        self.min = self.min.inf(&o.min);
        self.max = self.max.sup(&o.max);
    }

    fn distance_sq(&self, p: &Point) -> f64 {
        let mut d = 0.0;
        for i in 0..3 {
            let v = if p[i] < self.min[i] {
                self.min[i] - p[i]
            } else if p[i] > self.max[i] {
                p[i] - self.max[i]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }
}

#[derive(Debug, Clone)]
enum Node {
    Inner { bounds: Aabb, left: usize, right: usize },
    Leaf { bounds: Aabb, start: usize, end: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Inner { bounds, .. } | Node::Leaf { bounds, .. } => bounds,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub fn build(vertices: &[Point], triangles: &[[usize; 3]]) -> Self {
        let boxes: Vec<Aabb> = triangles
            .iter()
            .map(|t| {
                let mut b = Aabb::empty();
                for &v in t {
                    b.grow(&vertices[v]);
                }
                b
            })
            .collect();
        let centroids: Vec<Point> = boxes
            .iter()
            .map(|b| Point::from((b.min.coords + b.max.coords) * 0.5))
            .collect();
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * triangles.len() / LEAF_SIZE + 1),
            order: (0..triangles.len()).collect(),
        };
        if !triangles.is_empty() {
            bvh.build_node(&boxes, &centroids, 0, triangles.len());
        }
        bvh
    }

    fn build_node(&mut self, boxes: &[Aabb], centroids: &[Point], start: usize, end: usize) -> usize {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &t in &self.order[start..end] {
            bounds.merge(&boxes[t]);
            cbounds.grow(&centroids[t]);
        }
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bounds, start, end });
            return id;
        }
        let axis = (cbounds.max - cbounds.min).imax();
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis])
        });
        self.nodes.push(Node::Leaf { bounds, start, end });
        let left = self.build_node(boxes, centroids, start, mid);
        let right = self.build_node(boxes, centroids, mid, end);
        self.nodes[id] = Node::Inner { bounds, left, right };
        id
    }

    /// Calls `visit` for every triangle whose box lies within `radius_sq` of `p`.
    pub fn for_each_near(&self, p: &Point, radius_sq: f64, mut visit: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bounds().distance_sq(p) > radius_sq {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => self.order[start..end].iter().for_each(|&t| visit(t)),
                Node::Inner { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
    }

    /// Smallest `dist_sq(t)` over triangles accepted by `dist_sq` (which
    /// returns `None` to skip a triangle).
    pub fn nearest(&self, p: &Point, mut dist_sq: impl FnMut(usize) -> Option<f64>) -> Option<(f64, usize)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(f64, usize)> = None;
        let mut stack = vec![(0usize, self.nodes[0].bounds().distance_sq(p))];
        while let Some((n, d)) = stack.pop() {
            if best.is_some_and(|(b, _)| d >= b) {
                continue;
            }
            match self.nodes[n] {
                Node::Leaf { start, end, .. } => {
                    for &t in &self.order[start..end] {
                        if let Some(dt) = dist_sq(t) {
                            if best.map_or(true, |(b, bt)| dt < b || (dt == b && t < bt)) {
                                best = Some((dt, t));
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[left].bounds().distance_sq(p);
                    let dr = self.nodes[right].bounds().distance_sq(p);
                    // visit the closer child first
                    if dl < dr {
                        stack.push((right, dr));
                        stack.push((left, dl));
                    } else {
                        stack.push((left, dl));
                        stack.push((right, dr));
                    }
                }
            }
        }
        best
    }
}
