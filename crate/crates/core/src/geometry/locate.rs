//! Bounding-volume hierarchy over mesh triangles for point location.

#[derive(Debug, Clone)]
struct Node {
    lo: [f64; 2],
    hi: [f64; 2],
    /// children, or a leaf range into `order`
    kind: NodeKind,
}

#[derive(Debug, Clone)]
enum NodeKind {
    Inner(usize, usize),
    Leaf(usize, usize),
}

#[derive(Debug, Clone)]
pub struct TriangleLocator {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

const LEAF: usize = 4;

impl TriangleLocator {
    pub fn new(vertices: &[[f64; 2]], triangles: &[[usize; 3]]) -> Self {
        let mut order: Vec<usize> = (0..triangles.len()).collect();
        let boxes: Vec<([f64; 2], [f64; 2])> = triangles
            .iter()
            .map(|t| {
                let p = t.map(|k| vertices[k]);
                (
                    [p[0][0].min(p[1][0]).min(p[2][0]), p[0][1].min(p[1][1]).min(p[2][1])],
                    [p[0][0].max(p[1][0]).max(p[2][0]), p[0][1].max(p[1][1]).max(p[2][1])],
                )
            })
            .collect();
        let mut loc = TriangleLocator {
            vertices: vertices.to_vec(),
            triangles: triangles.to_vec(),
            nodes: Vec::new(),
            order: Vec::new(),
        };
        if !triangles.is_empty() {
            let n = order.len();
            loc.build(&boxes, &mut order, 0, n);
        }
        loc.order = order;
        loc
    }

    fn build(&mut self, boxes: &[([f64; 2], [f64; 2])], order: &mut [usize], a: usize, b: usize) -> usize {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for &k in &order[a..b] {
            for d in 0..2 {
                lo[d] = lo[d].min(boxes[k].0[d]);
                hi[d] = hi[d].max(boxes[k].1[d]);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node { lo, hi, kind: NodeKind::Leaf(a, b) });
        if b - a <= LEAF {
            return id;
        }
        let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
        let mid = (a + b) / 2;
        let key = |k: &usize| boxes[*k].0[axis] + boxes[*k].1[axis];
        order[a..b].select_nth_unstable_by(mid - a, |x, y| key(x).total_cmp(&key(y)).then(x.cmp(y)));
        let l = self.build(boxes, order, a, mid);
        let r = self.build(boxes, order, mid, b);
        self.nodes[id].kind = NodeKind::Inner(l, r);
        id
    }

    /// Barycentric coordinates of p in triangle t.
    pub fn barycentric(&self, t: usize, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|k| self.vertices[k]);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
        let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    fn distance_to(&self, t: usize, p: [f64; 2]) -> f64 {
        let l = self.barycentric(t, p);
        if l.iter().all(|&x| x >= 0.0) {
            return 0.0;
        }
        let v = self.triangles[t].map(|k| self.vertices[k]);
        (0..3)
            .map(|i| {
                let a = v[i];
                let b = v[(i + 1) % 3];
                let d = [b[0] - a[0], b[1] - a[1]];
                let s = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
                ((p[0] - a[0] - s * d[0]).powi(2) + (p[1] - a[1] - s * d[1]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Triangle containing p, or the nearest one within `tol`; barycentric
    /// coordinates are clamped onto the triangle in the second case.
    pub fn locate(&self, p: [f64; 2], tol: f64) -> Option<(usize, [f64; 3])> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(f64, usize)> = None;
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let n = &self.nodes[k];
            if p[0] < n.lo[0] - tol || p[0] > n.hi[0] + tol || p[1] < n.lo[1] - tol || p[1] > n.hi[1] + tol {
                continue;
            }
            match n.kind {
                NodeKind::Inner(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
                NodeKind::Leaf(a, b) => {
                    for &t in &self.order[a..b] {
                        let l = self.barycentric(t, p);
                        if l.iter().all(|&x| x >= -1e-12) {
                            return Some((t, l));
                        }
                        if tol > 0.0 {
                            let d = self.distance_to(t, p);
                            if d <= tol && best.is_none_or(|(bd, bt)| d < bd || (d == bd && t < bt)) {
                                best = Some((d, t));
                            }
                        }
                    }
                }
            }
        }
        best.map(|(_, t)| {
            let l = self.barycentric(t, p).map(|x| x.max(0.0));
            let s = l[0] + l[1] + l[2];
            (t, [l[0] / s, l[1] / s, l[2] / s])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn locates_points_in_a_grid_mesh() {
        let n = 20;
        let mut v = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                v.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..n {
                t.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                t.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let loc = TriangleLocator::new(&v, &t);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = [rng.gen::<f64>(), rng.gen::<f64>()];
            let (k, l) = loc.locate(p, 0.0).unwrap();
            let q = t[k].iter().zip(l).fold([0.0, 0.0], |acc, (&i, w)| [acc[0] + w * v[i][0], acc[1] + w * v[i][1]]);
            assert!((q[0] - p[0]).abs() < 1e-14 && (q[1] - p[1]).abs() < 1e-14);
        }
        assert!(loc.locate([1.0 + 1e-3, 0.5], 0.0).is_none());
        let (_, l) = loc.locate([1.0 + 1e-3, 0.5], 1e-2).unwrap();
        assert!(l.iter().all(|&x| x >= 0.0));
    }
}
