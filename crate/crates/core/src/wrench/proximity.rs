//! Triangle–triangle proximity against a mesh, accelerated by an AABB tree.

use nalgebra::Vector3;

use crate::data::TriMesh;

type V3 = Vector3<f64>;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: V3,
    max: V3,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: V3::repeat(f64::INFINITY),
            max: V3::repeat(f64::NEG_INFINITY),
        }
    }

    fn of(points: &[V3]) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    fn grow(&mut self, p: &V3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn merge(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&o.min),
            max: self.max.sup(&o.max),
        }
    }

    fn distance(&self, o: &Aabb) -> f64 {
        let gap = (self.min - o.max).sup(&(o.min - self.max)).sup(&V3::zeros());
        gap.norm()
    }

    fn hit_by_ray(&self, origin: &V3, inv_dir: &V3) -> bool {
        let mut t0: f64 = 0.0;
        let mut t1 = f64::INFINITY;
        for a in 0..3 {
            let ta = (self.min[a] - origin[a]) * inv_dir[a];
            let tb = (self.max[a] - origin[a]) * inv_dir[a];
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
        }
        t0 <= t1
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, first: usize, count: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

const LEAF_SIZE: usize = 4;

/// Closest pair between a query triangle set and the tree's mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proximity {
    pub distance: f64,
    /// Closest point on the tree's mesh.
    pub point: V3,
    /// Triangle of the tree's mesh holding `point`.
    pub triangle: usize,
}

/// Bounding-volume hierarchy over the triangles of one mesh, in the mesh
/// frame.
#[derive(Debug, Clone)]
pub struct MeshBvh {
    triangles: Vec<[V3; 3]>,
    /// Original triangle index for each entry of `triangles`.
    index: Vec<usize>,
    nodes: Vec<Node>,
}

impl MeshBvh {
    pub fn new(mesh: &TriMesh) -> Self {
        let tris: Vec<[V3; 3]> = (0..mesh.triangles.len()).map(|i| mesh.triangle(i)).collect();
        Self::from_triangles(tris)
    }

    pub fn from_triangles(tris: Vec<[V3; 3]>) -> Self {
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let centroids: Vec<V3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut nodes = Vec::with_capacity(2 * tris.len() / LEAF_SIZE + 1);
        if !tris.is_empty() {
            build(&tris, &centroids, &mut order, 0, tris.len(), &mut nodes);
        }
        let triangles = order.iter().map(|&i| tris[i]).collect();
        Self {
            triangles,
            index: order,
            nodes,
        }
    }

    /// Closest pair within `max_distance`, or `None` when everything is
    /// farther. Intersecting triangles give distance 0.
    pub fn closest(&self, query: &[[V3; 3]], max_distance: f64) -> Option<Proximity> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<Proximity> = None;
        let mut bound = max_distance;
        let mut stack = Vec::with_capacity(64);
        for q in query {
            let qb = Aabb::of(q);
            stack.clear();
            stack.push(0usize);
            while let Some(n) = stack.pop() {
                let node = &self.nodes[n];
                if node.bounds().distance(&qb) > bound {
                    continue;
                }
                match *node {
                    Node::Leaf { first, count, .. } => {
                        for k in first..first + count {
                            let (d, _, on_mesh) = triangle_distance(q, &self.triangles[k]);
                            if d <= bound && best.is_none_or(|b| d < b.distance) {
                                bound = d;
                                best = Some(Proximity {
                                    distance: d,
                                    point: on_mesh,
                                    triangle: self.index[k],
                                });
                            }
                        }
                    }
                    Node::Inner { left, right, .. } => {
                        let dl = self.nodes[left].bounds().distance(&qb);
                        let dr = self.nodes[right].bounds().distance(&qb);
                        if dl < dr {
                            stack.push(right);
                            stack.push(left);
                        } else {
                            stack.push(left);
                            stack.push(right);
                        }
                    }
                }
            }
        }
        best
    }

    /// Parity test: a ray from `p` crossing the surface an odd number of
    /// times means `p` is enclosed.
    pub fn contains(&self, p: &V3) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        // irrational-ish direction avoids grazing edges of axis-aligned meshes
        let dir = V3::new(0.577_215_664_9, 0.618_033_988_7, 0.532_088_886_2).normalize();
        let inv = dir.map(|d| 1.0 / d);
        let mut crossings = 0usize;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if !node.bounds().hit_by_ray(p, &inv) {
                continue;
            }
            match *node {
                Node::Leaf { first, count, .. } => {
                    for t in &self.triangles[first..first + count] {
                        if ray_triangle(p, &dir, t).is_some() {
                            crossings += 1;
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        crossings % 2 == 1
    }
}

fn build(tris: &[[V3; 3]], centroids: &[V3], order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &i in &order[start..end] {
        for v in &tris[i] {
            bounds.grow(v);
        }
        cbounds.grow(&centroids[i]);
    }
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            bounds,
            first: start,
            count: end - start,
        });
        return id;
    }
    let extent = cbounds.max - cbounds.min;
    let axis = extent.imax();
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| centroids[a][axis].total_cmp(&centroids[b][axis]));
    nodes.push(Node::Leaf {
        bounds,
        first: 0,
        count: 0,
    });
    let left = build(tris, centroids, order, start, mid, nodes);
    let right = build(tris, centroids, order, mid, end, nodes);
    let merged = nodes[left].bounds().merge(nodes[right].bounds());
    nodes[id] = Node::Inner {
        bounds: merged,
        left,
        right,
    };
    id
}

/// Distance between two triangles with the closest points on each.
pub fn triangle_distance(a: &[V3; 3], b: &[V3; 3]) -> (f64, V3, V3) {
    for (s, t) in [(a, b), (b, a)] {
        for k in 0..3 {
            if let Some(x) = segment_triangle(&s[k], &s[(k + 1) % 3], t) {
                return (0.0, x, x);
            }
        }
    }
    let mut best = (f64::INFINITY, V3::zeros(), V3::zeros());
    let mut consider = |pa: V3, pb: V3| {
        let d = (pa - pb).norm();
        if d < best.0 {
            best = (d, pa, pb);
        }
    };
    for v in a {
        consider(*v, closest_point_on_triangle(v, b));
    }
    for v in b {
        consider(closest_point_on_triangle(v, a), *v);
    }
    for i in 0..3 {
        for j in 0..3 {
            let (pa, pb) = closest_segment_segment(&a[i], &a[(i + 1) % 3], &b[j], &b[(j + 1) % 3]);
            consider(pa, pb);
        }
    }
    best
}

/// Closest point on triangle `t` to `p`.
pub fn closest_point_on_triangle(p: &V3, t: &[V3; 3]) -> V3 {
    let [a, b, c] = *t;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Closest points between segments `p1q1` and `p2q2`.
pub fn closest_segment_segment(p1: &V3, q1: &V3, p2: &V3, q2: &V3) -> (V3, V3) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    const TINY: f64 = 1e-300;
    let (s, t);
    if a <= TINY && e <= TINY {
        return (*p1, *p2);
    }
    if a <= TINY {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= TINY {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let s0 = if denom > 1e-18 * a * e { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

/// Intersection of segment `pq` with triangle `t` (Möller–Trumbore);
/// coplanar segments report no hit.
fn segment_triangle(p: &V3, q: &V3, t: &[V3; 3]) -> Option<V3> {
    let dir = q - p;
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    let scale = dir.norm() * e1.norm() * e2.norm();
    if det.abs() <= 1e-14 * scale {
        return None;
    }
    let inv = 1.0 / det;
    let s = p - t[0];
    let u = inv * s.dot(&h);
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qv = s.cross(&e1);
    let v = inv * dir.dot(&qv);
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let w = inv * e2.dot(&qv);
    (0.0..=1.0).contains(&w).then(|| p + dir * w)
}

fn ray_triangle(origin: &V3, dir: &V3, t: &[V3; 3]) -> Option<f64> {
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - t[0];
    let u = inv * s.dot(&h);
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = inv * dir.dot(&q);
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let w = inv * e2.dot(&q);
    (w > 0.0).then_some(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [V3; 3] {
        [V3::from(a), V3::from(b), V3::from(c)]
    }

    #[test]
    fn parallel_triangles_distance() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.0, 0.0, 0.5], [1.0, 0.0, 0.5], [0.0, 1.0, 0.5]);
        assert_abs_diff_eq!(triangle_distance(&a, &b).0, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn crossing_triangles_touch() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.2, 0.2, -1.0], [0.2, 0.2, 1.0], [0.3, 0.25, 0.0]);
        assert_eq!(triangle_distance(&a, &b).0, 0.0);
    }

    #[test]
    fn edge_edge_case() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, -1.0, 0.0]);
        let b = tri([0.5, 0.3, 1.0], [0.5, 0.3, -1.0], [0.5, 2.0, 0.0]);
        // edge of b passes 0.3 above edge of a in y
        assert_abs_diff_eq!(triangle_distance(&a, &b).0, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn bvh_matches_brute_force() {
        let cube = TriMesh::cuboid(V3::new(1.0, 1.0, 1.0), V3::zeros());
        let bvh = MeshBvh::new(&cube);
        let q = tri([0.7, 0.0, 0.0], [0.9, 0.1, 0.0], [0.8, -0.1, 0.1]);
        let p = bvh.closest(&[q], 1.0).unwrap();
        assert_abs_diff_eq!(p.distance, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(p.point.x, 0.5, epsilon = 1e-12);
        assert!(bvh.closest(&[q], 0.1).is_none());
        assert!(bvh.contains(&V3::new(0.1, 0.2, -0.3)));
        assert!(!bvh.contains(&V3::new(0.6, 0.0, 0.0)));
    }
}
