//! Quickhull in `D` dimensions and the ε-metric (radius of the largest
//! origin-centered ball inside the hull).

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cone::Wrench;

const VISIBILITY_EPS: f64 = 1e-10;
const RANK_EPS: f64 = 1e-9;
const CONVEXITY_SLACK: f64 = 1e3;
const JOGGLE: f64 = 1e-9;
const MAX_ATTEMPTS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct HullFacet<const D: usize> {
    /// Indices into [`Hull::points`].
    pub vertices: [usize; D],
    /// Outward unit normal.
    pub normal: [f64; D],
    /// Signed distance of the facet plane from the origin along `normal`.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hull<const D: usize> {
    /// Input points after removing exact duplicates.
    pub points: Vec<[f64; D]>,
    pub facets: Vec<HullFacet<D>>,
}

impl<const D: usize> Hull<D> {
    /// Radius of the largest origin-centered ball inside the hull, 0 when the
    /// origin is not strictly inside.
    pub fn inner_radius(&self) -> f64 {
        let scale = scale_of(&self.points);
        let min = self.facets.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min);
        if min > VISIBILITY_EPS * scale {
            min
        } else {
            0.0
        }
    }
}

/// ε of a wrench set: 0 for empty, rank-deficient, or non-enclosing sets.
pub fn hull_radius(wrenches: &[Wrench]) -> f64 {
    let points: Vec<[f64; 6]> = wrenches.iter().map(|w| (*w).into()).collect();
    convex_hull(&points).map_or(0.0, |h| h.inner_radius())
}

/// Convex hull of `points`, or `None` when they do not span `D` dimensions.
pub fn convex_hull<const D: usize>(points: &[[f64; D]]) -> Option<Hull<D>> {
    let mut pts: Vec<[f64; D]> = points.to_vec();
    if pts.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return None;
    }
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts.dedup();
    if pts.len() < D + 1 {
        return None;
    }
    let scale = scale_of(&pts);
    if scale == 0.0 {
        return None;
    }
    let simplex = initial_simplex(&pts, RANK_EPS * scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for attempt in 0..MAX_ATTEMPTS {
        let work: Vec<[f64; D]> = if attempt == 0 {
            pts.clone()
        } else {
            let amount = JOGGLE * scale * 10f64.powi(attempt as i32 - 1);
            pts.iter()
                .map(|p| p.map(|v| v + rng.gen_range(-amount..=amount)))
                .collect()
        };
        match build(&work, &simplex, VISIBILITY_EPS * scale) {
            Ok(mut facets) => {
                if attempt > 0 {
                    // report planes of the original points
                    for f in &mut facets {
                        f.offset = f.vertices.iter().map(|&v| dot(&f.normal, &pts[v])).sum::<f64>() / D as f64;
                    }
                    log::debug!("hull built after {attempt} joggle(s)");
                }
                return Some(Hull { points: pts, facets });
            }
            Err(Topology) => continue,
        }
    }
    log::warn!("convex hull failed after {MAX_ATTEMPTS} attempts, treating as degenerate");
    None
}

fn scale_of<const D: usize>(pts: &[[f64; D]]) -> f64 {
    pts.iter().map(norm).fold(0.0, f64::max)
}

fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a).sqrt()
}

fn sub<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|i| a[i] - b[i])
}

/// Removes the components of `v` along the orthonormal `basis`, twice for
/// numerical safety.
fn reject<const D: usize>(mut v: [f64; D], basis: &[[f64; D]]) -> [f64; D] {
    for _ in 0..2 {
        for b in basis {
            let c = dot(&v, b);
            for i in 0..D {
                v[i] -= c * b[i];
            }
        }
    }
    v
}

/// Greedy choice of `D + 1` affinely independent points; `None` when the
/// set is (numerically) confined to a lower-dimensional flat.
fn initial_simplex<const D: usize>(pts: &[[f64; D]], tol: f64) -> Option<Vec<usize>> {
    let n = pts.len() as f64;
    let centroid: [f64; D] = std::array::from_fn(|i| pts.iter().map(|p| p[i]).sum::<f64>() / n);
    let first = (0..pts.len()).max_by(|&a, &b| {
        norm(&sub(&pts[a], &centroid)).total_cmp(&norm(&sub(&pts[b], &centroid)))
    })?;
    let mut simplex = vec![first];
    let mut basis: Vec<[f64; D]> = Vec::with_capacity(D);
    for _ in 0..D {
        let (best, res) = (0..pts.len())
            .map(|i| (i, norm(&reject(sub(&pts[i], &pts[first]), &basis))))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if !(res > tol) {
            return None;
        }
        let r = reject(sub(&pts[best], &pts[first]), &basis);
        basis.push(r.map(|v| v / norm(&r)));
        simplex.push(best);
    }
    Some(simplex)
}

struct Topology;

struct Facet<const D: usize> {
    verts: [usize; D],
    /// `neighbors[i]` shares the ridge opposite `verts[i]`.
    neighbors: [usize; D],
    normal: [f64; D],
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl<const D: usize> Facet<D> {
    fn distance(&self, p: &[f64; D]) -> f64 {
        dot(&self.normal, p) - self.offset
    }
}

fn plane<const D: usize>(pts: &[[f64; D]], verts: &[usize; D], interior: &[f64; D]) -> Result<([f64; D], f64), Topology> {
    let origin = &pts[verts[0]];
    let mut basis: Vec<[f64; D]> = Vec::with_capacity(D - 1);
    let scale = norm(origin).max(1e-300);
    for v in &verts[1..] {
        let r = reject(sub(&pts[*v], origin), &basis);
        let len = norm(&r);
        if !(len > 1e-14 * scale) {
            return Err(Topology);
        }
        basis.push(r.map(|x| x / len));
    }
    let r = reject(sub(origin, interior), &basis);
    let len = norm(&r);
    if !(len > 0.0) {
        return Err(Topology);
    }
    let normal = r.map(|x| x / len);
    let offset = verts.iter().map(|&v| dot(&normal, &pts[v])).sum::<f64>() / D as f64;
    Ok((normal, offset))
}

fn build<const D: usize>(pts: &[[f64; D]], simplex: &[usize], eps: f64) -> Result<Vec<HullFacet<D>>, Topology> {
    let interior: [f64; D] = std::array::from_fn(|i| simplex.iter().map(|&s| pts[s][i]).sum::<f64>() / (D + 1) as f64);
    let mut facets: Vec<Facet<D>> = Vec::new();
    for skip in 0..=D {
        let others: Vec<usize> = (0..=D).filter(|&j| j != skip).collect();
        let verts: [usize; D] = std::array::from_fn(|k| simplex[others[k]]);
        // the facet across the ridge opposite simplex[j] is facet j
        let neighbors: [usize; D] = std::array::from_fn(|k| others[k]);
        let (normal, offset) = plane(pts, &verts, &interior)?;
        facets.push(Facet {
            verts,
            neighbors,
            normal,
            offset,
            outside: Vec::new(),
            alive: true,
        });
    }
    let mut in_simplex = vec![false; pts.len()];
    for &s in simplex {
        in_simplex[s] = true;
    }
    for (i, p) in pts.iter().enumerate() {
        if in_simplex[i] {
            continue;
        }
        if let Some(f) = facets.iter_mut().find(|f| f.distance(p) > eps) {
            f.outside.push(i);
        }
    }

    let mut pending: Vec<usize> = (0..facets.len()).filter(|&f| !facets[f].outside.is_empty()).collect();
    let mut mark: Vec<u32> = vec![0; facets.len()];
    let mut round: u32 = 0;
    while let Some(start) = pending.pop() {
        if !facets[start].alive || facets[start].outside.is_empty() {
            continue;
        }
        round += 1;
        let apex = *facets[start]
            .outside
            .iter()
            .max_by(|&&a, &&b| facets[start].distance(&pts[a]).total_cmp(&facets[start].distance(&pts[b])))
            .expect("non-empty");
        let p = &pts[apex];

        mark.resize(facets.len(), 0);
        let mut visible = vec![start];
        mark[start] = round;
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        let mut i = 0;
        while i < visible.len() {
            let fv = visible[i];
            for s in 0..D {
                let g = facets[fv].neighbors[s];
                if mark[g] == round {
                    continue;
                }
                if !facets[g].alive {
                    return Err(Topology);
                }
                if facets[g].distance(p) > eps {
                    mark[g] = round;
                    visible.push(g);
                } else {
                    horizon.push((fv, s));
                }
            }
            i += 1;
        }
        // a horizon facet may have been classified before becoming visible
        horizon.retain(|&(fv, s)| mark[facets[fv].neighbors[s]] != round);

        let first_new = facets.len();
        let mut ridges: HashMap<[usize; D], (usize, usize)> = HashMap::with_capacity(horizon.len() * D);
        for &(fv, s) in &horizon {
            let g = facets[fv].neighbors[s];
            let mut verts = [0usize; D];
            let mut k = 0;
            for (t, &v) in facets[fv].verts.iter().enumerate() {
                if t != s {
                    verts[k] = v;
                    k += 1;
                }
            }
            verts[D - 1] = apex;
            let (normal, offset) = plane(pts, &verts, &interior)?;
            let h = facets.len();
            let slot = facets[g].neighbors.iter().position(|&x| x == fv).ok_or(Topology)?;
            let opposite = facets[g].verts[slot];
            let new_facet = Facet {
                verts,
                neighbors: [usize::MAX; D],
                normal,
                offset,
                outside: Vec::new(),
                alive: true,
            };
            if new_facet.distance(&pts[opposite]) > CONVEXITY_SLACK * eps {
                return Err(Topology);
            }
            facets.push(new_facet);
            facets[g].neighbors[slot] = h;
            facets[h].neighbors[D - 1] = g;
            for k in 0..D - 1 {
                let mut key = verts;
                key[k] = usize::MAX;
                key[D - 1] = usize::MAX;
                key.sort_unstable();
                match ridges.remove(&key) {
                    Some((other, other_slot)) => {
                        facets[h].neighbors[k] = other;
                        facets[other].neighbors[other_slot] = h;
                    }
                    None => {
                        ridges.insert(key, (h, k));
                    }
                }
            }
        }
        if !ridges.is_empty() {
            return Err(Topology);
        }

        let mut orphans: Vec<usize> = Vec::new();
        for &fv in &visible {
            facets[fv].alive = false;
            orphans.append(&mut facets[fv].outside);
        }
        for q in orphans {
            if q == apex {
                continue;
            }
            if let Some(h) = (first_new..facets.len()).find(|&h| facets[h].distance(&pts[q]) > eps) {
                facets[h].outside.push(q);
            }
        }
        for (h, f) in facets.iter().enumerate().skip(first_new) {
            if f.neighbors.contains(&usize::MAX) {
                return Err(Topology);
            }
            if !f.outside.is_empty() {
                pending.push(h);
            }
        }
    }
    Ok(facets
        .into_iter()
        .filter(|f| f.alive)
        .map(|f| HullFacet {
            vertices: f.verts,
            normal: f.normal,
            offset: f.offset,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn signed_axes<const D: usize>() -> Vec<[f64; D]> {
        (0..D)
            .flat_map(|i| {
                [1.0, -1.0].map(|s| {
                    let mut p = [0.0; D];
                    p[i] = s;
                    p
                })
            })
            .collect()
    }

    #[test]
    fn cross_polytope_radius() {
        let h = convex_hull::<6>(&signed_axes()).unwrap();
        assert_eq!(h.facets.len(), 64);
        assert_abs_diff_eq!(h.inner_radius(), 1.0 / 6f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn hypercube_radius() {
        let pts: Vec<[f64; 6]> = (0..64u32)
            .map(|m| std::array::from_fn(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 }))
            .collect();
        // facets come out triangulated, so only the radius is checked
        let h = convex_hull(&pts).unwrap();
        assert_abs_diff_eq!(h.inner_radius(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn square_and_cube_in_low_dimension() {
        let sq = [[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [0.2, 0.3]];
        let h = convex_hull(&sq).unwrap();
        assert_eq!(h.facets.len(), 4);
        assert_abs_diff_eq!(h.inner_radius(), 1.0, epsilon = 1e-12);
        let shifted: Vec<[f64; 3]> = signed_axes::<3>().iter().map(|p| [p[0] + 2.0, p[1], p[2]]).collect();
        assert_eq!(convex_hull(&shifted).unwrap().inner_radius(), 0.0);
    }

    #[test]
    fn flat_set_is_degenerate() {
        let pts: Vec<[f64; 6]> = signed_axes::<6>().into_iter().filter(|p| p[5] == 0.0).collect();
        assert!(convex_hull(&pts).is_none());
        assert!(convex_hull::<6>(&[]).is_none());
    }

    #[test]
    fn duplicates_and_interior_points_ignored() {
        let mut pts = signed_axes::<6>();
        pts.extend(signed_axes::<6>());
        pts.push([0.01; 6]);
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.points.len(), 13);
        assert_abs_diff_eq!(h.inner_radius(), 1.0 / 6f64.sqrt(), epsilon = 1e-12);
    }
}
