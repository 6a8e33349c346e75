//! Beneath-beyond convex hull for full-dimensional point sets in exact
//! arithmetic. Callers project lower-dimensional input to affine-span
//! coordinates first (see [`super::Polytope::convex_hull`]).

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::arith::{dot, primitive, rat_from_int, Rat};
use crate::linalg::{affine_rank, nullspace};

/// A facet in local coordinates: `⟨normal, y⟩ + offset ≥ 0` on the hull.
#[derive(Debug, Clone)]
pub(crate) struct LocalFacet {
    pub normal: Vec<Rat>,
    pub offset: Rat,
    pub verts: BTreeSet<usize>,
}

impl LocalFacet {
    fn eval(&self, p: &[Rat]) -> Rat {
        dot(&self.normal, p) + &self.offset
    }
}

/// Output of the hull: indices of extreme points and facets listing those
/// indices.
pub(crate) struct LocalHull {
    pub vertices: Vec<usize>,
    pub facets: Vec<LocalFacet>,
}

fn hyperplane_through(pts: &[&[Rat]], interior: &[Rat]) -> (Vec<Rat>, Rat) {
    let k = interior.len();
    let rows: Vec<Vec<Rat>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(pts[0].iter()).map(|(a, b)| a - b).collect())
        .collect();
    let ns = nullspace(&rows, k);
    debug_assert_eq!(ns.len(), 1, "points do not span a hyperplane");
    let a: Vec<Rat> = primitive(&ns[0]).iter().map(rat_from_int).collect();
    let mut b = -dot(&a, pts[0]);
    let mut a = a;
    if (dot(&a, interior) + &b).is_negative() {
        a = a.iter().map(|x| -x).collect();
        b = -b;
    }
    (a, b)
}

/// Pick up to `need` points from `idx` spanning an affine space of rank
/// `need - 1`.
fn spanning_subset(pts: &[Vec<Rat>], idx: &[usize], need: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for &i in idx {
        if chosen.len() == need {
            break;
        }
        let mut trial: Vec<&[Rat]> = chosen.iter().map(|&j| pts[j].as_slice()).collect();
        trial.push(&pts[i]);
        if affine_rank(&trial) as usize == trial.len() - 1 {
            chosen.push(i);
        }
    }
    chosen
}

/// Hull of points that affinely span `R^k` (`k ≥ 1`).
pub(crate) fn full_dim_hull(pts: &[Vec<Rat>]) -> LocalHull {
    let k = pts[0].len();
    let all: Vec<usize> = (0..pts.len()).collect();
    let simplex = spanning_subset(pts, &all, k + 1);
    assert_eq!(simplex.len(), k + 1, "input does not span");
    let mut interior = vec![Rat::zero(); k];
    for &i in &simplex {
        for (c, x) in interior.iter_mut().zip(&pts[i]) {
            *c += x;
        }
    }
    let denom = Rat::from_integer((k as i64 + 1).into());
    for c in interior.iter_mut() {
        *c /= &denom;
    }

    let mut facets: Vec<LocalFacet> = Vec::new();
    for skip in 0..=k {
        let on: Vec<usize> = simplex.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &i)| i).collect();
        let refs: Vec<&[Rat]> = on.iter().map(|&i| pts[i].as_slice()).collect();
        let (normal, offset) = hyperplane_through(&refs, &interior);
        facets.push(LocalFacet { normal, offset, verts: on.into_iter().collect() });
    }
    let mut hull: BTreeSet<usize> = simplex.iter().copied().collect();

    for p in 0..pts.len() {
        if hull.contains(&p) {
            continue;
        }
        let dists: Vec<Rat> = facets.iter().map(|f| f.eval(&pts[p])).collect();
        let visible: Vec<usize> = (0..facets.len()).filter(|&f| dists[f].is_negative()).collect();
        if visible.is_empty() {
            continue;
        }
        let mut next: Vec<LocalFacet> =
            (0..facets.len()).filter(|f| !visible.contains(f)).map(|f| facets[f].clone()).collect();
        for &v in &visible {
            for f in 0..facets.len() {
                if visible.contains(&f) {
                    continue;
                }
                let ridge: Vec<usize> = facets[v].verts.intersection(&facets[f].verts).copied().collect();
                let refs: Vec<&[Rat]> = ridge.iter().map(|&i| pts[i].as_slice()).collect();
                if affine_rank(&refs) != k as isize - 2 {
                    continue;
                }
                let mut base = spanning_subset(pts, &ridge, k - 1);
                base.push(p);
                let refs: Vec<&[Rat]> = base.iter().map(|&i| pts[i].as_slice()).collect();
                let (normal, offset) = hyperplane_through(&refs, &interior);
                if !next.iter().any(|g| g.normal == normal && g.offset == offset) {
                    next.push(LocalFacet { normal, offset, verts: BTreeSet::new() });
                }
            }
        }
        hull.insert(p);
        for f in next.iter_mut() {
            f.verts = hull.iter().copied().filter(|&q| f.eval(&pts[q]).is_zero()).collect();
        }
        // drop points that stopped being extreme
        let extreme: BTreeSet<usize> = hull
            .iter()
            .copied()
            .filter(|&q| {
                let normals: Vec<Vec<Rat>> =
                    next.iter().filter(|f| f.verts.contains(&q)).map(|f| f.normal.clone()).collect();
                crate::linalg::rank(&normals) == k
            })
            .collect();
        for f in next.iter_mut() {
            f.verts.retain(|q| extreme.contains(q));
        }
        hull = extreme;
        facets = next;
    }
    LocalHull { vertices: hull.into_iter().collect(), facets }
}
