//! Minkowski sums with face decomposition.

use num_traits::{One, Zero};

use super::{Face, Polytope, RationalPoint};
use crate::arith::{add, to_rats, Rat};
use crate::error::{Error, Result};
use crate::lp::{feasible_point, Ineq};

/// `P + Q` together with both summands, so faces of the sum can be split.
#[derive(Debug, Clone)]
pub struct MinkowskiSum {
    pub sum: Polytope,
    pub left: Polytope,
    pub right: Polytope,
}

pub fn minkowski_sum(p: &Polytope, q: &Polytope) -> Result<MinkowskiSum> {
    if p.ambient() != q.ambient() {
        return Err(Error::RankMismatch { expected: p.ambient(), got: q.ambient() });
    }
    let sum = if p.is_empty() || q.is_empty() {
        Polytope::empty(p.ambient())
    } else {
        let pts: Vec<RationalPoint> =
            p.vertices().iter().flat_map(|a| q.vertices().iter().map(move |b| add(a, b))).collect();
        Polytope::convex_hull(&pts)?
    };
    Ok(MinkowskiSum { sum, left: p.clone(), right: q.clone() })
}

/// Sum of any number of polytopes; the empty list sums to the origin.
pub fn minkowski_sum_all(parts: &[Polytope], ambient: usize) -> Result<Polytope> {
    let mut acc = Polytope::convex_hull(&[vec![Rat::zero(); ambient]])?;
    for p in parts {
        acc = minkowski_sum(&acc, p)?.sum;
    }
    Ok(acc)
}

impl MinkowskiSum {
    /// A direction in the relative interior of the normal cone of `face`.
    fn interior_normal(&self, face: &Face) -> Vec<Rat> {
        let n = self.sum.ambient();
        let mut dir = vec![Rat::zero(); n];
        for (f, vs) in self.sum.facets().iter().zip(self.sum.facet_vertices()) {
            if face.vertices.iter().all(|v| vs.contains(v)) {
                dir = add(&dir, &to_rats(&f.normal));
            }
        }
        dir
    }

    /// The unique decomposition `G = G1 + G2` of a face of the sum, as vertex
    /// index sets of the summands.
    pub fn decompose(&self, face: &Face) -> (Vec<usize>, Vec<usize>) {
        let dir = self.interior_normal(face);
        (self.left.argmin(&dir), self.right.argmin(&dir))
    }
}

fn normal_generators(p: &Polytope, face: &[usize]) -> (Vec<Vec<Rat>>, Vec<Vec<Rat>>) {
    let cone = p
        .facets()
        .iter()
        .zip(p.facet_vertices())
        .filter(|(_, vs)| face.iter().all(|v| vs.contains(v)))
        .map(|(f, _)| to_rats(&f.normal))
        .collect();
    let lineality = p.equations().iter().map(|e| to_rats(&e.normal)).collect();
    (cone, lineality)
}

/// Whether `F1 + F2` is a face of `P + Q`, decided by whether the relative
/// interiors of the two normal cones meet.
pub fn face_minkowski_test(p: &Polytope, q: &Polytope, f1: &[usize], f2: &[usize]) -> Result<bool> {
    if !p.is_face(f1) || !q.is_face(f2) {
        return Err(Error::ForeignFace);
    }
    let n = p.ambient();
    let (c1, l1) = normal_generators(p, f1);
    let (c2, l2) = normal_generators(q, f2);
    // variables: λ (c1, ≥ 1), α (l1, free), κ (c2, ≥ 1), β (l2, free)
    let nv = c1.len() + l1.len() + c2.len() + l2.len();
    let mut rows = Vec::new();
    for j in 0..n {
        let mut coeffs = Vec::with_capacity(nv);
        coeffs.extend(c1.iter().map(|g| g[j].clone()));
        coeffs.extend(l1.iter().map(|g| g[j].clone()));
        coeffs.extend(c2.iter().map(|g| -g[j].clone()));
        coeffs.extend(l2.iter().map(|g| -g[j].clone()));
        rows.push(Ineq::new(coeffs.clone(), Rat::zero()));
        rows.push(Ineq::new(coeffs.iter().map(|x| -x).collect(), Rat::zero()));
    }
    let strict: Vec<usize> = (0..c1.len()).chain(c1.len() + l1.len()..c1.len() + l1.len() + c2.len()).collect();
    for i in strict {
        let mut coeffs = vec![Rat::zero(); nv];
        coeffs[i] = Rat::one();
        rows.push(Ineq::new(coeffs, Rat::one()));
    }
    Ok(feasible_point(&rows, nv).is_some())
}
