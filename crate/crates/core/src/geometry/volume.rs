//! Pulling triangulations and lattice-normalized volumes.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use super::{Face, Polytope, RationalPoint};
use crate::arith::{factorial, rat_from_int, sub, Rat};
use crate::error::{Error, Result};
use crate::linalg::{coordinates, det, saturated_basis};

/// Pulling triangulation: simplices as lists of vertex indices, each with
/// `dim + 1` entries.
pub fn triangulate(p: &Polytope) -> Vec<Vec<usize>> {
    let Some(top) = p.faces().last() else {
        return Vec::new();
    };
    let mut memo: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
    pull(p, top, &mut memo)
}

fn pull(p: &Polytope, face: &Face, memo: &mut HashMap<Vec<usize>, Vec<Vec<usize>>>) -> Vec<Vec<usize>> {
    if let Some(t) = memo.get(&face.vertices) {
        return t.clone();
    }
    let out = if face.dim <= 0 {
        vec![face.vertices.clone()]
    } else {
        let apex = face.vertices[0];
        let mut out = Vec::new();
        for g in p.facets_of_face(face) {
            if g.vertices.contains(&apex) {
                continue;
            }
            for mut s in pull(p, g, memo) {
                s.insert(0, apex);
                out.push(s);
            }
        }
        out
    };
    memo.insert(face.vertices.clone(), out.clone());
    out
}

/// Euclidean volume of a full-dimensional simplex given by `k + 1` points in
/// `R^k`.
pub fn simplex_volume(pts: &[&[Rat]]) -> Rat {
    let k = pts.len() - 1;
    if k == 0 {
        return Rat::from_integer(1.into());
    }
    let m: Vec<Vec<Rat>> = pts[1..].iter().map(|q| sub(q, pts[0])).collect();
    det(&m).abs() / rat_from_int(&factorial(k))
}

/// Euclidean volume and centroid of a polytope that is full-dimensional in
/// its own coordinates.
pub fn volume_and_centroid(p: &Polytope) -> (Rat, RationalPoint) {
    let n = p.ambient();
    let mut vol = Rat::zero();
    let mut moment = vec![Rat::zero(); n];
    for s in triangulate(p) {
        let pts: Vec<&[Rat]> = s.iter().map(|&i| p.vertices()[i].as_slice()).collect();
        let v = simplex_volume(&pts);
        let w = Rat::from_integer((pts.len() as i64).into());
        for (j, m) in moment.iter_mut().enumerate() {
            let c: Rat = pts.iter().map(|q| q[j].clone()).sum::<Rat>() / &w;
            *m += &v * c;
        }
        vol += v;
    }
    if vol.is_zero() {
        return (vol, moment);
    }
    let centroid = moment.iter().map(|m| m / &vol).collect();
    (vol, centroid)
}

/// Vertices of `p` in coordinates of a lattice basis of its affine span
/// (relative to the first vertex), together with that basis.
pub fn lattice_coordinates(p: &Polytope) -> (Vec<Vec<crate::arith::Int>>, Vec<RationalPoint>) {
    let v0 = &p.vertices()[0];
    let dirs: Vec<Vec<Rat>> = p.vertices()[1..].iter().map(|v| sub(v, v0)).collect();
    let basis = saturated_basis(&dirs, p.ambient());
    let local = p
        .vertices()
        .iter()
        .map(|v| coordinates(&basis, &sub(v, v0)).expect("vertex in affine span"))
        .collect();
    (basis, local)
}

/// Volume relative to the lattice of the affine span, normalized so a
/// unimodular `k`-simplex has volume `1/k!`.
pub fn normalized_volume(p: &Polytope) -> Result<Rat> {
    if p.is_empty() {
        return Ok(Rat::zero());
    }
    if let Some(v) = p.vertices().iter().find(|v| !v.iter().all(|x| x.is_integer())) {
        return Err(Error::NonLattice(format!("{v:?}")));
    }
    if p.dim() == 0 {
        return Ok(Rat::from_integer(1.into()));
    }
    let (_, local) = lattice_coordinates(p);
    let q = Polytope::convex_hull(&local)?;
    Ok(volume_and_centroid(&q).0)
}

/// Volume of `inner` measured in the lattice coordinates of the affine span of
/// the lattice polytope `outer`; zero when `inner` is lower-dimensional.
/// `inner` need not have lattice vertices but must lie in the span of `outer`.
pub fn volume_in_span(outer: &Polytope, inner: &Polytope) -> Rat {
    if inner.is_empty() || inner.dim() < outer.dim() {
        return Rat::zero();
    }
    if outer.dim() == 0 {
        return Rat::from_integer(1.into());
    }
    let (basis, _) = lattice_coordinates(outer);
    let v0 = &outer.vertices()[0];
    let local: Vec<RationalPoint> = inner
        .vertices()
        .iter()
        .map(|v| coordinates(&basis, &sub(v, v0)).expect("point in affine span"))
        .collect();
    let q = Polytope::convex_hull(&local).expect("nonempty");
    volume_and_centroid(&q).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, ratio};
    use crate::geometry::int_points;

    #[test]
    fn segments() {
        let s = Polytope::convex_hull(&int_points(&[&[0, 0], &[1, 0]])).unwrap();
        assert_eq!(normalized_volume(&s).unwrap(), rat(1));
        let s = Polytope::convex_hull(&int_points(&[&[0, 0], &[2, 2]])).unwrap();
        assert_eq!(normalized_volume(&s).unwrap(), rat(2));
        let s = Polytope::convex_hull(&int_points(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(normalized_volume(&s).unwrap(), rat(1));
    }

    #[test]
    fn unimodular_simplex_and_square() {
        let t = Polytope::convex_hull(&int_points(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).unwrap();
        assert_eq!(normalized_volume(&t).unwrap(), ratio(1, 6));
        let sq = Polytope::convex_hull(&int_points(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])).unwrap();
        assert_eq!(normalized_volume(&sq).unwrap(), rat(4));
        let (v, c) = volume_and_centroid(&sq);
        assert_eq!(v, rat(4));
        assert_eq!(c, vec![rat(0), rat(0)]);
    }

    #[test]
    fn triangle_in_space() {
        // conv{e1, e2, e3} is a unimodular triangle of its plane
        let t = Polytope::convex_hull(&int_points(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).unwrap();
        assert_eq!(normalized_volume(&t).unwrap(), ratio(1, 2));
    }
}
