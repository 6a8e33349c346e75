//! Lattice-point enumeration by bounding-box scan.
//!
//! The scan visits every integer point of the vertex bounding box, so the cost
//! grows like `k^rank` for a `k`-fold dilate; callers cap dilations.

use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::{LatticePoint, Polytope};
use crate::arith::Int;

struct Row {
    normal: Vec<i128>,
    // ⟨normal, x⟩·den + num ≥ 0 (or = 0 for equations)
    num: i128,
    den: i128,
}

fn rows(p: &Polytope) -> (Vec<Row>, Vec<Row>) {
    let conv = |h: &super::HalfSpace| Row {
        normal: h.normal.iter().map(|x| x.to_i128().expect("small normal")).collect(),
        num: h.offset.numer().to_i128().expect("small offset"),
        den: h.offset.denom().to_i128().expect("small offset"),
    };
    (p.equations().iter().map(conv).collect(), p.facets().iter().map(conv).collect())
}

fn value(r: &Row, x: &[i64]) -> i128 {
    let s: i128 = r.normal.iter().zip(x).map(|(a, &b)| a * b as i128).sum();
    s * r.den + r.num
}

/// All lattice points of `p` in lexicographic order.
pub fn lattice_points(p: &Polytope) -> Vec<LatticePoint> {
    lattice_points_i64(p).into_iter().map(|v| v.into_iter().map(Int::from).collect()).collect()
}

pub fn lattice_points_i64(p: &Polytope) -> Vec<Vec<i64>> {
    if p.is_empty() {
        return Vec::new();
    }
    let n = p.ambient();
    if n == 0 {
        return vec![Vec::new()];
    }
    let lo: Vec<i64> =
        (0..n).map(|j| p.vertices().iter().map(|v| v[j].ceil().to_integer()).min().unwrap().to_i64().unwrap()).collect();
    let hi: Vec<i64> = (0..n)
        .map(|j| p.vertices().iter().map(|v| v[j].floor().to_integer()).max().unwrap().to_i64().unwrap())
        .collect();
    let (eqs, ineqs) = rows(p);
    let inside = |x: &[i64]| eqs.iter().all(|r| value(r, x) == 0) && ineqs.iter().all(|r| value(r, x) >= 0);
    (lo[0]..=hi[0].max(lo[0] - 1))
        .into_par_iter()
        .flat_map_iter(|x0| {
            let mut out = Vec::new();
            let mut x = lo.clone();
            x[0] = x0;
            loop {
                if inside(&x) {
                    out.push(x.clone());
                }
                // odometer over coordinates 1..n
                let mut j = n;
                loop {
                    if j == 1 {
                        return out;
                    }
                    j -= 1;
                    if x[j] < hi[j] {
                        x[j] += 1;
                        break;
                    }
                    x[j] = lo[j];
                }
            }
        })
        .collect()
}

pub fn count_lattice_points(p: &Polytope) -> usize {
    lattice_points_i64(p).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, Rat};
    use crate::geometry::int_points;

    #[test]
    fn square_and_triangle() {
        let sq = Polytope::convex_hull(&int_points(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])).unwrap();
        assert_eq!(count_lattice_points(&sq), 9);
        let t = Polytope::convex_hull(&int_points(&[&[2, -1], &[-1, 2], &[-1, -1]])).unwrap();
        let pts = lattice_points_i64(&t);
        // brute force over the box [-1, 2]^2 with the three defining inequalities
        let mut brute = Vec::new();
        for x in -1..=2i64 {
            for y in -1..=2i64 {
                if x >= -1 && y >= -1 && x + y <= 1 {
                    brute.push(vec![x, y]);
                }
            }
        }
        assert_eq!(pts, brute);
        assert_eq!(pts.len(), 10);
    }

    #[test]
    fn empty_and_lower_dimensional() {
        let e = Polytope::from_constraints(2, &[(vec![rat(1), rat(0)], rat(-3)), (vec![rat(-1), rat(0)], rat(1))]);
        assert!(lattice_points(&e).is_empty());
        let seg = Polytope::convex_hull(&int_points(&[&[0, 0, 0], &[2, 2, 0]])).unwrap();
        assert_eq!(count_lattice_points(&seg), 3);
        let half = seg.scale(&Rat::new(1.into(), 2.into()));
        assert_eq!(count_lattice_points(&half), 2);
    }
}
