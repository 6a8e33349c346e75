//! Exact feasibility for systems `A x ≥ b` in free variables, by a phase-one
//! simplex on a dense rational tableau with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::arith::Rat;

/// One inequality `⟨coeffs, x⟩ ≥ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ineq {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
}

impl Ineq {
    pub fn new(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Self { coeffs, rhs }
    }

    pub fn holds(&self, x: &[Rat]) -> bool {
        crate::arith::dot(&self.coeffs, x) >= self.rhs
    }
}

/// Returns a feasible point of `{x ∈ Q^n : rows}` if one exists.
pub fn feasible_point(rows: &[Ineq], n: usize) -> Option<Vec<Rat>> {
    let m = rows.len();
    if m == 0 {
        return Some(vec![Rat::zero(); n]);
    }
    // columns: p (n), q (n), s (m), a (m), rhs
    let ncol = 2 * n + 2 * m;
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m + 1);
    let mut basis = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        let sign = if row.rhs.is_negative() { -Rat::one() } else { Rat::one() };
        let mut r = vec![Rat::zero(); ncol + 1];
        for j in 0..n {
            r[j] = &sign * &row.coeffs[j];
            r[n + j] = -&r[j];
        }
        r[2 * n + i] = -sign.clone();
        r[2 * n + m + i] = Rat::one();
        r[ncol] = &sign * &row.rhs;
        t.push(r);
        basis.push(2 * n + m + i);
    }
    // objective row: minimize the sum of artificials, stored as reduced costs
    let mut obj = vec![Rat::zero(); ncol + 1];
    for r in &t {
        for j in 0..2 * n + m {
            obj[j] -= &r[j];
        }
        obj[ncol] -= &r[ncol];
    }
    t.push(obj);

    loop {
        let Some(enter) = (0..ncol).find(|&j| t[m][j].is_negative()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][ncol] / &t[i][enter];
                match leave {
                    None => leave = Some(i),
                    Some(l) => {
                        let best = &t[l][ncol] / &t[l][enter];
                        if ratio < best || (ratio == best && basis[i] < basis[l]) {
                            leave = Some(i);
                        }
                    }
                }
            }
        }
        let Some(l) = leave else {
            // unbounded phase-one objective cannot happen (bounded below by 0)
            break;
        };
        pivot(&mut t, l, enter);
        basis[l] = enter;
    }
    if !t[m][ncol].is_zero() {
        return None;
    }
    let mut x = vec![Rat::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] += &t[i][ncol];
        } else if b < 2 * n {
            x[b - n] -= &t[i][ncol];
        }
    }
    debug_assert!(rows.iter().all(|r| r.holds(&x)));
    Some(x)
}

fn pivot(t: &mut [Vec<Rat>], row: usize, col: usize) {
    let inv = Rat::one() / &t[row][col];
    for x in t[row].iter_mut() {
        *x *= &inv;
    }
    let pr = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (x, p) in r.iter_mut().zip(&pr) {
            if !p.is_zero() {
                *x -= &f * p;
            }
        }
    }
}

/// Deletion filter: an irreducible infeasible subset of `rows` (indices), or
/// `None` if the system is feasible.
pub fn infeasible_subset(rows: &[Ineq], n: usize, keep: &[usize]) -> Option<Vec<usize>> {
    let mut active: Vec<usize> = (0..rows.len()).collect();
    let sys = |idx: &[usize]| -> Vec<Ineq> { idx.iter().map(|&i| rows[i].clone()).collect() };
    if feasible_point(&sys(&active), n).is_some() {
        return None;
    }
    let mut i = 0;
    while i < active.len() {
        if keep.contains(&active[i]) {
            i += 1;
            continue;
        }
        let mut trial = active.clone();
        trial.remove(i);
        if feasible_point(&sys(&trial), n).is_none() {
            active = trial;
        } else {
            i += 1;
        }
    }
    Some(active)
}

/// Integral feasible point by depth-first branch and bound on fractional
/// coordinates, giving up after `node_cap` nodes.
pub fn integer_point(rows: &[Ineq], n: usize, node_cap: usize) -> Option<Vec<Rat>> {
    let mut stack = vec![rows.to_vec()];
    let mut nodes = 0;
    while let Some(sys) = stack.pop() {
        nodes += 1;
        if nodes > node_cap {
            return None;
        }
        let Some(x) = feasible_point(&sys, n) else {
            continue;
        };
        let Some(j) = (0..n).find(|&j| !x[j].is_integer()) else {
            return Some(x);
        };
        let mut unit = vec![Rat::zero(); n];
        unit[j] = Rat::one();
        let mut up = sys.clone();
        up.push(Ineq::new(unit.clone(), x[j].ceil()));
        let mut down = sys;
        down.push(Ineq::new(unit.iter().map(|u| -u).collect(), -x[j].floor()));
        stack.push(up);
        stack.push(down);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, ratio};

    #[test]
    fn box_is_feasible() {
        let rows = vec![
            Ineq::new(vec![rat(1), rat(0)], rat(1)),
            Ineq::new(vec![rat(-1), rat(0)], rat(-3)),
            Ineq::new(vec![rat(0), rat(1)], rat(-2)),
        ];
        let x = feasible_point(&rows, 2).unwrap();
        assert!(rows.iter().all(|r| r.holds(&x)));
    }

    #[test]
    fn contradiction_yields_irreducible_core() {
        let rows = vec![
            Ineq::new(vec![rat(1)], rat(2)),
            Ineq::new(vec![rat(0)], rat(-5)),
            Ineq::new(vec![rat(-1)], rat(-1)),
        ];
        assert!(feasible_point(&rows, 1).is_none());
        assert_eq!(infeasible_subset(&rows, 1, &[]).unwrap(), vec![0, 2]);
    }

    #[test]
    fn branching_finds_lattice_point() {
        // 2x ≥ 1, 2x ≤ 3  → x = 1
        let rows = vec![
            Ineq::new(vec![rat(2)], rat(1)),
            Ineq::new(vec![rat(-2)], rat(-3)),
        ];
        assert_eq!(integer_point(&rows, 1, 50).unwrap(), vec![rat(1)]);
        // 3x ≥ 1, 3x ≤ 2 has no integer point
        let rows = vec![
            Ineq::new(vec![rat(3)], rat(1)),
            Ineq::new(vec![rat(-3)], ratio(-2, 1)),
        ];
        assert!(integer_point(&rows, 1, 50).is_none());
    }
}
