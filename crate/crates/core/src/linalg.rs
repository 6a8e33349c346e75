//! Dense exact linear algebra over the rationals and the integers.
//!
//! Matrices are row-major `Vec<Vec<_>>`; sizes here stay below ten, so the
//! routines are straightforward Gaussian elimination without pivoting
//! heuristics.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{primitive, rat_from_int, Int, Rat};

/// Reduced row echelon form. Returns the reduced rows (zero rows dropped) and
/// the pivot column of each.
pub fn rref(rows: &[Vec<Rat>], ncols: usize) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rat::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..ncols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Rat>]) -> usize {
    match rows.first() {
        None => 0,
        Some(first) => rref(rows, first.len()).1.len(),
    }
}

/// Basis of `{x : rows · x = 0}`.
pub fn nullspace(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let (m, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); ncols];
            v[f] = Rat::one();
            for (row, &p) in m.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Solve `a · x = b`; returns `None` when inconsistent or not uniquely solvable.
pub fn solve_unique(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let ncols = a.first().map_or(0, Vec::len);
    let aug: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (m, pivots) = rref(&aug, ncols + 1);
    if pivots.contains(&ncols) || pivots.len() != ncols {
        return None;
    }
    let mut x = vec![Rat::zero(); ncols];
    for (row, &p) in m.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

pub fn det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rat::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    d
}

/// Dimension of the affine span of `points` (`-1` for no points).
pub fn affine_rank(points: &[&[Rat]]) -> isize {
    let Some(first) = points.first() else {
        return -1;
    };
    let rows: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first.iter()).map(|(x, y)| x - y).collect())
        .collect();
    rank(&rows) as isize
}

/// A basis of the integer kernel `{x ∈ Z^n : a · x = 0}` computed with
/// unimodular column operations, so the result is a lattice basis of the
/// saturated kernel.
pub fn integer_kernel(a: &[Vec<Int>], n: usize) -> Vec<Vec<Int>> {
    let m = a.len();
    // columns of `h` are the columns of a·u
    let mut h: Vec<Vec<Int>> = (0..n).map(|j| (0..m).map(|i| a[i][j].clone()).collect()).collect();
    let mut u: Vec<Vec<Int>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect();
    let mut col = 0;
    for row in 0..m {
        if col == n {
            break;
        }
        loop {
            let nonzero: Vec<usize> = (col..n).filter(|&j| !h[j][row].is_zero()).collect();
            if nonzero.is_empty() {
                break;
            }
            let piv = *nonzero
                .iter()
                .min_by(|&&x, &&y| h[x][row].abs().cmp(&h[y][row].abs()))
                .unwrap();
            h.swap(col, piv);
            u.swap(col, piv);
            let mut done = true;
            for j in col + 1..n {
                if h[j][row].is_zero() {
                    continue;
                }
                let q = h[j][row].div_floor(&h[col][row]);
                for i in 0..m {
                    let t = &q * &h[col][i];
                    h[j][i] -= t;
                }
                for i in 0..n {
                    let t = &q * &u[col][i];
                    u[j][i] -= t;
                }
                if !h[j][row].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !h[col][row].is_zero() {
            col += 1;
        }
    }
    u.into_iter().skip(col).collect()
}

/// Lattice basis of `span_Q(directions) ∩ Z^n`.
pub fn saturated_basis(directions: &[Vec<Rat>], n: usize) -> Vec<Vec<Int>> {
    if rank(directions) == 0 {
        return Vec::new();
    }
    let eqs: Vec<Vec<Int>> = nullspace(directions, n).iter().map(|v| primitive(v)).collect();
    if eqs.is_empty() {
        return (0..n)
            .map(|j| (0..n).map(|i| if i == j { Int::one() } else { Int::zero() }).collect())
            .collect();
    }
    integer_kernel(&eqs, n)
}

/// Coordinates of `v` in the basis `basis` (vectors of length n); `None` if
/// `v` is not in the span.
pub fn coordinates(basis: &[Vec<Int>], v: &[Rat]) -> Option<Vec<Rat>> {
    let n = v.len();
    let k = basis.len();
    if k == 0 {
        return if v.iter().all(Zero::is_zero) { Some(Vec::new()) } else { None };
    }
    let a: Vec<Vec<Rat>> = (0..n).map(|i| (0..k).map(|j| rat_from_int(&basis[j][i])).collect()).collect();
    let aug: Vec<Vec<Rat>> = a
        .iter()
        .zip(v)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let (m, pivots) = rref(&aug, k + 1);
    if pivots.contains(&k) || pivots.len() != k {
        return None;
    }
    let mut x = vec![Rat::zero(); k];
    for (row, &p) in m.iter().zip(&pivots) {
        x[p] = row[k].clone();
    }
    Some(x)
}

/// gcd of all maximal minors of a `k × n` integer matrix (`k ≤ n`); zero when
/// the rows are dependent.
pub fn maximal_minor_gcd(rows: &[Vec<Int>]) -> Int {
    let k = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if k == 0 {
        return Int::one();
    }
    let mut g = Int::zero();
    for cols in itertools::Itertools::combinations(0..n, k) {
        let m: Vec<Vec<Rat>> = rows
            .iter()
            .map(|r| cols.iter().map(|&c| rat_from_int(&r[c])).collect())
            .collect();
        let d = det(&m);
        g = g.gcd(&d.to_integer());
        if g.is_one() {
            break;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn ivec(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn kernel_is_saturated() {
        // 2x + 4y = 0 has kernel generated by (2, -1), not (4, -2)
        let k = integer_kernel(&[ivec(&[2, 4])], 2);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert!(v == &ivec(&[2, -1]) || v == &ivec(&[-2, 1]));
    }

    #[test]
    fn saturation_of_diagonal_direction() {
        let b = saturated_basis(&[vec![rat(2), rat(2)]], 2);
        assert_eq!(b.len(), 1);
        assert!(b[0] == ivec(&[1, 1]) || b[0] == ivec(&[-1, -1]));
    }

    #[test]
    fn determinant_and_solve() {
        let m = vec![vec![rat(2), rat(1)], vec![rat(1), rat(3)]];
        assert_eq!(det(&m), rat(5));
        let x = solve_unique(&m, &[rat(3), rat(4)]).unwrap();
        assert_eq!(x, vec![rat(1), rat(1)]);
    }

    #[test]
    fn minor_gcd_detects_index_two() {
        assert_eq!(maximal_minor_gcd(&[ivec(&[1, 0]), ivec(&[1, 2])]), int(2));
        assert_eq!(maximal_minor_gcd(&[ivec(&[1, 0, 0]), ivec(&[0, 1, 0])]), int(1));
    }
}
