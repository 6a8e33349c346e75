//! Lattice counts in twisted dilates, the alternating sums `h(I, kL_h)`, and the
//! three-way check `d!·μ(A_h) = (L_h^d)`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{dot_int, factorial, rat, rat_from_int, to_rats, Int, Rat};
use crate::error::{Error, Result};
use crate::fan::PlFunction;
use crate::geometry::lattice::{count_lattice_points, lattice_points, lattice_points_i64};
use crate::geometry::Polytope;
use crate::nef::NefPartitionData;
use crate::spheres::TropicalSphere;

/// Per-ray twist `c(n)`: the number of parts `j` in the twisted set with
/// `n ∈ (∇_j ∩ N) ∖ {0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistSpec {
    pub parts: BTreeSet<usize>,
    pub values: Vec<Int>,
}

impl TwistSpec {
    pub fn new(npd: &NefPartitionData, h: &PlFunction, parts: &[usize]) -> Self {
        let values = h
            .fan()
            .rays()
            .iter()
            .map(|n| {
                let q = to_rats(n);
                let hits = parts.iter().filter(|&&j| npd.nabla_parts[j].contains(&q)).count();
                Int::from(hits)
            })
            .collect();
        Self { parts: parts.iter().copied().collect(), values }
    }

    pub fn none(h: &PlFunction) -> Self {
        Self { parts: BTreeSet::new(), values: vec![Int::zero(); h.fan().rays().len()] }
    }

    pub fn plus(&self, other: &TwistSpec) -> Self {
        Self {
            parts: self.parts.union(&other.parts).copied().collect(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }
}

/// `{m : ⟨m, n⟩ ≥ −k·h(n) + c(n)}` over the rays `n` of the fan of `h`.
pub fn twisted_polytope(h: &PlFunction, k: i64, twist: &TwistSpec) -> Polytope {
    let cons: Vec<(Vec<Rat>, Rat)> = h
        .fan()
        .rays()
        .iter()
        .zip(h.values())
        .zip(&twist.values)
        .map(|((n, v), c)| (to_rats(n), v * rat(k) - rat_from_int(c)))
        .collect();
    Polytope::from_constraints(h.fan().ambient(), &cons)
}

pub fn h0_count(h: &PlFunction, k: i64, twist: &TwistSpec) -> u64 {
    count_lattice_points(&twisted_polytope(h, k, twist)) as u64
}

fn subsets(set: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << set.len()).map(|mask| (0..set.len()).filter(|b| mask >> b & 1 == 1).map(|b| set[b]).collect()).collect()
}

/// `h(I, kL ⊗ base) = Σ_{J ⊂ I} (−1)^{|J|} h⁰(kL ⊗ base ⊗ 𝒪(−D_J))`.
pub fn h_i_twisted(npd: &NefPartitionData, h: &PlFunction, k: i64, set: &[usize], base: &TwistSpec) -> i64 {
    subsets(set)
        .par_iter()
        .map(|j| {
            let t = base.plus(&TwistSpec::new(npd, h, j));
            let c = h0_count(h, k, &t) as i64;
            if j.len() % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .sum()
}

pub fn h_i(npd: &NefPartitionData, h: &PlFunction, k: i64, set: &[usize]) -> i64 {
    h_i_twisted(npd, h, k, set, &TwistSpec::none(h))
}

/// `#(k·S ∩ M)` over the union of the cells of the dilated complex.
pub fn count_complex_dilate(s: &TropicalSphere, k: i64) -> u64 {
    if k == 0 {
        let zero = vec![Rat::zero(); s.polytope.ambient()];
        return u64::from(s.cells.iter().any(|c| s.polytope.face_polytope(c).contains(&zero)));
    }
    let kk = rat(k);
    let pts: BTreeSet<Vec<i64>> = s
        .maximal_cells()
        .par_iter()
        .flat_map_iter(|&i| lattice_points_i64(&s.cell_polytope(i).scale(&kk)))
        .collect();
    pts.len() as u64
}

/// Lattice points `m ∈ kΔ_h` such that every part has some
/// `n ∈ (∇_j ∩ N) ∖ {0}` with `k·h(n) + ⟨m, n⟩ = 0`, i.e. monomial
/// sections not vanishing identically on any component.
pub fn brute_force_sections(npd: &NefPartitionData, h: &PlFunction, k: i64) -> u64 {
    let dh = match h.newton_polytope() {
        Ok(p) => p,
        Err(_) => return 0,
    };
    let parts: Vec<Vec<(Vec<Int>, Int)>> = (0..npd.r())
        .map(|j| {
            npd.nabla_part_points(j)
                .into_iter()
                .map(|n| {
                    let v = h.eval_int(&n).expect("complete fan") * rat(k);
                    (n, v.to_integer())
                })
                .collect()
        })
        .collect();
    lattice_points(&dh.scale(&rat(k)))
        .par_iter()
        .filter(|m| parts.iter().all(|p| p.iter().any(|(n, v)| (v + dot_int(m, n)).is_zero())))
        .count() as u64
}

/// Exact polynomial through `samples`, with `d!` times its degree-`d`
/// coefficient.
#[derive(Debug, Clone)]
pub struct DegreeFit {
    pub coefficients: Vec<Rat>,
    pub degree: Int,
}

fn eval_poly(c: &[Rat], k: i64) -> Rat {
    c.iter().rev().fold(Rat::zero(), |acc, a| acc * rat(k) + a)
}

/// Interpolates a polynomial of degree at most `d` on the first `d + 1`
/// samples and checks it on the rest.
pub fn fit_and_extract_degree(samples: &[(i64, i64)], d: usize) -> Result<DegreeFit> {
    if samples.len() < d + 2 {
        return Err(Error::Inconsistent(format!("{} samples cannot pin a degree-{d} polynomial", samples.len())));
    }
    let base = &samples[..=d];
    // Lagrange basis expanded into monomial coefficients
    let mut coefficients = vec![Rat::zero(); d + 1];
    for (i, &(ki, yi)) in base.iter().enumerate() {
        let mut basis = vec![Rat::one()];
        let mut denom = Rat::one();
        for (j, &(kj, _)) in base.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = vec![Rat::zero(); basis.len() + 1];
            for (e, b) in basis.iter().enumerate() {
                next[e + 1] += b;
                next[e] -= b * rat(kj);
            }
            basis = next;
            denom *= rat(ki - kj);
        }
        for (e, b) in basis.iter().enumerate() {
            coefficients[e] += b * rat(yi) / &denom;
        }
    }
    for &(k, y) in &samples[d + 1..] {
        if eval_poly(&coefficients, k) != rat(y) {
            return Err(Error::NotPolynomial { k });
        }
    }
    let lead = &coefficients[d] * rat_from_int(&factorial(d));
    if !lead.is_integer() || !lead.is_positive() {
        return Err(Error::Inconsistent(format!("leading term d!·a_d = {lead} is not a positive integer")));
    }
    Ok(DegreeFit { coefficients, degree: lead.to_integer() })
}

/// Counts `h(I, kL_h)` for every subset `I` and sampled `k`.
#[derive(Debug, Clone)]
pub struct HilbertTable {
    pub subsets: Vec<Vec<usize>>,
    pub ks: Vec<i64>,
    /// `counts[s][j]` for subset `s` and `k = ks[j]`.
    pub counts: Vec<Vec<i64>>,
}

impl HilbertTable {
    pub fn build(npd: &NefPartitionData, h: &PlFunction, ks: &[i64]) -> Self {
        let all: Vec<usize> = (0..npd.r()).collect();
        let subsets = subsets(&all);
        let counts = subsets.iter().map(|s| ks.iter().map(|&k| h_i(npd, h, k, s)).collect()).collect();
        Self { subsets, ks: ks.to_vec(), counts }
    }

    pub fn full(&self) -> &[i64] {
        self.counts.last().expect("at least the empty subset")
    }
}

#[derive(Debug, Clone)]
pub struct VolumeRow {
    pub k: i64,
    pub hilbert: i64,
    pub complex: u64,
    pub sections: u64,
}

#[derive(Debug)]
pub struct VolumeReport {
    /// `d!·μ(A_h)` from facet volumes.
    pub from_volumes: Rat,
    pub from_complex: Result<Int>,
    pub from_hilbert: Result<Int>,
    pub rows: Vec<VolumeRow>,
}

impl VolumeReport {
    pub fn pointwise(&self) -> bool {
        self.rows.iter().all(|r| r.hilbert >= 0 && r.hilbert as u64 == r.complex && r.complex == r.sections)
    }

    pub fn agree(&self) -> bool {
        match (&self.from_complex, &self.from_hilbert) {
            (Ok(a), Ok(b)) => a == b && rat_from_int(a) == self.from_volumes,
            _ => false,
        }
    }

    /// The common value, when all three agree.
    pub fn value(&self) -> Option<Int> {
        if self.agree() {
            self.from_complex.as_ref().ok().cloned()
        } else {
            None
        }
    }
}

pub fn verify_volume_identity(npd: &NefPartitionData, h: &PlFunction, a: &TropicalSphere, ks: &[i64]) -> VolumeReport {
    let d = a.d;
    let all: Vec<usize> = (0..npd.r()).collect();
    let rows: Vec<VolumeRow> = ks
        .iter()
        .map(|&k| VolumeRow {
            k,
            hilbert: h_i(npd, h, k, &all),
            complex: count_complex_dilate(a, k),
            sections: brute_force_sections(npd, h, k),
        })
        .collect();
    let fit = |f: &dyn Fn(&VolumeRow) -> i64| {
        let s: Vec<(i64, i64)> = rows.iter().map(|r| (r.k, f(r))).collect();
        fit_and_extract_degree(&s, d).map(|x| x.degree)
    };
    VolumeReport {
        from_volumes: &a.total * rat_from_int(&factorial(d)),
        from_complex: fit(&|r| r.complex.to_i64().unwrap_or(i64::MAX)),
        from_hilbert: fit(&|r| r.hilbert),
        rows,
    }
}

/// Default sample window `k = 1..d+4`.
pub fn default_window(d: usize) -> Vec<i64> {
    (1..=(d as i64 + 4)).collect()
}

/// `|{m ∈ kP ∩ M}|` for the Ehrhart self-consistency check: the count of the
/// dilate agrees with the count of the polytope built from dilated constraints.
pub fn ehrhart_consistent(p: &Polytope, k: i64) -> bool {
    let scaled = p.scale(&rat(k));
    let cons: Vec<(Vec<Rat>, Rat)> = p.constraints().into_iter().map(|(a, b)| (a, b * rat(k))).collect();
    let from_h = Polytope::from_constraints(p.ambient(), &cons);
    count_lattice_points(&scaled) == count_lattice_points(&from_h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::geometry::int_points;

    fn sq() -> NefPartitionData {
        let d = Polytope::convex_hull(&int_points(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])).unwrap();
        NefPartitionData::from_parts(&d, std::slice::from_ref(&d)).unwrap()
    }

    #[test]
    fn square_counts() {
        let npd = sq();
        let h = &npd.phi;
        assert_eq!(twisted_polytope(h, 1, &TwistSpec::none(h)), npd.delta);
        assert_eq!(h0_count(h, 1, &TwistSpec::none(h)), 9);
        assert_eq!(h0_count(h, 1, &TwistSpec::new(&npd, h, &[0])), 1);
        assert_eq!(h0_count(h, 0, &TwistSpec::none(h)), 1);
        assert_eq!(h_i(&npd, h, 1, &[]), 9);
        assert_eq!(h_i(&npd, h, 1, &[0]), 8);
        let a = TropicalSphere::build_a(&npd, h, 1).unwrap();
        assert_eq!(count_complex_dilate(&a, 1), 8);
        assert_eq!(count_complex_dilate(&a, 2), 16);
        assert_eq!(count_complex_dilate(&a, 0), 0);
        let rep = verify_volume_identity(&npd, h, &a, &default_window(1));
        assert!(rep.pointwise());
        assert_eq!(rep.value(), Some(int(8)));
    }

    #[test]
    fn fitting() {
        let fit = fit_and_extract_degree(&[(1, 8), (2, 16), (3, 24), (4, 32)], 1).unwrap();
        assert_eq!(fit.degree, int(8));
        assert_eq!(fit.coefficients, vec![rat(0), rat(8)]);
        assert!(matches!(fit_and_extract_degree(&[(1, 8), (2, 16), (3, 25)], 1), Err(Error::NotPolynomial { k: 3 })));
        assert!(matches!(fit_and_extract_degree(&[(1, 5), (2, 5), (3, 5)], 1), Err(Error::Inconsistent(_))));
        // k² + k + 1 sampled at 1..4: leading term 2!·1
        let q = fit_and_extract_degree(&[(1, 3), (2, 7), (3, 13), (4, 21)], 2).unwrap();
        assert_eq!(q.degree, int(2));
    }
}
