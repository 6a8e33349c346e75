//! Semi-discrete optimal transport from the normalized measure on `B_ȟ` to
//! atoms on `A_h`, solving the facet-wise real Monge–Ampère equation for a
//! potential `φ(n) = max_a (⟨m_a, −n⟩ − ψ_a)`.
//!
//! The weights `ψ` are floats; every geometric predicate runs on an exact
//! rational snapshot of them, so cell masses always sum to one exactly.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{dot, from_f64, rat, sub, to_f64, to_rats, Rat};
use crate::error::{Error, Result};
use crate::fan::PlFunction;
use crate::geometry::lattice::lattice_points;
use crate::geometry::volume::{lattice_coordinates, volume_and_centroid};
use crate::geometry::{Polytope, RationalPoint};
use crate::linalg::affine_rank;
use crate::spheres::TropicalSphere;

/// Discretized target measure: points of `A_h` with masses summing to one.
#[derive(Debug, Clone)]
pub struct TargetAtoms {
    pub points: Vec<RationalPoint>,
    pub masses: Vec<Rat>,
    pub s: u32,
}

/// Atoms at `(1/s)·(sG ∩ M)` for each facet `G`, carrying `μ(G)/μ(A_h)`
/// split evenly; points shared between facets collect the masses of each.
pub fn discretize_target(a: &TropicalSphere, s: u32) -> Result<TargetAtoms> {
    if s == 0 {
        return Err(Error::Scenario("discretization level must be at least 1".into()));
    }
    if !a.total.is_positive() {
        return Err(Error::EmptySphere);
    }
    let sr = rat(s as i64);
    let mut acc: BTreeMap<RationalPoint, Rat> = BTreeMap::new();
    for (g, mu) in a.facet_polytopes().iter().zip(&a.facet_measure) {
        let pts = lattice_points(&g.scale(&sr));
        let share = mu / (&a.total * rat(pts.len() as i64));
        for p in pts {
            let q: RationalPoint = to_rats(&p).iter().map(|x| x / &sr).collect();
            *acc.entry(q).or_insert_with(Rat::zero) += &share;
        }
    }
    let (points, masses) = acc.into_iter().unzip();
    Ok(TargetAtoms { points, masses, s })
}

/// A facet `τ` of the source in the lattice coordinates of its span.
#[derive(Debug, Clone)]
struct SourceFacet {
    local: Polytope,
    /// Per atom, `ℓ_a(y) = c_a + ⟨w_a, y⟩` before subtracting `ψ_a`.
    c: Vec<Rat>,
    w: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone)]
pub struct TransportProblem {
    facets: Vec<SourceFacet>,
    /// `ν(B_ȟ)`, the total lattice measure of the source.
    nu_total: Rat,
    /// `μ(A_h)`.
    pub mu_total: Rat,
    pub atoms: TargetAtoms,
    pub d: usize,
}

/// One Laguerre cell in the local coordinates of its facet.
#[derive(Debug, Clone)]
pub struct Cell {
    pub vertices: Vec<RationalPoint>,
    pub volume: Rat,
    pub centroid: RationalPoint,
}

/// Functional value, cell masses, and cells at one exact weight snapshot.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub psi: Vec<Rat>,
    pub value: Rat,
    /// `G_a(ψ)`, the `ν̃`-mass of the cell of atom `a`.
    pub masses: Vec<Rat>,
    /// `cells[τ][a]`; `None` for cells of zero volume.
    pub cells: Vec<Vec<Option<Cell>>>,
}

impl Evaluation {
    pub fn value_f64(&self) -> f64 {
        to_f64(&self.value)
    }

    /// `∂F/∂ψ_a = p_a − G_a`.
    pub fn gradient(&self, p: &[Rat]) -> Vec<f64> {
        p.iter().zip(&self.masses).map(|(p, g)| to_f64(&(p - g))).collect()
    }

    pub fn residual(&self, p: &[Rat]) -> f64 {
        self.gradient(p).iter().fold(0.0, |m, g| m.max(g.abs()))
    }

    /// `|Σ_a G_a − 1|`.
    pub fn mass_defect(&self) -> f64 {
        let s: Rat = self.masses.iter().sum();
        to_f64(&(s - Rat::one())).abs()
    }

    pub fn all_nonempty(&self) -> bool {
        self.masses.iter().all(|g| g.is_positive())
    }
}

impl TransportProblem {
    pub fn new(b: &TropicalSphere, atoms: TargetAtoms) -> Result<Self> {
        if !b.total.is_positive() || atoms.points.is_empty() {
            return Err(Error::EmptySphere);
        }
        let facets = b
            .facet_polytopes()
            .iter()
            .map(|tau| {
                let (basis, local) = lattice_coordinates(tau);
                let o = &tau.vertices()[0];
                let local = Polytope::convex_hull(&local)?;
                let c = atoms.points.iter().map(|m| -dot(m, o)).collect();
                let w = atoms
                    .points
                    .iter()
                    .map(|m| basis.iter().map(|e| -dot(m, &to_rats(e))).collect())
                    .collect();
                Ok(SourceFacet { local, c, w })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { facets, nu_total: b.total.clone(), mu_total: rat(0), atoms, d: b.d })
    }

    pub fn with_mu_total(mut self, mu: Rat) -> Self {
        self.mu_total = mu;
        self
    }

    pub fn len(&self) -> usize {
        self.atoms.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.points.is_empty()
    }

    pub fn masses(&self) -> &[Rat] {
        &self.atoms.masses
    }

    /// Source measure of each facet, normalized to total one.
    pub fn facet_weights(&self) -> Vec<Rat> {
        self.facets.iter().map(|f| volume_and_centroid(&f.local).0 / &self.nu_total).collect()
    }

    /// Cell of atom `a` on facet `t`: the points of `τ` where `ℓ_a − ψ_a`
    /// is maximal, ties going to the lower atom index.
    fn cell(&self, t: usize, a: usize, psi: &[Rat]) -> Option<Cell> {
        let f = &self.facets[t];
        let d = self.d;
        let own = &f.c[a] - &psi[a];
        let mut cons: Vec<(Vec<Rat>, Rat)> = f.local.constraints();
        for b in 0..self.len() {
            if b == a {
                continue;
            }
            let coef = sub(&f.w[a], &f.w[b]);
            let off = &own - (&f.c[b] - &psi[b]);
            if coef.iter().all(Zero::is_zero) {
                if off.is_negative() || (off.is_zero() && b < a) {
                    return None;
                }
                continue;
            }
            cons.push((coef, off));
        }
        if d == 1 {
            return interval_cell(&cons);
        }
        let p = Polytope::from_constraints(d, &cons);
        if p.dim() < d as isize {
            return None;
        }
        let (volume, centroid) = volume_and_centroid(&p);
        Some(Cell { vertices: p.vertices().to_vec(), volume, centroid })
    }

    pub fn evaluate_exact(&self, psi: &[Rat]) -> Evaluation {
        let n = self.len();
        let pairs: Vec<(usize, usize)> = (0..self.facets.len()).flat_map(|t| (0..n).map(move |a| (t, a))).collect();
        let flat: Vec<Option<Cell>> = pairs.par_iter().map(|&(t, a)| self.cell(t, a, psi)).collect();
        let mut cells: Vec<Vec<Option<Cell>>> = Vec::with_capacity(self.facets.len());
        let mut it = flat.into_iter();
        for _ in 0..self.facets.len() {
            cells.push(it.by_ref().take(n).collect());
        }
        let mut masses = vec![Rat::zero(); n];
        let mut value: Rat = self.atoms.masses.iter().zip(psi).map(|(p, s)| p * s).sum();
        for (t, row) in cells.iter().enumerate() {
            let f = &self.facets[t];
            for (a, cell) in row.iter().enumerate() {
                if let Some(c) = cell {
                    masses[a] += &c.volume / &self.nu_total;
                    let level = &f.c[a] - &psi[a] + dot(&f.w[a], &c.centroid);
                    value += level * &c.volume / &self.nu_total;
                }
            }
        }
        Evaluation { psi: psi.to_vec(), value, masses, cells }
    }

    pub fn evaluate(&self, psi: &[f64]) -> Evaluation {
        let snap: Vec<Rat> = psi.iter().map(|&x| from_f64(x)).collect();
        self.evaluate_exact(&snap)
    }

    /// Hessian of the dual functional: `H_ab = −|wall_ab| / (|w_a − w_b| ν)`
    /// for atoms whose cells share a wall, with rows summing to zero.
    pub fn hessian(&self, ev: &Evaluation) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut h = vec![vec![Rat::zero(); n]; n];
        for (t, row) in ev.cells.iter().enumerate() {
            let f = &self.facets[t];
            for a in 0..n {
                let Some(ca) = &row[a] else { continue };
                for b in a + 1..n {
                    let Some(cb) = &row[b] else { continue };
                    if let Some(m) = wall_measure(f, a, b, ca, cb, &ev.psi, self.d) {
                        let e = m / &self.nu_total;
                        h[a][b] -= &e;
                        h[b][a] -= &e;
                        h[a][a] += &e;
                        h[b][b] += &e;
                    }
                }
            }
        }
        h.iter().map(|r| r.iter().map(to_f64).collect()).collect()
    }
}

fn interval_cell(cons: &[(Vec<Rat>, Rat)]) -> Option<Cell> {
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for (a, b) in cons {
        let x = -b / &a[0];
        if a[0].is_positive() {
            if lo.as_ref().is_none_or(|l| &x > l) {
                lo = Some(x);
            }
        } else if hi.as_ref().is_none_or(|h| &x < h) {
            hi = Some(x);
        }
    }
    let (lo, hi) = (lo?, hi?);
    if hi <= lo {
        return None;
    }
    let centroid = vec![(&lo + &hi) / rat(2)];
    Some(Cell { volume: &hi - &lo, vertices: vec![vec![lo], vec![hi]], centroid })
}

/// `(d−1)`-measure of the common wall of two cells divided by `|w_a − w_b|`,
/// computed exactly by projecting along a coordinate where `w_a ≠ w_b`.
fn wall_measure(f: &SourceFacet, a: usize, b: usize, ca: &Cell, cb: &Cell, psi: &[Rat], d: usize) -> Option<Rat> {
    let dw = sub(&f.w[a], &f.w[b]);
    let k = dw.iter().position(|x| !x.is_zero())?;
    let rhs = (&f.c[b] - &psi[b]) - (&f.c[a] - &psi[a]);
    let on: Vec<&RationalPoint> = ca.vertices.iter().filter(|v| dot(&dw, v) == rhs).collect();
    let shared: Vec<&RationalPoint> = on.into_iter().filter(|v| cb.vertices.contains(v)).collect();
    if shared.is_empty() {
        return None;
    }
    let refs: Vec<&[Rat]> = shared.iter().map(|v| v.as_slice()).collect();
    if affine_rank(&refs) != d as isize - 1 {
        return None;
    }
    let area = if d == 1 {
        Rat::one()
    } else {
        let proj: Vec<RationalPoint> =
            shared.iter().map(|v| v.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, x)| x.clone()).collect()).collect();
        volume_and_centroid(&Polytope::convex_hull(&proj).ok()?).0
    };
    Some(area / dw[k].abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Newton,
    Gradient,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Use damped Newton steps when the Hessian allows.
    pub newton: bool,
    pub init: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 200, newton: true, init: None }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub psi: Vec<f64>,
    pub evaluation: Evaluation,
    pub iterations: usize,
    pub residual: f64,
    /// Functional value after each accepted step, starting at the initial point.
    pub values: Vec<f64>,
    /// Exact values matching `values`, for monotonicity checks.
    pub exact_values: Vec<Rat>,
    pub steps: Vec<StepKind>,
    pub mass_defects: Vec<f64>,
}

impl Solution {
    /// The functional never increased along accepted steps.
    pub fn monotone(&self) -> bool {
        self.exact_values.windows(2).all(|w| w[1] <= w[0])
    }
}

fn gauge(psi: &mut [f64]) {
    let c = psi[0];
    psi.iter_mut().for_each(|x| *x -= c);
}

/// Minimizes the convex dual functional
/// `F(ψ) = Σ_a p_a ψ_a + ∫ max_a (⟨m_a, −n⟩ − ψ_a) dν̃(n)`, whose gradient is
/// `p − G(ψ)`, with `ψ_0` pinned to zero.
pub fn solve(problem: &TransportProblem, opts: &SolverOptions) -> Result<Solution> {
    let n = problem.len();
    let p = problem.masses().to_vec();
    let mut psi = opts.init.clone().unwrap_or_else(|| vec![0.0; n]);
    if psi.len() != n || psi.iter().any(|x| !x.is_finite()) {
        return Err(Error::Scenario(format!("initial weights must be {n} finite numbers")));
    }
    gauge(&mut psi);
    let mut ev = problem.evaluate(&psi);
    let mut sol = Solution {
        psi: psi.clone(),
        residual: ev.residual(&p),
        values: vec![ev.value_f64()],
        exact_values: vec![ev.value.clone()],
        steps: Vec::new(),
        mass_defects: vec![ev.mass_defect()],
        iterations: 0,
        evaluation: ev.clone(),
    };
    let mut gd_step = 1.0f64;
    for iter in 0..opts.max_iter {
        let g = ev.gradient(&p);
        let r = ev.residual(&p);
        if r <= opts.tol {
            sol.psi = psi;
            sol.residual = r;
            sol.iterations = iter;
            sol.evaluation = ev;
            return Ok(sol);
        }
        let newton_dir = if opts.newton && ev.all_nonempty() { newton_direction(problem, &ev, &g) } else { None };
        let mut accepted = None;
        if let Some(dir) = newton_dir {
            accepted = line_search(problem, &psi, &dir, 1.0, |cand, _| {
                cand.value <= ev.value && (!ev.all_nonempty() || cand.all_nonempty())
            })
            .map(|(x, e, _)| (x, e, StepKind::Newton));
        }
        if accepted.is_none() {
            let mut dir: Vec<f64> = g.iter().map(|x| -x).collect();
            dir[0] = 0.0;
            let slope: f64 = dir.iter().map(|x| x * x).sum();
            let f0 = ev.value_f64();
            // Armijo decrease in floats, never an exact increase
            let found = line_search(problem, &psi, &dir, gd_step * 2.0, |cand, t| {
                cand.value <= ev.value && cand.value_f64() <= f0 - 1e-4 * t * slope
            });
            if let Some((x, e, t)) = found {
                gd_step = t;
                accepted = Some((x, e, StepKind::Gradient));
            }
        }
        let Some((x, e, kind)) = accepted else {
            return Err(Error::NotConverged(format!(
                "no descent step after {iter} iterations; residual {r:.3e} above tolerance {:.1e}",
                opts.tol
            )));
        };
        psi = x;
        ev = e;
        sol.values.push(ev.value_f64());
        sol.exact_values.push(ev.value.clone());
        sol.steps.push(kind);
        sol.mass_defects.push(ev.mass_defect());
    }
    let r = ev.residual(&p);
    if r <= opts.tol {
        sol.psi = psi;
        sol.residual = r;
        sol.iterations = opts.max_iter;
        sol.evaluation = ev;
        return Ok(sol);
    }
    Err(Error::NotConverged(format!(
        "iteration cap {} reached with residual {r:.3e} above tolerance {:.1e}",
        opts.max_iter, opts.tol
    )))
}

fn newton_direction(problem: &TransportProblem, ev: &Evaluation, g: &[f64]) -> Option<Vec<f64>> {
    let n = problem.len();
    if n == 1 {
        return Some(vec![0.0]);
    }
    let h = problem.hessian(ev);
    let m = DMatrix::from_fn(n - 1, n - 1, |i, j| h[i + 1][j + 1]);
    let rhs = DVector::from_fn(n - 1, |i, _| -g[i + 1]);
    let x = m.lu().solve(&rhs)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut dir = vec![0.0];
    dir.extend(x.iter().copied());
    Some(dir)
}

/// Halves the step from `t0` until `accept` holds; at most 60 halvings.
fn line_search(
    problem: &TransportProblem,
    psi: &[f64],
    dir: &[f64],
    t0: f64,
    accept: impl Fn(&Evaluation, f64) -> bool,
) -> Option<(Vec<f64>, Evaluation, f64)> {
    let mut t = t0;
    for _ in 0..60 {
        let x: Vec<f64> = psi.iter().zip(dir).map(|(a, b)| a + t * b).collect();
        if x != psi {
            let e = problem.evaluate(&x);
            if accept(&e, t) {
                return Some((x, e, t));
            }
        }
        t *= 0.5;
    }
    None
}

/// `φ(n) = max_a (⟨m_a, −n⟩ − ψ_a)`.
#[derive(Debug, Clone)]
pub struct ConvexPotential {
    pub points: Vec<Vec<f64>>,
    pub psi: Vec<f64>,
}

impl ConvexPotential {
    pub fn new(atoms: &TargetAtoms, psi: &[f64]) -> Self {
        Self { points: atoms.points.iter().map(|p| p.iter().map(to_f64).collect()).collect(), psi: psi.to_vec() }
    }

    pub fn eval(&self, n: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(&self.psi)
            .map(|(m, s)| -m.iter().zip(n).map(|(a, b)| a * b).sum::<f64>() - s)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Discrete Monge–Ampère mass on each facet compared with `μ(A_h)·ν̃(τ)`.
#[derive(Debug, Clone)]
pub struct MaResidual {
    pub per_facet: Vec<(f64, f64)>,
    pub l1: f64,
    pub max: f64,
    pub total: f64,
    pub expected_total: f64,
}

pub fn ma_residual(problem: &TransportProblem, ev: &Evaluation) -> MaResidual {
    let p = problem.masses();
    let mu = &problem.mu_total;
    let per_facet: Vec<(f64, f64)> = ev
        .cells
        .iter()
        .enumerate()
        .map(|(t, row)| {
            let mut got = Rat::zero();
            for (a, c) in row.iter().enumerate() {
                if let (Some(c), true) = (c, ev.masses[a].is_positive()) {
                    got += &p[a] * (&c.volume / &problem.nu_total) / &ev.masses[a];
                }
            }
            let target = volume_and_centroid(&problem.facets[t].local).0 / &problem.nu_total;
            (to_f64(&(got * mu)), to_f64(&(target * mu)))
        })
        .collect();
    let dev: Vec<f64> = per_facet.iter().map(|(g, t)| (g - t).abs()).collect();
    MaResidual {
        l1: dev.iter().sum(),
        max: dev.iter().fold(0.0, |m, x| m.max(*x)),
        total: per_facet.iter().map(|x| x.0).sum(),
        expected_total: to_f64(mu),
        per_facet,
    }
}

/// Distance of the potential from `φ_h` at random far points.
#[derive(Debug, Clone)]
pub struct MembershipReport {
    pub samples: usize,
    pub max_deviation: f64,
    pub bound: f64,
    /// The atoms contain every vertex of `Δ_h`, which the bound presumes.
    pub covers_vertices: bool,
}

impl MembershipReport {
    pub fn holds(&self) -> bool {
        self.max_deviation <= self.bound + 1e-9
    }
}

pub fn membership_bound(
    potential: &ConvexPotential,
    atoms: &TargetAtoms,
    h: &PlFunction,
    delta_h: &Polytope,
    samples: usize,
    radius: f64,
    seed: u64,
) -> MembershipReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = h.fan().ambient();
    let mut max_deviation = 0.0f64;
    for _ in 0..samples {
        let mut n: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        let len = rng.gen_range(0.0..radius);
        n.iter_mut().for_each(|x| *x *= len / norm);
        let exact: Vec<Rat> = n.iter().map(|&x| from_f64(x)).collect();
        let phi_h = h.eval(&exact).map(|v| to_f64(&v)).unwrap_or(f64::NAN);
        max_deviation = max_deviation.max((potential.eval(&n) - phi_h).abs());
    }
    MembershipReport {
        samples,
        max_deviation,
        bound: potential.psi.iter().fold(0.0, |m, x| m.max(x.abs())),
        covers_vertices: delta_h.vertices().iter().all(|v| atoms.points.contains(v)),
    }
}
