use std::collections::BTreeMap;
use std::path::PathBuf;

use num_traits::Zero;

use tropcy_core::arith::{rat, ratio, Rat};
use tropcy_core::cayley::ConeType;
use tropcy_core::scenario::Context;
use tropcy_core::spheres::compare_with_dual_complex;
use tropcy_core::transport::{discretize_target, solve, SolverOptions, TargetAtoms, TransportProblem};
use tropcy_core::Error;

fn scenario(name: &str) -> Context {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    Context::load(&p).unwrap()
}

fn problem(ctx: &Context, s: u32) -> TransportProblem {
    let a = ctx.sphere_a().unwrap();
    let b = ctx.sphere_b().unwrap();
    ctx.transport(&a, &b, s).unwrap()
}

#[test]
fn cayley_fans_of_bundled_scenarios() {
    for (name, cones, maximal) in [("sq.json", 17, 4), ("p2.json", 13, 3), ("p3_22.json", 29, 4)] {
        let ctx = scenario(name);
        let cd = ctx.cayley().unwrap();
        assert_eq!(cd.cones.len(), cones, "{name}");
        assert_eq!(cd.count(ConeType::Upper), 1, "{name}");
        assert_eq!(cd.tilde_fan.maximal_cones().len(), maximal, "{name}");
        let gs = ctx.good_subdivision(&cd).unwrap();
        assert!(gs.unimodular.is_ok(), "{name}");
        let lift = gs.find_h_tilde(&ctx.h).unwrap();
        assert_eq!(lift.fan().rays().len(), gs.fan.rays().len());
        assert!(ctx.rays_are_boundary_points(), "{name}");
    }
}

#[test]
fn volumes_agree_three_ways() {
    for (name, want) in [("sq.json", 8), ("p2.json", 9), ("p3_22.json", 16)] {
        let ctx = scenario(name);
        let a = ctx.sphere_a().unwrap();
        let rep = ctx.volume_report(&a, &[1, 2, 3, 4, 5]);
        assert!(rep.pointwise(), "{name}: {:?}", rep.rows);
        assert!(rep.agree(), "{name}");
        assert_eq!(rep.value(), Some(want.into()), "{name}");
        assert_eq!(rep.from_volumes, rat(want));
    }
}

#[test]
fn sphere_b_matches_dual_complex() {
    for name in ["sq.json", "p2.json", "p3_22.json"] {
        let ctx = scenario(name);
        let cd = ctx.cayley().unwrap();
        let gs = ctx.good_subdivision(&cd).unwrap();
        let dic = ctx.dual_complex(&gs).unwrap();
        let b = ctx.sphere_b().unwrap();
        assert!(compare_with_dual_complex(&b, &dic).equal(), "{name}");
        assert_eq!(dic.measure().unwrap(), b.total, "{name}");
        assert_eq!(b.cycle_count(), Some(1), "{name}");
        assert!(b.is_pure());
    }
}

#[test]
fn atoms_carry_unit_mass() {
    for name in ["sq.json", "p2.json", "p3_22.json"] {
        let ctx = scenario(name);
        let a = ctx.sphere_a().unwrap();
        for s in [1, 2, 3] {
            let atoms = discretize_target(&a, s).unwrap();
            let total: Rat = atoms.masses.iter().sum();
            assert_eq!(total, rat(1), "{name} s={s}");
        }
    }
}

#[test]
fn gradient_descent_oracle_matches_newton() {
    let ctx = scenario("p2.json");
    for s in [1, 2] {
        let prob = problem(&ctx, s);
        let newton = solve(&prob, &SolverOptions::default()).unwrap();
        let gd = solve(&prob, &SolverOptions { newton: false, max_iter: 20_000, tol: 1e-10, ..Default::default() }).unwrap();
        assert!(gd.steps.iter().all(|k| *k == tropcy_core::transport::StepKind::Gradient));
        for (x, y) in newton.psi.iter().zip(&gd.psi) {
            assert!((x - y).abs() <= 1e-6, "s={s}: {x} vs {y}");
        }
    }
}

#[test]
fn constant_shift_of_start_changes_nothing() {
    let ctx = scenario("p2.json");
    let prob = problem(&ctx, 2);
    let base = solve(&prob, &SolverOptions::default()).unwrap();
    let shifted = solve(&prob, &SolverOptions { init: Some(vec![0.75; prob.len()]), ..Default::default() }).unwrap();
    for (x, y) in base.psi.iter().zip(&shifted.psi) {
        assert!((x - y).abs() <= 1e-9);
    }
    assert_eq!(shifted.psi[0], 0.0);
}

#[test]
fn perturbed_masses_still_converge() {
    let ctx = scenario("p3_22.json");
    let a = ctx.sphere_a().unwrap();
    let b = ctx.sphere_b().unwrap();
    let atoms = discretize_target(&a, 2).unwrap();
    let n = atoms.masses.len() as i64;
    // Move a little mass within consecutive pairs; the total stays one.
    let mut masses = atoms.masses.clone();
    let delta = ratio(1, 50 * n * n);
    for pair in masses.chunks_mut(2).filter(|c| c.len() == 2) {
        pair[0] += &delta;
        pair[1] -= &delta;
    }
    let total: Rat = masses.iter().sum();
    assert_eq!(total, rat(1));
    let prob = TransportProblem::new(&b, TargetAtoms { masses, ..atoms }).unwrap();
    let sol = solve(&prob, &SolverOptions::default()).unwrap();
    assert!(sol.residual <= 1e-9);
    assert!(sol.monotone());
}

/// Unimodular 2x2 matrices with entries in {-1, 0, 1}.
fn small_unimodular() -> Vec<[[i64; 2]; 2]> {
    let vals = [-1i64, 0, 1];
    let mut out = Vec::new();
    for a in vals {
        for b in vals {
            for c in vals {
                for d in vals {
                    if (a * d - b * c).abs() == 1 {
                        out.push([[a, b], [c, d]]);
                    }
                }
            }
        }
    }
    out
}

fn apply(g: &[[i64; 2]; 2], v: &[Rat]) -> Vec<Rat> {
    (0..2).map(|i| rat(g[i][0]) * &v[0] + rat(g[i][1]) * &v[1]).collect()
}

#[test]
fn weights_respect_lattice_symmetries() {
    for (name, s) in [("sq.json", 1), ("p2.json", 2)] {
        let ctx = scenario(name);
        let prob = problem(&ctx, s);
        let b = ctx.sphere_b().unwrap();
        let sol = solve(&prob, &SolverOptions::default()).unwrap();
        let index: BTreeMap<Vec<Rat>, usize> = prob.atoms.points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut used = 0;
        for g in small_unimodular() {
            // g acts on atoms; its inverse transpose has to preserve the source.
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            let inv_t = [[g[1][1] * det, -g[1][0] * det], [-g[0][1] * det, g[0][0] * det]];
            let perm: Option<Vec<usize>> = prob.atoms.points.iter().map(|p| index.get(&apply(&g, p)).copied()).collect();
            let Some(perm) = perm else { continue };
            if perm.iter().enumerate().any(|(i, &j)| prob.atoms.masses[i] != prob.atoms.masses[j]) {
                continue;
            }
            let mut src: Vec<Vec<Rat>> = b.polytope.vertices().iter().map(|v| apply(&inv_t, v)).collect();
            src.sort();
            if src != b.polytope.vertices() {
                continue;
            }
            used += 1;
            let shift = sol.psi[perm[0]] - sol.psi[0];
            for (i, &j) in perm.iter().enumerate() {
                assert!((sol.psi[j] - sol.psi[i] - shift).abs() <= 1e-7, "{name}: {g:?}");
            }
        }
        assert!(used >= 4, "{name}: only {used} symmetries");
    }
}

#[test]
fn square_solution_is_exact() {
    let ctx = scenario("sq.json");
    let prob = problem(&ctx, 1);
    let sol = solve(&prob, &SolverOptions::default()).unwrap();
    assert!(sol.iterations <= 2);
    for (p, psi) in prob.atoms.points.iter().zip(&sol.psi) {
        let corner = p.iter().all(|x| !x.is_zero());
        let want = if corner { 0.0 } else { -1.0 / 6.0 };
        assert!((psi - want).abs() <= 1e-9, "{p:?}: {psi}");
    }
}

#[test]
fn iteration_cap_reports_not_converged() {
    let ctx = scenario("p3_22.json");
    let prob = problem(&ctx, 2);
    let err = solve(&prob, &SolverOptions { max_iter: 1, newton: false, ..Default::default() }).unwrap_err();
    assert!(matches!(err, Error::NotConverged(_)), "{err}");
}
