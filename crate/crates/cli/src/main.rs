use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::json;

use tropcy_core::arith::{fmt_rat, Rat};
use tropcy_core::cayley::ConeType;
use tropcy_core::ehrhart::HilbertTable;
use tropcy_core::error::ErrorClass;
use tropcy_core::export::{fmt_f64, ExportedComplex};
use tropcy_core::geometry::Polytope;
use tropcy_core::scenario::Context;
use tropcy_core::spheres::{compare_with_dual_complex, TropicalSphere};
use tropcy_core::transport::{ma_residual, membership_bound, solve, ConvexPotential, SolverOptions};
use tropcy_core::{Error, Result};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Reflexivity, nef partition, good subdivision and lift conditions.
    Check,
    /// Cayley fan summary and the dual intersection complex.
    Cayley,
    /// Both tropical spheres with measures and the complex comparison.
    Spheres,
    /// Table of h(I, kL) over all subsets I.
    Hilbert,
    /// Three-way check of d!·μ(A_h) = (L_h^d).
    Volume,
    /// Semi-discrete Monge–Ampère solve.
    SolveMa,
    /// Write complexes as JSON and OBJ.
    Export,
}

#[derive(Debug, Parser)]
#[command(name = "tropcy", version, about = "Tropical spheres and real Monge–Ampère for Batyrev–Borisov data")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    scenario: PathBuf,
    /// Discretization level of the target measure.
    #[arg(long)]
    s: Option<u32>,
    /// Solver tolerance on max_a |p_a − G_a|.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    k_min: Option<i64>,
    #[arg(long)]
    k_max: Option<i64>,
    /// Directory for written artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::InvalidInput => 1,
                ErrorClass::ConditionFailed => 2,
                ErrorClass::NotConverged => 3,
            })
        }
    }
}

fn run(args: &Args) -> Result<()> {
    let ctx = Context::load(&args.scenario)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario {}: rank {}, d {}, r {}",
        ctx.scenario.label(),
        ctx.scenario.rank,
        ctx.scenario.d,
        ctx.scenario.r
    );
    let result = match args.command {
        Command::Check => check(&ctx, &mut out),
        Command::Cayley => cayley(&ctx, &mut out),
        Command::Spheres => spheres(&ctx, &mut out),
        Command::Hilbert => hilbert(&ctx, args, &mut out),
        Command::Volume => volume(&ctx, args, &mut out),
        Command::SolveMa => solve_ma(&ctx, args, &mut out),
        Command::Export => export(&ctx, args, &mut out),
    };
    print!("{out}");
    result
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn point(v: &[Rat]) -> String {
    format!("({})", v.iter().map(fmt_rat).collect::<Vec<_>>().join(","))
}

fn poly(p: &Polytope) -> String {
    format!("conv{{{}}}", p.vertices().iter().map(|v| point(v)).collect::<Vec<_>>().join(", "))
}

fn window(ctx: &Context, args: &Args) -> Vec<i64> {
    let w = ctx.scenario.window();
    let lo = args.k_min.unwrap_or(w[0]);
    let hi = args.k_max.unwrap_or(*w.last().unwrap());
    (lo..=hi).collect()
}

fn check(ctx: &Context, out: &mut String) -> Result<()> {
    let npd = &ctx.npd;
    let _ = writeln!(out, "delta reflexive: yes ({} vertices)", npd.delta.vertices().len());
    let _ = writeln!(out, "nef partition: {} parts, dual polytope reflexive: yes", npd.r());
    let bp = npd.check_boundary_partition();
    let _ = writeln!(out, "boundary lattice points split among the dual parts: {}", yes(bp.is_ok()));
    let _ = writeln!(out, "rays of the refined fan equal the boundary lattice points: {}", yes(ctx.rays_are_boundary_points()));
    let _ = writeln!(out, "h strictly convex: {}", yes(ctx.h.is_strictly_convex()));
    let _ = writeln!(out, "hcheck' convex: {}", yes(ctx.hcheck_prime.is_convex()));
    let cd = ctx.cayley()?;
    let gs = match ctx.good_subdivision(&cd) {
        Ok(gs) => gs,
        Err(e) => {
            let _ = writeln!(out, "good subdivision: no ({e})");
            return Err(e);
        }
    };
    let _ = writeln!(out, "good subdivision (slice and height-one rays): yes");
    let mut failed: Option<Error> = None;
    match &gs.unimodular {
        Ok(()) => {
            let _ = writeln!(out, "unimodular: yes");
        }
        Err(c) => {
            let _ = writeln!(out, "unimodular: no (witness {c})");
            failed.get_or_insert(Error::NonUnimodular(c.clone()));
        }
    }
    match gs.find_h_tilde(&ctx.h) {
        Ok(f) => {
            let _ = writeln!(out, "strictly convex integral lift: yes");
            for (r, v) in f.fan().rays().iter().zip(f.values()) {
                let _ = writeln!(out, "  lift at {:?} = {}", r.iter().map(|x| x.to_string()).collect::<Vec<_>>(), fmt_rat(v));
            }
        }
        Err(e) => {
            let _ = writeln!(out, "strictly convex integral lift: no ({e})");
            failed.get_or_insert(e);
        }
    }
    match bp {
        Ok(()) => {}
        Err(p) => {
            failed.get_or_insert(Error::Inconsistent(format!("boundary point {p:?} not in exactly one dual part")));
        }
    }
    match failed {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn cayley(ctx: &Context, out: &mut String) -> Result<()> {
    let cd = ctx.cayley()?;
    let _ = writeln!(out, "lifted Newton polytope: {}", poly(&cd.nabla_hp));
    let _ = writeln!(out, "Cayley polytope vertices (truncated): {}", cd.tilde_delta.vertices().len());
    let _ = writeln!(out, "Cayley fan: {} rays, {} maximal cones", cd.tilde_fan.rays().len(), cd.tilde_fan.maximal_cones().len());
    for r in cd.tilde_fan.rays() {
        let _ = writeln!(out, "  ray {:?}", r.iter().map(|x| x.to_string()).collect::<Vec<_>>());
    }
    for k in [ConeType::Base, ConeType::Mixed, ConeType::Upper] {
        let _ = writeln!(out, "cones of type {}: {}", k.number(), cd.count(k));
    }
    let gs = ctx.good_subdivision(&cd)?;
    let rel = gs.relevant_cones(&ctx.npd)?;
    let _ = writeln!(out, "relevant cones: {}", rel.len());
    let dic = ctx.dual_complex(&gs)?;
    let _ = writeln!(out, "dual intersection complex: {} cells, measure {}", dic.cells.len(), fmt_rat(&dic.measure()?));
    for c in &dic.cells {
        let _ = writeln!(out, "  dim {} {}", c.dim(), poly(c));
    }
    let _ = writeln!(out, "cells meet in common faces: yes");
    let nabla_h = ctx.hcheck.newton_polytope()?;
    let _ = writeln!(out, "inside the boundary of the Newton polytope of hcheck: {}", yes(dic.on_boundary_of(&nabla_h)));
    Ok(())
}

fn describe_sphere(name: &str, s: &TropicalSphere, out: &mut String) -> Result<()> {
    let _ = writeln!(out, "{name}: {} cells, {} facets, total measure {}", s.cells.len(), s.facets.len(), fmt_rat(&s.total));
    let normalized = s.normalized_measure()?;
    for ((p, m), q) in s.facet_polytopes().iter().zip(&s.facet_measure).zip(&normalized) {
        let _ = writeln!(out, "  {} measure {} normalized {}", poly(p), fmt_rat(m), fmt_rat(q));
    }
    let _ = writeln!(out, "  pure: {}, euler characteristic {}", yes(s.is_pure()), s.euler_characteristic());
    if let Some(c) = s.cycle_count() {
        let _ = writeln!(out, "  facet graph cycles: {c}");
    }
    Ok(())
}

fn spheres(ctx: &Context, out: &mut String) -> Result<()> {
    let a = ctx.sphere_a()?;
    let b = ctx.sphere_b()?;
    describe_sphere("A_h", &a, out)?;
    describe_sphere("B_hcheck", &b, out)?;
    let cd = ctx.cayley()?;
    let gs = ctx.good_subdivision(&cd)?;
    let dic = ctx.dual_complex(&gs)?;
    let cmp = compare_with_dual_complex(&b, &dic);
    let _ = writeln!(out, "B_hcheck equals the dual intersection complex: {}", yes(cmp.equal()));
    for c in &cmp.sphere_uncovered {
        let _ = writeln!(out, "  sphere cell not covered: {}", poly(c));
    }
    for c in &cmp.complex_uncovered {
        let _ = writeln!(out, "  complex cell not covered: {}", poly(c));
    }
    if cmp.equal() {
        Ok(())
    } else {
        Err(Error::Inconsistent("tropical sphere and dual intersection complex differ".into()))
    }
}

fn subset_name(s: &[usize]) -> String {
    format!("{{{}}}", s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","))
}

fn hilbert(ctx: &Context, args: &Args, out: &mut String) -> Result<()> {
    let ks = window(ctx, args);
    let t = HilbertTable::build(&ctx.npd, &ctx.h, &ks);
    let _ = writeln!(out, "I\\k {}", ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "));
    for (s, row) in t.subsets.iter().zip(&t.counts) {
        let _ = writeln!(out, "{} {}", subset_name(s), row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}

fn volume(ctx: &Context, args: &Args, out: &mut String) -> Result<()> {
    let a = ctx.sphere_a()?;
    let ks = window(ctx, args);
    let rep = ctx.volume_report(&a, &ks);
    let _ = writeln!(out, "k h(I,kL) #(kA_h∩M) sections");
    for r in &rep.rows {
        let _ = writeln!(out, "{} {} {} {}", r.k, r.hilbert, r.complex, r.sections);
    }
    let show = |r: &Result<tropcy_core::arith::Int>| match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("error: {e}"),
    };
    let _ = writeln!(out, "from facet volumes: {}", fmt_rat(&rep.from_volumes));
    let _ = writeln!(out, "from the dilated complex: {}", show(&rep.from_complex));
    let _ = writeln!(out, "from the alternating sum: {}", show(&rep.from_hilbert));
    let _ = writeln!(out, "pointwise counts agree: {}", yes(rep.pointwise()));
    if let Some(v) = rep.value().filter(|_| rep.pointwise()) {
        let _ = writeln!(out, "d!·μ(A_h) = {v} = (L_h^d)");
        return Ok(());
    }
    for r in [&rep.from_complex, &rep.from_hilbert] {
        if let Err(e) = r {
            return Err(match e {
                Error::NotPolynomial { k } => Error::NotPolynomial { k: *k },
                other => Error::Inconsistent(other.to_string()),
            });
        }
    }
    Err(Error::Inconsistent("the three values of d!·μ(A_h) disagree".into()))
}

fn solve_ma(ctx: &Context, args: &Args, out: &mut String) -> Result<()> {
    let s = args.s.unwrap_or(ctx.scenario.solver.s);
    let tol = match args.tol {
        Some(t) => t,
        None => ctx.scenario.tol()?,
    };
    let a = ctx.sphere_a()?;
    let b = ctx.sphere_b()?;
    let prob = ctx.transport(&a, &b, s)?;
    let opts = SolverOptions { tol, max_iter: ctx.scenario.solver.max_iter, ..SolverOptions::default() };
    let sol = solve(&prob, &opts)?;
    let _ = writeln!(out, "atoms: {} at level s = {s}", prob.len());
    let _ = writeln!(out, "iterations: {} ({} Newton)", sol.iterations, sol.steps.iter().filter(|k| matches!(k, tropcy_core::transport::StepKind::Newton)).count());
    let _ = writeln!(out, "residual max_a |p_a - G_a|: {}", fmt_f64(sol.residual));
    let _ = writeln!(out, "functional non-increasing: {}", yes(sol.monotone()));
    let _ = writeln!(out, "atom mass psi");
    for ((p, m), w) in prob.atoms.points.iter().zip(&prob.atoms.masses).zip(&sol.psi) {
        let _ = writeln!(out, "  {} {} {}", point(p), fmt_rat(m), fmt_f64(*w));
    }
    let res = ma_residual(&prob, &sol.evaluation);
    let _ = writeln!(out, "Monge–Ampère mass per facet (got, target):");
    for (g, t) in &res.per_facet {
        let _ = writeln!(out, "  {} {}", fmt_f64(*g), fmt_f64(*t));
    }
    let _ = writeln!(out, "deviation L1 {} max {}", fmt_f64(res.l1), fmt_f64(res.max));
    let _ = writeln!(out, "total {} expected {}", fmt_f64(res.total), fmt_f64(res.expected_total));
    let pot = ConvexPotential::new(&prob.atoms, &sol.psi);
    let dh = ctx.h.newton_polytope()?;
    let mb = membership_bound(&pot, &prob.atoms, &ctx.h, &dh, 500, 1e4, 1);
    let _ = writeln!(
        out,
        "bounded distance from the support function: {} (max {} against bound {})",
        yes(mb.holds()),
        fmt_f64(mb.max_deviation),
        fmt_f64(mb.bound)
    );
    if let Some(dir) = &args.out {
        let atoms: Vec<_> = prob
            .atoms
            .points
            .iter()
            .zip(&prob.atoms.masses)
            .zip(&sol.psi)
            .map(|((p, m), w)| json!({"point": p.iter().map(fmt_rat).collect::<Vec<_>>(), "mass": fmt_rat(m), "psi": fmt_f64(*w)}))
            .collect();
        let doc = json!({
            "s": s,
            "iterations": sol.iterations,
            "residual": fmt_f64(sol.residual),
            "atoms": atoms,
        });
        write_file(dir, "weights.json", &serde_json::to_string_pretty(&doc).expect("json"), out)?;
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, body: &str, out: &mut String) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(name);
    std::fs::write(&p, body)?;
    let _ = writeln!(out, "wrote {}", p.display());
    Ok(())
}

fn export(ctx: &Context, args: &Args, out: &mut String) -> Result<()> {
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("export"));
    let a = ctx.sphere_a()?;
    let b = ctx.sphere_b()?;
    let cd = ctx.cayley()?;
    let gs = ctx.good_subdivision(&cd)?;
    let dic = ctx.dual_complex(&gs)?;
    let rank = ctx.scenario.rank;
    let sets: [(&str, Vec<Polytope>); 3] =
        [("a_h", a.facet_polytopes()), ("b_hcheck", b.facet_polytopes()), ("dual_complex", dic.cells.clone())];
    for (name, cells) in sets {
        let ex = ExportedComplex::new(name, rank, &cells)?;
        write_file(&dir, &format!("{name}.json"), &ex.to_json(), out)?;
        write_file(&dir, &format!("{name}.obj"), &ex.to_obj(&cells), out)?;
    }
    Ok(())
}
