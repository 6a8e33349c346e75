//! Cayley polytopes in `M_ℝ ⊕ ℝ`, their normal fan with its three cone types,
//! good subdivisions, strictly convex lifts, and the dual intersection complex.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arith::{dot, fmt_rat, rat_from_int, to_rats, Int, Rat};
use crate::error::{Error, Result};
use crate::fan::{Fan, PlFunction, Refinement};
use crate::geometry::minkowski::minkowski_sum_all;
use crate::geometry::volume::normalized_volume;
use crate::geometry::{face_minkowski_test, minkowski_sum, Polytope, RationalPoint};
use crate::linalg::coordinates;
use crate::lp::{infeasible_subset, integer_point, Ineq};
use crate::nef::NefPartitionData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConeType {
    /// Contained in `N_ℝ ⊕ {0}`.
    Base,
    /// Rays at height zero and at positive height.
    Mixed,
    /// All rays at positive height.
    Upper,
}

impl ConeType {
    pub fn number(self) -> u8 {
        match self {
            ConeType::Base => 1,
            ConeType::Mixed => 2,
            ConeType::Upper => 3,
        }
    }
}

/// A nonzero cone of a fan in `N_ℝ ⊕ ℝ` split into its height-zero part
/// `μ × {0}` and its positive-height part `ν × {1}`.
#[derive(Debug, Clone)]
pub struct ClassifiedCone {
    pub rays: Vec<usize>,
    pub kind: ConeType,
    pub mu: Polytope,
    pub nu: Polytope,
}

fn height(r: &[Int]) -> &Int {
    r.last().expect("nonempty ray")
}

fn base_part(r: &[Int]) -> Vec<Rat> {
    let t = rat_from_int(height(r));
    let n = r.len() - 1;
    if t.is_zero() {
        to_rats(&r[..n])
    } else {
        r[..n].iter().map(|x| rat_from_int(x) / &t).collect()
    }
}

fn hull_or_empty(pts: Vec<RationalPoint>, ambient: usize) -> Polytope {
    if pts.is_empty() {
        Polytope::empty(ambient)
    } else {
        Polytope::convex_hull(&pts).expect("nonempty")
    }
}

/// Split every nonzero cone of `fan` by ray height.
pub fn classify(fan: &Fan) -> Vec<ClassifiedCone> {
    let n = fan.ambient() - 1;
    fan.cones()
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| {
            let (lo, hi): (Vec<usize>, Vec<usize>) = c.iter().partition(|&&i| height(&fan.rays()[i]).is_zero());
            let mu = hull_or_empty(lo.iter().map(|&i| base_part(&fan.rays()[i])).collect(), n);
            let nu = hull_or_empty(hi.iter().map(|&i| base_part(&fan.rays()[i])).collect(), n);
            let kind = match (lo.is_empty(), hi.is_empty()) {
                (_, true) => ConeType::Base,
                (true, false) => ConeType::Upper,
                (false, false) => ConeType::Mixed,
            };
            ClassifiedCone { rays: c.clone(), kind, mu, nu }
        })
        .collect()
}

fn lift(p: &[Rat], t: Rat) -> Vec<Rat> {
    let mut v = p.to_vec();
    v.push(t);
    v
}

#[derive(Debug, Clone)]
pub struct CayleyData {
    /// `∇_{ȟ′}` in `N_ℝ`.
    pub nabla_hp: Polytope,
    /// Bounded parts of `Δ̃_i`, truncated one unit above their lower hull.
    pub tilde_parts: Vec<Polytope>,
    pub tilde_delta: Polytope,
    pub tilde_fan: Fan,
    pub tilde_phi: PlFunction,
    pub tilde_phi_parts: Vec<PlFunction>,
    pub cones: Vec<ClassifiedCone>,
}

/// Lower vertices of the epigraph of `f` over `part`: the vertices of the
/// cells `part ∩ σ` for maximal cones `σ` of the fan of `f`, lifted by `f`.
fn lower_lift(part: &Polytope, f: &PlFunction) -> Vec<RationalPoint> {
    let fan = f.fan();
    let mut pts: BTreeSet<RationalPoint> = BTreeSet::new();
    for c in 0..fan.maximal_cones().len() {
        let mut cons = part.constraints();
        cons.extend(fan.cone_constraints(c));
        let cell = Polytope::from_constraints(part.ambient(), &cons);
        for v in cell.vertices() {
            pts.insert(lift(v, dot(&f.forms()[c], v)));
        }
    }
    pts.into_iter().collect()
}

impl CayleyData {
    /// `hcheck_prime` is `ȟ′ = ȟ − φ̌` on `Σ̌′`.
    pub fn build(npd: &NefPartitionData, hcheck_prime: &PlFunction) -> Result<Self> {
        let nabla_hp = hcheck_prime.newton_polytope()?;
        let n = npd.rank();
        let e: Vec<Rat> = (0..=n).map(|j| if j == n { Rat::one() } else { Rat::zero() }).collect();
        let lowers: Vec<Vec<RationalPoint>> = npd.parts.iter().map(|p| lower_lift(p, hcheck_prime)).collect();
        let tilde_parts = lowers
            .iter()
            .map(|l| {
                let mut pts = l.clone();
                pts.extend(l.iter().map(|p| crate::arith::add(p, &e)));
                Polytope::convex_hull(&pts)
            })
            .collect::<Result<Vec<_>>>()?;
        let bottoms = lowers.iter().map(|l| Polytope::convex_hull(l)).collect::<Result<Vec<_>>>()?;
        let bottom = minkowski_sum_all(&bottoms, n + 1)?;
        let mut pts: Vec<RationalPoint> = bottom.vertices().to_vec();
        pts.extend(bottom.vertices().iter().map(|p| crate::arith::add(p, &e)));
        let tilde_delta = Polytope::convex_hull(&pts)?;
        let upward = |v: usize| {
            tilde_delta
                .facets()
                .iter()
                .zip(tilde_delta.facet_vertices())
                .filter(|(_, vs)| vs.contains(&v))
                .all(|(f, _)| !f.normal[n].is_negative())
        };
        let tilde_fan = Fan::normal_fan_of_vertices(&tilde_delta, upward)?;
        let tilde_phi = PlFunction::support_function(&tilde_delta, tilde_fan.clone())?;
        let tilde_phi_parts = tilde_parts
            .iter()
            .map(|p| PlFunction::support_function(p, tilde_fan.clone()))
            .collect::<Result<Vec<_>>>()?;
        let cones = classify(&tilde_fan);
        let cd = Self { nabla_hp, tilde_parts, tilde_delta, tilde_fan, tilde_phi, tilde_phi_parts, cones };
        cd.check_types(npd)?;
        cd.check_part_values(npd)?;
        Ok(cd)
    }

    /// Type 1 cones are cones over faces of `Δ*`, type 3 over faces of
    /// `∇_{ȟ′}`, and type 2 over pairs whose sum is a face of the Minkowski sum.
    fn check_types(&self, npd: &NefPartitionData) -> Result<()> {
        let star = &npd.delta_star;
        let face_of = |p: &Polytope, q: &Polytope| -> Option<Vec<usize>> {
            let idx: Option<Vec<usize>> = q.vertices().iter().map(|v| p.vertex_index(v)).collect();
            idx.filter(|i| p.is_face(i))
        };
        for c in &self.cones {
            let name = self.tilde_fan.describe_cone(&c.rays);
            let ok = match c.kind {
                ConeType::Base => face_of(star, &c.mu).is_some(),
                ConeType::Upper => face_of(&self.nabla_hp, &c.nu).is_some(),
                ConeType::Mixed => match (face_of(star, &c.mu), face_of(&self.nabla_hp, &c.nu)) {
                    (Some(f1), Some(f2)) => face_minkowski_test(star, &self.nabla_hp, &f1, &f2)?,
                    _ => false,
                },
            };
            if !ok {
                return Err(Error::Classification(format!("{name} matches no cone type")));
            }
        }
        Ok(())
    }

    fn check_part_values(&self, npd: &NefPartitionData) -> Result<()> {
        for (i, f) in self.tilde_phi_parts.iter().enumerate() {
            for (r, v) in self.tilde_fan.rays().iter().zip(f.values()) {
                let base = base_part(r);
                let expect = if height(r).is_zero() { npd.phi_part(i, &base) } else { Rat::zero() };
                if v != &expect {
                    return Err(Error::Classification(format!(
                        "lifted part {} has value {} at ray {:?}",
                        i + 1,
                        fmt_rat(v),
                        r
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn count(&self, kind: ConeType) -> usize {
        self.cones.iter().filter(|c| c.kind == kind).count()
    }
}

/// A validated good subdivision `Σ̃′`.
#[derive(Debug, Clone)]
pub struct GoodSubdivision {
    pub fan: Fan,
    pub cones: Vec<ClassifiedCone>,
    /// `Err(cone)` names a maximal cone that is not unimodular.
    pub unimodular: std::result::Result<(), String>,
    pub h_tilde: Option<PlFunction>,
}

impl GoodSubdivision {
    pub fn validate(cd: &CayleyData, fine: &Fan, sigma_prime: &Fan) -> Result<Self> {
        let n = cd.nabla_hp.ambient();
        if fine.ambient() != n + 1 {
            return Err(Error::RankMismatch { expected: n + 1, got: fine.ambient() });
        }
        for r in fine.rays() {
            let t = height(r);
            if t.is_zero() {
                continue;
            }
            if !t.is_one() {
                return Err(Error::RayHeight { ray: format!("{r:?}"), height: t.to_string() });
            }
            if !cd.nabla_hp.contains(&base_part(r)) {
                return Err(Error::RayOutsideLift(format!("{r:?}")));
            }
        }
        match fine.is_refinement(&cd.tilde_fan) {
            Refinement::Refines => {}
            Refinement::NotRefinement(w) => return Err(Error::NotRefinement(w)),
            Refinement::SupportMismatch(w) => return Err(Error::SupportMismatch(w)),
        }
        let slice: BTreeSet<Vec<Vec<Int>>> = fine
            .cones()
            .iter()
            .map(|c| {
                let mut v: Vec<Vec<Int>> = c
                    .iter()
                    .map(|&i| &fine.rays()[i])
                    .filter(|r| height(r).is_zero())
                    .map(|r| r[..n].to_vec())
                    .collect();
                v.sort();
                v
            })
            .collect();
        let base: BTreeSet<Vec<Vec<Int>>> = sigma_prime
            .cones()
            .iter()
            .map(|c| {
                let mut v: Vec<Vec<Int>> = c.iter().map(|&i| sigma_prime.rays()[i].clone()).collect();
                v.sort();
                v
            })
            .collect();
        if slice != base {
            let extra = slice.symmetric_difference(&base).next().cloned().unwrap_or_default();
            return Err(Error::SliceMismatch(format!("cone {extra:?} in only one of the slice and the base fan")));
        }
        let unimodular = fine.is_unimodular().map_err(|c| fine.describe_cone(&c));
        Ok(Self { fan: fine.clone(), cones: classify(fine), unimodular, h_tilde: None })
    }

    /// Strictly convex integral lift `h̃` of `h` to the subdivision: ray values
    /// at positive height are unknowns, and every interior wall must be
    /// crossed with slack at least one.
    pub fn find_h_tilde(&self, h: &PlFunction) -> Result<PlFunction> {
        let fan = &self.fan;
        let n = fan.ambient() - 1;
        if !fan.is_simplicial() {
            let c = fan.maximal_cones().iter().find(|c| fan.cone_dim(c) != c.len()).unwrap();
            return Err(Error::NotSimplicial(fan.describe_cone(c)));
        }
        let incomplete = fan.boundary_walls().iter().any(|(_, w)| w.iter().any(|&i| !height(&fan.rays()[i]).is_zero()));
        if incomplete || fan.maximal_cones().iter().any(|c| fan.cone_dim(c) != fan.ambient()) {
            return Err(Error::FanNotComplete);
        }
        // unknown index per ray, or the fixed value from h
        let mut var = vec![None; fan.rays().len()];
        let mut fixed = vec![Rat::zero(); fan.rays().len()];
        let mut nv = 0;
        for (i, r) in fan.rays().iter().enumerate() {
            if height(r).is_zero() {
                fixed[i] = h.eval_int(&r[..n]).ok_or_else(|| Error::UnknownRay(format!("{r:?}")))?;
            } else {
                var[i] = Some(nv);
                nv += 1;
            }
        }
        let walls = fan.walls();
        let rows: Vec<Ineq> = walls
            .iter()
            .map(|w| {
                let cone = &fan.maximal_cones()[w.left];
                let u = *fan.maximal_cones()[w.right].iter().find(|i| !w.rays.contains(i)).unwrap();
                let basis: Vec<Vec<Int>> = cone.iter().map(|&i| fan.rays()[i].clone()).collect();
                let lam = coordinates(&basis, &fan.rays_q()[u]).expect("simplicial cone spans");
                // value(u) − Σ λ_j value(r_j) ≥ 1
                let mut coeffs = vec![Rat::zero(); nv];
                let mut rhs = Rat::one();
                let mut term = |i: usize, c: Rat| match var[i] {
                    Some(k) => coeffs[k] += c,
                    None => rhs -= c * &fixed[i],
                };
                term(u, Rat::one());
                for (j, &ri) in cone.iter().enumerate() {
                    term(ri, -lam[j].clone());
                }
                Ineq::new(coeffs, rhs)
            })
            .collect();
        let point = match integer_point(&rows, nv, 4096) {
            Some(x) => x,
            None => {
                let core = infeasible_subset(&rows, nv, &[]);
                let why = match core {
                    Some(idx) => idx.iter().map(|&k| fan.describe_cone(&walls[k].rays)).collect::<Vec<_>>().join("; "),
                    None => "relaxation feasible but no integral point found".into(),
                };
                return Err(Error::NoConvexLift(why));
            }
        };
        let values: Vec<Rat> = (0..fan.rays().len())
            .map(|i| match var[i] {
                Some(k) => point[k].clone(),
                None => fixed[i].clone(),
            })
            .collect();
        let f = PlFunction::new(fan.clone(), values)?;
        debug_assert!(f.is_strictly_convex());
        Ok(f)
    }

    /// Type 2 cones with `⅁(μ) ≠ ∅`, as `(μ, ν, ⅁(μ))`.
    pub fn relevant_cones(&self, npd: &NefPartitionData) -> Result<Vec<RelevantCone>> {
        let mut out = Vec::new();
        for c in self.cones.iter().filter(|c| c.kind == ConeType::Mixed) {
            if !npd.on_boundary(&c.mu) {
                return Err(Error::NotOnBoundary(c.mu.describe()));
            }
            let b = npd.beta_inverted(&c.mu)?;
            if !b.is_empty() {
                out.push(RelevantCone { rays: c.rays.clone(), mu: c.mu.clone(), nu: c.nu.clone(), beta: b });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct RelevantCone {
    pub rays: Vec<usize>,
    pub mu: Polytope,
    pub nu: Polytope,
    pub beta: Polytope,
}

/// Cells `⅁(μ) + ν` of the dual intersection complex.
#[derive(Debug, Clone)]
pub struct DualIntersectionComplex {
    pub cells: Vec<Polytope>,
    /// Index into the relevant-cone list that first produced each cell.
    pub origin: Vec<usize>,
    pub d: usize,
}

impl DualIntersectionComplex {
    pub fn build(relevant: &[RelevantCone], d: usize) -> Result<Self> {
        let mut cells: Vec<Polytope> = Vec::new();
        let mut origin = Vec::new();
        for (k, rc) in relevant.iter().enumerate() {
            let cell = minkowski_sum(&rc.beta, &rc.nu)?.sum;
            if !cells.contains(&cell) {
                cells.push(cell);
                origin.push(k);
            }
        }
        let complex = Self { cells, origin, d };
        if let Err((a, b)) = complex.check_decomposition() {
            return Err(Error::Decomposition(a, b));
        }
        Ok(complex)
    }

    /// Pairwise intersections are common faces; returns the first bad pair.
    pub fn check_decomposition(&self) -> std::result::Result<(), (usize, usize)> {
        check_pairwise_faces(&self.cells)
    }

    pub fn top_cells(&self) -> Vec<&Polytope> {
        self.cells.iter().filter(|c| c.dim() == self.d as isize).collect()
    }

    /// Every cell vertex lies on a facet of `outer`.
    pub fn on_boundary_of(&self, outer: &Polytope) -> bool {
        self.cells.iter().all(|c| c.vertices().iter().all(|v| outer.facets().iter().any(|f| f.value(v).is_zero())))
    }

    pub fn measure(&self) -> Result<Rat> {
        self.top_cells().iter().map(|c| normalized_volume(c)).sum()
    }
}

/// Intersection of two cells is either empty or a face of both.
pub fn check_pairwise_faces(cells: &[Polytope]) -> std::result::Result<(), (usize, usize)> {
    let pairs: Vec<(usize, usize)> =
        (0..cells.len()).flat_map(|a| (a + 1..cells.len()).map(move |b| (a, b))).collect();
    let bad: Vec<(usize, usize)> = pairs
        .par_iter()
        .copied()
        .filter(|&(a, b)| {
            let i = cells[a].intersect(&cells[b]);
            if i.is_empty() {
                return false;
            }
            let fa = i.vertices().iter().map(|v| cells[a].vertex_index(v)).collect::<Option<Vec<_>>>();
            let fb = i.vertices().iter().map(|v| cells[b].vertex_index(v)).collect::<Option<Vec<_>>>();
            !matches!((fa, fb), (Some(x), Some(y)) if cells[a].is_face(&x) && cells[b].is_face(&y))
        })
        .collect();
    bad.into_iter().min().map_or(Ok(()), Err)
}

/// The same complex from face pairs `(F1, F2)` of `Δ*` and `∇_{ȟ′}` with
/// `⅁(F1) ≠ ∅` and `F1 + F2` a face of `Δ* + ∇_{ȟ′}`.
pub fn face_pair_cells(npd: &NefPartitionData, nabla_hp: &Polytope) -> Result<Vec<Polytope>> {
    let star = &npd.delta_star;
    let mut cells: Vec<Polytope> = Vec::new();
    for f1 in star.faces().iter().filter(|f| f.dim < star.dim()) {
        let mu = star.face_polytope(f1);
        let b = npd.beta_inverted(&mu)?;
        if b.is_empty() {
            continue;
        }
        for f2 in nabla_hp.faces() {
            if !face_minkowski_test(star, nabla_hp, &f1.vertices, &f2.vertices)? {
                continue;
            }
            let cell = minkowski_sum(&b, &nabla_hp.face_polytope(f2))?.sum;
            if !cells.contains(&cell) {
                cells.push(cell);
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::geometry::int_points;

    fn iv(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn sq() -> NefPartitionData {
        let d = Polytope::convex_hull(&int_points(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])).unwrap();
        NefPartitionData::from_parts(&d, std::slice::from_ref(&d)).unwrap()
    }

    fn zero_hp(npd: &NefPartitionData) -> PlFunction {
        PlFunction::zero(npd.sigma_check.clone())
    }

    #[test]
    fn square_cayley_fan() {
        let npd = sq();
        let cd = CayleyData::build(&npd, &zero_hp(&npd)).unwrap();
        assert_eq!(cd.nabla_hp.vertices(), &int_points(&[&[0, 0]])[..]);
        let mut rays: Vec<Vec<Int>> = npd.sigma.rays().iter().map(|r| [r.clone(), vec![int(0)]].concat()).collect();
        rays.push(iv(&[0, 0, 1]));
        rays.sort();
        assert_eq!(cd.tilde_fan.rays(), &rays[..]);
        assert_eq!(cd.tilde_fan.maximal_cones().len(), 4);
        // base cones recover Σ: 4 rays and 4 two-dimensional cones
        assert_eq!(cd.count(ConeType::Base), 8);
        assert_eq!(cd.count(ConeType::Upper), 1);
        assert_eq!(cd.count(ConeType::Mixed), 8);
        let gs = GoodSubdivision::validate(&cd, &cd.tilde_fan, &npd.sigma).unwrap();
        assert!(gs.unimodular.is_ok());
        let h = npd.phi.clone();
        let ht = gs.find_h_tilde(&h).unwrap();
        assert!(ht.is_strictly_convex());
        let rel = gs.relevant_cones(&npd).unwrap();
        assert_eq!(rel.len(), 8);
        let dic = DualIntersectionComplex::build(&rel, 1).unwrap();
        assert_eq!(dic.cells.len(), 8);
        assert_eq!(dic.measure().unwrap(), rat(4));
        assert!(dic.on_boundary_of(&npd.nabla));
    }

    #[test]
    fn bad_subdivisions() {
        let npd = sq();
        let cd = CayleyData::build(&npd, &zero_hp(&npd)).unwrap();
        let high = cd.tilde_fan.stellar(&iv(&[1, 1, 2])).unwrap();
        assert!(matches!(
            GoodSubdivision::validate(&cd, &high, &npd.sigma),
            Err(Error::RayHeight { height, .. }) if height == "2"
        ));
        let flat = cd.tilde_fan.stellar(&iv(&[1, 1, 0])).unwrap();
        assert!(matches!(GoodSubdivision::validate(&cd, &flat, &npd.sigma), Err(Error::SliceMismatch(_))));
    }

    #[test]
    fn lift_failures() {
        let npd = sq();
        let cd = CayleyData::build(&npd, &zero_hp(&npd)).unwrap();
        let gs = GoodSubdivision::validate(&cd, &cd.tilde_fan, &npd.sigma).unwrap();
        // h(e1) + h(−e1) = 0 forces a flat crossing of the walls through ±e2
        let h = PlFunction::from_fn(npd.sigma.clone(), |r| {
            if r == iv(&[-1, 0]).as_slice() {
                rat(-1)
            } else {
                rat(1)
            }
        })
        .unwrap();
        match gs.find_h_tilde(&h) {
            Err(Error::NoConvexLift(w)) => assert!(w.contains("(0,1,0)") || w.contains("(0,-1,0)")),
            other => panic!("unexpected {other:?}"),
        }
        let single = Fan::new(3, &[iv(&[1, 0, 0]), iv(&[0, 1, 0]), iv(&[0, 0, 1])], &[vec![0, 1, 2]]).unwrap();
        let lone = GoodSubdivision { fan: single.clone(), cones: classify(&single), unimodular: Ok(()), h_tilde: None };
        assert!(matches!(lone.find_h_tilde(&npd.phi), Err(Error::FanNotComplete)));
    }

    #[test]
    fn face_pairs_agree_with_relevant_cones() {
        let npd = sq();
        let cd = CayleyData::build(&npd, &zero_hp(&npd)).unwrap();
        let gs = GoodSubdivision::validate(&cd, &cd.tilde_fan, &npd.sigma).unwrap();
        let dic = DualIntersectionComplex::build(&gs.relevant_cones(&npd).unwrap(), 1).unwrap();
        let mut a = face_pair_cells(&npd, &cd.nabla_hp).unwrap();
        let mut b = dic.cells.clone();
        a.sort_by(|x, y| x.vertices().cmp(y.vertices()));
        b.sort_by(|x, y| x.vertices().cmp(y.vertices()));
        assert_eq!(a, b);
    }
}
