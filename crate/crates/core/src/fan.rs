//! Rational polyhedral fans and piecewise-linear functions on them.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arith::{dot, fmt_rat, primitive_int, rat_from_int, to_rats, Int, Rat};
use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::linalg::{maximal_minor_gcd, nullspace, rank, rref};
use crate::lp::{feasible_point, Ineq};

/// A cone as primitive generators; `dim` is the rank of their span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    pub rays: Vec<Vec<Int>>,
    pub dim: usize,
}

/// H-description of a cone: `⟨a, x⟩ ≥ 0` for facets and `= 0` for equations,
/// plus the ray subsets on each facet.
#[derive(Debug, Clone)]
struct ConeShape {
    equations: Vec<Vec<Rat>>,
    facets: Vec<(Vec<Rat>, Vec<usize>)>,
    faces: Vec<Vec<usize>>,
    dim: usize,
}

fn cone_shape(all_rays: &[Vec<Rat>], cone: &[usize], n: usize) -> ConeShape {
    let rows: Vec<Vec<Rat>> = cone.iter().map(|&i| all_rays[i].clone()).collect();
    let k = rank(&rows);
    let equations = nullspace(&rows, n);
    let mut facets: Vec<(Vec<Rat>, Vec<usize>)> = Vec::new();
    if k > 0 {
        let subsets: Vec<Vec<usize>> = if k == 1 {
            vec![Vec::new()]
        } else {
            itertools::Itertools::combinations(cone.iter().copied(), k - 1).collect()
        };
        for sub in subsets {
            let srows: Vec<Vec<Rat>> = sub.iter().map(|&i| all_rays[i].clone()).collect();
            if rank(&srows) != k - 1 {
                continue;
            }
            let cand = nullspace(&srows, n);
            let Some(mut a) = cand.into_iter().find(|a| cone.iter().any(|&i| !dot(a, &all_rays[i]).is_zero())) else {
                continue;
            };
            let vals: Vec<Rat> = cone.iter().map(|&i| dot(&a, &all_rays[i])).collect();
            if vals.iter().any(Signed::is_positive) && vals.iter().any(Signed::is_negative) {
                continue;
            }
            if vals.iter().any(Signed::is_negative) {
                a = a.iter().map(|x| -x).collect();
            }
            let on: Vec<usize> = cone.iter().copied().filter(|&i| dot(&a, &all_rays[i]).is_zero()).collect();
            if facets.iter().any(|(_, s)| *s == on) {
                continue;
            }
            let a: Vec<Rat> = crate::arith::primitive(&a).iter().map(rat_from_int).collect();
            facets.push((a, on));
        }
    }
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    faces.insert(cone.to_vec());
    let mut frontier: Vec<Vec<usize>> = facets.iter().map(|(_, s)| s.clone()).collect();
    while let Some(f) = frontier.pop() {
        if !faces.insert(f.clone()) {
            continue;
        }
        for (_, g) in &facets {
            let inter: Vec<usize> = f.iter().copied().filter(|i| g.contains(i)).collect();
            if !faces.contains(&inter) {
                frontier.push(inter);
            }
        }
    }
    faces.insert(Vec::new());
    ConeShape { equations, facets, faces: faces.into_iter().collect(), dim: k }
}

/// How one fan relates to another under [`Fan::is_refinement`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refinement {
    Refines,
    NotRefinement(String),
    SupportMismatch(String),
}

impl Refinement {
    pub fn holds(&self) -> bool {
        matches!(self, Refinement::Refines)
    }
}

#[derive(Debug, Clone)]
pub struct Wall {
    pub left: usize,
    pub right: usize,
    pub rays: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Fan {
    ambient: usize,
    rays: Vec<Vec<Int>>,
    rays_q: Vec<Vec<Rat>>,
    maximal: Vec<Vec<usize>>,
    shapes: Vec<ConeShape>,
    cones: Vec<Vec<usize>>,
}

impl Fan {
    /// Fan from generator vectors and maximal cones given as lists of
    /// generator indices. Generators are made primitive and deduplicated;
    /// rays are sorted lexicographically.
    pub fn new(ambient: usize, generators: &[Vec<Int>], maximal: &[Vec<usize>]) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.len() != ambient) {
            return Err(Error::RankMismatch { expected: ambient, got: g.len() });
        }
        let prim: Vec<Vec<Int>> = generators.iter().map(|g| primitive_int(g)).collect();
        let rays: Vec<Vec<Int>> = prim.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let index = |g: &Vec<Int>| rays.binary_search(g).expect("present");
        let mut max: Vec<Vec<usize>> = maximal
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c.iter().map(|&i| index(&prim[i])).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        max.sort();
        max.dedup();
        let rays_q: Vec<Vec<Rat>> = rays.iter().map(|r| to_rats(r)).collect();
        let shapes: Vec<ConeShape> = max.par_iter().map(|c| cone_shape(&rays_q, c, ambient)).collect();
        let mut cones: BTreeSet<Vec<usize>> = BTreeSet::new();
        for s in &shapes {
            cones.extend(s.faces.iter().cloned());
        }
        let mut cones: Vec<Vec<usize>> = cones.into_iter().collect();
        cones.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(Self { ambient, rays, rays_q, maximal: max, shapes, cones })
    }

    /// Normal fan of a full-dimensional polytope, using inner facet normals.
    pub fn normal_fan(p: &Polytope) -> Result<Self> {
        if !p.is_full_dim() {
            return Err(Error::NotFullDimensional { dim: p.dim(), ambient: p.ambient() });
        }
        Self::normal_fan_of_vertices(p, |_| true)
    }

    /// Fan of the normal cones of the vertices selected by `keep`.
    pub fn normal_fan_of_vertices(p: &Polytope, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let kept: Vec<usize> = (0..p.vertices().len()).filter(|&v| keep(v)).collect();
        // only facets touching a kept vertex contribute rays
        let used: Vec<usize> =
            (0..p.facets().len()).filter(|&f| kept.iter().any(|v| p.facet_vertices()[f].contains(v))).collect();
        let gens: Vec<Vec<Int>> = used.iter().map(|&f| p.facets()[f].normal.clone()).collect();
        let cones: Vec<Vec<usize>> = kept
            .iter()
            .map(|v| (0..used.len()).filter(|&k| p.facet_vertices()[used[k]].contains(v)).collect())
            .collect();
        Self::new(p.ambient(), &gens, &cones)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rays(&self) -> &[Vec<Int>] {
        &self.rays
    }

    pub fn ray_index(&self, r: &[Int]) -> Option<usize> {
        self.rays.binary_search_by(|x| x.as_slice().cmp(r)).ok()
    }

    pub fn maximal_cones(&self) -> &[Vec<usize>] {
        &self.maximal
    }

    /// Every cone (as ray-index sets), from the zero cone upward.
    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn cone(&self, rays: &[usize]) -> Cone {
        let gens: Vec<Vec<Int>> = rays.iter().map(|&i| self.rays[i].clone()).collect();
        let q: Vec<Vec<Rat>> = gens.iter().map(|r| to_rats(r)).collect();
        Cone { dim: rank(&q), rays: gens }
    }

    pub fn cone_dim(&self, rays: &[usize]) -> usize {
        let q: Vec<Vec<Rat>> = rays.iter().map(|&i| self.rays_q[i].clone()).collect();
        rank(&q)
    }

    pub fn describe_cone(&self, rays: &[usize]) -> String {
        let parts: Vec<String> = rays
            .iter()
            .map(|&i| format!("({})", self.rays[i].iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        format!("cone[{}]", parts.join(","))
    }

    fn in_shape(&self, c: usize, x: &[Rat]) -> bool {
        let s = &self.shapes[c];
        s.equations.iter().all(|e| dot(e, x).is_zero()) && s.facets.iter().all(|(a, _)| !dot(a, x).is_negative())
    }

    /// H-description of maximal cone `c` as `(a, 0)` pairs meaning `⟨a, x⟩ ≥ 0`,
    /// equations included as opposite pairs.
    pub fn cone_constraints(&self, c: usize) -> Vec<(Vec<Rat>, Rat)> {
        let s = &self.shapes[c];
        let mut out: Vec<(Vec<Rat>, Rat)> = Vec::new();
        for e in &s.equations {
            out.push((e.clone(), Rat::zero()));
            out.push((e.iter().map(|x| -x).collect(), Rat::zero()));
        }
        out.extend(s.facets.iter().map(|(a, _)| (a.clone(), Rat::zero())));
        out
    }

    /// Ray subsets spanning the facets of maximal cone `c`.
    pub fn cone_facets(&self, c: usize) -> Vec<Vec<usize>> {
        self.shapes[c].facets.iter().map(|(_, r)| r.clone()).collect()
    }

    pub fn rays_q(&self) -> &[Vec<Rat>] {
        &self.rays_q
    }

    /// Lowest-index maximal cone containing `x`.
    pub fn locate(&self, x: &[Rat]) -> Option<usize> {
        (0..self.maximal.len()).find(|&c| self.in_shape(c, x))
    }

    pub fn in_support(&self, x: &[Rat]) -> bool {
        self.locate(x).is_some()
    }

    /// Whether the cone spanned by `rays` (vectors) lies in maximal cone `c`.
    fn cone_inside(&self, c: usize, rays: &[Vec<Rat>]) -> bool {
        rays.iter().all(|r| self.in_shape(c, r))
    }

    /// Codimension-one cones of full-dimensional maximal cones, each with the
    /// maximal cones containing it.
    fn wall_map(&self) -> BTreeMap<Vec<usize>, Vec<usize>> {
        let mut map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (c, s) in self.shapes.iter().enumerate() {
            if s.dim != self.ambient {
                continue;
            }
            for (_, rays) in &s.facets {
                map.entry(rays.clone()).or_default().push(c);
            }
        }
        map
    }

    /// Interior walls: codimension-one cones shared by two maximal cones.
    pub fn walls(&self) -> Vec<Wall> {
        self.wall_map()
            .into_iter()
            .filter(|(_, cs)| cs.len() == 2)
            .map(|(rays, cs)| Wall { left: cs[0], right: cs[1], rays })
            .collect()
    }

    /// Walls bounding the support (in exactly one maximal cone).
    pub fn boundary_walls(&self) -> Vec<(usize, Vec<usize>)> {
        self.wall_map().into_iter().filter(|(_, cs)| cs.len() == 1).map(|(rays, cs)| (cs[0], rays)).collect()
    }

    /// Complete iff every maximal cone is full-dimensional and every wall is
    /// shared by exactly two maximal cones.
    pub fn is_complete(&self) -> bool {
        !self.maximal.is_empty()
            && self.shapes.iter().all(|s| s.dim == self.ambient)
            && self.wall_map().values().all(|cs| cs.len() == 2)
    }

    pub fn is_simplicial(&self) -> bool {
        self.shapes.iter().zip(&self.maximal).all(|(s, c)| s.dim == c.len())
    }

    /// Fan axiom: any two maximal cones meet in a common face. Returns the
    /// first offending pair.
    pub fn check_intersections(&self) -> std::result::Result<(), (usize, usize)> {
        let pairs: Vec<(usize, usize)> =
            (0..self.maximal.len()).flat_map(|a| (a + 1..self.maximal.len()).map(move |b| (a, b))).collect();
        let bad: Vec<(usize, usize)> =
            pairs.par_iter().copied().filter(|&(a, b)| !self.meet_properly(a, b)).collect();
        match bad.into_iter().min() {
            Some(p) => Err(p),
            None => Ok(()),
        }
    }

    fn meet_properly(&self, a: usize, b: usize) -> bool {
        let ca = &self.maximal[a];
        let cb = &self.maximal[b];
        let common: Vec<usize> = ca.iter().copied().filter(|i| cb.contains(i)).collect();
        if !self.shapes[a].faces.contains(&common) || !self.shapes[b].faces.contains(&common) {
            return false;
        }
        // separating functional: ≥ 0 on a, ≤ 0 on b, vanishing exactly on the common face
        let n = self.ambient;
        let mut rows = Vec::new();
        for &i in ca {
            let r = self.rays_q[i].clone();
            if common.contains(&i) {
                rows.push(Ineq::new(r.clone(), Rat::zero()));
                rows.push(Ineq::new(r.iter().map(|x| -x).collect(), Rat::zero()));
            } else {
                rows.push(Ineq::new(r, Rat::one()));
            }
        }
        for &i in cb {
            if common.contains(&i) {
                continue;
            }
            let r: Vec<Rat> = self.rays_q[i].iter().map(|x| -x).collect();
            rows.push(Ineq::new(r, Rat::one()));
        }
        feasible_point(&rows, n).is_some()
    }

    /// Whether every cone of `self` lies in a cone of `coarse` and the
    /// supports agree.
    pub fn is_refinement(&self, coarse: &Fan) -> Refinement {
        if self.ambient != coarse.ambient {
            return Refinement::SupportMismatch("ambient rank differs".into());
        }
        let mut owner = vec![0usize; self.maximal.len()];
        for (c, cone) in self.maximal.iter().enumerate() {
            let rays: Vec<Vec<Rat>> = cone.iter().map(|&i| self.rays_q[i].clone()).collect();
            match (0..coarse.maximal.len()).find(|&d| coarse.cone_inside(d, &rays)) {
                Some(d) => owner[c] = d,
                None => {
                    let name = self.describe_cone(cone);
                    return if rays.iter().any(|r| !coarse.in_support(r)) {
                        Refinement::SupportMismatch(format!("{name} leaves the support"))
                    } else {
                        Refinement::NotRefinement(name)
                    };
                }
            }
        }
        // coverage: inside each coarse cone the fine cones form a pseudomanifold
        // whose free walls lie on the coarse cone's boundary
        for d in 0..coarse.maximal.len() {
            let inside: Vec<usize> = (0..self.maximal.len()).filter(|&c| owner[c] == d).collect();
            let coarse_dim = coarse.shapes[d].dim;
            if inside.is_empty() || inside.iter().any(|&c| self.shapes[c].dim != coarse_dim) {
                return Refinement::SupportMismatch(format!("{} not covered", coarse.describe_cone(&coarse.maximal[d])));
            }
            let mut count: BTreeMap<&Vec<usize>, usize> = BTreeMap::new();
            for &c in &inside {
                for (_, w) in &self.shapes[c].facets {
                    *count.entry(w).or_default() += 1;
                }
            }
            for (w, k) in count {
                let on_boundary =
                    coarse.shapes[d].facets.iter().any(|(a, _)| w.iter().all(|&i| dot(a, &self.rays_q[i]).is_zero()));
                if k > 2 || (k == 1 && !on_boundary) {
                    return Refinement::SupportMismatch(format!(
                        "{} not covered near {}",
                        coarse.describe_cone(&coarse.maximal[d]),
                        self.describe_cone(w)
                    ));
                }
            }
        }
        Refinement::Refines
    }

    /// Unimodularity: each maximal cone is generated by part of a lattice
    /// basis. On failure returns the offending cone.
    pub fn is_unimodular(&self) -> std::result::Result<(), Vec<usize>> {
        for (c, s) in self.maximal.iter().zip(&self.shapes) {
            let rows: Vec<Vec<Int>> = c.iter().map(|&i| self.rays[i].clone()).collect();
            if s.dim != c.len() || !maximal_minor_gcd(&rows).is_one() {
                return Err(c.clone());
            }
        }
        Ok(())
    }

    /// Stellar subdivision of every cone containing `v` at the ray through `v`.
    pub fn stellar(&self, v: &[Int]) -> Result<Self> {
        let vq = to_rats(v);
        let mut gens = self.rays.clone();
        gens.push(primitive_int(v));
        let new = gens.len() - 1;
        let mut cones = Vec::new();
        for (c, cone) in self.maximal.iter().enumerate() {
            if !self.in_shape(c, &vq) {
                cones.push(cone.clone());
                continue;
            }
            for (_, facet) in &self.shapes[c].facets {
                let fq: Vec<Vec<Rat>> = facet.iter().map(|&i| self.rays_q[i].clone()).collect();
                let mut with = fq.clone();
                with.push(vq.clone());
                if rank(&with) == rank(&fq) {
                    continue;
                }
                let mut nc = facet.clone();
                nc.push(new);
                cones.push(nc);
            }
        }
        Self::new(self.ambient, &gens, &cones)
    }
}

/// A function on the support of a fan, linear on every maximal cone.
#[derive(Debug, Clone)]
pub struct PlFunction {
    fan: Fan,
    values: Vec<Rat>,
    forms: Vec<Vec<Rat>>,
}

/// Result of the wall-crossing test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexityReport {
    pub convex: bool,
    pub strictly_convex: bool,
    /// First wall violating convexity, or failing strictness.
    pub witness: Option<String>,
}

impl PlFunction {
    /// From values at each ray of `fan` (in the fan's ray order).
    pub fn new(fan: Fan, values: Vec<Rat>) -> Result<Self> {
        assert_eq!(values.len(), fan.rays.len());
        let n = fan.ambient;
        let mut forms = Vec::with_capacity(fan.maximal.len());
        for cone in &fan.maximal {
            let aug: Vec<Vec<Rat>> = cone
                .iter()
                .map(|&i| {
                    let mut r = fan.rays_q[i].clone();
                    r.push(values[i].clone());
                    r
                })
                .collect();
            let (m, pivots) = rref(&aug, n + 1);
            if pivots.contains(&n) {
                return Err(Error::NotLinearOnCone { cone: fan.describe_cone(cone) });
            }
            let mut form = vec![Rat::zero(); n];
            for (row, &p) in m.iter().zip(&pivots) {
                form[p] = row[n].clone();
            }
            forms.push(form);
        }
        Ok(Self { fan, values, forms })
    }

    /// From a function evaluated at every ray.
    pub fn from_fn(fan: Fan, f: impl Fn(&[Int]) -> Rat) -> Result<Self> {
        let values = fan.rays.iter().map(|r| f(r)).collect();
        Self::new(fan, values)
    }

    pub fn zero(fan: Fan) -> Self {
        let values = vec![Rat::zero(); fan.rays.len()];
        Self::new(fan, values).expect("zero is linear")
    }

    /// Support function `n ↦ −min_{m ∈ P} ⟨m, n⟩` on `fan` (the normal fan of
    /// `P` or a refinement).
    pub fn support_function(p: &Polytope, fan: Fan) -> Result<Self> {
        Self::from_fn(fan, |r| -p.min_value(&to_rats(r)).unwrap_or_else(Rat::zero))
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn forms(&self) -> &[Vec<Rat>] {
        &self.forms
    }

    pub fn value_at_ray(&self, r: &[Int]) -> Option<&Rat> {
        self.fan.ray_index(r).map(|i| &self.values[i])
    }

    /// Value at an arbitrary point of the support.
    pub fn eval(&self, x: &[Rat]) -> Option<Rat> {
        self.fan.locate(x).map(|c| dot(&self.forms[c], x))
    }

    pub fn eval_int(&self, x: &[Int]) -> Option<Rat> {
        self.eval(&to_rats(x))
    }

    pub fn add(&self, other: &PlFunction) -> Result<Self> {
        let values = self
            .fan
            .rays
            .iter()
            .zip(&self.values)
            .map(|(r, v)| other.eval_int(r).map(|w| v + w).ok_or_else(|| Error::UnknownRay(format!("{r:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.fan.clone(), values)
    }

    pub fn sub(&self, other: &PlFunction) -> Result<Self> {
        let neg = Self::new(other.fan.clone(), other.values.iter().map(|v| -v).collect())?;
        self.add(&neg)
    }

    pub fn scale(&self, k: &Rat) -> Self {
        Self::new(self.fan.clone(), self.values.iter().map(|v| v * k).collect()).expect("scaling keeps linearity")
    }

    /// Wall-crossing test: for adjacent maximal cones `C1, C2` and a ray `u` of
    /// `C2` off the wall, convexity needs `ℓ_{C1}(u) ≤ f(u)`, strictness `<`.
    pub fn convexity(&self) -> ConvexityReport {
        let mut convex = true;
        let mut strict = true;
        let mut witness = None;
        for w in self.fan.walls() {
            let u = *self.fan.maximal[w.right].iter().find(|i| !w.rays.contains(i)).expect("off-wall ray");
            let lhs = dot(&self.forms[w.left], &self.fan.rays_q[u]);
            let rhs = &self.values[u];
            let name = self.fan.describe_cone(&w.rays);
            if &lhs > rhs {
                if convex {
                    witness = Some(name.clone());
                }
                convex = false;
                strict = false;
            } else if &lhs == rhs && strict {
                strict = false;
                if convex {
                    witness = Some(name);
                }
            }
        }
        ConvexityReport { convex, strictly_convex: convex && strict, witness }
    }

    pub fn is_convex(&self) -> bool {
        self.convexity().convex
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.convexity().strictly_convex
    }

    /// `{m : ⟨m, n⟩ ≥ −f(n) for every ray n}`.
    pub fn newton_polytope(&self) -> Result<Polytope> {
        let report = self.convexity();
        if !report.convex {
            return Err(Error::NotConvex { wall: report.witness.unwrap_or_default() });
        }
        let cons: Vec<(Vec<Rat>, Rat)> =
            self.fan.rays_q.iter().zip(&self.values).map(|(r, v)| (r.clone(), v.clone())).collect();
        Ok(Polytope::from_constraints(self.fan.ambient, &cons))
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .fan
            .rays
            .iter()
            .zip(&self.values)
            .map(|(r, v)| format!("{:?}->{}", r.iter().map(|x| x.to_string()).collect::<Vec<_>>(), fmt_rat(v)))
            .collect();
        parts.join(", ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::geometry::int_points;

    fn iv(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn p2_fan() -> Fan {
        Fan::new(2, &[iv(&[1, 0]), iv(&[0, 1]), iv(&[-1, -1])], &[vec![0, 1], vec![1, 2], vec![2, 0]]).unwrap()
    }

    fn quadrants() -> Fan {
        Fan::new(
            2,
            &[iv(&[1, 0]), iv(&[0, 1]), iv(&[-1, 0]), iv(&[0, -1])],
            &[vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
        )
        .unwrap()
    }

    #[test]
    fn normal_fans() {
        let sq = Polytope::convex_hull(&int_points(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])).unwrap();
        let f = Fan::normal_fan(&sq).unwrap();
        assert_eq!(f.maximal_cones().len(), 4);
        assert!(f.is_complete());
        let t = Polytope::convex_hull(&int_points(&[&[2, -1], &[-1, 2], &[-1, -1]])).unwrap();
        let f = Fan::normal_fan(&t).unwrap();
        assert_eq!(f.rays(), &[iv(&[-1, -1]), iv(&[0, 1]), iv(&[1, 0])]);
        let seg = Polytope::convex_hull(&int_points(&[&[0, 0], &[1, 0]])).unwrap();
        assert!(Fan::normal_fan(&seg).is_err());
    }

    #[test]
    fn refinement_cases() {
        let q = quadrants();
        assert!(q.is_refinement(&q).holds());
        assert!(!p2_fan().is_refinement(&q).holds());
        assert!(matches!(p2_fan().is_refinement(&q), Refinement::NotRefinement(_)));
        let s = q.stellar(&iv(&[1, 1])).unwrap();
        assert_eq!(s.maximal_cones().len(), 5);
        assert!(s.is_refinement(&q).holds());
        assert!(!q.is_refinement(&s).holds());
        // a single quadrant does not cover the plane
        let one = Fan::new(2, &[iv(&[1, 0]), iv(&[0, 1])], &[vec![0, 1]]).unwrap();
        assert!(matches!(one.is_refinement(&q), Refinement::SupportMismatch(_)));
    }

    #[test]
    fn unimodularity() {
        assert!(p2_fan().is_unimodular().is_ok());
        let bad = Fan::new(2, &[iv(&[1, 0]), iv(&[1, 2])], &[vec![0, 1]]).unwrap();
        assert_eq!(bad.is_unimodular(), Err(vec![0, 1]));
        assert!(quadrants().is_unimodular().is_ok());
    }

    #[test]
    fn support_and_newton() {
        let t = Polytope::convex_hull(&int_points(&[&[2, -1], &[-1, 2], &[-1, -1]])).unwrap();
        let phi = PlFunction::support_function(&t, p2_fan()).unwrap();
        assert!(phi.values().iter().all(|v| *v == rat(1)));
        let r = phi.convexity();
        assert!(r.convex && r.strictly_convex);
        assert_eq!(phi.newton_polytope().unwrap(), t);
        let zero = PlFunction::zero(p2_fan());
        assert_eq!(zero.newton_polytope().unwrap().vertices(), &int_points(&[&[0, 0]])[..]);
        assert!(zero.is_convex() && !zero.is_strictly_convex());
        let sq = Polytope::convex_hull(&int_points(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])).unwrap();
        let f = PlFunction::support_function(&sq, quadrants()).unwrap();
        assert_eq!(f.value_at_ray(&iv(&[1, 0])), Some(&rat(1)));
    }

    #[test]
    fn linear_function_is_not_strict() {
        let lin = PlFunction::from_fn(quadrants(), |r| rat_from_int(&(&r[0] * int(2) - &r[1]))).unwrap();
        let rep = lin.convexity();
        assert!(rep.convex && !rep.strictly_convex);
    }

    #[test]
    fn nonconvex_rejected() {
        let f = PlFunction::new(p2_fan(), vec![rat(-3), rat(1), rat(1)]).unwrap();
        assert!(!f.is_convex());
        assert!(matches!(f.newton_polytope(), Err(Error::NotConvex { .. })));
    }

    #[test]
    fn fan_axiom_detects_overlap() {
        let overlapping = Fan::new(2, &[iv(&[1, 0]), iv(&[0, 1]), iv(&[1, 1])], &[vec![0, 1], vec![0, 2]]).unwrap();
        assert!(overlapping.check_intersections().is_err());
        assert!(quadrants().check_intersections().is_ok());
    }
}
