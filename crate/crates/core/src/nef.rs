//! Nef partitions, their duals, and the face operators `β*_i` and `⅁`.

use num_traits::{One, Zero};

use crate::arith::{rat_from_int, to_rats, Int, Rat};
use crate::error::{Error, Result};
use crate::fan::{Fan, PlFunction};
use crate::geometry::minkowski::minkowski_sum_all;
use crate::geometry::{lattice::lattice_points, Polytope, RationalPoint};

#[derive(Debug, Clone)]
pub struct NefPartitionData {
    pub delta: Polytope,
    pub delta_star: Polytope,
    /// Normal fan of `Δ`; its rays are the vertices of `Δ*`.
    pub sigma: Fan,
    pub phi: PlFunction,
    pub parts: Vec<Polytope>,
    pub phi_parts: Vec<PlFunction>,
    pub nabla_parts: Vec<Polytope>,
    pub nabla: Polytope,
    pub nabla_star: Polytope,
    pub sigma_check: Fan,
    pub phi_check: PlFunction,
    pub phi_check_parts: Vec<PlFunction>,
    /// For each ray of `sigma`, the part (0-based) on which `φ_i = 1`.
    pub ray_part: Vec<usize>,
}

fn delta_fan(delta: &Polytope) -> Result<(Polytope, Fan, PlFunction)> {
    if !delta.is_reflexive() {
        let why = if !delta.is_full_dim() {
            "not full-dimensional".to_string()
        } else if !delta.is_lattice() {
            "non-lattice vertex".to_string()
        } else if !delta.origin_interior() {
            "origin not interior".to_string()
        } else {
            let f = delta.facets().iter().find(|f| !f.offset.is_one()).expect("offending facet");
            format!("facet offset {}", crate::arith::fmt_rat(&f.offset))
        };
        return Err(Error::NotReflexive(why));
    }
    let star = delta.polar_dual()?;
    let sigma = Fan::normal_fan(delta)?;
    let phi = PlFunction::support_function(delta, sigma.clone())?;
    Ok((star, sigma, phi))
}

impl NefPartitionData {
    /// Validate `Δ = Δ_1 + ⋯ + Δ_r` as a nef partition.
    pub fn from_parts(delta: &Polytope, parts: &[Polytope]) -> Result<Self> {
        let (star, sigma, phi) = delta_fan(delta)?;
        let n = delta.ambient();
        if let Some(p) = parts.iter().find(|p| p.ambient() != n) {
            return Err(Error::RankMismatch { expected: n, got: p.ambient() });
        }
        let sum = minkowski_sum_all(parts, n)?;
        if &sum != delta {
            return Err(Error::MinkowskiMismatch(format!("sum is {}", sum.describe())));
        }
        let phi_parts = parts
            .iter()
            .map(|p| PlFunction::support_function(p, sigma.clone()))
            .collect::<Result<Vec<_>>>()?;
        let mut ray_part = vec![usize::MAX; sigma.rays().len()];
        for (i, f) in phi_parts.iter().enumerate() {
            for (j, v) in f.values().iter().enumerate() {
                if v.is_one() {
                    ray_part[j] = i;
                } else if !v.is_zero() {
                    return Err(Error::NefValue {
                        part: i + 1,
                        ray: format!("{:?}", sigma.rays()[j]),
                        value: crate::arith::fmt_rat(v),
                    });
                }
            }
        }
        Self::finish(delta.clone(), star, sigma, phi, parts.to_vec(), phi_parts, ray_part)
    }

    /// Build the parts from an assignment ray ↦ part (0-based) and cross-check
    /// their sum.
    pub fn from_ray_assignment(delta: &Polytope, assignment: &[(Vec<Int>, usize)], r: usize) -> Result<Self> {
        let (star, sigma, phi) = delta_fan(delta)?;
        let mut ray_part = vec![usize::MAX; sigma.rays().len()];
        for (ray, part) in assignment {
            let j = sigma.ray_index(ray).ok_or_else(|| Error::UnknownRay(format!("{ray:?}")))?;
            if *part >= r {
                return Err(Error::Scenario(format!("part {} out of range", part + 1)));
            }
            ray_part[j] = *part;
        }
        if let Some(j) = ray_part.iter().position(|&p| p == usize::MAX) {
            return Err(Error::Scenario(format!("ray {:?} has no part", sigma.rays()[j])));
        }
        let phi_parts = (0..r)
            .map(|i| {
                let vals = ray_part.iter().map(|&p| if p == i { Rat::one() } else { Rat::zero() }).collect();
                PlFunction::new(sigma.clone(), vals)
            })
            .collect::<Result<Vec<_>>>()?;
        let parts = phi_parts.iter().map(|f| f.newton_polytope()).collect::<Result<Vec<_>>>()?;
        let sum = minkowski_sum_all(&parts, delta.ambient())?;
        if &sum != delta {
            return Err(Error::MinkowskiMismatch(format!("sum is {}", sum.describe())));
        }
        Self::finish(delta.clone(), star, sigma, phi, parts, phi_parts, ray_part)
    }

    fn finish(
        delta: Polytope,
        delta_star: Polytope,
        sigma: Fan,
        phi: PlFunction,
        parts: Vec<Polytope>,
        phi_parts: Vec<PlFunction>,
        ray_part: Vec<usize>,
    ) -> Result<Self> {
        let n = delta.ambient();
        let r = parts.len();
        let nabla_parts = (0..r)
            .map(|i| {
                let mut pts: Vec<RationalPoint> = vec![vec![Rat::zero(); n]];
                pts.extend(
                    sigma.rays().iter().zip(&ray_part).filter(|(_, &p)| p == i).map(|(ray, _)| to_rats(ray)),
                );
                Polytope::convex_hull(&pts)
            })
            .collect::<Result<Vec<_>>>()?;
        let nabla = minkowski_sum_all(&nabla_parts, n)?;
        if !nabla.is_reflexive() {
            return Err(Error::NablaNotReflexive(nabla.describe()));
        }
        let nabla_star = nabla.polar_dual()?;
        let sigma_check = Fan::normal_fan(&nabla)?;
        let phi_check = PlFunction::support_function(&nabla, sigma_check.clone())?;
        let phi_check_parts = nabla_parts
            .iter()
            .map(|p| PlFunction::support_function(p, sigma_check.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            delta,
            delta_star,
            sigma,
            phi,
            parts,
            phi_parts,
            nabla_parts,
            nabla,
            nabla_star,
            sigma_check,
            phi_check,
            phi_check_parts,
            ray_part,
        })
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn rank(&self) -> usize {
        self.delta.ambient()
    }

    /// `φ_i` at any point of `N_ℝ`.
    pub fn phi_part(&self, i: usize, n: &[Rat]) -> Rat {
        self.phi_parts[i].eval(n).expect("complete fan")
    }

    /// Whether `mu` lies in the boundary of `Δ*`, i.e. in one of its facets.
    pub fn on_boundary(&self, mu: &Polytope) -> bool {
        !mu.is_empty()
            && self
                .delta_star
                .facets()
                .iter()
                .any(|f| mu.vertices().iter().all(|v| f.value(v).is_zero()))
    }

    /// `β*_i(μ) = {n ∈ μ : φ_i(n) = 1}`, a face of `μ` (possibly empty).
    pub fn beta_star(&self, i: usize, mu: &Polytope) -> Result<Polytope> {
        if !self.on_boundary(mu) {
            return Err(Error::NotOnBoundary(mu.describe()));
        }
        let vs: Vec<RationalPoint> =
            mu.vertices().iter().filter(|v| self.phi_part(i, v).is_one()).cloned().collect();
        if vs.is_empty() {
            return Ok(Polytope::empty(mu.ambient()));
        }
        Polytope::convex_hull(&vs)
    }

    /// `⅁(μ) = Σ_i β*_i(μ)`, empty when some summand is.
    pub fn beta_inverted(&self, mu: &Polytope) -> Result<Polytope> {
        let parts = (0..self.r()).map(|i| self.beta_star(i, mu)).collect::<Result<Vec<_>>>()?;
        if parts.iter().any(Polytope::is_empty) {
            return Ok(Polytope::empty(mu.ambient()));
        }
        minkowski_sum_all(&parts, mu.ambient())
    }

    /// Checks that `∂Δ* ∩ N` is the disjoint union of the `(∇_i ∩ N) ∖ {0}`;
    /// returns an offending point on failure.
    pub fn check_boundary_partition(&self) -> std::result::Result<(), Vec<Int>> {
        let zero = vec![Int::zero(); self.rank()];
        let boundary: Vec<Vec<Int>> = lattice_points(&self.delta_star)
            .into_iter()
            .filter(|p| *p != zero && !self.delta_star.contains_relint(&to_rats(p)))
            .collect();
        let pieces: Vec<Vec<Vec<Int>>> = self
            .nabla_parts
            .iter()
            .map(|p| lattice_points(p).into_iter().filter(|x| *x != zero).collect())
            .collect();
        for b in &boundary {
            if pieces.iter().filter(|ps| ps.contains(b)).count() != 1 {
                return Err(b.clone());
            }
        }
        let total: usize = pieces.iter().map(Vec::len).sum();
        if total != boundary.len() {
            let stray = pieces.iter().flatten().find(|x| !boundary.contains(x)).cloned().unwrap_or_default();
            return Err(stray);
        }
        Ok(())
    }

    /// Lattice points of `∇_i` other than the origin.
    pub fn nabla_part_points(&self, i: usize) -> Vec<Vec<Int>> {
        let zero = vec![Int::zero(); self.rank()];
        lattice_points(&self.nabla_parts[i]).into_iter().filter(|x| *x != zero).collect()
    }

    /// Lattice points of `Δ_i` other than the origin.
    pub fn delta_part_points(&self, i: usize) -> Vec<Vec<Int>> {
        let zero = vec![Int::zero(); self.rank()];
        lattice_points(&self.parts[i]).into_iter().filter(|x| *x != zero).collect()
    }

    /// `φ̌` at a point of `M_ℝ`.
    pub fn phi_check_at(&self, m: &[Rat]) -> Rat {
        -self.nabla.min_value(m).expect("nonempty")
    }

    /// Ray of `Σ` as a rational vector.
    pub fn ray(&self, j: usize) -> Vec<Rat> {
        self.sigma.rays()[j].iter().map(rat_from_int).collect()
    }
}
