//! Scenario files and the pipeline that turns one into every derived object.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::{fmt_rat, parse_rat, to_rats, Int, Rat};
use crate::cayley::{CayleyData, DualIntersectionComplex, GoodSubdivision};
use crate::ehrhart::{default_window, verify_volume_identity, VolumeReport};
use crate::error::{Error, Result};
use crate::fan::{Fan, PlFunction};
use crate::geometry::{Polytope, RationalPoint};
use crate::nef::NefPartitionData;
use crate::spheres::TropicalSphere;
use crate::transport::{discretize_target, TransportProblem};

/// An integer or rational given either as a JSON number or a decimal string.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    pub fn to_rat(&self) -> Result<Rat> {
        match self {
            Num::Int(v) => Ok(Rat::from_integer(Int::from(*v))),
            Num::Text(s) => parse_rat(s).ok_or_else(|| Error::Scenario(format!("not a rational number: {s:?}"))),
            Num::Float(f) => Err(Error::Scenario(format!("expected an integer or \"p/q\" string, got {f}"))),
        }
    }

    pub fn to_int(&self) -> Result<Int> {
        let r = self.to_rat()?;
        if !r.is_integer() {
            return Err(Error::Scenario(format!("expected an integer, got {}", fmt_rat(&r))));
        }
        Ok(r.to_integer())
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Num::Int(v) => Ok(*v as f64),
            Num::Float(f) => Ok(*f),
            Num::Text(s) => s.trim().parse::<f64>().map_err(|_| Error::Scenario(format!("not a number: {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RayPart {
    pub ray: Vec<Num>,
    /// One-based part index.
    pub part: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum NefSpec {
    Parts(Vec<Vec<Vec<Num>>>),
    RayAssignment(Vec<RayPart>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RayValue {
    pub ray: Vec<Num>,
    pub value: Num,
}

/// Rays plus maximal cones as lists of ray indices.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FanSpec {
    pub rays: Vec<Vec<Num>>,
    pub cones: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_s")]
    pub s: u32,
    #[serde(default)]
    pub tol: Option<Num>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Inclusive `[k_min, k_max]`.
    #[serde(default)]
    pub k_window: Option<[i64; 2]>,
}

fn default_s() -> u32 {
    1
}

fn default_max_iter() -> usize {
    200
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { s: 1, tol: None, max_iter: 200, k_window: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub rank: usize,
    pub d: usize,
    pub r: usize,
    pub delta_vertices: Vec<Vec<Num>>,
    pub nef_partition: NefSpec,
    #[serde(default)]
    pub h_values: Option<Vec<RayValue>>,
    #[serde(default)]
    pub hcheck_values: Option<Vec<RayValue>>,
    #[serde(default)]
    pub sigma_prime: Option<FanSpec>,
    #[serde(default)]
    pub sigma_check_prime: Option<FanSpec>,
    #[serde(default)]
    pub sigma_tilde_prime: Option<FanSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Scenario(format!("line {} column {}, field `{path}`: {inner}", inner.line(), inner.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "scenario".into())
    }

    pub fn tol(&self) -> Result<f64> {
        self.solver.tol.as_ref().map_or(Ok(1e-9), Num::to_f64)
    }

    pub fn window(&self) -> Vec<i64> {
        match self.solver.k_window {
            Some([lo, hi]) => (lo..=hi).collect(),
            None => default_window(self.d),
        }
    }
}

fn int_vec(v: &[Num], rank: usize, what: &str) -> Result<Vec<Int>> {
    if v.len() != rank {
        return Err(Error::Scenario(format!("{what} has length {}, expected rank {rank}", v.len())));
    }
    v.iter().map(Num::to_int).collect()
}

fn points(v: &[Vec<Num>], rank: usize, what: &str) -> Result<Vec<RationalPoint>> {
    v.iter().map(|p| int_vec(p, rank, what).map(|x| to_rats(&x))).collect()
}

fn build_fan(spec: &FanSpec, ambient: usize, what: &str) -> Result<Fan> {
    let rays: Vec<Vec<Int>> = spec.rays.iter().map(|r| int_vec(r, ambient, what)).collect::<Result<_>>()?;
    if let Some(bad) = spec.cones.iter().flatten().find(|&&i| i >= rays.len()) {
        return Err(Error::Scenario(format!("{what} cone refers to ray index {bad} of {}", rays.len())));
    }
    Fan::new(ambient, &rays, &spec.cones)
}

/// Values from the file where given, `default` elsewhere.
fn build_function(
    fan: &Fan,
    given: Option<&Vec<RayValue>>,
    default: impl Fn(&[Int]) -> Rat,
    what: &str,
) -> Result<PlFunction> {
    let mut values: Vec<Rat> = fan.rays().iter().map(|r| default(r)).collect();
    for rv in given.into_iter().flatten() {
        let ray = int_vec(&rv.ray, fan.ambient(), what)?;
        let idx = fan.ray_index(&ray).ok_or_else(|| Error::UnknownRay(format!("{what} {ray:?}")))?;
        values[idx] = rv.value.to_rat()?;
    }
    PlFunction::new(fan.clone(), values)
}

/// A scenario with everything that can be derived without optional checks.
#[derive(Debug, Clone)]
pub struct Context {
    pub scenario: Scenario,
    pub npd: NefPartitionData,
    pub sigma_prime: Fan,
    pub h: PlFunction,
    pub sigma_check_prime: Fan,
    pub hcheck: PlFunction,
    /// `ȟ′ = ȟ − φ̌`.
    pub hcheck_prime: PlFunction,
}

impl Context {
    pub fn new(scenario: Scenario) -> Result<Self> {
        let s = &scenario;
        if s.d + s.r != s.rank {
            return Err(Error::Scenario(format!("rank {} is not d + r = {} + {}", s.rank, s.d, s.r)));
        }
        if s.r == 0 {
            return Err(Error::Scenario("a nef partition needs at least one part".into()));
        }
        let verts = points(&s.delta_vertices, s.rank, "delta vertex")?;
        let delta = Polytope::convex_hull(&verts)?;
        let npd = match &s.nef_partition {
            NefSpec::Parts(parts) => {
                if parts.len() != s.r {
                    return Err(Error::Scenario(format!("{} parts given for r = {}", parts.len(), s.r)));
                }
                let polys = parts
                    .iter()
                    .map(|p| Polytope::convex_hull(&points(p, s.rank, "part vertex")?))
                    .collect::<Result<Vec<_>>>()?;
                NefPartitionData::from_parts(&delta, &polys)?
            }
            NefSpec::RayAssignment(list) => {
                let assignment = list
                    .iter()
                    .map(|rp| {
                        if rp.part == 0 || rp.part > s.r {
                            return Err(Error::Scenario(format!("part index {} outside 1..={}", rp.part, s.r)));
                        }
                        Ok((int_vec(&rp.ray, s.rank, "assigned ray")?, rp.part - 1))
                    })
                    .collect::<Result<Vec<_>>>()?;
                NefPartitionData::from_ray_assignment(&delta, &assignment, s.r)?
            }
        };
        let sigma_prime = match &s.sigma_prime {
            Some(f) => build_fan(f, s.rank, "sigma_prime")?,
            None => npd.sigma.clone(),
        };
        let phi = npd.phi.clone();
        let h = build_function(
            &sigma_prime,
            s.h_values.as_ref(),
            |r| phi.eval_int(r).expect("complete fan"),
            "h_values ray",
        )?;
        let sigma_check_prime = match &s.sigma_check_prime {
            Some(f) => build_fan(f, s.rank, "sigma_check_prime")?,
            None => npd.sigma_check.clone(),
        };
        let hcheck = build_function(
            &sigma_check_prime,
            s.hcheck_values.as_ref(),
            |r| npd.phi_check_at(&to_rats(r)),
            "hcheck_values ray",
        )?;
        let phi_on_prime = PlFunction::from_fn(sigma_check_prime.clone(), |r| npd.phi_check_at(&to_rats(r)))?;
        let hcheck_prime = hcheck.sub(&phi_on_prime)?;
        Ok(Self { scenario, npd, sigma_prime, h, sigma_check_prime, hcheck, hcheck_prime })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(Scenario::load(path)?)
    }

    pub fn d(&self) -> usize {
        self.scenario.d
    }

    pub fn cayley(&self) -> Result<CayleyData> {
        CayleyData::build(&self.npd, &self.hcheck_prime)
    }

    pub fn tilde_prime(&self, cd: &CayleyData) -> Result<Fan> {
        match &self.scenario.sigma_tilde_prime {
            Some(f) => build_fan(f, self.scenario.rank + 1, "sigma_tilde_prime"),
            None => Ok(cd.tilde_fan.clone()),
        }
    }

    pub fn good_subdivision(&self, cd: &CayleyData) -> Result<GoodSubdivision> {
        GoodSubdivision::validate(cd, &self.tilde_prime(cd)?, &self.sigma_prime)
    }

    pub fn dual_complex(&self, gs: &GoodSubdivision) -> Result<DualIntersectionComplex> {
        DualIntersectionComplex::build(&gs.relevant_cones(&self.npd)?, self.d())
    }

    pub fn sphere_a(&self) -> Result<TropicalSphere> {
        TropicalSphere::build_a(&self.npd, &self.h, self.d())
    }

    pub fn sphere_b(&self) -> Result<TropicalSphere> {
        TropicalSphere::build_b(&self.npd, &self.hcheck, self.d())
    }

    /// Rays of `Σ′` are exactly `∂Δ* ∩ N`, as the twisted counts require.
    pub fn rays_are_boundary_points(&self) -> bool {
        let mut want: Vec<Vec<Int>> = (0..self.npd.r()).flat_map(|i| self.npd.nabla_part_points(i)).collect();
        want.sort();
        want == self.sigma_prime.rays()
    }

    pub fn volume_report(&self, a: &TropicalSphere, ks: &[i64]) -> VolumeReport {
        verify_volume_identity(&self.npd, &self.h, a, ks)
    }

    pub fn transport(&self, a: &TropicalSphere, b: &TropicalSphere, s: u32) -> Result<TransportProblem> {
        let atoms = discretize_target(a, s)?;
        Ok(TransportProblem::new(b, atoms)?.with_mu_total(a.total.clone()))
    }
}
