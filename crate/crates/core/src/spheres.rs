//! Tropical spheres `A_h ⊂ ∂Δ_h` and `B_ȟ ⊂ ∂∇_ȟ` as measured complexes of
//! faces of a Newton polytope.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::arith::{dot, to_rats, Rat};
use crate::cayley::DualIntersectionComplex;
use crate::error::{Error, Result};
use crate::fan::PlFunction;
use crate::geometry::volume::{normalized_volume, volume_in_span};
use crate::geometry::{Face, Polytope, RationalPoint};
use crate::nef::NefPartitionData;

#[derive(Debug, Clone)]
pub struct TropicalSphere {
    /// The polytope whose faces make up the complex.
    pub polytope: Polytope,
    /// Passing faces, in the face order of `polytope`.
    pub cells: Vec<Face>,
    /// Indices into `cells` of the `d`-dimensional cells.
    pub facets: Vec<usize>,
    pub facet_measure: Vec<Rat>,
    pub total: Rat,
    pub d: usize,
}

/// Candidate supporting points per part, each with the value of the function
/// the equality is taken against.
type Supports = Vec<Vec<(RationalPoint, Rat)>>;

fn passes(face: &Face, poly: &Polytope, supports: &Supports) -> bool {
    supports.iter().all(|part| {
        part.iter().any(|(m, val)| face.vertices.iter().all(|&v| (val + dot(m, &poly.vertices()[v])).is_zero()))
    })
}

impl TropicalSphere {
    fn build(polytope: Polytope, supports: Supports, d: usize) -> Result<Self> {
        let pass: Vec<bool> = polytope.faces().par_iter().map(|f| passes(f, &polytope, &supports)).collect();
        let cells: Vec<Face> =
            polytope.faces().iter().zip(&pass).filter(|(_, &p)| p).map(|(f, _)| f.clone()).collect();
        let facets: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].dim == d as isize).collect();
        let facet_measure = facets
            .iter()
            .map(|&i| normalized_volume(&polytope.face_polytope(&cells[i])))
            .collect::<Result<Vec<_>>>()?;
        let total = facet_measure.iter().sum();
        Ok(Self { polytope, cells, facets, facet_measure, total, d })
    }

    /// `B_ȟ`: faces `F` of `∇_ȟ` such that each part has some
    /// `m ∈ (Δ_i ∩ M) ∖ {0}` with `ȟ(m) + ⟨m, n⟩ = 0` on `F`.
    pub fn build_b(npd: &NefPartitionData, hcheck: &PlFunction, d: usize) -> Result<Self> {
        let poly = hcheck.newton_polytope()?;
        let supports = (0..npd.r())
            .map(|i| {
                npd.delta_part_points(i)
                    .into_iter()
                    .map(|m| {
                        let v = hcheck.eval_int(&m).expect("complete fan");
                        (to_rats(&m), v)
                    })
                    .collect()
            })
            .collect();
        Self::build(poly, supports, d)
    }

    /// `A_h`: faces `G` of `Δ_h` such that each part has some
    /// `n ∈ (∇_i ∩ N) ∖ {0}` with `h(n) + ⟨m, n⟩ = 0` on `G`.
    pub fn build_a(npd: &NefPartitionData, h: &PlFunction, d: usize) -> Result<Self> {
        let poly = h.newton_polytope()?;
        let supports = (0..npd.r())
            .map(|i| {
                npd.nabla_part_points(i)
                    .into_iter()
                    .map(|n| {
                        let v = h.eval_int(&n).expect("complete fan");
                        (to_rats(&n), v)
                    })
                    .collect()
            })
            .collect();
        Self::build(poly, supports, d)
    }

    pub fn cell_polytope(&self, i: usize) -> Polytope {
        self.polytope.face_polytope(&self.cells[i])
    }

    pub fn facet_polytopes(&self) -> Vec<Polytope> {
        self.facets.iter().map(|&i| self.cell_polytope(i)).collect()
    }

    /// Facet measures divided by the total; they sum to exactly one.
    pub fn normalized_measure(&self) -> Result<Vec<Rat>> {
        if !self.total.is_positive() {
            return Err(Error::EmptySphere);
        }
        Ok(self.facet_measure.iter().map(|m| m / &self.total).collect())
    }

    /// Cells not contained in any larger passing cell.
    pub fn maximal_cells(&self) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| {
                let a: BTreeSet<usize> = self.cells[i].vertices.iter().copied().collect();
                !self.cells.iter().enumerate().any(|(j, c)| {
                    j != i && c.vertices.len() > a.len() && a.iter().all(|v| c.vertices.contains(v))
                })
            })
            .collect()
    }

    /// Every maximal cell has dimension `d`.
    pub fn is_pure(&self) -> bool {
        self.maximal_cells().iter().all(|&i| self.cells[i].dim == self.d as isize)
    }

    /// Alternating count of cells by dimension.
    pub fn euler_characteristic(&self) -> i64 {
        self.cells.iter().filter(|c| c.dim >= 0).map(|c| if c.dim % 2 == 0 { 1 } else { -1 }).sum()
    }

    /// For `d = 1`: the number of cycles when every vertex meets exactly two
    /// facets, `None` otherwise.
    pub fn cycle_count(&self) -> Option<usize> {
        if self.d != 1 {
            return None;
        }
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &f in &self.facets {
            let vs = &self.cells[f].vertices;
            adj.entry(vs[0]).or_default().push(vs[1]);
            adj.entry(vs[1]).or_default().push(vs[0]);
        }
        if adj.is_empty() || adj.values().any(|n| n.len() != 2) {
            return None;
        }
        let mut seen = BTreeSet::new();
        let mut cycles = 0;
        for &start in adj.keys() {
            if !seen.insert(start) {
                continue;
            }
            cycles += 1;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &adj[&v] {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        Some(cycles)
    }
}

/// Cells of one complex not covered by the other.
#[derive(Debug, Clone, Default)]
pub struct SupportComparison {
    /// Facets of the sphere outside the dual intersection complex.
    pub sphere_uncovered: Vec<Polytope>,
    /// Cells of the dual intersection complex outside the sphere.
    pub complex_uncovered: Vec<Polytope>,
}

impl SupportComparison {
    pub fn equal(&self) -> bool {
        self.sphere_uncovered.is_empty() && self.complex_uncovered.is_empty()
    }
}

/// Whether `x` lies in the union of `cover`: a lower-dimensional cell must sit
/// inside one covering cell, a top cell must have its volume filled by the
/// top-dimensional intersections.
fn covered(x: &Polytope, cover: &[Polytope], d: usize) -> bool {
    if x.dim() < d as isize {
        return cover.iter().any(|c| x.subset_of(c));
    }
    if !x.vertices().iter().all(|v| cover.iter().any(|c| c.contains(v))) {
        return false;
    }
    let whole = volume_in_span(x, x);
    let filled: Rat = cover.iter().map(|c| volume_in_span(x, &x.intersect(c))).sum();
    filled == whole
}

pub fn compare_with_dual_complex(b: &TropicalSphere, dic: &DualIntersectionComplex) -> SupportComparison {
    let mine: Vec<Polytope> = b.maximal_cells().iter().map(|&i| b.cell_polytope(i)).collect();
    let theirs = &dic.cells;
    SupportComparison {
        sphere_uncovered: mine.iter().filter(|x| !covered(x, theirs, b.d)).cloned().collect(),
        complex_uncovered: theirs.iter().filter(|x| !covered(x, &mine, b.d)).cloned().collect(),
    }
}
