//! Exact polytopes: V- and H-representations with a face lattice keyed by
//! vertex-index sets.

mod hull;
pub mod lattice;
pub mod minkowski;
pub mod volume;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::arith::{dot, primitive, rat_from_int, to_rats, Int, Rat};
use crate::error::{Error, Result};
use crate::linalg::{affine_rank, nullspace, rref, solve_unique};

pub use minkowski::{face_minkowski_test, minkowski_sum, MinkowskiSum};

pub type RationalPoint = Vec<Rat>;
pub type LatticePoint = Vec<Int>;

/// `{x : ⟨normal, x⟩ ≥ −offset}` with a primitive integer normal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfSpace {
    pub normal: Vec<Int>,
    pub offset: Rat,
}

impl HalfSpace {
    /// Scale `⟨a, x⟩ ≥ −b` so the normal becomes primitive.
    pub fn from_rational(a: &[Rat], b: &Rat) -> Self {
        let normal = primitive(a);
        // find the factor: a = λ·normal with λ > 0
        let j = normal.iter().position(|x| !x.is_zero()).expect("nonzero normal");
        let lambda = &a[j] / rat_from_int(&normal[j]);
        Self { normal, offset: b / lambda }
    }

    pub fn value(&self, x: &[Rat]) -> Rat {
        dot(&to_rats(&self.normal), x) + &self.offset
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        !self.value(x).is_negative()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Face {
    pub dim: isize,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Polytope {
    ambient: usize,
    dim: isize,
    vertices: Vec<RationalPoint>,
    equations: Vec<HalfSpace>,
    facets: Vec<HalfSpace>,
    facet_vertices: Vec<Vec<usize>>,
    faces: Vec<Face>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

impl Polytope {
    pub fn empty(ambient: usize) -> Self {
        Self {
            ambient,
            dim: -1,
            vertices: Vec::new(),
            equations: Vec::new(),
            facets: Vec::new(),
            facet_vertices: Vec::new(),
            faces: Vec::new(),
        }
    }

    /// Convex hull with both representations and the face lattice.
    pub fn convex_hull(points: &[RationalPoint]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::EmptyPointSet);
        };
        let n = first.len();
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(Error::RankMismatch { expected: n, got: p.len() });
        }
        let uniq: Vec<RationalPoint> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let p0 = uniq[0].clone();
        let dirs: Vec<Vec<Rat>> = uniq[1..]
            .iter()
            .map(|p| p.iter().zip(&p0).map(|(a, b)| a - b).collect())
            .collect();
        let (_, pivots) = rref(&dirs, n);
        let k = pivots.len();
        let equations: Vec<HalfSpace> = if k == 0 && dirs.is_empty() {
            (0..n)
                .map(|j| {
                    let mut a = vec![Rat::zero(); n];
                    a[j] = Rat::one();
                    HalfSpace::from_rational(&a, &-p0[j].clone())
                })
                .collect()
        } else {
            nullspace(&dirs, n).iter().map(|a| HalfSpace::from_rational(a, &-dot(a, &p0))).collect()
        };
        if k == 0 {
            let mut p = Self::empty(n);
            p.dim = 0;
            p.vertices = vec![p0];
            p.equations = equations;
            p.finish_faces();
            return Ok(p);
        }
        let local: Vec<Vec<Rat>> = uniq.iter().map(|p| pivots.iter().map(|&c| p[c].clone()).collect()).collect();
        let h = hull::full_dim_hull(&local);
        let vertices: Vec<RationalPoint> = h.vertices.iter().map(|&i| uniq[i].clone()).collect();
        let position: BTreeMap<usize, usize> = h.vertices.iter().enumerate().map(|(j, &i)| (i, j)).collect();
        let mut facet_pairs: Vec<(HalfSpace, Vec<usize>)> = h
            .facets
            .iter()
            .map(|f| {
                let mut a = vec![Rat::zero(); n];
                for (j, &c) in pivots.iter().enumerate() {
                    a[c] = f.normal[j].clone();
                }
                let hs = HalfSpace::from_rational(&a, &f.offset);
                let mut vs: Vec<usize> = f.verts.iter().map(|i| position[i]).collect();
                vs.sort_unstable();
                (hs, vs)
            })
            .collect();
        facet_pairs.sort();
        let mut p = Self {
            ambient: n,
            dim: k as isize,
            vertices,
            equations,
            facets: facet_pairs.iter().map(|(h, _)| h.clone()).collect(),
            facet_vertices: facet_pairs.into_iter().map(|(_, v)| v).collect(),
            faces: Vec::new(),
        };
        p.finish_faces();
        debug_assert!(p.self_check());
        Ok(p)
    }

    /// `{x : ⟨a, x⟩ ≥ −b}` for each `(a, b)`; must be bounded. Vertices are
    /// found by brute force over `n`-subsets of constraints.
    pub fn from_constraints(ambient: usize, cons: &[(Vec<Rat>, Rat)]) -> Self {
        let satisfies = |x: &[Rat]| cons.iter().all(|(a, b)| !(dot(a, x) + b).is_negative());
        let mut pts: BTreeSet<RationalPoint> = BTreeSet::new();
        if ambient == 0 {
            return Self::convex_hull(&[Vec::new()]).expect("point");
        }
        for subset in itertools::Itertools::combinations(0..cons.len(), ambient) {
            let a: Vec<Vec<Rat>> = subset.iter().map(|&i| cons[i].0.clone()).collect();
            let b: Vec<Rat> = subset.iter().map(|&i| -cons[i].1.clone()).collect();
            if let Some(x) = solve_unique(&a, &b) {
                if satisfies(&x) {
                    pts.insert(x);
                }
            }
        }
        if pts.is_empty() {
            return Self::empty(ambient);
        }
        Self::convex_hull(&pts.into_iter().collect::<Vec<_>>()).expect("nonempty")
    }

    fn finish_faces(&mut self) {
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        if !self.vertices.is_empty() {
            all.insert((0..self.vertices.len()).collect());
        }
        let mut frontier: Vec<Vec<usize>> = self.facet_vertices.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for f in frontier {
                if f.is_empty() || !all.insert(f.clone()) {
                    continue;
                }
                for g in &self.facet_vertices {
                    let inter: Vec<usize> = f.iter().filter(|v| g.binary_search(v).is_ok()).copied().collect();
                    if !inter.is_empty() && inter.len() < f.len() && !all.contains(&inter) {
                        next.push(inter);
                    }
                }
            }
            frontier = next;
        }
        let mut faces: Vec<Face> = all
            .into_iter()
            .map(|vs| {
                let refs: Vec<&[Rat]> = vs.iter().map(|&i| self.vertices[i].as_slice()).collect();
                Face { dim: affine_rank(&refs), vertices: vs }
            })
            .collect();
        faces.sort();
        self.faces = faces;
    }

    fn self_check(&self) -> bool {
        // every vertex meets the H-representation, with at least `dim` tight facets
        self.vertices.iter().enumerate().all(|(i, v)| {
            self.contains(v) && self.facet_vertices.iter().filter(|f| f.contains(&i)).count() >= self.dim as usize
        })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> isize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[RationalPoint] {
        &self.vertices
    }

    pub fn equations(&self) -> &[HalfSpace] {
        &self.equations
    }

    pub fn facets(&self) -> &[HalfSpace] {
        &self.facets
    }

    pub fn facet_vertices(&self) -> &[Vec<usize>] {
        &self.facet_vertices
    }

    /// All nonempty faces, the polytope itself included, sorted by
    /// `(dim, vertex set)`.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn faces_of_dim(&self, k: isize) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(move |f| f.dim == k)
    }

    pub fn is_full_dim(&self) -> bool {
        self.dim == self.ambient as isize
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        !self.vertices.is_empty()
            && self.equations.iter().all(|e| e.value(x).is_zero())
            && self.facets.iter().all(|f| f.contains(x))
    }

    /// Strictly inside the relative interior.
    pub fn contains_relint(&self, x: &[Rat]) -> bool {
        !self.vertices.is_empty()
            && self.equations.iter().all(|e| e.value(x).is_zero())
            && self.facets.iter().all(|f| f.value(x).is_positive())
    }

    pub fn vertex_index(&self, x: &[Rat]) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_slice().cmp(x)).ok()
    }

    /// Vertex indices of the face on which `⟨·, n⟩` is minimal.
    pub fn argmin(&self, n: &[Rat]) -> Vec<usize> {
        let vals: Vec<Rat> = self.vertices.iter().map(|v| dot(v, n)).collect();
        let Some(min) = vals.iter().min().cloned() else {
            return Vec::new();
        };
        (0..vals.len()).filter(|&i| vals[i] == min).collect()
    }

    pub fn min_value(&self, n: &[Rat]) -> Option<Rat> {
        self.vertices.iter().map(|v| dot(v, n)).min()
    }

    /// Whether `vertices` (sorted indices) is a face of `self`.
    pub fn is_face(&self, vertices: &[usize]) -> bool {
        self.faces.iter().any(|f| f.vertices == vertices)
    }

    pub fn face_dim(&self, vertices: &[usize]) -> Option<isize> {
        self.faces.iter().find(|f| f.vertices == vertices).map(|f| f.dim)
    }

    /// The face spanned by the given vertex indices as a polytope.
    pub fn sub_polytope(&self, vertices: &[usize]) -> Self {
        if vertices.is_empty() {
            return Self::empty(self.ambient);
        }
        let pts: Vec<RationalPoint> = vertices.iter().map(|&i| self.vertices[i].clone()).collect();
        Self::convex_hull(&pts).expect("nonempty")
    }

    pub fn face_polytope(&self, face: &Face) -> Self {
        self.sub_polytope(&face.vertices)
    }

    /// Vertex indices of `self` lying in `other`.
    pub fn vertices_in(&self, other: &Polytope) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| other.contains(&self.vertices[i])).collect()
    }

    pub fn is_lattice(&self) -> bool {
        self.vertices.iter().all(|v| v.iter().all(|x| x.is_integer()))
    }

    pub fn scale(&self, k: &Rat) -> Self {
        if self.is_empty() {
            return self.clone();
        }
        let pts: Vec<RationalPoint> = self.vertices.iter().map(|v| v.iter().map(|x| x * k).collect()).collect();
        Self::convex_hull(&pts).expect("nonempty")
    }

    pub fn translate(&self, t: &[Rat]) -> Self {
        if self.is_empty() {
            return self.clone();
        }
        let pts: Vec<RationalPoint> = self.vertices.iter().map(|v| crate::arith::add(v, t)).collect();
        Self::convex_hull(&pts).expect("nonempty")
    }

    /// Whether the origin lies in the interior.
    pub fn origin_interior(&self) -> bool {
        self.is_full_dim() && self.facets.iter().all(|f| f.offset.is_positive())
    }

    /// `{n : ⟨m, n⟩ ≥ −1 ∀ m ∈ P}`.
    pub fn polar_dual(&self) -> Result<Self> {
        if !self.is_full_dim() {
            return Err(Error::NotFullDimensional { dim: self.dim, ambient: self.ambient });
        }
        if !self.origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        let pts: Vec<RationalPoint> =
            self.facets.iter().map(|f| f.normal.iter().map(|a| rat_from_int(a) / &f.offset).collect()).collect();
        Self::convex_hull(&pts)
    }

    pub fn is_reflexive(&self) -> bool {
        self.is_full_dim() && self.is_lattice() && self.origin_interior() && self.facets.iter().all(|f| f.offset.is_one())
    }

    /// Whether `self ⊆ other`.
    pub fn subset_of(&self, other: &Polytope) -> bool {
        self.vertices.iter().all(|v| other.contains(v))
    }

    /// Intersection by combining both H-representations.
    pub fn intersect(&self, other: &Polytope) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::empty(self.ambient);
        }
        let mut cons = self.constraints();
        cons.extend(other.constraints());
        Self::from_constraints(self.ambient, &cons)
    }

    /// H-representation as `(a, b)` pairs meaning `⟨a, x⟩ ≥ −b`; equations
    /// appear twice with opposite signs.
    pub fn constraints(&self) -> Vec<(Vec<Rat>, Rat)> {
        let mut out = Vec::new();
        for e in &self.equations {
            let a = to_rats(&e.normal);
            out.push((a.iter().map(|x| -x).collect(), -e.offset.clone()));
            out.push((a, e.offset.clone()));
        }
        for f in &self.facets {
            out.push((to_rats(&f.normal), f.offset.clone()));
        }
        out
    }

    /// Facets of the face `face` as faces of `self` (those of one lower
    /// dimension contained in it).
    pub fn facets_of_face(&self, face: &Face) -> Vec<&Face> {
        self.faces
            .iter()
            .filter(|g| g.dim == face.dim - 1 && g.vertices.iter().all(|v| face.vertices.binary_search(v).is_ok()))
            .collect()
    }

    pub fn describe(&self) -> String {
        let vs: Vec<String> = self
            .vertices
            .iter()
            .map(|v| format!("({})", v.iter().map(crate::arith::fmt_rat).collect::<Vec<_>>().join(",")))
            .collect();
        format!("conv{{{}}}", vs.join(","))
    }
}

pub fn int_points(v: &[&[i64]]) -> Vec<RationalPoint> {
    v.iter().map(|p| p.iter().map(|&x| crate::arith::rat(x)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, ratio};

    fn square() -> Polytope {
        Polytope::convex_hull(&int_points(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])).unwrap()
    }

    #[test]
    fn square_representations() {
        let p = square();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
        assert!(p.facets().iter().all(|f| f.offset == rat(1)));
        // 4 vertices, 4 edges, the square
        assert_eq!(p.faces().len(), 9);
    }

    #[test]
    fn single_point_and_empty() {
        let p = Polytope::convex_hull(&int_points(&[&[0, 0]])).unwrap();
        assert_eq!(p.dim(), 0);
        assert_eq!(p.faces().len(), 1);
        assert!(matches!(Polytope::convex_hull(&[]), Err(Error::EmptyPointSet)));
    }

    #[test]
    fn interior_point_discarded() {
        let p = Polytope::convex_hull(&int_points(&[&[2, -1], &[-1, 2], &[-1, -1], &[0, 0]])).unwrap();
        assert_eq!(p.vertices(), &int_points(&[&[-1, -1], &[-1, 2], &[2, -1]])[..]);
    }

    #[test]
    fn triangle_polar() {
        let p = Polytope::convex_hull(&int_points(&[&[2, -1], &[-1, 2], &[-1, -1]])).unwrap();
        let q = p.polar_dual().unwrap();
        assert_eq!(q.vertices(), &int_points(&[&[-1, -1], &[0, 1], &[1, 0]])[..]);
        assert_eq!(q.polar_dual().unwrap(), p);
    }

    #[test]
    fn polar_requires_interior_origin() {
        let p = Polytope::convex_hull(&int_points(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap();
        assert!(matches!(p.polar_dual(), Err(Error::OriginNotInterior)));
    }

    #[test]
    fn reflexivity() {
        assert!(square().is_reflexive());
        assert!(!square().scale(&rat(2)).is_reflexive());
        let simplex =
            Polytope::convex_hull(&int_points(&[&[3, -1, -1], &[-1, 3, -1], &[-1, -1, 3], &[-1, -1, -1]])).unwrap();
        assert!(simplex.is_reflexive());
        assert!(simplex.polar_dual().unwrap().is_lattice());
    }

    #[test]
    fn segment_in_plane() {
        let p = Polytope::convex_hull(&int_points(&[&[0, 0], &[2, 2], &[1, 1]])).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.vertices().len(), 2);
        assert_eq!(p.equations().len(), 1);
        assert!(p.contains(&[ratio(1, 2), ratio(1, 2)]));
        assert!(!p.contains(&[ratio(1, 2), rat(0)]));
    }

    #[test]
    fn constraints_round_trip() {
        let p = square();
        let q = Polytope::from_constraints(2, &p.constraints());
        assert_eq!(p, q);
        let empty = Polytope::from_constraints(1, &[(vec![rat(1)], rat(-2)), (vec![rat(-1)], rat(1))]);
        assert!(empty.is_empty());
    }
}
