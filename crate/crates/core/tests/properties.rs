use proptest::prelude::*;

use tropcy_core::arith::{rat, Rat};
use tropcy_core::fan::{Fan, PlFunction};
use tropcy_core::geometry::lattice::count_lattice_points;
use tropcy_core::geometry::minkowski::minkowski_sum;
use tropcy_core::geometry::{int_points, Polytope};

fn hull(pts: &[(i64, i64)]) -> Option<Polytope> {
    let v: Vec<Vec<i64>> = pts.iter().map(|&(x, y)| vec![x, y]).collect();
    let refs: Vec<&[i64]> = v.iter().map(|p| p.as_slice()).collect();
    Polytope::convex_hull(&int_points(&refs)).ok().filter(|p| p.is_full_dim())
}

fn points() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-3i64..=3, -3i64..=3), 3..9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polar_is_an_involution(pts in points()) {
        let Some(p) = hull(&pts) else { return Ok(()) };
        prop_assume!(p.origin_interior());
        let back = p.polar_dual().unwrap().polar_dual().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn support_function_recovers_polytope(pts in points()) {
        let Some(p) = hull(&pts) else { return Ok(()) };
        let f = PlFunction::support_function(&p, Fan::normal_fan(&p).unwrap()).unwrap();
        prop_assert!(f.is_strictly_convex());
        prop_assert_eq!(f.newton_polytope().unwrap(), p);
    }

    #[test]
    fn minkowski_support_is_additive(a in points(), b in points(), dir in (-5i64..=5, -5i64..=5)) {
        let (Some(p), Some(q)) = (hull(&a), hull(&b)) else { return Ok(()) };
        let sum = minkowski_sum(&p, &q).unwrap();
        let n = vec![rat(dir.0), rat(dir.1)];
        let lhs = sum.sum.min_value(&n).unwrap();
        let rhs = p.min_value(&n).unwrap() + q.min_value(&n).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lattice_count_matches_box_scan(pts in points()) {
        let Some(p) = hull(&pts) else { return Ok(()) };
        let mut n = 0;
        for x in -3i64..=3 {
            for y in -3i64..=3 {
                if p.contains(&[rat(x), rat(y)]) {
                    n += 1;
                }
            }
        }
        prop_assert_eq!(count_lattice_points(&p), n);
    }

    #[test]
    fn scaling_commutes_with_hull(pts in points(), k in 1i64..4) {
        let Some(p) = hull(&pts) else { return Ok(()) };
        let scaled: Vec<(i64, i64)> = pts.iter().map(|&(x, y)| (k * x, k * y)).collect();
        let direct = hull(&scaled).unwrap();
        prop_assert_eq!(p.scale(&Rat::from_integer(k.into())), direct);
    }
}
