use std::collections::{BTreeSet, HashMap};

use lxray_core::continuum::{cell_chord, forward_continuous, traverse_cells, CellField};
use lxray_core::counting::{count_tmin, count_tmin_by_keys, count_tmin_through_origin, canonical_directions};
use lxray_core::lattice::{enumerate_ball, farey_count, LatticePoint};
use lxray_core::rays::{effectively_irrational, group_slices, lattice_points_on_ray};
use lxray_core::sieve::{farey_count_oracle, totient_sum};
use lxray_core::transform::{forward, forward_family, project_and_bin};
use lxray_core::{
    gamma_z, gamma_z_plane, primitive, recon_shells, GridFunction, Plane, Radius, Ray, ReconPlan,
};
use proptest::prelude::*;

fn rad(n: i64) -> Radius {
    Radius::from_integer(n).unwrap()
}

fn vec2() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-40i64..=40, 2)
}

fn nonzero(d: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-12i64..=12, d).prop_filter("nonzero", |v| v.iter().any(|&x| x != 0))
}

fn int_phantom(d: usize, r: i64, vals: &[i8]) -> GridFunction {
    let mut it = vals.iter().cycle();
    GridFunction::from_fn(d, rad(r), |_| *it.next().unwrap() as f64).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn primitive_is_scale_invariant(v in nonzero(3), k in -7i64..=7) {
        prop_assume!(k != 0);
        let scaled: Vec<i64> = v.iter().map(|x| x * k).collect();
        prop_assert_eq!(primitive(&scaled).unwrap(), primitive(&v).unwrap());
    }

    #[test]
    fn ray_key_is_line_invariant(base in vec2(), dir in nonzero(2), k in -20i64..=20) {
        let theta = primitive(&dir).unwrap();
        let a = Ray::new(LatticePoint::new(base.clone()), theta.clone()).unwrap();
        let moved = LatticePoint::new(base).add_scaled(theta.prim(), k);
        let b = Ray::new(moved, theta).unwrap();
        prop_assert_eq!(a.key(), b.key());
    }

    #[test]
    fn gamma_z_contains_z_and_is_orthogonal(z in prop::collection::vec(-30i64..=30, 3)) {
        let z = LatticePoint::new(z);
        let ray = gamma_z(&z).unwrap();
        prop_assert!(ray.contains(&z));
        let c = z.coords();
        let p = ray.dir.prim();
        prop_assert_eq!(c[0] * p[0] + c[1] * p[1], 0);
        prop_assert_eq!(p[2], 0);
    }

    #[test]
    fn standard_plane_matches_gamma_z(z in prop::collection::vec(-30i64..=30, 3)) {
        let z = LatticePoint::new(z);
        let plane = Plane::standard(3).unwrap();
        prop_assert_eq!(gamma_z_plane(&z, &plane).unwrap().key(), gamma_z(&z).unwrap().key());
    }

    #[test]
    fn general_plane_rays_stay_in_plane(z in prop::collection::vec(-20i64..=20, 3)) {
        let z = LatticePoint::new(z);
        let plane = Plane::new(vec![1, 1, 0], vec![0, 1, 1]).unwrap();
        let ray = gamma_z_plane(&z, &plane).unwrap();
        prop_assert!(ray.contains(&z));
        prop_assert!(plane.contains_vector(ray.dir.prim()));
    }

    #[test]
    fn points_on_ray_match_brute_force(base in prop::collection::vec(-6i64..=6, 2), dir in nonzero(2), r in 0i64..=7) {
        let ray = Ray::new(LatticePoint::new(base), primitive(&dir).unwrap()).unwrap();
        let got: BTreeSet<LatticePoint> =
            lattice_points_on_ray(&ray, &rad(r), &LatticePoint::origin(2)).into_iter().collect();
        let want: BTreeSet<LatticePoint> = enumerate_ball(2, &rad(r), &LatticePoint::origin(2))
            .unwrap()
            .into_iter()
            .filter(|y| ray.contains(y))
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn forward_is_linear(a in prop::collection::vec(-9i8..=9, 1..40), b in prop::collection::vec(-9i8..=9, 1..40),
                         s in -3i32..=3, t in -3i32..=3, base in prop::collection::vec(-5i64..=5, 2), dir in nonzero(2)) {
        let f = int_phantom(2, 6, &a);
        let g = int_phantom(2, 6, &b);
        let h = f.linear_combination(s as f64, &g, t as f64).unwrap();
        let ray = Ray::new(LatticePoint::new(base), primitive(&dir).unwrap()).unwrap();
        let lhs = forward(&h, &ray).unwrap();
        let rhs = s as f64 * forward(&f, &ray).unwrap() + t as f64 * forward(&g, &ray).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn forward_is_shift_covariant(vals in prop::collection::vec(-9i8..=9, 1..40), shift in prop::collection::vec(-3i64..=3, 2),
                                  base in prop::collection::vec(-5i64..=5, 2), dir in nonzero(2)) {
        let f = int_phantom(2, 5, &vals);
        let mut g = GridFunction::new(2, rad(10)).unwrap();
        for (z, v) in f.iter() {
            g.insert(z.translate(&shift), v).unwrap();
        }
        let ray = Ray::new(LatticePoint::new(base.clone()), primitive(&dir).unwrap()).unwrap();
        let moved = Ray::new(LatticePoint::new(base).translate(&shift), ray.dir.clone()).unwrap();
        prop_assert_eq!(forward(&f, &ray).unwrap(), forward(&g, &moved).unwrap());
    }

    #[test]
    fn round_trip_is_exact(vals in prop::collection::vec(-9i8..=9, 1..60), r in 0i64..=9) {
        let f = int_phantom(2, r, &vals);
        let plan = ReconPlan::ball(2, rad(r), None).unwrap();
        let g = forward_family(&f, &plan.family(), plan.descriptor()).unwrap();
        prop_assert_eq!(g.len(), plan.points().len());
        prop_assert_eq!(recon_shells(&g, &plan).unwrap(), f);
    }

    #[test]
    fn round_trip_plane_d3(vals in prop::collection::vec(-9i8..=9, 1..60), r in 0i64..=4) {
        let f = int_phantom(3, r, &vals);
        let plane = Plane::new(vec![1, 0, 1], vec![0, 1, -1]).unwrap();
        let plan = ReconPlan::ball(3, rad(r), Some(plane)).unwrap();
        let g = forward_family(&f, &plan.family(), plan.descriptor()).unwrap();
        prop_assert_eq!(recon_shells(&g, &plan).unwrap(), f);
    }

    #[test]
    fn intra_shell_order_is_irrelevant(vals in prop::collection::vec(-9i8..=9, 1..60), seed in any::<u64>()) {
        let r = rad(6);
        let f = int_phantom(2, 6, &vals);
        let mut pts = enumerate_ball(2, &r, &LatticePoint::origin(2)).unwrap();
        // Deterministic shuffle of the plan's input order.
        let mut s = seed;
        for i in (1..pts.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            pts.swap(i, (s >> 33) as usize % (i + 1));
        }
        let plan = ReconPlan::tstar(2, pts, r, None).unwrap();
        let g = forward_family(&f, &plan.family(), plan.descriptor()).unwrap();
        prop_assert_eq!(recon_shells(&g, &plan).unwrap(), f);
    }

    #[test]
    fn binning_equals_forward(vals in prop::collection::vec(-9i8..=9, 1..40), dir in nonzero(2)) {
        let f = int_phantom(2, 4, &vals);
        let theta = primitive(&dir).unwrap();
        for (key, v) in project_and_bin(&f, &theta).unwrap() {
            prop_assert_eq!(forward(&f, &key.ray()).unwrap(), v);
        }
    }

    #[test]
    fn traversal_chords_match_slab(base in prop::collection::vec(-4i64..=4, 3), dir in nonzero(3)) {
        let ray = Ray::new(LatticePoint::new(base), primitive(&dir).unwrap()).unwrap();
        let walk: HashMap<LatticePoint, f64> = traverse_cells(&ray, 8.0).into_iter().collect();
        for c in enumerate_ball(3, &rad(5), &LatticePoint::origin(3)).unwrap() {
            let slab = cell_chord(&ray, &c);
            let w = walk.get(&c).copied().unwrap_or(0.0);
            prop_assert!((slab - w).abs() < 1e-12, "{c}: {slab} vs {w}");
        }
    }

    #[test]
    fn chord_is_translation_and_permutation_invariant(base in prop::collection::vec(-4i64..=4, 3), dir in nonzero(3),
                                                      cell in prop::collection::vec(-4i64..=4, 3), t in prop::collection::vec(-9i64..=9, 3)) {
        let theta = primitive(&dir).unwrap();
        let ray = Ray::new(LatticePoint::new(base.clone()), theta.clone()).unwrap();
        let cell = LatticePoint::new(cell);
        let c = cell_chord(&ray, &cell);
        let moved = Ray::new(LatticePoint::new(base.clone()).translate(&t), theta).unwrap();
        prop_assert_eq!(c, cell_chord(&moved, &cell.translate(&t)));
        let perm = |v: &[i64]| vec![v[2], v[0], v[1]];
        let pray = Ray::new(LatticePoint::new(perm(&base)), primitive(&perm(&dir)).unwrap()).unwrap();
        prop_assert!((c - cell_chord(&pray, &LatticePoint::new(perm(cell.coords())))).abs() < 1e-12);
    }

    #[test]
    fn continuous_forward_is_linear(a in prop::collection::vec(-9i8..=9, 1..40), b in prop::collection::vec(-9i8..=9, 1..40),
                                    s in -3i32..=3, base in prop::collection::vec(-4i64..=4, 2), dir in nonzero(2)) {
        let f = int_phantom(2, 5, &a);
        let g = int_phantom(2, 5, &b);
        let h = f.linear_combination(s as f64, &g, 1.0).unwrap();
        let ray = Ray::new(LatticePoint::new(base), primitive(&dir).unwrap()).unwrap();
        let p = |x: &GridFunction| forward_continuous(&CellField::new(x.clone()), &ray).unwrap();
        let lhs = p(&h);
        let rhs = s as f64 * p(&f) + p(&g);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn long_directions_see_one_point(z in prop::collection::vec(-5i64..=5, 2), k in 11i64..=30, m in -3i64..=3) {
        let z = LatticePoint::new(z);
        let r = rad(5);
        prop_assume!(r.contains_norm2(z.norm2()));
        let theta = primitive(&[k, m]).unwrap();
        prop_assume!(effectively_irrational(&theta, &r));
        let ray = Ray::new(z.clone(), theta).unwrap();
        prop_assert_eq!(lattice_points_on_ray(&ray, &r, &LatticePoint::origin(2)), vec![z]);
    }
}

#[test]
fn slices_partition_the_ball() {
    let plane = Plane::new(vec![1, 1, 0], vec![0, 1, 1]).unwrap();
    let ball = enumerate_ball(3, &rad(6), &LatticePoint::origin(3)).unwrap();
    let slices = group_slices(&ball, &plane);
    let total: usize = slices.values().map(Vec::len).sum();
    assert_eq!(total, ball.len());
    for pts in slices.values() {
        for w in pts.windows(2) {
            assert!(plane.contains_vector(&w[1].sub(&w[0])));
        }
    }
}

#[test]
fn farey_enumeration_matches_sieve() {
    for n in 1..=200u64 {
        assert_eq!(farey_count(n, 2).unwrap() as u128, farey_count_oracle(n as usize, 2));
        assert_eq!(farey_count(n, 2).unwrap(), totient_sum(n as usize));
    }
    for n in 1..=30u64 {
        assert_eq!(farey_count(n, 3).unwrap() as u128, farey_count_oracle(n as usize, 3), "d=3 n={n}");
    }
}

#[test]
fn line_counts_agree_and_increase() {
    let mut prev = 0;
    for r in 1..=10 {
        let c = count_tmin(&rad(r), 2).unwrap();
        assert_eq!(c, count_tmin_by_keys(&rad(r), 2).unwrap());
        assert!(c > prev);
        prev = c;
    }
    for r in 1..=15 {
        assert_eq!(
            count_tmin_through_origin(&rad(r), 2).unwrap(),
            canonical_directions(2, &rad(r)).unwrap().len() as u64
        );
    }
}
