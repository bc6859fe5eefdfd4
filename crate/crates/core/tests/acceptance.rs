//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lxray_core::continuum::{correction_identity_check, forward_family_continuous, iterate_recon, CellField};
use lxray_core::counting::{farey_asymptotic_report, verify_lower_bound_chain, verify_separation};
use lxray_core::lattice::{ball_count, enumerate_ball};
use lxray_core::recon::{recon_annulus, recon_one_point, recon_shells_audited};
use lxray_core::transform::{forward_family, forward_family_weighted, project_and_bin, FamilyDescriptor};
use lxray_core::{
    primitive, recon_shells, recon_shells_weighted, Direction, GridFunction, LatticePoint, Plane, Radius, Ray,
    ReconPlan, WeightModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rad(n: i64) -> Radius {
    Radius::from_integer(n).unwrap()
}

fn phantom(d: usize, r: &Radius, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridFunction::from_fn(d, r.clone(), |_| rng.gen_range(-9i32..=9) as f64).unwrap()
}

fn exact_round_trip(d: usize, r: i64, plane: Option<Plane>, seeds: std::ops::Range<u64>) -> Outcome {
    let r = rad(r);
    let plan = ReconPlan::ball(d, r.clone(), plane).map_err(|e| e.to_string())?;
    let family = plan.family();
    for seed in seeds.clone() {
        let f = phantom(d, &r, seed);
        let g = forward_family(&f, &family, plan.descriptor()).map_err(|e| e.to_string())?;
        let rec = recon_shells(&g, &plan).map_err(|e| e.to_string())?;
        if rec != f {
            return Err(format!("seed {seed}: max error {}", rec.max_abs_diff(&f)));
        }
    }
    Ok(format!("{} phantoms, {} points each, bit-exact", seeds.count(), plan.points().len()))
}

fn c1() -> Outcome {
    exact_round_trip(2, 30, None, 0..20)
}

fn c2() -> Outcome {
    exact_round_trip(3, 10, None, 100..120)
}

fn c3() -> Outcome {
    let plane = Plane::new(vec![1, 1, 0], vec![0, 1, 1]).map_err(|e| e.to_string())?;
    exact_round_trip(3, 8, Some(plane), 200..220)
}

fn c4() -> Outcome {
    let (r, alpha, beta) = (rad(20), rad(5), rad(20));
    let plan = ReconPlan::annulus(2, r.clone(), alpha.clone(), beta.clone(), None).map_err(|e| e.to_string())?;
    let f = phantom(2, &r, 300);
    let g = forward_family(&f, &plan.family(), plan.descriptor()).map_err(|e| e.to_string())?;
    let rec = recon_annulus(&g, alpha, beta, r, None).map_err(|e| e.to_string())?;
    for z in plan.points() {
        if rec.stored(z) != f.stored(z) {
            return Err(format!("{z}: {:?} vs {:?}", rec.stored(z), f.stored(z)));
        }
    }
    if rec.len() != plan.points().len() {
        return Err(format!("{} values for {} annulus points", rec.len(), plan.points().len()));
    }
    Ok(format!("{} annulus points from {} rays, bit-exact", rec.len(), g.len()))
}

fn c5() -> Outcome {
    let r = rad(8);
    let plan = ReconPlan::ball(2, r.clone(), None).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut table = std::collections::HashMap::new();
    for (_, ray) in plan.family() {
        for y in enumerate_ball(2, &r, &LatticePoint::origin(2)).unwrap() {
            if ray.contains(&y) {
                table.insert((y, ray.dir.clone()), rng.gen_range(0.5..=2.0));
            }
        }
    }
    let w = WeightModel::Table(table);
    let f = phantom(2, &r, 501);
    let g = forward_family_weighted(&f, &plan.family(), &w, plan.descriptor()).map_err(|e| e.to_string())?;
    let rec = recon_shells_weighted(&g, &plan, &w).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (z, v) in f.iter() {
        let rel = (rec.get(z) - v).abs() / (1.0 + v.abs());
        worst = worst.max(rel);
    }
    if worst <= 1e-9 {
        Ok(format!("max relative error {worst:.2e}"))
    } else {
        Err(format!("max relative error {worst:.2e} > 1e-9"))
    }
}

fn c6() -> Outcome {
    let r = rad(10);
    let points = enumerate_ball(2, &r, &LatticePoint::origin(2)).unwrap();
    let theta = primitive(&[21, 1]).unwrap();
    let theta_of: BTreeMap<LatticePoint, Direction> = points.iter().map(|z| (z.clone(), theta.clone())).collect();
    let family: Vec<(LatticePoint, Ray)> =
        points.iter().map(|z| (z.clone(), Ray::new(z.clone(), theta.clone()).unwrap())).collect();
    let f = phantom(2, &r, 600);
    let g = forward_family(&f, &family, FamilyDescriptor::free()).map_err(|e| e.to_string())?;
    let rec = recon_one_point(&g, &points, &theta_of, &r, None).map_err(|e| e.to_string())?;
    if rec != f {
        return Err(format!("max error {}", rec.max_abs_diff(&f)));
    }
    Ok(format!("{} points, direction (21,1), exact", points.len()))
}

fn c7() -> Outcome {
    let r = rad(5);
    let mut rays = 0;
    for seed in 700..705 {
        let f = phantom(2, &r, seed);
        for dir in [[1, 2], [3, 1], [2, 3]] {
            let theta = primitive(&dir).unwrap();
            let bins = project_and_bin(&f, &theta).map_err(|e| e.to_string())?;
            for (key, v) in &bins {
                let direct = lxray_core::transform::forward(&f, &key.ray()).map_err(|e| e.to_string())?;
                if direct != *v {
                    return Err(format!("seed {seed} {key:?}: bin {v} vs forward {direct}"));
                }
                rays += 1;
            }
        }
    }
    Ok(format!("{rays} bins equal forward exactly"))
}

fn c8() -> Outcome {
    let r = rad(8);
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let field = CellField::new(GridFunction::from_fn(2, r.clone(), |_| rng.gen_range(-1.0..1.0)).unwrap());
    let start = Instant::now();
    let mut worst = 0.0f64;
    let points = enumerate_ball(2, &r, &LatticePoint::origin(2)).unwrap();
    for z in &points {
        let (lhs, rhs) = correction_identity_check(&field, z).map_err(|e| e.to_string())?;
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    let took = start.elapsed();
    if worst > 1e-9 {
        return Err(format!("max scaled gap {worst:.2e} > 1e-9"));
    }
    if took > Duration::from_secs(2) {
        return Err(format!("took {took:?} > 2 s"));
    }
    Ok(format!("{} rays, max scaled gap {worst:.2e}, {took:?}", points.len()))
}

fn c9() -> Outcome {
    let r = rad(8);
    let plan = ReconPlan::ball(2, r.clone(), None).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    let f = GridFunction::from_fn(2, r.clone(), |_| rng.gen_range(-1.0..1.0)).unwrap();
    let g = forward_family_continuous(&CellField::new(f.clone()), &plan.family(), plan.descriptor())
        .map_err(|e| e.to_string())?;
    let steps = iterate_recon(&g, &plan, &f, 1).map_err(|e| e.to_string())?;
    let err = steps[0].f.max_abs_diff(&f);
    if err > 1e-9 {
        return Err(format!("fixed point moved by {err:.2e}"));
    }
    let zero = GridFunction::new(2, r).unwrap();
    let curve = iterate_recon(&g, &plan, &zero, 5).map_err(|e| e.to_string())?;
    let residuals: Vec<String> = curve.iter().map(|s| format!("{:.3e}", s.residual)).collect();
    Ok(format!(
        "fixed point within {err:.2e}; residuals from zero (reported only): {}",
        residuals.join(", ")
    ))
}

fn c10() -> Outcome {
    let mut parts = Vec::new();
    for r in [2, 4, 8, 16] {
        let start = Instant::now();
        let rep = verify_lower_bound_chain(&rad(r), 2).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        if !rep.passed {
            return Err(format!("r={r}: {} < {} < {} fails", rep.lower_bound, rep.count, rep.upper_bound));
        }
        if r == 16 && took > Duration::from_secs(10) {
            return Err(format!("r=16 took {took:?} > 10 s"));
        }
        parts.push(format!("r={r}: {} < {} < {}", rep.lower_bound, rep.count, rep.upper_bound));
    }
    Ok(parts.join("; "))
}

fn c11() -> Outcome {
    let rep = farey_asymptotic_report(1000).map_err(|e| e.to_string())?;
    if rep.count as u128 != rep.oracle {
        return Err(format!("count {} vs oracle {}", rep.count, rep.oracle));
    }
    if !(0.99..=1.01).contains(&rep.ratio) {
        return Err(format!("ratio {:.6} outside [0.99, 1.01]", rep.ratio));
    }
    Ok(format!("#F_1000 = {} (oracle agrees), ratio {:.6}", rep.count, rep.ratio))
}

fn c12() -> Outcome {
    let rep = verify_separation(&rad(25), 2).map_err(|e| e.to_string())?;
    if !rep.passed || rep.equality_cases == 0 {
        return Err(format!("{rep:?}"));
    }
    Ok(format!(
        "{} pairs checked, min gap {:?}, {} equality cases",
        rep.checked, rep.min_gap, rep.equality_cases
    ))
}

fn c13() -> Outcome {
    let mut parts = Vec::new();
    for (d, r) in [(2, 30), (3, 10)] {
        let r = rad(r);
        let plan = ReconPlan::ball(d, r.clone(), None).map_err(|e| e.to_string())?;
        let f = phantom(d, &r, 1300);
        let g = forward_family(&f, &plan.family(), plan.descriptor()).map_err(|e| e.to_string())?;
        let (_, audit) = recon_shells_audited(&g, &plan, None).map_err(|e| e.to_string())?;
        let n = ball_count(d, &r) as usize;
        if audit.keys_consumed != n || audit.points_recovered != n || g.len() != n {
            return Err(format!("d={d}: {audit:?}, {} entries, N_r = {n}", g.len()));
        }
        parts.push(format!("d={d} r={r}: {n} keys = {n} points = N_r"));
    }
    Ok(parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("round trip d=2 r=30", c1),
        ("round trip d=3 r=10", c2),
        ("general plane d=3 r=8", c3),
        ("annulus 5..20 at r=20", c4),
        ("weighted inversion r=8", c5),
        ("one-point inversion r=10", c6),
        ("projection binning r=5", c7),
        ("cell correction identity r=8", c8),
        ("iteration fixed point r=8", c9),
        ("line count bounds", c10),
        ("Farey asymptotic n=1000", c11),
        ("separation R=25", c12),
        ("non-overdetermination audit", c13),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        match out {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{took:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
