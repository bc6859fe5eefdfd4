//! Exhaustive counts over ball lattice points: lines through two or more
//! points, lines through the origin, Farey asymptotics, and the separation
//! estimate for projections along primitive directions.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{ball_count, dot, enumerate_ball, farey_count, primitive, LatticePoint};
use crate::radius::Radius;
use crate::rays::{Ray, RayKey};
use crate::sieve::farey_count_oracle;

/// Cap on `N_r · N_{2r}` for the line count.
const TMIN_BUDGET: u64 = 1_000_000_000;
/// Cap on `N_r²` for the pair-hashing oracle.
const ORACLE_BUDGET: u64 = 50_000_000;
/// Cap on `N_R²` for the separation check.
const SEPARATION_BUDGET: u64 = 2_000_000_000;

fn canonical_primitive(v: &LatticePoint) -> bool {
    !v.is_zero() && primitive(v.coords()).map(|p| p.prim() == v.coords()).unwrap_or(false)
}

/// Canonical primitive vectors of squared norm at most `r²`.
pub fn canonical_directions(d: usize, r: &Radius) -> Result<Vec<LatticePoint>> {
    Ok(enumerate_ball(d, r, &LatticePoint::origin(d))?
        .into_iter()
        .filter(canonical_primitive)
        .collect())
}

/// Number of distinct lines meeting `B_r ∩ ℤ^d` in at least two points.
///
/// Points of a line inside the ball form one run `p, p+v, …` along its
/// canonical primitive direction `v`, so each line is counted once at the
/// start of its run.
pub fn count_tmin(r: &Radius, d: usize) -> Result<u64> {
    let points = enumerate_ball(d, r, &LatticePoint::origin(d))?;
    let two_r = r.scaled(2, 1)?;
    let n_dirs = ball_count(d, &two_r);
    if (points.len() as u64).saturating_mul(n_dirs) > TMIN_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "line count at r = {r} in dimension {d}"
        )));
    }
    let dirs = canonical_directions(d, &two_r)?;
    let inside = |x: &[i64], v: &[i64], s: i64| -> bool {
        let n2: i128 = x
            .iter()
            .zip(v)
            .map(|(&a, &b)| {
                let c = (a + s * b) as i128;
                c * c
            })
            .sum();
        r.contains_norm2(n2)
    };
    Ok(points
        .par_iter()
        .map(|p| {
            dirs.iter()
                .filter(|v| inside(p.coords(), v.coords(), 1) && !inside(p.coords(), v.coords(), -1))
                .count() as u64
        })
        .sum())
}

/// Oracle for [`count_tmin`]: hash the line key of every pair of ball points.
pub fn count_tmin_by_keys(r: &Radius, d: usize) -> Result<u64> {
    let points = enumerate_ball(d, r, &LatticePoint::origin(d))?;
    let n = points.len() as u64;
    if n.saturating_mul(n) > ORACLE_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "pair enumeration at r = {r} in dimension {d}"
        )));
    }
    let sets: Vec<HashSet<RayKey>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut keys = HashSet::new();
            for j in i + 1..points.len() {
                let dir = primitive(&points[j].sub(&points[i])).expect("distinct points");
                keys.insert(Ray::new(points[i].clone(), dir).expect("matching dims").key());
            }
            keys
        })
        .collect();
    let mut all = HashSet::new();
    for s in sets {
        all.extend(s);
    }
    Ok(all.len() as u64)
}

/// Lines through the origin that contain a second point of `B_r ∩ ℤ^d`.
pub fn count_tmin_through_origin(r: &Radius, d: usize) -> Result<u64> {
    let points = enumerate_ball(d, r, &LatticePoint::origin(d))?;
    let lines: HashSet<Vec<i64>> = points
        .iter()
        .filter(|z| !z.is_zero())
        .map(|z| primitive(z.coords()).expect("nonzero").prim().to_vec())
        .collect();
    Ok(lines.len() as u64)
}

/// Outcome of the sandwich `½N_{r/2}(1 + N_{r/2}) < #𝒯_r^min < N_r²`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountReport {
    pub r: Radius,
    pub d: usize,
    pub count: u64,
    pub lower_bound: u64,
    pub upper_bound: u64,
    pub passed: bool,
}

pub fn verify_lower_bound_chain(r: &Radius, d: usize) -> Result<CountReport> {
    let count = count_tmin(r, d)?;
    let half = ball_count(d, &r.scaled(1, 2)?);
    let n = ball_count(d, r);
    let lower_bound = half * (1 + half) / 2;
    let upper_bound = n * n;
    Ok(CountReport {
        r: r.clone(),
        d,
        count,
        lower_bound,
        upper_bound,
        passed: lower_bound < count && count < upper_bound,
    })
}

/// Outcome of the exhaustive check `|ζ|²|z|² − (z·ζ)² ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub r: Radius,
    pub d: usize,
    /// Pairs `(ζ, z)` with `z` off the line `ℝζ`.
    pub checked: u64,
    /// Pairs attaining the bound with equality.
    pub equality_cases: u64,
    /// Smallest value of `|ζ|²|z|² − (z·ζ)²` seen, if any pair was checked.
    pub min_gap: Option<i128>,
    pub passed: bool,
}

/// For every canonical primitive `ζ` with `|ζ| ≤ R` and every `z ∈ B_R ∩ ℤ^d`
/// off the line `ℝζ`, checks `|ζ|²|z|² − (z·ζ)² ≥ 1`, which is
/// `|π_θ z| ≥ 1/|ζ|` for the projection orthogonal to `θ = ζ/|ζ|`.
pub fn verify_separation(big_r: &Radius, d: usize) -> Result<SeparationReport> {
    if !(2..=3).contains(&d) {
        return Err(Error::Unsupported(format!("separation check in dimension {d}")));
    }
    let points = enumerate_ball(d, big_r, &LatticePoint::origin(d))?;
    let n = points.len() as u64;
    if n.saturating_mul(n) > SEPARATION_BUDGET {
        return Err(Error::BudgetExceeded(format!("separation check at R = {big_r}")));
    }
    let dirs: Vec<&LatticePoint> = points.iter().filter(|z| canonical_primitive(z)).collect();
    let (checked, equality_cases, min_gap) = dirs
        .par_iter()
        .map(|zeta| {
            let zn = zeta.norm2();
            let mut checked = 0u64;
            let mut eq = 0u64;
            let mut min: Option<i128> = None;
            for z in &points {
                let zd = dot(z.coords(), zeta.coords());
                let gap = zn * z.norm2() - zd * zd;
                if gap == 0 {
                    // z = sζ, excluded.
                    continue;
                }
                checked += 1;
                if gap == 1 {
                    eq += 1;
                }
                min = Some(min.map_or(gap, |m| m.min(gap)));
            }
            (checked, eq, min)
        })
        .reduce(
            || (0, 0, None),
            |a, b| {
                let min = match (a.2, b.2) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, None) => x,
                    (None, y) => y,
                };
                (a.0 + b.0, a.1 + b.1, min)
            },
        );
    Ok(SeparationReport {
        r: big_r.clone(),
        d,
        checked,
        equality_cases,
        min_gap,
        passed: min_gap.is_none_or(|g| g >= 1),
    })
}

/// `#F_n` against `3n²/π²` in the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct FareyReport {
    pub n: u64,
    pub count: u64,
    pub oracle: u128,
    /// `#F_n · π² / (3n²)`.
    pub ratio: f64,
}

pub fn farey_asymptotic_report(n: u64) -> Result<FareyReport> {
    let count = farey_count(n, 2)?;
    let oracle = farey_count_oracle(n as usize, 2);
    let nf = n as f64;
    Ok(FareyReport {
        n,
        count,
        oracle,
        ratio: count as f64 * std::f64::consts::PI.powi(2) / (3.0 * nf * nf),
    })
}

/// `count` distinct lines through `point`, directions `(1, k, 0, …)`.
/// There is no bound on how many lines through one ball point exist.
pub fn tmax_witness(point: &LatticePoint, count: usize) -> Result<Vec<Ray>> {
    if point.dim() < 2 {
        return Err(Error::InvalidDimension(point.dim()));
    }
    (0..count)
        .map(|k| {
            let mut v = vec![0i64; point.dim()];
            v[0] = 1;
            v[1] = k as i64;
            Ray::new(point.clone(), primitive(&v)?)
        })
        .collect()
}

/// Line count at `r` with the empirical ratio `count / r^{2d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthPoint {
    pub r: Radius,
    pub count: u64,
    pub ratio: f64,
}

pub fn tmin_growth(radii: &[Radius], d: usize) -> Result<Vec<GrowthPoint>> {
    radii
        .iter()
        .map(|r| {
            let count = count_tmin(r, d)?;
            Ok(GrowthPoint {
                r: r.clone(),
                count,
                ratio: count as f64 / r.to_f64().powi(2 * d as i32),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rad(n: i64) -> Radius {
        Radius::from_integer(n).unwrap()
    }

    #[test]
    fn tmin_examples() {
        assert_eq!(count_tmin(&rad(0), 2).unwrap(), 0);
        assert_eq!(count_tmin(&rad(1), 2).unwrap(), 6);
        let c4 = count_tmin(&rad(4), 2).unwrap();
        assert!(91 < c4 && c4 < 2401);
    }

    #[test]
    fn tmin_matches_pair_hashing() {
        for r in 0..=7 {
            assert_eq!(count_tmin(&rad(r), 2).unwrap(), count_tmin_by_keys(&rad(r), 2).unwrap(), "r={r}");
        }
        for r in 0..=3 {
            assert_eq!(count_tmin(&rad(r), 3).unwrap(), count_tmin_by_keys(&rad(r), 3).unwrap(), "d=3 r={r}");
        }
        let s2 = Radius::from_squared(2, 1).unwrap();
        assert_eq!(count_tmin(&s2, 2).unwrap(), count_tmin_by_keys(&s2, 2).unwrap());
    }

    #[test]
    fn through_origin_examples() {
        assert_eq!(count_tmin_through_origin(&rad(1), 2).unwrap(), 2);
        let s2 = Radius::from_squared(2, 1).unwrap();
        assert_eq!(count_tmin_through_origin(&s2, 2).unwrap(), 4);
        for r in 1..=12 {
            let direct = canonical_directions(2, &rad(r)).unwrap().len() as u64;
            assert_eq!(count_tmin_through_origin(&rad(r), 2).unwrap(), direct);
        }
    }

    #[test]
    fn bound_chain_examples() {
        let r4 = verify_lower_bound_chain(&rad(4), 2).unwrap();
        assert_eq!((r4.lower_bound, r4.upper_bound), (91, 2401));
        assert!(r4.passed);
        let r8 = verify_lower_bound_chain(&rad(8), 2).unwrap();
        assert_eq!(r8.lower_bound, 1225);
        assert!(r8.passed);
        let r1 = verify_lower_bound_chain(&rad(1), 2).unwrap();
        assert_eq!((r1.lower_bound, r1.count), (1, 6));
        assert!(r1.passed);
    }

    #[test]
    fn separation_small() {
        let rep = verify_separation(&rad(5), 2).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.min_gap, Some(1));
        assert!(rep.equality_cases > 0);
        assert!(verify_separation(&rad(3), 3).unwrap().passed);
        assert!(verify_separation(&rad(3), 4).is_err());
    }

    #[test]
    fn farey_examples() {
        let r1 = farey_asymptotic_report(1).unwrap();
        assert_eq!(r1.count, 1);
        assert!((r1.ratio - std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-12);
        let r3 = farey_asymptotic_report(3).unwrap();
        assert_eq!(r3.count, 4);
        assert!((r3.ratio - 1.462).abs() < 1e-3);
    }

    #[test]
    fn witness_rays_are_distinct() {
        let rays = tmax_witness(&LatticePoint::from([1, 2]), 50).unwrap();
        let keys: HashSet<RayKey> = rays.iter().map(Ray::key).collect();
        assert_eq!(keys.len(), 50);
    }

    #[test]
    fn growth_is_increasing() {
        let radii: Vec<Radius> = (1..=6).map(rad).collect();
        let g = tmin_growth(&radii, 2).unwrap();
        assert!(g.windows(2).all(|w| w[0].count < w[1].count));
    }
}
