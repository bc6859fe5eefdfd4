//! Integer-lattice primitives: points, primitive directions, balls, shells and
//! Farey sets.

use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::radius::{Radius, Rational};
use crate::rays::Plane;

/// A point of `ℤ^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn origin(d: usize) -> Self {
        LatticePoint(vec![0; d])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm2(&self) -> i128 {
        self.0.iter().map(|&c| (c as i128) * (c as i128)).sum()
    }

    pub fn dot(&self, v: &[i64]) -> i128 {
        dot(&self.0, v)
    }

    pub fn add_scaled(&self, v: &[i64], k: i64) -> LatticePoint {
        LatticePoint(self.0.iter().zip(v).map(|(&a, &b)| a + k * b).collect())
    }

    pub fn sub(&self, other: &LatticePoint) -> Vec<i64> {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect()
    }

    pub fn translate(&self, t: &[i64]) -> LatticePoint {
        self.add_scaled(t, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(v: [i64; N]) -> Self {
        LatticePoint(v.to_vec())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| (x as i128) * (y as i128)).sum()
}

/// A rational direction, stored as its primitive integer representative with
/// the first nonzero entry positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    prim: Vec<i64>,
}

impl Direction {
    /// Accepts `v` only if it is already primitive and sign-canonical.
    pub fn from_canonical(v: Vec<i64>) -> Result<Self> {
        let d = primitive(&v)?;
        if d.prim != v {
            return Err(Error::InvalidArgument(format!(
                "{v:?} is not a canonical primitive vector"
            )));
        }
        Ok(d)
    }

    pub fn prim(&self) -> &[i64] {
        &self.prim
    }

    pub fn dim(&self) -> usize {
        self.prim.len()
    }

    pub fn norm2(&self) -> i128 {
        dot(&self.prim, &self.prim)
    }

    pub fn axis(d: usize, i: usize) -> Self {
        let mut prim = vec![0; d];
        prim[i] = 1;
        Direction { prim }
    }

    /// `θ ∈ Ω_ρ`, i.e. `|prim|² ≤ ρ²`.
    pub fn in_omega_rho(&self, rho: &Radius) -> bool {
        rho.contains_norm2(self.norm2())
    }
}

/// Divides `z` by the gcd of its entries and flips the sign so the first
/// nonzero entry is positive.
pub fn primitive(z: &[i64]) -> Result<Direction> {
    let g = z.iter().fold(0i64, |g, &c| g.gcd(&c));
    if g == 0 {
        return Err(Error::ZeroVector);
    }
    let first = z.iter().copied().find(|&c| c != 0).unwrap_or(1);
    let s = if first < 0 { -g } else { g };
    Ok(Direction {
        prim: z.iter().map(|&c| c / s).collect(),
    })
}

/// All `z ∈ ℤ^d` with `|z − center|² ≤ r²`, in lexicographic order.
pub fn enumerate_ball(d: usize, r: &Radius, center: &LatticePoint) -> Result<Vec<LatticePoint>> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if center.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: center.dim(),
        });
    }
    let bound = r.floor();
    let mut out = Vec::new();
    let mut offset = vec![0i64; d];
    fn rec(
        i: usize,
        acc: i128,
        bound: i64,
        r: &Radius,
        offset: &mut Vec<i64>,
        center: &LatticePoint,
        out: &mut Vec<LatticePoint>,
    ) {
        if i == offset.len() {
            out.push(center.translate(offset));
            return;
        }
        for c in -bound..=bound {
            let next = acc + (c as i128) * (c as i128);
            if !r.contains_norm2(next) {
                continue;
            }
            offset[i] = c;
            rec(i + 1, next, bound, r, offset, center, out);
        }
    }
    rec(0, 0, bound, r, &mut offset, center, &mut out);
    Ok(out)
}

/// `N_r = #(B_r ∩ ℤ^d)`, counted without materializing the points.
pub fn ball_count(d: usize, r: &Radius) -> u64 {
    fn rec(left: usize, acc: i128, bound: i64, r: &Radius) -> u64 {
        if left == 0 {
            return 1;
        }
        (-bound..=bound)
            .filter_map(|c| {
                let next = acc + (c as i128) * (c as i128);
                r.contains_norm2(next).then(|| rec(left - 1, next, bound, r))
            })
            .sum()
    }
    rec(d, 0, r.floor(), r)
}

/// Points grouped by exact squared distance, outermost group first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShellDecomposition {
    shells: Vec<Vec<LatticePoint>>,
    norms2: Vec<Rational>,
}

impl ShellDecomposition {
    pub fn shells(&self) -> &[Vec<LatticePoint>] {
        &self.shells
    }

    pub fn norms2(&self) -> &[Rational] {
        &self.norms2
    }

    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &[LatticePoint])> {
        self.norms2.iter().zip(self.shells.iter().map(Vec::as_slice))
    }
}

/// Squared distance from `z` to `origin`, measured inside `plane` when given.
pub fn shell_norm2(z: &LatticePoint, origin: &[Rational], plane: Option<&Plane>) -> Rational {
    let u: Vec<Rational> = z
        .coords()
        .iter()
        .zip(origin)
        .map(|(&c, o)| Rational::from(c as i128) - o)
        .collect();
    match plane {
        None => u.iter().fold(Rational::zero(), |acc, x| acc + x * x),
        Some(p) => p.in_plane_norm2_rational(&u),
    }
}

/// Groups `points` into shells of equal squared (in-plane) distance to
/// `origin`, ordered by strictly decreasing distance. Within a shell points
/// are kept in lexicographic order.
pub fn build_shells(
    points: &[LatticePoint],
    origin: &[Rational],
    plane: Option<&Plane>,
) -> Result<ShellDecomposition> {
    if let Some(z) = points.iter().find(|z| z.dim() != origin.len()) {
        return Err(Error::DimensionMismatch {
            expected: origin.len(),
            found: z.dim(),
        });
    }
    if let Some(p) = plane {
        if p.dim() != origin.len() {
            return Err(Error::DimensionMismatch {
                expected: origin.len(),
                found: p.dim(),
            });
        }
    }
    let mut keyed: Vec<(Rational, &LatticePoint)> = points
        .iter()
        .map(|z| (shell_norm2(z, origin, plane), z))
        .collect();
    keyed.sort_by(|(na, za), (nb, zb)| nb.cmp(na).then_with(|| za.cmp(zb)));
    let mut dec = ShellDecomposition::default();
    for (n, z) in keyed {
        if dec.norms2.last() != Some(&n) {
            dec.norms2.push(n);
            dec.shells.push(Vec::new());
        }
        dec.shells.last_mut().expect("shell pushed above").push(z.clone());
    }
    Ok(dec)
}

/// A Farey point `p / q` with `p ∈ [0, q)^{d−1}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FareyPoint {
    pub p: Vec<i64>,
    pub q: i64,
}

impl FareyPoint {
    pub fn value(&self) -> Vec<Rational> {
        self.p
            .iter()
            .map(|&pi| Rational::new(pi as i128, self.q as i128))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FareySet {
    pub n: u64,
    pub d: usize,
    pub points: Vec<FareyPoint>,
}

/// Farey points of level `n`, sorted by value. Only `d = 2` materializes the
/// set; higher dimensions are available through [`farey_count`].
pub fn farey_set(n: u64, d: usize) -> Result<FareySet> {
    check_farey_args(n, d)?;
    if d != 2 {
        return Err(Error::Unsupported(
            "Farey point sets are only materialized for d = 2; use farey_count".into(),
        ));
    }
    let n_i = n as i64;
    let mut points: Vec<FareyPoint> = (1..=n_i)
        .flat_map(|q| {
            (0..q)
                .filter(move |p| p.gcd(&q) == 1)
                .map(move |p| FareyPoint { p: vec![p], q })
        })
        .collect();
    points.sort_by(|a, b| ((a.p[0] as i128) * (b.q as i128)).cmp(&((b.p[0] as i128) * (a.q as i128))));
    Ok(FareySet { n, d, points })
}

/// `#F_n`, by direct enumeration of `(p, q)` with `gcd(p_1, …, p_{d−1}, q) = 1`.
pub fn farey_count(n: u64, d: usize) -> Result<u64> {
    check_farey_args(n, d)?;
    let k = d - 1;
    if (n as f64).powi(d as i32) > 1e12 {
        return Err(Error::BudgetExceeded(format!(
            "enumerating Farey points of level {n} in dimension {d}"
        )));
    }
    let mut total = 0u64;
    let mut p = vec![0i64; k];
    for q in 1..=n as i64 {
        // Odometer over p ∈ [0, q)^k, tracking gcd with q incrementally.
        p.iter_mut().for_each(|c| *c = 0);
        loop {
            let g = p.iter().fold(q, |g, &c| g.gcd(&c));
            if g == 1 {
                total += 1;
            }
            let mut i = 0;
            while i < k {
                p[i] += 1;
                if p[i] < q {
                    break;
                }
                p[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    Ok(total)
}

fn check_farey_args(n: u64, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("Farey level must be at least 1".into()));
    }
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Radius {
        Radius::from_integer(n).unwrap()
    }

    #[test]
    fn ball_examples() {
        let o = LatticePoint::origin(2);
        assert_eq!(enumerate_ball(2, &r(0), &o).unwrap(), vec![o.clone()]);
        assert_eq!(enumerate_ball(2, &r(1), &o).unwrap().len(), 5);
        assert_eq!(enumerate_ball(2, &r(2), &o).unwrap().len(), 13);
        assert_eq!(ball_count(2, &r(2)), 13);
        assert_eq!(ball_count(2, &r(10)), 317);
    }

    #[test]
    fn ball_is_lexicographic_and_centered() {
        let c = LatticePoint::from([3, -4]);
        let pts = enumerate_ball(2, &r(3), &c).unwrap();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts.iter().all(|p| LatticePoint::new(p.sub(&c)).norm2() <= 9));
        assert_eq!(pts.len(), 29);
    }

    #[test]
    fn ball_errors() {
        assert_eq!(
            enumerate_ball(3, &r(1), &LatticePoint::origin(2)),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
        assert_eq!(
            enumerate_ball(1, &r(1), &LatticePoint::origin(1)),
            Err(Error::InvalidDimension(1))
        );
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(primitive(&[2, 4]).unwrap().prim(), &[1, 2]);
        assert_eq!(primitive(&[0, 3]).unwrap().prim(), &[0, 1]);
        assert_eq!(primitive(&[-2, -2]).unwrap().prim(), &[1, 1]);
        assert_eq!(primitive(&[0, -6, 4]).unwrap().prim(), &[0, 3, -2]);
        assert_eq!(primitive(&[0, 0]), Err(Error::ZeroVector));
    }

    #[test]
    fn omega_rho_examples() {
        let t = |v: &[i64]| primitive(v).unwrap();
        assert!(t(&[1, 1]).in_omega_rho(&r(2)));
        assert!(!t(&[3, 4]).in_omega_rho(&r(4)));
        assert!(t(&[3, 4]).in_omega_rho(&r(5)));
    }

    #[test]
    fn shells_of_small_balls() {
        let origin = vec![Rational::zero(); 2];
        let pts = enumerate_ball(2, &r(2), &LatticePoint::origin(2)).unwrap();
        let dec = build_shells(&pts, &origin, None).unwrap();
        let sizes: Vec<usize> = dec.shells().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![4, 4, 4, 1]);
        let norms: Vec<Rational> = [4, 2, 1, 0].iter().map(|&n| Rational::from(n)).collect();
        assert_eq!(dec.norms2(), norms.as_slice());

        let pts = enumerate_ball(2, &r(1), &LatticePoint::origin(2)).unwrap();
        let dec = build_shells(&pts, &origin, None).unwrap();
        assert_eq!(dec.len(), 2);
        assert_eq!(
            dec.shells()[0],
            vec![
                LatticePoint::from([-1, 0]),
                LatticePoint::from([0, -1]),
                LatticePoint::from([0, 1]),
                LatticePoint::from([1, 0]),
            ]
        );
        assert_eq!(dec.shells()[1], vec![LatticePoint::origin(2)]);

        let one = build_shells(&[LatticePoint::from([5, 5])], &origin, None).unwrap();
        assert_eq!(one.len(), 1);
        assert!(build_shells(&[], &origin, None).unwrap().is_empty());
    }

    #[test]
    fn shells_with_rational_origin() {
        let origin = vec![Rational::new(1, 2), Rational::zero()];
        let pts = vec![LatticePoint::from([0, 0]), LatticePoint::from([1, 0])];
        let dec = build_shells(&pts, &origin, None).unwrap();
        assert_eq!(dec.len(), 1);
        assert_eq!(dec.norms2()[0], Rational::new(1, 4));
    }

    #[test]
    fn farey_examples() {
        let f1 = farey_set(1, 2).unwrap();
        assert_eq!(f1.points, vec![FareyPoint { p: vec![0], q: 1 }]);
        let f3 = farey_set(3, 2).unwrap();
        let vals: Vec<Rational> = f3.points.iter().map(|p| p.value()[0]).collect();
        assert_eq!(
            vals,
            vec![Rational::zero(), Rational::new(1, 3), Rational::new(1, 2), Rational::new(2, 3)]
        );
        assert_eq!(farey_count(1, 2).unwrap(), 1);
        assert_eq!(farey_count(3, 2).unwrap(), 4);
        assert!(farey_set(0, 2).is_err());
        assert!(farey_count(0, 2).is_err());
        assert!(matches!(farey_set(3, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn farey_count_three_dims_small() {
        // Level 2: q=1 → (0,0); q=2 → pairs in {0,1}² with gcd(p1,p2,2)=1: (0,1),(1,0),(1,1).
        assert_eq!(farey_count(2, 3).unwrap(), 4);
    }
}
