//! Rational rays: construction, canonical line keys, the `γ_z` families and
//! their slices.

use std::collections::BTreeMap;

use num_integer::{Integer, Roots};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{dot, primitive, Direction, LatticePoint};
use crate::radius::{Radius, Rational};

/// An unoriented line through a lattice point with a rational direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ray {
    pub base: LatticePoint,
    pub dir: Direction,
}

/// Line identity: two rays on the same line have equal keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RayKey {
    pub dir: Direction,
    pub reduced_base: LatticePoint,
}

impl Ray {
    pub fn new(base: LatticePoint, dir: Direction) -> Result<Self> {
        if base.dim() != dir.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: dir.dim(),
            });
        }
        Ok(Ray { base, dir })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Shifts the base to the lattice point `base − k·prim` with
    /// `0 ≤ base·prim < |prim|²`.
    pub fn key(&self) -> RayKey {
        let p = self.dir.prim();
        let k = Integer::div_floor(&self.base.dot(p), &self.dir.norm2());
        RayKey {
            dir: self.dir.clone(),
            reduced_base: self.base.add_scaled(p, -(k as i64)),
        }
    }

    /// Whether the lattice point lies on this line.
    pub fn contains(&self, y: &LatticePoint) -> bool {
        let diff = y.sub(&self.base);
        let p = self.dir.prim();
        // diff ∥ p  ⇔  |diff|²|p|² = (diff·p)²
        let dp = dot(&diff, p);
        dot(&diff, &diff) * self.dir.norm2() == dp * dp
    }
}

impl RayKey {
    pub fn ray(&self) -> Ray {
        Ray {
            base: self.reduced_base.clone(),
            dir: self.dir.clone(),
        }
    }
}

/// `Ξ_{a,b} = span{a, b}` for linearly independent integer vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Plane {
    a: Vec<i64>,
    b: Vec<i64>,
    aa: i128,
    ab: i128,
    bb: i128,
    det: i128,
}

/// `det(Gram) · z^{a,b}`, the scaled component of `z` orthogonal to the plane.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SliceKey(pub Vec<i128>);

impl Plane {
    pub fn new(a: Vec<i64>, b: Vec<i64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        if a.len() < 2 {
            return Err(Error::InvalidDimension(a.len()));
        }
        let aa = dot(&a, &a);
        let ab = dot(&a, &b);
        let bb = dot(&b, &b);
        let det = aa * bb - ab * ab;
        if det <= 0 {
            return Err(Error::DependentPlane);
        }
        Ok(Plane { a, b, aa, ab, bb, det })
    }

    /// `span{e_1, e_2}`.
    pub fn standard(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let mut a = vec![0; d];
        let mut b = vec![0; d];
        a[0] = 1;
        b[1] = 1;
        Plane::new(a, b)
    }

    pub fn a(&self) -> &[i64] {
        &self.a
    }

    pub fn b(&self) -> &[i64] {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn gram(&self) -> [[i128; 2]; 2] {
        [[self.aa, self.ab], [self.ab, self.bb]]
    }

    pub fn det(&self) -> i128 {
        self.det
    }

    pub fn is_standard(&self) -> bool {
        self.aa == 1 && self.bb == 1 && self.ab == 0 && self.a[0] == 1 && self.b[1] == 1
    }

    /// `det · |z_{a,b}|²`, an integer.
    pub fn in_plane_norm2_num(&self, z: &[i64]) -> i128 {
        let za = dot(z, &self.a);
        let zb = dot(z, &self.b);
        self.bb * za * za - 2 * self.ab * za * zb + self.aa * zb * zb
    }

    /// `|z_{a,b}|²` as an exact rational with denominator dividing `det`.
    pub fn in_plane_norm2(&self, z: &LatticePoint) -> Rational {
        Rational::new(self.in_plane_norm2_num(z.coords()), self.det)
    }

    /// `|u_{a,b}|²` for a rational vector `u`.
    pub fn in_plane_norm2_rational(&self, u: &[Rational]) -> Rational {
        let dot_r = |v: &[i64]| {
            u.iter()
                .zip(v)
                .fold(Rational::zero(), |acc, (x, &y)| acc + x * Rational::from(y as i128))
        };
        let ua = dot_r(&self.a);
        let ub = dot_r(&self.b);
        (Rational::from(self.bb) * ua * ua - Rational::from(2 * self.ab) * ua * ub
            + Rational::from(self.aa) * ub * ub)
            / Rational::from(self.det)
    }

    pub fn slice_key(&self, z: &LatticePoint) -> SliceKey {
        let za = dot(z.coords(), &self.a);
        let zb = dot(z.coords(), &self.b);
        let ca = self.bb * za - self.ab * zb;
        let cb = self.aa * zb - self.ab * za;
        SliceKey(
            z.coords()
                .iter()
                .zip(self.a.iter().zip(&self.b))
                .map(|(&zi, (&ai, &bi))| self.det * zi as i128 - ca * ai as i128 - cb * bi as i128)
                .collect(),
        )
    }

    /// Whether the integer vector lies in `span{a, b}`.
    pub fn contains_vector(&self, v: &[i64]) -> bool {
        self.slice_key(&LatticePoint::new(v.to_vec())).0.iter().all(|&c| c == 0)
    }
}

/// `γ_z` of the standard family: through `z`, direction `(−z_2, z_1, 0, …)`;
/// direction `e_1` when `z_1 = z_2 = 0`.
pub fn gamma_z(z: &LatticePoint) -> Result<Ray> {
    let d = z.dim();
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let c = z.coords();
    let dir = if c[0] == 0 && c[1] == 0 {
        Direction::axis(d, 0)
    } else {
        let mut v = vec![0; d];
        v[0] = -c[1];
        v[1] = c[0];
        primitive(&v)?
    };
    Ok(Ray { base: z.clone(), dir })
}

/// `γ_z` for lines parallel to `Ξ_{a,b}`: direction `−(z·b)a + (z·a)b`, or the
/// primitive of `a` when `z ⊥ a, b`.
pub fn gamma_z_plane(z: &LatticePoint, plane: &Plane) -> Result<Ray> {
    if z.dim() != plane.dim() {
        return Err(Error::DimensionMismatch {
            expected: plane.dim(),
            found: z.dim(),
        });
    }
    let za = z.dot(plane.a());
    let zb = z.dot(plane.b());
    let dir = if za == 0 && zb == 0 {
        primitive(plane.a())?
    } else {
        let v: Vec<i128> = plane
            .a()
            .iter()
            .zip(plane.b())
            .map(|(&ai, &bi)| -zb * ai as i128 + za * bi as i128)
            .collect();
        let g = v.iter().fold(0i128, |g, c| g.gcd(c));
        let v: Vec<i64> = v
            .iter()
            .map(|&c| i64::try_from(c / g).map_err(|_| Error::InvalidArgument("direction overflow".into())))
            .collect::<Result<_>>()?;
        primitive(&v)?
    };
    assert_eq!(
        z.dot(dir.prim()),
        0,
        "γ_z direction must be orthogonal to z"
    );
    Ok(Ray { base: z.clone(), dir })
}

/// Lattice points `base + k·prim` with `|point − center|² ≤ r²`, ordered by `k`.
pub fn lattice_points_on_ray(ray: &Ray, r: &Radius, center: &LatticePoint) -> Vec<LatticePoint> {
    let bound = r.squared().numer().div_euclid(*r.squared().denom());
    points_on_line_within(ray, center, bound)
}

/// Same as [`lattice_points_on_ray`] with an integer bound on the squared
/// distance (integer norms make `≤ r²` equivalent to `≤ floor(r²)`).
pub(crate) fn points_on_line_within(ray: &Ray, center: &LatticePoint, bound: i128) -> Vec<LatticePoint> {
    let p = ray.dir.prim();
    let rel = ray.base.sub(center);
    let a = ray.dir.norm2();
    let b = dot(&rel, p);
    let c = dot(&rel, &rel);
    // a k² + 2 b k + c ≤ bound
    let disc = b * b - a * (c - bound);
    if disc < 0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    let lo = Integer::div_floor(&(-b - s - 1), &a);
    let hi = Integer::div_ceil(&(-b + s + 1), &a);
    (lo..=hi)
        .filter(|&k| a * k * k + 2 * b * k + c <= bound)
        .map(|k| ray.base.add_scaled(p, k as i64))
        .collect()
}

/// One ray per point: `γ_z`, or its plane-parallel variant.
pub fn family_tstar(points: &[LatticePoint], plane: Option<&Plane>) -> Result<Vec<(LatticePoint, Ray)>> {
    points
        .iter()
        .map(|z| {
            let ray = match plane {
                Some(pl) => gamma_z_plane(z, pl)?,
                None => gamma_z(z)?,
            };
            Ok((z.clone(), ray))
        })
        .collect()
}

/// Points of `B_r ∩ ℤ^d` whose in-plane norm lies in `[α, β]`.
pub fn annulus_points(
    d: usize,
    r: &Radius,
    alpha: &Radius,
    beta: &Radius,
    plane: &Plane,
) -> Result<Vec<LatticePoint>> {
    if alpha > beta {
        return Err(Error::InvalidArgument(format!("annulus bounds {alpha} > {beta}")));
    }
    let ball = crate::lattice::enumerate_ball(d, r, &LatticePoint::origin(d))?;
    Ok(ball
        .into_iter()
        .filter(|z| in_annulus(&plane.in_plane_norm2(z), alpha, beta))
        .collect())
}

pub(crate) fn in_annulus(n2: &Rational, alpha: &Radius, beta: &Radius) -> bool {
    n2 >= alpha.squared() && beta.contains_rational_norm2(n2)
}

/// Groups points by the two-dimensional slice `Ξ_{a,b} + x_0` containing them.
pub fn group_slices(points: &[LatticePoint], plane: &Plane) -> BTreeMap<SliceKey, Vec<LatticePoint>> {
    let mut out: BTreeMap<SliceKey, Vec<LatticePoint>> = BTreeMap::new();
    for z in points {
        out.entry(plane.slice_key(z)).or_default().push(z.clone());
    }
    out
}

/// `|prim|² > 4r²`: every line with this direction meets `B_r ∩ ℤ^d` at most once.
pub fn effectively_irrational(theta: &Direction, r: &Radius) -> bool {
    let four_r2 = r.squared() * Rational::from(4);
    Rational::from(theta.norm2()) > four_r2
}
