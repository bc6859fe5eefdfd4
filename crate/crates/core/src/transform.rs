//! Forward transforms on lattice functions: the discrete X-ray transform, its
//! weighted form, and direction-wise binning of point masses.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Direction, LatticePoint};
use crate::radius::Radius;
use crate::rays::{lattice_points_on_ray, Plane, Ray, RayKey};

/// A real function on `ℤ^d` supported in the closed ball of radius `r`.
/// Points that are not stored read as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    d: usize,
    support_radius: Radius,
    values: BTreeMap<LatticePoint, f64>,
}

impl GridFunction {
    pub fn new(d: usize, support_radius: Radius) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(GridFunction {
            d,
            support_radius,
            values: BTreeMap::new(),
        })
    }

    /// Evaluates `f` at every point of the support ball.
    pub fn from_fn(d: usize, r: Radius, mut f: impl FnMut(&LatticePoint) -> f64) -> Result<Self> {
        let pts = crate::lattice::enumerate_ball(d, &r, &LatticePoint::origin(d))?;
        let mut g = GridFunction::new(d, r)?;
        for z in pts {
            let v = f(&z);
            g.values.insert(z, v);
        }
        Ok(g)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn support_radius(&self) -> &Radius {
        &self.support_radius
    }

    pub fn insert(&mut self, z: LatticePoint, v: f64) -> Result<()> {
        self.check_dim(z.dim())?;
        if !self.support_radius.contains_norm2(z.norm2()) {
            return Err(Error::OutsideSupport(z));
        }
        self.values.insert(z, v);
        Ok(())
    }

    pub fn get(&self, z: &LatticePoint) -> f64 {
        self.values.get(z).copied().unwrap_or(0.0)
    }

    pub fn stored(&self, z: &LatticePoint) -> Option<f64> {
        self.values.get(z).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, f64)> {
        self.values.iter().map(|(z, &v)| (z, v))
    }

    /// `α·self + β·other`, on the union of both supports.
    pub fn linear_combination(&self, alpha: f64, other: &GridFunction, beta: f64) -> Result<Self> {
        self.check_dim(other.d)?;
        let r = self.support_radius.clone().max(other.support_radius.clone());
        let mut out = GridFunction::new(self.d, r)?;
        for (z, v) in self.iter() {
            out.values.insert(z.clone(), alpha * v);
        }
        for (z, v) in other.iter() {
            *out.values.entry(z.clone()).or_insert(0.0) += beta * v;
        }
        Ok(out)
    }

    /// Largest pointwise difference, treating unstored points as zero.
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .keys()
            .chain(other.values.keys())
            .map(|z| (self.get(z) - other.get(z)).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found,
            });
        }
        Ok(())
    }
}

/// Which ray family a sinogram was measured on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// `γ_z` of the standard family (lines parallel to `span{e_1, e_2}`).
    Tstar,
    /// `γ_z` for lines parallel to a general `Ξ_{a,b}`.
    TstarPlane(Plane),
    /// Arbitrary rays.
    Free,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyDescriptor {
    pub kind: FamilyKind,
    /// `(α, β)` when the family is restricted to an annulus.
    pub annulus: Option<(Radius, Radius)>,
    /// Support radius of the function the data was taken from, when known.
    pub support_radius: Option<Radius>,
}

impl FamilyDescriptor {
    pub fn tstar(support_radius: Radius) -> Self {
        FamilyDescriptor {
            kind: FamilyKind::Tstar,
            annulus: None,
            support_radius: Some(support_radius),
        }
    }

    pub fn free() -> Self {
        FamilyDescriptor {
            kind: FamilyKind::Free,
            annulus: None,
            support_radius: None,
        }
    }

    pub fn plane(&self) -> Option<&Plane> {
        match &self.kind {
            FamilyKind::TstarPlane(p) => Some(p),
            _ => None,
        }
    }
}

/// Transform values indexed by line, plus the point-to-line association of
/// the family they were measured on.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    d: usize,
    family: FamilyDescriptor,
    entries: BTreeMap<RayKey, f64>,
    assoc: BTreeMap<LatticePoint, RayKey>,
}

impl Sinogram {
    pub fn new(d: usize, family: FamilyDescriptor) -> Self {
        Sinogram {
            d,
            family,
            entries: BTreeMap::new(),
            assoc: BTreeMap::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn family(&self) -> &FamilyDescriptor {
        &self.family
    }

    pub fn set_family(&mut self, family: FamilyDescriptor) {
        self.family = family;
    }

    /// Stores `v` for the line of `ray`; `z`, when given, records which point
    /// the ray was assigned to.
    pub fn insert(&mut self, z: Option<LatticePoint>, ray: &Ray, v: f64) {
        let key = ray.key();
        if let Some(z) = z {
            self.assoc.insert(z, key.clone());
        }
        self.entries.insert(key, v);
    }

    pub fn get(&self, key: &RayKey) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub fn value_on(&self, ray: &Ray) -> Option<f64> {
        self.get(&ray.key())
    }

    pub fn entries(&self) -> &BTreeMap<RayKey, f64> {
        &self.entries
    }

    /// Point-to-line association, in lexicographic point order.
    pub fn assoc(&self) -> &BTreeMap<LatticePoint, RayKey> {
        &self.assoc
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub type WeightFn = dyn Fn(&LatticePoint, &Direction) -> f64 + Send + Sync;

/// Weight `W(y, θ)` of the weighted transform. It must not vanish at any
/// point where it is evaluated.
#[derive(Clone)]
pub enum WeightModel {
    Constant(f64),
    Table(HashMap<(LatticePoint, Direction), f64>),
    /// `|γ ∩ 𝒰_y|`, the chord of the line through `y` with direction `θ` in
    /// the unit cell centred at `y`.
    CellChord,
    Custom(Arc<WeightFn>),
}

impl fmt::Debug for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightModel::Constant(c) => write!(f, "Constant({c})"),
            WeightModel::Table(t) => write!(f, "Table({} entries)", t.len()),
            WeightModel::CellChord => write!(f, "CellChord"),
            WeightModel::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl WeightModel {
    pub fn constant(c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("constant weight {c} must be finite and nonzero")));
        }
        Ok(WeightModel::Constant(c))
    }

    pub fn custom(f: impl Fn(&LatticePoint, &Direction) -> f64 + Send + Sync + 'static) -> Self {
        WeightModel::Custom(Arc::new(f))
    }

    pub fn eval(&self, y: &LatticePoint, theta: &Direction) -> Result<f64> {
        let w = match self {
            WeightModel::Constant(c) => *c,
            WeightModel::Table(t) => *t
                .get(&(y.clone(), theta.clone()))
                .ok_or_else(|| Error::MissingWeight(y.clone()))?,
            WeightModel::CellChord => crate::continuum::cell_chord(
                &Ray {
                    base: y.clone(),
                    dir: theta.clone(),
                },
                y,
            ),
            WeightModel::Custom(f) => f(y, theta),
        };
        if w == 0.0 || !w.is_finite() {
            return Err(Error::ZeroWeight(y.clone()));
        }
        Ok(w)
    }
}

fn check_ray(f: &GridFunction, ray: &Ray) -> Result<()> {
    f.check_dim(ray.dim())
}

/// Supported points of `f` on the line, in order along it.
fn support_on_ray(f: &GridFunction, ray: &Ray) -> Vec<LatticePoint> {
    lattice_points_on_ray(ray, &f.support_radius, &LatticePoint::origin(f.d))
}

/// `Σ_{y ∈ γ ∩ ℤ^d} f(y)`.
pub fn forward(f: &GridFunction, ray: &Ray) -> Result<f64> {
    check_ray(f, ray)?;
    Ok(support_on_ray(f, ray).iter().map(|y| f.get(y)).sum())
}

/// `Σ_{y ∈ γ ∩ ℤ^d} W(y, γ̂) f(y)`. The weight is evaluated at every stored
/// point of `f` on the line.
pub fn forward_weighted(f: &GridFunction, ray: &Ray, w: &WeightModel) -> Result<f64> {
    check_ray(f, ray)?;
    let mut acc = 0.0;
    for y in support_on_ray(f, ray) {
        if let Some(v) = f.stored(&y) {
            acc += w.eval(&y, &ray.dir)? * v;
        }
    }
    Ok(acc)
}

/// Evaluates `per_ray` on every ray of the family in parallel and assembles
/// the sinogram in key order.
pub fn project_family(
    d: usize,
    family: &[(LatticePoint, Ray)],
    descriptor: FamilyDescriptor,
    per_ray: impl Fn(&Ray) -> Result<f64> + Sync,
) -> Result<Sinogram> {
    let values: Vec<f64> = family
        .par_iter()
        .map(|(_, ray)| per_ray(ray))
        .collect::<Result<_>>()?;
    let mut s = Sinogram::new(d, descriptor);
    for ((z, ray), v) in family.iter().zip(values) {
        s.insert(Some(z.clone()), ray, v);
    }
    Ok(s)
}

/// Discrete transform of `f` on every ray of the family.
pub fn forward_family(
    f: &GridFunction,
    family: &[(LatticePoint, Ray)],
    descriptor: FamilyDescriptor,
) -> Result<Sinogram> {
    project_family(f.d, family, descriptor, |ray| forward(f, ray))
}

pub fn forward_family_weighted(
    f: &GridFunction,
    family: &[(LatticePoint, Ray)],
    w: &WeightModel,
    descriptor: FamilyDescriptor,
) -> Result<Sinogram> {
    project_family(f.d, family, descriptor, |ray| forward_weighted(f, ray, w))
}

/// Sums `f` over the classes of stored points that share a line of direction
/// `θ`. Each class is identified by the key of its line.
pub fn project_and_bin(f: &GridFunction, theta: &Direction) -> Result<BTreeMap<RayKey, f64>> {
    f.check_dim(theta.dim())?;
    let mut bins: BTreeMap<RayKey, f64> = BTreeMap::new();
    for (y, v) in f.iter() {
        let key = Ray {
            base: y.clone(),
            dir: theta.clone(),
        }
        .key();
        *bins.entry(key).or_insert(0.0) += v;
    }
    Ok(bins)
}
