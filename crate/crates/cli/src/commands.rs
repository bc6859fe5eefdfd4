//! In-memory versions of the subcommands. The binary wraps these with file
//! input and output.

use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use lxray_core::continuum::{forward_family_continuous, iterate_recon, layer_recon, CellField};
use lxray_core::counting::{canonical_directions, CountReport, FareyReport, SeparationReport};
use lxray_core::lattice::enumerate_ball;
use lxray_core::recon::recon_one_point;
use lxray_core::rays::effectively_irrational;
use lxray_core::transform::{forward_family, forward_family_weighted, FamilyKind};
use lxray_core::{
    Direction, FamilyDescriptor, GridFunction, LatticePoint, Plane, Radius, Ray, ReconPlan, Sinogram, WeightModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::files::{dirs_to_map, DirEntry, SinogramFile};
use crate::Precondition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PhantomKind {
    /// 1 at the origin.
    Point,
    /// 1 within radius 5r/8, 0 elsewhere in the ball.
    Disc,
    /// +1 where the coordinate sum is even, −1 where it is odd.
    Checker,
    /// Seeded integers in [−9, 9].
    RandomInt,
}

pub fn phantom(kind: PhantomKind, d: usize, r: &Radius, seed: u64) -> Result<GridFunction> {
    Ok(match kind {
        PhantomKind::Point => {
            let mut f = GridFunction::new(d, r.clone())?;
            f.insert(LatticePoint::origin(d), 1.0)?;
            f
        }
        PhantomKind::Disc => {
            let inner = r.scaled(5, 8)?;
            GridFunction::from_fn(d, r.clone(), |z| if inner.contains_norm2(z.norm2()) { 1.0 } else { 0.0 })?
        }
        PhantomKind::Checker => GridFunction::from_fn(d, r.clone(), |z| {
            if z.coords().iter().sum::<i64>().rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            }
        })?,
        PhantomKind::RandomInt => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            GridFunction::from_fn(d, r.clone(), |_| rng.gen_range(-9i32..=9) as f64)?
        }
    })
}

/// `const:C` or `cell-chord`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Const(f64),
    CellChord,
}

impl FromStr for WeightSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "cell-chord" {
            return Ok(WeightSpec::CellChord);
        }
        let c = s
            .strip_prefix("const:")
            .ok_or_else(|| format!("weight {s:?} must be const:C or cell-chord"))?;
        c.parse::<f64>()
            .map(WeightSpec::Const)
            .map_err(|e| format!("weight constant {c:?}: {e}"))
    }
}

impl WeightSpec {
    pub fn model(&self) -> Result<WeightModel> {
        Ok(match self {
            WeightSpec::Const(c) => WeightModel::constant(*c)?,
            WeightSpec::CellChord => WeightModel::CellChord,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FamilyChoice {
    Tstar,
    TstarPlane,
    Annulus,
    Free,
}

#[derive(Clone, Debug, Default)]
pub struct FamilyOptions {
    pub a: Option<Vec<i64>>,
    pub b: Option<Vec<i64>>,
    pub alpha: Option<Radius>,
    pub beta: Option<Radius>,
    pub dirs: Option<Vec<DirEntry>>,
}

fn plane_from(a: &Option<Vec<i64>>, b: &Option<Vec<i64>>) -> Result<Option<Plane>> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some(Plane::new(a.clone(), b.clone())?)),
        (None, None) => Ok(None),
        _ => Err(Precondition("a plane needs both --a and --b".into()).into()),
    }
}

fn free_family(d: usize, dirs: &[DirEntry]) -> Result<Vec<(LatticePoint, Ray)>> {
    dirs_to_map(d, dirs)?
        .into_iter()
        .map(|(z, theta)| Ok((z.clone(), Ray::new(z, theta)?)))
        .collect()
}

pub fn forward(
    f: &GridFunction,
    family: FamilyChoice,
    opts: &FamilyOptions,
    weight: Option<&WeightSpec>,
    continuous: bool,
) -> Result<Sinogram> {
    let d = f.d();
    let r = f.support_radius().clone();
    let (rays, desc) = match family {
        FamilyChoice::Tstar => {
            let plan = ReconPlan::ball(d, r, None)?;
            (plan.family(), plan.descriptor())
        }
        FamilyChoice::TstarPlane => {
            let plane = plane_from(&opts.a, &opts.b)?
                .ok_or_else(|| Precondition("tstar-plane needs --a and --b".into()))?;
            let plan = ReconPlan::ball(d, r, Some(plane))?;
            (plan.family(), plan.descriptor())
        }
        FamilyChoice::Annulus => {
            let (alpha, beta) = match (&opts.alpha, &opts.beta) {
                (Some(a), Some(b)) => (a.clone(), b.clone()),
                _ => return Err(Precondition("annulus needs --alpha and --beta".into()).into()),
            };
            let plan = ReconPlan::annulus(d, r, alpha, beta, plane_from(&opts.a, &opts.b)?)?;
            (plan.family(), plan.descriptor())
        }
        FamilyChoice::Free => {
            let dirs = opts
                .dirs
                .as_ref()
                .ok_or_else(|| Precondition("free family needs --dirs".into()))?;
            let mut desc = FamilyDescriptor::free();
            desc.support_radius = Some(r);
            (free_family(d, dirs)?, desc)
        }
    };
    if continuous {
        if weight.is_some() {
            bail!(Precondition("--weight and --continuous are exclusive".into()));
        }
        return Ok(forward_family_continuous(&CellField::new(f.clone()), &rays, desc)?);
    }
    Ok(match weight {
        Some(w) => forward_family_weighted(f, &rays, &w.model()?, desc)?,
        None => forward_family(f, &rays, desc)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum InitChoice {
    /// Layer-by-layer approximation from continuous data.
    Layer,
    Zero,
}

#[derive(Clone, Debug, Default)]
pub struct ReconOptions {
    pub weight: Option<WeightSpec>,
    pub one_point: Option<Vec<DirEntry>>,
    pub iterate: Option<(usize, Option<InitChoice>)>,
}

/// Result of a reconstruction; `residuals` is filled when iterating.
#[derive(Clone, Debug)]
pub struct ReconOutput {
    pub f: GridFunction,
    pub residuals: Vec<f64>,
}

fn support_radius(g: &Sinogram, points: &[LatticePoint]) -> Result<Radius> {
    match &g.family().support_radius {
        Some(r) => Ok(r.clone()),
        None => {
            let m = points.iter().map(LatticePoint::norm2).max().unwrap_or(0);
            Ok(Radius::from_squared(m, 1)?)
        }
    }
}

/// Plan matching the family recorded in the sinogram file.
pub fn rebuild_plan(file: &SinogramFile, g: &Sinogram) -> Result<ReconPlan> {
    let points = file.points();
    let r = support_radius(g, &points)?;
    let family = g.family();
    let plane = match &family.kind {
        FamilyKind::Tstar => None,
        FamilyKind::TstarPlane(p) => Some(p.clone()),
        FamilyKind::Free => {
            bail!(Precondition("a free family needs --one-point to be inverted".into()))
        }
    };
    Ok(match &family.annulus {
        Some((alpha, beta)) => ReconPlan::annulus(g.d(), r, alpha.clone(), beta.clone(), plane)?,
        None => ReconPlan::tstar(g.d(), points, r, plane)?,
    })
}

pub fn recon(file: &SinogramFile, opts: &ReconOptions) -> Result<ReconOutput> {
    let g = file.to_sinogram()?;
    let w = opts.weight.as_ref().map(WeightSpec::model).transpose()?;
    if let Some(dirs) = &opts.one_point {
        let theta_of = dirs_to_map(g.d(), dirs)?;
        let points: Vec<LatticePoint> = theta_of.keys().cloned().collect();
        let r = support_radius(&g, &points)?;
        let f = recon_one_point(&g, &points, &theta_of, &r, w.as_ref())?;
        return Ok(ReconOutput { f, residuals: Vec::new() });
    }
    let plan = rebuild_plan(file, &g)?;
    if let Some((n, init)) = opts.iterate {
        if w.is_some() {
            bail!(Precondition("--iterate uses cell-chord weights; drop --weight".into()));
        }
        let f_init = match init.unwrap_or(InitChoice::Layer) {
            InitChoice::Layer => layer_recon(&g, &plan)?,
            InitChoice::Zero => GridFunction::new(plan.d(), plan.output_radius().clone())?,
        };
        let steps = iterate_recon(&g, &plan, &f_init, n)?;
        let residuals = steps.iter().map(|s| s.residual).collect();
        let f = steps.into_iter().last().map(|s| s.f).ok_or_else(|| anyhow!("no iterations"))?;
        return Ok(ReconOutput { f, residuals });
    }
    let f = match &w {
        Some(w) => lxray_core::recon_shells_weighted(&g, &plan, w)?,
        None => lxray_core::recon_shells(&g, &plan)?,
    };
    Ok(ReconOutput { f, residuals: Vec::new() })
}

pub fn residual_csv(residuals: &[f64]) -> String {
    let mut out = String::from("iteration,residual\n");
    for (i, r) in residuals.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, r));
    }
    out
}

pub fn grid_csv(f: &GridFunction) -> String {
    let mut out: String = (0..f.d()).map(|i| format!("z{i},")).collect();
    out.push_str("v\n");
    for (z, v) in f.iter() {
        for c in z.coords() {
            out.push_str(&format!("{c},"));
        }
        out.push_str(&format!("{v}\n"));
    }
    out
}

/// Canonical primitive directions that meet `B_r ∩ ℤ^d` in at most one
/// point per line, shortest first.
pub fn irrational_dirs(d: usize, r: &Radius, count: usize) -> Result<Vec<Direction>> {
    let mut reach = r.scaled(2, 1)?.floor() + 1;
    loop {
        let dirs: Vec<Direction> = canonical_directions(d, &Radius::from_integer(reach)?)?
            .into_iter()
            .map(|v| lxray_core::primitive(v.coords()).expect("nonzero"))
            .filter(|t| effectively_irrational(t, r))
            .collect();
        if dirs.len() >= count {
            let mut dirs = dirs;
            dirs.sort_by(|a, b| a.norm2().cmp(&b.norm2()).then_with(|| a.cmp(b)));
            dirs.truncate(count);
            return Ok(dirs);
        }
        reach *= 2;
    }
}

/// The same direction for every point of `B_r ∩ ℤ^d`.
pub fn uniform_dirs(d: usize, r: &Radius, dir: &Direction) -> Result<Vec<DirEntry>> {
    Ok(enumerate_ball(d, r, &LatticePoint::origin(d))?
        .into_iter()
        .map(|z| DirEntry {
            z: z.coords().to_vec(),
            dir: dir.prim().to_vec(),
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct CountReportJson {
    pub r: String,
    pub d: usize,
    pub count: u64,
    pub lower_bound: u64,
    pub upper_bound: u64,
    pub passed: bool,
}

impl From<&CountReport> for CountReportJson {
    fn from(c: &CountReport) -> Self {
        CountReportJson {
            r: c.r.to_string(),
            d: c.d,
            count: c.count,
            lower_bound: c.lower_bound,
            upper_bound: c.upper_bound,
            passed: c.passed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TminJson {
    pub r: String,
    pub d: usize,
    pub count: u64,
    pub through_origin: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FareyJson {
    pub n: u64,
    pub d: usize,
    pub count: u64,
    pub oracle: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub passed: bool,
}

impl From<&FareyReport> for FareyJson {
    fn from(f: &FareyReport) -> Self {
        FareyJson {
            n: f.n,
            d: 2,
            count: f.count,
            oracle: f.oracle.to_string(),
            ratio: Some(f.ratio),
            passed: f.count as u128 == f.oracle,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationJson {
    #[serde(rename = "R")]
    pub big_r: String,
    pub d: usize,
    pub checked: u64,
    pub equality_cases: u64,
    pub min_gap: Option<String>,
    pub passed: bool,
}

impl From<&SeparationReport> for SeparationJson {
    fn from(s: &SeparationReport) -> Self {
        SeparationJson {
            big_r: s.r.to_string(),
            d: s.d,
            checked: s.checked,
            equality_cases: s.equality_cases,
            min_gap: s.min_gap.map(|g| g.to_string()),
            passed: s.passed,
        }
    }
}
