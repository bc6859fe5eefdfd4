//! Continuous X-ray transform of piecewise-constant cell fields and of
//! disjoint-ball fields, and the reconstructions built on the discrete
//! inversion.
//!
//! A cell field is `f(x) = Σ_ζ f_dis(ζ) χ_ζ(x)`, where `χ_ζ` is the indicator
//! of the unit cube centred at `ζ`. Along a lattice line `γ`, the continuous
//! transform splits into the weighted discrete transform with chord weights
//! `W(ζ, γ̂) = |γ ∩ 𝒰_ζ|` plus the contribution of cells off the line:
//!
//! ```text
//! P_W f_dis(γ) = P f(γ) − Σ_{ζ ∉ γ} f_dis(ζ) |γ ∩ 𝒰_ζ|
//! ```

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{dot, LatticePoint};
use crate::rays::{gamma_z, Ray, SliceKey};
use crate::recon::{recon_shells_weighted, ReconPlan};
use crate::transform::{forward_weighted, project_family, FamilyDescriptor, GridFunction, Sinogram, WeightModel};

/// Length of the intersection of the line with the closed unit cube centred
/// at `cell`, by slab clipping.
pub fn cell_chord(ray: &Ray, cell: &LatticePoint) -> f64 {
    let p = ray.dir.prim();
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for ((&b, &c), &pi) in ray.base.coords().iter().zip(cell.coords()).zip(p) {
        let off = (c - b) as f64;
        if pi == 0 {
            if off.abs() > 0.5 {
                return 0.0;
            }
            continue;
        }
        let (a, z) = ((off - 0.5) / pi as f64, (off + 0.5) / pi as f64);
        let (a, z) = if a <= z { (a, z) } else { (z, a) };
        t_lo = t_lo.max(a);
        t_hi = t_hi.min(z);
    }
    if t_hi <= t_lo {
        return 0.0;
    }
    (t_hi - t_lo) * (ray.dir.norm2() as f64).sqrt()
}

/// Exact line parameter `num / den`, `den > 0`.
#[derive(Clone, Copy, Debug)]
struct Param {
    num: i128,
    den: i128,
}

impl Param {
    fn cmp(&self, o: &Param) -> Ordering {
        (self.num * o.den).cmp(&(o.num * self.den))
    }

    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Cells crossed by the line inside the ball of radius `reach` about the
/// origin, with their chord lengths, in order along the line. Zero-length
/// touches (corners, edges) are skipped.
pub fn traverse_cells(ray: &Ray, reach: f64) -> Vec<(LatticePoint, f64)> {
    let p = ray.dir.prim();
    let base = ray.base.coords();
    let pn2 = ray.dir.norm2() as f64;
    let pn = pn2.sqrt();
    let bp = dot(base, p) as f64;
    let bb = dot(base, base) as f64;
    let dist2 = (bb - bp * bp / pn2).max(0.0);
    let reach2 = reach * reach;
    if dist2 > reach2 {
        return Vec::new();
    }
    let t_mid = -bp / pn2;
    let half = (reach2 - dist2).sqrt() / pn;
    let (t_lo, t_hi) = (t_mid - half, t_mid + half);

    // Grid-plane crossings x_i = m + 1/2, i.e. t = (2m + 1 − 2 b_i) / (2 p_i).
    let mut cuts: Vec<Param> = Vec::new();
    for (&b, &pi) in base.iter().zip(p) {
        if pi == 0 {
            continue;
        }
        let x0 = b as f64 + pi as f64 * t_lo;
        let x1 = b as f64 + pi as f64 * t_hi;
        let (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
        let m_lo = (lo - 0.5).floor() as i64 - 1;
        let m_hi = (hi - 0.5).ceil() as i64 + 1;
        for m in m_lo..=m_hi {
            let (mut num, mut den) = ((2 * m + 1 - 2 * b) as i128, 2 * pi as i128);
            if den < 0 {
                num = -num;
                den = -den;
            }
            cuts.push(Param { num, den });
        }
    }
    cuts.sort_by(|a, b| a.cmp(b));
    cuts.dedup_by(|a, b| a.cmp(b) == Ordering::Equal);

    let mut out = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Midpoint t_m = (a.num·b.den + b.num·a.den) / (2·a.den·b.den).
        let num = a.num * b.den + b.num * a.den;
        let den = 2 * a.den * b.den;
        let cell: Vec<i64> = base
            .iter()
            .zip(p)
            .map(|(&bi, &pi)| {
                // round(b_i + p_i·num/den) = floor((2(b_i·den + p_i·num) + den) / (2·den))
                let x2 = 2 * (bi as i128 * den + pi as i128 * num) + den;
                Integer::div_floor(&x2, &(2 * den)) as i64
            })
            .collect();
        let len = (b.to_f64() - a.to_f64()) * pn;
        if len > 0.0 {
            out.push((LatticePoint::new(cell), len));
        }
    }
    out
}

/// `f(x) = Σ_ζ f_dis(ζ) χ_ζ(x)` with unit cells centred on lattice points.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    pub f_dis: GridFunction,
}

impl CellField {
    pub fn new(f_dis: GridFunction) -> Self {
        CellField { f_dis }
    }

    /// Radius beyond which no cell of the support reaches.
    pub fn reach(&self) -> f64 {
        reach_for(&self.f_dis)
    }
}

fn reach_for(f: &GridFunction) -> f64 {
    f.support_radius().to_f64() + (f.d() as f64).sqrt()
}

/// `∫_γ f` for a cell field.
pub fn forward_continuous(field: &CellField, ray: &Ray) -> Result<f64> {
    field.f_dis.check_dim(ray.dim())?;
    Ok(traverse_cells(ray, field.reach())
        .iter()
        .map(|(cell, len)| field.f_dis.get(cell) * len)
        .sum())
}

pub fn forward_family_continuous(
    field: &CellField,
    family: &[(LatticePoint, Ray)],
    descriptor: FamilyDescriptor,
) -> Result<Sinogram> {
    project_family(field.f_dis.d(), family, descriptor, |ray| forward_continuous(field, ray))
}

/// Both sides of the on-line/off-line split along `γ_z`:
/// `lhs = P_W f_dis(γ_z)` with chord weights, and
/// `rhs = P f(γ_z) − Σ_{ζ ∉ γ_z} f_dis(ζ) |γ_z ∩ 𝒰_ζ|`.
pub fn correction_identity_check(field: &CellField, z: &LatticePoint) -> Result<(f64, f64)> {
    let ray = gamma_z(z)?;
    let lhs = forward_weighted(&field.f_dis, &ray, &WeightModel::CellChord)?;
    let off_line: f64 = field
        .f_dis
        .iter()
        .filter(|(zeta, _)| !ray.contains(zeta))
        .map(|(zeta, v)| v * cell_chord(&ray, zeta))
        .sum();
    let rhs = forward_continuous(field, &ray)? - off_line;
    Ok((lhs, rhs))
}

/// One ball of a [`BallField`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub rho: f64,
    pub weight: f64,
    pub value: f64,
}

/// `f = Σ_z w_z f_dis(z) χ_{B(z, ρ_z)}` with disjoint balls centred on
/// lattice points.
#[derive(Clone, Debug, PartialEq)]
pub struct BallField {
    d: usize,
    balls: BTreeMap<LatticePoint, Ball>,
}

impl BallField {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(BallField {
            d,
            balls: BTreeMap::new(),
        })
    }

    /// Radii must lie in `(0, 1/2)`, which keeps lattice-centred balls disjoint.
    pub fn insert(&mut self, center: LatticePoint, ball: Ball) -> Result<()> {
        if center.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: center.dim(),
            });
        }
        if !(ball.rho > 0.0 && ball.rho < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "ball radius {} at {center} must lie in (0, 1/2)",
                ball.rho
            )));
        }
        if ball.weight == 0.0 {
            return Err(Error::ZeroWeight(center));
        }
        self.balls.insert(center, ball);
        Ok(())
    }

    pub fn balls(&self) -> &BTreeMap<LatticePoint, Ball> {
        &self.balls
    }
}

/// Squared distance from a lattice point to the line.
fn line_dist2(ray: &Ray, y: &LatticePoint) -> f64 {
    let diff = y.sub(&ray.base);
    let p = ray.dir.prim();
    let dp = dot(&diff, p);
    let num = dot(&diff, &diff) * ray.dir.norm2() - dp * dp;
    num as f64 / ray.dir.norm2() as f64
}

/// Whether every ball is either hit through its centre or missed.
pub fn in_t_double_prime(ray: &Ray, field: &BallField) -> bool {
    field.balls.iter().all(|(c, b)| {
        ray.contains(c) || line_dist2(ray, c) > b.rho * b.rho
    })
}

/// `∫_γ f = Σ_{y ∈ γ} 2ρ_y w_y f_dis(y)` for rays that meet each ball
/// centrally or not at all.
pub fn forward_balls(field: &BallField, ray: &Ray) -> Result<f64> {
    if ray.dim() != field.d {
        return Err(Error::DimensionMismatch {
            expected: field.d,
            found: ray.dim(),
        });
    }
    let mut acc = 0.0;
    for (c, b) in &field.balls {
        if ray.contains(c) {
            acc += 2.0 * b.rho * b.weight * b.value;
        } else if line_dist2(ray, c) <= b.rho * b.rho {
            return Err(Error::GrazingBall(c.clone()));
        }
    }
    Ok(acc)
}

fn plan_reach(plan: &ReconPlan) -> f64 {
    plan.support_radius().to_f64() + (plan.d() as f64).sqrt()
}

/// Layer-by-layer approximation `f_1`: the recursion of the discrete
/// inversion applied to continuous data, subtracting the chords of every
/// cell in earlier shells and dropping the rest.
pub fn layer_recon(g: &Sinogram, plan: &ReconPlan) -> Result<GridFunction> {
    let reach = plan_reach(plan);
    let plane = plan.plane();
    let in_plan: HashMap<&LatticePoint, SliceKey> =
        plan.points().iter().map(|z| (z, plane.slice_key(z))).collect();
    let per_slice: Vec<Vec<(LatticePoint, f64)>> = plan
        .slices()
        .par_iter()
        .map(|(slice, shells)| {
            let mut known: HashMap<LatticePoint, f64> = HashMap::new();
            let mut out = Vec::new();
            for (_, shell) in shells.iter() {
                let mut fresh = Vec::with_capacity(shell.len());
                for z in shell {
                    let ray = plan.ray(z).expect("plan has a ray per point");
                    let gz = g.value_on(ray).ok_or_else(|| Error::MissingEntry(z.clone()))?;
                    let nz = plane.in_plane_norm2_num(z.coords());
                    let mut acc = gz;
                    let mut wz = 0.0;
                    for (cell, len) in traverse_cells(ray, reach) {
                        if cell == *z {
                            wz = len;
                            continue;
                        }
                        let earlier = in_plan.get(&cell) == Some(slice)
                            && plane.in_plane_norm2_num(cell.coords()) > nz;
                        if earlier {
                            acc -= len * known.get(&cell).copied().unwrap_or(0.0);
                        }
                    }
                    if wz == 0.0 {
                        return Err(Error::ZeroWeight(z.clone()));
                    }
                    fresh.push((z.clone(), acc / wz));
                }
                for (z, v) in fresh {
                    known.insert(z.clone(), v);
                    out.push((z, v));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut f = GridFunction::new(plan.d(), plan.output_radius().clone())?;
    for (z, v) in per_slice.into_iter().flatten() {
        f.insert(z, v)?;
    }
    Ok(f)
}

/// One step of [`iterate_recon`].
#[derive(Clone, Debug)]
pub struct IterationStep {
    pub f: GridFunction,
    /// `‖g − P f‖₂` over the rays of the plan.
    pub residual: f64,
}

/// Data residual `‖g − P f‖₂` of a cell field over the plan's rays.
pub fn data_residual(g: &Sinogram, plan: &ReconPlan, f: &GridFunction) -> Result<f64> {
    let field = CellField::new(f.clone());
    let reach = plan_reach(plan).max(field.reach());
    let sq: Vec<f64> = plan
        .family()
        .par_iter()
        .map(|(z, ray)| {
            let gz = g.value_on(ray).ok_or_else(|| Error::MissingEntry(z.clone()))?;
            let model: f64 = traverse_cells(ray, reach)
                .iter()
                .map(|(c, len)| f.get(c) * len)
                .sum();
            Ok((gz - model) * (gz - model))
        })
        .collect::<Result<_>>()?;
    Ok(sq.iter().sum::<f64>().sqrt())
}

/// Iterative refinement: remove the off-line cell contributions predicted by
/// the current iterate, then invert the chord-weighted discrete transform
/// exactly.
pub fn iterate_recon(
    g: &Sinogram,
    plan: &ReconPlan,
    f_init: &GridFunction,
    iters: usize,
) -> Result<Vec<IterationStep>> {
    if iters == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    let family = plan.family();
    let mut current = f_init.clone();
    let mut steps = Vec::with_capacity(iters);
    for _ in 0..iters {
        let reach = plan_reach(plan).max(reach_for(&current));
        let corrected = project_family(plan.d(), &family, g.family().clone(), |ray| {
            let gz = g.value_on(ray).ok_or_else(|| Error::MissingEntry(ray.base.clone()))?;
            let off: f64 = traverse_cells(ray, reach)
                .iter()
                .filter(|(c, _)| !ray.contains(c))
                .map(|(c, len)| current.get(c) * len)
                .sum();
            Ok(gz - off)
        })?;
        let next = recon_shells_weighted(&corrected, plan, &WeightModel::CellChord)?;
        let residual = data_residual(g, plan, &next)?;
        steps.push(IterationStep {
            f: next.clone(),
            residual,
        });
        current = next;
    }
    Ok(steps)
}
