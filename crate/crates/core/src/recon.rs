//! Exact inversions of the discrete X-ray transform.
//!
//! The shell recursion works slice by slice. Inside a slice, points are
//! processed from the outermost shell inwards. The line `γ_z` meets the
//! support only in `z` and in points of strictly larger in-plane norm, which
//! have already been recovered:
//!
//! ```text
//! f(z) = W(z)⁻¹ ( g(γ_z) − Σ_{ζ ∈ γ_z, |ζ| > |z|} W(ζ) f(ζ) )
//! ```
//!
//! Each point consumes exactly one line, so the data used is never
//! overdetermined.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{build_shells, enumerate_ball, Direction, LatticePoint, ShellDecomposition};
use crate::radius::{Radius, Rational};
use crate::rays::{
    annulus_points, effectively_irrational, gamma_z, gamma_z_plane, group_slices,
    points_on_line_within, Plane, Ray, RayKey, SliceKey,
};
use crate::transform::{FamilyDescriptor, FamilyKind, GridFunction, Sinogram, WeightModel};

/// Target points, their `γ_z` rays and the shell structure of every slice.
#[derive(Clone, Debug)]
pub struct ReconPlan {
    d: usize,
    plane: Plane,
    support_radius: Radius,
    output_radius: Radius,
    points: Vec<LatticePoint>,
    slices: BTreeMap<SliceKey, ShellDecomposition>,
    rays: BTreeMap<LatticePoint, Ray>,
    annulus: Option<(Radius, Radius)>,
}

impl ReconPlan {
    /// Plan for the given points with support radius `r`. Without a plane the
    /// standard family (lines parallel to `span{e_1, e_2}`) is used.
    pub fn tstar(
        d: usize,
        points: Vec<LatticePoint>,
        support_radius: Radius,
        plane: Option<Plane>,
    ) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if let Some(z) = points.iter().find(|z| z.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: z.dim(),
            });
        }
        let explicit = plane.is_some();
        let plane = match plane {
            Some(p) if p.dim() != d => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                })
            }
            Some(p) => p,
            None => Plane::standard(d)?,
        };
        let mut unique = BTreeSet::new();
        for z in &points {
            if !unique.insert(z) {
                return Err(Error::PlanInconsistent(format!("duplicate plan point {z}")));
            }
        }
        let rays = points
            .iter()
            .map(|z| {
                let ray = if explicit {
                    gamma_z_plane(z, &plane)?
                } else {
                    gamma_z(z)?
                };
                Ok((z.clone(), ray))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        let zero = vec![Rational::from(0); d];
        let slices = group_slices(&points, &plane)
            .into_iter()
            .map(|(key, pts)| Ok((key, build_shells(&pts, &zero, Some(&plane))?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let max_norm2 = points.iter().map(LatticePoint::norm2).max().unwrap_or(0);
        let output_radius = if support_radius.contains_norm2(max_norm2) {
            support_radius.clone()
        } else {
            Radius::from_squared(max_norm2, 1)?
        };
        Ok(ReconPlan {
            d,
            plane,
            support_radius,
            output_radius,
            points,
            slices,
            rays,
            annulus: None,
        })
    }

    /// Plan over all of `B_r ∩ ℤ^d`.
    pub fn ball(d: usize, r: Radius, plane: Option<Plane>) -> Result<Self> {
        let pts = enumerate_ball(d, &r, &LatticePoint::origin(d))?;
        Self::tstar(d, pts, r, plane)
    }

    /// Plan over the points of `B_r` with in-plane norm in `[α, β]`.
    /// Requires `β ≥ r`.
    pub fn annulus(
        d: usize,
        r: Radius,
        alpha: Radius,
        beta: Radius,
        plane: Option<Plane>,
    ) -> Result<Self> {
        if beta < r {
            return Err(Error::AnnulusTooSmall {
                beta: beta.to_string(),
                r: r.to_string(),
            });
        }
        let shell_plane = match &plane {
            Some(p) => p.clone(),
            None => Plane::standard(d)?,
        };
        let pts = annulus_points(d, &r, &alpha, &beta, &shell_plane)?;
        let mut plan = Self::tstar(d, pts, r, plane)?;
        plan.annulus = Some((alpha, beta));
        Ok(plan)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn support_radius(&self) -> &Radius {
        &self.support_radius
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn slices(&self) -> &BTreeMap<SliceKey, ShellDecomposition> {
        &self.slices
    }

    pub fn ray(&self, z: &LatticePoint) -> Option<&Ray> {
        self.rays.get(z)
    }

    /// `(z, γ_z)` pairs in point order, ready for a forward projection.
    pub fn family(&self) -> Vec<(LatticePoint, Ray)> {
        self.rays.iter().map(|(z, r)| (z.clone(), r.clone())).collect()
    }

    /// Descriptor of the family this plan reads.
    pub fn descriptor(&self) -> FamilyDescriptor {
        FamilyDescriptor {
            kind: if self.plane.is_standard() {
                FamilyKind::Tstar
            } else {
                FamilyKind::TstarPlane(self.plane.clone())
            },
            annulus: self.annulus.clone(),
            support_radius: Some(self.support_radius.clone()),
        }
    }

    pub fn annulus_bounds(&self) -> Option<&(Radius, Radius)> {
        self.annulus.as_ref()
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    pub(crate) fn bound2(&self) -> i128 {
        let r2 = self.support_radius.squared();
        r2.numer().div_euclid(*r2.denom())
    }

    pub fn output_radius(&self) -> &Radius {
        &self.output_radius
    }
}

/// Bookkeeping of a reconstruction: how many lines were read and how many
/// values were produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconAudit {
    pub keys_consumed: usize,
    pub points_recovered: usize,
}

/// Shell recursion over every slice of the plan, unweighted.
pub fn recon_shells(g: &Sinogram, plan: &ReconPlan) -> Result<GridFunction> {
    recon_shells_audited(g, plan, None).map(|(f, _)| f)
}

/// Shell recursion with weight `W`.
pub fn recon_shells_weighted(g: &Sinogram, plan: &ReconPlan, w: &WeightModel) -> Result<GridFunction> {
    recon_shells_audited(g, plan, Some(w)).map(|(f, _)| f)
}

pub fn recon_shells_audited(
    g: &Sinogram,
    plan: &ReconPlan,
    w: Option<&WeightModel>,
) -> Result<(GridFunction, ReconAudit)> {
    if g.d() != plan.d {
        return Err(Error::DimensionMismatch {
            expected: plan.d,
            found: g.d(),
        });
    }
    let per_slice: Vec<SliceResult> = plan
        .slices
        .par_iter()
        .map(|(_, shells)| sweep_slice(g, plan, shells, w))
        .collect::<Result<_>>()?;
    let mut f = GridFunction::new(plan.d, plan.output_radius.clone())?;
    let mut keys = BTreeSet::new();
    let mut recovered = 0;
    for (vals, used) in per_slice {
        recovered += vals.len();
        for (z, v) in vals {
            f.insert(z, v)?;
        }
        keys.extend(used);
    }
    Ok((
        f,
        ReconAudit {
            keys_consumed: keys.len(),
            points_recovered: recovered,
        },
    ))
}

fn sweep_slice(
    g: &Sinogram,
    plan: &ReconPlan,
    shells: &ShellDecomposition,
    w: Option<&WeightModel>,
) -> Result<SliceResult> {
    let origin = LatticePoint::origin(plan.d);
    let bound = plan.bound2();
    let mut known: HashMap<LatticePoint, f64> = HashMap::new();
    let mut out = Vec::new();
    let mut used = Vec::new();
    for (_, shell) in shells.iter() {
        let mut fresh = Vec::with_capacity(shell.len());
        for z in shell {
            let ray = &plan.rays[z];
            let key = ray.key();
            let gz = g.get(&key).ok_or_else(|| Error::MissingEntry(z.clone()))?;
            let nz = plan.plane.in_plane_norm2_num(z.coords());
            let mut acc = gz;
            for zeta in points_on_line_within(ray, &origin, bound) {
                if zeta == *z {
                    continue;
                }
                if plan.plane.in_plane_norm2_num(zeta.coords()) <= nz {
                    return Err(Error::PlanInconsistent(format!(
                        "{zeta} on γ_{z} is not farther out than {z}"
                    )));
                }
                let v = *known.get(&zeta).ok_or_else(|| {
                    Error::PlanInconsistent(format!("{zeta} on γ_{z} was not recovered in an earlier shell"))
                })?;
                acc -= weight(w, &zeta, &ray.dir)? * v;
            }
            fresh.push((z.clone(), acc / weight(w, z, &ray.dir)?));
            used.push(key);
        }
        for (z, v) in fresh {
            known.insert(z.clone(), v);
            out.push((z, v));
        }
    }
    Ok((out, used))
}

/// Values recovered on one slice and the line keys read.
type SliceResult = (Vec<(LatticePoint, f64)>, Vec<RayKey>);

fn weight(w: Option<&WeightModel>, y: &LatticePoint, dir: &Direction) -> Result<f64> {
    match w {
        None => Ok(1.0),
        Some(w) => w.eval(y, dir),
    }
}

/// Recovers `f` on `𝒜_{α,β}` from data on `𝒯*_{α,β}`; needs `β ≥ r`.
pub fn recon_annulus(
    g: &Sinogram,
    alpha: Radius,
    beta: Radius,
    r: Radius,
    plane: Option<Plane>,
) -> Result<GridFunction> {
    let plan = ReconPlan::annulus(g.d(), r, alpha, beta, plane)?;
    recon_shells(g, &plan)
}

/// One-point inversion: each `z` is read off the line through `z` with a
/// direction that meets `B_r ∩ ℤ^d` nowhere else.
pub fn recon_one_point(
    g: &Sinogram,
    points: &[LatticePoint],
    theta_of: &BTreeMap<LatticePoint, Direction>,
    r: &Radius,
    w: Option<&WeightModel>,
) -> Result<GridFunction> {
    let d = g.d();
    let max_norm2 = points.iter().map(LatticePoint::norm2).max().unwrap_or(0);
    let out_r = if r.contains_norm2(max_norm2) {
        r.clone()
    } else {
        Radius::from_squared(max_norm2, 1)?
    };
    let mut f = GridFunction::new(d, out_r)?;
    for z in points {
        let theta = theta_of
            .get(z)
            .ok_or_else(|| Error::InvalidArgument(format!("no direction given for {z}")))?;
        if !effectively_irrational(theta, r) {
            return Err(Error::NotEffectivelyIrrational {
                dir: theta.prim().to_vec(),
                radius: r.to_string(),
            });
        }
        let ray = Ray::new(z.clone(), theta.clone())?;
        let v = g.value_on(&ray).ok_or_else(|| Error::MissingEntry(z.clone()))?;
        f.insert(z.clone(), v / weight(w, z, theta)?)?;
    }
    Ok(f)
}
