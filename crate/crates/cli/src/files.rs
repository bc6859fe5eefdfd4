//! JSON file formats: grids, sinograms and per-point direction lists.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use lxray_core::transform::FamilyKind;
use lxray_core::{
    primitive, Direction, FamilyDescriptor, GridFunction, LatticePoint, Plane, Radius, Ray, Sinogram,
};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::Malformed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub z: Vec<i64>,
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub d: usize,
    pub r: String,
    pub values: Vec<GridEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    /// Support radius of the measured function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<i64>>,
    pub dir: Vec<i64>,
    pub base: Vec<i64>,
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinogramFile {
    pub d: usize,
    pub family: FamilyFile,
    pub rays: Vec<RayEntry>,
}

/// One direction per point, for one-point inversion and free families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirEntry {
    pub z: Vec<i64>,
    pub dir: Vec<i64>,
}

fn malformed(msg: impl Into<String>) -> anyhow::Error {
    Malformed(msg.into()).into()
}

fn parse_radius(s: &str, what: &str) -> Result<Radius> {
    s.parse::<Radius>()
        .map_err(|e| malformed(format!("{what} {s:?}: {e}")))
}

fn check_len(v: &[i64], d: usize, what: &str) -> Result<()> {
    if v.len() != d {
        return Err(malformed(format!("{what} {v:?} has {} coordinates, expected {d}", v.len())));
    }
    Ok(())
}

impl GridFile {
    pub fn from_grid(f: &GridFunction) -> Self {
        GridFile {
            d: f.d(),
            r: f.support_radius().to_string(),
            values: f
                .iter()
                .map(|(z, v)| GridEntry {
                    z: z.coords().to_vec(),
                    v,
                })
                .collect(),
        }
    }

    pub fn to_grid(&self) -> Result<GridFunction> {
        let r = parse_radius(&self.r, "grid radius")?;
        let mut f = GridFunction::new(self.d, r).map_err(|e| malformed(e.to_string()))?;
        for e in &self.values {
            check_len(&e.z, self.d, "grid point")?;
            let z = LatticePoint::new(e.z.clone());
            if f.stored(&z).is_some() {
                return Err(malformed(format!("duplicate grid point {z}")));
            }
            f.insert(z, e.v).map_err(|e| malformed(e.to_string()))?;
        }
        Ok(f)
    }
}

impl FamilyFile {
    pub fn from_descriptor(desc: &FamilyDescriptor) -> Self {
        let (kind, a, b) = match &desc.kind {
            FamilyKind::Tstar => ("tstar", None, None),
            FamilyKind::TstarPlane(p) => ("tstar_plane", Some(p.a().to_vec()), Some(p.b().to_vec())),
            FamilyKind::Free => ("free", None, None),
        };
        FamilyFile {
            kind: kind.to_string(),
            a,
            b,
            alpha: desc.annulus.as_ref().map(|(a, _)| a.to_string()),
            beta: desc.annulus.as_ref().map(|(_, b)| b.to_string()),
            r: desc.support_radius.as_ref().map(Radius::to_string),
        }
    }

    pub fn to_descriptor(&self) -> Result<FamilyDescriptor> {
        let kind = match self.kind.as_str() {
            "tstar" => FamilyKind::Tstar,
            "tstar_plane" => {
                let (a, b) = match (&self.a, &self.b) {
                    (Some(a), Some(b)) => (a.clone(), b.clone()),
                    _ => return Err(malformed("tstar_plane family needs \"a\" and \"b\"")),
                };
                FamilyKind::TstarPlane(Plane::new(a, b).map_err(|e| malformed(e.to_string()))?)
            }
            "free" => FamilyKind::Free,
            other => return Err(malformed(format!("unknown family kind {other:?}"))),
        };
        let annulus = match (&self.alpha, &self.beta) {
            (Some(a), Some(b)) => Some((parse_radius(a, "alpha")?, parse_radius(b, "beta")?)),
            (None, None) => None,
            _ => return Err(malformed("annulus needs both \"alpha\" and \"beta\"")),
        };
        let support_radius = self.r.as_deref().map(|r| parse_radius(r, "family radius")).transpose()?;
        Ok(FamilyDescriptor {
            kind,
            annulus,
            support_radius,
        })
    }
}

impl SinogramFile {
    /// Entries in line-key order; each carries the first point assigned to
    /// its line, if any.
    pub fn from_sinogram(g: &Sinogram) -> Self {
        let mut owner = BTreeMap::new();
        for (z, key) in g.assoc() {
            owner.entry(key).or_insert(z);
        }
        SinogramFile {
            d: g.d(),
            family: FamilyFile::from_descriptor(g.family()),
            rays: g
                .entries()
                .iter()
                .map(|(key, &v)| RayEntry {
                    z: owner.get(key).map(|z| z.coords().to_vec()),
                    dir: key.dir.prim().to_vec(),
                    base: key.reduced_base.coords().to_vec(),
                    v,
                })
                .collect(),
        }
    }

    pub fn to_sinogram(&self) -> Result<Sinogram> {
        let mut g = Sinogram::new(self.d, self.family.to_descriptor()?);
        for e in &self.rays {
            check_len(&e.dir, self.d, "ray direction")?;
            check_len(&e.base, self.d, "ray base")?;
            let dir = primitive(&e.dir).map_err(|e| malformed(e.to_string()))?;
            if dir.prim() != e.dir.as_slice() {
                return Err(malformed(format!("direction {:?} is not primitive and canonical", e.dir)));
            }
            let ray = Ray::new(LatticePoint::new(e.base.clone()), dir).map_err(|e| malformed(e.to_string()))?;
            let key = ray.key();
            if key.reduced_base.coords() != e.base.as_slice() {
                return Err(malformed(format!("base {:?} is not reduced for direction {:?}", e.base, e.dir)));
            }
            if g.get(&key).is_some() {
                return Err(malformed(format!("duplicate line {:?} + t{:?}", e.base, e.dir)));
            }
            let z = match &e.z {
                Some(z) => {
                    check_len(z, self.d, "ray point")?;
                    let z = LatticePoint::new(z.clone());
                    if !ray.contains(&z) {
                        return Err(malformed(format!("point {z} is not on its line")));
                    }
                    Some(z)
                }
                None => None,
            };
            g.insert(z, &ray, e.v);
        }
        Ok(g)
    }

    /// Points named by the entries, in file order.
    pub fn points(&self) -> Vec<LatticePoint> {
        self.rays
            .iter()
            .filter_map(|e| e.z.clone().map(LatticePoint::new))
            .collect()
    }
}

pub fn dirs_to_map(d: usize, dirs: &[DirEntry]) -> Result<BTreeMap<LatticePoint, Direction>> {
    let mut out = BTreeMap::new();
    for e in dirs {
        check_len(&e.z, d, "point")?;
        check_len(&e.dir, d, "direction")?;
        let theta = primitive(&e.dir).map_err(|err| malformed(format!("direction {:?}: {err}", e.dir)))?;
        if out.insert(LatticePoint::new(e.z.clone()), theta).is_some() {
            return Err(malformed(format!("duplicate point {:?} in direction list", e.z)));
        }
    }
    Ok(out)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
