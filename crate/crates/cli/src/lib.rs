//! Command-line front end for `lxray-core`.
//!
//! Exit codes: 0 success, 1 a report that did not pass or an I/O failure,
//! 2 precondition violation, 3 budget exceeded, 4 malformed input file.

pub mod commands;
pub mod files;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{Parser, Subcommand};
use lxray_core::counting::{
    count_tmin, count_tmin_through_origin, farey_asymptotic_report, verify_lower_bound_chain, verify_separation,
};
use lxray_core::lattice::farey_count;
use lxray_core::sieve::farey_count_oracle;
use lxray_core::{primitive, Radius};
use serde::Serialize;

use commands::{
    CountReportJson, FamilyChoice, FamilyOptions, FareyJson, InitChoice, PhantomKind, ReconOptions, SeparationJson,
    TminJson, WeightSpec,
};
use files::{read_json, write_atomic, write_json, DirEntry, GridFile, SinogramFile};

/// An input file that does not follow its format.
#[derive(Debug, thiserror::Error)]
#[error("malformed file: {0}")]
pub struct Malformed(pub String);

/// A flag combination or input the requested operation cannot accept.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Precondition(pub String);

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Malformed>() {
            return 4;
        }
        if cause.is::<Precondition>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<lxray_core::Error>() {
            return match e {
                lxray_core::Error::BudgetExceeded(_) => 3,
                _ => 2,
            };
        }
    }
    1
}

/// Comma-separated integer vector, as in `--a 1,1,0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntVec(pub Vec<i64>);

fn parse_vec(s: &str) -> std::result::Result<IntVec, String> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()
        .map(IntVec)
}

fn parse_radius(s: &str) -> std::result::Result<Radius, String> {
    s.parse::<Radius>().map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "lxray", version, about = "Discrete X-ray transform on the integer lattice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a test function on B_r as a grid file.
    Phantom {
        #[arg(long, value_enum)]
        kind: PhantomKind,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_parser = parse_radius)]
        r: Radius,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project a grid along a ray family.
    Forward {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, value_enum, default_value = "tstar")]
        family: FamilyChoice,
        /// First plane vector, comma separated.
        #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
        a: Option<IntVec>,
        /// Second plane vector, comma separated.
        #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
        b: Option<IntVec>,
        #[arg(long, value_parser = parse_radius)]
        alpha: Option<Radius>,
        #[arg(long, value_parser = parse_radius)]
        beta: Option<Radius>,
        /// Direction list for the free family.
        #[arg(long)]
        dirs: Option<PathBuf>,
        /// `const:C` or `cell-chord`.
        #[arg(long)]
        weight: Option<WeightSpec>,
        /// Integrate the cell field instead of summing lattice values.
        #[arg(long)]
        continuous: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Invert a sinogram.
    Recon {
        #[arg(long)]
        sino: PathBuf,
        #[arg(long)]
        weight: Option<WeightSpec>,
        /// Direction list; each point is read off its own line.
        #[arg(long)]
        one_point: Option<PathBuf>,
        /// Run this many refinement steps on continuous data.
        #[arg(long)]
        iterate: Option<usize>,
        #[arg(long, value_enum, requires = "iterate")]
        init: Option<InitChoice>,
        /// Residual CSV path; defaults to the output path with `.residuals.csv`.
        #[arg(long, requires = "iterate")]
        residuals: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Counting and separation reports: JSON on stdout, table on stderr.
    Count {
        #[command(subcommand)]
        what: CountCommand,
    },
    /// Directions whose lines meet B_r ∩ ℤ^d in one point at most.
    IrrationalDirs {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_parser = parse_radius)]
        r: Radius,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Write a direction list pairing every ball point with the first
        /// direction, ready for `forward --family free` and `recon --one-point`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a grid as CSV with columns z0, z1, …, v.
    ExportCsv {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum CountCommand {
    /// Lines through at least two ball points.
    Tmin {
        #[arg(long, value_parser = parse_radius)]
        r: Radius,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Farey points of level n.
    Farey {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Exhaustive projection separation check.
    Separation {
        #[arg(long = "R", value_parser = parse_radius)]
        big_r: Radius,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Lower and upper bounds on the line count.
    Bounds {
        #[arg(long, value_parser = parse_radius)]
        r: Radius,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
}

fn residuals_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".residuals.csv");
    PathBuf::from(s)
}

fn emit<T: Serialize>(report: &T, table: &[(&str, String)]) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, report)?;
    writeln!(stdout)?;
    let width = table.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut stderr = std::io::stderr().lock();
    for (k, v) in table {
        writeln!(stderr, "{k:<width$}  {v}")?;
    }
    Ok(())
}

fn count(what: &CountCommand) -> Result<bool> {
    match what {
        CountCommand::Tmin { r, d } => {
            let report = TminJson {
                r: r.to_string(),
                d: *d,
                count: count_tmin(r, *d)?,
                through_origin: count_tmin_through_origin(r, *d)?,
            };
            emit(
                &report,
                &[
                    ("r", report.r.clone()),
                    ("d", d.to_string()),
                    ("lines", report.count.to_string()),
                    ("through origin", report.through_origin.to_string()),
                ],
            )?;
            Ok(true)
        }
        CountCommand::Farey { n, d } => {
            let report = if *d == 2 {
                FareyJson::from(&farey_asymptotic_report(*n)?)
            } else {
                let count = farey_count(*n, *d)?;
                let oracle = farey_count_oracle(*n as usize, *d);
                FareyJson {
                    n: *n,
                    d: *d,
                    count,
                    oracle: oracle.to_string(),
                    ratio: None,
                    passed: count as u128 == oracle,
                }
            };
            let mut table = vec![
                ("n", n.to_string()),
                ("d", d.to_string()),
                ("count", report.count.to_string()),
                ("sieve", report.oracle.clone()),
            ];
            if let Some(ratio) = report.ratio {
                table.push(("count·π²/(3n²)", format!("{ratio:.6}")));
            }
            table.push(("passed", report.passed.to_string()));
            emit(&report, &table)?;
            Ok(report.passed)
        }
        CountCommand::Separation { big_r, d } => {
            let report = SeparationJson::from(&verify_separation(big_r, *d)?);
            emit(
                &report,
                &[
                    ("R", report.big_r.clone()),
                    ("d", d.to_string()),
                    ("pairs", report.checked.to_string()),
                    ("equality", report.equality_cases.to_string()),
                    ("min gap", report.min_gap.clone().unwrap_or_else(|| "-".into())),
                    ("passed", report.passed.to_string()),
                ],
            )?;
            Ok(report.passed)
        }
        CountCommand::Bounds { r, d } => {
            let report = CountReportJson::from(&verify_lower_bound_chain(r, *d)?);
            emit(
                &report,
                &[
                    ("r", report.r.clone()),
                    ("d", d.to_string()),
                    ("lower", report.lower_bound.to_string()),
                    ("count", report.count.to_string()),
                    ("upper", report.upper_bound.to_string()),
                    ("passed", report.passed.to_string()),
                ],
            )?;
            Ok(report.passed)
        }
    }
}

/// Runs one command. `Ok(false)` means a report ran but did not pass.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Phantom { kind, d, r, seed, out } => {
            let f = commands::phantom(*kind, *d, r, *seed)?;
            write_json(out, &GridFile::from_grid(&f))?;
        }
        Command::Forward {
            grid,
            family,
            a,
            b,
            alpha,
            beta,
            dirs,
            weight,
            continuous,
            out,
        } => {
            let f = read_json::<GridFile>(grid)?.to_grid()?;
            let dirs = dirs.as_deref().map(read_json::<Vec<DirEntry>>).transpose()?;
            let opts = FamilyOptions {
                a: a.as_ref().map(|v| v.0.clone()),
                b: b.as_ref().map(|v| v.0.clone()),
                alpha: alpha.clone(),
                beta: beta.clone(),
                dirs,
            };
            let g = commands::forward(&f, *family, &opts, weight.as_ref(), *continuous)?;
            write_json(out, &SinogramFile::from_sinogram(&g))?;
        }
        Command::Recon {
            sino,
            weight,
            one_point,
            iterate,
            init,
            residuals,
            out,
        } => {
            let file: SinogramFile = read_json(sino)?;
            let opts = ReconOptions {
                weight: weight.clone(),
                one_point: one_point.as_deref().map(read_json::<Vec<DirEntry>>).transpose()?,
                iterate: iterate.map(|n| (n, *init)),
            };
            let rec = commands::recon(&file, &opts)?;
            write_json(out, &GridFile::from_grid(&rec.f))?;
            if iterate.is_some() {
                let path = residuals.clone().unwrap_or_else(|| residuals_path(out));
                write_atomic(&path, commands::residual_csv(&rec.residuals).as_bytes())?;
            }
        }
        Command::Count { what } => return count(what),
        Command::IrrationalDirs { d, r, count, out } => {
            let dirs = commands::irrational_dirs(*d, r, *count)?;
            let list: Vec<Vec<i64>> = dirs.iter().map(|t| t.prim().to_vec()).collect();
            emit(&list, &[])?;
            if let (Some(out), Some(first)) = (out, list.first()) {
                let theta = primitive(first)?;
                write_json(out, &commands::uniform_dirs(*d, r, &theta)?)?;
            }
        }
        Command::ExportCsv { grid, out } => {
            let f = read_json::<GridFile>(grid)?.to_grid()?;
            write_atomic(out, commands::grid_csv(&f).as_bytes())?;
        }
    }
    Ok(true)
}

/// Sizes the global thread pool from `LXRAY_THREADS`, when set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("LXRAY_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Precondition(format!("LXRAY_THREADS={v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}
