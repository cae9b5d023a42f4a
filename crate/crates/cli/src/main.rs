//! `dwfree`: Denjoy-Wolff points, subordination functions and free
//! convolution densities from the command line.
//!
//! Exit status: 0 success, 2 invalid input, 3 solver non-convergence
//! (partial output still written), 4 I/O failure.

mod grammar;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dw_core::denjoy_wolff::{solve, theorem1_harness, write_harness_csv, DwError, DwOptions};
use dw_core::domains::{DomainTag, SpherePoint};
use dw_core::freeconv::{
    free_additive_convolve, free_mult_convolve_circle, free_mult_convolve_positive,
    suggest_support, SpectralOutput,
};
use dw_core::output::{fmt_f64, point_fields, write_table};
use dw_core::selfmaps::{MapError, SelfMap};
use dw_core::subordination::{Param, Setting, SubordinationOptions, Subordinator};
use dw_core::Complex64;

use grammar::{
    parse_counts, parse_domain, parse_map, parse_points, parse_range, parse_reals, read_measure,
    CliError,
};

#[derive(Parser)]
#[command(
    name = "dwfree",
    version,
    about = "Denjoy-Wolff points and free convolutions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denjoy-Wolff point of a self-map of the disk or half-plane.
    Dw {
        /// Map spec, e.g. "poly:0,0,1" or "f-shift:mu.spec".
        #[arg(long)]
        map: String,
        /// Domain of literal maps: disk | half-plane.
        #[arg(long, default_value = "disk")]
        domain: String,
        /// Starting point of the iteration.
        #[arg(long)]
        start: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Subordination functions on a grid of parameters.
    Subordinate {
        /// disk-one-phi | circle-two-phi | circle-two-var | halfplane-one-var |
        /// halfplane-two-var | positive-line
        #[arg(long)]
        setting: String,
        #[arg(long)]
        map1: String,
        /// Second map; required except for disk-one-phi.
        #[arg(long)]
        map2: Option<String>,
        /// Real parts of the grid, lo:hi:step.
        #[arg(long, allow_hyphen_values = true)]
        re: Option<String>,
        /// Imaginary parts of the grid, lo:hi:step.
        #[arg(long, allow_hyphen_values = true)]
        im: Option<String>,
        /// Extra parameters, comma separated complex numbers or inf.
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
        /// Second parameters for the two-variable settings; every grid
        /// point is paired with each of these.
        #[arg(long, allow_hyphen_values = true)]
        z2: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Density of mu1 ⊞ mu2 on the real line.
    FreeconvAdd {
        #[command(flatten)]
        conv: ConvArgs,
    },
    /// eta-transform and angular density of mu1 ⊠ mu2 on the circle.
    FreeconvMultCircle {
        #[command(flatten)]
        conv: ConvArgs,
        /// Points of the disk where eta is reported in the sidecar.
        #[arg(long, allow_hyphen_values = true)]
        eta_at: Option<String>,
    },
    /// Density of mu1 ⊠ mu2 on [0, inf).
    FreeconvMultPos {
        #[command(flatten)]
        conv: ConvArgs,
    },
    /// Denjoy-Wolff points along a convergent family of maps.
    Theorem1 {
        /// scaled-halfdisk: (1 - 1/n)(1 + z)/2 on the disk;
        /// halfplane-contraction: z/2 + i/n on the half-plane.
        #[arg(long)]
        family: String,
        /// Family indices, comma separated.
        #[arg(long, default_value = "1,10,100,1000")]
        n: String,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct SolverArgs {
    /// Convergence tolerance of the fixed-point iteration.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Iteration budget per solve.
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
}

#[derive(Args)]
struct OutArgs {
    /// Output CSV; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvArgs {
    /// measure-spec v1 file.
    #[arg(long)]
    mu1: PathBuf,
    #[arg(long)]
    mu2: PathBuf,
    /// Output grid lo:hi:step (angles on the circle). Defaults to mean ± 4
    /// std with 400 cells for ⊞, [-pi, pi] for the circle, and [0, 10] for
    /// the positive line.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Decreasing eps schedule for Stieltjes inversion.
    #[arg(long, default_value = "1e-2,3e-3,1e-3,3e-4,1e-4")]
    eps: String,
    /// JSON sidecar with atoms and diagnostics; defaults to OUTPUT.json.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    out: OutArgs,
}

/// What a successful run reports back.
enum Status {
    Ok,
    /// Output written, but some points did not converge.
    Partial(String),
}

type Echo = Vec<(String, String)>;

fn echo(pairs: &[(&str, String)]) -> Echo {
    let mut v: Echo = vec![(
        "program".into(),
        format!("dwfree {}", env!("CARGO_PKG_VERSION")),
    )];
    v.extend(pairs.iter().map(|(k, val)| (k.to_string(), val.clone())));
    v
}

impl SolverArgs {
    fn options(&self) -> Result<DwOptions, CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) || self.max_iter == 0 {
            return Err(CliError::Validation("need tol > 0 and max-iter > 0".into()));
        }
        Ok(DwOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..DwOptions::default()
        })
    }

    fn echo(&self) -> [(&'static str, String); 2] {
        [
            ("tol", fmt_f64(self.tol)),
            ("max_iter", self.max_iter.to_string()),
        ]
    }
}

/// An output sink opened before any computation, so unwritable paths fail
/// fast.
fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn io_err(e: io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn run_dw(
    map: &str,
    domain: &str,
    start: Option<&str>,
    solver: &SolverArgs,
    out: &OutArgs,
) -> Result<Status, CliError> {
    let m = parse_map(map, parse_domain(domain)?)?;
    let start = start.map(grammar::parse_finite).transpose()?;
    let opts = solver.options()?.with_start(start);
    let sink = open_output(out.output.as_deref())?;
    let mut comments = echo(&[
        ("command", "dw".into()),
        ("map", map.into()),
        ("domain", domain.into()),
        ("start", start.map_or("default".into(), |s| s.to_string())),
    ]);
    comments.extend(solver.echo().map(|(k, v)| (k.to_string(), v)));
    let headers = [
        "case",
        "re",
        "im",
        "jc_derivative",
        "iterations",
        "residual",
    ];
    match solve(&m, &opts) {
        Ok(r) => {
            let [re, im] = point_fields(r.point);
            let row = vec![
                r.case.name().to_string(),
                re,
                im,
                r.jc_derivative.map_or(String::new(), fmt_f64),
                r.iterations.to_string(),
                fmt_f64(r.residual),
            ];
            write_table(sink, &comments, &headers, &[row]).map_err(io_err)?;
            Ok(Status::Ok)
        }
        Err(e @ (DwError::NoConvergence { .. } | DwError::NoFixedPointFound)) => {
            let msg = e.to_string();
            comments.push(("error".into(), msg.clone()));
            let [re, im] = match e {
                DwError::NoConvergence { last, .. } => {
                    point_fields(Some(SpherePoint::Finite(last)))
                }
                _ => point_fields(None),
            };
            let row = vec![
                "failed".into(),
                re,
                im,
                String::new(),
                opts.max_iter.to_string(),
                String::new(),
            ];
            write_table(sink, &comments, &headers, &[row]).map_err(io_err)?;
            Ok(Status::Partial(msg))
        }
        Err(DwError::Map(MapError::Overflow(z))) => {
            Err(CliError::Validation(format!("map overflowed at {z}")))
        }
        Err(e) => Err(CliError::validation(e)),
    }
}

struct SubordinateArgs<'a> {
    setting: &'a str,
    map1: &'a str,
    map2: Option<&'a str>,
    re: Option<&'a str>,
    im: Option<&'a str>,
    points: Option<&'a str>,
    z2: Option<&'a str>,
}

fn build_subordinator(a: &SubordinateArgs) -> Result<Subordinator, CliError> {
    let setting = Setting::parse(a.setting)
        .ok_or_else(|| CliError::Validation(format!("unknown setting '{}'", a.setting)))?;
    let domain = match setting {
        Setting::HalfplaneOneVar | Setting::HalfplaneTwoVar => DomainTag::HalfPlane,
        _ => DomainTag::Disk,
    };
    let m1 = parse_map(a.map1, domain)?;
    let second = || -> Result<SelfMap, CliError> {
        let s = a
            .map2
            .ok_or_else(|| CliError::Validation(format!("{} needs --map2", setting.name())))?;
        parse_map(s, domain)
    };
    let sub = match setting {
        Setting::DiskOnePhi => Subordinator::disk(m1),
        Setting::CircleTwoPhi => Subordinator::circle(m1, second()?, true),
        Setting::CircleTwoVar => Subordinator::circle(m1, second()?, false),
        Setting::HalfplaneOneVar => Subordinator::halfplane(m1, second()?, true),
        Setting::HalfplaneTwoVar => Subordinator::halfplane(m1, second()?, false),
        Setting::PositiveLine => Subordinator::positive_line(m1, second()?),
    };
    sub.map_err(CliError::validation)
}

fn subordinate_grid(a: &SubordinateArgs, two_var: bool) -> Result<(Vec<Param>, usize), CliError> {
    let mut first: Vec<SpherePoint> = Vec::new();
    let mut row_length = 1;
    match (a.re, a.im) {
        (Some(re), Some(im)) => {
            let (re, im) = (parse_range(re)?, parse_range(im)?);
            row_length = re.len();
            for &y in &im {
                first.extend(
                    re.iter()
                        .map(|&x| SpherePoint::Finite(Complex64::new(x, y))),
                );
            }
        }
        (None, None) => {}
        _ => return Err(CliError::Validation("--re and --im go together".into())),
    }
    if let Some(p) = a.points {
        first.extend(parse_points(p)?);
    }
    if first.is_empty() {
        return Err(CliError::Validation(
            "empty grid: give --re/--im or --points".into(),
        ));
    }
    let second = match (two_var, a.z2) {
        (true, Some(z2)) => parse_points(z2)?,
        (true, None) => {
            return Err(CliError::Validation(
                "two-variable settings need --z2".into(),
            ))
        }
        (false, Some(_)) => {
            return Err(CliError::Validation(
                "--z2 only applies to two-variable settings".into(),
            ))
        }
        (false, None) => vec![],
    };
    let params = if two_var {
        row_length = first.len();
        second
            .iter()
            .flat_map(|&w| first.iter().map(move |&z| Param { z1: z, z2: w }))
            .collect()
    } else {
        first.iter().map(|&z| Param { z1: z, z2: z }).collect()
    };
    Ok((params, row_length))
}

fn run_subordinate(
    a: SubordinateArgs,
    solver: &SolverArgs,
    out: &OutArgs,
) -> Result<Status, CliError> {
    let sub = build_subordinator(&a)?;
    let (params, row_length) = subordinate_grid(&a, sub.setting().two_variables())?;
    let opts = SubordinationOptions {
        dw: solver.options()?,
        warm_start: true,
        row_length: Some(row_length),
    };
    let sink = open_output(out.output.as_deref())?;
    let result = sub.solve_grid(&params, &opts);
    let mut comments = echo(&[
        ("command", "subordinate".into()),
        ("setting", sub.setting().name().into()),
        ("map1", a.map1.into()),
        ("map2", a.map2.unwrap_or("").into()),
        ("re", a.re.unwrap_or("").into()),
        ("im", a.im.unwrap_or("").into()),
        ("points", a.points.unwrap_or("").into()),
        ("z2", a.z2.unwrap_or("").into()),
        ("warm_start", "true".into()),
    ]);
    comments.extend(solver.echo().map(|(k, v)| (k.to_string(), v)));
    comments.push(("failures".into(), result.failures().to_string()));
    result.write_csv(sink, &comments).map_err(io_err)?;
    match result.failures() {
        0 => Ok(Status::Ok),
        n => Ok(Status::Partial(format!(
            "{n} of {} parameters failed",
            params.len()
        ))),
    }
}

#[derive(Clone, Copy)]
enum Product {
    Add,
    Circle,
    Positive,
}

fn run_conv(kind: Product, a: &ConvArgs, eta_at: Option<&str>) -> Result<Status, CliError> {
    let mu1 = read_measure(&a.mu1)?;
    let mu2 = read_measure(&a.mu2)?;
    let eps = parse_reals(&a.eps)?;
    let dw = a.solver.options()?;
    let grid = match (&a.grid, kind) {
        (Some(g), _) => parse_range(g)?,
        (None, Product::Add) => {
            let (lo, hi) = suggest_support(&mu1, &mu2);
            let step = ((hi - lo) / 400.0).max(1e-12);
            parse_range(&format!("{lo}:{hi}:{step}"))?
        }
        (None, Product::Circle) => (0..=400)
            .map(|k| (-PI + 2.0 * PI * k as f64 / 400.0).min(PI))
            .collect(),
        (None, Product::Positive) => parse_range("0:10:0.025")?,
    };
    let eta_points: Vec<Complex64> = match eta_at {
        Some(s) => s
            .split(',')
            .map(grammar::parse_finite)
            .collect::<Result<_, _>>()?,
        None => vec![],
    };
    let sidecar = a
        .sidecar
        .clone()
        .or_else(|| a.out.output.as_ref().map(|p| p.with_extension("json")));
    let sink = open_output(a.out.output.as_deref())?;
    let side_sink = sidecar
        .as_deref()
        .map(|p| open_output(Some(p)))
        .transpose()?;

    let (name, spectral, eta) = match kind {
        Product::Add => (
            "freeconv-add",
            free_additive_convolve(&mu1, &mu2, &grid, &eps, &dw).map_err(CliError::validation)?,
            None,
        ),
        Product::Circle => {
            let out = free_mult_convolve_circle(&mu1, &mu2, &eta_points, &grid, &eps, &dw)
                .map_err(CliError::validation)?;
            ("freeconv-mult-circle", out.spectral, Some(out.eta))
        }
        Product::Positive => (
            "freeconv-mult-pos",
            free_mult_convolve_positive(&mu1, &mu2, &grid, &eps, &dw)
                .map_err(CliError::validation)?,
            None,
        ),
    };
    let d = &spectral.diagnostics;
    let mut comments = echo(&[
        ("command", name.into()),
        ("mu1", a.mu1.display().to_string()),
        ("mu2", a.mu2.display().to_string()),
        ("grid", a.grid.clone().unwrap_or_else(|| "default".into())),
        ("grid_points", grid.len().to_string()),
        ("eps", a.eps.clone()),
        ("richardson_window", "3".into()),
    ]);
    comments.extend(a.solver.echo().map(|(k, v)| (k.to_string(), v)));
    comments.extend([
        ("method".into(), d.method.clone()),
        ("total_mass".into(), fmt_f64(d.total_mass)),
        ("mass_defect".into(), fmt_f64(d.mass_defect)),
        ("clamped".into(), d.clamped.to_string()),
        ("flagged".into(), d.flagged.len().to_string()),
        ("failures".into(), d.failures.len().to_string()),
    ]);
    for (x, m) in &spectral.atoms {
        comments.push(("atom".into(), format!("{} {}", fmt_f64(*x), fmt_f64(*m))));
    }
    spectral.write_csv(sink, &comments).map_err(io_err)?;
    if let Some(mut s) = side_sink {
        s.write_all(sidecar_text(&spectral, eta_points.as_slice(), eta.as_deref()).as_bytes())
            .and_then(|_| s.flush())
            .map_err(io_err)?;
    }
    match d.failures.len() {
        0 => Ok(Status::Ok),
        n => Ok(Status::Partial(format!("{n} grid points failed"))),
    }
}

fn sidecar_text(
    spectral: &SpectralOutput,
    zs: &[Complex64],
    eta: Option<&[Option<Complex64>]>,
) -> String {
    let mut v: serde_json::Value =
        serde_json::from_str(&spectral.sidecar_json()).expect("valid json");
    if let Some(eta) = eta {
        let rows: Vec<serde_json::Value> = zs
            .iter()
            .zip(eta)
            .map(|(z, e)| serde_json::json!({ "z": [z.re, z.im], "eta": e.map(|e| [e.re, e.im]) }))
            .collect();
        v["eta"] = serde_json::Value::Array(rows);
    }
    let mut s = serde_json::to_string_pretty(&v).expect("plain data");
    s.push('\n');
    s
}

fn family(name: &str) -> Result<(SelfMap, fn(usize) -> Result<SelfMap, MapError>), CliError> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match name {
        "scaled-halfdisk" => Ok((
            SelfMap::affine(DomainTag::Disk, c(0.5, 0.0), c(0.5, 0.0))
                .map_err(CliError::validation)?,
            |n| {
                let s = 1.0 - 1.0 / n as f64;
                SelfMap::affine(
                    DomainTag::Disk,
                    Complex64::new(0.5 * s, 0.0),
                    Complex64::new(0.5 * s, 0.0),
                )
            },
        )),
        "halfplane-contraction" => Ok((
            SelfMap::affine(DomainTag::HalfPlane, c(0.5, 0.0), c(0.0, 0.0))
                .map_err(CliError::validation)?,
            |n| {
                SelfMap::affine(
                    DomainTag::HalfPlane,
                    Complex64::new(0.5, 0.0),
                    Complex64::new(0.0, 1.0 / n as f64),
                )
            },
        )),
        _ => Err(CliError::Validation(format!(
            "unknown family '{name}' (scaled-halfdisk | halfplane-contraction)"
        ))),
    }
}

fn run_theorem1(
    name: &str,
    n: &str,
    solver: &SolverArgs,
    out: &OutArgs,
) -> Result<Status, CliError> {
    let (limit, fam) = family(name)?;
    let ns = parse_counts(n)?;
    let opts = solver.options()?;
    let sink = open_output(out.output.as_deref())?;
    let (target, rows) = match theorem1_harness(fam, &limit, &ns, &opts) {
        Ok(v) => v,
        Err(DwError::NoConvergence { max_iter, .. }) => {
            let msg = format!("no convergence after {max_iter} iterations");
            let comments = echo(&[
                ("command", "theorem1".into()),
                ("family", name.into()),
                ("n", n.into()),
                ("error", msg.clone()),
            ]);
            write_harness_csv(sink, &comments, &[]).map_err(io_err)?;
            return Ok(Status::Partial(msg));
        }
        Err(e) => return Err(CliError::validation(e)),
    };
    let [re, im] = point_fields(target.point);
    let mut comments = echo(&[
        ("command", "theorem1".into()),
        ("family", name.into()),
        ("n", n.into()),
        ("limit_point", format!("{re} {im}")),
        ("limit_case", target.case.name().into()),
    ]);
    comments.extend(solver.echo().map(|(k, v)| (k.to_string(), v)));
    write_harness_csv(sink, &comments, &rows).map_err(io_err)?;
    Ok(Status::Ok)
}

fn run(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Command::Dw {
            map,
            domain,
            start,
            solver,
            out,
        } => run_dw(&map, &domain, start.as_deref(), &solver, &out),
        Command::Subordinate {
            setting,
            map1,
            map2,
            re,
            im,
            points,
            z2,
            solver,
            out,
        } => run_subordinate(
            SubordinateArgs {
                setting: &setting,
                map1: &map1,
                map2: map2.as_deref(),
                re: re.as_deref(),
                im: im.as_deref(),
                points: points.as_deref(),
                z2: z2.as_deref(),
            },
            &solver,
            &out,
        ),
        Command::FreeconvAdd { conv } => run_conv(Product::Add, &conv, None),
        Command::FreeconvMultCircle { conv, eta_at } => {
            run_conv(Product::Circle, &conv, eta_at.as_deref())
        }
        Command::FreeconvMultPos { conv } => run_conv(Product::Positive, &conv, None),
        Command::Theorem1 {
            family,
            n,
            solver,
            out,
        } => run_theorem1(&family, &n, &solver, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Partial(msg)) => {
            eprintln!("dwfree: {msg}; partial output written");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("dwfree: {e}");
            ExitCode::from(match e {
                CliError::Validation(_) => 2,
                CliError::Io(_) => 4,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn default_eps_flag_matches_library() {
        let flag = Cli::command()
            .find_subcommand("freeconv-add")
            .and_then(|c| c.get_arguments().find(|a| a.get_id() == "eps").cloned())
            .map(|a| a.get_default_values()[0].to_string_lossy().into_owned())
            .unwrap();
        assert_eq!(
            parse_reals(&flag).unwrap(),
            dw_core::freeconv::DEFAULT_EPS.to_vec()
        );
    }
}
