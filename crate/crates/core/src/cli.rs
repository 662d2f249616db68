//! Command-line front end: subcommands, JSON configs, CSV/JSON reports and
//! run manifests.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{
    decay_fit, directional_monotonicity, far_region, level_set_extent, moving_plane_check,
    one_dimensionality_defect, strip_bound_scan, Region,
};
use crate::error::{PslabError, Result};
use crate::field::io::{read_field, write_field, FieldFile};
use crate::field::{GridSpec, SolutionPair};
use crate::fingerprint::{digest_bytes, Fingerprint};
use crate::monotonicity::{acf_scan, almgren_scan, blow_down, check_doubling, growth_exponent, ScanOptions};
use crate::ode1d::{center_and_symmetry_defect, HeteroclinicProblem, Profile1D};
use crate::segregation::sweep;
use crate::solver::{boundary_from_harmonic, boundary_from_profile, solve, BoundaryData, SolveOptions};
use crate::verify;

pub const MANIFEST_NAME: &str = "manifest.json";
pub const THREADS_VAR: &str = "PSLAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "pslab", version, about = "Numerical laboratory for the phase-separation system")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the 1D heteroclinic problem
    Solve1d(Solve1dArgs),
    /// Relax the 2D/3D system inside a box
    Solve2d(Solve2dArgs),
    /// Almgren / ACF scan around a center
    Diagnose(DiagnoseArgs),
    /// Blow-down distances to the linear limit
    Blowdown(BlowdownArgs),
    /// Far-field probes
    Asymptotics(AsymptoticsArgs),
    /// β sweep of the coupled system
    Segregate(SegregateArgs),
    /// Run the acceptance checks
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct Solve1dArgs {
    /// Half length of the interval
    #[arg(long = "L", default_value_t = 30.0)]
    half_length: f64,
    /// Number of nodes (odd)
    #[arg(long, default_value_t = 6001)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    slope: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct Solve2dArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct DiagnoseArgs {
    #[arg(long)]
    field: PathBuf,
    /// Comma separated coordinates
    #[arg(long)]
    center: String,
    /// `r0:r1:k`, k radii evenly spaced from r0 to r1
    #[arg(long)]
    radii: String,
    /// `d1,d2` for the doubling check
    #[arg(long)]
    doubling: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BlowdownArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    center: String,
    /// Comma separated radii
    #[arg(long = "R-list")]
    r_list: String,
    /// Nodes per axis of the reference grid on [-1, 1]^N
    #[arg(long, default_value_t = 129)]
    ref_n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct AsymptoticsArgs {
    #[arg(long)]
    field: PathBuf,
    /// Subset of decay,planes,cone,defect,levelset,strips
    #[arg(long, default_value = "decay,planes,cone,defect,levelset")]
    ops: String,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// `a,b`; defaults to [top/4, top/2] of the box in x_N
    #[arg(long)]
    slab: Option<String>,
    /// Number of plane heights spread across the box
    #[arg(long, default_value_t = 25)]
    planes: usize,
    /// Threshold for the level set of |u - v|
    #[arg(long, default_value_t = 0.2)]
    level: f64,
    /// Strip height for the strip bounds
    #[arg(long, default_value_t = 0.0)]
    strip: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SegregateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma separated, increasing
    #[arg(long, default_value = "1,4,16,64,256")]
    betas: String,
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// Criteria 1-5 only
    #[arg(long)]
    quick: bool,
    /// Comma separated criterion ids (overrides --quick)
    #[arg(long)]
    only: Option<String>,
    /// JSON file for the results
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundaryConfig {
    ProfileLift {
        profile_file: PathBuf,
    },
    HarmonicTrace {
        degree: u32,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub grid: GridConfig,
    pub boundary: BoundaryConfig,
    #[serde(default = "one")]
    pub beta: f64,
    pub tol: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub omega: Option<f64>,
}

impl SolveConfig {
    fn options(&self, dim: usize) -> SolveOptions {
        let d = SolveOptions::for_dim(dim);
        SolveOptions {
            tol: self.tol.unwrap_or(d.tol),
            max_sweeps: self.max_sweeps.unwrap_or(d.max_sweeps),
            omega: self.omega.unwrap_or(d.omega),
            ..d
        }
    }
}

/// Parses a JSON config, reporting the key path of the first problem.
pub fn parse_config<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        PslabError::Config {
            path: if key == "." { path.display().to_string() } else { format!("{}: {key}", path.display()) },
            message: e.into_inner().to_string(),
        }
    })
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path, inputs: &mut Inputs) -> Result<T> {
    let text = inputs.read(path)?;
    parse_config(path, &text)
}

/// Input files and their digests, recorded in the manifest.
#[derive(Default)]
struct Inputs {
    digests: BTreeMap<String, String>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).map_err(|e| PslabError::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.digests.insert(path.display().to_string(), digest_bytes(&bytes));
        String::from_utf8(bytes).map_err(|e| PslabError::Format(format!("{}: {e}", path.display())))
    }

    fn field(&mut self, path: &Path) -> Result<FieldFile> {
        self.read(path)?;
        read_field(path)
    }
}

/// What a subcommand produced.
struct Report {
    outputs: Vec<PathBuf>,
    fingerprint: Fingerprint,
    /// Directory receiving the manifest.
    dir: PathBuf,
    config: Value,
}

impl Report {
    fn new(primary: &Path, config: Value) -> Self {
        Self {
            outputs: Vec::new(),
            fingerprint: Fingerprint::new(),
            dir: primary
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map_or_else(|| PathBuf::from("."), Path::to_path_buf),
            config,
        }
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        fs::write(path, contents)?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn write_field(&mut self, path: &Path, pair: &SolutionPair, meta: &BTreeMap<String, Value>) -> Result<()> {
        write_field(path, pair, meta)?;
        self.outputs.push(path.to_path_buf());
        self.fingerprint.add("u", pair.u().values()).add("v", pair.v().values());
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    tool_version: &'static str,
    subcommand: &'a str,
    config: &'a Value,
    inputs: &'a BTreeMap<String, String>,
    outputs: Vec<String>,
    wall_time_seconds: f64,
    fingerprint: String,
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| PslabError::Config {
        path: THREADS_VAR.into(),
        message: format!("expected a positive integer, got `{raw}`"),
    })?;
    if n == 0 {
        return Err(PslabError::Config {
            path: THREADS_VAR.into(),
            message: "must be at least 1".into(),
        });
    }
    // a second call in the same process (tests) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    init_threads()?;
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let (name, report, code) = match command {
        Command::Solve1d(a) => ("solve1d", cmd_solve1d(&a)?, 0),
        Command::Solve2d(a) => ("solve2d", cmd_solve2d(&a, &mut inputs)?, 0),
        Command::Diagnose(a) => ("diagnose", cmd_diagnose(&a, &mut inputs)?, 0),
        Command::Blowdown(a) => ("blowdown", cmd_blowdown(&a, &mut inputs)?, 0),
        Command::Asymptotics(a) => ("asymptotics", cmd_asymptotics(&a, &mut inputs)?, 0),
        Command::Segregate(a) => ("segregate", cmd_segregate(&a, &mut inputs)?, 0),
        Command::Verify(a) => {
            let (report, ok) = cmd_verify(&a)?;
            ("verify", report, if ok { 0 } else { 1 })
        }
    };
    if let Some(report) = report {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            subcommand: name,
            config: &report.config,
            inputs: &inputs.digests,
            outputs: report.outputs.iter().map(|p| p.display().to_string()).collect(),
            wall_time_seconds: start.elapsed().as_secs_f64(),
            fingerprint: report.fingerprint.finish(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| PslabError::Format(e.to_string()))?;
        fs::write(report.dir.join(MANIFEST_NAME), text)?;
        log::info!("fingerprint {}", manifest.fingerprint);
    }
    Ok(code)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn parse_list(what: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| PslabError::InvalidArgument(format!("{what}: cannot parse `{t}` as a number")))
        })
        .collect()
}

fn parse_radii(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || PslabError::InvalidArgument(format!("radii must look like r0:r1:k, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let r0: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let r1: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let k: usize = parts[2].trim().parse().map_err(|_| bad())?;
    match k {
        0 => Err(bad()),
        1 => Ok(vec![r0]),
        _ => Ok((0..k).map(|i| r0 + (r1 - r0) * i as f64 / (k - 1) as f64).collect()),
    }
}

fn parse_center(s: &str, dim: usize) -> Result<Vec<f64>> {
    let c = parse_list("center", s)?;
    if c.len() != dim {
        return Err(PslabError::InvalidArgument(format!("center has {} coordinates, field has {dim}", c.len())));
    }
    Ok(c)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

/// Reads a profile written by `solve1d`.
pub fn read_profile(file: &FieldFile) -> Result<Profile1D> {
    let g = file.pair.grid();
    if g.dim() != 1 {
        return Err(PslabError::Format(format!("expected a 1D profile, got dimension {}", g.dim())));
    }
    let slope = file.metadata.get("slope").and_then(Value::as_f64).unwrap_or(1.0);
    let half = 0.5 * (g.hi()[0] - g.lo()[0]);
    let shift = 0.5 * (g.hi()[0] + g.lo()[0]);
    Profile1D::from_samples(shift, half, file.pair.u().values().to_vec(), file.pair.v().values().to_vec(), slope)
}

fn cmd_solve1d(a: &Solve1dArgs) -> Result<Option<Report>> {
    let problem = HeteroclinicProblem {
        half_length: a.half_length,
        nodes: a.n,
        slope: a.slope,
        tol: a.tol,
        max_iter: a.max_iter,
        shift: 0.0,
    };
    let p = problem.solve()?;
    let (_, defect) = center_and_symmetry_defect(&p)?;
    let mut meta = BTreeMap::new();
    meta.insert("slope".to_string(), json!(p.slope));
    meta.insert("t0".to_string(), json!(p.t0));
    meta.insert("residual_norm".to_string(), json!(p.residual_norm));
    meta.insert("symmetry_defect".to_string(), json!(defect));
    meta.insert("newton_iterations".to_string(), json!(p.newton_iterations));
    let mut report = Report::new(&a.out, to_value(a));
    report.write_field(&a.out, &p.to_pair()?, &meta)?;
    println!(
        "converged in {} Newton steps, residual {:.3e}, t0 {:.3e}, symmetry defect {:.3e}",
        p.newton_iterations, p.residual_norm, p.t0, defect
    );
    Ok(Some(report))
}

fn boundary_for(cfg: &SolveConfig, grid: &GridSpec, inputs: &mut Inputs) -> Result<BoundaryData> {
    match &cfg.boundary {
        BoundaryConfig::ProfileLift { profile_file } => {
            let file = inputs.field(profile_file)?;
            boundary_from_profile(&read_profile(&file)?, grid)
        }
        BoundaryConfig::HarmonicTrace { degree, amplitude } => boundary_from_harmonic(*degree, *amplitude, grid),
    }
}

fn cmd_solve2d(a: &Solve2dArgs, inputs: &mut Inputs) -> Result<Option<Report>> {
    let cfg: SolveConfig = read_config(&a.config, inputs)?;
    let grid = GridSpec::new(&cfg.grid.lo, &cfg.grid.hi, &cfg.grid.n)?;
    let bdry = boundary_for(&cfg, &grid, inputs)?;
    let opts = cfg.options(grid.dim());
    let out = solve(&bdry, cfg.beta, &opts)?;
    let mut meta = BTreeMap::new();
    meta.insert("sweeps".to_string(), json!(out.sweeps));
    meta.insert("residual_u".to_string(), json!(out.residual.0));
    meta.insert("residual_v".to_string(), json!(out.residual.1));
    meta.insert("omega".to_string(), json!(out.omega));
    meta.insert("boundary_kind".to_string(), to_value(&bdry.kind()));
    let mut report = Report::new(&a.out, to_value(&cfg));
    report.write_field(&a.out, &out.pair, &meta)?;
    println!(
        "converged in {} sweeps, residual ({:.3e}, {:.3e})",
        out.sweeps, out.residual.0, out.residual.1
    );
    Ok(Some(report))
}

fn cmd_diagnose(a: &DiagnoseArgs, inputs: &mut Inputs) -> Result<Option<Report>> {
    let file = inputs.field(&a.field)?;
    let pair = &file.pair;
    let dim = pair.grid().dim();
    let x0 = parse_center(&a.center, dim)?;
    let radii = parse_radii(&a.radii)?;
    let opts = ScanOptions::for_dim(dim)?;
    let rep = almgren_scan(pair, &x0, &radii, &opts)?;
    let acf = acf_scan(pair, &x0, &radii, &opts)?;

    let mut csv = String::from("r,H,E,N,J,ball_mass\n");
    for i in 0..radii.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            radii[i],
            rep.h_values[i],
            rep.e_values[i],
            fmt_opt(rep.frequency[i]),
            rep.j_values[i],
            rep.ball_mass[i]
        );
    }
    let doubling = match &a.doubling {
        Some(s) => {
            let d = parse_list("doubling", s)?;
            if d.len() != 2 {
                return Err(PslabError::InvalidArgument("doubling expects d1,d2".into()));
            }
            Some(check_doubling(&rep, d[0], d[1])?)
        }
        None => None,
    };
    let growth = growth_exponent(&rep).ok();
    let sidecar = json!({
        "center": x0,
        "verdicts": rep.verdicts,
        "d_estimate": rep.d_estimate,
        "boundary_margin": rep.boundary_margin,
        "acf": {
            "fitted_c": acf.fitted_c,
            "verdict": acf.verdict,
            "corrected": acf.corrected,
        },
        "doubling": doubling,
        "growth": growth,
        "dh_identity": rep.dh_identity,
        "dh_numeric": rep.dh_numeric,
    });
    let mut report = Report::new(&a.out, to_value(a));
    report.write(&a.out, &csv)?;
    report.write(&a.out.with_extension("json"), &pretty(&sidecar)?)?;
    let freqs: Vec<f64> = rep.frequency.iter().map(|n| n.unwrap_or(f64::NAN)).collect();
    report
        .fingerprint
        .add("r", &radii)
        .add("H", &rep.h_values)
        .add("E", &rep.e_values)
        .add("N", &freqs)
        .add("J", &rep.j_values)
        .add("ball_mass", &rep.ball_mass);
    for v in &rep.verdicts {
        println!("{:<26} {}  (max violation {:.3e})", v.name, if v.pass { "ok" } else { "VIOLATED" }, v.max_violation);
    }
    Ok(Some(report))
}

fn pretty(v: &Value) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| PslabError::Format(e.to_string()))
}

fn cmd_blowdown(a: &BlowdownArgs, inputs: &mut Inputs) -> Result<Option<Report>> {
    let file = inputs.field(&a.field)?;
    let pair = &file.pair;
    let dim = pair.grid().dim();
    let x0 = parse_center(&a.center, dim)?;
    let radii = parse_list("R-list", &a.r_list)?;
    let opts = ScanOptions::for_dim(dim)?;
    let ref_grid = GridSpec::cube(dim, -1.0, 1.0, a.ref_n)?;
    let mut csv = String::from("R,sup_dist,H1_dist,ratio\n");
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for &r in &radii {
        let (_, rep) = blow_down(pair, &x0, r, &ref_grid, &opts)?;
        let _ = writeln!(csv, "{},{},{},{}", r, rep.sup_distance, rep.h1_distance, rep.ratio);
        cols[0].push(rep.sup_distance);
        cols[1].push(rep.h1_distance);
        cols[2].push(rep.ratio);
    }
    let mut report = Report::new(&a.out, to_value(a));
    report.write(&a.out, &csv)?;
    report
        .fingerprint
        .add("R", &radii)
        .add("sup_dist", &cols[0])
        .add("H1_dist", &cols[1])
        .add("ratio", &cols[2]);
    print!("{csv}");
    Ok(Some(report))
}

fn unit_directions(dim: usize) -> Vec<Vec<f64>> {
    let last = dim - 1;
    let mut e_n = vec![0.0; dim];
    e_n[last] = 1.0;
    let mut out = vec![e_n];
    if dim >= 2 {
        let mut d1 = vec![0.0; dim];
        d1[0] = 1.0 / 2f64.sqrt();
        d1[last] = 1.0 / 2f64.sqrt();
        let mut d2 = vec![0.0; dim];
        d2[0] = -1.0 / 5f64.sqrt();
        d2[last] = 2.0 / 5f64.sqrt();
        out.push(d1);
        out.push(d2);
    }
    out
}

fn cmd_asymptotics(a: &AsymptoticsArgs, inputs: &mut Inputs) -> Result<Option<Report>> {
    let file = inputs.field(&a.field)?;
    let pair = &file.pair;
    let grid = pair.grid();
    let last = grid.dim() - 1;
    let mut report = Report::new(&a.out, to_value(a));
    let mut blocks = serde_json::Map::new();
    for op in a.ops.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match op {
            "decay" => {
                let slab = match &a.slab {
                    Some(s) => {
                        let v = parse_list("slab", s)?;
                        if v.len() != 2 {
                            return Err(PslabError::InvalidArgument("slab expects a,b".into()));
                        }
                        (v[0], v[1])
                    }
                    None => (grid.hi()[last] / 4.0, grid.hi()[last] / 2.0),
                };
                let fit = decay_fit(pair, a.p, a.q, slab, None)?;
                report.fingerprint.add("decay", &[fit.rate, fit.amplitude, fit.r_squared]);
                blocks.insert("decay".into(), to_value(&fit));
            }
            "planes" => {
                if a.planes == 0 {
                    return Err(PslabError::InvalidArgument("planes must be positive".into()));
                }
                let (lo, hi) = (grid.lo()[last], grid.hi()[last]);
                // heights on nodes, strictly inside the box
                let cells = grid.n()[last] - 1;
                let lambdas: Vec<f64> = (1..=a.planes)
                    .map(|j| {
                        let idx = (j * cells) / (a.planes + 1);
                        lo + (hi - lo) * idx as f64 / cells as f64
                    })
                    .collect();
                let reps = lambdas
                    .iter()
                    .map(|&l| moving_plane_check(pair, l))
                    .collect::<Result<Vec<_>>>()?;
                let mut csv = String::from("lambda,max_violation_u,max_violation_v,coverage\n");
                for r in &reps {
                    let _ = writeln!(csv, "{},{},{},{}", r.lambda, r.max_violation_u, r.max_violation_v, r.coverage);
                }
                let stem = a.out.file_stem().map_or("asym".into(), |s| s.to_string_lossy().into_owned());
                let csv_path = a.out.with_file_name(format!("{stem}_planes.csv"));
                report.write(&csv_path, &csv)?;
                let vu: Vec<f64> = reps.iter().map(|r| r.max_violation_u).collect();
                let vv: Vec<f64> = reps.iter().map(|r| r.max_violation_v).collect();
                report.fingerprint.add("lambda", &lambdas).add("viol_u", &vu).add("viol_v", &vv);
                blocks.insert("planes".into(), to_value(&reps));
            }
            "cone" => {
                let far = far_region(pair, a.p, a.q)?;
                let mut probes = Vec::new();
                for nu in unit_directions(grid.dim()) {
                    for region in [Region::Upper(far.m), Region::Lower(far.m)] {
                        probes.push(directional_monotonicity(pair, &nu, region)?);
                    }
                }
                let mins: Vec<f64> = probes.iter().map(|p| p.min_derivative).collect();
                report.fingerprint.add("cone", &mins);
                blocks.insert("cone".into(), json!({ "far_region": far, "probes": probes }));
            }
            "defect" => {
                let d = one_dimensionality_defect(pair)?;
                report.fingerprint.add("defect", &[d]);
                blocks.insert("defect".into(), json!(d));
            }
            "levelset" => {
                let ext = level_set_extent(pair, a.level)?;
                report
                    .fingerprint
                    .add("levelset", &[ext.min_xn.unwrap_or(f64::NAN), ext.max_xn.unwrap_or(f64::NAN)]);
                blocks.insert(
                    "levelset".into(),
                    json!({
                        "c": ext.c,
                        "min_xn": ext.min_xn,
                        "max_xn": ext.max_xn,
                        "zeta": ext.zeta(),
                        "columns": ext.columns_hit.len(),
                        "columns_hit": ext.columns_hit.iter().filter(|&&h| h).count(),
                        "all_columns_hit": ext.all_columns_hit(),
                    }),
                );
            }
            "strips" => {
                let s = strip_bound_scan(pair, a.strip)?;
                report.fingerprint.add("strips", &[s.sup_u_plus_grad, s.sup_v_plus_grad]);
                blocks.insert("strips".into(), to_value(&s));
            }
            other => {
                return Err(PslabError::InvalidArgument(format!(
                    "unknown op `{other}` (expected decay, planes, cone, defect, levelset, strips)"
                )))
            }
        }
    }
    let body = Value::Object(blocks);
    report.write(&a.out, &pretty(&body)?)?;
    println!("{}", pretty(&body)?);
    Ok(Some(report))
}

fn cmd_segregate(a: &SegregateArgs, inputs: &mut Inputs) -> Result<Option<Report>> {
    let cfg: SolveConfig = read_config(&a.config, inputs)?;
    let grid = GridSpec::new(&cfg.grid.lo, &cfg.grid.hi, &cfg.grid.n)?;
    let bdry = boundary_for(&cfg, &grid, inputs)?;
    let betas = parse_list("betas", &a.betas)?;
    let table = sweep(&bdry, &betas, &cfg.options(grid.dim()), a.alpha)?;
    let mut csv = String::from("beta,sup_uv,interaction,harm_residual,holder,sweeps\n");
    for r in &table.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.beta, r.sup_uv, r.interaction, r.harm_residual, r.holder, r.sweeps
        );
    }
    let mut config = to_value(&cfg);
    config["betas"] = json!(betas);
    config["alpha"] = json!(a.alpha);
    let mut report = Report::new(&a.out, config);
    report.write(&a.out, &csv)?;
    report
        .fingerprint
        .add("beta", &table.betas())
        .add("sup_uv", &table.column(|r| r.sup_uv))
        .add("interaction", &table.column(|r| r.interaction))
        .add("harm_residual", &table.column(|r| r.harm_residual))
        .add("holder", &table.column(|r| r.holder));
    print!("{csv}");
    if let Some(f) = &table.failure {
        // the partial table is on disk; still report the failure
        let text = serde_json::to_string_pretty(&json!({ "subcommand": "segregate", "partial": true, "failure": f }))
            .map_err(|e| PslabError::Format(e.to_string()))?;
        fs::write(report.dir.join(MANIFEST_NAME), text)?;
        return Err(PslabError::Structure(format!("sweep incomplete: {f}")));
    }
    Ok(Some(report))
}

fn cmd_verify(a: &VerifyArgs) -> Result<(Option<Report>, bool)> {
    let ids: Vec<u8> = match &a.only {
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u8>()
                    .ok()
                    .filter(|id| verify::ALL.contains(id))
                    .ok_or_else(|| PslabError::InvalidArgument(format!("unknown criterion `{t}`")))
            })
            .collect::<Result<_>>()?,
        None if a.quick => verify::QUICK.to_vec(),
        None => verify::ALL.to_vec(),
    };
    let ctx = verify::Context::new();
    let mut outcomes = Vec::new();
    for &id in &ids {
        let out = verify::run(id, &ctx);
        println!("{}", out.line());
        outcomes.push(out);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    let all = passed == outcomes.len();
    let report = match &a.out {
        Some(path) => {
            let mut report = Report::new(path, to_value(a));
            report.write(path, &pretty(&to_value(&outcomes))?)?;
            for o in &outcomes {
                report.fingerprint.add(o.name, &[if o.pass { 1.0 } else { 0.0 }]);
            }
            Some(report)
        }
        None => None,
    };
    Ok((report, all))
}
