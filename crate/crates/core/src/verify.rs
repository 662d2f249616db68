//! The acceptance criteria as executable checks.
//!
//! Every criterion returns a [`CriterionOutcome`] with its verdict, the
//! measured numbers behind it, its runtime against the budget and a
//! fingerprint of the arrays it produced. Fields shared between criteria
//! (the 1D profile and the 2D solve built from it) are computed once per
//! [`Context`].

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::OnceLock;
use std::time::Instant;

use serde::Serialize;

use crate::asymptotics::{
    cosh_decay_oracle, cosh_rate_fit, decay_fit, directional_monotonicity, far_region, moving_plane_check,
    one_dimensionality_defect, Region, COSH_SPACING,
};
use crate::error::{PslabError, Result};
use crate::field::{harmonic_parts, interpolate, linear_pair, GridSpec, SolutionPair};
use crate::fingerprint::Fingerprint;
use crate::monotonicity::{acf_scan, almgren_scan, blow_down, gamma_constant, spherical_rayleigh, ScanOptions};
use crate::ode1d::{center_and_symmetry_defect, energy_invariant, solve_heteroclinic, Profile1D};
use crate::segregation::sweep;
use crate::solver::{boundary_from_harmonic, boundary_from_profile, solve, SolveOptions};

/// Relaxation factor for the 257² lift solve; close to the optimal SOR
/// factor `2 / (1 + sin(π h / 16))` of that grid.
pub const LIFT_OMEGA: f64 = 1.97;
/// Relaxation factor for the 129² segregation sweep.
pub const SWEEP_OMEGA: f64 = 1.9;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
    pub fingerprint: Option<String>,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        let budget = self.budget_seconds.map_or(String::new(), |b| format!(" / {b:.0}s"));
        format!(
            "criterion {:>2} {:<34} {}  ({:.2}s{budget})  {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

/// Lazily built inputs shared by several criteria.
#[derive(Default)]
pub struct Context {
    profile: OnceLock<std::result::Result<Profile1D, String>>,
    lift: OnceLock<std::result::Result<SolutionPair, String>>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    /// The criterion-3 profile: `L = 30`, `n = 6001`, slope 1, tol 1e−10.
    pub fn profile(&self) -> Result<&Profile1D> {
        self.profile
            .get_or_init(|| solve_heteroclinic(30.0, 6001, 1.0, 1e-10, 100).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| PslabError::Structure(format!("profile unavailable: {e}")))
    }

    /// The criterion-4 field: 257² on `[−8, 8]²`, `β = 1`, tol 1e−9.
    pub fn lift(&self) -> Result<&SolutionPair> {
        self.lift
            .get_or_init(|| {
                let build = || -> Result<SolutionPair> {
                    let grid = GridSpec::cube(2, -8.0, 8.0, 257)?;
                    let bdry = boundary_from_profile(self.profile()?, &grid)?;
                    let opts = SolveOptions {
                        tol: 1e-9,
                        omega: LIFT_OMEGA,
                        ..SolveOptions::for_dim(2)
                    };
                    Ok(solve(&bdry, 1.0, &opts)?.pair)
                };
                build().map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| PslabError::Structure(format!("lifted field unavailable: {e}")))
    }
}

struct Check {
    pass: bool,
    detail: String,
    fingerprint: Option<Fingerprint>,
}

impl Check {
    fn new() -> Self {
        Self {
            pass: true,
            detail: String::new(),
            fingerprint: None,
        }
    }

    fn require(&mut self, ok: bool, what: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(what.as_ref());
        if !ok {
            self.detail.push_str(" [x]");
            self.pass = false;
        }
    }

    fn fp(&mut self) -> &mut Fingerprint {
        self.fingerprint.get_or_insert_with(Fingerprint::new)
    }
}

pub const ALL: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
pub const QUICK: [u8; 5] = [1, 2, 3, 4, 5];

pub fn name(id: u8) -> &'static str {
    match id {
        1 => "exact-linear diagnostics",
        2 => "degree-2 oracle",
        3 => "1D heteroclinic",
        4 => "2D lift + moving planes",
        5 => "blow-down trend",
        6 => "Almgren monotonicity",
        7 => "ACF shape",
        8 => "segregation sweep",
        9 => "decay lemma oracle",
        10 => "determinism",
        _ => "unknown",
    }
}

fn budget(id: u8) -> Option<f64> {
    match id {
        1 | 2 => Some(10.0),
        3 => Some(5.0),
        4 => Some(60.0),
        5 | 6 => Some(30.0),
        7 => Some(20.0),
        8 => Some(120.0),
        9 => Some(2.0),
        _ => None,
    }
}

/// Runs one criterion. Errors inside a criterion become a failing outcome.
pub fn run(id: u8, ctx: &Context) -> CriterionOutcome {
    let start = Instant::now();
    let result = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(ctx),
        4 => criterion_4(ctx),
        5 => criterion_5(ctx),
        6 => criterion_6(ctx),
        7 => criterion_7(ctx),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        _ => Err(PslabError::InvalidArgument(format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget_seconds = budget(id);
    let (mut pass, mut detail, fingerprint) = match result {
        Ok(c) => (c.pass, c.detail, c.fingerprint.map(|f| f.finish())),
        Err(e) => (false, format!("error: {e}"), None),
    };
    if let Some(b) = budget_seconds {
        if seconds > b {
            pass = false;
            let _ = write!(detail, "; runtime {seconds:.1}s over {b:.0}s [x]");
        }
    }
    CriterionOutcome {
        id,
        name: name(id),
        pass,
        detail,
        seconds,
        budget_seconds,
        fingerprint,
    }
}

/// Runs criteria in order against one shared context.
pub fn run_all(ids: &[u8]) -> Vec<CriterionOutcome> {
    let ctx = Context::new();
    ids.iter()
        .map(|&id| {
            let out = run(id, &ctx);
            log::info!("{}", out.line());
            out
        })
        .collect()
}

fn radii_02_to_08() -> Vec<f64> {
    (2..=8).map(|k| k as f64 / 10.0).collect()
}

fn criterion_1() -> Result<Check> {
    let grid = GridSpec::cube(2, -1.0, 1.0, 513)?;
    let pair = linear_pair(&grid, 1.0)?;
    let opts = ScanOptions::for_dim(2)?;
    let radii = radii_02_to_08();
    let rep = almgren_scan(&pair, &[0.0, 0.0], &radii, &opts)?;
    let h_err = radii
        .iter()
        .zip(&rep.h_values)
        .map(|(r, h)| (h - PI * r * r).abs() / (PI * r * r))
        .fold(0.0, f64::max);
    let n_err = rep.reported_frequencies().map(|(_, n)| (n - 1.0).abs()).fold(0.0, f64::max);
    let j_ref = PI * PI / 4.0;
    let j_err = rep.j_values.iter().map(|j| (j - j_ref).abs() / j_ref).fold(0.0, f64::max);
    let mut c = Check::new();
    c.require(h_err <= 1e-3, format!("max rel H err {h_err:.2e} <= 1e-3"));
    c.require(n_err <= 5e-3, format!("max |N-1| {n_err:.2e} <= 5e-3"));
    c.require(j_err <= 1e-2, format!("max rel J err {j_err:.2e} <= 1e-2"));
    c.fp().add("H", &rep.h_values).add("E", &rep.e_values).add("J", &rep.j_values);
    Ok(c)
}

fn criterion_2() -> Result<Check> {
    let grid = GridSpec::cube(2, -1.0, 1.0, 513)?;
    let pair = harmonic_parts(&grid, 2, 1.0, 1.0)?;
    let opts = ScanOptions::for_dim(2)?;
    let radii = radii_02_to_08();
    let rep = almgren_scan(&pair, &[0.0, 0.0], &radii, &opts)?;
    let n_err = rep.reported_frequencies().map(|(_, n)| (n - 2.0).abs()).fold(0.0, f64::max);
    let i4 = radii.iter().position(|&r| (r - 0.4).abs() < 1e-12).unwrap();
    let i8 = radii.iter().position(|&r| (r - 0.8).abs() < 1e-12).unwrap();
    let ratio = rep.h_values[i8] / rep.h_values[i4];
    let ratio_err = (ratio - 16.0).abs() / 16.0;
    let mut c = Check::new();
    c.require(n_err <= 1e-2, format!("max |N-2| {n_err:.2e} <= 1e-2"));
    c.require(ratio_err <= 2e-2, format!("H(0.8)/H(0.4) = {ratio:.4}, rel err {ratio_err:.2e} <= 2e-2"));
    c.fp().add("H", &rep.h_values).add("E", &rep.e_values);
    Ok(c)
}

fn criterion_3(ctx: &Context) -> Result<Check> {
    let p = ctx.profile()?;
    let (du_min, dv_max) = p.monotonicity_margins();
    let (t0, defect) = center_and_symmetry_defect(p)?;
    let energy = energy_invariant(p)?;
    let fit = decay_fit(&p.to_pair()?, 1.0, 2.0, (7.5, 15.0), None)?;
    let mut c = Check::new();
    c.require(p.residual_norm <= 1e-10, format!("residual {:.2e}", p.residual_norm));
    c.require(du_min > 0.0 && dv_max < 0.0, format!("min du {du_min:.2e} > 0, max dv {dv_max:.2e} < 0"));
    c.require(defect <= 1e-6, format!("symmetry defect {defect:.2e} <= 1e-6 (t0 {t0:.1e})"));
    c.require(
        energy.max_deviation <= 1e-6,
        format!("energy deviation {:.2e} <= 1e-6", energy.max_deviation),
    );
    c.require(
        fit.rate < 0.0 && fit.r_squared >= 0.99,
        format!("decay rate {:.3} < 0, r2 {:.4} >= 0.99", fit.rate, fit.r_squared),
    );
    c.fp().add("u", &p.u).add("v", &p.v);
    Ok(c)
}

fn criterion_4(ctx: &Context) -> Result<Check> {
    let pair = ctx.lift()?;
    let mut c = Check::new();
    let defect = one_dimensionality_defect(pair)?;
    c.require(defect <= 1e-6, format!("1D defect {defect:.2e} <= 1e-6"));

    // node heights, so the reflections land on nodes
    let lambdas: Vec<f64> = (0..25).map(|j| -6.0 + 0.5 * j as f64).collect();
    let mut worst: f64 = 0.0;
    let mut curve = Vec::new();
    for &l in &lambdas {
        let r = moving_plane_check(pair, l)?;
        let v = r.max_violation_u.max(r.max_violation_v);
        curve.push(v);
        worst = worst.max(v);
    }
    c.require(worst <= 1e-8, format!("max plane violation {worst:.2e} <= 1e-8 over 25 heights"));

    let far = far_region(pair, 1.0, 2.0)?;
    let dirs = [
        vec![0.0, 1.0],
        vec![1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()],
        vec![-1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt()],
    ];
    let mut min_d = f64::INFINITY;
    for nu in &dirs {
        for region in [Region::Upper(far.m), Region::Lower(far.m)] {
            min_d = min_d.min(directional_monotonicity(pair, nu, region)?.min_derivative);
        }
    }
    c.require(min_d > 0.0, format!("min directional derivative {min_d:.3e} > 0 beyond M = {:.3}", far.m));
    c.fp().add("u", pair.u().values()).add("v", pair.v().values()).add("planes", &curve);
    Ok(c)
}

fn criterion_5(ctx: &Context) -> Result<Check> {
    let pair = ctx.lift()?;
    let gamma = gamma_constant(2)?;
    let opts = ScanOptions::for_dim(2)?;
    let ref_grid = GridSpec::cube(2, -1.0, 1.0, 129)?;
    let mut sup = Vec::new();
    let mut ratios = Vec::new();
    for r in [2.0, 3.0, 4.0, 5.0, 6.0] {
        let (_, rep) = blow_down(pair, &[0.0, 0.0], r, &ref_grid, &opts)?;
        sup.push(rep.sup_distance);
        ratios.push(rep.ratio);
    }
    let decreasing = sup.windows(2).all(|w| w[1] < w[0]);
    let last = *sup.last().unwrap();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let band = (ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ratios.iter().cloned().fold(f64::INFINITY, f64::min)) / mean;
    let mut c = Check::new();
    c.require(
        (gamma.gamma - 1.0 / PI.sqrt()).abs() < 1e-12,
        format!("gamma {:.6}", gamma.gamma),
    );
    c.require(decreasing, format!("sup distances {}", fmt_list(&sup)));
    c.require(last <= 0.05, format!("final {last:.4} <= 0.05"));
    c.require(band <= 0.3, format!("sqrt(H)/R band {:.1}% of mean <= 30%", 100.0 * band));
    c.fp().add("sup", &sup).add("ratio", &ratios);
    Ok(c)
}

/// Three centers on the interface row region `{|u − v| < 0.2}`.
fn interface_centers(pair: &SolutionPair) -> Result<Vec<[f64; 2]>> {
    let centers = [[-2.0, 0.0], [0.0, 0.1], [2.0, -0.1]];
    for x in &centers {
        let d = interpolate(pair.u(), x)? - interpolate(pair.v(), x)?;
        if d.abs() >= 0.2 {
            return Err(PslabError::Structure(format!("center {x:?} has |u - v| = {:.3}", d.abs())));
        }
    }
    Ok(centers.to_vec())
}

fn twelve_radii() -> Vec<f64> {
    (0..12).map(|k| 0.5 + 5.0 * k as f64 / 11.0).collect()
}

fn criterion_6(ctx: &Context) -> Result<Check> {
    let pair = ctx.lift()?;
    let opts = ScanOptions::for_dim(2)?;
    let radii = twelve_radii();
    let mut c = Check::new();
    for x0 in interface_centers(pair)? {
        let rep = almgren_scan(pair, &x0, &radii, &opts)?;
        let n = rep.verdict("frequency_nondecreasing").unwrap();
        let dh = rep.verdict("dh_identity").unwrap();
        c.require(n.pass, format!("{x0:?}: N drop {:.1e} <= 5e-3", n.max_violation));
        c.require(dh.pass, format!("dH err {:.2}% <= 2%", 100.0 * dh.max_violation));
        let freqs: Vec<f64> = rep.reported_frequencies().map(|(_, n)| n).collect();
        c.fp().add("N", &freqs).add("H", &rep.h_values);
    }
    Ok(c)
}

fn criterion_7(ctx: &Context) -> Result<Check> {
    let pair = ctx.lift()?;
    let opts = ScanOptions::for_dim(2)?;
    let radii = twelve_radii();
    let mut c = Check::new();
    for x0 in interface_centers(pair)? {
        let rep = acf_scan(pair, &x0, &radii, &opts)?;
        c.require(
            rep.verdict.pass,
            format!("{x0:?}: C = {:.3}, corrected drop {:.1e} <= 1e-3", rep.fitted_c, rep.verdict.max_violation),
        );
        c.fp().add("J", &rep.j_values);
    }
    let grid = GridSpec::cube(2, -1.0, 1.0, 513)?;
    let lin = linear_pair(&grid, 1.0)?;
    let q = spherical_rayleigh(&lin, &[0.0, 0.0], 0.5, &opts)?;
    c.require(
        (q.lambda1 - 1.0).abs() <= 1e-2 && (q.lambda2 - 1.0).abs() <= 1e-2,
        format!("Lambda = ({:.4}, {:.4})", q.lambda1, q.lambda2),
    );
    c.require((q.gamma_sum - 2.0).abs() <= 2e-2, format!("gamma_sum {:.4}", q.gamma_sum));
    Ok(c)
}

fn criterion_8() -> Result<Check> {
    let grid = GridSpec::cube(2, -1.0, 1.0, 129)?;
    let bdry = boundary_from_harmonic(1, 1.0, &grid)?;
    let opts = SolveOptions {
        omega: SWEEP_OMEGA,
        ..SolveOptions::for_dim(2)
    };
    let table = sweep(&bdry, &[1.0, 4.0, 16.0, 64.0, 256.0], &opts, 0.9)?;
    let mut c = Check::new();
    c.require(table.is_complete(), table.failure.clone().unwrap_or_else(|| "sweep complete".into()));
    let inter = table.column(|r| r.interaction);
    let sup = table.column(|r| r.sup_uv);
    let harm = table.column(|r| r.harm_residual);
    let holder = table.column(|r| r.holder);
    c.require(inter.windows(2).all(|w| w[1] < w[0]), format!("interaction {}", fmt_list(&inter)));
    c.require(sup.windows(2).all(|w| w[1] < w[0]), format!("sup uv {}", fmt_list(&sup)));
    if let (Some(first), Some(last)) = (harm.first(), harm.last()) {
        c.require(*last <= 0.1 * first, format!("harm residual {}", fmt_list(&harm)));
    }
    let factor = holder.iter().cloned().fold(0.0, f64::max) / holder.iter().cloned().fold(f64::INFINITY, f64::min);
    c.require(factor <= 3.0, format!("holder factor {factor:.3} <= 3"));
    c.fp().add("interaction", &inter).add("sup_uv", &sup).add("harm", &harm).add("holder", &holder);
    Ok(c)
}

fn criterion_9() -> Result<Check> {
    let mut c = Check::new();
    let mut worst = 0.0f64;
    let mut scaled_ok = true;
    for k in [1.0, 4.0, 9.0] {
        for l in [3.0, 5.0] {
            let o = cosh_decay_oracle(k, 1.0, l, COSH_SPACING)?;
            worst = worst.max(o.relative_error / (5.0 * o.h * o.h));
            scaled_ok &= o.relative_error <= 5.0 * o.h * o.h;
        }
    }
    c.require(scaled_ok, format!("max rel err {:.3} of the 5h^2 allowance", worst));
    let mut rates = Vec::new();
    for k in [1.0f64, 4.0, 9.0] {
        let rate = cosh_rate_fit(k, 1.0, &[3.0, 5.0], COSH_SPACING)?;
        rates.push(rate);
        c.require(rate >= 0.9 * k.sqrt(), format!("K = {k}: rate {rate:.4} >= {:.2}", 0.9 * k.sqrt()));
    }
    c.fp().add("rates", &rates);
    Ok(c)
}

/// Criteria 1–5 under a 1-thread and an 8-thread pool; every fingerprint
/// must agree.
fn criterion_10() -> Result<Check> {
    let runs = [1usize, 8]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| PslabError::InvalidArgument(e.to_string()))?;
            Ok(pool.install(|| {
                let ctx = Context::new();
                QUICK.iter().map(|&id| run(id, &ctx).fingerprint).collect::<Vec<_>>()
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut c = Check::new();
    for (i, id) in QUICK.iter().enumerate() {
        let (a, b) = (&runs[0][i], &runs[1][i]);
        let same = a.is_some() && a == b;
        let short = a.as_deref().map_or("none", |s| &s[..12]);
        c.require(same, format!("{id}: {short}"));
    }
    Ok(c)
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}
