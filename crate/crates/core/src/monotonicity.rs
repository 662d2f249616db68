//! Almgren frequency, doubling, ACF functional, spherical Rayleigh
//! quotients, blow-down normalization and growth exponents.
//!
//! With `N` the dimension and `β` the pair's coupling:
//!
//! * `H(r) = r^{1−N} ∫_{∂B_r} u² + v²`
//! * `E(r) = r^{2−N} ∫_{B_r} |∇u|² + |∇v|² + β u² v²`
//! * `N(r) = E / H`
//! * `J(r) = r^{−4} ∫_{B_r} (|∇u|² + βu²v²) |y−x₀|^{2−N} · ∫_{B_r} (|∇v|² + βu²v²) |y−x₀|^{2−N}`
//! * `∂_r H = 2 r^{1−N} ∫_{B_r} |∇u|² + |∇v|² + 2βu²v²`

use serde::Serialize;

use crate::error::{PslabError, Result};
use crate::field::{default_shells, sample_pair, sphere_area, GridSpec, ScalarField, ShellProfile, SolutionPair, SphereQuadrature};

/// Slack on the discrete Almgren monotonicity check.
pub const FREQUENCY_SLACK: f64 = 5e-3;
/// Relative slack for `H` monotonicity and the doubling bounds.
pub const QUADRATURE_SLACK: f64 = 1e-3;
/// Relative agreement required between `∂_r H` and its integral identity.
pub const DH_IDENTITY_TOL: f64 = 0.02;
/// Relative slack on the corrected ACF monotonicity.
pub const ACF_SLACK: f64 = 1e-3;
/// Below this, `H` is treated as zero.
pub const H_FLOOR: f64 = 1e-14;

/// Quadrature and resolution settings shared by the scans.
#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub quad: SphereQuadrature,
    /// Radial shells per grid spacing.
    pub shells_per_cell: f64,
    /// Radii below this many cells get no frequency value.
    pub min_radius_cells: f64,
}

impl ScanOptions {
    pub fn for_dim(dim: usize) -> Result<Self> {
        Ok(Self {
            quad: SphereQuadrature::for_dim(dim)?,
            shells_per_cell: 4.0,
            min_radius_cells: 4.0,
        })
    }

    fn shells(&self, r: f64, h: f64) -> usize {
        if self.shells_per_cell == 4.0 {
            default_shells(r, h)
        } else {
            ((self.shells_per_cell * r / h).ceil() as usize).max(8)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub max_violation: f64,
}

impl Verdict {
    fn new(name: &str, max_violation: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            pass: max_violation <= tolerance,
            max_violation,
        }
    }
}

/// Nearest integer to the frequency at the largest radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeEstimate {
    pub frequency: f64,
    pub degree: i64,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub x0: Vec<f64>,
    pub radii: Vec<f64>,
    pub h_values: Vec<f64>,
    pub e_values: Vec<f64>,
    /// `None` below `min_radius_cells · h`.
    pub frequency: Vec<Option<f64>>,
    pub j_values: Vec<f64>,
    pub ball_mass: Vec<f64>,
    /// `2 r^{1−N} ∫_{B_r} |∇u|² + |∇v|² + 2βu²v²`
    pub dh_identity: Vec<f64>,
    /// Centered difference of `H` in `r`.
    pub dh_numeric: Vec<f64>,
    pub d_estimate: Option<DegreeEstimate>,
    /// Distance from the largest ball to the box faces.
    pub boundary_margin: f64,
    pub verdicts: Vec<Verdict>,
}

impl MonotonicityReport {
    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn reported_frequencies(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.radii
            .iter()
            .zip(&self.frequency)
            .filter_map(|(&r, n)| n.map(|n| (r, n)))
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(PslabError::InvalidArgument("no radii given".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(PslabError::InvalidArgument("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PslabError::InvalidArgument("radii must be strictly increasing".into()));
    }
    Ok(())
}

/// `H(x0, r)`: the angular integral of `u² + v²` at radius `r`.
pub fn h_value(pair: &SolutionPair, x0: &[f64], r: f64, quad: &SphereQuadrature) -> Result<f64> {
    pair.grid().check_ball(x0, r)?;
    let mut acc = 0.0;
    for (node, &w) in quad.nodes().iter().zip(quad.weights()) {
        let s = sample_pair(pair, x0, [r * node[0], r * node[1], r * node[2]], *node)?;
        acc += w * (s.u * s.u + s.v * s.v);
    }
    Ok(acc)
}

/// Centered difference of `H`, one-sided near the admissible limit.
fn dh_numeric(pair: &SolutionPair, x0: &[f64], r: f64, quad: &SphereQuadrature) -> Result<f64> {
    let h = pair.grid().h();
    let delta = (2.0 * h).min(0.25 * r);
    let rmax = pair.grid().max_admissible_radius(x0);
    if r + delta <= rmax {
        Ok((h_value(pair, x0, r + delta, quad)? - h_value(pair, x0, r - delta, quad)?) / (2.0 * delta))
    } else {
        Ok((h_value(pair, x0, r, quad)? - h_value(pair, x0, r - delta, quad)?) / delta)
    }
}

/// Evaluates `H`, `E`, `N`, `J` and the ball mass on a list of radii and
/// checks the monotonicity statements they should satisfy.
pub fn almgren_scan(pair: &SolutionPair, x0: &[f64], radii: &[f64], opts: &ScanOptions) -> Result<MonotonicityReport> {
    check_radii(radii)?;
    let grid = pair.grid();
    let dim = grid.dim() as i32;
    let h = grid.h();
    grid.check_ball(x0, *radii.last().unwrap())?;

    let mut report = MonotonicityReport {
        x0: x0.to_vec(),
        radii: radii.to_vec(),
        h_values: Vec::new(),
        e_values: Vec::new(),
        frequency: Vec::new(),
        j_values: Vec::new(),
        ball_mass: Vec::new(),
        dh_identity: Vec::new(),
        dh_numeric: Vec::new(),
        d_estimate: None,
        boundary_margin: grid.max_admissible_radius(x0) + h - radii.last().unwrap(),
        verdicts: Vec::new(),
    };

    for &r in radii {
        let profile = ShellProfile::compute(pair, x0, r, &opts.quad, opts.shells(r, h), |s| {
            let gu = s.grad_u_sq();
            let gv = s.grad_v_sq();
            let c = s.coupling();
            [gu + gv + c, s.u * s.u + s.v * s.v, gu + c, gv + c, gu + gv + 2.0 * c]
        })?;
        let hv = profile.shells.last().unwrap()[1];
        if !(hv > H_FLOOR) {
            return Err(PslabError::DegenerateCenter { radius: r, value: hv });
        }
        let e = r.powi(2 - dim) * profile.ball(0);
        report.h_values.push(hv);
        report.e_values.push(e);
        report.frequency.push(if r >= opts.min_radius_cells * h { Some(e / hv) } else { None });
        report.ball_mass.push(profile.ball(1));
        report.j_values.push(profile.kernel(2) * profile.kernel(3) / r.powi(4));
        report.dh_identity.push(2.0 * r.powi(1 - dim) * profile.ball(4));
        report.dh_numeric.push(dh_numeric(pair, x0, r, &opts.quad)?);
    }

    let freqs: Vec<f64> = report.reported_frequencies().map(|(_, n)| n).collect();
    let n_drop = freqs.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max);
    let h_drop = report
        .h_values
        .windows(2)
        .map(|w| ((w[0] - w[1]) / w[0]).max(0.0))
        .fold(0.0, f64::max);
    let dh_err = report
        .dh_identity
        .iter()
        .zip(&report.dh_numeric)
        .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
        .fold(0.0, f64::max);
    report.verdicts = vec![
        Verdict::new("frequency_nondecreasing", n_drop, FREQUENCY_SLACK),
        Verdict::new("h_nondecreasing", h_drop, QUADRATURE_SLACK),
        Verdict::new("dh_identity", dh_err, DH_IDENTITY_TOL),
    ];
    report.d_estimate = freqs.last().map(|&n| {
        let degree = n.round() as i64;
        DegreeEstimate {
            frequency: n,
            degree,
            distance: (n - degree as f64).abs(),
        }
    });
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingVerdict {
    pub pass: bool,
    /// Smallest `ratio / ((r₂/r₁)^{2d₁})` over radius pairs.
    pub lower_margin: f64,
    /// Smallest `e^{d₂}(r₂/r₁)^{2d₂} / ratio` over radius pairs.
    pub upper_margin: f64,
    pub worst_pair: (f64, f64),
}

/// Checks `(r₂/r₁)^{2d₁} ≤ H(r₂)/H(r₁) ≤ e^{d₂}(r₂/r₁)^{2d₂}` for every pair
/// of scanned radii carrying a frequency value.
pub fn check_doubling(report: &MonotonicityReport, d1: f64, d2: f64) -> Result<DoublingVerdict> {
    let pts: Vec<(f64, f64, f64)> = report
        .radii
        .iter()
        .zip(&report.h_values)
        .zip(&report.frequency)
        .filter_map(|((&r, &h), n)| n.map(|n| (r, h, n)))
        .collect();
    if pts.len() < 2 {
        return Err(PslabError::InsufficientData("doubling needs two radii with frequency values".into()));
    }
    for &(r, _, n) in &pts {
        if d1 > n + FREQUENCY_SLACK {
            return Err(PslabError::Misuse(format!("d1 = {d1} exceeds N = {n:.6} at r = {r}")));
        }
        if d2 < n - FREQUENCY_SLACK {
            return Err(PslabError::Misuse(format!("d2 = {d2} is below N = {n:.6} at r = {r}")));
        }
    }
    let mut lower_margin = f64::INFINITY;
    let mut upper_margin = f64::INFINITY;
    let mut worst_pair = (pts[0].0, pts[1].0);
    let mut worst = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (r1, h1, _) = pts[i];
            let (r2, h2, _) = pts[j];
            let ratio = h2 / h1;
            let q = r2 / r1;
            let lo = ratio / q.powf(2.0 * d1);
            let hi = d2.exp() * q.powf(2.0 * d2) / ratio;
            lower_margin = lower_margin.min(lo);
            upper_margin = upper_margin.min(hi);
            if lo.min(hi) < worst {
                worst = lo.min(hi);
                worst_pair = (r1, r2);
            }
        }
    }
    Ok(DoublingVerdict {
        pass: lower_margin >= 1.0 - QUADRATURE_SLACK && upper_margin >= 1.0 - QUADRATURE_SLACK,
        lower_margin,
        upper_margin,
        worst_pair,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AcfReport {
    pub radii: Vec<f64>,
    pub j_values: Vec<f64>,
    /// Smallest `C ≥ 0` making `e^{−C r^{−1/2}} J` nondecreasing.
    pub fitted_c: f64,
    pub corrected: Vec<f64>,
    pub j_min: f64,
    pub j_max: f64,
    pub verdict: Verdict,
}

fn acf_value(pair: &SolutionPair, x0: &[f64], r: f64, opts: &ScanOptions) -> Result<f64> {
    let h = pair.grid().h();
    let profile = ShellProfile::compute(pair, x0, r, &opts.quad, opts.shells(r, h), |s| {
        let c = s.coupling();
        [s.grad_u_sq() + c, s.grad_v_sq() + c]
    })?;
    Ok(profile.kernel(0) * profile.kernel(1) / r.powi(4))
}

/// `J(r)` on a list of radii and the fitted constant of its corrected
/// monotonicity.
pub fn acf_scan(pair: &SolutionPair, x0: &[f64], radii: &[f64], opts: &ScanOptions) -> Result<AcfReport> {
    check_radii(radii)?;
    pair.grid().check_ball(x0, *radii.last().unwrap())?;
    let j_values = radii
        .iter()
        .map(|&r| acf_value(pair, x0, r, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(acf_from_values(radii, j_values))
}

/// Fits the corrected-monotonicity constant to given `J` samples.
pub fn acf_from_values(radii: &[f64], j_values: Vec<f64>) -> AcfReport {
    let positive = j_values.iter().all(|&j| j > 0.0);
    let mut fitted_c: f64 = 0.0;
    if positive {
        for k in 0..radii.len().saturating_sub(1) {
            let drop = j_values[k].ln() - j_values[k + 1].ln();
            let gain = radii[k].powf(-0.5) - radii[k + 1].powf(-0.5);
            if drop > 0.0 {
                fitted_c = fitted_c.max(drop / gain);
            }
        }
    }
    let corrected: Vec<f64> = radii
        .iter()
        .zip(&j_values)
        .map(|(&r, &j)| (-fitted_c * r.powf(-0.5)).exp() * j)
        .collect();
    let violation = corrected
        .windows(2)
        .map(|w| if w[0] > 0.0 { ((w[0] - w[1]) / w[0]).max(0.0) } else { 0.0 })
        .fold(0.0, f64::max);
    AcfReport {
        radii: radii.to_vec(),
        j_min: j_values.iter().copied().fold(f64::INFINITY, f64::min),
        j_max: j_values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        j_values,
        fitted_c,
        corrected,
        verdict: Verdict::new("acf_corrected_nondecreasing", violation, ACF_SLACK),
    }
}

/// `Γ(t) = √(((N−2)/2)² + t) − (N−2)/2`
pub fn gamma_fn(dim: usize, t: f64) -> f64 {
    let a = (dim as f64 - 2.0) / 2.0;
    (a * a + t).sqrt() - a
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayleighQuotients {
    pub radius: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `Γ(Λ₁) + Γ(Λ₂)`
    pub gamma_sum: f64,
    /// Centered difference of `log J` in `r`.
    pub log_j_slope: f64,
    /// `(−4 + 2 Γ(Λ₁) + 2 Γ(Λ₂)) / r`
    pub lower_bound: f64,
    pub inequality_holds: bool,
}

/// Spherical Rayleigh quotients
/// `Λ₁ = r² ∫_{∂B_r} (|∇_θ u|² + βu²v²) / ∫_{∂B_r} u²` (and `Λ₂` for `v`)
/// with the differential inequality for `log J` checked numerically.
pub fn spherical_rayleigh(pair: &SolutionPair, x0: &[f64], r: f64, opts: &ScanOptions) -> Result<RayleighQuotients> {
    let grid = pair.grid();
    grid.check_ball(x0, r)?;
    let mut acc = [0.0; 4];
    for (node, &w) in opts.quad.nodes().iter().zip(opts.quad.weights()) {
        let s = sample_pair(pair, x0, [r * node[0], r * node[1], r * node[2]], *node)?;
        let c = s.coupling();
        let vals = [s.tangential_u_sq() + c, s.tangential_v_sq() + c, s.u * s.u, s.v * s.v];
        for k in 0..4 {
            acc[k] += w * vals[k];
        }
    }
    if !(acc[2] > H_FLOOR) {
        return Err(PslabError::DegenerateComponent(format!("∫ u² vanishes on the sphere of radius {r}")));
    }
    if !(acc[3] > H_FLOOR) {
        return Err(PslabError::DegenerateComponent(format!("∫ v² vanishes on the sphere of radius {r}")));
    }
    let lambda1 = r * r * acc[0] / acc[2];
    let lambda2 = r * r * acc[1] / acc[3];
    let dim = grid.dim();
    let gamma_sum = gamma_fn(dim, lambda1) + gamma_fn(dim, lambda2);

    let h = grid.h();
    let delta = (2.0 * h).min(0.25 * r);
    let rmax = grid.max_admissible_radius(x0);
    let log_j_slope = if r + delta <= rmax {
        (acf_value(pair, x0, r + delta, opts)?.ln() - acf_value(pair, x0, r - delta, opts)?.ln()) / (2.0 * delta)
    } else {
        (acf_value(pair, x0, r, opts)?.ln() - acf_value(pair, x0, r - delta, opts)?.ln()) / delta
    };
    let lower_bound = (-4.0 + 2.0 * gamma_sum) / r;
    Ok(RayleighQuotients {
        radius: r,
        lambda1,
        lambda2,
        gamma_sum,
        log_j_slope,
        lower_bound,
        inequality_holds: log_j_slope >= lower_bound - 0.05 / r,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaConstant {
    pub dim: usize,
    pub gamma: f64,
    /// `|γ² ∫_{S^{N−1}} x_N² − 1|` with the closed form `|S^{N−1}| / N`.
    pub normalization_error: f64,
}

/// `γ = (∫_{S^{N−1}} x_N² dσ)^{−1/2}` by quadrature.
pub fn gamma_constant(dim: usize) -> Result<GammaConstant> {
    if !(2..=3).contains(&dim) {
        return Err(PslabError::Unsupported(format!("gamma constant in dimension {dim}")));
    }
    let quad = SphereQuadrature::for_dim(dim)?;
    let moment: f64 = quad
        .nodes()
        .iter()
        .zip(quad.weights())
        .map(|(x, w)| w * x[dim - 1] * x[dim - 1])
        .sum();
    let gamma = moment.powf(-0.5);
    let closed = sphere_area(dim) / dim as f64;
    Ok(GammaConstant {
        dim,
        gamma,
        normalization_error: (gamma * gamma * closed - 1.0).abs(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowdownReport {
    pub x0: Vec<f64>,
    pub radius: f64,
    /// `max_{B₁} max(|u_R − γx_N⁺|, |v_R − γx_N⁻|)`
    pub sup_distance: f64,
    /// Discrete `H¹(B₁)` distance to the same limit.
    pub h1_distance: f64,
    pub h_value: f64,
    /// `√H / R`
    pub ratio: f64,
    /// Coupling of the rescaled system, `β H R²`.
    pub beta: f64,
}

/// The blow-down `(u(x₀+Rx), v(x₀+Rx)) / √H(x₀,R)` resampled on `ref_grid`,
/// and its distance to `(γx_N⁺, γx_N⁻)` on the unit ball.
///
/// Reference nodes whose image leaves the data box (possible outside the
/// unit ball) take the value at the nearest point of the box.
pub fn blow_down(
    pair: &SolutionPair,
    x0: &[f64],
    radius: f64,
    ref_grid: &GridSpec,
    opts: &ScanOptions,
) -> Result<(SolutionPair, BlowdownReport)> {
    let grid = pair.grid();
    let dim = grid.dim();
    if ref_grid.dim() != dim {
        return Err(PslabError::InvalidArgument("reference grid dimension differs".into()));
    }
    if !(2..=3).contains(&dim) {
        return Err(PslabError::Unsupported(format!("blow-down in dimension {dim}")));
    }
    for d in 0..dim {
        if ref_grid.lo()[d] > -1.0 || ref_grid.hi()[d] < 1.0 {
            return Err(PslabError::InvalidArgument("reference grid must cover the unit ball".into()));
        }
    }
    let h_val = h_value(pair, x0, radius, &opts.quad)?;
    if !(h_val > H_FLOOR) {
        return Err(PslabError::DegenerateCenter { radius, value: h_val });
    }
    let scale = 1.0 / h_val.sqrt();
    let mut u = Vec::with_capacity(ref_grid.len());
    let mut v = Vec::with_capacity(ref_grid.len());
    for k in 0..ref_grid.len() {
        let x = ref_grid.point(k);
        let mut p = [0.0; 3];
        for d in 0..dim {
            p[d] = (x0[d] + radius * x[d]).clamp(grid.lo()[d], grid.hi()[d]);
        }
        let s = sample_pair(pair, &[0.0; 3], p, [0.0; 3])?;
        u.push(scale * s.u);
        v.push(scale * s.v);
    }
    let beta = pair.beta() * h_val * radius * radius;
    let rescaled = SolutionPair::new(
        ScalarField::new(ref_grid.clone(), u)?,
        ScalarField::new(ref_grid.clone(), v)?,
        beta,
    )?;

    let gamma = gamma_constant(dim)?.gamma;
    let last = dim - 1;
    let eu: Vec<f64> = (0..ref_grid.len())
        .map(|k| rescaled.u().values()[k] - gamma * ref_grid.point(k)[last].max(0.0))
        .collect();
    let ev: Vec<f64> = (0..ref_grid.len())
        .map(|k| rescaled.v().values()[k] - gamma * (-ref_grid.point(k)[last]).max(0.0))
        .collect();
    let in_ball = |k: usize| {
        let p = ref_grid.point(k);
        p[..dim].iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12
    };
    let hr = ref_grid.h();
    let cell = hr.powi(dim as i32);
    let strides = ref_grid.strides();
    let mut sup: f64 = 0.0;
    let mut l2 = 0.0;
    let mut grad2 = 0.0;
    for k in (0..ref_grid.len()).filter(|&k| in_ball(k)) {
        sup = sup.max(eu[k].abs()).max(ev[k].abs());
        l2 += (eu[k] * eu[k] + ev[k] * ev[k]) * cell;
        if !ref_grid.is_boundary(k) {
            for &s in &strides {
                let du = (eu[k + s] - eu[k - s]) / (2.0 * hr);
                let dv = (ev[k + s] - ev[k - s]) / (2.0 * hr);
                grad2 += (du * du + dv * dv) * cell;
            }
        }
    }
    let report = BlowdownReport {
        x0: x0.to_vec(),
        radius,
        sup_distance: sup,
        h1_distance: (l2 + grad2).sqrt(),
        h_value: h_val,
        ratio: h_val.sqrt() / radius,
        beta,
    };
    Ok((rescaled, report))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthEstimate {
    /// Half the least-squares slope of `log H` against `log r`.
    pub p_estimate: f64,
    pub mean_frequency: Option<f64>,
    /// `|p_estimate − mean N|`
    pub consistency: Option<f64>,
}

pub fn growth_exponent(report: &MonotonicityReport) -> Result<GrowthEstimate> {
    if report.radii.len() < 4 {
        return Err(PslabError::InsufficientData(format!(
            "growth exponent needs at least 4 radii, got {}",
            report.radii.len()
        )));
    }
    if report.h_values.iter().any(|&h| !(h > 0.0)) {
        return Err(PslabError::InsufficientData("H must be positive on every radius".into()));
    }
    let xs: Vec<f64> = report.radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = report.h_values.iter().map(|h| h.ln()).collect();
    let (slope, _, _) = linear_fit(&xs, &ys);
    let p_estimate = slope / 2.0;
    let freqs: Vec<f64> = report.reported_frequencies().map(|(_, n)| n).collect();
    let mean_frequency = if freqs.is_empty() {
        None
    } else {
        Some(freqs.iter().sum::<f64>() / freqs.len() as f64)
    };
    Ok(GrowthEstimate {
        p_estimate,
        mean_frequency,
        consistency: mean_frequency.map(|n| (p_estimate - n).abs()),
    })
}

/// Least squares `y ≈ a + b x`; returns `(b, a, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    (b, a, r2)
}
