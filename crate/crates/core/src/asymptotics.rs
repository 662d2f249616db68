//! Far-field structure of computed pairs: decay of `uᵖvᵠ`, moving planes,
//! directional monotonicity, one-dimensionality, level sets of `u − v` and
//! strip bounds.

use serde::{Deserialize, Serialize};

use crate::error::{PslabError, Result};
use crate::field::{centered_gradient, interpolate, GridSpec, SolutionPair};
use crate::monotonicity::linear_fit;

/// Rows whose sampled maximum is at or below this are dropped from fits.
pub const UNDERFLOW: f64 = 1e-300;
/// `r²` a decay fit needs before its slab counts as far field.
pub const FAR_FIELD_R2: f64 = 0.99;

/// Conical sector `±(x_N − a_N) ≥ τ |x' − a'|` with apex `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub apex: Vec<f64>,
    pub aperture: f64,
    pub upper: bool,
}

impl Sector {
    fn contains(&self, p: &[f64; 3], dim: usize) -> bool {
        let last = dim - 1;
        let along = if self.upper { p[last] - self.apex[last] } else { self.apex[last] - p[last] };
        let across: f64 = (0..last).map(|d| (p[d] - self.apex[d]).powi(2)).sum::<f64>().sqrt();
        along >= self.aperture * across
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub p: f64,
    pub q: f64,
    pub slab: (f64, f64),
    /// Slope of `log max_{x'} uᵖvᵠ` against `x_N`.
    pub rate: f64,
    /// Intercept of the same fit.
    pub amplitude: f64,
    pub r_squared: f64,
    pub rows_used: usize,
}

fn rows_in(grid: &GridSpec, a: f64, b: f64) -> Vec<usize> {
    let last = grid.dim() - 1;
    (0..grid.n()[last])
        .filter(|&j| {
            let x = grid.coord(last, j);
            x >= a - 1e-12 && x <= b + 1e-12
        })
        .collect()
}

/// Nodes of the grid grouped by their index along the last axis.
fn row_nodes(grid: &GridSpec, row: usize) -> impl Iterator<Item = usize> + '_ {
    let m = grid.n()[grid.dim() - 1];
    (row..grid.len()).step_by(m)
}

/// Least squares of `log max_{x'} uᵖvᵠ` against `x_N` over the rows of the
/// slab `[a, b]`, optionally restricted to a sector.
pub fn decay_fit(pair: &SolutionPair, p: f64, q: f64, slab: (f64, f64), sector: Option<&Sector>) -> Result<DecayFit> {
    let grid = pair.grid();
    let dim = grid.dim();
    let last = dim - 1;
    let (a, b) = slab;
    if !(b > a) {
        return Err(PslabError::InvalidArgument(format!("empty slab [{a}, {b}]")));
    }
    if a < grid.lo()[last] - 1e-12 || b > grid.hi()[last] + 1e-12 {
        return Err(PslabError::OutOfDomain {
            point: vec![a, b],
        });
    }
    let u = pair.u().values();
    let v = pair.v().values();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in rows_in(grid, a, b) {
        let m = row_nodes(grid, j)
            .filter(|&k| sector.is_none_or(|s| s.contains(&grid.point(k), dim)))
            .map(|k| u[k].powf(p) * v[k].powf(q))
            .fold(0.0, f64::max);
        if m > UNDERFLOW {
            xs.push(grid.coord(last, j));
            ys.push(m.ln());
        }
    }
    if xs.len() < 4 {
        return Err(PslabError::InsufficientData(format!(
            "decay fit needs 4 representable rows in [{a}, {b}], found {}",
            xs.len()
        )));
    }
    let (rate, amplitude, r_squared) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        p,
        q,
        slab,
        rate,
        amplitude,
        r_squared,
        rows_used: xs.len(),
    })
}

/// Far region `{x_N > M}` chosen as the lowest node height from which the
/// decay fit of `uᵖvᵠ` up to the top of the box reaches `r² ≥ 0.99`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FarRegion {
    pub m: f64,
    pub fit: DecayFit,
}

pub fn far_region(pair: &SolutionPair, p: f64, q: f64) -> Result<FarRegion> {
    let grid = pair.grid();
    let last = grid.dim() - 1;
    let top = grid.hi()[last];
    for j in 0..grid.n()[last] {
        let m = grid.coord(last, j);
        if m < 0.0 {
            continue;
        }
        match decay_fit(pair, p, q, (m, top), None) {
            Ok(fit) if fit.rate < 0.0 && fit.r_squared >= FAR_FIELD_R2 => return Ok(FarRegion { m, fit }),
            Ok(_) => {}
            Err(PslabError::InsufficientData(_)) | Err(PslabError::InvalidArgument(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Err(PslabError::InsufficientData("no height gives a clean exponential fit".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoshOracle {
    pub k: f64,
    pub a: f64,
    pub l: f64,
    pub h: f64,
    pub numeric_mid: f64,
    /// `A / cosh(√K L)`
    pub bound: f64,
    pub relative_error: f64,
    pub bound_holds: bool,
}

/// Default spacing of the oracle's grid.
pub const COSH_SPACING: f64 = 0.01;

/// Solves `v'' = K v` on `[−L, L]` with `v(±L) = A` and reports `v(0)`
/// against `A / cosh(√K L)`.
///
/// The fourth-order compact (Numerov) stencil keeps the discretization
/// error well inside `5h²` even at `√K L = 15`.
pub fn cosh_decay_oracle(k: f64, a: f64, l: f64, h: f64) -> Result<CoshOracle> {
    if !(k > 0.0 && a > 0.0 && l > 0.0 && h > 0.0) {
        return Err(PslabError::InvalidArgument("K, A, L and h must be positive".into()));
    }
    let half = (l / h).round().max(2.0) as usize;
    let h = l / half as f64;
    let n = 2 * half + 1;
    // (1 − h²K/12) v_{i±1} − (2 + 10h²K/12) v_i = 0 on interior nodes,
    // written with positive diagonal so elimination never cancels.
    let off = 1.0 - h * h * k / 12.0;
    let diag = 2.0 + 10.0 * h * h * k / 12.0;
    let m = n - 2;
    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    for j in 0..m {
        let rhs = if j == 0 { off * a } else { 0.0 } + if j == m - 1 { off * a } else { 0.0 };
        let (pc, pd) = if j == 0 { (0.0, 0.0) } else { (cp[j - 1], dp[j - 1]) };
        let denom = diag - off * pc;
        cp[j] = off / denom;
        dp[j] = (rhs + off * pd) / denom;
    }
    let mut sol = vec![0.0; m];
    let mut next = 0.0;
    for j in (0..m).rev() {
        sol[j] = dp[j] + cp[j] * next;
        next = sol[j];
    }
    let numeric_mid = sol[half - 1];
    let bound = a / (k.sqrt() * l).cosh();
    Ok(CoshOracle {
        k,
        a,
        l,
        h,
        numeric_mid,
        bound,
        relative_error: (numeric_mid - bound).abs() / bound,
        bound_holds: numeric_mid <= bound * (1.0 + 5.0 * h * h),
    })
}

/// Rate `c` of `v(0) ≈ C e^{−c L}` fitted across half-lengths; the lemma's
/// shape predicts `c` comparable to `√K`.
pub fn cosh_rate_fit(k: f64, a: f64, lengths: &[f64], h: f64) -> Result<f64> {
    if lengths.len() < 2 {
        return Err(PslabError::InsufficientData("rate fit needs two half-lengths".into()));
    }
    let ys = lengths
        .iter()
        .map(|&l| cosh_decay_oracle(k, a, l, h).map(|o| o.numeric_mid.ln()))
        .collect::<Result<Vec<_>>>()?;
    let (slope, _, _) = linear_fit(lengths, &ys);
    Ok(-slope)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MovingPlaneReport {
    pub lambda: f64,
    /// `max over T_λ of (u_λ − u)⁺`
    pub max_violation_u: f64,
    /// `max over T_λ of (v − v_λ)⁺`
    pub max_violation_v: f64,
    pub violating_node: Option<Vec<f64>>,
    pub tested_nodes: usize,
    /// Fraction of grid nodes in `T_λ` whose reflection stays in the box.
    pub coverage: f64,
}

/// Compares the pair with its reflection `x_N ↦ 2λ − x_N` on
/// `T_λ = {x_N > λ}`. Reflected values are interpolated, so heights on
/// nodes or half-nodes make the reflection exact.
pub fn moving_plane_check(pair: &SolutionPair, lambda: f64) -> Result<MovingPlaneReport> {
    let grid = pair.grid();
    let dim = grid.dim();
    let last = dim - 1;
    let lo = grid.lo()[last];
    let mut total = 0;
    let mut tested = 0;
    let mut worst: (f64, f64, Option<Vec<f64>>) = (0.0, 0.0, None);
    for k in 0..grid.len() {
        let p = grid.point(k);
        if p[last] <= lambda {
            continue;
        }
        total += 1;
        let reflected = 2.0 * lambda - p[last];
        if reflected < lo - 1e-12 {
            continue;
        }
        tested += 1;
        let mut q = p;
        q[last] = reflected.max(lo);
        let ul = interpolate(pair.u(), &q[..dim])?;
        let vl = interpolate(pair.v(), &q[..dim])?;
        let du = (ul - pair.u().values()[k]).max(0.0);
        let dv = (pair.v().values()[k] - vl).max(0.0);
        if du.max(dv) > worst.0.max(worst.1) {
            worst.2 = Some(p[..dim].to_vec());
        }
        worst.0 = worst.0.max(du);
        worst.1 = worst.1.max(dv);
    }
    if tested == 0 {
        return Err(PslabError::OutOfDomain {
            point: vec![lambda],
        });
    }
    Ok(MovingPlaneReport {
        lambda,
        max_violation_u: worst.0,
        max_violation_v: worst.1,
        violating_node: worst.2,
        tested_nodes: tested,
        coverage: tested as f64 / total as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// `{x_N > M}`, probing `∂_ν u`.
    Upper(f64),
    /// `{x_N < −M}`, probing `−∂_ν v`.
    Lower(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeProbe {
    pub nu: Vec<f64>,
    pub region: Region,
    pub min_derivative: f64,
    pub argmin: Vec<f64>,
    pub nodes: usize,
}

/// Minimum of the centered-difference directional derivative over the
/// interior nodes of a half-space.
pub fn directional_monotonicity(pair: &SolutionPair, nu: &[f64], region: Region) -> Result<ConeProbe> {
    let grid = pair.grid();
    let dim = grid.dim();
    if nu.len() != dim {
        return Err(PslabError::InvalidArgument(format!("direction has {} components, grid has {dim}", nu.len())));
    }
    let norm = nu.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(PslabError::InvalidArgument(format!("direction must be a unit vector, |ν| = {norm}")));
    }
    let last = dim - 1;
    let mut min = f64::INFINITY;
    let mut argmin = Vec::new();
    let mut nodes = 0;
    for k in grid.interior_nodes() {
        let xn = grid.x_n(k);
        let (field, sign) = match region {
            Region::Upper(m) if xn > m => (pair.u(), 1.0),
            Region::Lower(m) if xn < -m => (pair.v(), -1.0),
            _ => continue,
        };
        nodes += 1;
        let g = centered_gradient(field, k);
        let d = sign * (0..dim).map(|i| g[i] * nu[i]).sum::<f64>();
        if d < min {
            min = d;
            argmin = grid.point(k)[..dim].to_vec();
        }
    }
    if nodes == 0 {
        let m = match region {
            Region::Upper(m) => m,
            Region::Lower(m) => -m,
        };
        let mut point = vec![0.0; dim];
        point[last] = m;
        return Err(PslabError::OutOfDomain { point });
    }
    Ok(ConeProbe {
        nu: nu.to_vec(),
        region,
        min_derivative: min,
        argmin,
        nodes,
    })
}

/// `max_{x_N} (osc_{x'} u + osc_{x'} v) / sup(u, v)`.
pub fn one_dimensionality_defect(pair: &SolutionPair) -> Result<f64> {
    let grid = pair.grid();
    if grid.dim() < 2 {
        return Err(PslabError::InvalidArgument("defect needs at least two dimensions".into()));
    }
    let sup = pair.sup();
    if sup == 0.0 {
        return Ok(0.0);
    }
    let osc = |vals: &[f64], j: usize| {
        let (lo, hi) = row_nodes(grid, j).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| {
            (lo.min(vals[k]), hi.max(vals[k]))
        });
        hi - lo
    };
    let worst = (0..grid.n()[grid.dim() - 1])
        .map(|j| osc(pair.u().values(), j) + osc(pair.v().values(), j))
        .fold(0.0, f64::max);
    Ok(worst / sup)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSetExtent {
    pub c: f64,
    pub min_xn: Option<f64>,
    pub max_xn: Option<f64>,
    /// Per column in `x'`, whether `{|u − v| < c}` meets it.
    pub columns_hit: Vec<bool>,
}

impl LevelSetExtent {
    pub fn is_empty(&self) -> bool {
        self.min_xn.is_none()
    }

    pub fn all_columns_hit(&self) -> bool {
        self.columns_hit.iter().all(|&h| h)
    }

    /// `max |x_N|` over the set.
    pub fn zeta(&self) -> Option<f64> {
        Some(self.min_xn?.abs().max(self.max_xn?.abs()))
    }
}

pub fn level_set_extent(pair: &SolutionPair, c: f64) -> Result<LevelSetExtent> {
    if !(c > 0.0) {
        return Err(PslabError::InvalidArgument(format!("threshold must be positive, got {c}")));
    }
    let grid = pair.grid();
    let m = grid.n()[grid.dim() - 1];
    let mut columns_hit = vec![false; grid.len() / m];
    let mut min_xn: Option<f64> = None;
    let mut max_xn: Option<f64> = None;
    for k in 0..grid.len() {
        if (pair.u().values()[k] - pair.v().values()[k]).abs() < c {
            let xn = grid.x_n(k);
            columns_hit[k / m] = true;
            min_xn = Some(min_xn.map_or(xn, |x| x.min(xn)));
            max_xn = Some(max_xn.map_or(xn, |x| x.max(xn)));
        }
    }
    Ok(LevelSetExtent {
        c,
        min_xn,
        max_xn,
        columns_hit,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StripBounds {
    pub m: f64,
    /// `sup (u + |∇u|)` on `{x_N ≤ M}`
    pub sup_u_plus_grad: f64,
    /// `sup (v + |∇v|)` on `{x_N ≥ −M}`
    pub sup_v_plus_grad: f64,
}

/// Gradient by centered differences, one-sided on the faces.
fn node_gradient_norm(vals: &[f64], grid: &GridSpec, k: usize) -> f64 {
    let idx = grid.multi_index(k);
    let h = grid.h();
    let mut sq = 0.0;
    for (d, s) in grid.strides().into_iter().enumerate() {
        let n = grid.n()[d];
        let g = if idx[d] == 0 {
            (vals[k + s] - vals[k]) / h
        } else if idx[d] == n - 1 {
            (vals[k] - vals[k - s]) / h
        } else {
            (vals[k + s] - vals[k - s]) / (2.0 * h)
        };
        sq += g * g;
    }
    sq.sqrt()
}

pub fn strip_bound_scan(pair: &SolutionPair, m: f64) -> Result<StripBounds> {
    let grid = pair.grid();
    let last = grid.dim() - 1;
    if m < grid.lo()[last] || -m > grid.hi()[last] {
        return Err(PslabError::OutOfDomain { point: vec![m] });
    }
    let u = pair.u().values();
    let v = pair.v().values();
    let mut su: f64 = 0.0;
    let mut sv: f64 = 0.0;
    for k in 0..grid.len() {
        let xn = grid.x_n(k);
        if xn <= m + 1e-12 {
            su = su.max(u[k] + node_gradient_norm(u, grid, k));
        }
        if xn >= -m - 1e-12 {
            sv = sv.max(v[k] + node_gradient_norm(v, grid, k));
        }
    }
    Ok(StripBounds {
        m,
        sup_u_plus_grad: su,
        sup_v_plus_grad: sv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{harmonic_parts, linear_pair, ScalarField};
    use crate::ode1d::HeteroclinicProblem;
    use crate::solver::lift_profile;

    fn square(n: usize) -> GridSpec {
        GridSpec::cube(2, -1.0, 1.0, n).unwrap()
    }

    #[test]
    fn decay_of_synthetic_exponential() {
        let g = GridSpec::new(&[-1.0, 0.0], &[1.0, 4.0], &[21, 41]).unwrap();
        let u = ScalarField::from_fn(g.clone(), |_| 1.0).unwrap();
        let v = ScalarField::from_fn(g.clone(), |p| (-p[1]).exp()).unwrap();
        let pair = SolutionPair::new(u, v, 1.0).unwrap();
        let fit = decay_fit(&pair, 1.0, 2.0, (0.5, 3.5), None).unwrap();
        assert!((fit.rate + 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.rows_used, 31);
    }

    #[test]
    fn decay_on_linear_pair_has_no_data() {
        let pair = linear_pair(&square(33), 1.0).unwrap();
        assert!(matches!(
            decay_fit(&pair, 1.0, 2.0, (0.2, 0.9), None),
            Err(PslabError::InsufficientData(_))
        ));
        assert!(decay_fit(&pair, 1.0, 2.0, (0.2, 1.5), None).is_err());
    }

    #[test]
    fn sector_mask_restricts_rows() {
        let g = GridSpec::new(&[-1.0, 0.0], &[1.0, 2.0], &[21, 21]).unwrap();
        let u = ScalarField::from_fn(g.clone(), |p| 1.0 + p[0].abs()).unwrap();
        let v = ScalarField::from_fn(g.clone(), |p| (-p[1]).exp()).unwrap();
        let pair = SolutionPair::new(u, v, 1.0).unwrap();
        // without the mask the max sits at |x₁| = 1
        let free = decay_fit(&pair, 1.0, 1.0, (0.5, 2.0), None).unwrap();
        let narrow = Sector {
            apex: vec![0.0, 0.0],
            aperture: 1e6,
            upper: true,
        };
        let masked = decay_fit(&pair, 1.0, 1.0, (0.5, 2.0), Some(&narrow)).unwrap();
        assert!((free.amplitude - 2f64.ln()).abs() < 1e-12);
        assert!(masked.amplitude.abs() < 1e-12);
        assert!((masked.rate + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosh_oracle_closed_forms() {
        let o = cosh_decay_oracle(1.0, 1.0, 5.0, COSH_SPACING).unwrap();
        assert!((o.numeric_mid - 0.013476).abs() < 1e-6);
        let o4 = cosh_decay_oracle(4.0, 1.0, 5.0, COSH_SPACING).unwrap();
        assert!((o4.numeric_mid - 9.0800e-5).abs() < 1e-8);
        for k in [1.0, 4.0, 9.0] {
            for l in [3.0, 5.0] {
                let o = cosh_decay_oracle(k, 1.0, l, COSH_SPACING).unwrap();
                assert!(o.relative_error <= 5.0 * o.h * o.h, "{o:?}");
                assert!(o.bound_holds);
            }
        }
    }

    #[test]
    fn cosh_oracle_is_linear_in_amplitude() {
        let a = cosh_decay_oracle(4.0, 1.0, 3.0, COSH_SPACING).unwrap();
        let b = cosh_decay_oracle(4.0, 10.0, 3.0, COSH_SPACING).unwrap();
        assert!((b.numeric_mid - 10.0 * a.numeric_mid).abs() <= 1e-14 * b.numeric_mid);
        assert!(cosh_decay_oracle(0.0, 1.0, 1.0, 0.01).is_err());
    }

    #[test]
    fn cosh_rate_tracks_sqrt_k() {
        for k in [1.0f64, 4.0, 9.0] {
            let c = cosh_rate_fit(k, 1.0, &[3.0, 4.0, 5.0], COSH_SPACING).unwrap();
            assert!(c >= 0.9 * k.sqrt(), "{k}: {c}");
        }
    }

    #[test]
    fn moving_planes_on_linear_pair() {
        let pair = linear_pair(&square(41), 1.0).unwrap();
        for lambda in [-0.5, -0.1, 0.0, 0.25, 0.7] {
            let r = moving_plane_check(&pair, lambda).unwrap();
            assert_eq!(r.max_violation_u, 0.0);
            assert_eq!(r.max_violation_v, 0.0);
            assert!(r.violating_node.is_none());
        }
        assert!(moving_plane_check(&pair, 1.0).is_err());
    }

    #[test]
    fn moving_planes_flag_decreasing_component() {
        let g = square(41);
        let u = ScalarField::from_fn(g.clone(), |p| (-p[1]).max(0.0)).unwrap();
        let v = ScalarField::from_fn(g.clone(), |p| p[1].max(0.0)).unwrap();
        let pair = SolutionPair::new(u, v, 1.0).unwrap();
        let r = moving_plane_check(&pair, -0.5).unwrap();
        assert!(r.max_violation_u > 0.1);
        assert!(r.violating_node.is_some());
    }

    #[test]
    fn moving_planes_on_lifted_profile() {
        let p = HeteroclinicProblem {
            half_length: 20.0,
            nodes: 4001,
            ..Default::default()
        }
        .solve()
        .unwrap();
        let g = GridSpec::cube(2, -6.0, 6.0, 121).unwrap();
        let pair = lift_profile(&p, &g).unwrap();
        for j in 0..25 {
            let lambda = -5.0 + j as f64 * 0.4 + 0.05;
            let r = moving_plane_check(&pair, lambda).unwrap();
            assert!(r.max_violation_u <= 1e-10 && r.max_violation_v <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn directional_derivatives_of_linear_pair() {
        let gamma = 0.5;
        let pair = linear_pair(&square(41), gamma).unwrap();
        let up = directional_monotonicity(&pair, &[0.0, 1.0], Region::Upper(0.1)).unwrap();
        assert!((up.min_derivative - gamma).abs() < 1e-12);
        let side = directional_monotonicity(&pair, &[1.0, 0.0], Region::Upper(0.1)).unwrap();
        assert!(side.min_derivative.abs() < 1e-12);
        let down = directional_monotonicity(&pair, &[0.0, 1.0], Region::Lower(0.1)).unwrap();
        assert!((down.min_derivative - gamma).abs() < 1e-12);
        assert!(directional_monotonicity(&pair, &[1.0, 1.0], Region::Upper(0.1)).is_err());
        assert!(directional_monotonicity(&pair, &[0.0, 1.0], Region::Upper(2.0)).is_err());
    }

    #[test]
    fn defect_separates_lifts_from_harmonics() {
        let p = HeteroclinicProblem {
            half_length: 20.0,
            nodes: 4001,
            ..Default::default()
        }
        .solve()
        .unwrap();
        let lift = lift_profile(&p, &GridSpec::cube(2, -4.0, 4.0, 33).unwrap()).unwrap();
        assert_eq!(one_dimensionality_defect(&lift).unwrap(), 0.0);
        let quad = harmonic_parts(&square(33), 2, 1.0, 1.0).unwrap();
        assert!(one_dimensionality_defect(&quad).unwrap() > 0.1);
        let line = linear_pair(&GridSpec::cube(1, -1.0, 1.0, 9).unwrap(), 1.0).unwrap();
        assert!(one_dimensionality_defect(&line).is_err());
    }

    #[test]
    fn level_set_of_linear_pair() {
        let gamma = 1.0 / std::f64::consts::PI.sqrt();
        let g = square(201);
        let pair = linear_pair(&g, gamma).unwrap();
        let ext = level_set_extent(&pair, 0.1).unwrap();
        let edge = 0.1 / gamma;
        assert!(ext.max_xn.unwrap() < edge && ext.max_xn.unwrap() > edge - g.h());
        assert!(ext.min_xn.unwrap() > -edge && ext.min_xn.unwrap() < -edge + g.h());
        assert!(ext.all_columns_hit());
        assert!((ext.zeta().unwrap() - ext.max_xn.unwrap()).abs() < 1e-12);
        // the set always contains the row x_N = 0, so a tiny c still hits it
        assert!(!level_set_extent(&pair, 1e-300).unwrap().is_empty());
        let shifted = SolutionPair::new(
            ScalarField::from_fn(g.clone(), |p| (p[1] + 0.005).max(0.0)).unwrap(),
            ScalarField::from_fn(g.clone(), |p| (-p[1] - 0.005).max(0.0)).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(level_set_extent(&shifted, 1e-3).unwrap().is_empty());
        assert!(level_set_extent(&pair, 0.0).is_err());
    }

    #[test]
    fn level_set_band_shrinks() {
        let p = HeteroclinicProblem {
            half_length: 20.0,
            nodes: 4001,
            ..Default::default()
        }
        .solve()
        .unwrap();
        let pair = lift_profile(&p, &GridSpec::cube(2, -4.0, 4.0, 161).unwrap()).unwrap();
        let mut last = f64::INFINITY;
        for c in [1.0, 0.5, 0.2, 0.1] {
            let ext = level_set_extent(&pair, c).unwrap();
            let width = ext.max_xn.unwrap() - ext.min_xn.unwrap();
            assert!(width <= last);
            assert!(ext.all_columns_hit());
            last = width;
        }
    }

    #[test]
    fn strip_bounds_of_linear_pair() {
        let gamma = 0.7;
        let pair = linear_pair(&square(41), gamma).unwrap();
        let s = strip_bound_scan(&pair, 1.0).unwrap();
        assert!((s.sup_u_plus_grad - 2.0 * gamma).abs() < 1e-12);
        assert!((s.sup_v_plus_grad - 2.0 * gamma).abs() < 1e-12);
    }
}
