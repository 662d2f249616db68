//! The one-dimensional heteroclinic solution of `u'' = u v²`, `v'' = u² v`.
//!
//! The interval `[c − L, c + L]` is closed with the asymptotic data of the
//! entire solution: the decaying component vanishes at its end
//! (`u(c − L) = 0`, `v(c + L) = 0`) and the growing component has the
//! prescribed slope there (`u'(c + L) = slope`, `v'(c − L) = −slope`).

use crate::error::{PslabError, Result};
use crate::field::{GridSpec, ScalarField, SolutionPair};

/// A discrete heteroclinic profile on `[shift − L, shift + L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile1D {
    pub half_length: f64,
    pub shift: f64,
    pub h: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub slope: f64,
    pub residual_norm: f64,
    /// Root of `u − v`; NaN when the profile has no sign change.
    pub t0: f64,
    pub newton_iterations: usize,
    /// Newton iterates that went negative and were pulled back.
    pub clipped: usize,
}

impl Profile1D {
    /// Wraps externally produced samples; `residual_norm` is recomputed.
    pub fn from_samples(shift: f64, half_length: f64, u: Vec<f64>, v: Vec<f64>, slope: f64) -> Result<Self> {
        if u.len() != v.len() || u.len() < 3 {
            return Err(PslabError::InvalidArgument("u and v need equal length >= 3".into()));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(PslabError::InvalidArgument("non-finite profile sample".into()));
        }
        let h = 2.0 * half_length / (u.len() - 1) as f64;
        let mut p = Self {
            half_length,
            shift,
            h,
            u,
            v,
            slope,
            residual_norm: f64::NAN,
            t0: f64::NAN,
            newton_iterations: 0,
            clipped: 0,
        };
        p.residual_norm = max_norm(&residuals(&p.u, &p.v, h, Some(slope)));
        p.t0 = find_crossing(&p).unwrap_or(f64::NAN);
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn left(&self) -> f64 {
        self.shift - self.half_length
    }

    pub fn right(&self) -> f64 {
        self.shift + self.half_length
    }

    pub fn t(&self, i: usize) -> f64 {
        self.left() + i as f64 * self.h
    }

    fn interp(&self, values: &[f64], t: f64) -> Option<f64> {
        if t < self.left() - 1e-12 || t > self.right() + 1e-12 {
            return None;
        }
        let s = (t - self.left()) / self.h;
        let i = (s.floor().max(0.0) as usize).min(self.len() - 2);
        let w = (s - i as f64).clamp(0.0, 1.0);
        Some((1.0 - w) * values[i] + w * values[i + 1])
    }

    /// Linear interpolation of `u`; `None` outside the interval.
    pub fn u_at(&self, t: f64) -> Option<f64> {
        self.interp(&self.u, t)
    }

    pub fn v_at(&self, t: f64) -> Option<f64> {
        self.interp(&self.v, t)
    }

    /// `(min_i (u_{i+1} − u_i), max_i (v_{i+1} − v_i))`; the profile is
    /// strictly monotone when the first is positive and the second negative.
    pub fn monotonicity_margins(&self) -> (f64, f64) {
        let du = self.u.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let dv = self.v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        (du, dv)
    }

    /// The profile as a 1D [`SolutionPair`] with `β = 1`.
    pub fn to_pair(&self) -> Result<SolutionPair> {
        let grid = GridSpec::new(&[self.left()], &[self.right()], &[self.len()])?;
        SolutionPair::new(
            ScalarField::new(grid.clone(), self.u.clone())?,
            ScalarField::new(grid, self.v.clone())?,
            1.0,
        )
    }
}

/// Parameters of one heteroclinic solve.
#[derive(Clone, Debug, PartialEq)]
pub struct HeteroclinicProblem {
    pub half_length: f64,
    pub nodes: usize,
    pub slope: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Center of the interval; the symmetry center follows it.
    pub shift: f64,
}

impl Default for HeteroclinicProblem {
    fn default() -> Self {
        Self {
            half_length: 30.0,
            nodes: 6001,
            slope: 1.0,
            tol: 1e-10,
            max_iter: 100,
            shift: 0.0,
        }
    }
}

const MAX_HALVINGS: usize = 30;
/// Tails are re-solved from the last node where the decaying component
/// still exceeds this.
const TAIL_START: f64 = 1e-4;
const TAIL_PASSES: usize = 6;
/// Relative residual target of [`restrict_to_lattice`], in units of `max|w|/h²`.
const RESTRICT_TOL: f64 = 1e-14;
const RESTRICT_MAX_ITER: usize = 50;

impl HeteroclinicProblem {
    fn validate(&self) -> Result<()> {
        if !(self.half_length >= 10.0) {
            return Err(PslabError::InvalidArgument(format!("L must be >= 10, got {}", self.half_length)));
        }
        if self.nodes < 1001 || self.nodes % 2 == 0 {
            return Err(PslabError::InvalidArgument(format!("n must be odd and >= 1001, got {}", self.nodes)));
        }
        if !(self.slope > 0.0) || !(self.tol > 0.0) || !self.shift.is_finite() {
            return Err(PslabError::InvalidArgument("slope and tol must be positive".into()));
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<Profile1D> {
        self.validate()?;
        let n = self.nodes;
        let h = 2.0 * self.half_length / (n - 1) as f64;
        let s = self.slope;
        let left = self.shift - self.half_length;
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            let t = left + i as f64 * h - self.shift;
            let root = (t * t + 1.0 / s).sqrt();
            u.push(0.5 * s * (t + root));
            v.push(0.5 * s * (root - t));
        }
        u[0] = 0.0;
        v[n - 1] = 0.0;

        let mut res = max_norm(&residuals(&u, &v, h, Some(s)));
        let mut history = vec![res];
        let mut clipped = 0;
        let mut iterations = 0;
        while res > self.tol {
            if iterations >= self.max_iter {
                return Err(PslabError::NonConvergence { iterations, residual: res, history });
            }
            iterations += 1;
            let step = newton_step(&u, &v, h, Some(s), &[]);
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                let (tu, tv, c) = apply_step(&u, &v, &step, lambda);
                let tres = max_norm(&residuals(&tu, &tv, h, Some(s)));
                if tres < res {
                    u = tu;
                    v = tv;
                    res = tres;
                    clipped += c;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            history.push(res);
            if !accepted {
                return Err(PslabError::NonConvergence { iterations, residual: res, history });
            }
        }
        if clipped > 0 {
            log::warn!("{clipped} negative Newton iterates were pulled back toward zero");
        }

        // The decaying tails are tiny compared with the Newton rounding
        // error. On each tail the equation is linear in the decaying
        // component, and that positive tridiagonal system is solved with no
        // cancellation, so the tails come out with relative accuracy. Newton
        // steps on the remaining nodes then restore the interface rows.
        for _ in 0..TAIL_PASSES {
            let tails: Vec<Tail> = [refine_tail(&mut v, &u, h, false), refine_tail(&mut u, &v, h, true)]
                .into_iter()
                .flatten()
                .collect();
            res = max_norm(&residuals(&u, &v, h, Some(s)));
            if res <= self.tol {
                break;
            }
            let step = newton_step(&u, &v, h, Some(s), &tails);
            let (tu, tv, c) = apply_step(&u, &v, &step, 1.0);
            if c > 0 {
                break;
            }
            u = tu;
            v = tv;
        }
        if res > self.tol {
            return Err(PslabError::NonConvergence { iterations, residual: res, history });
        }

        let mut profile = Profile1D {
            half_length: self.half_length,
            shift: self.shift,
            h,
            u,
            v,
            slope: s,
            residual_norm: res,
            t0: f64::NAN,
            newton_iterations: iterations,
            clipped,
        };
        profile.t0 = find_crossing(&profile)?;
        Ok(profile)
    }
}

/// Solves on `[−L, L]` with the given slope.
pub fn solve_heteroclinic(half_length: f64, nodes: usize, slope: f64, tol: f64, max_iter: usize) -> Result<Profile1D> {
    HeteroclinicProblem {
        half_length,
        nodes,
        slope,
        tol,
        max_iter,
        shift: 0.0,
    }
    .solve()
}

/// Full-length residual vectors; Dirichlet rows are zero.
/// The discrete solution on the lattice `lo + i (hi − lo) / (nodes − 1)`
/// whose end values are the profile's values at `lo` and `hi`.
///
/// A pair built from it in `x_N` solves the multi-dimensional discrete
/// system on a grid with that lattice exactly, not just to `O(h²)`.
pub fn restrict_to_lattice(p: &Profile1D, lo: f64, hi: f64, nodes: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if nodes < 3 || !(hi > lo) {
        return Err(PslabError::InvalidArgument(format!("bad lattice [{lo}, {hi}] with {nodes} nodes")));
    }
    let h = (hi - lo) / (nodes - 1) as f64;
    let at = |i: usize| lo + i as f64 * h;
    let mut u = Vec::with_capacity(nodes);
    let mut v = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let (a, b) = (p.u_at(at(i)), p.v_at(at(i)));
        match (a, b) {
            (Some(a), Some(b)) => {
                u.push(a);
                v.push(b);
            }
            _ => {
                return Err(PslabError::InvalidArgument(format!(
                    "lattice [{lo}, {hi}] leaves the profile interval [{}, {}]",
                    p.left(),
                    p.right()
                )))
            }
        }
    }
    let scale = u.iter().chain(&v).fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = RESTRICT_TOL * scale / (h * h);
    let mut res = max_norm(&residuals(&u, &v, h, None));
    let mut history = vec![res];
    let mut iterations = 0;
    while res > tol {
        if iterations >= RESTRICT_MAX_ITER {
            return Err(PslabError::NonConvergence { iterations, residual: res, history });
        }
        iterations += 1;
        let step = newton_step(&u, &v, h, None, &[]);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let (tu, tv, _) = apply_step(&u, &v, &step, lambda);
            let tres = max_norm(&residuals(&tu, &tv, h, None));
            if tres < res {
                u = tu;
                v = tv;
                res = tres;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        history.push(res);
        if !accepted {
            // rounding floor reached
            break;
        }
    }
    Ok((u, v))
}

/// Residuals of the discrete system. With `slope = None` both components
/// are held at their end values, otherwise the heteroclinic end conditions
/// apply.
fn residuals(u: &[f64], v: &[f64], h: f64, slope: Option<f64>) -> Vec<[f64; 2]> {
    let n = u.len();
    let inv_h2 = 1.0 / (h * h);
    let mut r = vec![[0.0; 2]; n];
    for i in 1..n - 1 {
        let lu = ((u[i - 1] - u[i]) + (u[i + 1] - u[i])) * inv_h2;
        let lv = ((v[i - 1] - v[i]) + (v[i + 1] - v[i])) * inv_h2;
        r[i] = [lu - u[i] * v[i] * v[i], lv - u[i] * u[i] * v[i]];
    }
    let Some(slope) = slope else {
        return r;
    };
    // ghost nodes from the slope conditions
    r[0][1] = 2.0 * ((v[1] - v[0]) + h * slope) * inv_h2 - u[0] * u[0] * v[0];
    let m = n - 1;
    r[m][0] = 2.0 * ((u[m - 1] - u[m]) + h * slope) * inv_h2 - u[m] * v[m] * v[m];
    r
}

fn max_norm(r: &[[f64; 2]]) -> f64 {
    r.iter().map(|x| x[0].abs().max(x[1].abs())).fold(0.0, f64::max)
}

type Mat2 = [[f64; 2]; 2];

fn inv2(m: &Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn mulv(a: &Mat2, x: &[f64; 2]) -> [f64; 2] {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

/// Newton increment from the block-tridiagonal Jacobian, by block Thomas
/// elimination. Off-diagonal blocks are diagonal and stored as pairs.
/// Newton correction. Nodes inside the given tails are held fixed and enter
/// the held node's row through the tail's linear response.
fn newton_step(u: &[f64], v: &[f64], h: f64, slope: Option<f64>, tails: &[Tail]) -> Vec<[f64; 2]> {
    let n = u.len();
    let inv_h2 = 1.0 / (h * h);
    let rhs: Vec<[f64; 2]> = residuals(u, v, h, slope).iter().map(|r| [-r[0], -r[1]]).collect();

    let mut sub = vec![[inv_h2; 2]; n];
    let mut sup = vec![[inv_h2; 2]; n];
    let mut diag = vec![[[0.0; 2]; 2]; n];
    for i in 0..n {
        let (ui, vi) = (u[i], v[i]);
        diag[i] = [[-2.0 * inv_h2 - vi * vi, -2.0 * ui * vi], [-2.0 * ui * vi, -2.0 * inv_h2 - ui * ui]];
    }
    let m = n - 1;
    if slope.is_some() {
        // left end: u Dirichlet, v Neumann
        diag[0][0] = [1.0, 0.0];
        sub[0] = [0.0; 2];
        sup[0] = [0.0, 2.0 * inv_h2];
        // right end: u Neumann, v Dirichlet
        diag[m][1] = [0.0, 1.0];
        sup[m] = [0.0; 2];
        sub[m] = [2.0 * inv_h2, 0.0];
    } else {
        for i in [0, m] {
            diag[i] = [[1.0, 0.0], [0.0, 1.0]];
            sub[i] = [0.0; 2];
            sup[i] = [0.0; 2];
        }
    }
    let mut rhs = rhs;
    for t in tails {
        let c = t.component;
        let range = if t.toward_left { 0..t.held } else { t.held + 1..n };
        for i in range {
            diag[i][c] = [0.0; 2];
            diag[i][c][c] = 1.0;
            sub[i][c] = 0.0;
            sup[i][c] = 0.0;
            rhs[i][c] = 0.0;
        }
        let a = t.held;
        diag[a][c][c] += inv_h2 * t.response;
        if t.toward_left {
            sub[a][c] = 0.0;
        } else {
            sup[a][c] = 0.0;
        }
    }

    let mut cprime: Vec<Mat2> = vec![[[0.0; 2]; 2]; n];
    let mut y = vec![[0.0; 2]; n];
    for i in 0..n {
        let mut mi = diag[i];
        let mut ri = rhs[i];
        if i > 0 {
            for r in 0..2 {
                for c in 0..2 {
                    mi[r][c] -= sub[i][r] * cprime[i - 1][r][c];
                }
                ri[r] -= sub[i][r] * y[i - 1][r];
            }
        }
        let minv = inv2(&mi);
        let cdiag = [[sup[i][0], 0.0], [0.0, sup[i][1]]];
        cprime[i] = mul2(&minv, &cdiag);
        y[i] = mulv(&minv, &ri);
    }
    let mut x = y;
    for i in (0..n - 1).rev() {
        let corr = mulv(&cprime[i], &x[i + 1]);
        x[i][0] -= corr[0];
        x[i][1] -= corr[1];
    }
    x
}

struct Tail {
    component: usize,
    held: usize,
    toward_left: bool,
    /// `∂w_next / ∂w_held` for the neighbour inside the tail.
    response: f64,
}

/// Re-solves `w'' = o² w` past the last node where `w > TAIL_START`,
/// holding that node and the Dirichlet end fixed. `from_left` selects the
/// tail at index 0, which belongs to `u`; the other tail belongs to `v`.
fn refine_tail(w: &mut [f64], other: &[f64], h: f64, from_left: bool) -> Option<Tail> {
    let n = w.len();
    let idx = |k: usize| if from_left { n - 1 - k } else { k };
    // in the reflected ordering the tail runs from `a` to the end at n-1
    let a = (0..n).rev().find(|&k| w[idx(k)] > TAIL_START)?;
    if a + 2 >= n {
        return None;
    }
    // rows a+1..=n-2: w_{k-1} - (2 + h² o_k²) w_k + w_{k+1} = 0
    let m = n - 2 - a;
    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    for j in 0..m {
        let k = a + 1 + j;
        let o = other[idx(k)];
        let diag = 2.0 + h * h * o * o;
        let (prev_c, prev_d) = if j == 0 { (0.0, w[idx(a)]) } else { (cp[j - 1], dp[j - 1]) };
        let denom = diag - prev_c;
        cp[j] = 1.0 / denom;
        dp[j] = prev_d / denom;
    }
    let mut next = 0.0;
    for j in (0..m).rev() {
        let x = dp[j] + cp[j] * next;
        w[idx(a + 1 + j)] = x;
        next = x;
    }
    Some(Tail {
        component: if from_left { 0 } else { 1 },
        held: idx(a),
        toward_left: from_left,
        response: w[idx(a + 1)] / w[idx(a)],
    })
}

/// `w + λ δ`, replacing any negative entry by a tenth of its previous value.
fn apply_step(u: &[f64], v: &[f64], step: &[[f64; 2]], lambda: f64) -> (Vec<f64>, Vec<f64>, usize) {
    let mut clipped = 0;
    let mut next = |old: f64, d: f64| {
        let x = old + lambda * d;
        if x < 0.0 {
            clipped += 1;
            0.1 * old
        } else {
            x
        }
    };
    let mut nu = Vec::with_capacity(u.len());
    let mut nv = Vec::with_capacity(v.len());
    for i in 0..u.len() {
        nu.push(next(u[i], step[i][0]));
        nv.push(next(v[i], step[i][1]));
    }
    (nu, nv, clipped)
}

fn find_crossing(p: &Profile1D) -> Result<f64> {
    let d: Vec<f64> = p.u.iter().zip(&p.v).map(|(a, b)| a - b).collect();
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo < 0.0 && hi > 0.0) {
        return Err(PslabError::Structure("u − v never changes sign; profile is not heteroclinic".into()));
    }
    for i in 0..d.len() - 1 {
        if d[i] < 0.0 && d[i + 1] >= 0.0 || d[i] > 0.0 && d[i + 1] <= 0.0 {
            let w = d[i] / (d[i] - d[i + 1]);
            return Ok(p.t(i) + w * p.h);
        }
    }
    Err(PslabError::Structure("u − v never changes sign; profile is not heteroclinic".into()))
}

/// Symmetry center `t0` (root of `u − v`) and the reflection defect
/// `max_t |u(t0 + t) − v(t0 − t)|` over the overlap of the interval with its
/// mirror image.
pub fn center_and_symmetry_defect(p: &Profile1D) -> Result<(f64, f64)> {
    let t0 = find_crossing(p)?;
    let mut defect: f64 = 0.0;
    for i in 0..p.len() {
        let t = p.t(i);
        if let Some(vm) = p.v_at(2.0 * t0 - t) {
            defect = defect.max((p.u[i] - vm).abs());
        }
    }
    Ok((t0, defect))
}

/// First integral `u'² + v'² − u²v²` along a profile.
#[derive(Clone, Debug)]
pub struct EnergyInvariant {
    /// `max_t |Q(t) − slope²| / slope²`
    pub max_deviation: f64,
    /// `Q` at the interior nodes `1..n−1`.
    pub series: Vec<f64>,
}

/// Evaluates the first integral by centered differences.
///
/// The second-order scheme conserves `Q` only up to `O(h²)`; the leading
/// term is removed by the modified-equation correction
/// `−(h²/6)(D₀u·D₀f + D₀v·D₀g) − (h²/12)(f² + g²)` with `f = uv²`,
/// `g = u²v`, which vanishes wherever the coupling does.
pub fn energy_invariant(p: &Profile1D) -> Result<EnergyInvariant> {
    if p.u.iter().chain(&p.v).any(|x| !x.is_finite()) {
        return Err(PslabError::InvalidArgument("non-finite profile".into()));
    }
    let n = p.len();
    let h = p.h;
    let fu: Vec<f64> = (0..n).map(|i| p.u[i] * p.v[i] * p.v[i]).collect();
    let fv: Vec<f64> = (0..n).map(|i| p.u[i] * p.u[i] * p.v[i]).collect();
    let d0 = |w: &[f64], i: usize| (w[i + 1] - w[i - 1]) / (2.0 * h);
    let s2 = p.slope * p.slope;
    let mut series = Vec::with_capacity(n - 2);
    let mut max_deviation: f64 = 0.0;
    for i in 1..n - 1 {
        let (du, dv) = (d0(&p.u, i), d0(&p.v, i));
        let uv = p.u[i] * p.v[i];
        let correction = -(h * h / 6.0) * (du * d0(&fu, i) + dv * d0(&fv, i)) - (h * h / 12.0) * (fu[i] * fu[i] + fv[i] * fv[i]);
        let q = du * du + dv * dv - uv * uv + correction;
        max_deviation = max_deviation.max((q - s2).abs() / s2);
        series.push(q);
    }
    Ok(EnergyInvariant { max_deviation, series })
}

/// `(λ u(λ t), λ v(λ t))` on `[(c − L)/λ, (c + L)/λ]`, which solves the same
/// system with slope `λ² · slope`. The rescaled nodes are exactly the images
/// of the original ones, so no resampling happens.
pub fn rescale_profile(p: &Profile1D, lambda: f64) -> Result<Profile1D> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(PslabError::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let u = p.u.iter().map(|x| lambda * x).collect();
    let v = p.v.iter().map(|x| lambda * x).collect();
    let mut out = Profile1D::from_samples(p.shift / lambda, p.half_length / lambda, u, v, lambda * lambda * p.slope)?;
    out.newton_iterations = p.newton_iterations;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> Profile1D {
        solve_heteroclinic(30.0, 6001, 1.0, 1e-10, 100).unwrap()
    }

    #[test]
    fn converges_and_is_monotone() {
        let p = reference();
        assert!(p.residual_norm <= 1e-10);
        let (du, dv) = p.monotonicity_margins();
        assert!(du > 0.0 && dv < 0.0, "{du} {dv}");
        assert!(p.u[1..p.len() - 1].iter().all(|&x| x > 0.0));
        assert!(p.v[1..p.len() - 1].iter().all(|&x| x > 0.0));
    }

    #[test]
    fn symmetric_about_origin() {
        let p = reference();
        let (t0, defect) = center_and_symmetry_defect(&p).unwrap();
        assert!(t0.abs() <= p.h, "t0 = {t0}");
        assert!(defect <= 1e-8, "defect = {defect}");
    }

    #[test]
    fn shifted_box_moves_center() {
        let s = 1.3;
        let p = HeteroclinicProblem {
            half_length: 20.0,
            nodes: 4001,
            shift: s,
            ..Default::default()
        }
        .solve()
        .unwrap();
        let (t0, _) = center_and_symmetry_defect(&p).unwrap();
        assert!((t0 - s).abs() <= 2.0 * p.h, "t0 = {t0}");
    }

    #[test]
    fn energy_first_integral_is_conserved() {
        let p = reference();
        let e = energy_invariant(&p).unwrap();
        assert!(e.max_deviation <= 1e-6, "{}", e.max_deviation);
        assert_eq!(e.series.len(), p.len() - 2);
    }

    #[test]
    fn energy_detects_perturbation() {
        let mut p = reference();
        let mid = p.len() / 2 + 100;
        p.u[mid] += 1e-3;
        assert!(energy_invariant(&p).unwrap().max_deviation > 1e-4);
    }

    #[test]
    fn energy_of_kinked_linear_pair() {
        let gamma = 1.5;
        let n = 1001;
        let l = 10.0;
        let h = 2.0 * l / (n - 1) as f64;
        let t: Vec<f64> = (0..n).map(|i| -l + i as f64 * h).collect();
        let u = t.iter().map(|&x| gamma * x.max(0.0)).collect();
        let v = t.iter().map(|&x| gamma * (-x).max(0.0)).collect();
        let p = Profile1D::from_samples(0.0, l, u, v, gamma).unwrap();
        let e = energy_invariant(&p).unwrap();
        for (k, q) in e.series.iter().enumerate() {
            if t[k + 1].abs() > h * 1.5 {
                assert!((q - gamma * gamma).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rescale_identity_and_equation() {
        let p = reference();
        let same = rescale_profile(&p, 1.0).unwrap();
        assert_eq!(same.u, p.u);
        assert_eq!(same.h, p.h);
        let twice = rescale_profile(&p, 2.0).unwrap();
        assert!(twice.residual_norm <= 8.0 * 1e-10 + 1e-9, "{}", twice.residual_norm);
        assert_eq!(twice.slope, 4.0);
        assert!(rescale_profile(&p, 0.0).is_err());
        assert!(rescale_profile(&p, -1.0).is_err());
    }

    #[test]
    fn rescaled_profile_matches_direct_solve() {
        // λ = √2 maps slope 1 on [−30, 30] to slope 2 on [−30/√2, 30/√2].
        let base = solve_heteroclinic(20.0, 4001, 1.0, 1e-10, 100).unwrap();
        let lambda = 2.0;
        let scaled = rescale_profile(&base, lambda).unwrap();
        let direct = solve_heteroclinic(10.0, 4001, 4.0, 1e-9, 100).unwrap();
        let diff = scaled
            .u
            .iter()
            .zip(&direct.u)
            .chain(scaled.v.iter().zip(&direct.v))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-6, "{diff}");
    }

    #[test]
    fn degenerate_profile_has_no_center() {
        let u = vec![1.0; 11];
        let p = Profile1D::from_samples(0.0, 1.0, u.clone(), u, 1.0).unwrap();
        assert!(matches!(center_and_symmetry_defect(&p), Err(PslabError::Structure(_))));
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(solve_heteroclinic(5.0, 1001, 1.0, 1e-10, 10).is_err());
        assert!(solve_heteroclinic(30.0, 1000, 1.0, 1e-10, 10).is_err());
        assert!(solve_heteroclinic(30.0, 1001, -1.0, 1e-10, 10).is_err());
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        match solve_heteroclinic(30.0, 1001, 1.0, 1e-10, 1) {
            Err(PslabError::NonConvergence { history, .. }) => assert!(!history.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn restriction_on_own_lattice_reproduces_profile() {
        let p = HeteroclinicProblem {
            half_length: 20.0,
            nodes: 4001,
            ..Default::default()
        }
        .solve()
        .unwrap();
        // every 10th node of the profile, so the spacing differs
        let (u, v) = restrict_to_lattice(&p, -8.0, 8.0, 1601).unwrap();
        let off = ((-8.0 - p.left()) / p.h).round() as usize;
        let diff = (0..1601)
            .map(|i| (u[i] - p.u[off + i]).abs().max((v[i] - p.v[off + i]).abs()))
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
        let (cu, cv) = restrict_to_lattice(&p, -8.0, 8.0, 161).unwrap();
        assert_eq!(cu[0], p.u_at(-8.0).unwrap());
        assert_eq!(cv[160], p.v_at(8.0).unwrap());
        // the coarse lattice solves its own discrete problem, which differs
        // from the fine profile at O(h²)
        let gap = (0..161).map(|i| (cu[i] - p.u_at(-8.0 + 0.1 * i as f64).unwrap()).abs()).fold(0.0, f64::max);
        assert!(gap > 1e-7 && gap < 1e-2, "{gap}");
        assert!(restrict_to_lattice(&p, -30.0, 8.0, 161).is_err());
    }
}