//! β-sweeps of the coupled system and the segregation metrics measured on
//! them.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{PslabError, Result};
use crate::field::{laplacian_at, ScalarField, SolutionPair};
use crate::solver::{solve, solve_from, BoundaryData, SolveOptions};

/// Seed of the Hölder pair sampler.
pub const HOLDER_SEED: u64 = 0x005e_ed0f_a1fa;
/// Random pairs drawn on top of the structured ones.
pub const HOLDER_RANDOM_PAIRS: usize = 4000;
/// Nodes excluded next to every face by the Hölder sampler.
pub const HOLDER_MARGIN: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    /// `max u v`
    pub sup_uv: f64,
    /// `Σ β u² v² h^N` over interior nodes
    pub interaction: f64,
    /// `max |Δ_h (u − v)|` over interior nodes
    pub harm_residual: f64,
    /// `max` of the Hölder quotients of `u` and `v`
    pub holder: f64,
    pub sweeps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegregationTable {
    pub alpha: f64,
    pub rows: Vec<SweepRow>,
    /// Set when a solve failed; `rows` then holds the βs before it.
    pub failure: Option<String>,
}

impl SegregationTable {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.beta).collect()
    }

    pub fn column(&self, f: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

fn validate_sweep(betas: &[f64], alpha: f64) -> Result<()> {
    if betas.len() < 3 {
        return Err(PslabError::InvalidArgument(format!("a sweep needs at least 3 betas, got {}", betas.len())));
    }
    if betas.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
        return Err(PslabError::InvalidArgument("betas must be finite and >= 0".into()));
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PslabError::InvalidArgument("betas must be strictly increasing".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(PslabError::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Solves for every β in turn, each solve starting from the previous
/// solution, and tabulates the segregation metrics.
pub fn sweep(bdry: &BoundaryData, betas: &[f64], opts: &SolveOptions, alpha: f64) -> Result<SegregationTable> {
    Ok(sweep_fields(bdry, betas, opts, alpha, true)?.0)
}

/// Like [`sweep`] but also returns the solutions; `warm = false` solves
/// every β from the harmonic extension instead.
pub fn sweep_fields(
    bdry: &BoundaryData,
    betas: &[f64],
    opts: &SolveOptions,
    alpha: f64,
    warm: bool,
) -> Result<(SegregationTable, Vec<SolutionPair>)> {
    validate_sweep(betas, alpha)?;
    let min_sep = 2.0 * bdry.grid().h();
    let mut rows = Vec::with_capacity(betas.len());
    let mut fields: Vec<SolutionPair> = Vec::with_capacity(betas.len());
    let mut failure = None;
    for &beta in betas {
        let outcome = match fields.last() {
            Some(prev) if warm => solve_from(prev, bdry, beta, opts),
            _ => solve(bdry, beta, opts),
        };
        let outcome = match outcome {
            Ok(o) => o,
            Err(e @ (PslabError::NonConvergence { .. } | PslabError::Divergence { .. })) => {
                log::error!("sweep stopped at beta = {beta}: {e}");
                failure = Some(format!("beta = {beta}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let pair = outcome.pair;
        let holder = holder_quotient(pair.u(), alpha, min_sep)?.max(holder_quotient(pair.v(), alpha, min_sep)?);
        rows.push(SweepRow {
            beta,
            sup_uv: sup_uv(&pair),
            interaction: interaction(&pair),
            harm_residual: harm_residual(&pair),
            holder,
            sweeps: outcome.sweeps,
        });
        log::info!("beta = {beta}: {} sweeps", outcome.sweeps);
        fields.push(pair);
    }
    Ok((SegregationTable { alpha, rows, failure }, fields))
}

pub fn sup_uv(pair: &SolutionPair) -> f64 {
    pair.u()
        .values()
        .iter()
        .zip(pair.v().values())
        .map(|(u, v)| u * v)
        .fold(0.0, f64::max)
}

pub fn interaction(pair: &SolutionPair) -> f64 {
    let g = pair.grid();
    let (u, v) = (pair.u().values(), pair.v().values());
    let sum: f64 = g.interior_nodes().map(|k| u[k] * u[k] * v[k] * v[k]).sum();
    pair.beta() * sum * g.h().powi(g.dim() as i32)
}

pub fn harm_residual(pair: &SolutionPair) -> f64 {
    let g = pair.grid();
    let diff: Vec<f64> = pair.u().values().iter().zip(pair.v().values()).map(|(u, v)| u - v).collect();
    let strides = g.strides();
    let inv_h2 = 1.0 / (g.h() * g.h());
    g.interior_nodes()
        .map(|k| laplacian_at(&diff, k, &strides, inv_h2).abs())
        .fold(0.0, f64::max)
}

/// Measure of `{u v > threshold}`.
pub fn interface_width(pair: &SolutionPair, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(PslabError::InvalidArgument(format!("threshold must be positive, got {threshold}")));
    }
    let g = pair.grid();
    let count = pair
        .u()
        .values()
        .iter()
        .zip(pair.v().values())
        .filter(|(u, v)| *u * *v > threshold)
        .count();
    Ok(count as f64 * g.h().powi(g.dim() as i32))
}

/// `max |f(x) − f(y)| / |x − y|^α` over node pairs at least `min_sep` apart
/// in the subbox `HOLDER_MARGIN` nodes in from every face.
///
/// The pairs are: every pair at the smallest admissible offset along each
/// axis, the two ends of every axis-parallel line, and a fixed-seed random
/// sample.
pub fn holder_quotient(f: &ScalarField, alpha: f64, min_sep: f64) -> Result<f64> {
    let g = f.grid();
    let h = g.h();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(PslabError::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(min_sep >= 2.0 * h * (1.0 - 1e-12)) {
        return Err(PslabError::InvalidArgument(format!("min_sep must be at least 2h = {}", 2.0 * h)));
    }
    let dim = g.dim();
    let lo = HOLDER_MARGIN;
    let hi: Vec<usize> = g.n().iter().map(|&n| n.saturating_sub(1 + HOLDER_MARGIN)).collect();
    if hi.iter().any(|&m| m <= lo) {
        return Err(PslabError::InsufficientData("grid too small for the Hölder margin".into()));
    }
    let inside = |idx: &[usize; 3]| (0..dim).all(|d| idx[d] >= lo && idx[d] <= hi[d]);
    let nodes: Vec<usize> = (0..g.len()).filter(|&k| inside(&g.multi_index(k))).collect();
    let vals = f.values();
    let strides = g.strides();
    let dist = |a: usize, b: usize| {
        let (pa, pb) = (g.point(a), g.point(b));
        (0..dim).map(|d| (pa[d] - pb[d]).powi(2)).sum::<f64>().sqrt()
    };
    let mut best: f64 = 0.0;
    let mut pairs = 0usize;
    let mut take = |a: usize, b: usize| {
        let r = dist(a, b);
        if r >= min_sep * (1.0 - 1e-12) {
            pairs += 1;
            best = best.max((vals[a] - vals[b]).abs() / r.powf(alpha));
        }
    };

    let step = (min_sep / h - 1e-9).ceil() as usize;
    for &k in &nodes {
        let idx = g.multi_index(k);
        for d in 0..dim {
            if idx[d] + step <= hi[d] {
                take(k, k + step * strides[d]);
            }
            if idx[d] == lo {
                take(k, k + (hi[d] - lo) * strides[d]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(HOLDER_SEED);
    for _ in 0..HOLDER_RANDOM_PAIRS {
        let a = *nodes.choose(&mut rng).unwrap();
        let b = *nodes.choose(&mut rng).unwrap();
        take(a, b);
    }
    if pairs < 100 {
        return Err(PslabError::InsufficientData(format!("only {pairs} Hölder pairs available")));
    }
    Ok(best)
}
