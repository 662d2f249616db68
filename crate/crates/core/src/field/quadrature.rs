use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{PslabError, Result};
use crate::field::ops::{sample_pair, PointSample};
use crate::field::scalar::SolutionPair;

/// Angular 2D resolution used by the diagnostics unless told otherwise.
pub const DEFAULT_ANGLES_2D: usize = 720;
pub const DEFAULT_POLAR_3D: usize = 48;
pub const DEFAULT_AZIMUTH_3D: usize = 96;

/// Nodes and weights on the unit sphere `S^{N-1}`.
///
/// 2D: uniform angles with equal (trapezoid) weights. 3D: Gauss–Legendre in
/// the cosine of the polar angle (measured from `e_N`) times uniform
/// azimuth. 1D: the two points `±1`.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    dim: usize,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn circle(n_angles: usize) -> Result<Self> {
        if n_angles < 4 {
            return Err(PslabError::InvalidArgument("need at least 4 angles".into()));
        }
        let w = 2.0 * PI / n_angles as f64;
        let nodes = (0..n_angles)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / n_angles as f64;
                [theta.cos(), theta.sin(), 0.0]
            })
            .collect();
        Ok(Self {
            dim: 2,
            nodes,
            weights: vec![w; n_angles],
        })
    }

    pub fn sphere(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar < 2 || n_azimuth < 4 {
            return Err(PslabError::InvalidArgument("sphere rule too coarse".into()));
        }
        let (xs, ws) = gauss_legendre(n_polar);
        let dphi = 2.0 * PI / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (&c, &w) in xs.iter().zip(&ws) {
            let s = (1.0 - c * c).sqrt();
            for j in 0..n_azimuth {
                let phi = dphi * j as f64;
                nodes.push([s * phi.cos(), s * phi.sin(), c]);
                weights.push(w * dphi);
            }
        }
        Ok(Self { dim: 3, nodes, weights })
    }

    pub fn points_1d() -> Self {
        Self {
            dim: 1,
            nodes: vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            weights: vec![1.0, 1.0],
        }
    }

    /// Default rule for a dimension.
    pub fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self::points_1d()),
            2 => Self::circle(DEFAULT_ANGLES_2D),
            3 => Self::sphere(DEFAULT_POLAR_3D, DEFAULT_AZIMUTH_3D),
            _ => Err(PslabError::Unsupported(format!("no sphere rule in dimension {dim}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `|S^{N-1}|`
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => f64::NAN,
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn check_rule(pair: &SolutionPair, quad: &SphereQuadrature) -> Result<()> {
    if quad.dim() != pair.grid().dim() {
        return Err(PslabError::InvalidArgument(format!(
            "{}D quadrature for a {}D grid",
            quad.dim(),
            pair.grid().dim()
        )));
    }
    Ok(())
}

/// `∫_{S^{N-1}} f(x0 + r ω) dω` for a vector of integrands at once.
/// The sphere is not range-checked here; callers do that once per ball.
fn angular_integrals<const K: usize>(
    pair: &SolutionPair,
    x0: &[f64],
    r: f64,
    quad: &SphereQuadrature,
    f: &(impl Fn(&PointSample) -> [f64; K] + Sync),
) -> Result<[f64; K]> {
    let mut acc = [0.0; K];
    for (node, &w) in quad.nodes().iter().zip(quad.weights()) {
        let offset = [r * node[0], r * node[1], r * node[2]];
        let sample = sample_pair(pair, x0, offset, *node)?;
        let vals = f(&sample);
        for k in 0..K {
            acc[k] += w * vals[k];
        }
    }
    Ok(acc)
}

/// Surface integrals `∫_{∂B_r(x0)} f` of `K` integrands in one pass.
pub fn sphere_integrals<const K: usize>(
    pair: &SolutionPair,
    x0: &[f64],
    r: f64,
    quad: &SphereQuadrature,
    f: impl Fn(&PointSample) -> [f64; K] + Sync,
) -> Result<[f64; K]> {
    check_rule(pair, quad)?;
    pair.grid().check_ball(x0, r)?;
    let scale = r.powi(pair.grid().dim() as i32 - 1);
    let mut out = angular_integrals(pair, x0, r, quad, &f)?;
    for x in &mut out {
        *x *= scale;
    }
    Ok(out)
}

/// `∫_{∂B_r(x0)} expr`, with `expr` evaluated from interpolated values and
/// gradients at each quadrature point.
pub fn sphere_integral(
    expr: impl Fn(&PointSample) -> f64 + Sync,
    pair: &SolutionPair,
    x0: &[f64],
    r: f64,
    quad: &SphereQuadrature,
) -> Result<f64> {
    Ok(sphere_integrals(pair, x0, r, quad, |s| [expr(s)])?[0])
}

/// Default number of radial shells for a ball of radius `r`: four per cell.
pub fn default_shells(r: f64, h: f64) -> usize {
    ((4.0 * r / h).ceil() as usize).max(8)
}

/// Angular integrals of `K` integrands sampled on the shells
/// `s_j = j r / n_shells`, `j = 0..=n_shells`.
#[derive(Clone, Debug)]
pub struct ShellProfile<const K: usize> {
    pub radius: f64,
    pub dim: usize,
    pub shells: Vec<[f64; K]>,
}

impl<const K: usize> ShellProfile<K> {
    pub fn compute(
        pair: &SolutionPair,
        x0: &[f64],
        r: f64,
        quad: &SphereQuadrature,
        n_shells: usize,
        f: impl Fn(&PointSample) -> [f64; K] + Sync,
    ) -> Result<Self> {
        check_rule(pair, quad)?;
        if n_shells < 8 {
            return Err(PslabError::InvalidArgument(format!("need at least 8 shells, got {n_shells}")));
        }
        pair.grid().check_ball(x0, r)?;
        let shells = (0..=n_shells)
            .into_par_iter()
            .map(|j| {
                let s = r * j as f64 / n_shells as f64;
                angular_integrals(pair, x0, s, quad, &f)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            radius: r,
            dim: pair.grid().dim(),
            shells,
        })
    }

    /// `∫_0^r s^power · A_k(s) ds` by the composite trapezoid rule.
    pub fn radial(&self, k: usize, power: i32) -> f64 {
        let n = self.shells.len() - 1;
        let ds = self.radius / n as f64;
        let mut acc = 0.0;
        for (j, vals) in self.shells.iter().enumerate() {
            let s = ds * j as f64;
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            let weight = if power == 0 { 1.0 } else { s.powi(power) };
            acc += w * weight * vals[k];
        }
        acc * ds
    }

    /// Plain ball integral `∫_{B_r} f_k`.
    pub fn ball(&self, k: usize) -> f64 {
        self.radial(k, self.dim as i32 - 1)
    }

    /// Kernel-weighted ball integral `∫_{B_r} f_k |y - x0|^{2-N} dy`.
    pub fn kernel(&self, k: usize) -> f64 {
        self.radial(k, 1)
    }
}

/// `∫_{B_r(x0)} g(y) |y − x0|^{2−N} dy`, evaluated as
/// `∫_0^r s · (∫_{S^{N−1}} g(x0 + sω) dω) ds` so the kernel never appears.
pub fn shell_ball_integral(
    expr: impl Fn(&PointSample) -> f64 + Sync,
    pair: &SolutionPair,
    x0: &[f64],
    r: f64,
    quad: &SphereQuadrature,
    n_shells: usize,
) -> Result<f64> {
    let profile = ShellProfile::compute(pair, x0, r, quad, n_shells, |s| [expr(s)])?;
    Ok(profile.kernel(0))
}

/// Plain ball integral `∫_{B_r(x0)} g`, by the same shell decomposition.
pub fn ball_integral(
    expr: impl Fn(&PointSample) -> f64 + Sync,
    pair: &SolutionPair,
    x0: &[f64],
    r: f64,
    quad: &SphereQuadrature,
    n_shells: usize,
) -> Result<f64> {
    let profile = ShellProfile::compute(pair, x0, r, quad, n_shells, |s| [expr(s)])?;
    Ok(profile.ball(0))
}
