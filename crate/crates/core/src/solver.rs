//! Nonlinear red-black Gauss–Seidel/SOR for `Δu = β u v²`, `Δv = β u² v`
//! on a box with Dirichlet data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PslabError, Result};
use crate::field::{harmonic_polynomial, laplacian_at, GridSpec, ScalarField, SolutionPair};
use crate::ode1d::{restrict_to_lattice, Profile1D};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    ProfileLift,
    HarmonicTrace,
    Custom,
}

/// Dirichlet values of both components on the boundary nodes of a grid,
/// listed in flat-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    grid: GridSpec,
    nodes: Vec<usize>,
    u: Vec<f64>,
    v: Vec<f64>,
    kind: BoundaryKind,
}

impl BoundaryData {
    /// Evaluates `f(x) -> (u, v)` on every boundary node.
    pub fn from_fn(grid: &GridSpec, kind: BoundaryKind, f: impl Fn(&[f64; 3]) -> Result<(f64, f64)>) -> Result<Self> {
        let nodes: Vec<usize> = grid.boundary_nodes().collect();
        let mut u = Vec::with_capacity(nodes.len());
        let mut v = Vec::with_capacity(nodes.len());
        for &k in &nodes {
            let (a, b) = f(&grid.point(k))?;
            if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0) {
                return Err(PslabError::InvalidArgument(format!(
                    "boundary values must be finite and nonnegative, got ({a}, {b}) at node {k}"
                )));
            }
            u.push(a);
            v.push(b);
        }
        Ok(Self {
            grid: grid.clone(),
            nodes,
            u,
            v,
            kind,
        })
    }

    /// Traces of an existing pair.
    pub fn from_pair(pair: &SolutionPair) -> Self {
        let grid = pair.grid().clone();
        let nodes: Vec<usize> = grid.boundary_nodes().collect();
        let u = nodes.iter().map(|&k| pair.u().values()[k]).collect();
        let v = nodes.iter().map(|&k| pair.v().values()[k]).collect();
        Self {
            grid,
            nodes,
            u,
            v,
            kind: BoundaryKind::Custom,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u
    }

    pub fn v_values(&self) -> &[f64] {
        &self.v
    }

    fn impose(&self, u: &mut [f64], v: &mut [f64]) {
        for (i, &k) in self.nodes.iter().enumerate() {
            u[k] = self.u[i];
            v[k] = self.v[i];
        }
    }
}

/// `u(x) = w_u(x_N)`, `v(x) = w_v(x_N)` on the boundary, where `w` is the
/// profile restricted to the grid's `x_N` lattice (see
/// [`restrict_to_lattice`]). With this data the discrete solution is itself
/// a function of `x_N` only.
pub fn boundary_from_profile(p: &Profile1D, grid: &GridSpec) -> Result<BoundaryData> {
    check_profile_range(p, grid)?;
    let last = grid.dim() - 1;
    let (wu, wv) = restrict_to_lattice(p, grid.lo()[last], grid.hi()[last], grid.n()[last])?;
    let h = grid.h();
    BoundaryData::from_fn(grid, BoundaryKind::ProfileLift, |x| {
        let j = ((x[last] - grid.lo()[last]) / h).round() as usize;
        Ok((wu[j], wv[j]))
    })
}

/// The whole lifted pair `(p.u(x_N), p.v(x_N))` with `β = 1`.
pub fn lift_profile(p: &Profile1D, grid: &GridSpec) -> Result<SolutionPair> {
    check_profile_range(p, grid)?;
    let last = grid.dim() - 1;
    let u = ScalarField::from_fn(grid.clone(), |x| p.u_at(x[last]).unwrap_or(0.0))?;
    let v = ScalarField::from_fn(grid.clone(), |x| p.v_at(x[last]).unwrap_or(0.0))?;
    SolutionPair::new(u, v, 1.0)
}

fn check_profile_range(p: &Profile1D, grid: &GridSpec) -> Result<()> {
    let last = grid.dim() - 1;
    let (lo, hi) = (grid.lo()[last], grid.hi()[last]);
    if lo < p.left() - 1e-12 || hi > p.right() + 1e-12 {
        return Err(PslabError::InvalidArgument(format!(
            "grid x_N range [{lo}, {hi}] exceeds profile interval [{}, {}]",
            p.left(),
            p.right()
        )));
    }
    Ok(())
}

/// Boundary traces `u = Ψ⁺`, `v = Ψ⁻` of `Ψ = amplitude · Re((x₁ + i x_N)^d)`
/// (2D) or `amplitude · x_N` (3D, `d = 1` only).
pub fn boundary_from_harmonic(degree: u32, amplitude: f64, grid: &GridSpec) -> Result<BoundaryData> {
    if degree == 0 {
        return Err(PslabError::InvalidArgument("degree must be >= 1".into()));
    }
    match (grid.dim(), degree) {
        (2, _) | (3, 1) => {}
        (dim, d) => {
            return Err(PslabError::Unsupported(format!(
                "harmonic boundary of degree {d} on a {dim}D grid"
            )))
        }
    }
    BoundaryData::from_fn(grid, BoundaryKind::HarmonicTrace, |x| {
        let psi = amplitude * harmonic_polynomial(grid.dim(), degree, x)?;
        Ok((psi.max(0.0), (-psi).max(0.0)))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    pub omega: f64,
    /// Log the residual every this many sweeps (0 disables logging).
    pub log_every: usize,
    /// Sweeps between residual evaluations.
    pub check_every: usize,
}

impl SolveOptions {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            tol: 1e-8,
            max_sweeps: 200_000,
            omega: if dim >= 3 { 1.5 } else { 1.7 },
            log_every: 0,
            check_every: 10,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(PslabError::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(PslabError::InvalidArgument(format!("omega must lie in (0, 2), got {}", self.omega)));
        }
        if self.max_sweeps == 0 {
            return Err(PslabError::InvalidArgument("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// A converged pair and how it was reached.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub pair: SolutionPair,
    pub sweeps: usize,
    pub residual: (f64, f64),
    pub history: Vec<f64>,
    pub omega: f64,
}

/// Solves from the harmonic extension of the boundary data.
pub fn solve(bdry: &BoundaryData, beta: f64, opts: &SolveOptions) -> Result<SolveOutcome> {
    opts.validate()?;
    let grid = bdry.grid();
    if !(2..=3).contains(&grid.dim()) {
        return Err(PslabError::Unsupported(format!("{}D relaxation solve", grid.dim())));
    }
    let mut u = vec![0.0; grid.len()];
    let mut v = vec![0.0; grid.len()];
    bdry.impose(&mut u, &mut v);
    let guess_opts = SolveOptions {
        tol: if beta == 0.0 { opts.tol } else { opts.tol.max(1e-6) },
        ..opts.clone()
    };
    let harmonic = relax_with_fallback(grid, u, v, 0.0, &guess_opts)?;
    if beta == 0.0 {
        return Ok(harmonic);
    }
    let (u, v, _) = harmonic.pair.into_parts();
    let mut out = relax_with_fallback(grid, u.into_values(), v.into_values(), beta, opts)?;
    out.sweeps += harmonic.sweeps;
    Ok(out)
}

/// Solves starting from `initial` (whose boundary values are replaced by
/// `bdry`).
pub fn solve_from(initial: &SolutionPair, bdry: &BoundaryData, beta: f64, opts: &SolveOptions) -> Result<SolveOutcome> {
    opts.validate()?;
    if initial.grid() != bdry.grid() {
        return Err(PslabError::InvalidArgument("initial pair and boundary data use different grids".into()));
    }
    if !(2..=3).contains(&bdry.grid().dim()) {
        return Err(PslabError::Unsupported(format!("{}D relaxation solve", bdry.grid().dim())));
    }
    let mut u = initial.u().values().to_vec();
    let mut v = initial.v().values().to_vec();
    bdry.impose(&mut u, &mut v);
    relax_with_fallback(bdry.grid(), u, v, beta, opts)
}

fn relax_with_fallback(grid: &GridSpec, u: Vec<f64>, v: Vec<f64>, beta: f64, opts: &SolveOptions) -> Result<SolveOutcome> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(PslabError::InvalidArgument(format!("beta must be >= 0, got {beta}")));
    }
    match relax(grid, u.clone(), v.clone(), beta, opts) {
        Err(PslabError::Divergence { iterations }) if opts.omega != 1.0 => {
            log::warn!("SOR diverged after {iterations} sweeps at omega = {}; retrying with 1.0", opts.omega);
            relax(grid, u, v, beta, &SolveOptions { omega: 1.0, ..opts.clone() })
        }
        other => other,
    }
}

fn relax(grid: &GridSpec, mut u: Vec<f64>, mut v: Vec<f64>, beta: f64, opts: &SolveOptions) -> Result<SolveOutcome> {
    let check_every = opts.check_every.max(1);
    let mut history = Vec::new();
    let mut sweeps = 0;
    loop {
        let (ru, rv) = residual_raw(grid, &u, &v, beta);
        let r = ru.max(rv);
        if r.is_nan() {
            return Err(PslabError::Divergence { iterations: sweeps });
        }
        history.push(r);
        if opts.log_every > 0 && sweeps % opts.log_every < check_every {
            log::info!("sweep {sweeps}: residual {r:.3e}");
        }
        if r <= opts.tol {
            let pair = SolutionPair::new(ScalarField::new(grid.clone(), u)?, ScalarField::new(grid.clone(), v)?, beta)?;
            return Ok(SolveOutcome {
                pair,
                sweeps,
                residual: (ru, rv),
                history,
                omega: opts.omega,
            });
        }
        if sweeps >= opts.max_sweeps {
            return Err(PslabError::NonConvergence {
                iterations: sweeps,
                residual: r,
                history,
            });
        }
        for _ in 0..check_every {
            half_sweep(grid, &mut u, &mut v, beta, opts.omega, 0);
            half_sweep(grid, &mut u, &mut v, beta, opts.omega, 1);
            sweeps += 1;
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(PslabError::Divergence { iterations: sweeps });
        }
    }
}

/// Interior nodes of one axis-0 slab with the given color, in a fixed order.
fn slab_nodes(grid: &GridSpec, i0: usize, color: usize) -> impl Iterator<Item = usize> + '_ {
    let n = grid.n();
    let dim = grid.dim();
    let n1 = n[1];
    let n2 = if dim == 3 { n[2] } else { 1 };
    let base = i0 * grid.strides()[0];
    (1..n1 - 1).flat_map(move |i1| {
        let (start, end) = if dim == 3 { (1, n2 - 1) } else { (0, 1) };
        (start..end).filter_map(move |i2| {
            if (i0 + i1 + i2) % 2 == color {
                Some(base + i1 * n2 + i2)
            } else {
                None
            }
        })
    })
}

/// Updates every interior node of one color. Same-color nodes never
/// neighbor each other, so the updates are order-independent: they are
/// computed in parallel from the current state, then written back.
fn half_sweep(grid: &GridSpec, u: &mut [f64], v: &mut [f64], beta: f64, omega: f64, color: usize) {
    let n0 = grid.n()[0];
    let strides = grid.strides();
    let h2b = grid.h() * grid.h() * beta;
    let diag = 2.0 * grid.dim() as f64;
    let (ur, vr): (&[f64], &[f64]) = (u, v);
    let updates: Vec<Vec<(f64, f64)>> = (1..n0 - 1)
        .into_par_iter()
        .map(|i0| {
            slab_nodes(grid, i0, color)
                .map(|k| {
                    let mut su = 0.0;
                    let mut sv = 0.0;
                    for &s in &strides {
                        su += ur[k - s] + ur[k + s];
                        sv += vr[k - s] + vr[k + s];
                    }
                    let (uk, vk) = (ur[k], vr[k]);
                    let ug = su / (diag + h2b * vk * vk);
                    let un = (uk + omega * (ug - uk)).max(0.0);
                    let vg = sv / (diag + h2b * un * un);
                    let vn = (vk + omega * (vg - vk)).max(0.0);
                    (un, vn)
                })
                .collect()
        })
        .collect();
    let slab = strides[0];
    u.par_chunks_mut(slab)
        .zip(v.par_chunks_mut(slab))
        .enumerate()
        .filter(|(i0, _)| *i0 >= 1 && *i0 < n0 - 1)
        .for_each(|(i0, (us, vs))| {
            let base = i0 * slab;
            for (k, &(a, b)) in slab_nodes(grid, i0, color).zip(&updates[i0 - 1]) {
                us[k - base] = a;
                vs[k - base] = b;
            }
        });
}

fn residual_raw(grid: &GridSpec, u: &[f64], v: &[f64], beta: f64) -> (f64, f64) {
    let strides = grid.strides();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    (0..grid.len())
        .into_par_iter()
        .filter(|&k| !grid.is_boundary(k))
        .map(|k| {
            let ru = laplacian_at(u, k, &strides, inv_h2) - beta * u[k] * v[k] * v[k];
            let rv = laplacian_at(v, k, &strides, inv_h2) - beta * u[k] * u[k] * v[k];
            (ru.abs(), rv.abs())
        })
        .reduce(|| (0.0, 0.0), |a, b| (max_nan(a.0, b.0), max_nan(a.1, b.1)))
}

fn max_nan(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// `(max |Δ_h u − β u v²|, max |Δ_h v − β u² v|)` over interior nodes.
pub fn residual(pair: &SolutionPair) -> (f64, f64) {
    residual_raw(pair.grid(), pair.u().values(), pair.v().values(), pair.beta())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{laplacian, linear_pair};
    use crate::ode1d::HeteroclinicProblem;

    #[test]
    fn constant_pair_residual() {
        let g = GridSpec::cube(2, -1.0, 1.0, 9).unwrap();
        let c = 0.7;
        let f = ScalarField::from_fn(g, |_| c).unwrap();
        let pair = SolutionPair::new(f.clone(), f, 2.0).unwrap();
        let (ru, rv) = residual(&pair);
        assert!((ru - 2.0 * c * c * c).abs() < 1e-15);
        assert!((rv - 2.0 * c * c * c).abs() < 1e-15);
    }

    #[test]
    fn exact_linear_pair_residual_sits_on_interface() {
        let g = GridSpec::cube(2, -1.0, 1.0, 33).unwrap();
        let h = g.h();
        let pair = linear_pair(&g, 1.0).unwrap();
        let lap = laplacian(pair.u()).unwrap();
        for k in g.interior_nodes() {
            let xn = g.x_n(k);
            if xn.abs() < 0.5 * h {
                assert!((lap.values()[k] - 1.0 / h).abs() < 1e-9);
            } else {
                assert!(lap.values()[k].abs() < 1e-9);
            }
        }
        let (ru, _) = residual(&pair);
        assert!((ru - 1.0 / h).abs() < 1e-9);
    }

    #[test]
    fn decoupled_solve_is_discrete_harmonic() {
        let g = GridSpec::cube(2, -1.0, 1.0, 33).unwrap();
        let bdry = boundary_from_harmonic(1, 1.0, &g).unwrap();
        let opts = SolveOptions { tol: 1e-10, ..SolveOptions::for_dim(2) };
        let out = solve(&bdry, 0.0, &opts).unwrap();
        let lu = laplacian(out.pair.u()).unwrap();
        assert!(g.interior_nodes().all(|k| lu.values()[k].abs() <= 1e-10));
    }

    #[test]
    fn converged_pair_is_positive_inside() {
        let g = GridSpec::cube(2, -1.0, 1.0, 33).unwrap();
        let bdry = boundary_from_harmonic(1, 1.0, &g).unwrap();
        let out = solve(&bdry, 4.0, &SolveOptions::for_dim(2)).unwrap();
        let (ru, rv) = residual(&out.pair);
        assert!(ru <= 1e-8 && rv <= 1e-8);
        for k in g.interior_nodes() {
            assert!(out.pair.u().values()[k] > 0.0 && out.pair.v().values()[k] > 0.0);
        }
    }

    #[test]
    fn lifted_profile_is_reproduced() {
        // Profile nodes coincide with grid rows, so the lift solves the 2D
        // discrete system exactly.
        let p = HeteroclinicProblem {
            half_length: 32.0,
            nodes: 1025,
            ..Default::default()
        }
        .solve()
        .unwrap();
        let g = GridSpec::cube(2, -4.0, 4.0, 129).unwrap();
        let bdry = boundary_from_profile(&p, &g).unwrap();
        let opts = SolveOptions {
            tol: 1e-9,
            omega: 1.9,
            ..SolveOptions::for_dim(2)
        };
        let out = solve(&bdry, 1.0, &opts).unwrap();
        let lift = lift_profile(&p, &g).unwrap();
        let diff = out
            .pair
            .u()
            .values()
            .iter()
            .zip(lift.u().values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff <= 5e-6, "{diff}");
    }

    #[test]
    fn profile_boundary_is_x1_independent() {
        let p = HeteroclinicProblem::default().solve().unwrap();
        let g = GridSpec::cube(2, -8.0, 8.0, 33).unwrap();
        let bdry = boundary_from_profile(&p, &g).unwrap();
        for (i, &k) in bdry.nodes().iter().enumerate() {
            let xn = g.x_n(k);
            assert!((bdry.u_values()[i] - p.u_at(xn).unwrap()).abs() < 5e-2);
            if (xn - 8.0).abs() < 1e-12 {
                // u(t) - t tends to a positive constant
                let offset = p.u_at(16.0).unwrap() - 16.0;
                assert!(offset > 0.0);
                assert!((bdry.u_values()[i] - 8.0 - offset).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn profile_range_mismatch() {
        let p = HeteroclinicProblem {
            half_length: 10.0,
            nodes: 1001,
            ..Default::default()
        }
        .solve()
        .unwrap();
        let g = GridSpec::cube(2, -12.0, 12.0, 9).unwrap();
        assert!(boundary_from_profile(&p, &g).is_err());
    }

    #[test]
    fn harmonic_boundary_parts() {
        let g = GridSpec::cube(2, -1.0, 1.0, 9).unwrap();
        let b1 = boundary_from_harmonic(1, 1.0, &g).unwrap();
        for (i, &k) in b1.nodes().iter().enumerate() {
            let xn = g.x_n(k);
            assert_eq!(b1.u_values()[i], xn.max(0.0));
            assert_eq!(b1.v_values()[i], (-xn).max(0.0));
        }
        let b2 = boundary_from_harmonic(2, 1.0, &g).unwrap();
        let mut diff = 0.0;
        let mut psi = 0.0;
        for (i, &k) in b2.nodes().iter().enumerate() {
            let p = g.point(k);
            diff += b2.u_values()[i] - b2.v_values()[i];
            psi += p[0] * p[0] - p[1] * p[1];
        }
        assert_eq!(diff, psi);
        let g3 = GridSpec::cube(3, -1.0, 1.0, 5).unwrap();
        assert!(matches!(boundary_from_harmonic(2, 1.0, &g3), Err(PslabError::Unsupported(_))));
    }

    #[test]
    fn sweep_cap_reports_history() {
        let g = GridSpec::cube(2, -1.0, 1.0, 65).unwrap();
        let bdry = boundary_from_harmonic(1, 1.0, &g).unwrap();
        let opts = SolveOptions {
            tol: 1e-14,
            max_sweeps: 20,
            ..SolveOptions::for_dim(2)
        };
        match solve(&bdry, 0.0, &opts) {
            Err(PslabError::NonConvergence { history, .. }) => assert!(history.len() >= 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn three_dimensional_solve() {
        let g = GridSpec::cube(3, -1.0, 1.0, 17).unwrap();
        let bdry = boundary_from_harmonic(1, 1.0, &g).unwrap();
        let out = solve(&bdry, 2.0, &SolveOptions::for_dim(3)).unwrap();
        let (ru, rv) = residual(&out.pair);
        assert!(ru <= 1e-8 && rv <= 1e-8);
    }
}
