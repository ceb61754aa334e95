//! Coherent states `eta(lambda, a, b)`, the almost-homomorphism `nu_lambda`
//! and the defect quantities that single out `C*(H_n)` among operator fields.
//!
//! `eta(lambda, a, b)(s) = |lambda|^{n/4} exp(2 pi i a.s) eta(|lambda|^{1/2} (s + b/lambda))`.

use crate::error::bail;
use crate::fft::transform_axis;
use crate::heisenberg::{pi_lambda, rho_symbol, HeisenbergField};
use crate::linop::{self, KernelOperator, VectorL2};
use crate::sampling::{GridSpec, SampledFunctionH, Symbol, Window};
use crate::util::{cis, unflatten};
use crate::{is_decreasing, Error, Result, C64, DECAY_FLOOR};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Allowed deviation of a coherent state's grid norm from one.
pub const STATE_NORM_TOL: f64 = 1e-8;

/// A coherent state sampled on the window's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    pub lambda: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub values: VectorL2,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda == 0.0 || !lambda.is_finite() {
        bail!(Domain, "lambda must be finite and nonzero");
    }
    Ok(())
}

/// `eta(lambda, a, b)(z)` at an arbitrary point.
pub fn eta_value(eta: &Window, lambda: f64, a: &[f64], b: &[f64], z: &[f64]) -> C64 {
    let n = z.len();
    let sl = libm::sqrt(lambda.abs());
    let mut arg = [0.0f64; 2];
    let mut phase = 0.0;
    for i in 0..n {
        arg[i] = sl * (z[i] + b[i] / lambda);
        phase += a[i] * z[i];
    }
    cis(2.0 * PI * phase) * eta.eval(&arg[..n]) * libm::pow(lambda.abs(), n as f64 / 4.0)
}

/// Samples `eta(lambda, a, b)` without the norm check.
pub(crate) fn sample_state(eta: &Window, lambda: f64, a: &[f64], b: &[f64]) -> VectorL2 {
    let g = *eta.grid();
    let n = g.n();
    let mut idx = vec![0usize; n];
    let mut z = vec![0.0; n];
    let values = (0..g.dim())
        .map(|flat| {
            unflatten(flat, g.m(), n, &mut idx);
            for i in 0..n {
                z[i] = g.node(idx[i]);
            }
            eta_value(eta, lambda, a, b, &z)
        })
        .collect();
    VectorL2::new(g, values).expect("sized by the grid")
}

/// Coherent state on the window's grid; fails when the state is not captured
/// by the grid to within [`STATE_NORM_TOL`].
pub fn eta_state(eta: &Window, lambda: f64, a: &[f64], b: &[f64]) -> Result<CoherentState> {
    check_lambda(lambda)?;
    let n = eta.grid().n();
    if a.len() != n || b.len() != n {
        return Err(Error::Dimension);
    }
    let values = sample_state(eta, lambda, a, b);
    let nrm = values.norm();
    if (nrm - 1.0).abs() > STATE_NORM_TOL {
        bail!(OffGrid, "captured norm {nrm:.3e} at lambda = {lambda}, b = {b:?}");
    }
    Ok(CoherentState { lambda, a: a.to_vec(), b: b.to_vec(), values })
}

/// Samples of a matrix coefficient on the group grid. Bounded but not decaying
/// in `t`, so it is kept apart from [`SampledFunctionH`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCoefficient {
    grid: GridSpec,
    values: Vec<C64>,
}

impl MatrixCoefficient {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Axes `(x, y, t)` row-major.
    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

/// `c(x, y, t) = <pi_lambda(x, y, t) eta(lambda, u), eta(lambda, u')>` on the
/// grid of `eta`, by direct quadrature in `s` on a grid refined around the
/// states.
pub fn coefficient(eta: &Window, lambda: f64, u: (&[f64], &[f64]), u2: (&[f64], &[f64])) -> Result<MatrixCoefficient> {
    check_lambda(lambda)?;
    let g = *eta.grid();
    if g.n() != 1 {
        bail!(Parameter, "matrix coefficients are implemented for n = 1");
    }
    let sl = libm::sqrt(lambda.abs());
    let rad = eta.effective_radius() / sl;
    let c2 = -u2.1[0] / lambda;
    let amax = u.0[0].abs().max(u2.0[0].abs()) + lambda.abs() * g.r() + 1.0;
    let ds = (eta.resolution() / sl).min(1.0 / (8.0 * amax)).min(g.spacing());
    let steps = libm::ceil(rad / ds) as i64;
    let s_nodes: Vec<f64> = (-steps..=steps).map(|k| c2 + k as f64 * ds).collect();
    let right: Vec<C64> = s_nodes.iter().map(|&s| eta_value(eta, lambda, u2.0, u2.1, &[s]).conj()).collect();
    let m = g.m();
    let mut xy = vec![C64::new(0.0, 0.0); m * m];
    for (ix, x) in g.nodes().into_iter().enumerate() {
        let shifted: Vec<C64> = s_nodes.iter().map(|&s| eta_value(eta, lambda, u.0, u.1, &[s - x])).collect();
        for (iy, y) in g.nodes().into_iter().enumerate() {
            let w = cis(2.0 * PI * lambda * y * ds);
            let mut ph = cis(2.0 * PI * lambda * y * (s_nodes[0] - x / 2.0));
            let mut acc = C64::new(0.0, 0.0);
            for (l, r) in shifted.iter().zip(&right) {
                acc += ph * l * r;
                ph *= w;
            }
            xy[ix * m + iy] = acc * ds;
        }
    }
    let mut values = Vec::with_capacity(m * m * m);
    let t_phase: Vec<C64> = g.nodes().iter().map(|&t| cis(-2.0 * PI * lambda * t)).collect();
    for v in &xy {
        for p in &t_phase {
            values.push(v * p);
        }
    }
    Ok(MatrixCoefficient { grid: g, values })
}

fn window_bandwidth(eta: &Window) -> f64 {
    // frequency beyond which the window's transform is negligible
    1.0 / eta.resolution()
}

/// Kernel of `nu_lambda(h)` from the explicit `b`-integral
/// `K(x, s) = int h^2(x - s, |lambda|^{1/2} b) conj(eta(|lambda|^{1/2} s + sgn b)) eta(|lambda|^{1/2} x + sgn b) db`.
pub fn nu_lambda(h: &Symbol, lambda: f64, eta: &Window) -> Result<KernelOperator> {
    check_lambda(lambda)?;
    let g = *h.grid();
    if eta.grid() != &g {
        return Err(Error::Dimension);
    }
    let n = g.n();
    let m = g.m();
    let dim = g.dim();
    let sl = libm::sqrt(lambda.abs());
    let sg = lambda.signum();

    let reach = (g.freq_max() / sl).min(eta.effective_radius() + sl * g.r());
    let db = 1.0 / (sl * g.r() + 2.0 * window_bandwidth(eta));
    let half = libm::ceil(reach / db) as usize;
    let q1 = 2 * half + 1;
    let b1: Vec<f64> = (0..q1).map(|j| (j as f64 - half as f64) * db).collect();
    let qn = q1.pow(n as u32);
    let cell = libm::pow(db, n as f64);

    let mut bidx = vec![0usize; n];
    let mut beta = vec![0.0; n];
    let mut hat2 = vec![C64::new(0.0, 0.0); dim * qn];
    for j in 0..qn {
        unflatten(j, q1, n, &mut bidx);
        for c in 0..n {
            beta[c] = sl * b1[bidx[c]];
        }
        for q in 0..dim {
            hat2[q * qn + j] = h.hat2(q, &beta);
        }
    }
    let mut xi = vec![0usize; n];
    let mut z = vec![0.0; n];
    let mut etab = vec![C64::new(0.0, 0.0); dim * qn];
    for x in 0..dim {
        unflatten(x, m, n, &mut xi);
        for j in 0..qn {
            unflatten(j, q1, n, &mut bidx);
            for c in 0..n {
                z[c] = sl * g.node(xi[c]) + sg * b1[bidx[c]];
            }
            etab[x * qn + j] = eta.eval(&z);
        }
    }

    let mut kernel = vec![C64::new(0.0, 0.0); dim * dim];
    let mut si = vec![0usize; n];
    for x in 0..dim {
        unflatten(x, m, n, &mut xi);
        let ex = &etab[x * qn..(x + 1) * qn];
        's: for s in 0..dim {
            unflatten(s, m, n, &mut si);
            let mut q = 0usize;
            for c in 0..n {
                let qc = xi[c] as i64 - si[c] as i64 + (m / 2) as i64;
                if qc < 0 || qc >= m as i64 {
                    continue 's;
                }
                q = q * m + qc as usize;
            }
            let es = &etab[s * qn..(s + 1) * qn];
            let hq = &hat2[q * qn..(q + 1) * qn];
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..qn {
                acc += hq[j] * es[j].conj() * ex[j];
            }
            kernel[x * dim + s] = acc * cell;
        }
    }
    KernelOperator::new(g, kernel)
}

/// `||xi - |lambda|^{-n} sum_u <xi, eta_u> eta_u du|| / ||xi||` with the
/// sum over the frequency grid.
pub fn resolution_residual(xi: &VectorL2, lambda: f64, eta: &Window) -> Result<f64> {
    check_lambda(lambda)?;
    let g = *xi.grid();
    if eta.grid() != &g {
        return Err(Error::Dimension);
    }
    let nx = xi.norm();
    if nx == 0.0 {
        bail!(Degenerate, "zero vector");
    }
    let n = g.n();
    let m = g.m();
    let dim = g.dim();
    let mut recon = vec![C64::new(0.0, 0.0); dim];
    let mut bidx = vec![0usize; n];
    let mut b = vec![0.0; n];
    let zero = vec![0.0; n];
    for bj in 0..dim {
        unflatten(bj, m, n, &mut bidx);
        for c in 0..n {
            b[c] = g.freq(bidx[c]);
        }
        // eta_{a,b}(x) = exp(2 pi i a.x) w_b(x)
        let w = sample_state(eta, lambda, &zero, &b);
        let mut v: Vec<C64> = xi.values().iter().zip(w.values()).map(|(p, q)| p * q.conj()).collect();
        // <xi, eta_{a,b}> over the a-grid, then the a-sum of those times exp(2 pi i a.x)
        for axis in 0..n {
            transform_axis(&mut v, m, n, axis, true, g.spacing());
        }
        for axis in 0..n {
            transform_axis(&mut v, m, n, axis, false, g.freq_spacing());
        }
        for ((r, p), q) in recon.iter_mut().zip(&v).zip(w.values()) {
            *r += p * q;
        }
    }
    let scale = libm::pow(g.freq_spacing() / lambda.abs(), n as f64);
    let diff: Vec<C64> = xi.values().iter().zip(&recon).map(|(p, r)| p - r * scale).collect();
    Ok(VectorL2::new(g, diff)?.norm() / nx)
}

/// Which defect to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectKind {
    Characterization,
    Mult,
    Adjoint,
    Coefficient,
    NormRecovery,
}

/// One defect quantity at a single `lambda`; see [`DefectKind`].
pub fn defect(kind: DefectKind, f: &SampledFunctionH, g: Option<&SampledFunctionH>, lambda: f64, eta: &Window) -> Result<f64> {
    check_lambda(lambda)?;
    let h = rho_symbol(f)?;
    match kind {
        DefectKind::Characterization => {
            let a = pi_lambda(f, lambda)?;
            Ok(linop::norm(&a.sub(&nu_lambda(&h, lambda, eta)?)?))
        }
        DefectKind::Mult => {
            let Some(g) = g else {
                bail!(Parameter, "mult defect needs a second function");
            };
            let h2 = rho_symbol(g)?;
            mult_defect(&h, &h2, lambda, eta)
        }
        DefectKind::Adjoint => adjoint_defect(&h, lambda, eta),
        DefectKind::Coefficient => coefficient_defect(&h, lambda, eta),
        DefectKind::NormRecovery => norm_recovery_defect(&h, lambda, eta),
    }
}

/// `||nu(h h') - nu(h) nu(h')||`.
pub fn mult_defect(h: &Symbol, h2: &Symbol, lambda: f64, eta: &Window) -> Result<f64> {
    let prod = nu_lambda(&h.product(h2)?, lambda, eta)?;
    let comp = linop::compose(&nu_lambda(h, lambda, eta)?, &nu_lambda(h2, lambda, eta)?)?;
    Ok(linop::norm(&prod.sub(&comp)?))
}

/// `||nu(h*) - nu(h)*||`.
pub fn adjoint_defect(h: &Symbol, lambda: f64, eta: &Window) -> Result<f64> {
    let a = nu_lambda(&h.conj(), lambda, eta)?;
    let b = nu_lambda(h, lambda, eta)?.adjoint();
    Ok(linop::norm(&a.sub(&b)?))
}

/// `| ||nu(h)|| - sup |h^| |`.
pub fn norm_recovery_defect(h: &Symbol, lambda: f64, eta: &Window) -> Result<f64> {
    Ok((linop::norm(&nu_lambda(h, lambda, eta)?) - h.sup_norm()).abs())
}

/// `max_u ||nu(h) eta_u - h^(u) eta_u||` over symbol-grid points carrying mass
/// whose states fit on the grid.
pub fn coefficient_defect(h: &Symbol, lambda: f64, eta: &Window) -> Result<f64> {
    let nu = nu_lambda(h, lambda, eta)?;
    let g = *h.grid();
    let n = g.n();
    let m = g.m();
    let mut idx = vec![0usize; 2 * n];
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut worst: Option<f64> = None;
    for (flat, hu) in h.values().iter().enumerate() {
        if hu.norm() < DECAY_FLOOR * h.sup_norm() {
            continue;
        }
        unflatten(flat, m, 2 * n, &mut idx);
        for c in 0..n {
            a[c] = g.freq(idx[c]);
            b[c] = g.freq(idx[n + c]);
        }
        let Ok(st) = eta_state(eta, lambda, &a, &b) else {
            continue;
        };
        let r = nu.apply(&st.values)?.sub(&st.values.scale(*hu))?.norm();
        worst = Some(worst.map_or(r, |w: f64| w.max(r)));
    }
    worst.ok_or_else(|| Error::OffGrid(alloc::format!("no coherent state fits the grid at lambda = {lambda}")))
}

/// Defects of an operator field against `nu` on its ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    /// `(lambda, ||F(lambda) - nu_lambda(F(0))||)`.
    pub rows: Vec<(f64, f64)>,
    /// Defects decreasing with the final one below the tolerance.
    pub member: bool,
}

pub fn field_defect_profile(field: &HeisenbergField, eta: &Window, tol: f64) -> Result<FieldProfile> {
    if field.lambdas().is_empty() {
        bail!(Parameter, "empty ladder");
    }
    let mut rows = Vec::with_capacity(field.lambdas().len());
    for (&l, fib) in field.lambdas().iter().zip(field.fibers()) {
        let nu = nu_lambda(field.zero_fiber(), l, eta)?;
        rows.push((l, linop::norm(&fib.sub(&nu)?)));
    }
    let d: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let member = is_decreasing(&d) && d.last().is_some_and(|&v| v < tol);
    Ok(FieldProfile { rows, member })
}
