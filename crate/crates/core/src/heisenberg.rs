//! Fourier transform of `C*(H_n)`: the Schroedinger fibers `pi_lambda(f)` as
//! kernel operators and the character fiber `rho(f)`.
//!
//! `pi_lambda(x, y, t) xi(s) = exp(-2 pi i lambda t) exp(2 pi i lambda y.(s - x/2)) xi(s - x)`,
//! so `pi_lambda(f)` has kernel `f^{2,3}(s - x, -lambda (s + x)/2, lambda)`.

use crate::error::bail;
use crate::fft::transform_axis;
use crate::linop::{self, KernelOperator};
use crate::sampling::{self, contract, SampledFunctionH, Symbol};
use crate::util::unflatten;
use crate::{Error, Result, C64};
use alloc::vec;
use alloc::vec::Vec;

/// Fourier picture of an element of `C*(H_n)` on a finite ladder.
#[derive(Debug, Clone)]
pub struct HeisenbergField {
    lambdas: Vec<f64>,
    fibers: Vec<KernelOperator>,
    zero_fiber: Symbol,
}

impl HeisenbergField {
    pub fn new(lambdas: Vec<f64>, fibers: Vec<KernelOperator>, zero_fiber: Symbol) -> Result<Self> {
        if lambdas.len() != fibers.len() {
            return Err(Error::Dimension);
        }
        if lambdas.iter().any(|&l| l == 0.0 || !l.is_finite()) {
            bail!(Domain, "ladder entries must be finite and nonzero");
        }
        if fibers.iter().any(|k| k.grid() != zero_fiber.grid()) {
            return Err(Error::Dimension);
        }
        Ok(Self { lambdas, fibers, zero_fiber })
    }

    /// `F(f)`: fibers `pi_lambda(f)` and zero fiber `rho(f)`.
    pub fn fourier(f: &SampledFunctionH, ladder: &[f64]) -> Result<Self> {
        let fibers = ladder.iter().map(|&l| pi_lambda(f, l)).collect::<Result<Vec<_>>>()?;
        Self::new(ladder.to_vec(), fibers, rho_symbol(f)?)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn fibers(&self) -> &[KernelOperator] {
        &self.fibers
    }

    pub fn zero_fiber(&self) -> &Symbol {
        &self.zero_fiber
    }
}

/// Kernel of `pi_lambda(f)`.
///
/// The partial spectrum is evaluated exactly at `lambda` and at the needed
/// off-grid `u`; beyond the covered band it is taken as zero, which the decay
/// check on the sampled spectrum justifies.
pub fn pi_lambda(f: &SampledFunctionH, lambda: f64) -> Result<KernelOperator> {
    if lambda == 0.0 || !lambda.is_finite() {
        bail!(Domain, "pi_lambda needs a finite nonzero lambda; use rho_symbol at 0");
    }
    let g = *f.grid();
    // coverage: the sampled spectrum must decay at the band edge
    sampling::partial_fourier_23(f)?;
    let n = g.n();
    let m = g.m();
    let dim = g.dim();
    let h = g.spacing();
    let slice = f.t_slice(lambda);

    // u_p = -lambda (s_i + x_j) / 2 depends on p = i + j only, per component
    let np = 2 * m - 1;
    let p_count = np.pow(n as u32);
    let mut table = vec![C64::new(0.0, 0.0); dim * p_count];
    let mut pidx = vec![0usize; n];
    let mut u = vec![0.0; n];
    for p in 0..p_count {
        unflatten(p, np, n, &mut pidx);
        for c in 0..n {
            u[c] = -lambda * (-2.0 * g.r() + pidx[c] as f64 * h) / 2.0;
        }
        if u.iter().any(|&v| !g.in_band(v)) {
            continue;
        }
        for q in 0..dim {
            table[q * p_count + p] = contract(&slice[q * dim..(q + 1) * dim], &g, &u);
        }
    }

    let mut kernel = vec![C64::new(0.0, 0.0); dim * dim];
    let mut si = vec![0usize; n];
    let mut xj = vec![0usize; n];
    for s in 0..dim {
        unflatten(s, m, n, &mut si);
        'x: for x in 0..dim {
            unflatten(x, m, n, &mut xj);
            let mut q = 0usize;
            let mut p = 0usize;
            for c in 0..n {
                let qc = si[c] as i64 - xj[c] as i64 + (m / 2) as i64;
                if qc < 0 || qc >= m as i64 {
                    continue 'x;
                }
                q = q * m + qc as usize;
                p = p * np + si[c] + xj[c];
            }
            kernel[s * dim + x] = table[q * p_count + p];
        }
    }
    KernelOperator::new(g, kernel)
}

/// The character fiber `rho(f)^(a, b) = f^(a, b, 0)`.
pub fn rho_symbol(f: &SampledFunctionH) -> Result<Symbol> {
    sampling::character_transform(f)
}

/// Both sides of the Hilbert-Schmidt identity and their relative gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsIdentity {
    /// `hs_norm(pi_lambda(f))^2`.
    pub lhs: f64,
    /// `int |f^{2,3}(s, lambda x, lambda)|^2 ds dx`.
    pub rhs: f64,
    pub residual: f64,
}

/// Evaluates both sides of the Hilbert-Schmidt identity. The right side is a
/// frequency-grid quadrature of `|lambda|^{-n} int |f^{2,3}(s, u, lambda)|^2 ds du`
/// built by FFT, independent of the kernel assembly.
pub fn hs_identity(f: &SampledFunctionH, lambda: f64) -> Result<HsIdentity> {
    let k = pi_lambda(f, lambda)?;
    let hs = linop::hs_norm(&k);
    let lhs = hs * hs;
    let g = *f.grid();
    let n = g.n();
    let mut spec = f.t_slice(lambda);
    // axes (s, y) -> (s, u)
    for axis in n..2 * n {
        transform_axis(&mut spec, g.m(), 2 * n, axis, true, g.spacing());
    }
    let cell = libm::pow(g.spacing() * g.freq_spacing(), n as f64);
    let rhs = spec.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell / libm::pow(lambda.abs(), n as f64);
    if rhs < 1e-30 {
        bail!(Degenerate, "right side {rhs:e} vanishes");
    }
    Ok(HsIdentity { lhs, rhs, residual: (lhs - rhs).abs() / rhs })
}

/// `|hs_norm(pi_lambda(f))^2 - int |f^{2,3}(s, lambda x, lambda)|^2| / rhs`.
pub fn hs_identity_residual(f: &SampledFunctionH, lambda: f64) -> Result<f64> {
    Ok(hs_identity(f, lambda)?.residual)
}

/// Adjacent-pair continuity data of `lambda -> pi_lambda(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityProfile {
    /// `(lambda, lambda', op_norm(pi_lambda(f) - pi_lambda'(f)))`.
    pub pairs: Vec<(f64, f64, f64)>,
    /// `op_norm(pi_lambda(f))` at the largest `|lambda|`.
    pub top_norm: f64,
}

pub fn continuity_profile(f: &SampledFunctionH, ladder: &[f64]) -> Result<ContinuityProfile> {
    if ladder.is_empty() {
        bail!(Parameter, "empty ladder");
    }
    let ops = ladder.iter().map(|&l| pi_lambda(f, l)).collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::with_capacity(ladder.len().saturating_sub(1));
    for i in 1..ladder.len() {
        let d = linop::norm(&ops[i - 1].sub(&ops[i])?);
        pairs.push((ladder[i - 1], ladder[i], d));
    }
    let top = (0..ladder.len())
        .max_by(|&a, &b| ladder[a].abs().total_cmp(&ladder[b].abs()))
        .unwrap_or(0);
    Ok(ContinuityProfile { pairs, top_norm: linop::norm(&ops[top]) })
}

/// Default ladder `2^{-j}`, `j = 1..=8`.
pub fn default_ladder() -> Vec<f64> {
    (1..=8).map(|j| libm::pow(2.0, -(j as f64))).collect()
}
