//! Pluggable almost-homomorphisms `tau` from symbols to operator fields, their
//! defect ladders, and the split diagonal construction in a Hermite basis.

use crate::eig::tridiagonal_eigen;
use crate::error::bail;
use crate::linop::{self, KernelOperator};
use crate::nu_field::nu_lambda;
use crate::sampling::{GridSpec, Symbol, Window};
use crate::util::unflatten;
use crate::{is_decreasing, Result, C64};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// A bounded map `h -> (tau_lambda(h))_lambda`, multiplicative, linear and
/// `*`-preserving only in the limit `lambda -> 0`.
pub trait AlmostHomomorphism {
    fn label(&self) -> &str;
    fn evaluate(&self, h: &Symbol, lambda: f64) -> Result<KernelOperator>;
}

/// `tau = nu` with a fixed window.
#[derive(Debug, Clone)]
pub struct NuMap {
    pub window: Window,
}

impl AlmostHomomorphism for NuMap {
    fn label(&self) -> &str {
        "nu"
    }

    fn evaluate(&self, h: &Symbol, lambda: f64) -> Result<KernelOperator> {
        nu_lambda(h, lambda, &self.window)
    }
}

/// The diagonal construction [`delaroche_nu`] with a fixed basis size.
#[derive(Debug, Clone, Copy)]
pub struct Delaroche {
    pub basis_size: usize,
}

impl AlmostHomomorphism for Delaroche {
    fn label(&self) -> &str {
        "delaroche"
    }

    fn evaluate(&self, h: &Symbol, lambda: f64) -> Result<KernelOperator> {
        delaroche_nu(h, lambda, self.basis_size)
    }
}

/// `tau_lambda(h) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroMap;

impl AlmostHomomorphism for ZeroMap {
    fn label(&self) -> &str {
        "zero"
    }

    fn evaluate(&self, h: &Symbol, _lambda: f64) -> Result<KernelOperator> {
        KernelOperator::zeros(*h.grid())
    }
}

/// Orthonormal discrete Hermite functions: eigenvectors of
/// `-D^2 + (2 pi)^2 x^2` on the grid, ascending energy, scaled to unit
/// weighted norm. Entry `j` of vector `p` is at `[p * M + j]`.
fn hermite_basis_1d(g: &GridSpec) -> Vec<f64> {
    let m = g.m();
    let h = g.spacing();
    let diag: Vec<f64> = (0..m).map(|j| 2.0 / (h * h) + (2.0 * PI * g.node(j)) * (2.0 * PI * g.node(j))).collect();
    let off = vec![-1.0 / (h * h); m - 1];
    let eig = tridiagonal_eigen(&diag, &off, true);
    let mut v = eig.vectors.expect("vectors requested");
    let s = 1.0 / libm::sqrt(h);
    for col in v.chunks_mut(m) {
        // fix the sign so the first significant entry is positive
        let lead = col.iter().copied().find(|x| x.abs() > 1e-8).unwrap_or(1.0);
        let sg = if lead < 0.0 { -s } else { s };
        col.iter_mut().for_each(|x| *x *= sg);
    }
    v
}

/// Lattice points of `[-r, r]^{dim}` in spiral order: by `|Z|_inf`, then
/// lexicographically.
pub fn spiral_lattice(r: i64, dim: usize) -> Vec<Vec<i64>> {
    let side = (2 * r + 1) as usize;
    let mut idx = vec![0usize; dim];
    let mut pts: Vec<Vec<i64>> = (0..side.pow(dim as u32))
        .map(|flat| {
            unflatten(flat, side, dim, &mut idx);
            idx.iter().map(|&i| i as i64 - r).collect()
        })
        .collect();
    pts.sort_by_key(|z| z.iter().map(|v| v.abs()).max().unwrap_or(0));
    pts
}

/// Diagonal entries `phi^(|lambda|^{1/2} Z)` in spiral order of `Z`.
pub fn delaroche_entries(phi: &Symbol, lambda: f64, basis_size: usize) -> Result<Vec<(Vec<i64>, C64)>> {
    if lambda == 0.0 || !lambda.is_finite() {
        bail!(Domain, "lambda must be finite and nonzero");
    }
    let g = *phi.grid();
    let n = g.n();
    if basis_size == 0 || basis_size.is_multiple_of(2) {
        bail!(Parameter, "basis size {basis_size} must be odd");
    }
    let count = basis_size.pow(2 * n as u32);
    if count > g.dim() {
        bail!(Parameter, "{count} lattice points exceed the {} grid basis functions", g.dim());
    }
    let r = (basis_size / 2) as i64;
    let sl = libm::sqrt(lambda.abs());
    let entries: Vec<(Vec<i64>, C64)> = spiral_lattice(r, 2 * n)
        .into_iter()
        .map(|z| {
            let a: Vec<f64> = z[..n].iter().map(|&v| sl * v as f64).collect();
            let b: Vec<f64> = z[n..].iter().map(|&v| sl * v as f64).collect();
            let e = phi.eval(&a, &b);
            (z, e)
        })
        .collect();
    let kept = entries.iter().fold(0.0f64, |acc, e| acc.max(e.1.norm()));
    // largest |phi^| on symbol nodes beyond the retained lattice box
    let edge = sl * (r as f64 + 0.5);
    let m = g.m();
    let mut idx = vec![0usize; 2 * n];
    let mut tail = 0.0f64;
    for (flat, v) in phi.values().iter().enumerate() {
        unflatten(flat, m, 2 * n, &mut idx);
        if idx.iter().any(|&i| g.freq(i).abs() > edge) {
            tail = tail.max(v.norm());
        }
    }
    if tail > kept {
        bail!(BasisTooSmall, "tail sup {tail:.3e} exceeds retained sup {kept:.3e}");
    }
    Ok(entries)
}

/// `sum_Z phi^(|lambda|^{1/2} Z) P_Z` in the discrete Hermite basis, with
/// `Z` paired to basis functions in spiral order.
pub fn delaroche_nu(phi: &Symbol, lambda: f64, basis_size: usize) -> Result<KernelOperator> {
    let entries = delaroche_entries(phi, lambda, basis_size)?;
    let g = *phi.grid();
    let n = g.n();
    let m = g.m();
    let dim = g.dim();
    let basis1 = hermite_basis_1d(&g);
    // tensor-product basis ordered by total degree, then lexicographically
    let mut order: Vec<Vec<usize>> = {
        let mut idx = vec![0usize; n];
        (0..dim)
            .map(|flat| {
                unflatten(flat, m, n, &mut idx);
                idx.clone()
            })
            .collect()
    };
    order.sort_by_key(|p| p.iter().sum::<usize>());
    let mut kernel = vec![C64::new(0.0, 0.0); dim * dim];
    let mut psi = vec![0.0; dim];
    let mut xi = vec![0usize; n];
    for ((_, e), p) in entries.iter().zip(&order) {
        if e.norm() == 0.0 {
            continue;
        }
        for (x, v) in psi.iter_mut().enumerate() {
            unflatten(x, m, n, &mut xi);
            *v = (0..n).map(|c| basis1[p[c] * m + xi[c]]).product();
        }
        for s in 0..dim {
            let row = &mut kernel[s * dim..(s + 1) * dim];
            let es = e * psi[s];
            for (k, v) in row.iter_mut().zip(&psi) {
                *k += es * v;
            }
        }
    }
    KernelOperator::new(g, kernel)
}

/// One ladder rung of [`tau_defect_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauRow {
    pub lambda: f64,
    /// `||tau(h - 2g) - tau(h) + 2 tau(g)||`.
    pub linearity: f64,
    /// `||tau(h g) - tau(h) tau(g)||`.
    pub multiplicativity: f64,
    /// `||tau(h*) - tau(h)*||`.
    pub involution: f64,
    /// `| ||tau(h)|| - sup |h^| |`.
    pub topology: f64,
}

/// Defect table with per-column verdicts (decreasing, final below tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct TauProfile {
    pub label: String,
    pub rows: Vec<TauRow>,
    pub linearity_ok: bool,
    pub multiplicativity_ok: bool,
    pub involution_ok: bool,
    pub topology_ok: bool,
}

impl TauProfile {
    pub fn all_ok(&self) -> bool {
        self.linearity_ok && self.multiplicativity_ok && self.involution_ok && self.topology_ok
    }
}

pub fn tau_defect_profile(tau: &dyn AlmostHomomorphism, h: &Symbol, g: &Symbol, ladder: &[f64], tol: f64) -> Result<TauProfile> {
    if ladder.is_empty() {
        bail!(Parameter, "empty ladder");
    }
    let combo = h.add_scaled(C64::new(-2.0, 0.0), g)?;
    let prod = h.product(g)?;
    let hs = h.conj();
    let mut rows = Vec::with_capacity(ladder.len());
    for &l in ladder {
        let th = tau.evaluate(h, l)?;
        let tg = tau.evaluate(g, l)?;
        let lin = tau.evaluate(&combo, l)?.sub(&th.add_scaled(C64::new(-2.0, 0.0), &tg)?)?;
        let mul = tau.evaluate(&prod, l)?.sub(&linop::compose(&th, &tg)?)?;
        let inv = tau.evaluate(&hs, l)?.sub(&th.adjoint())?;
        rows.push(TauRow {
            lambda: l,
            linearity: linop::norm(&lin),
            multiplicativity: linop::norm(&mul),
            involution: linop::norm(&inv),
            topology: (linop::norm(&th) - h.sup_norm()).abs(),
        });
    }
    let verdict = |col: fn(&TauRow) -> f64| {
        let v: Vec<f64> = rows.iter().map(col).collect();
        is_decreasing(&v) && v.last().is_some_and(|&x| x < tol)
    };
    Ok(TauProfile {
        label: tau.label().into(),
        linearity_ok: verdict(|r| r.linearity),
        multiplicativity_ok: verdict(|r| r.multiplicativity),
        involution_ok: verdict(|r| r.involution),
        topology_ok: verdict(|r| r.topology),
        rows,
    })
}
