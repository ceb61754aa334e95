//! Coadjoint orbits of the thread-like algebra `g_N` (basis `X_N, ..., X_1`,
//! `[X_N, X_j] = X_{j-1}`) and kernels of the generic representations of `G_N`.
//!
//! Coordinates are stored `(xi_N, xi_{N-1}, ..., xi_1)`. The translation by
//! `exp(t X_N)` acts by `(t.xi)_j = sum_{k<j} (-t)^k / k! xi_{j-k}` and leaves
//! `xi_N` alone.

use crate::error::bail;
use crate::fft::transform_axis;
use crate::linop::KernelOperator;
use crate::sampling::{GridSpec, Symbol};
use crate::util::{factorial, max_abs};
use crate::{Error, Result, C64, DECAY_FLOOR};
use alloc::vec;
use alloc::vec::Vec;

/// Layer detection threshold.
pub const TOL_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CoadjointPoint {
    coords: Vec<f64>,
}

impl CoadjointPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            bail!(Parameter, "thread-like algebras need N >= 3, got {}", coords.len());
        }
        if coords.iter().any(|v| !v.is_finite()) {
            bail!(Parameter, "coordinates must be finite");
        }
        Ok(Self { coords })
    }

    pub fn big_n(&self) -> usize {
        self.coords.len()
    }

    /// `(xi_N, ..., xi_1)`.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `xi_j`, `1 <= j <= N`.
    pub fn xi(&self, j: usize) -> f64 {
        self.coords[self.coords.len() - j]
    }

    /// Restriction to `b = span(X_{N-1}, ..., X_1)`, ordered `(xi_{N-1}, ..., xi_1)`.
    pub fn restricted(&self) -> &[f64] {
        &self.coords[1..]
    }
}

/// `xi^`, a polynomial of degree at most `N - 2`, ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPolynomial {
    pub coeffs: Vec<f64>,
}

impl OrbitPolynomial {
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }
}

/// `t.xi` on `b*`, with `xi_N` carried over unchanged.
pub fn coadjoint_translate(xi: &CoadjointPoint, t: f64) -> CoadjointPoint {
    let big = xi.big_n();
    let mut out = vec![0.0; big];
    out[0] = xi.coords[0];
    for j in 1..big {
        let mut acc = 0.0;
        let mut pw = 1.0;
        for k in 0..j {
            acc += pw / factorial(k) * xi.xi(j - k);
            pw *= -t;
        }
        out[big - j] = acc;
    }
    CoadjointPoint { coords: out }
}

/// `xi^(t) = (t.xi)_{N-1}`.
pub fn xi_hat(xi: &CoadjointPoint) -> OrbitPolynomial {
    let big = xi.big_n();
    let coeffs = (0..big - 1)
        .map(|k| {
            let sg = if k % 2 == 0 { 1.0 } else { -1.0 };
            sg / factorial(k) * xi.xi(big - 1 - k)
        })
        .collect();
    OrbitPolynomial { coeffs }
}

/// Inverse of [`xi_hat`]; the `X_N*` slot is set to zero.
pub fn xi_from_hat(p: &OrbitPolynomial, big_n: usize) -> Result<CoadjointPoint> {
    if big_n < 3 {
        bail!(Parameter, "N must be at least 3");
    }
    if p.degree().is_some_and(|d| d > big_n - 2) {
        return Err(Error::Dimension);
    }
    let mut coords = vec![0.0; big_n];
    for (k, &c) in p.coeffs.iter().enumerate() {
        let sg = if k % 2 == 0 { 1.0 } else { -1.0 };
        // xi_{N-1-k} sits at position k + 1
        coords[k + 1] = sg * factorial(k) * c;
    }
    CoadjointPoint::new(coords)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layer {
    /// First nonzero coordinate is `xi_j`, `j <= N - 2`; `t_star` moves the
    /// point to its canonical representative.
    Generic { j: usize, t_star: f64 },
    /// `(a, b) = (xi_N, xi_{N-1})`.
    Character { a: f64, b: f64 },
}

/// Layer of `l` and the representative `l0` of its orbit with
/// `l0_{j+1} = 0` and `l0_N = 0`. Characters are their own representative.
pub fn layer_and_canonical(l: &CoadjointPoint) -> (Layer, CoadjointPoint) {
    let big = l.big_n();
    match (1..=big - 2).find(|&j| l.xi(j).abs() > TOL_ZERO) {
        Some(j) => {
            let t_star = l.xi(j + 1) / l.xi(j);
            let mut l0 = coadjoint_translate(l, t_star);
            l0.coords[0] = 0.0;
            // exact zero in the eliminated slot
            l0.coords[big - j - 1] = 0.0;
            (Layer::Generic { j, t_star }, l0)
        }
        None => (Layer::Character { a: l.xi(big), b: l.xi(big - 1) }, l.clone()),
    }
}

/// A uniform axis `min + i step`, `i < count`. A single-node axis matches only
/// its own coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, step: f64, count: usize) -> Result<Self> {
        if count == 0 || !(min.is_finite() && step.is_finite()) || (count > 1 && step <= 0.0) {
            bail!(Parameter, "bad axis ({min}, {step}, {count})");
        }
        Ok(Self { min, step, count })
    }

    /// Covers `[lo, hi]` with the given step, snapped so `lo` is a node.
    pub fn covering(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let count = libm::ceil((hi - lo) / step - 1e-9) as usize + 1;
        Self::new(lo, step, count)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn max(&self) -> f64 {
        self.node(self.count - 1)
    }

    /// Lower node index and fractional offset, or `None` outside.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let tol = 1e-9 * (1.0 + self.min.abs().max(self.max().abs()));
        if self.count == 1 {
            return ((x - self.min).abs() <= tol).then_some((0, 0.0));
        }
        if x < self.min - tol || x > self.max() + tol {
            return None;
        }
        let q = ((x - self.min) / self.step).clamp(0.0, (self.count - 1) as f64);
        let i = (libm::floor(q) as usize).min(self.count - 2);
        Some((i, q - i as f64))
    }
}

/// `f^2(s, l)` on a box in `R x b*`, zero outside; `b*` axes ordered
/// `(l_{N-1}, ..., l_1)`, values row-major with `s` slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct FHat2 {
    s_axis: Axis,
    ell_axes: Vec<Axis>,
    values: Vec<C64>,
}

impl FHat2 {
    pub fn new(s_axis: Axis, ell_axes: Vec<Axis>, values: Vec<C64>) -> Result<Self> {
        if ell_axes.len() < 2 {
            bail!(Parameter, "need N - 1 >= 2 coadjoint axes");
        }
        let len = ell_axes.iter().fold(s_axis.count, |acc, a| acc * a.count);
        if values.len() != len {
            return Err(Error::Dimension);
        }
        Ok(Self { s_axis, ell_axes, values })
    }

    pub fn from_fn(s_axis: Axis, ell_axes: Vec<Axis>, f: impl Fn(f64, &[f64]) -> C64) -> Result<Self> {
        let counts: Vec<usize> = ell_axes.iter().map(|a| a.count).collect();
        let block: usize = counts.iter().product();
        let mut ell = vec![0.0; counts.len()];
        let mut values = Vec::with_capacity(s_axis.count * block);
        for i in 0..s_axis.count {
            let s = s_axis.node(i);
            for flat in 0..block {
                let mut rem = flat;
                for c in (0..counts.len()).rev() {
                    ell[c] = ell_axes[c].node(rem % counts[c]);
                    rem /= counts[c];
                }
                values.push(f(s, &ell));
            }
        }
        Self::new(s_axis, ell_axes, values)
    }

    pub fn zeros(s_axis: Axis, ell_axes: Vec<Axis>) -> Result<Self> {
        Self::from_fn(s_axis, ell_axes, |_, _| C64::new(0.0, 0.0))
    }

    pub fn big_n(&self) -> usize {
        self.ell_axes.len() + 1
    }

    pub fn s_axis(&self) -> &Axis {
        &self.s_axis
    }

    pub fn ell_axes(&self) -> &[Axis] {
        &self.ell_axes
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Multilinear interpolation; zero outside the box.
    pub fn eval(&self, s: f64, ell: &[f64]) -> C64 {
        let rank = self.ell_axes.len() + 1;
        let mut base = Vec::with_capacity(rank);
        let mut frac = Vec::with_capacity(rank);
        let mut strides = vec![1usize; rank];
        for (axis, x) in core::iter::once((&self.s_axis, s)).chain(self.ell_axes.iter().zip(ell.iter().copied())) {
            match axis.locate(x) {
                Some((i, f)) => {
                    base.push(i);
                    frac.push(if axis.count == 1 { 0.0 } else { f });
                }
                None => return C64::new(0.0, 0.0),
            }
        }
        for c in (0..rank - 1).rev() {
            strides[c] = strides[c + 1] * self.axis(c + 1).count;
        }
        let mut acc = C64::new(0.0, 0.0);
        for corner in 0..1usize << rank {
            let mut w = 1.0;
            let mut flat = 0usize;
            for c in 0..rank {
                let up = (corner >> c) & 1 == 1;
                if up && frac[c] == 0.0 {
                    w = 0.0;
                    break;
                }
                w *= if up { frac[c] } else { 1.0 - frac[c] };
                flat += (base[c] + up as usize) * strides[c];
            }
            if w != 0.0 {
                acc += self.values[flat] * w;
            }
        }
        acc
    }

    fn axis(&self, c: usize) -> &Axis {
        if c == 0 {
            &self.s_axis
        } else {
            &self.ell_axes[c - 1]
        }
    }
}

/// Kernel `f^2(s - t, (t.l)|_b)` of `pi_l(f)` on a one-dimensional grid.
pub fn pi_ell(fh: &FHat2, l: &CoadjointPoint, grid: &GridSpec) -> Result<KernelOperator> {
    if grid.n() != 1 {
        bail!(Parameter, "thread-like kernels live on one-dimensional grids");
    }
    if fh.big_n() != l.big_n() {
        return Err(Error::Dimension);
    }
    if let (Layer::Character { .. }, _) = layer_and_canonical(l) {
        bail!(Domain, "pi_ell needs a generic point");
    }
    let m = grid.m();
    let mut kernel = vec![C64::new(0.0, 0.0); m * m];
    for j in 0..m {
        let t = grid.node(j);
        let tl = coadjoint_translate(l, t);
        for i in 0..m {
            kernel[i * m + j] = fh.eval(grid.node(i) - t, tl.restricted());
        }
    }
    let peak = max_abs(&kernel);
    let edge = (0..m)
        .map(|i| kernel[i].norm().max(kernel[i * m].norm()))
        .fold(0.0f64, f64::max);
    if peak > 0.0 && edge > DECAY_FLOOR * peak {
        bail!(GridTooSmall, "kernel reaches the grid edge: {edge:.3e} vs peak {peak:.3e}");
    }
    KernelOperator::new(*grid, kernel)
}

/// `rho(f)^(a, b) = int f^2(s, (b, 0, ..., 0)) exp(-2 pi i a s) ds`.
pub fn rho_symbol_n(fh: &FHat2, grid: &GridSpec) -> Result<Symbol> {
    if grid.n() != 1 {
        bail!(Parameter, "thread-like symbols live on one-dimensional grids");
    }
    let m = grid.m();
    let mut ell = vec![0.0; fh.ell_axes.len()];
    let mut data = vec![C64::new(0.0, 0.0); m * m];
    for j in 0..m {
        for k in 0..m {
            ell[0] = grid.freq(k);
            data[j * m + k] = fh.eval(grid.node(j), &ell);
        }
    }
    transform_axis(&mut data, m, 2, 0, true, grid.spacing());
    Symbol::new(*grid, data)
}
