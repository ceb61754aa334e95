//! Uniform grids, sampled test functions on `H_n`, their partial Fourier
//! transforms, symbols on the character fiber, and normalized windows.
//!
//! Conventions:
//! * grid nodes `x_j = -R + j h`, `h = 2R/M`, `j = 0..M`;
//! * centered frequencies `u_k = (k - M/2)/(2R)`, so the covered band is
//!   `[-M/(4R), M/(4R))`;
//! * the group law is `(x,y,t)(x',y',t') = (x+x', y+y', t+t' + (x.y' - y.x')/2)`;
//! * arrays are row-major over axes of length `M`.
//!
//! Off-grid evaluation of spectra and symbols uses exact trigonometric sums of
//! the spatial samples; anything past the covered band is zero, which the
//! decay invariants make consistent.

use crate::error::bail;
use crate::fft::transform_axis;
use crate::util::{cis, flatten, horner, max_abs, shell_max, sqr, unflatten};
use crate::{Error, Result, C64, DECAY_FLOOR};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Uniform cube grid `[-R, R)^n` with `M` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    m: usize,
    r: f64,
}

impl GridSpec {
    pub fn new(n: usize, m: usize, r: f64) -> Result<Self> {
        if n == 0 || n > 2 {
            bail!(Parameter, "dimension n = {n} outside 1..=2");
        }
        if m < 8 || !m.is_power_of_two() {
            bail!(Parameter, "M = {m} must be a power of two and at least 8");
        }
        if !(r.is_finite() && r > 0.0) {
            bail!(Parameter, "half-width R = {r} must be positive");
        }
        Ok(Self { n, m, r })
    }

    /// The default laptop grid: `n = 1`, `M = 128`, `R = 8`.
    pub fn desk() -> Self {
        Self { n: 1, m: 128, r: 8.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Number of unknowns of a vector in `L^2(R^n)`.
    pub fn dim(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.r / self.m as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.r + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.node(j)).collect()
    }

    pub fn freq_spacing(&self) -> f64 {
        1.0 / (2.0 * self.r)
    }

    pub fn freq(&self, k: usize) -> f64 {
        (k as f64 - (self.m / 2) as f64) * self.freq_spacing()
    }

    pub fn freq_max(&self) -> f64 {
        self.m as f64 / (4.0 * self.r)
    }

    /// Index of the node equal to `x` (within `1e-9 h`), if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let q = (x + self.r) / self.spacing();
        let j = libm::round(q);
        if (q - j).abs() < 1e-9 && j >= 0.0 && (j as usize) < self.m {
            Some(j as usize)
        } else {
            None
        }
    }

    pub(crate) fn in_band(&self, u: f64) -> bool {
        u.abs() <= self.freq_max()
    }
}

/// Analytic test-function families on `H_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    /// `exp(-pi |g - c|^2 / w^2)`; params `[w]` or `[c_1 .. c_{2n+1}, w]`.
    Gaussian,
    /// `H_d(sqrt(2 pi) x_1 / w) exp(-pi |g|^2 / w^2) exp(2 pi i (a x_1 + b y_1 + c t))`;
    /// params `[w, d]` or `[w, d, a, b, c]` with `d` a non-negative integer.
    HermiteModulated,
    /// `exp(1 - 1/(1 - |g - c|^2 / r^2))` inside the ball; params `[r]` or `[c_1 .. c_{2n+1}, r]`.
    CompactBump,
}

/// A test function with closed-form values, used both for sampling and as an
/// analytic reference.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    n: usize,
    kind: TestKind,
    params: Vec<f64>,
}

impl TestFunction {
    pub fn new(kind: TestKind, params: &[f64], n: usize) -> Result<Self> {
        if params.iter().any(|p| !p.is_finite()) {
            bail!(Parameter, "non-finite test-function parameter");
        }
        let full = 2 * n + 2;
        match kind {
            TestKind::Gaussian | TestKind::CompactBump => {
                if params.len() != 1 && params.len() != full {
                    bail!(Parameter, "expected 1 or {full} parameters, got {}", params.len());
                }
                if params[params.len() - 1] <= 0.0 {
                    bail!(Parameter, "width must be positive");
                }
            }
            TestKind::HermiteModulated => {
                if params.len() != 2 && params.len() != 5 {
                    bail!(Parameter, "expected 2 or 5 parameters, got {}", params.len());
                }
                if params[0] <= 0.0 {
                    bail!(Parameter, "width must be positive");
                }
                if params[1] < 0.0 || libm::trunc(params[1]) != params[1] || params[1] > 20.0 {
                    bail!(Parameter, "Hermite degree must be an integer in 0..=20");
                }
            }
        }
        Ok(Self { n, kind, params: params.to_vec() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn center_and_width(&self) -> (Option<&[f64]>, f64) {
        let p = &self.params;
        if p.len() == 1 {
            (None, p[0])
        } else {
            (Some(&p[..p.len() - 1]), p[p.len() - 1])
        }
    }

    /// Value at the group element `(x, y, t)`.
    pub fn eval(&self, x: &[f64], y: &[f64], t: f64) -> C64 {
        let n = self.n;
        let coord = |i: usize| -> f64 {
            if i < n {
                x[i]
            } else if i < 2 * n {
                y[i - n]
            } else {
                t
            }
        };
        match self.kind {
            TestKind::Gaussian | TestKind::CompactBump => {
                let (c, w) = self.center_and_width();
                let d2: f64 = (0..2 * n + 1)
                    .map(|i| sqr(coord(i) - c.map_or(0.0, |c| c[i])))
                    .sum::<f64>()
                    / (w * w);
                if self.kind == TestKind::Gaussian {
                    C64::new(libm::exp(-PI * d2), 0.0)
                } else if d2 < 1.0 {
                    C64::new(libm::exp(1.0 - 1.0 / (1.0 - d2)), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            TestKind::HermiteModulated => {
                let w = self.params[0];
                let d = self.params[1] as usize;
                let (a, b, c) = if self.params.len() == 5 {
                    (self.params[2], self.params[3], self.params[4])
                } else {
                    (0.0, 0.0, 0.0)
                };
                let d2: f64 = (0..2 * n + 1).map(|i| sqr(coord(i))).sum::<f64>() / (w * w);
                let herm = hermite(d, libm::sqrt(2.0 * PI) * x[0] / w);
                cis(2.0 * PI * (a * x[0] + b * y[0] + c * t)) * (herm * libm::exp(-PI * d2))
            }
        }
    }

    /// Samples on `grid`, enforcing the decay invariant.
    pub fn sample(&self, grid: &GridSpec) -> Result<SampledFunctionH> {
        if grid.n() != self.n {
            return Err(Error::Dimension);
        }
        let n = self.n;
        let m = grid.m();
        let rank = 2 * n + 1;
        let total = m.pow(rank as u32);
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; rank];
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        for flat in 0..total {
            unflatten(flat, m, rank, &mut idx);
            for i in 0..n {
                x[i] = grid.node(idx[i]);
                y[i] = grid.node(idx[n + i]);
            }
            values.push(self.eval(&x, &y, grid.node(idx[2 * n])));
        }
        SampledFunctionH::new(*grid, values)
    }
}

/// Physicists' Hermite polynomial `H_d(z)`.
fn hermite(d: usize, z: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * z);
    if d == 0 {
        return h0;
    }
    for k in 1..d {
        let h2 = 2.0 * z * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Shorthand for `TestFunction::new(kind, params, grid.n())?.sample(grid)`.
pub fn make_test_function(kind: TestKind, params: &[f64], grid: &GridSpec) -> Result<SampledFunctionH> {
    TestFunction::new(kind, params, grid.n())?.sample(grid)
}

fn check_decay(values: &[C64], m: usize, rank: usize, what: &str) -> Result<()> {
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        bail!(Parameter, "{what} has non-finite samples");
    }
    let peak = max_abs(values);
    let edge = shell_max(values, m, rank);
    if edge > DECAY_FLOOR * peak {
        bail!(
            GridTooSmall,
            "{what} does not decay: boundary {edge:.3e} vs peak {peak:.3e}"
        );
    }
    Ok(())
}

/// Samples of a function on `H_n` over the grid cube, axes `(x, y, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunctionH {
    grid: GridSpec,
    values: Vec<C64>,
}

impl SampledFunctionH {
    pub fn new(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        let rank = 2 * grid.n() + 1;
        if values.len() != grid.m().pow(rank as u32) {
            return Err(Error::Dimension);
        }
        check_decay(&values, grid.m(), rank, "test function")?;
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `f*(g) = conj(f(g^{-1}))`. The node `-x_0 = R` is outside the grid and
    /// contributes zero.
    pub fn involution(&self) -> Self {
        let m = self.grid.m();
        let rank = 2 * self.grid.n() + 1;
        let mut idx = vec![0usize; rank];
        let mut out = vec![C64::new(0.0, 0.0); self.values.len()];
        for (flat, o) in out.iter_mut().enumerate() {
            unflatten(flat, m, rank, &mut idx);
            if idx.contains(&0) {
                continue;
            }
            for i in idx.iter_mut() {
                *i = m - *i;
            }
            *o = self.values[flatten(&idx, m)].conj();
        }
        Self { grid: self.grid, values: out }
    }

    /// `f + c g` on the same grid.
    pub fn add_scaled(&self, c: C64, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Dimension);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// `g_q(y) = h sum_t f(x_q, y, t) exp(-2 pi i lambda t)` for every node
    /// `(x_q, y)`, laid out as `[q][y]`. Zero when `|lambda|` is past the band.
    pub(crate) fn t_slice(&self, lambda: f64) -> Vec<C64> {
        let g = &self.grid;
        let m = g.m();
        let h = g.spacing();
        let outer = self.values.len() / m;
        if !g.in_band(lambda) {
            return vec![C64::new(0.0, 0.0); outer];
        }
        let w = cis(-2.0 * PI * lambda * h);
        let phase = cis(2.0 * PI * lambda * g.r()) * h;
        self.values.chunks(m).map(|line| horner(line, w) * phase).collect()
    }
}

/// `f^{2,3}(s, u, lambda)`: Fourier transform of a sampled function in `(y, t)`,
/// on the centered frequency grid. Axes `(s, u, lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSpectrum23 {
    grid: GridSpec,
    values: Vec<C64>,
}

impl PartialSpectrum23 {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

/// FFT of `f` in the `(y, t)` variables.
pub fn partial_fourier_23(f: &SampledFunctionH) -> Result<PartialSpectrum23> {
    let g = *f.grid();
    let n = g.n();
    let rank = 2 * n + 1;
    let mut values = f.values.clone();
    for axis in n..rank {
        transform_axis(&mut values, g.m(), rank, axis, true, g.spacing());
    }
    check_decay(&values, g.m(), rank, "partial spectrum")?;
    Ok(PartialSpectrum23 { grid: g, values })
}

/// A function `h^(a, b)` on the character fiber, sampled on the centered
/// frequency grid with axes `(a, b)`. Keeps the spatial representation
/// `h(x, y)` with `h^(a, b) = int h(x, y) exp(-2 pi i (x.a + y.b)) dx dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    grid: GridSpec,
    values: Vec<C64>,
    spatial: Vec<C64>,
    sup: f64,
}

impl Symbol {
    /// Wraps frequency samples, enforcing the decay invariant.
    pub fn new(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        let rank = 2 * grid.n();
        if values.len() != grid.m().pow(rank as u32) {
            return Err(Error::Dimension);
        }
        check_decay(&values, grid.m(), rank, "symbol")?;
        let mut spatial = values.clone();
        for axis in 0..rank {
            transform_axis(&mut spatial, grid.m(), rank, axis, false, grid.freq_spacing());
        }
        let sup = max_abs(&values);
        Ok(Self { grid, values, spatial, sup })
    }

    /// Samples `phi(a, b)` on the frequency grid.
    pub fn from_fn(grid: GridSpec, phi: impl Fn(&[f64], &[f64]) -> C64) -> Result<Self> {
        let n = grid.n();
        let m = grid.m();
        let rank = 2 * n;
        let mut idx = vec![0usize; rank];
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let values = (0..m.pow(rank as u32))
            .map(|flat| {
                unflatten(flat, m, rank, &mut idx);
                for i in 0..n {
                    a[i] = grid.freq(idx[i]);
                    b[i] = grid.freq(idx[n + i]);
                }
                phi(&a, &b)
            })
            .collect();
        Self::new(grid, values)
    }

    /// `exp(-pi (|a|^2 + |b|^2 / sb^2))`, a narrow-in-`b` Gaussian when `sb < 1`.
    pub fn gaussian(grid: GridSpec, sb: f64) -> Result<Self> {
        Self::from_fn(grid, |a, b| {
            let e = a.iter().map(|v| v * v).sum::<f64>() + b.iter().map(|v| v * v).sum::<f64>() / (sb * sb);
            C64::new(libm::exp(-PI * e), 0.0)
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Spatial samples `h(x, y)`, axes `(x, y)`.
    pub fn spatial(&self) -> &[C64] {
        &self.spatial
    }

    /// `max |h^|` over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.sup
    }

    /// `h^*`, the pointwise conjugate.
    pub fn conj(&self) -> Self {
        let values = self.values.iter().map(|v| v.conj()).collect();
        Self::new(self.grid, values).expect("conjugation preserves decay")
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    /// `self + c other`.
    pub fn add_scaled(&self, c: C64, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + c * b)
    }

    fn zip(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Dimension);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect();
        Self::new(self.grid, values)
    }

    /// `h^(a, b)` at an arbitrary point; zero past the covered band.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> C64 {
        let g = &self.grid;
        if a.iter().chain(b).any(|&v| !g.in_band(v)) {
            return C64::new(0.0, 0.0);
        }
        let point: Vec<f64> = a.iter().chain(b).copied().collect();
        contract(&self.spatial, g, &point)
    }

    /// `h^2(x_q, beta) = int h^(a, beta) exp(2 pi i a.x_q) da` at the spatial
    /// node with flat index `q`; zero past the band.
    pub fn hat2(&self, q: usize, beta: &[f64]) -> C64 {
        let g = &self.grid;
        if beta.iter().any(|&v| !g.in_band(v)) {
            return C64::new(0.0, 0.0);
        }
        let block = g.dim();
        contract(&self.spatial[q * block..(q + 1) * block], g, beta)
    }
}

/// `h^k sum f(z) exp(-2 pi i z.p)` over the trailing `p.len()` axes of `data`.
pub(crate) fn contract(data: &[C64], g: &GridSpec, p: &[f64]) -> C64 {
    let m = g.m();
    let h = g.spacing();
    let mut cur: Vec<C64> = data.to_vec();
    for &u in p.iter().rev() {
        let w = cis(-2.0 * PI * u * h);
        let phase = cis(2.0 * PI * u * g.r()) * h;
        cur = cur.chunks(m).map(|line| horner(line, w) * phase).collect();
    }
    cur[0]
}

/// `h^(a, b) = int f(x, y, t) exp(-2 pi i (x.a + y.b)) dx dy dt`.
pub fn character_transform(f: &SampledFunctionH) -> Result<Symbol> {
    let g = *f.grid();
    let m = g.m();
    let rank = 2 * g.n();
    let h = g.spacing();
    let mut values: Vec<C64> = f.values.chunks(m).map(|line| line.iter().sum::<C64>() * h).collect();
    for axis in 0..rank {
        transform_axis(&mut values, m, rank, axis, true, h);
    }
    Symbol::new(g, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Gaussian { width: f64, scale: f64 },
    Bump { radius: f64, scale: f64 },
    Sampled,
}

/// A window `eta` with unit grid norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    grid: GridSpec,
    values: Vec<C64>,
    coeffs: Vec<C64>,
    shape: Shape,
}

/// Allowed deviation of a window's grid norm from one.
pub const WINDOW_NORM_TOL: f64 = 1e-10;

impl Window {
    /// `2^{n/4} exp(-pi |z|^2)`.
    pub fn gaussian(grid: GridSpec) -> Result<Self> {
        Self::gaussian_scaled(grid, 1.0)
    }

    /// `(2 / w^2)^{n/4} exp(-pi |z|^2 / w^2)`.
    pub fn gaussian_scaled(grid: GridSpec, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            bail!(Parameter, "window width must be positive");
        }
        let scale = libm::pow(2.0 / (width * width), grid.n() as f64 / 4.0);
        Self::build(grid, Shape::Gaussian { width, scale }, true)
    }

    /// Product of `exp(-1/(1 - (z_i/r)^2))` bumps, normalized on the grid.
    pub fn bump(grid: GridSpec, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < grid.r()) {
            bail!(Parameter, "bump radius must lie in (0, R)");
        }
        let raw = Self::build(grid, Shape::Bump { radius, scale: 1.0 }, false)?;
        let scale = 1.0 / raw.norm();
        Self::build(grid, Shape::Bump { radius, scale }, true)
    }

    /// Arbitrary samples with unit grid norm.
    pub fn from_samples(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.dim() {
            return Err(Error::Dimension);
        }
        let mut w = Self { grid, values, coeffs: Vec::new(), shape: Shape::Sampled };
        w.check_norm()?;
        w.coeffs = w.values.clone();
        for axis in 0..grid.n() {
            transform_axis(&mut w.coeffs, grid.m(), grid.n(), axis, true, grid.spacing());
        }
        Ok(w)
    }

    fn build(grid: GridSpec, shape: Shape, check: bool) -> Result<Self> {
        let n = grid.n();
        let m = grid.m();
        let mut idx = vec![0usize; n];
        let mut z = vec![0.0; n];
        let mut w = Self { grid, values: Vec::new(), coeffs: Vec::new(), shape };
        w.values = (0..grid.dim())
            .map(|flat| {
                unflatten(flat, m, n, &mut idx);
                for i in 0..n {
                    z[i] = grid.node(idx[i]);
                }
                w.eval(&z)
            })
            .collect();
        if check {
            w.check_norm()?;
        }
        Ok(w)
    }

    fn check_norm(&self) -> Result<()> {
        let nrm = self.norm();
        if (nrm - 1.0).abs() > WINDOW_NORM_TOL {
            bail!(Parameter, "window grid norm {nrm} is not 1");
        }
        Ok(())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Weighted `L^2` norm of the samples.
    pub fn norm(&self) -> f64 {
        let w = libm::pow(self.grid.spacing(), self.grid.n() as f64);
        libm::sqrt(self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w)
    }

    /// Radius outside which the samples are negligible.
    pub fn effective_radius(&self) -> f64 {
        match self.shape {
            Shape::Bump { radius, .. } => radius,
            Shape::Gaussian { width, .. } => 3.6 * width,
            Shape::Sampled => {
                let g = &self.grid;
                let peak = max_abs(&self.values);
                let mut idx = vec![0usize; g.n()];
                let mut rad = 0.0f64;
                for (flat, v) in self.values.iter().enumerate() {
                    if v.norm() > 1e-16 * peak {
                        unflatten(flat, g.m(), g.n(), &mut idx);
                        for &i in &idx {
                            rad = rad.max(g.node(i).abs());
                        }
                    }
                }
                rad + g.spacing()
            }
        }
    }

    /// Spatial scale below which the window has no structure.
    pub fn resolution(&self) -> f64 {
        match self.shape {
            Shape::Gaussian { width, .. } => width / 4.0,
            Shape::Bump { radius, .. } => radius / 16.0,
            Shape::Sampled => self.grid.spacing(),
        }
    }

    /// `eta(z)`; zero outside the grid cube for sampled windows.
    pub fn eval(&self, z: &[f64]) -> C64 {
        match self.shape {
            Shape::Gaussian { width, scale } => {
                let e: f64 = z.iter().map(|v| v * v).sum::<f64>() / (width * width);
                C64::new(scale * libm::exp(-PI * e), 0.0)
            }
            Shape::Bump { radius, scale } => {
                let mut acc = scale;
                for &v in z {
                    let q = sqr(v / radius);
                    if q >= 1.0 {
                        return C64::new(0.0, 0.0);
                    }
                    acc *= libm::exp(-1.0 / (1.0 - q));
                }
                C64::new(acc, 0.0)
            }
            Shape::Sampled => {
                let g = &self.grid;
                if z.iter().any(|&v| v < -g.r() || v >= g.r()) {
                    return C64::new(0.0, 0.0);
                }
                // inverse transform at z: sum_k c_k exp(2 pi i z.u_k) / (2R)
                let m = g.m();
                let df = g.freq_spacing();
                let mut cur = self.coeffs.clone();
                for &v in z.iter().rev() {
                    let w = cis(2.0 * PI * v * df);
                    let phase = cis(-2.0 * PI * v * g.freq_max()) * df;
                    cur = cur.chunks(m).map(|line| horner(line, w) * phase).collect();
                }
                cur[0]
            }
        }
    }
}

/// Heisenberg group product.
pub fn group_mul(a: (&[f64], &[f64], f64), b: (&[f64], &[f64], f64)) -> (Vec<f64>, Vec<f64>, f64) {
    let x: Vec<f64> = a.0.iter().zip(b.0).map(|(p, q)| p + q).collect();
    let y: Vec<f64> = a.1.iter().zip(b.1).map(|(p, q)| p + q).collect();
    let sym: f64 = a.0.iter().zip(b.1).map(|(p, q)| p * q).sum::<f64>()
        - a.1.iter().zip(b.0).map(|(p, q)| p * q).sum::<f64>();
    (x, y, a.2 + b.2 + 0.5 * sym)
}

/// Heisenberg group inverse.
pub fn group_inverse(g: (&[f64], &[f64], f64)) -> (Vec<f64>, Vec<f64>, f64) {
    (g.0.iter().map(|v| -v).collect(), g.1.iter().map(|v| -v).collect(), -g.2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(1, 32, 3.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1, 4, 8.0).is_err());
        assert!(GridSpec::new(1, 24, 8.0).is_err());
        assert!(GridSpec::new(1, 8, 0.0).is_err());
        let g = GridSpec::desk();
        assert_eq!(g.freq_max(), 4.0);
        assert_eq!(g.node_index(0.0), Some(64));
        assert_eq!(g.node_index(0.01), None);
    }

    #[test]
    fn gaussian_spectrum_is_analytic() {
        let g = grid();
        let f = make_test_function(TestKind::Gaussian, &[1.0], &g).unwrap();
        let spec = partial_fourier_23(&f).unwrap();
        let m = g.m();
        for (flat, v) in spec.values().iter().enumerate() {
            let (s, u, l) = (flat / (m * m), (flat / m) % m, flat % m);
            let want = libm::exp(-PI * (sqr(g.node(s)) + sqr(g.freq(u)) + sqr(g.freq(l))));
            assert!((v - want).norm() < 1e-9);
        }
    }

    #[test]
    fn narrow_function_needs_finer_grid() {
        let g = GridSpec::new(1, 8, 4.0).unwrap();
        let f = make_test_function(TestKind::Gaussian, &[0.3], &g).unwrap();
        assert!(matches!(partial_fourier_23(&f), Err(Error::GridTooSmall(_))));
        let wide = make_test_function(TestKind::Gaussian, &[6.0], &g);
        assert!(matches!(wide, Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn character_transform_of_gaussian() {
        let g = grid();
        let f = make_test_function(TestKind::Gaussian, &[1.0], &g).unwrap();
        let s = character_transform(&f).unwrap();
        assert!((s.sup_norm() - 1.0).abs() < 1e-12);
        let v = s.eval(&[0.37], &[-0.81]);
        assert!((v - libm::exp(-PI * (sqr(0.37) + sqr(0.81)))).norm() < 1e-12);
        assert_eq!(s.eval(&[5.0], &[0.0]), C64::new(0.0, 0.0));
        // h^2(x, beta) of a Gaussian is itself Gaussian in both slots
        let q = g.node_index(0.75).unwrap();
        let v2 = s.hat2(q, &[0.3]);
        assert!((v2 - libm::exp(-PI * (0.5625 + 0.09))).norm() < 1e-9);
    }

    #[test]
    fn windows_are_normalized() {
        let g = GridSpec::desk();
        let w = Window::gaussian(g).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-12);
        let b = Window::bump(g, 1.0).unwrap();
        assert!((b.norm() - 1.0).abs() < 1e-12);
        assert_eq!(b.eval(&[1.5]), C64::new(0.0, 0.0));
        let s = Window::from_samples(g, w.values().to_vec()).unwrap();
        assert!((s.eval(&[0.123]) - w.eval(&[0.123])).norm() < 1e-12);
        let bad: Vec<C64> = w.values().iter().map(|v| v * 1.1).collect();
        assert!(Window::from_samples(g, bad).is_err());
    }

    #[test]
    fn involution_is_an_involution_away_from_the_edge() {
        let g = grid();
        let f = make_test_function(TestKind::HermiteModulated, &[1.0, 2.0, 0.3, -0.2, 0.1], &g).unwrap();
        let ff = f.involution().involution();
        for (a, b) in ff.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn group_law_is_associative_with_inverse() {
        let a = (&[0.3][..], &[-1.2][..], 0.7);
        let b = (&[1.1][..], &[0.4][..], -0.3);
        let ab = group_mul(a, b);
        let inv = group_inverse((&ab.0, &ab.1, ab.2));
        let e = group_mul((&ab.0, &ab.1, ab.2), (&inv.0, &inv.1, inv.2));
        assert!(e.0[0].abs() + e.1[0].abs() + e.2.abs() < 1e-15);
    }
}
