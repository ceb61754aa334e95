//! Dense kernel operators on `L^2(R^n)` grids.
//!
//! A kernel `K(s, x)` acts by `(K xi)(s) = h^n sum_x K(s, x) xi(x)`, so the
//! matrix seen by linear algebra is `A = h^n K`.

use crate::eig::symmetric_eigen;
use crate::error::bail;
use crate::sampling::GridSpec;
use crate::{Error, Result, C64};
use alloc::vec;
use alloc::vec::Vec;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest supported number of unknowns.
pub const MAX_DIM: usize = 512;

/// Dimension up to which [`norm`] uses the dense eigen route.
pub const DENSE_LIMIT: usize = 512;

/// Default seed of the power-iteration start vector.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// A vector in `L^2(R^n)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorL2 {
    grid: GridSpec,
    values: Vec<C64>,
}

impl VectorL2 {
    pub fn new(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.dim() {
            return Err(Error::Dimension);
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    fn weight(&self) -> f64 {
        libm::pow(self.grid.spacing(), self.grid.n() as f64)
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.grid != other.grid {
            return Err(Error::Dimension);
        }
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.weight())
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.weight())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Dimension);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }
}

/// Kernel of an operator on a grid, row-major `[s][x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelOperator {
    grid: GridSpec,
    kernel: Vec<C64>,
}

impl KernelOperator {
    pub fn new(grid: GridSpec, kernel: Vec<C64>) -> Result<Self> {
        let d = grid.dim();
        if d > MAX_DIM {
            bail!(Parameter, "operator dimension {d} exceeds {MAX_DIM}");
        }
        if kernel.len() != d * d {
            return Err(Error::Dimension);
        }
        Ok(Self { grid, kernel })
    }

    pub fn zeros(grid: GridSpec) -> Result<Self> {
        let d = grid.dim();
        Self::new(grid, vec![C64::new(0.0, 0.0); d * d])
    }

    /// Operator whose matrix `h^n K` is the identity.
    pub fn identity(grid: GridSpec) -> Result<Self> {
        let d = grid.dim();
        let mut k = vec![C64::new(0.0, 0.0); d * d];
        let inv = 1.0 / weight(&grid);
        for i in 0..d {
            k[i * d + i] = C64::new(inv, 0.0);
        }
        Self::new(grid, k)
    }

    /// Projection `P_xi = <., xi> xi`.
    pub fn rank_one(xi: &VectorL2) -> Result<Self> {
        let d = xi.grid.dim();
        let v = &xi.values;
        let mut k = Vec::with_capacity(d * d);
        for a in v {
            for b in v {
                k.push(a * b.conj());
            }
        }
        Self::new(xi.grid, k)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kernel(&self) -> &[C64] {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn entry(&self, s: usize, x: usize) -> C64 {
        self.kernel[s * self.dim() + x]
    }

    pub fn apply(&self, xi: &VectorL2) -> Result<VectorL2> {
        if xi.grid != self.grid {
            return Err(Error::Dimension);
        }
        let w = weight(&self.grid);
        let values = self
            .kernel
            .chunks(self.dim())
            .map(|row| row.iter().zip(&xi.values).map(|(k, v)| k * v).sum::<C64>() * w)
            .collect();
        Ok(VectorL2 { grid: self.grid, values })
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        let mut k = vec![C64::new(0.0, 0.0); d * d];
        for s in 0..d {
            for x in 0..d {
                k[x * d + s] = self.kernel[s * d + x].conj();
            }
        }
        Self { grid: self.grid, kernel: k }
    }

    pub fn add_scaled(&self, c: C64, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Dimension);
        }
        let kernel = self.kernel.iter().zip(&other.kernel).map(|(a, b)| a + c * b).collect();
        Ok(Self { grid: self.grid, kernel })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(C64::new(-1.0, 0.0), other)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { grid: self.grid, kernel: self.kernel.iter().map(|v| v * c).collect() }
    }

    /// Matrix `h^n K` row-major.
    fn matrix(&self) -> Vec<C64> {
        let w = weight(&self.grid);
        self.kernel.iter().map(|v| v * w).collect()
    }
}

fn weight(g: &GridSpec) -> f64 {
    libm::pow(g.spacing(), g.n() as f64)
}

/// Result of an iterative norm computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Operator norm by power iteration on `A* A` from a seeded random start.
pub fn op_norm(k: &KernelOperator, tol: f64) -> NormEstimate {
    op_norm_seeded(k, tol, DEFAULT_SEED)
}

/// [`op_norm`] with an explicit seed.
pub fn op_norm_seeded(k: &KernelOperator, tol: f64, seed: u64) -> NormEstimate {
    const MAX_ITER: usize = 10_000;
    let d = k.dim();
    let a = k.matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    let mut v: Vec<C64> = (0..d).map(|_| C64::new(unit(), unit())).collect();
    normalize(&mut v);
    let mut prev = 0.0f64;
    let mut av = vec![C64::new(0.0, 0.0); d];
    let mut w = vec![C64::new(0.0, 0.0); d];
    for it in 1..=MAX_ITER {
        matvec(&a, &v, &mut av);
        // w = A* (A v)
        w.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        for (row, avs) in a.chunks(d).zip(&av) {
            for (wx, r) in w.iter_mut().zip(row) {
                *wx += r.conj() * avs;
            }
        }
        let rayleigh: f64 = av.iter().map(|x| x.norm_sqr()).sum();
        let nw = normalize(&mut w);
        if nw == 0.0 {
            return NormEstimate { value: 0.0, iterations: it, converged: true };
        }
        core::mem::swap(&mut v, &mut w);
        if it > 1 && (rayleigh - prev).abs() <= tol * rayleigh {
            return NormEstimate { value: libm::sqrt(rayleigh), iterations: it, converged: true };
        }
        prev = rayleigh;
    }
    NormEstimate { value: libm::sqrt(prev), iterations: MAX_ITER, converged: false }
}

fn matvec(a: &[C64], v: &[C64], out: &mut [C64]) {
    let d = v.len();
    for (o, row) in out.iter_mut().zip(a.chunks(d)) {
        *o = row.iter().zip(v).map(|(x, y)| x * y).sum();
    }
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = libm::sqrt(v.iter().map(|x| x.norm_sqr()).sum::<f64>());
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Exact largest singular value of `A = h^n K` through a dense Hermitian
/// eigensolve of `A* A`.
pub fn op_norm_dense(k: &KernelOperator) -> f64 {
    let d = k.dim();
    let a = k.matrix();
    let mut b = vec![C64::new(0.0, 0.0); d * d];
    for row in a.chunks(d) {
        for (i, ri) in row.iter().enumerate() {
            let c = ri.conj();
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let bi = &mut b[i * d..(i + 1) * d];
            for (bij, rj) in bi.iter_mut().zip(row) {
                *bij += c * rj;
            }
        }
    }
    // real embedding [[Re B, -Im B], [Im B, Re B]]
    let n2 = 2 * d;
    let mut e = vec![0.0; n2 * n2];
    for i in 0..d {
        for j in 0..d {
            let z = b[i * d + j];
            e[i * n2 + j] = z.re;
            e[(i + d) * n2 + j + d] = z.re;
            e[i * n2 + j + d] = -z.im;
            e[(i + d) * n2 + j] = z.im;
        }
    }
    let eig = symmetric_eigen(e, n2, false);
    libm::sqrt(eig.values.last().copied().unwrap_or(0.0).max(0.0))
}

/// Operator norm: dense route up to [`DENSE_LIMIT`] unknowns, power
/// iteration beyond.
pub fn norm(k: &KernelOperator) -> f64 {
    if k.dim() <= DENSE_LIMIT {
        op_norm_dense(k)
    } else {
        op_norm(k, 1e-12).value
    }
}

/// Hilbert-Schmidt norm `(h^{2n} sum |K|^2)^{1/2}`.
pub fn hs_norm(k: &KernelOperator) -> f64 {
    let w = weight(&k.grid);
    libm::sqrt(k.kernel.iter().map(|v| v.norm_sqr()).sum::<f64>()) * w
}

/// `A B`, with kernel `h^n sum_y K_A(s, y) K_B(y, x)`.
pub fn compose(a: &KernelOperator, b: &KernelOperator) -> Result<KernelOperator> {
    if a.grid != b.grid {
        return Err(Error::Dimension);
    }
    let d = a.dim();
    let w = weight(&a.grid);
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    for (orow, arow) in out.chunks_mut(d).zip(a.kernel.chunks(d)) {
        for (ay, brow) in arow.iter().zip(b.kernel.chunks(d)) {
            if *ay == C64::new(0.0, 0.0) {
                continue;
            }
            let c = ay * w;
            for (o, bx) in orow.iter_mut().zip(brow) {
                *o += c * bx;
            }
        }
    }
    Ok(KernelOperator { grid: a.grid, kernel: out })
}

/// Which side a multiplication operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `K M`: mask the input variable.
    Right,
    /// `M K`: mask the output variable.
    Left,
}

/// Composition with the indicator of the open cube `(t - s, t + s)^n`.
pub fn truncate(k: &KernelOperator, t: f64, s: f64, side: Side) -> KernelOperator {
    mask(k, side, |x| x.iter().all(|&v| v > t - s && v < t + s))
}

/// Composition with the indicator of an arbitrary set of nodes.
pub fn mask(k: &KernelOperator, side: Side, keep: impl Fn(&[f64]) -> bool) -> KernelOperator {
    let g = k.grid;
    let d = g.dim();
    let n = g.n();
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let flags: Vec<bool> = (0..d)
        .map(|flat| {
            crate::util::unflatten(flat, g.m(), n, &mut idx);
            for i in 0..n {
                x[i] = g.node(idx[i]);
            }
            keep(&x)
        })
        .collect();
    let mut kernel = k.kernel.clone();
    for s in 0..d {
        for xi in 0..d {
            let on = match side {
                Side::Right => flags[xi],
                Side::Left => flags[s],
            };
            if !on {
                kernel[s * d + xi] = C64::new(0.0, 0.0);
            }
        }
    }
    KernelOperator { grid: g, kernel }
}

/// Conjugation `U(r) K U(-r)` by the translation `(U(r) xi)(s) = xi(s + r)`,
/// i.e. kernel `K(s + r, x + r)`, with periodic wrap-around. `r` must be a
/// multiple of the spacing; only `n = 1` is supported.
pub fn translate(k: &KernelOperator, r: f64) -> Result<KernelOperator> {
    let g = k.grid;
    if g.n() != 1 {
        bail!(Parameter, "translations are implemented for n = 1 only");
    }
    let q = r / g.spacing();
    let shift = libm::round(q);
    if (q - shift).abs() > 1e-9 {
        return Err(Error::Alignment(r));
    }
    let m = g.m() as i64;
    let sh = (shift as i64).rem_euclid(m) as usize;
    let d = g.m();
    let mut kernel = vec![C64::new(0.0, 0.0); d * d];
    for s in 0..d {
        let ss = (s + sh) % d;
        for x in 0..d {
            kernel[s * d + x] = k.kernel[ss * d + (x + sh) % d];
        }
    }
    Ok(KernelOperator { grid: g, kernel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> GridSpec {
        GridSpec::new(1, 16, 2.0).unwrap()
    }

    fn sample_op(seed: f64) -> KernelOperator {
        let d = 16;
        let k = (0..d * d)
            .map(|i| C64::new(libm::sin(seed * i as f64), libm::cos(0.3 * seed * i as f64)))
            .collect();
        KernelOperator::new(g(), k).unwrap()
    }

    #[test]
    fn identity_has_unit_norm() {
        let id = KernelOperator::identity(g()).unwrap();
        assert!((op_norm_dense(&id) - 1.0).abs() < 1e-12);
        assert!((op_norm(&id, 1e-12).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_agrees_with_dense() {
        let a = sample_op(0.7);
        let dense = op_norm_dense(&a);
        let est = op_norm(&a, 1e-14);
        assert!(est.converged);
        assert!((est.value - dense).abs() < 1e-6 * dense);
        assert!(hs_norm(&a) >= dense - 1e-12);
    }

    #[test]
    fn compose_matches_apply() {
        let a = sample_op(0.3);
        let b = sample_op(1.1);
        let ab = compose(&a, &b).unwrap();
        let v = VectorL2::new(g(), (0..16).map(|i| C64::new(i as f64, 1.0)).collect()).unwrap();
        let lhs = ab.apply(&v).unwrap();
        let rhs = a.apply(&b.apply(&v).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm() < 1e-10 * rhs.norm());
    }

    #[test]
    fn rank_one_projection() {
        let v = VectorL2::new(g(), (0..16).map(|i| C64::new(1.0, i as f64 * 0.1)).collect()).unwrap();
        let u = v.scale(C64::new(1.0 / v.norm(), 0.0));
        let p = KernelOperator::rank_one(&u).unwrap();
        assert!((op_norm_dense(&p) - 1.0).abs() < 1e-12);
        let pu = p.apply(&u).unwrap();
        assert!(pu.sub(&u).unwrap().norm() < 1e-12);
    }

    #[test]
    fn translate_requires_alignment() {
        let a = sample_op(0.5);
        assert_eq!(translate(&a, 0.1), Err(Error::Alignment(0.1)));
        let t = translate(&translate(&a, 0.75).unwrap(), -0.75).unwrap();
        assert_eq!(t, a);
    }

    #[test]
    fn truncation_is_a_contraction() {
        let a = sample_op(0.9);
        let t = truncate(&a, 0.0, 1.0, Side::Right);
        assert!(op_norm_dense(&t) <= op_norm_dense(&a) + 1e-12);
        assert!(truncate(&a, 0.0, 0.0, Side::Left).kernel().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let a = sample_op(0.5);
        let b = KernelOperator::zeros(GridSpec::new(1, 8, 2.0).unwrap()).unwrap();
        assert_eq!(compose(&a, &b), Err(Error::Dimension));
        assert!(KernelOperator::zeros(GridSpec::new(1, 1024, 2.0).unwrap()).is_err());
    }
}
