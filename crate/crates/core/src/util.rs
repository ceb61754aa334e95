use crate::C64;
use alloc::vec::Vec;

#[inline]
pub(crate) fn cis(theta: f64) -> C64 {
    C64::new(libm::cos(theta), libm::sin(theta))
}

#[inline]
pub(crate) fn sqr(x: f64) -> f64 {
    x * x
}

/// Row-major multi-index of `flat` in a cube of side `m` and rank `rank`.
pub(crate) fn unflatten(mut flat: usize, m: usize, rank: usize, out: &mut [usize]) {
    for a in (0..rank).rev() {
        out[a] = flat % m;
        flat /= m;
    }
}

pub(crate) fn flatten(idx: &[usize], m: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * m + i)
}

pub(crate) fn max_abs(values: &[C64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

/// Largest modulus over entries with some coordinate on the cube boundary.
pub(crate) fn shell_max(values: &[C64], m: usize, rank: usize) -> f64 {
    let mut idx = alloc::vec![0usize; rank];
    let mut best = 0.0f64;
    for (flat, v) in values.iter().enumerate() {
        unflatten(flat, m, rank, &mut idx);
        if idx.iter().any(|&i| i == 0 || i == m - 1) {
            best = best.max(v.norm());
        }
    }
    best
}

/// Evaluates `sum_j c_j w^j` by Horner's rule.
#[inline]
pub(crate) fn horner(coeffs: &[C64], w: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * w + c;
    }
    acc
}

pub(crate) fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return alloc::vec![a];
    }
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}
