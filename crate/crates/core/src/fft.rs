//! In-place radix-2 FFT and its centered-grid wrappers.
//!
//! Grids sample `x_j = -R + j h`. With centered frequencies
//! `u_k = (k - M/2) / (2R)` the continuous transform
//! `h * sum_j f(x_j) exp(-2 pi i x_j u_k)` equals `h (-1)^k F[(k + M/2) mod M]`
//! where `F` is the plain DFT, because `M/2` is even for `M >= 8`.

use crate::util::cis;
use crate::C64;
use core::f64::consts::PI;

/// Plain DFT (`sign = -1`) or unnormalized inverse (`sign = +1`).
pub(crate) fn fft_in_place(buf: &mut [C64], sign: f64) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for k in 0..half {
            let w = cis(sign * 2.0 * PI * k as f64 / len as f64);
            let mut start = 0;
            while start < n {
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
                start += len;
            }
        }
        len <<= 1;
    }
}

/// Continuous-transform surrogate on one line: spatial samples in, centered
/// frequency samples out (forward), or the reverse (inverse). `weight` is the
/// quadrature weight of the summed variable (`h` forward, `1/(2R)` inverse).
pub(crate) fn centered_transform(line: &mut [C64], forward: bool, weight: f64) {
    let m = line.len();
    if forward {
        fft_in_place(line, -1.0);
        // out[k] = (-1)^k F[(k + M/2) mod M]
        line.rotate_left(m / 2);
        for (k, v) in line.iter_mut().enumerate() {
            let s = if k % 2 == 0 { weight } else { -weight };
            *v *= s;
        }
    } else {
        for (k, v) in line.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
        line.rotate_right(m / 2);
        fft_in_place(line, 1.0);
        for v in line.iter_mut() {
            *v *= weight;
        }
    }
}

/// Applies [`centered_transform`] along `axis` of a row-major array whose
/// axes all have length `m`.
pub(crate) fn transform_axis(
    data: &mut [C64],
    m: usize,
    rank: usize,
    axis: usize,
    forward: bool,
    weight: f64,
) {
    let stride = m.pow((rank - 1 - axis) as u32);
    let outer = data.len() / (stride * m);
    let mut line = alloc::vec![C64::new(0.0, 0.0); m];
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * stride * m + inner;
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + j * stride];
            }
            centered_transform(&mut line, forward, weight);
            for (j, v) in line.iter().enumerate() {
                data[base + j * stride] = *v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn naive(x: &[C64], sign: f64) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| x[j] * cis(sign * 2.0 * PI * (j * k) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<C64> = (0..16)
            .map(|j| C64::new((j as f64 * 0.7).sin(), (j as f64 * 1.3).cos()))
            .collect();
        let mut y = x.clone();
        fft_in_place(&mut y, -1.0);
        for (a, b) in y.iter().zip(naive(&x, -1.0)) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn centered_round_trip() {
        let m = 32;
        let r = 4.0;
        let h = 2.0 * r / m as f64;
        let x: Vec<C64> = (0..m)
            .map(|j| C64::new((-(j as f64) * 0.3).exp(), j as f64 * 0.01))
            .collect();
        let mut y = x.clone();
        centered_transform(&mut y, true, h);
        centered_transform(&mut y, false, 1.0 / (2.0 * r));
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn centered_matches_direct_sum() {
        let m = 16;
        let r = 3.0;
        let h = 2.0 * r / m as f64;
        let x: Vec<C64> = (0..m).map(|j| C64::new(1.0 + j as f64, 0.5)).collect();
        let mut y = x.clone();
        centered_transform(&mut y, true, h);
        for (k, yk) in y.iter().enumerate() {
            let u = (k as f64 - (m / 2) as f64) / (2.0 * r);
            let direct: C64 = (0..m)
                .map(|j| x[j] * cis(-2.0 * PI * (-r + j as f64 * h) * u) * h)
                .sum();
            assert!((yk - direct).norm() < 1e-10);
        }
    }
}
