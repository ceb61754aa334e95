//! Dense real-symmetric eigensolver: Householder tridiagonalization followed
//! by implicit QL. Matrices are stored transposed (`w[col * n + row]`) so the
//! inner loops run over contiguous memory.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) struct Eigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvector `j` occupies `vectors[j * n .. (j + 1) * n]`.
    pub vectors: Option<Vec<f64>>,
}

/// Eigen-decomposition of the symmetric matrix `a` (row-major, `n x n`).
pub(crate) fn symmetric_eigen(mut a: Vec<f64>, n: usize, want_vectors: bool) -> Eigen {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return Eigen { values: d, vectors: want_vectors.then(Vec::new) };
    }
    tred2(&mut a, &mut d, &mut e, n, want_vectors);
    let mut v = if want_vectors { Some(a) } else { None };
    tql2(&mut d, &mut e, v.as_deref_mut(), n);
    sort(d, v, n)
}

/// Eigen-decomposition of a symmetric tridiagonal matrix.
pub(crate) fn tridiagonal_eigen(diag: &[f64], off: &[f64], want_vectors: bool) -> Eigen {
    let n = diag.len();
    let mut d = diag.to_vec();
    // e[i] couples i - 1 and i
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut v = want_vectors.then(|| {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        id
    });
    tql2(&mut d, &mut e, v.as_deref_mut(), n);
    sort(d, v, n)
}

fn sort(d: Vec<f64>, v: Option<Vec<f64>>, n: usize) -> Eigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = v.map(|v| {
        let mut out = Vec::with_capacity(n * n);
        for &j in &order {
            out.extend_from_slice(&v[j * n..(j + 1) * n]);
        }
        out
    });
    Eigen { values, vectors }
}

fn tred2(w: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize, accumulate: bool) {
    // V[r][c] lives at w[c * n + r]; for a symmetric input this is the input itself.
    macro_rules! v {
        ($r:expr, $c:expr) => {
            w[($c) * n + ($r)]
        };
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
                v!(j, i) = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v!(j, i) = f;
                g = e[j] + v!(j, j) * f;
                for k in j + 1..i {
                    let vkj = v!(k, j);
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v!(k, j) -= f * e[k] + g * d[k];
                }
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
            }
        }
        d[i] = h;
    }
    if !accumulate {
        for i in 0..n {
            d[i] = v!(i, i);
        }
        e[0] = 0.0;
        return;
    }
    for i in 0..n - 1 {
        v!(n - 1, i) = v!(i, i);
        v!(i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v!(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v!(k, i + 1) * v!(k, j);
                }
                for k in 0..=i {
                    v!(k, j) -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v!(k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
        v!(n - 1, j) = 0.0;
    }
    v!(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

fn tql2(d: &mut [f64], e: &mut [f64], mut w: Option<&mut [f64]>, n: usize) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(w) = w.as_deref_mut() {
                        let (lo, hi) = w.split_at_mut((i + 1) * n);
                        let col_i = &mut lo[i * n..];
                        let col_i1 = &mut hi[..n];
                        for k in 0..n {
                            let t = col_i1[k];
                            col_i1[k] = s * col_i[k] + c * t;
                            col_i[k] = c * col_i[k] - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_symmetric() {
        let a = vec![2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let eig = symmetric_eigen(a.clone(), 3, true);
        let s = libm::sqrt(2.0);
        let want = [2.0 - s, 2.0, 2.0 + s];
        for (x, y) in eig.values.iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
        let v = eig.vectors.unwrap();
        for j in 0..3 {
            for r in 0..3 {
                let av: f64 = (0..3).map(|c| a[r * 3 + c] * v[j * 3 + c]).sum();
                assert!((av - eig.values[j] * v[j * 3 + r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn values_only_agrees() {
        let n = 12;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x = libm::sin((i * 7 + j * 3) as f64);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        let full = symmetric_eigen(a.clone(), n, true);
        let vals = symmetric_eigen(a, n, false);
        for (x, y) in full.values.iter().zip(&vals.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_laplacian() {
        let n = 10;
        let eig = tridiagonal_eigen(&vec![2.0; n], &vec![-1.0; n - 1], false);
        for (k, v) in eig.values.iter().enumerate() {
            let exact = 2.0
                - 2.0 * libm::cos(core::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64);
            assert!((v - exact).abs() < 1e-12);
        }
    }
}
