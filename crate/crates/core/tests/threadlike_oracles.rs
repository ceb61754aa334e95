//! Thread-like kernels against brute-force coadjoint actions and against the
//! Heisenberg kernels through the `N = 3` dictionary.

use core::f64::consts::PI;
use offield_core::heisenberg::{pi_lambda, rho_symbol};
use offield_core::linop::{self, translate};
use offield_core::sampling::{make_test_function, GridSpec, TestKind};
use offield_core::threadlike::{coadjoint_translate, layer_and_canonical, pi_ell, rho_symbol_n, xi_hat, Axis, CoadjointPoint, FHat2, Layer};
use offield_core::C64;
use proptest::prelude::*;

fn gauss(x: f64) -> f64 {
    (-PI * x * x).exp()
}

/// `(t.l)_j = l(exp(-t ad X_N) X_j)` from a power series of the `N x N`
/// matrix of `ad X_N` in the basis `X_1 .. X_N`.
fn coadjoint_by_exponential(l: &CoadjointPoint, t: f64) -> Vec<f64> {
    let n = l.big_n();
    // column j holds ad X_N (X_{j+1}) = X_j
    let mut d = vec![vec![0.0; n]; n];
    for j in 1..n - 1 {
        d[j - 1][j] = 1.0;
    }
    let mut term: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut expm = term.clone();
    for k in 1..40 {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|p| term[i][p] * d[p][j]).sum::<f64>() * (-t) / k as f64;
            }
        }
        term = next;
        for i in 0..n {
            for j in 0..n {
                expm[i][j] += term[i][j];
            }
        }
    }
    // l(X_j) = xi_j, 1-based
    (1..=n).map(|j| (1..=n).map(|i| expm[i - 1][j - 1] * l.xi(i)).sum()).collect()
}

fn random_point() -> impl Strategy<Value = CoadjointPoint> {
    (3usize..=6)
        .prop_flat_map(|n| prop::collection::vec(-2.0f64..2.0, n))
        .prop_map(|c| CoadjointPoint::new(c).unwrap())
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn translation_is_a_group_action(l in random_point(), t in -1.5f64..1.5, t2 in -1.5f64..1.5) {
        let two = coadjoint_translate(&coadjoint_translate(&l, t2), t);
        let one = coadjoint_translate(&l, t + t2);
        prop_assert!(close(two.coords(), one.coords(), 1e-10));
        prop_assert!(close(coadjoint_translate(&l, 0.0).coords(), l.coords(), 0.0));
    }

    #[test]
    fn translation_matches_matrix_exponential(l in random_point(), t in -1.5f64..1.5) {
        let got = coadjoint_translate(&l, t);
        let want = coadjoint_by_exponential(&l, t);
        let n = l.big_n();
        // the X_N* slot is carried unchanged
        let got_xi: Vec<f64> = (1..n).map(|j| got.xi(j)).collect();
        prop_assert!(close(&got_xi, &want[..n - 1], 1e-10));
        prop_assert_eq!(got.xi(n), l.xi(n));
    }

    #[test]
    fn orbit_polynomial_intertwines(l in random_point(), t in -1.5f64..1.5, s in -1.5f64..1.5) {
        let lhs = xi_hat(&coadjoint_translate(&l, t)).eval(s);
        let rhs = xi_hat(&l).eval(s + t);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn canonical_form_is_idempotent_and_on_orbit(l in random_point()) {
        let (layer, l0) = layer_and_canonical(&l);
        let (layer2, l00) = layer_and_canonical(&l0);
        prop_assert!(close(l00.coords(), l0.coords(), 1e-12));
        match (layer, layer2) {
            (Layer::Generic { j, t_star }, Layer::Generic { j: j2, t_star: t2 }) => {
                prop_assert_eq!(j, j2);
                prop_assert!(t2.abs() < 1e-12 * (1.0 + t_star.abs()));
                prop_assert_eq!(l0.xi(j + 1), 0.0);
                prop_assert_eq!(l0.xi(l.big_n()), 0.0);
                let moved = coadjoint_translate(&l, t_star);
                prop_assert!(close(moved.restricted(), l0.restricted(), 1e-9));
            }
            (Layer::Character { .. }, Layer::Character { .. }) => prop_assert_eq!(l0.coords(), l.coords()),
            _ => prop_assert!(false, "layer changed under canonicalisation"),
        }
    }
}

/// `f(s, u) = exp(-pi s^2) prod exp(-pi u_j^2)` is its own partial transform.
fn gaussian_fh(s_axis: Axis, ell_axes: Vec<Axis>) -> FHat2 {
    FHat2::from_fn(s_axis, ell_axes, |s, l| C64::new(gauss(s) * l.iter().map(|&v| gauss(v)).product::<f64>(), 0.0)).unwrap()
}

#[test]
fn pi_ell_matches_brute_force_quadrature() {
    let grid = GridSpec::new(1, 32, 3.0).unwrap();
    let h = grid.spacing();
    let l = CoadjointPoint::new(vec![0.7, -0.4, 0.0, 1.0]).unwrap();
    // (t.l)|_b = (t^2/2 - 0.4, -t, 1)
    let fh = gaussian_fh(
        Axis::covering(-6.0, 6.0, h).unwrap(),
        vec![Axis::covering(-0.4, 4.2, 0.01).unwrap(), Axis::covering(-3.0, 3.0, h).unwrap(), Axis::new(1.0, 1.0, 1).unwrap()],
    );
    let k = pi_ell(&fh, &l, &grid).unwrap();
    let nodes = grid.nodes();
    let du = 0.125;
    let us: Vec<f64> = (0..=48).map(|i| -3.0 + i as f64 * du).collect();
    let mut err = 0.0f64;
    let mut peak = 0.0f64;
    for (j, &t) in nodes.iter().enumerate() {
        let tl = coadjoint_by_exponential(&l, t);
        // pair u = (u_3, u_2, u_1) with (t.l)_3, (t.l)_2, (t.l)_1
        let b = [tl[2], tl[1], tl[0]];
        for (i, &s) in nodes.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &u3 in &us {
                for &u2 in &us {
                    for &u1 in &us {
                        let f = gauss(s - t) * gauss(u3) * gauss(u2) * gauss(u1);
                        let ph = -2.0 * PI * (u3 * b[0] + u2 * b[1] + u1 * b[2]);
                        acc += C64::new(ph.cos(), ph.sin()) * f;
                    }
                }
            }
            acc *= du * du * du;
            err = err.max((acc - k.entry(i, j)).norm());
            peak = peak.max(acc.norm());
        }
    }
    assert!(err < 1e-3 * peak, "max error {err:e} vs peak {peak:e}");
}

#[test]
fn orbit_translates_have_equal_norms() {
    let grid = GridSpec::new(1, 64, 6.0).unwrap();
    let h = grid.spacing();
    let fh = gaussian_fh(
        Axis::covering(-6.0, 6.0, h).unwrap(),
        vec![Axis::covering(-1.0, 4.0, 0.01).unwrap(), Axis::covering(-3.5, 3.5, h / 4.0).unwrap(), Axis::new(1.0, 1.0, 1).unwrap()],
    );
    let l = CoadjointPoint::new(vec![0.0, -0.4, 0.0, 1.0]).unwrap();
    let base = pi_ell(&fh, &l, &grid).unwrap();
    let top = linop::norm(&base);
    for steps in [-3i32, 1, 2] {
        let t = steps as f64 * h;
        let moved = pi_ell(&fh, &coadjoint_translate(&l, t), &grid).unwrap();
        let (a, b) = (linop::norm(&base), linop::norm(&moved));
        assert!((a - b).abs() < 1e-6 * a, "op norms {a} vs {b} at t = {t}");
        let (a, b) = (linop::hs_norm(&base), linop::hs_norm(&moved));
        assert!((a - b).abs() < 1e-6 * a, "HS norms {a} vs {b} at t = {t}");
        let shifted = translate(&base, t).unwrap();
        let d = linop::norm(&shifted.sub(&moved).unwrap());
        assert!(d < 1e-6 * top, "translate gap {d:e} vs norm {top:e} at t = {t}");
    }
}

/// `f^2(s, l_2, l_1) = f^{2,3}(s, l_2 - l_1 s / 2, l_1)` for the unit Gaussian
/// on `H_1`, whose partial transform is `exp(-pi (x^2 + u^2 + lambda^2))`.
fn heisenberg_gaussian_fh(s_axis: Axis, l2: Axis, l1: Axis) -> FHat2 {
    FHat2::from_fn(s_axis, vec![l2, l1], |s, l| C64::new(gauss(s) * gauss(l[0] - l[1] * s / 2.0) * gauss(l[1]), 0.0)).unwrap()
}

#[test]
fn three_dimensional_case_matches_heisenberg() {
    let grid = GridSpec::desk();
    let h = grid.spacing();
    let r = grid.r();
    let f = make_test_function(TestKind::Gaussian, &[1.0], &grid).unwrap();
    for lambda in [0.5f64, -0.75] {
        // l_2 = -t lambda runs over node multiples of lambda h
        let step = lambda.abs() * h;
        let fh = heisenberg_gaussian_fh(
            Axis::covering(-2.0 * r, 2.0 * r, h).unwrap(),
            Axis::covering(-lambda.abs() * r, lambda.abs() * r, step).unwrap(),
            Axis::new(lambda, 1.0, 1).unwrap(),
        );
        let l = CoadjointPoint::new(vec![0.0, 0.0, lambda]).unwrap();
        let k = pi_ell(&fh, &l, &grid).unwrap();
        let want = pi_lambda(&f, lambda).unwrap();
        let gap = linop::norm(&k.sub(&want).unwrap()) / linop::norm(&want);
        assert!(gap < 1e-6, "lambda = {lambda}: relative gap {gap:e}");
    }
    let df = grid.freq_spacing();
    let fh = heisenberg_gaussian_fh(
        Axis::covering(-r, r - h, h).unwrap(),
        Axis::covering(-grid.freq_max(), grid.freq_max(), df).unwrap(),
        Axis::new(0.0, 1.0, 1).unwrap(),
    );
    let got = rho_symbol_n(&fh, &grid).unwrap();
    let want = rho_symbol(&f).unwrap();
    let err = got.values().iter().zip(want.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-8 * want.sup_norm(), "symbol error {err:e}");
}
