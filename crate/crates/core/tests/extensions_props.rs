//! The diagonal construction as an exact homomorphism, and how the zero map
//! fails the topology condition.

use core::f64::consts::PI;
use offield_core::extensions::{delaroche_entries, delaroche_nu, tau_defect_profile, Delaroche, ZeroMap};
use offield_core::linop::{self, compose};
use offield_core::sampling::{GridSpec, Symbol};
use offield_core::C64;

fn symbol(g: GridSpec, w: f64, a0: f64, b0: f64, phase: f64) -> Symbol {
    Symbol::from_fn(g, |a, b| {
        let e = (-PI * ((a[0] - a0).powi(2) + (b[0] - b0).powi(2)) / (w * w)).exp();
        C64::new(e, 0.0) * C64::new(0.0, 2.0 * PI * phase * a[0]).exp()
    })
    .unwrap()
}

/// Symbols (and the profile's combinations) peak at the origin: at small lambda
/// the retained lattice box shrinks onto it.
fn ladder() -> Vec<f64> {
    (1..=10).map(|j| 2f64.powi(-j)).collect()
}

#[test]
fn delaroche_is_an_exact_homomorphism() {
    let g = GridSpec::desk();
    let phi = symbol(g, 1.0, 0.0, 0.0, 0.3);
    let psi = symbol(g, 1.2, 0.0, 0.0, 0.3);
    let basis = 11;
    for lambda in ladder() {
        let a = delaroche_nu(&phi, lambda, basis).unwrap();
        let b = delaroche_nu(&psi, lambda, basis).unwrap();
        let sup = delaroche_entries(&phi, lambda, basis).unwrap().iter().fold(0.0f64, |m, e| m.max(e.1.norm()));
        assert!((linop::norm(&a) - sup).abs() < 1e-12, "lambda = {lambda}");
        let ab = delaroche_nu(&phi.product(&psi).unwrap(), lambda, basis).unwrap();
        let mul = linop::norm(&ab.sub(&compose(&a, &b).unwrap()).unwrap());
        assert!(mul < 1e-8, "lambda = {lambda}: multiplicativity {mul:e}");
        let inv = linop::norm(&delaroche_nu(&phi.conj(), lambda, basis).unwrap().sub(&a.adjoint()).unwrap());
        assert!(inv < 1e-12, "lambda = {lambda}: involution {inv:e}");
    }
    let top = delaroche_nu(&phi, 2f64.powi(-10), basis).unwrap();
    assert!((linop::norm(&top) - phi.sup_norm()).abs() < 0.02);
}

#[test]
fn profiles_separate_the_maps() {
    let g = GridSpec::desk();
    let phi = symbol(g, 1.0, 0.0, 0.0, 0.3);
    let psi = symbol(g, 1.2, 0.0, 0.0, 0.3);
    let lad = ladder();
    let del = tau_defect_profile(&Delaroche { basis_size: 11 }, &phi, &psi, &lad, 0.05).unwrap();
    assert!(del.rows.iter().all(|r| r.multiplicativity < 1e-8 && r.involution < 1e-12));
    assert!(del.rows.last().unwrap().topology < 0.02);
    let zero = tau_defect_profile(&ZeroMap, &phi, &psi, &lad, 0.05).unwrap();
    assert!(zero.rows.iter().all(|r| r.linearity == 0.0 && r.multiplicativity == 0.0));
    assert!(!zero.topology_ok);
}
