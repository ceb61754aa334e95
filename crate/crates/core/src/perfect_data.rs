//! Converging sequences of generic orbits: perfect data (translates `t_i^k`,
//! scales `rho_i^k`, limit polynomials, adapted sequence `s_k`), the windowed
//! operators `nu(phi)(i, k)`, and the condition defects of an operator field.
//!
//! Limits are judged on finite ladders: a residual sequence "converges" when it
//! decreases over the top rungs and ends below the tolerance; "bounded" and
//! "divergent" look at the last quarter of the ladder.

use crate::error::bail;
use crate::linop::{self, compose, mask, translate, truncate, KernelOperator, Side, VectorL2};
use crate::sampling::{GridSpec, Symbol, Window};
use crate::threadlike::{pi_ell, rho_symbol_n, xi_from_hat, CoadjointPoint, FHat2, OrbitPolynomial};
use crate::util::{cis, horner, linspace, max_abs};
use crate::{is_decreasing, Error, Result, C64, DECAY_FLOOR};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Relative spread below which a ladder tail counts as bounded.
pub const BOUNDED_SPREAD: f64 = 0.1;
/// Half-width of the evaluation window for polynomial limits.
pub const LIMIT_WINDOW: f64 = 5.0;
const LIMIT_POINTS: usize = 101;
const TOP_RUNGS: usize = 3;

/// Real polynomial, ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `c prod (t - r_j)`.
    pub fn from_roots(c: f64, roots: &[f64]) -> Self {
        let mut coeffs = vec![c];
        for &r in roots {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= r * a;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree().is_none_or(|d| d == 0)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
        Self { coeffs }
    }

    fn trimmed(&self) -> Self {
        let len = self.degree().map_or(0, |d| d + 1);
        Self { coeffs: self.coeffs[..len].to_vec() }
    }

    pub fn to_orbit(&self) -> OrbitPolynomial {
        OrbitPolynomial { coeffs: self.coeffs.clone() }
    }
}

/// Real roots, ascending, multiple roots reported once.
pub fn real_roots(p: &Poly) -> Vec<f64> {
    let p = p.trimmed();
    let d = match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(d) => d,
    };
    let lead = p.coeffs[d];
    if d == 1 {
        return vec![-p.coeffs[0] / lead];
    }
    let bound = 1.0 + p.coeffs[..d].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut marks = vec![-bound];
    marks.extend(real_roots(&p.derivative()).into_iter().filter(|x| x.abs() < bound));
    marks.push(bound);
    let scale = |x: f64| p.coeffs.iter().enumerate().map(|(i, c)| (c * libm::pow(x, i as f64)).abs()).sum::<f64>();
    let mut out: Vec<f64> = Vec::new();
    let push = |x: f64, out: &mut Vec<f64>| {
        if out.last().is_none_or(|&y| (x - y).abs() > 1e-9 * (1.0 + x.abs())) {
            out.push(x);
        }
    };
    for w in marks.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (p.eval(lo), p.eval(hi));
        if flo.abs() <= 1e-12 * scale(lo) {
            push(lo, &mut out);
        }
        if flo.signum() * fhi.signum() < 0.0 && fhi.abs() > 1e-12 * scale(hi) {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if p.eval(mid).signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            push(0.5 * (lo + hi), &mut out);
        }
    }
    let last = *marks.last().unwrap_or(&bound);
    if p.eval(last).abs() <= 1e-12 * scale(last) {
        push(last, &mut out);
    }
    out
}

/// `p_k(t) = c_k prod_j (t - a_j^k)` sampled on a ladder of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSequence {
    degree: usize,
    ladder: Vec<u64>,
    leading: Vec<f64>,
    roots: Vec<Vec<f64>>,
}

impl PolynomialSequence {
    pub fn new(degree: usize, ladder: Vec<u64>, leading: Vec<f64>, roots: Vec<Vec<f64>>) -> Result<Self> {
        if ladder.is_empty() || leading.len() != ladder.len() || roots.len() != ladder.len() {
            return Err(Error::Dimension);
        }
        if ladder.windows(2).any(|w| w[1] <= w[0]) {
            bail!(Parameter, "ladder must be strictly increasing");
        }
        if leading.iter().any(|&c| c == 0.0 || !c.is_finite()) {
            bail!(Parameter, "leading coefficients must be finite and nonzero");
        }
        if roots.iter().any(|r| r.len() != degree || r.iter().any(|v| !v.is_finite())) {
            bail!(Parameter, "every rung needs {degree} finite roots");
        }
        Ok(Self { degree, ladder, leading, roots })
    }

    pub fn from_fn(degree: usize, ladder: &[u64], leading: impl Fn(u64) -> f64, roots: impl Fn(u64) -> Vec<f64>) -> Result<Self> {
        let c = ladder.iter().map(|&k| leading(k)).collect();
        let a = ladder.iter().map(|&k| roots(k)).collect();
        Self::new(degree, ladder.to_vec(), c, a)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ladder(&self) -> &[u64] {
        &self.ladder
    }

    pub fn leading(&self, r: usize) -> f64 {
        self.leading[r]
    }

    pub fn roots(&self, r: usize) -> &[f64] {
        &self.roots[r]
    }

    /// `p_k(t)` at rung `r`, in product form.
    pub fn eval(&self, r: usize, t: f64) -> f64 {
        self.roots[r].iter().fold(self.leading[r], |acc, a| acc * (t - a))
    }

    pub fn poly(&self, r: usize) -> Poly {
        Poly::from_roots(self.leading[r], &self.roots[r])
    }

    /// `p_k(t0 + t)` as a polynomial in `t`.
    pub fn shifted(&self, r: usize, t0: f64) -> Poly {
        let a: Vec<f64> = self.roots[r].iter().map(|a| a - t0).collect();
        Poly::from_roots(self.leading[r], &a)
    }

    /// `l_k` with `l_k^ = p_k` in `g_N*`, `X_N*` slot zero.
    pub fn point(&self, r: usize, big_n: usize) -> Result<CoadjointPoint> {
        xi_from_hat(&self.poly(r).to_orbit(), big_n)
    }
}

/// Perfect data on a ladder; per-translate arrays are indexed `[i][rung]`.
/// Indices `i` and root indices `j` are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfectData {
    pub m: usize,
    pub t: Vec<Vec<f64>>,
    pub c_set: Vec<usize>,
    pub d_set: Vec<usize>,
    pub q: Vec<Poly>,
    pub rho: Vec<Vec<f64>>,
    /// `p^i` for `i` in `C`, `None` for `i` in `D`.
    pub p_limit: Vec<Option<Poly>>,
    pub l_sets: Vec<Vec<usize>>,
    pub j_sets: Vec<Vec<usize>>,
    pub s: Vec<f64>,
    /// Tolerance at which this datum is claimed to verify.
    pub tol: f64,
}

impl PerfectData {
    pub fn is_character(&self, i: usize) -> bool {
        self.c_set.contains(&i)
    }
}

fn tail<T>(v: &[T]) -> &[T] {
    let n = v.len().div_ceil(4).max(2).min(v.len());
    &v[v.len() - n..]
}

/// Last quarter varies by less than `BOUNDED_SPREAD` of its size.
pub fn is_bounded(v: &[f64]) -> bool {
    let w = tail(v);
    let hi = w.iter().copied().fold(f64::MIN, f64::max);
    let lo = w.iter().copied().fold(f64::MAX, f64::min);
    hi - lo <= BOUNDED_SPREAD * hi.abs().max(1.0)
}

/// Last quarter strictly increasing and not bounded.
pub fn is_divergent(v: &[f64]) -> bool {
    tail(v).windows(2).all(|w| w[1] > w[0]) && !is_bounded(v)
}

/// Last quarter strictly decreasing.
pub fn is_decaying(v: &[f64]) -> bool {
    tail(v).windows(2).all(|w| w[1] < w[0])
}

/// `lambda_k X_1*`: `p_k(t) = -lambda_k t`, one character translate at
/// `t = -1/lambda_k` with scale `1/|lambda_k|`.
pub fn heisenberg_family(lambda: impl Fn(u64) -> f64, ladder: &[u64]) -> Result<(PolynomialSequence, PerfectData)> {
    let lam: Vec<f64> = ladder.iter().map(|&k| lambda(k)).collect();
    if lam.iter().any(|&l| l == 0.0 || !l.is_finite()) {
        bail!(Parameter, "lambda_k must be finite and nonzero");
    }
    let sign = lam[0].signum();
    if lam.iter().any(|l| l.signum() != sign) {
        bail!(NotPerfectData, "the sign of lambda_k changes on the ladder");
    }
    let seq = PolynomialSequence::new(1, ladder.to_vec(), lam.iter().map(|l| -l).collect(), vec![vec![0.0]; ladder.len()])?;
    let pd = PerfectData {
        m: 1,
        t: vec![lam.iter().map(|l| -1.0 / l).collect()],
        c_set: vec![0],
        d_set: vec![],
        q: vec![Poly::constant(1.0)],
        rho: vec![lam.iter().map(|l| 1.0 / l.abs()).collect()],
        p_limit: vec![Some(Poly::new(vec![1.0, -sign]))],
        l_sets: vec![vec![0]],
        j_sets: vec![vec![]],
        s: lam.iter().map(|l| 1.0 / libm::sqrt(l.abs())).collect(),
        tol: 1e-3,
    };
    Ok((seq, pd))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: String,
    /// Measured residual; `NaN` for purely structural checks.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfectDataReport {
    pub checks: Vec<ConditionCheck>,
}

impl PerfectDataReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

fn limit_grid() -> Vec<f64> {
    linspace(-LIMIT_WINDOW, LIMIT_WINDOW, LIMIT_POINTS)
}

/// `max |f_r(x) - g(x)|` over the limit window at the top rungs, oldest first.
fn top_residuals(rungs: usize, f: impl Fn(usize, f64) -> f64, g: &Poly) -> Vec<f64> {
    let xs = limit_grid();
    (rungs.saturating_sub(TOP_RUNGS)..rungs)
        .map(|r| xs.iter().map(|&x| (f(r, x) - g.eval(x)).abs()).fold(0.0, f64::max))
        .collect()
}

fn converges(res: &[f64], tol: f64) -> bool {
    is_decreasing(res) && res.last().is_some_and(|&v| v < tol)
}

fn dist(seq: &PolynomialSequence, t: &[f64], j: usize) -> Vec<f64> {
    (0..t.len()).map(|r| (t[r] - seq.roots(r)[j]).abs()).collect()
}

/// Checks every condition of the perfect-data definition on the ladder.
pub fn verify_perfect_data(seq: &PolynomialSequence, pd: &PerfectData, tol: f64) -> Result<PerfectDataReport> {
    if !(tol > 0.0) {
        bail!(Parameter, "tolerance must be positive");
    }
    let rungs = seq.ladder().len();
    let d = seq.degree();
    let m = pd.m;
    let sized = pd.t.len() == m
        && pd.q.len() == m
        && pd.rho.len() == m
        && pd.p_limit.len() == m
        && pd.l_sets.len() == m
        && pd.j_sets.len() == m
        && pd.s.len() == rungs
        && pd.t.iter().chain(&pd.rho).all(|v| v.len() == rungs);
    if !sized {
        return Err(Error::Dimension);
    }
    let mut checks = Vec::new();
    let mut add = |name: String, residual: f64, pass: bool| checks.push(ConditionCheck { name, residual, pass });

    // partition, class and index-set structure
    let mut seen = vec![0usize; m];
    for &i in pd.c_set.iter().chain(&pd.d_set) {
        if i < m {
            seen[i] += 1;
        }
    }
    let partition = m > 0 && m <= 2 * d.max(1) && seen.iter().all(|&c| c == 1) && pd.c_set.len() + pd.d_set.len() == m;
    add("partition".into(), f64::NAN, partition);
    for i in 0..m {
        // L and p only make sense on C, J only on D
        let class = pd.q[i].is_constant() == pd.is_character(i)
            && if pd.is_character(i) {
                pd.j_sets[i].is_empty()
            } else {
                pd.l_sets[i].is_empty() && pd.p_limit[i].is_none()
            };
        add(format!("class[{i}]"), f64::NAN, class);
    }
    for &i in &pd.c_set {
        let ok = pd.l_sets[i].iter().all(|&j| j < d)
            && pd.p_limit[i].as_ref().is_some_and(|p| p.degree().unwrap_or(0) == pd.l_sets[i].len());
        add(format!("3d-degree[{i}]"), f64::NAN, ok);
    }
    let mut disjoint = true;
    for (a, &i) in pd.c_set.iter().enumerate() {
        for &i2 in &pd.c_set[a + 1..] {
            if pd.l_sets[i].iter().any(|j| pd.l_sets[i2].contains(j)) {
                disjoint = false;
            }
        }
    }
    add("3e".into(), f64::NAN, disjoint);

    // (1) translated polynomials converge
    for i in 0..m {
        let res = top_residuals(rungs, |r, x| seq.eval(r, x + pd.t[i][r]), &pd.q[i]);
        add(format!("1[{i}]"), res.last().copied().unwrap_or(f64::NAN), converges(&res, tol));
    }
    // (2) translates separate
    for i in 0..m {
        for i2 in i + 1..m {
            let gap: Vec<f64> = (0..rungs).map(|r| (pd.t[i][r] - pd.t[i2][r]).abs()).collect();
            add(format!("2[{i},{i2}]"), gap[rungs - 1], is_divergent(&gap));
        }
    }
    for &i in &pd.c_set {
        let ds: Vec<Vec<f64>> = (0..d).map(|j| dist(seq, &pd.t[i], j)).collect();
        // (3a) every root recedes
        let recede = ds.iter().all(|v| is_divergent(v));
        let closest = ds.iter().map(|v| v[rungs - 1]).fold(f64::INFINITY, f64::min);
        add(format!("3a[{i}]"), closest, recede);
        // (3b) rho is the distance to the closest root
        let rel = (0..rungs)
            .map(|r| {
                let near = ds.iter().map(|v| v[r]).fold(f64::INFINITY, f64::min);
                (pd.rho[i][r] - near).abs() / near
            })
            .fold(0.0, f64::max);
        add(format!("3b[{i}]"), rel, rel <= tol);
        // (3c) bounded ratios exactly on L(i)
        let ratio_ok = (0..d).all(|j| {
            let ratio: Vec<f64> = (0..rungs).map(|r| ds[j][r] / pd.rho[i][r]).collect();
            if pd.l_sets[i].contains(&j) {
                is_bounded(&ratio)
            } else {
                is_divergent(&ratio)
            }
        });
        add(format!("3c[{i}]"), f64::NAN, ratio_ok);
        // (3d) rescaled polynomials converge to p^i
        let (res, ok) = match &pd.p_limit[i] {
            Some(p) => {
                let res = top_residuals(rungs, |r, x| seq.eval(r, pd.t[i][r] + x * pd.rho[i][r]), p);
                let ok = converges(&res, tol);
                (res.last().copied().unwrap_or(f64::NAN), ok)
            }
            None => (f64::NAN, false),
        };
        add(format!("3d[{i}]"), res, ok);
    }
    // (4) unit scale and receding roots on D
    for &i in &pd.d_set {
        let unit = pd.rho[i].iter().all(|&v| v == 1.0);
        let want: Vec<usize> = (0..d).filter(|&j| is_divergent(&dist(seq, &pd.t[i], j))).collect();
        let mut have = pd.j_sets[i].clone();
        have.sort_unstable();
        add(format!("4[{i}]"), f64::NAN, unit && have == want);
    }
    // (5) adapted sequence
    let mut ok = is_divergent(&pd.s);
    for ratio in constraint_ratios(seq, pd) {
        ok &= is_decaying(&ratio);
    }
    add("5".into(), pd.s[rungs - 1], ok);
    Ok(PerfectDataReport { checks })
}

/// The quantities an adapted sequence must be small against, per rung:
/// `|t_i - a_j|` for `i` in `D`, `j` in `J(i)`; `|a_j - t_i| / rho_i` for `i`
/// in `C`, `j` outside `L(i)`; `rho_i` for `i` in `C`.
fn binding_quantities(seq: &PolynomialSequence, pd: &PerfectData) -> Vec<Vec<f64>> {
    let rungs = seq.ladder().len();
    let mut out = Vec::new();
    for &i in &pd.d_set {
        for &j in &pd.j_sets[i] {
            out.push(dist(seq, &pd.t[i], j));
        }
    }
    for &i in &pd.c_set {
        for j in (0..seq.degree()).filter(|j| !pd.l_sets[i].contains(j)) {
            let dj = dist(seq, &pd.t[i], j);
            out.push((0..rungs).map(|r| dj[r] / pd.rho[i][r]).collect());
        }
        out.push(pd.rho[i].clone());
    }
    out
}

fn constraint_ratios(seq: &PolynomialSequence, pd: &PerfectData) -> Vec<Vec<f64>> {
    binding_quantities(seq, pd)
        .into_iter()
        .map(|q| q.iter().zip(&pd.s).map(|(b, s)| s / b).collect())
        .collect()
}

/// `s_k = sqrt(min binding quantity)`, or `s_k = k` when nothing binds.
pub fn adapted_sequence(seq: &PolynomialSequence, pd: &PerfectData) -> Result<Vec<f64>> {
    let qs = binding_quantities(seq, pd);
    if qs.is_empty() {
        return Ok(seq.ladder().iter().map(|&k| k as f64).collect());
    }
    if let Some(q) = qs.iter().find(|q| !is_divergent(q)) {
        bail!(NoAdaptedSequence, "binding quantity stays bounded (last {:.3e})", q[q.len() - 1]);
    }
    let rungs = seq.ladder().len();
    Ok((0..rungs).map(|r| libm::sqrt(qs.iter().map(|q| q[r]).fold(f64::INFINITY, f64::min))).collect())
}

struct Candidate {
    t: Vec<f64>,
    rho: Vec<f64>,
    q: Poly,
    p_limit: Option<Poly>,
    l_set: Vec<usize>,
    j_set: Vec<usize>,
}

/// Heuristic extraction of perfect data from a sequence. The result verifies
/// at its own declared tolerance, or an error says why not.
pub fn propose_perfect_data(seq: &PolynomialSequence) -> Result<PerfectData> {
    let rungs = seq.ladder().len();
    if rungs < 16 {
        bail!(Parameter, "need at least 16 ladder rungs, got {rungs}");
    }
    let d = seq.degree();
    if d == 0 {
        bail!(Undecidable, "constant polynomials carry no generic orbit");
    }
    let mut cands: Vec<Candidate> = Vec::new();

    // root clusters with bounded mutual distance give non-character limits
    let r0 = rungs - tail(seq.ladder()).len();
    let growth_cap = libm::log(seq.ladder()[rungs - 1] as f64 / seq.ladder()[r0] as f64);
    let mut label: Vec<usize> = (0..d).collect();
    for j1 in 0..d {
        for j2 in j1 + 1..d {
            let diff: Vec<f64> = (0..rungs).map(|r| (seq.roots(r)[j1] - seq.roots(r)[j2]).abs()).collect();
            let w = tail(&diff);
            let spread = w.iter().copied().fold(f64::MIN, f64::max) - w.iter().copied().fold(f64::MAX, f64::min);
            if spread < growth_cap {
                let (a, b) = (label[j1], label[j2]);
                label.iter_mut().filter(|l| **l == b).for_each(|l| *l = a);
            }
        }
    }
    let mut groups: Vec<usize> = label.clone();
    groups.sort_unstable();
    groups.dedup();
    for g in groups {
        let members: Vec<usize> = (0..d).filter(|&j| label[j] == g).collect();
        let centroid: Vec<f64> = (0..rungs)
            .map(|r| members.iter().map(|&j| seq.roots(r)[j]).sum::<f64>() / members.len() as f64)
            .collect();
        let t = if is_bounded(&centroid.iter().map(|c| c.abs()).collect::<Vec<_>>()) { vec![0.0; rungs] } else { centroid };
        let coeffs: Vec<Poly> = (rungs - TOP_RUNGS..rungs).map(|r| seq.shifted(r, t[r])).collect();
        let steps: Vec<f64> = coeffs
            .windows(2)
            .map(|w| w[0].coeffs.iter().zip(&w[1].coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .collect();
        let top = &coeffs[TOP_RUNGS - 1];
        let size = top.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1.0);
        let settled = is_decreasing(&steps) && steps[steps.len() - 1] < 1e-2 * size;
        let q = Poly::new(top.coeffs.iter().map(|&c| if c.abs() < 1e-9 * size { 0.0 } else { c }).collect());
        if !settled || q.coeffs.iter().skip(1).all(|c| c.abs() < 1e-3 * size) {
            continue;
        }
        let j_set = (0..d).filter(|&j| is_divergent(&dist(seq, &t, j))).collect();
        cands.push(Candidate { t, rho: vec![1.0; rungs], q, p_limit: None, l_set: vec![], j_set });
    }

    // character limits sit where p_k = +-1 and p_k' dies out
    for sigma in [1.0, -1.0] {
        let sols: Vec<Vec<f64>> = (0..rungs)
            .map(|r| {
                let mut p = seq.poly(r);
                p.coeffs[0] -= sigma;
                real_roots(&p)
            })
            .collect();
        let count = sols[0].len();
        if sols.iter().any(|s| s.len() != count) {
            continue;
        }
        for idx in 0..count {
            let t: Vec<f64> = sols.iter().map(|s| s[idx]).collect();
            let slope: Vec<f64> = (0..rungs).map(|r| seq.poly(r).derivative().eval(t[r]).abs()).collect();
            if !(is_decreasing(tail(&slope)) && slope[rungs - 1] < 1e-2) {
                continue;
            }
            let ds: Vec<Vec<f64>> = (0..d).map(|j| dist(seq, &t, j)).collect();
            if !ds.iter().all(|v| is_divergent(v)) {
                continue;
            }
            let rho: Vec<f64> = (0..rungs).map(|r| ds.iter().map(|v| v[r]).fold(f64::INFINITY, f64::min)).collect();
            let mut l_set = Vec::new();
            let mut clean = true;
            for (j, v) in ds.iter().enumerate() {
                let ratio: Vec<f64> = v.iter().zip(&rho).map(|(a, b)| a / b).collect();
                if is_bounded(&ratio) {
                    l_set.push(j);
                } else if !is_divergent(&ratio) {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let r = rungs - 1;
            let far = (0..d).filter(|j| !l_set.contains(j)).fold(seq.leading(r), |acc, j| acc * (t[r] - seq.roots(r)[j]));
            let scale = far * libm::pow(rho[r], l_set.len() as f64);
            let near: Vec<f64> = l_set.iter().map(|&j| (seq.roots(r)[j] - t[r]) / rho[r]).collect();
            let p_limit = Poly::from_roots(scale, &near);
            cands.push(Candidate { t, rho, q: Poly::constant(sigma), p_limit: Some(p_limit), l_set, j_set: vec![] });
        }
    }

    // prefer translates near the origin; the sort is stable, so p_k = +1 wins ties
    let top = rungs - 1;
    let first_c = cands.iter().position(|c| c.p_limit.is_some()).unwrap_or(cands.len());
    cands[first_c..].sort_by(|a, b| a.t[top].abs().total_cmp(&b.t[top].abs()));
    // keep translates that separate and have disjoint L-sets
    let mut kept: Vec<Candidate> = Vec::new();
    for c in cands {
        let clash = kept.iter().any(|k| {
            let gap: Vec<f64> = (0..rungs).map(|r| (k.t[r] - c.t[r]).abs() / k.rho[r].max(c.rho[r])).collect();
            !is_divergent(&gap) || k.l_set.iter().any(|j| c.l_set.contains(j))
        });
        if !clash {
            kept.push(c);
        }
    }
    if kept.is_empty() || kept.len() > 2 * d {
        bail!(Undecidable, "no stable translates found on this ladder");
    }
    let m = kept.len();
    let mut pd = PerfectData {
        m,
        c_set: (0..m).filter(|&i| kept[i].p_limit.is_some()).collect(),
        d_set: (0..m).filter(|&i| kept[i].p_limit.is_none()).collect(),
        t: kept.iter().map(|c| c.t.clone()).collect(),
        q: kept.iter().map(|c| c.q.clone()).collect(),
        rho: kept.iter().map(|c| c.rho.clone()).collect(),
        p_limit: kept.iter().map(|c| c.p_limit.clone()).collect(),
        l_sets: kept.iter().map(|c| c.l_set.clone()).collect(),
        j_sets: kept.iter().map(|c| c.j_set.clone()).collect(),
        s: vec![0.0; rungs],
        tol: 1e-3,
    };
    pd.s = adapted_sequence(seq, &pd).map_err(|e| Error::Undecidable(format!("{e}")))?;
    let report = verify_perfect_data(seq, &pd, pd.tol)?;
    if !report.pass() {
        let worst = report.checks.iter().filter(|c| c.residual.is_finite()).map(|c| c.residual).fold(0.0, f64::max);
        pd.tol = 2.0 * worst;
        let retry = verify_perfect_data(seq, &pd, pd.tol)?;
        if !retry.pass() {
            bail!(Undecidable, "proposed data fails {:?}", retry.failed());
        }
    }
    Ok(pd)
}

fn rung_scale(pd: &PerfectData, i: usize, r: usize) -> Result<(f64, f64, f64)> {
    if i >= pd.m || r >= pd.s.len() {
        return Err(Error::Dimension);
    }
    Ok((pd.t[i][r], pd.rho[i][r], pd.s[r]))
}

fn character_limit(pd: &PerfectData, i: usize) -> Result<&Poly> {
    match (pd.is_character(i), pd.p_limit.get(i)) {
        (true, Some(Some(p))) => Ok(p),
        _ => bail!(Domain, "translate {i} is not of character type"),
    }
}

/// `eta(i, k, u)(s) = eta(s_k p^i(s / rho) + s_k b) exp(2 pi i a s)`.
pub fn eta_iku(eta: &Window, pd: &PerfectData, i: usize, r: usize, a: f64, b: f64) -> Result<VectorL2> {
    let p = character_limit(pd, i)?;
    let (_, rho, sk) = rung_scale(pd, i, r)?;
    let g = *eta.grid();
    if g.n() != 1 {
        bail!(Parameter, "thread-like states live on one-dimensional grids");
    }
    let values: Vec<C64> = g
        .nodes()
        .iter()
        .map(|&s| eta.eval(&[sk * p.eval(s / rho) + sk * b]) * cis(2.0 * PI * a * s))
        .collect();
    let peak = max_abs(&values);
    let m = g.m();
    if peak > 0.0 && values[0].norm().max(values[m - 1].norm()) > DECAY_FLOOR * peak {
        bail!(GridTooSmall, "state reaches the grid edge");
    }
    VectorL2::new(g, values)
}

/// `nu(phi)(i, k)` with kernel
/// `int phi^2(s - t, -b/s_k + p(t/rho)) conj(eta(b)) eta(s_k (p(s/rho) - p(t/rho)) + b) db`.
pub fn nu_ik(phi: &Symbol, eta: &Window, pd: &PerfectData, i: usize, r: usize) -> Result<KernelOperator> {
    let p = character_limit(pd, i)?;
    let (_, rho, sk) = rung_scale(pd, i, r)?;
    let g = *phi.grid();
    if g.n() != 1 || eta.grid() != &g {
        return Err(Error::Dimension);
    }
    let m = g.m();
    let h = g.spacing();
    let spatial = phi.spatial();
    // roundoff level of the inverse transform
    let floor = 1e-14 * max_abs(spatial);

    // nonzero part of each x-row of the spatial symbol, as a y-index range
    let rows: Vec<Option<(usize, usize)>> = (0..m)
        .map(|q| {
            let line = &spatial[q * m..(q + 1) * m];
            let lo = line.iter().position(|v| v.norm() > floor)?;
            let hi = line.iter().rposition(|v| v.norm() > floor)?;
            Some((lo, hi + 1))
        })
        .collect();
    let extent = rows
        .iter()
        .flatten()
        .map(|&(lo, hi)| g.node(lo).abs().max(g.node(hi - 1).abs()))
        .fold(0.0, f64::max);

    let bw = 1.0 / eta.resolution();
    let reach = eta.effective_radius();
    let db = 1.0 / (extent / sk + 2.0 * bw);
    let half = libm::ceil(reach / db) as i64;
    let bs: Vec<f64> = (-half..=half).map(|j| j as f64 * db).collect();
    let eb: Vec<C64> = bs.iter().map(|&b| eta.eval(&[b]).conj()).collect();
    let pv: Vec<f64> = g.nodes().iter().map(|&x| sk * p.eval(x / rho)).collect();

    let mut kernel = vec![C64::new(0.0, 0.0); m * m];
    for j in 0..m {
        let base = pv[j] / sk;
        for (bi, &b) in bs.iter().enumerate() {
            if eb[bi].norm() == 0.0 {
                continue;
            }
            let beta = -b / sk + base;
            if !g.in_band(beta) {
                continue;
            }
            let w = cis(-2.0 * PI * beta * h);
            for (q, row) in rows.iter().enumerate() {
                let Some((lo, hi)) = *row else { continue };
                let si = j as i64 + q as i64 - (m / 2) as i64;
                if si < 0 || si >= m as i64 {
                    continue;
                }
                let si = si as usize;
                let e2 = eta.eval(&[pv[si] - pv[j] + b]);
                if e2.norm() == 0.0 {
                    continue;
                }
                let hat = horner(&spatial[q * m + lo..q * m + hi], w) * cis(-2.0 * PI * beta * g.node(lo)) * h;
                kernel[si * m + j] += hat * eb[bi] * e2 * db;
            }
        }
    }
    KernelOperator::new(g, kernel)
}

/// `||nu(phi)(i, k) (I - M_{s_k rho})||`.
pub fn truncation_defect(phi: &Symbol, eta: &Window, pd: &PerfectData, i: usize, r: usize) -> Result<f64> {
    let (_, rho, sk) = rung_scale(pd, i, r)?;
    let nu = nu_ik(phi, eta, pd, i, r)?;
    let w = sk * rho;
    let outside = mask(&nu, Side::Right, |x| !(x[0] > -w && x[0] < w));
    Ok(linop::norm(&outside))
}

/// An operator field over the generic part of `g_N*` with a character fiber.
pub trait OperatorFieldGN {
    fn grid(&self) -> &GridSpec;
    fn big_n(&self) -> usize;
    fn fiber(&self, l: &CoadjointPoint) -> Result<KernelOperator>;
    fn zero_fiber(&self) -> &Symbol;
}

/// `F(f)` for `f` given through its `f^2` data.
#[derive(Debug, Clone)]
pub struct FourierFieldGN {
    fh: FHat2,
    grid: GridSpec,
    zero: Symbol,
}

impl FourierFieldGN {
    pub fn new(fh: FHat2, grid: GridSpec) -> Result<Self> {
        let zero = rho_symbol_n(&fh, &grid)?;
        Ok(Self { fh, grid, zero })
    }

    pub fn fhat2(&self) -> &FHat2 {
        &self.fh
    }
}

impl OperatorFieldGN for FourierFieldGN {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn big_n(&self) -> usize {
        self.fh.big_n()
    }

    fn fiber(&self, l: &CoadjointPoint) -> Result<KernelOperator> {
        pi_ell(&self.fh, l, &self.grid)
    }

    fn zero_fiber(&self) -> &Symbol {
        &self.zero
    }
}

/// Which condition [`condition_defect`] measures.
#[derive(Debug, Clone, Copy)]
pub enum Condition<'a> {
    /// `||U(t_i) A(l_k) U(-t_i) M_{s_k} - A(l^i) M_{s_k}||`, `i` in `D`.
    Generic { i: usize },
    /// `||(U(t_i) A(l_k) U(-t_i) - nu(A(0))(i, k)) M_{s_k rho_i}||`, `i` in `C`.
    Character { i: usize, eta: &'a Window },
    /// `||A(l_k) M_{T_k}||`.
    Infinity,
    /// `||nu(phi)(i, k) nu(psi)(i, k) - nu(phi psi)(i, k)||`.
    NuMult { i: usize, eta: &'a Window, phi: &'a Symbol, psi: &'a Symbol },
}

/// Snaps a translation to the grid; returns the snapped value.
fn snap(g: &GridSpec, t: f64) -> f64 {
    libm::round(t / g.spacing()) * g.spacing()
}

/// The defect of `cond` at rung `r`.
pub fn condition_defect(cond: Condition<'_>, a: &dyn OperatorFieldGN, seq: &PolynomialSequence, pd: &PerfectData, r: usize) -> Result<f64> {
    let g = *a.grid();
    if r >= seq.ladder().len() || pd.s.len() != seq.ladder().len() {
        return Err(Error::Dimension);
    }
    let lk = || seq.point(r, a.big_n());
    match cond {
        Condition::Generic { i } => {
            if i >= pd.m || pd.is_character(i) {
                bail!(Parameter, "generic condition needs i in D");
            }
            let li = xi_from_hat(&pd.q[i].to_orbit(), a.big_n())?;
            let moved = translate(&a.fiber(&lk()?)?, snap(&g, pd.t[i][r]))?;
            let sk = pd.s[r];
            let diff = truncate(&moved, 0.0, sk, Side::Right).sub(&truncate(&a.fiber(&li)?, 0.0, sk, Side::Right))?;
            Ok(linop::norm(&diff))
        }
        Condition::Character { i, eta } => {
            let (t, rho, sk) = rung_scale(pd, i, r)?;
            let nu = nu_ik(a.zero_fiber(), eta, pd, i, r)?;
            let moved = translate(&a.fiber(&lk()?)?, snap(&g, t))?;
            let w = sk * rho;
            Ok(linop::norm(&truncate(&moved.sub(&nu)?, 0.0, w, Side::Right)))
        }
        Condition::Infinity => {
            let spans: Vec<(f64, f64)> = (0..pd.m).map(|i| (pd.t[i][r], pd.s[r] * pd.rho[i][r])).collect();
            let k = a.fiber(&lk()?)?;
            let outside = mask(&k, Side::Right, |x| spans.iter().all(|&(c, w)| (x[0] - c).abs() > w));
            Ok(linop::norm(&outside))
        }
        Condition::NuMult { i, eta, phi, psi } => {
            let a1 = nu_ik(phi, eta, pd, i, r)?;
            let a2 = nu_ik(psi, eta, pd, i, r)?;
            let a12 = nu_ik(&phi.product(psi)?, eta, pd, i, r)?;
            Ok(linop::norm(&compose(&a1, &a2)?.sub(&a12)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_ladder() -> Vec<u64> {
        (0..=16).map(|j| libm::round(libm::pow(10.0, j as f64 / 4.0)) as u64).collect()
    }

    #[test]
    fn roots_of_simple_polynomials() {
        let r = real_roots(&Poly::from_roots(2.0, &[-1.0, 0.5, 3.0]));
        assert_eq!(r.len(), 3);
        for (x, y) in r.iter().zip([-1.0, 0.5, 3.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(real_roots(&Poly::new(vec![0.0, 0.0, 1.0])), vec![0.0]);
        assert!(real_roots(&Poly::new(vec![1.0, 0.0, 1.0])).is_empty());
    }

    #[test]
    fn heisenberg_family_values() {
        let (_, pd) = heisenberg_family(|k| 1.0 / k as f64, &[1, 4, 9]).unwrap();
        assert_eq!(pd.t[0], vec![-1.0, -4.0, -9.0]);
        assert_eq!(pd.rho[0], vec![1.0, 4.0, 9.0]);
        assert_eq!(pd.s, vec![1.0, 2.0, 3.0]);
        let (_, neg) = heisenberg_family(|k| -1.0 / k as f64, &[1, 2]).unwrap();
        assert_eq!(neg.p_limit[0], Some(Poly::new(vec![1.0, 1.0])));
        let flip = heisenberg_family(|k| if k == 2 { -0.5 } else { 1.0 / k as f64 }, &[1, 2, 3]);
        assert!(matches!(flip, Err(Error::NotPerfectData(_))));
    }

    #[test]
    fn heisenberg_family_verifies() {
        let (seq, pd) = heisenberg_family(|k| 1.0 / k as f64, &log_ladder()).unwrap();
        let rep = verify_perfect_data(&seq, &pd, 1e-3).unwrap();
        assert!(rep.pass(), "{:?}", rep.failed());
    }

    #[test]
    fn corrupted_rho_fails_3b() {
        let (seq, mut pd) = heisenberg_family(|k| 1.0 / k as f64, &log_ladder()).unwrap();
        pd.rho[0].iter_mut().for_each(|v| *v *= 0.5);
        let rep = verify_perfect_data(&seq, &pd, 1e-3).unwrap();
        assert!(rep.failed().contains(&"3b[0]"));
    }

    #[test]
    fn adapted_sequence_rules() {
        let (seq, pd) = heisenberg_family(|k| 1.0 / k as f64, &log_ladder()).unwrap();
        let s = adapted_sequence(&seq, &pd).unwrap();
        for (sk, &k) in s.iter().zip(seq.ladder()) {
            assert!((sk - libm::sqrt(k as f64)).abs() < 1e-9 * sk);
        }
        // a single D translate with the root k^2 away
        let ladder = log_ladder();
        let seq = PolynomialSequence::from_fn(1, &ladder, |_| 1.0, |k| vec![(k * k) as f64]).unwrap();
        let pd = PerfectData {
            m: 1,
            t: vec![vec![0.0; ladder.len()]],
            c_set: vec![],
            d_set: vec![0],
            q: vec![Poly::new(vec![0.0, 1.0])],
            rho: vec![vec![1.0; ladder.len()]],
            p_limit: vec![None],
            l_sets: vec![vec![]],
            j_sets: vec![vec![0]],
            s: vec![],
            tol: 1e-3,
        };
        let s = adapted_sequence(&seq, &pd).unwrap();
        assert!(s.iter().zip(&ladder).all(|(s, &k)| (s - k as f64).abs() < 1e-9 * s));
    }

    #[test]
    fn constant_sequence_is_one_d_translate() {
        let ladder = log_ladder();
        let seq = PolynomialSequence::from_fn(2, &ladder, |_| 0.5, |_| vec![-1.0, 2.0]).unwrap();
        let pd = propose_perfect_data(&seq).unwrap();
        assert_eq!((pd.m, pd.d_set.clone()), (1, vec![0]));
        assert!(pd.t[0].iter().all(|&t| t == 0.0));
        let want = seq.poly(0);
        for (a, b) in pd.q[0].coeffs.iter().zip(&want.coeffs) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(pd.s.iter().zip(&ladder).all(|(s, &k)| *s == k as f64));
    }

    #[test]
    fn proposer_recovers_heisenberg_translate() {
        let ladder = log_ladder();
        let (seq, _) = heisenberg_family(|k| 1.0 / k as f64, &ladder).unwrap();
        let pd = propose_perfect_data(&seq).unwrap();
        assert_eq!(pd.c_set, vec![0]);
        for (t, &k) in pd.t[0].iter().zip(&ladder) {
            assert!((t + k as f64).abs() <= 0.01 * k as f64);
        }
    }

    #[test]
    fn proposer_on_symmetric_quadratic() {
        // p_k(t) = (t - k)(t + k)/k^2: p_k = -1 at t = 0 with slope 0; the roots
        // sit at distance k on both sides, so rho = k, L = {0, 1} and
        // p^1(s) = s^2 - 1. The translates at +-sqrt(2)k merge with it.
        let ladder = log_ladder();
        let seq = PolynomialSequence::from_fn(2, &ladder, |k| 1.0 / (k * k) as f64, |k| vec![-(k as f64), k as f64]).unwrap();
        let pd = propose_perfect_data(&seq).unwrap();
        assert_eq!(pd.m, 1);
        assert_eq!(pd.c_set, vec![0]);
        assert!(pd.t[0].iter().all(|t| t.abs() < 1e-9), "{pd:?}");
        assert_eq!(pd.l_sets[0], vec![0, 1]);
        let p = pd.p_limit[0].as_ref().unwrap();
        assert!((p.eval(2.0) - 3.0).abs() < 1e-9);
        assert!(verify_perfect_data(&seq, &pd, pd.tol).unwrap().pass());
    }

    #[test]
    fn nothing_stable_is_undecidable() {
        // roots k and 2k: no translate keeps the polynomial bounded and flat
        let ladder = log_ladder();
        let seq = PolynomialSequence::from_fn(2, &ladder, |_| 1.0, |k| vec![k as f64, 2.0 * k as f64]).unwrap();
        assert!(matches!(propose_perfect_data(&seq), Err(Error::Undecidable(_))));
    }
}
