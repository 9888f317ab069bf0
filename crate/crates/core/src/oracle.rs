//! Brute-force inner products `∫ f conj(g)`, independent of the closed-form tables.
//!
//! Piecewise exponential polynomials are integrated exactly per piece.
//! Gaussian factors go through adaptive Gauss–Legendre with bisection.

use std::f64::consts::PI;
use std::borrow::Cow;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::bases::{binomial, pow2, support_k, BasisFamily, FunctionSpec, Gaussian, Integrand, Piece};
use crate::error::{Error, Result};
use crate::model::{DilIndex, FCoordVec, GCoordVec, Sign, TransIndex, Window, Windowed, DROP_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadRule {
    /// Closed-form antiderivatives only. Gaussian inputs are rejected.
    ExactPiecewise,
    /// Closed form where possible, Gauss–Legendre of the given order otherwise.
    GaussLegendre(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadPlan {
    /// Extra breakpoints; discontinuities of both factors are always added.
    pub breakpoints: Vec<f64>,
    pub rule: QuadRule,
    pub max_subdivisions: usize,
    pub tol: f64,
}

impl Default for QuadPlan {
    fn default() -> Self {
        QuadPlan { breakpoints: Vec::new(), rule: QuadRule::GaussLegendre(16), max_subdivisions: 1 << 14, tol: 1e-10 }
    }
}

impl QuadPlan {
    pub fn exact() -> Self {
        QuadPlan { rule: QuadRule::ExactPiecewise, ..Default::default() }
    }
}

/// `∫ f(x) conj(g(x)) dx`.
pub fn inner_product(f: &FunctionSpec, g: &FunctionSpec, plan: &QuadPlan) -> Result<Complex64> {
    inner_product_integrands(&f.integrand()?, &g.integrand()?, plan)
}

pub fn inner_product_integrands(f: &Integrand, g: &Integrand, plan: &QuadPlan) -> Result<Complex64> {
    let mut acc = pieces_inner(&f.pieces, &g.pieces);
    if f.gaussians.is_empty() && g.gaussians.is_empty() {
        return Ok(acc);
    }
    let order = match plan.rule {
        QuadRule::ExactPiecewise => return Err(Error::UnboundedSupport),
        QuadRule::GaussLegendre(n) => n.max(2),
    };
    let mut budget = plan.max_subdivisions;
    // Gaussian against pieces, both orders.
    for gf in &f.gaussians {
        acc += gaussian_vs_pieces(gf, &g.pieces, false, order, plan, &mut budget)?;
    }
    for gg in &g.gaussians {
        acc += gaussian_vs_pieces(gg, &f.pieces, true, order, plan, &mut budget)?;
    }
    for gf in &f.gaussians {
        for gg in &g.gaussians {
            let (a1, b1) = gf.effective_support();
            let (a2, b2) = gg.effective_support();
            let (a, b) = (a1.max(a2), b1.min(b2));
            if a < b {
                let step = gf.sigma.min(gg.sigma);
                let integrand = |x: f64| gf.eval(x) * gg.eval(x).conj();
                acc += integrate_adaptive(&integrand, a, b, step, &plan.breakpoints, order, plan.tol, &mut budget, plan.max_subdivisions)?;
            }
        }
    }
    Ok(acc)
}

fn gaussian_vs_pieces(
    gs: &Gaussian,
    pieces: &[Piece],
    gaussian_is_conjugated: bool,
    order: usize,
    plan: &QuadPlan,
    budget: &mut usize,
) -> Result<Complex64> {
    let (ga, gb) = gs.effective_support();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in pieces {
        let (a, b) = (p.a.max(ga), p.b.min(gb));
        if a >= b {
            continue;
        }
        let integrand = |x: f64| {
            let pv: Complex64 = p.terms.iter().map(|t| t.eval(x)).sum();
            if gaussian_is_conjugated {
                pv * gs.eval(x).conj()
            } else {
                gs.eval(x) * pv.conj()
            }
        };
        acc += integrate_adaptive(&integrand, a, b, gs.sigma, &plan.breakpoints, order, plan.tol, budget, plan.max_subdivisions)?;
    }
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    max_step: f64,
    extra_breaks: &[f64],
    order: usize,
    tol: f64,
    budget: &mut usize,
    max_subdivisions: usize,
) -> Result<Complex64> {
    let mut cuts: Vec<f64> = vec![a, b];
    cuts.extend(extra_breaks.iter().copied().filter(|x| *x > a && *x < b));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut segments = Vec::new();
    for w in cuts.windows(2) {
        let n = ((w[1] - w[0]) / max_step).ceil().clamp(1.0, 4096.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        for k in 0..n {
            let lo = w[0] + k as f64 * h;
            let hi = if k + 1 == n { w[1] } else { lo + h };
            segments.push((lo, hi));
        }
    }
    let per = tol / segments.len() as f64;
    let nodes = nodes_for(order);
    let mut acc = Complex64::new(0.0, 0.0);
    for (lo, hi) in segments {
        acc += adapt(f, lo, hi, gauss_legendre(&nodes, f, lo, hi), &nodes, per, budget, max_subdivisions, 0)?;
    }
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    whole: Complex64,
    nodes: &[(f64, f64)],
    tol: f64,
    budget: &mut usize,
    max_subdivisions: usize,
    depth: u32,
) -> Result<Complex64> {
    let m = 0.5 * (a + b);
    let left = gauss_legendre(nodes, f, a, m);
    let right = gauss_legendre(nodes, f, m, b);
    let halves = left + right;
    if (halves - whole).norm() <= tol || depth > 50 {
        return Ok(halves);
    }
    if *budget == 0 {
        return Err(Error::QuadratureNotConverged { max_subdivisions });
    }
    *budget -= 1;
    Ok(adapt(f, a, m, left, nodes, 0.5 * tol, budget, max_subdivisions, depth + 1)?
        + adapt(f, m, b, right, nodes, 0.5 * tol, budget, max_subdivisions, depth + 1)?)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn nodes_for(n: usize) -> Cow<'static, [(f64, f64)]> {
    static GL16: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    if n == 16 {
        Cow::Borrowed(GL16.get_or_init(|| gauss_legendre_nodes(16)).as_slice())
    } else {
        Cow::Owned(gauss_legendre_nodes(n))
    }
}

fn gauss_legendre<F: Fn(f64) -> Complex64>(nodes: &[(f64, f64)], f: &F, a: f64, b: f64) -> Complex64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    nodes.iter().map(|&(x, w)| f(c + h * x) * w).sum::<Complex64>() * h
}

/// Exact `∫ f conj(g)` for two sums of pieces.
fn pieces_inner(f: &[Piece], g: &[Piece]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for p in f {
        for q in g {
            let a = p.a.max(q.a);
            let b = p.b.min(q.b);
            if a >= b {
                continue;
            }
            for s in &p.terms {
                for t in &q.terms {
                    acc += integrate_term(s.coeff * t.coeff.conj(), s.power + t.power, s.freq - t.freq, a, b);
                }
            }
        }
    }
    acc
}

/// Exact `∫_a^b c x^d e^{2πiλx} dx`, expanded about the midpoint.
pub fn integrate_term(c: Complex64, d: u32, lambda: f64, a: f64, b: f64) -> Complex64 {
    if c == Complex64::new(0.0, 0.0) || a >= b {
        return Complex64::new(0.0, 0.0);
    }
    let mid = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let omega = 2.0 * PI * lambda;
    let moments = centered_moments(d, omega, h);
    let mut poly = Complex64::new(0.0, 0.0);
    for k in 0..=d {
        poly += moments[k as usize] * binomial(d, k) * mid.powi((d - k) as i32);
    }
    let phase = {
        // e^{2πiλ mid} with the integer part of λ·mid removed first
        let t = lambda * mid;
        let r = t - t.round();
        let th = 2.0 * PI * r;
        Complex64::new(th.cos(), th.sin())
    };
    c * phase * poly
}

/// `J_k = ∫_{-h}^{h} t^k e^{iωt} dt` for `k = 0..=d`.
fn centered_moments(d: u32, omega: f64, h: f64) -> Vec<Complex64> {
    let plain = |e: u32| -> f64 {
        if e % 2 == 1 {
            0.0
        } else {
            2.0 * h.powi(e as i32 + 1) / (e + 1) as f64
        }
    };
    let wh = (omega * h).abs();
    let mut out = Vec::with_capacity(d as usize + 1);
    if wh < 1.0 {
        for k in 0..=d {
            // Σ_l (iω)^l / l! · ∫ t^{k+l}
            let mut s = Complex64::new(0.0, 0.0);
            let mut fac = Complex64::new(1.0, 0.0);
            for l in 0..60u32 {
                s += fac * plain(k + l);
                let bound = fac.norm() * 2.0 * h.powi((k + l) as i32 + 1);
                if l > 2 && bound < 1e-18 * s.norm().max(1e-300) {
                    break;
                }
                fac = fac * Complex64::new(0.0, omega) / (l + 1) as f64;
            }
            out.push(s);
        }
    } else {
        let iw = Complex64::new(0.0, omega);
        let ep = Complex64::from_polar(1.0, omega * h);
        let em = ep.conj();
        out.push(Complex64::new(2.0 * (omega * h).sin() / omega, 0.0));
        for k in 1..=d {
            let hk = h.powi(k as i32);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let boundary = (ep * hk - em * (sign * hk)) / iw;
            let prev = out[(k - 1) as usize];
            out.push(boundary - prev * (k as f64) / iw);
        }
    }
    out
}

/// `‖f‖²`.
pub fn norm_sq(f: &FunctionSpec, plan: &QuadPlan) -> Result<f64> {
    Ok(inner_product(f, f, plan)?.re)
}

/// `‖f · χ_S‖²` for piecewise `f` and a union of intervals `S`.
fn restricted_norm_sq(f: &Integrand, intervals: &[(f64, f64)], plan: &QuadPlan) -> Result<f64> {
    let Some((lo, hi)) = f.support() else {
        return Ok(0.0);
    };
    let mut acc = 0.0;
    for &(a, b) in intervals {
        let (a, b) = (a.max(lo), b.min(hi));
        if a >= b {
            continue;
        }
        let restricted = Integrand { pieces: clip_pieces(&f.pieces, a, b), gaussians: vec![] };
        acc += inner_product_integrands(&restricted, &restricted, plan)?.re;
    }
    Ok(acc)
}

fn clip_pieces(pieces: &[Piece], a: f64, b: f64) -> Vec<Piece> {
    pieces
        .iter()
        .filter_map(|p| {
            let (lo, hi) = (p.a.max(a), p.b.min(b));
            (lo < hi).then(|| Piece { a: lo, b: hi, terms: p.terms.clone() })
        })
        .collect()
}

fn gaussian_clipped_norm_sq(g: &Gaussian, a: f64, b: f64) -> f64 {
    // ∫_a^b |amp|² e^{-(x-c)²/σ²} dx = |amp|² σ √π / 2 · (erf((b-c)/σ) - erf((a-c)/σ))
    let s = g.sigma;
    g.amp.norm_sqr() * s * PI.sqrt() * 0.5 * (erf((b - g.center) / s) - erf((a - g.center) / s))
}

/// Squared norm of `f` restricted to a union of intervals, Gaussians handled analytically.
pub fn mass_on(f: &Integrand, intervals: &[(f64, f64)], plan: &QuadPlan) -> Result<f64> {
    if f.gaussians.is_empty() {
        return restricted_norm_sq(f, intervals, plan);
    }
    // Triangle inequality bound: (‖pieces χ‖ + Σ‖g χ‖)².
    let only_pieces = Integrand { pieces: f.pieces.clone(), gaussians: vec![] };
    let mut total = 0.0;
    for &(a, b) in intervals {
        if a >= b {
            continue;
        }
        let mut r = restricted_norm_sq(&only_pieces, &[(a, b)], plan)?.sqrt();
        for g in &f.gaussians {
            r += gaussian_clipped_norm_sq(g, a, b).max(0.0).sqrt();
        }
        total += r * r;
    }
    Ok(total)
}

fn overlaps(f: &Option<(f64, f64)>, a: f64, b: f64) -> bool {
    match f {
        Some((lo, hi)) => *lo < b && a < *hi,
        None => false,
    }
}

/// Translation-model coordinates of `f` inside the window, by direct integration.
///
/// The reported tail is `max(0, ‖f‖² − Σ|coords|²)`.
pub fn oracle_f_coords(f: &FunctionSpec, family: BasisFamily, w: &Window, plan: &QuadPlan) -> Result<Windowed<FCoordVec>> {
    let fi = f.integrand()?;
    let support = fi.support();
    let mut jobs = Vec::new();
    for n in w.trans_range.iter() {
        if !overlaps(&support, n as f64, n as f64 + 1.0) {
            continue;
        }
        for label in w.trans_labels.iter() {
            family.check_label(label)?;
            if family == BasisFamily::Haar {
                if let Some((p, q)) = crate::bases::haar_level(label) {
                    let a = n as f64 + q as f64 * pow2(-(p as i64));
                    if !overlaps(&support, a, a + pow2(-(p as i64))) {
                        continue;
                    }
                }
            }
            jobs.push(TransIndex::new(label, n));
        }
    }
    let entries: Result<Vec<(TransIndex, Complex64)>> = jobs
        .par_iter()
        .map(|&t| {
            let l = Integrand { pieces: crate::bases::basis_l_pieces(family, t)?, gaussians: vec![] };
            Ok((t, inner_product_integrands(&fi, &l, plan)?))
        })
        .collect();
    let mut v = FCoordVec::from_entries(entries?);
    v.prune(DROP_THRESHOLD);
    let total = inner_product_integrands(&fi, &fi, plan)?.re;
    let tail_sq = (total - v.norm_sq()).max(0.0);
    Ok(Windowed { value: v, tail_sq })
}

/// Dilation-model coordinates of `f` inside the window, by direct integration.
///
/// The reported tail bounds the mass at scales outside `dil_range`:
/// `‖f χ_{|x|<2^{-m_max}}‖² + ‖f χ_{|x|≥2^{1-m_min}}‖²`.
pub fn oracle_g_coords(f: &FunctionSpec, family: BasisFamily, w: &Window, plan: &QuadPlan) -> Result<Windowed<GCoordVec>> {
    let fi = f.integrand()?;
    let support = fi.support();
    let mut jobs = Vec::new();
    for sign in Sign::BOTH {
        for m in w.dil_range.iter() {
            let (a, b) = support_k(DilIndex::new(sign, 0, m));
            if !overlaps(&support, a, b) {
                continue;
            }
            for label in w.dil_labels.iter() {
                family.check_label(label)?;
                jobs.push(DilIndex::new(sign, label, m));
            }
        }
    }
    let entries: Result<Vec<(DilIndex, Complex64)>> = jobs
        .par_iter()
        .map(|&d| {
            let k = Integrand { pieces: crate::bases::basis_k_pieces(family, d)?, gaussians: vec![] };
            Ok((d, inner_product_integrands(&fi, &k, plan)?))
        })
        .collect();
    let mut v = GCoordVec::from_entries(entries?);
    v.prune(DROP_THRESHOLD);
    let inner = pow2(-w.dil_range.hi);
    let outer = pow2(1 - w.dil_range.lo);
    let tail_sq = mass_on(&fi, &[(-inner, inner), (f64::NEG_INFINITY, -outer), (outer, f64::INFINITY)], plan)?;
    Ok(Windowed { value: v, tail_sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::Preset;
    use crate::model::IndexRange;
    use proptest::prelude::*;

    fn ip(f: &FunctionSpec, g: &FunctionSpec) -> Complex64 {
        inner_product(f, g, &QuadPlan::default()).unwrap()
    }

    #[test]
    fn trivial_products() {
        let phi = FunctionSpec::haar_scaling();
        let psi = FunctionSpec::haar_wavelet();
        assert!((ip(&phi, &phi) - 1.0).norm() < 1e-15);
        assert!(ip(&psi, &phi).norm() < 1e-15);
    }

    #[test]
    fn exponential_against_dilated_exponential() {
        let l = FunctionSpec::BasisL(BasisFamily::Exponential, TransIndex::new(1, 0));
        let k = FunctionSpec::BasisK(BasisFamily::Exponential, DilIndex::plus(0, 1));
        let v = ip(&l, &k);
        let expected = Complex64::new(0.0, -(2f64.sqrt()) / PI);
        assert!((v - expected).norm() < 1e-14, "{v}");
        assert!((v.im + 0.45016).abs() < 1e-5);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn term_integration_branches_agree() {
        // Straddle the series/closed-form switch and compare with GL.
        for &lambda in &[0.0, 0.01, 0.3, 0.318, 0.319, 1.0, 7.5, 64.0] {
            for d in 0..4 {
                let exact = integrate_term(Complex64::new(1.0, 0.5), d, lambda, 0.25, 1.75);
                let f = |x: f64| Complex64::new(1.0, 0.5) * x.powi(d as i32) * Complex64::from_polar(1.0, 2.0 * PI * lambda * x);
                let mut budget = 1000;
                let num = integrate_adaptive(&f, 0.25, 1.75, 0.05, &[], 16, 1e-12, &mut budget, 1000).unwrap();
                assert!((exact - num).norm() < 1e-11, "λ={lambda} d={d}: {exact} vs {num}");
            }
        }
    }

    #[test]
    fn gauss_legendre_weights() {
        let nodes = gauss_legendre_nodes(16);
        let s: f64 = nodes.iter().map(|n| n.1).sum();
        assert!((s - 2.0).abs() < 1e-14);
        let x8: f64 = nodes.iter().map(|(x, w)| w * x.powi(8)).sum();
        assert!((x8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_norm_and_plan() {
        let g = FunctionSpec::gaussian(0.5);
        let n = norm_sq(&g, &QuadPlan::default()).unwrap();
        assert!((n - 0.5 * PI.sqrt()).abs() < 1e-10, "{n}");
        assert_eq!(inner_product(&g, &g, &QuadPlan::exact()), Err(Error::UnboundedSupport));
        let c = ip(&g, &FunctionSpec::haar_scaling());
        // ∫_0^1 e^{-2x²} dx = √(π/8) erf(√2)
        let expected = (PI / 8.0).sqrt() * erf(2f64.sqrt());
        assert!((c.re - expected).abs() < 1e-10);
    }

    #[test]
    fn oracle_coordinate_examples() {
        let plan = QuadPlan::default();
        let w = Window::symmetric(BasisFamily::Haar, 3);
        let v = oracle_f_coords(&FunctionSpec::haar_wavelet(), BasisFamily::Haar, &w, &plan).unwrap().value;
        assert_eq!(v, FCoordVec::unit(TransIndex::new(1, 0)));
        let we = Window::symmetric(BasisFamily::Exponential, 4);
        let v = oracle_f_coords(&FunctionSpec::indicator(0.0, 3.0), BasisFamily::Exponential, &we, &plan).unwrap().value;
        let expected = FCoordVec::from_entries((0..3).map(|n| (TransIndex::new(0, n), Complex64::new(1.0, 0.0))));
        assert!(v.max_abs_diff(&expected).0 < 1e-14);
        assert!(oracle_f_coords(&FunctionSpec::Zero, BasisFamily::Haar, &w, &plan).unwrap().value.is_empty());
        assert!(oracle_g_coords(&FunctionSpec::Zero, BasisFamily::Haar, &w, &plan).unwrap().value.is_empty());
    }

    #[test]
    fn oracle_g_of_haar_wavelet() {
        let plan = QuadPlan::default();
        let w = Window::symmetric(BasisFamily::Haar, 2).with_m_max(20);
        let out = oracle_g_coords(&FunctionSpec::haar_wavelet(), BasisFamily::Haar, &w, &plan).unwrap();
        let mut expected = GCoordVec::new();
        expected.set(DilIndex::plus(0, 1), Complex64::new(-(0.5f64.sqrt()), 0.0));
        for m in 2..=20 {
            expected.set(DilIndex::plus(0, m), Complex64::new(pow2(-m).sqrt(), 0.0));
        }
        assert!(out.value.max_abs_diff(&expected).0 < 1e-14);
        assert!((out.tail_sq - pow2(-20)).abs() < 1e-15);
        let v = oracle_g_coords(&FunctionSpec::indicator(1.0, 2.0), BasisFamily::Haar, &w, &plan).unwrap().value;
        assert_eq!(v, GCoordVec::unit(DilIndex::plus(0, 0)));
    }

    #[test]
    fn unit_norms_of_basis_functions() {
        let plan = QuadPlan::exact();
        for fam in [BasisFamily::Haar, BasisFamily::Exponential] {
            for label in 0..12 {
                for nm in -3..4 {
                    let l = FunctionSpec::BasisL(fam, TransIndex::new(label, nm));
                    assert!((norm_sq(&l, &plan).unwrap() - 1.0).abs() < 1e-10);
                    for sign in Sign::BOTH {
                        let k = FunctionSpec::BasisK(fam, DilIndex::new(sign, label, nm));
                        assert!((norm_sq(&k, &plan).unwrap() - 1.0).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn parseval_on_compact_support() {
        let plan = QuadPlan::default();
        let f = FunctionSpec::parse("piecewise[(-1,1/4):1+x; (1/4,2):-3/2^2*x^2]").unwrap();
        let w = Window::symmetric(BasisFamily::Haar, 8).with_trans_range(-2, 3).unwrap();
        let out = oracle_f_coords(&f, BasisFamily::Haar, &w, &plan).unwrap();
        // the polynomial part is not in a finite Haar span; the tail shrinks like 4^-levels
        assert!(out.tail_sq < 1e-5);
        let g = FunctionSpec::parse("piecewise[(-1,1/4):1; (1/4,2):-3/4]").unwrap();
        let out = oracle_f_coords(&g, BasisFamily::Haar, &Window::symmetric(BasisFamily::Haar, 3), &plan).unwrap();
        assert!((out.value.norm_sq() - norm_sq(&g, &plan).unwrap()).abs() < 1e-10);
        let _ = IndexRange::symmetric(1);
    }

    fn arb_piecewise() -> impl Strategy<Value = FunctionSpec> {
        prop::collection::vec((-8i64..8, 1i64..4, prop::collection::vec(-2.0f64..2.0, 1..4)), 1..4).prop_map(|v| {
            let mut pieces = Vec::new();
            let mut cursor = -4.0;
            for (gap, len, coeffs) in v {
                let a = cursor + (gap.rem_euclid(3)) as f64 * 0.25;
                let b = a + len as f64 * 0.5;
                cursor = b;
                pieces.push((a, b, coeffs.into_iter().map(|c| Complex64::new(c, 0.0)).collect()));
            }
            FunctionSpec::Piecewise(pieces)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn hermitian_symmetry(f in arb_piecewise(), g in arb_piecewise(), lab in 0i64..6, n in -3i64..3) {
            let a = ip(&f, &g);
            let b = ip(&g, &f);
            prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
            let l = FunctionSpec::BasisL(BasisFamily::Exponential, TransIndex::new(lab, n));
            let a = ip(&f, &l);
            let b = ip(&l, &f);
            prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn linearity(f in arb_piecewise(), g in arb_piecewise(), a in -2.0f64..2.0, b in -2.0f64..2.0, lab in 0i64..6) {
            let h = FunctionSpec::BasisK(BasisFamily::Haar, DilIndex::plus(lab, -1));
            let comb = FunctionSpec::Combination(vec![(Complex64::new(a, 0.0), f.clone()), (Complex64::new(b, 0.0), g.clone())]);
            let lhs = ip(&comb, &h);
            let rhs = ip(&f, &h) * a + ip(&g, &h) * b;
            prop_assert!((lhs - rhs).norm() <= 1e-10);
        }

        #[test]
        fn gaussian_matches_exact_on_shifted_copies(sigma in 0.2f64..2.0, c in -2.0f64..2.0) {
            let g = FunctionSpec::Preset(Preset::Gaussian { sigma, center: c });
            let n = norm_sq(&g, &QuadPlan::default()).unwrap();
            prop_assert!((n - sigma * PI.sqrt()).abs() <= 1e-9);
        }
    }
}
