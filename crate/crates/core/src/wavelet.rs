//! Coordinate tests for orthonormal wavelets and scaling functions.
//!
//! Orthonormality of `{D^p T^q ψ}` is evaluated twice: once as the literal
//! triple sum over `α`, once as the inner product `(ψ, D^p T^q ψ)` in the
//! dilation model. Completeness is a finite-window rank test.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;

use crate::alpha::{f_from_g, g_from_f, AlphaMatrix};
use crate::error::{Error, Result};
use crate::group_action::{act_dt_on_g, shift_t};
use crate::model::{CheckReport, Detail, DilIndex, FCoordVec, GCoordVec, IndexRange, Sign, TransIndex, Window};

type PqValue = ((i64, i64), Complex64);

/// Routes are expected to agree to this level on every candidate.
pub const ROUTE_AGREEMENT: f64 = 1e-8;

/// Rectangle of `(p, q)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PqRange {
    pub p: IndexRange,
    pub q: IndexRange,
}

impl PqRange {
    pub fn square(r: i64) -> Self {
        PqRange { p: IndexRange::symmetric(r), q: IndexRange::symmetric(r) }
    }

    pub fn pairs(&self) -> Vec<(i64, i64)> {
        self.p.iter().flat_map(|p| self.q.iter().map(move |q| (p, q))).collect()
    }
}

impl Default for PqRange {
    fn default() -> Self {
        PqRange::square(3)
    }
}

fn delta(p: i64, q: i64) -> Complex64 {
    Complex64::new(if p == 0 && q == 0 { 1.0 } else { 0.0 }, 0.0)
}

/// `Σ_{s,j,m} ψ̃^(m) Σ_{i,n} conj(α_{i,n}^{s,j,m-p}) Σ_{r,k,l} α_{i,n-q}^{r,k,l} conj(ψ̃^(l))` for every pair.
pub fn orthonormality_triple_sum(psi: &GCoordVec, a: &AlphaMatrix, pq: &PqRange, w: &Window) -> Result<Vec<((i64, i64), Complex64)>> {
    // innermost sum, one α column per coordinate of ψ
    let mut inner: HashMap<TransIndex, Complex64> = HashMap::new();
    for (d, c) in psi.iter() {
        for (t, al) in a.column(*d, w)?.value {
            *inner.entry(t).or_default() += al * c.conj();
        }
    }
    let entries: Vec<(DilIndex, Complex64)> = psi.iter().map(|(d, c)| (*d, *c)).collect();
    let per_p: Result<Vec<Vec<PqValue>>> = pq
        .p
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&p| {
            let cols: Vec<(Complex64, Vec<(TransIndex, Complex64)>)> = entries
                .iter()
                .map(|(d, c)| Ok((*c, a.column(DilIndex::new(d.sign, d.label, d.m - p), w)?.value)))
                .collect::<Result<_>>()?;
            Ok(pq
                .q
                .iter()
                .map(|q| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (c, col) in &cols {
                        let mut s = Complex64::new(0.0, 0.0);
                        for (t, al) in col {
                            if let Some(u) = inner.get(&TransIndex::new(t.label, t.n - q)) {
                                s += al.conj() * u;
                            }
                        }
                        acc += c * s;
                    }
                    ((p, q), acc)
                })
                .collect())
        })
        .collect();
    Ok(per_p?.into_iter().flatten().collect())
}

/// `(ψ, D^p T^q ψ)` through the group action on dilation coordinates.
pub fn orthonormality_inner_products(psi: &GCoordVec, a: &AlphaMatrix, pq: &PqRange, w: &Window) -> Result<Vec<((i64, i64), Complex64)>> {
    pq.pairs()
        .par_iter()
        .map(|&(p, q)| Ok(((p, q), psi.inner(&act_dt_on_g(psi, p, q, a, w)?.value))))
        .collect()
}

pub fn check_wavelet_orthonormality(psi: &GCoordVec, a: &AlphaMatrix, pq: &PqRange, w: &Window, tol: f64) -> Result<CheckReport> {
    let lit = orthonormality_triple_sum(psi, a, pq, w)?;
    let ip = orthonormality_inner_products(psi, a, pq, w)?;
    let mut route_diff = 0.0f64;
    let details = lit
        .iter()
        .zip(&ip)
        .map(|(((p, q), v), (_, u))| {
            route_diff = route_diff.max((v - u).norm());
            Detail::new(format!("(p={p},q={q})"), (v - delta(*p, *q)).norm())
        })
        .collect();
    let escaped = f_from_g(psi, a, w)?.tail_sq;
    Ok(CheckReport::from_details("wavelet_orthonormality", tol, Some(*w), details)
        .with_condition("routes_agree", route_diff <= ROUTE_AGREEMENT, route_diff)
        .with_metric("route_max_diff", route_diff)
        .with_metric("window_tail_sq", escaped))
}

/// Rank test shared by the general and the compact-support completeness checks.
fn rank_report(name: &str, m: &DMatrix<Complex64>, threshold: f64, w: Option<Window>) -> CheckReport {
    let cols = m.ncols();
    let sv: Vec<f64> = if m.nrows() == 0 || cols == 0 { vec![0.0; cols] } else { m.clone().svd(false, false).singular_values.iter().cloned().collect() };
    let rank = sv.iter().filter(|s| **s > threshold).count();
    let near = sv.iter().any(|s| *s > threshold / 10.0 && *s <= threshold * 10.0);
    let mut r = CheckReport::from_details(name, threshold, w, vec![Detail::new("rank_deficit", (cols - rank) as f64)])
        .with_condition("full_rank", rank == cols, rank as f64)
        .with_metric("rank", rank as f64)
        .with_metric("cardinality", cols as f64)
        .with_metric("rows", m.nrows() as f64)
        .with_metric("min_singular_value", sv.iter().cloned().fold(f64::INFINITY, f64::min))
        .with_note("necessary-condition check at window W, not a proof of completeness");
    for (i, s) in sv.iter().enumerate() {
        r = r.with_metric(format!("singular_value_{i:02}"), *s);
    }
    if near {
        r = r.with_note("a singular value lies within a factor 10 of the rank threshold").mark_inconclusive();
    }
    r
}

/// Rows `(m, q)` with `|m|, |q| <= radius`, columns `(s, j)` in `f_set`, entries
/// `Σ_{i,n} conj(α_{i,n}^{s,j,m}) Σ_{r,k,l} α_{i,n-q}^{r,k,l} conj(ψ̃^(l))`.
pub fn completeness_matrix(psi: &GCoordVec, a: &AlphaMatrix, f_set: &[(Sign, i64)], radius: i64, w: &Window) -> Result<DMatrix<Complex64>> {
    let fhat = f_from_g(psi, a, w)?.value;
    let lo = f_set.iter().map(|x| x.1).min().unwrap_or(0).min(w.dil_labels.lo);
    let hi = f_set.iter().map(|x| x.1).max().unwrap_or(0).max(w.dil_labels.hi);
    let rw = w.with_dil_labels(lo, hi)?.with_dil_range(w.dil_range.lo.min(-radius), w.dil_range.hi.max(radius))?;
    let qs: Vec<i64> = IndexRange::symmetric(radius).iter().collect();
    let blocks: Result<Vec<GCoordVec>> = qs.par_iter().map(|&q| Ok(g_from_f(&shift_t(&fhat, q), a, &rw)?.value)).collect();
    let blocks = blocks?;
    let ms: Vec<i64> = IndexRange::symmetric(radius).iter().collect();
    let mut m = DMatrix::zeros(ms.len() * qs.len(), f_set.len());
    for (bi, g) in blocks.iter().enumerate() {
        for (mi, &mm) in ms.iter().enumerate() {
            for (c, &(s, j)) in f_set.iter().enumerate() {
                m[(mi * qs.len() + bi, c)] = g.get(&DilIndex::new(s, j, mm)).conj();
            }
        }
    }
    Ok(m)
}

pub fn check_wavelet_completeness(psi: &GCoordVec, a: &AlphaMatrix, f_set: &[(Sign, i64)], radius: i64, w: &Window, rank_threshold: f64) -> Result<CheckReport> {
    for &(_, j) in f_set {
        a.family().check_label(j)?;
    }
    let m = completeness_matrix(psi, a, f_set, radius, w)?;
    Ok(rank_report("wavelet_completeness", &m, rank_threshold, Some(*w)).with_metric("row_radius", radius as f64))
}

/// Coordinates `ψ̃_{+,j}^(0)` of a candidate supported in `[1, 2]`; errors on anything else.
fn plus_row(psi: &GCoordVec) -> Result<Vec<(i64, Complex64)>> {
    psi.iter()
        .map(|(d, c)| {
            if d.sign == Sign::Plus && d.m == 0 {
                Ok((d.label, *c))
            } else {
                Err(Error::OutsideSlice(format!("coordinate {d} is outside the (+, j, 0) slice")))
            }
        })
        .collect()
}

/// Compact-support specialization: `Σ_j conj(ψ̃_j) Σ_k α_{k,1+q}^{+,j,-p} ψ̃_k = δ_p δ_q`
/// plus the rank test with entries `Σ_k α_{k,1+q}^{s,j,m} ψ̃_k`.
///
/// The specialized sum is the complex conjugate of the general one; the
/// report carries the largest difference between the two as `collapse_max_diff`.
#[allow(clippy::too_many_arguments)]
pub fn check_example1(
    psi: &GCoordVec,
    a: &AlphaMatrix,
    pq: &PqRange,
    f_set: &[(Sign, i64)],
    radius: i64,
    w: &Window,
    tol: f64,
    rank_threshold: f64,
) -> Result<CheckReport> {
    let row = plus_row(psi)?;
    let pairs = pq.pairs();
    let sums: Result<Vec<Complex64>> = pairs
        .par_iter()
        .map(|&(p, q)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(j, cj) in &row {
                let mut s = Complex64::new(0.0, 0.0);
                for &(k, ck) in &row {
                    s += a.entry(TransIndex::new(k, 1 + q), DilIndex::plus(j, -p))? * ck;
                }
                acc += cj.conj() * s;
            }
            Ok(acc)
        })
        .collect();
    let sums = sums?;
    let general = orthonormality_triple_sum(psi, a, pq, w)?;
    let collapse = sums.iter().zip(&general).map(|(s, (_, g))| (s - g.conj()).norm()).fold(0.0, f64::max);
    let details = pairs.iter().zip(&sums).map(|((p, q), s)| Detail::new(format!("(p={p},q={q})"), (s - delta(*p, *q)).norm())).collect();
    let ortho = CheckReport::from_details("orthonormality", tol, Some(*w), details)
        .with_condition("collapse_matches_general_form", collapse <= ROUTE_AGREEMENT, collapse)
        .with_metric("collapse_max_diff", collapse);

    let mut m = DMatrix::zeros(((2 * radius + 1) * (2 * radius + 1)) as usize, f_set.len());
    for (mi, mm) in IndexRange::symmetric(radius).iter().enumerate() {
        for (qi, q) in IndexRange::symmetric(radius).iter().enumerate() {
            for (c, &(s, j)) in f_set.iter().enumerate() {
                let mut v = Complex64::new(0.0, 0.0);
                for &(k, ck) in &row {
                    v += a.entry(TransIndex::new(k, 1 + q), DilIndex::new(s, j, mm))? * ck;
                }
                m[(mi * (2 * radius + 1) as usize + qi, c)] = v;
            }
        }
    }
    let rank = rank_report("completeness", &m, rank_threshold, Some(*w));
    Ok(CheckReport::combine("example1", tol, Some(*w), vec![ortho, rank]))
}

/// Autocorrelation `r_k = Σ_{i,n} φ̂_i^(n) conj(φ̂_i^(n-k))` for every lag with a nonzero term.
pub fn autocorrelation(phi: &FCoordVec) -> Vec<(i64, Complex64)> {
    let (lo, hi) = match (phi.keys().map(|t| t.n).min(), phi.keys().map(|t| t.n).max()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Vec::new(),
    };
    (lo - hi..=hi - lo).map(|k| (k, phi.inner(&shift_t(phi, k)))).collect()
}

/// `Σ_{i,n} φ̂_i^(n) conj(φ̂_i^(n-k)) = δ_k` for `k` in `k_range`.
///
/// Cross-checked against `‖φ̂(ω)‖² = Σ_k r_k ω^k` sampled at 256 points.
pub fn check_scaling_coordinate_identity(phi: &FCoordVec, k_range: IndexRange, tol: f64) -> CheckReport {
    let details: Vec<Detail> = k_range
        .iter()
        .map(|k| {
            let r = phi.inner(&shift_t(phi, k));
            let target = if k == 0 { 1.0 } else { 0.0 };
            Detail::new(format!("k={k}"), (r - target).norm())
        })
        .collect();
    let ac = autocorrelation(phi);
    let samples = 256;
    let dev = (0..samples)
        .map(|d| {
            let t = d as f64 / samples as f64;
            let v: Complex64 = ac.iter().map(|(k, r)| r * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t * *k as f64)).sum();
            (v - 1.0).norm()
        })
        .fold(0.0, f64::max);
    let report = CheckReport::from_details("scaling_coordinate_identity", tol, None, details);
    let lags = ac.len().max(1) as f64;
    let sampled_pass = dev <= tol * lags;
    let outside: f64 = ac.iter().filter(|(k, _)| !k_range.contains(*k)).map(|(_, r)| r.norm()).sum();
    let agree = sampled_pass == report.pass || (report.pass && outside > tol);
    report
        .with_condition("trig_poly_route_agrees", agree, dev)
        .with_metric("max_norm_deviation_sampled", dev)
        .with_metric("autocorrelation_mass_outside_k_range", outside)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::BasisFamily;
    use crate::model::Verdict;

    fn haar() -> AlphaMatrix {
        AlphaMatrix::new(BasisFamily::Haar)
    }

    fn haar_window() -> Window {
        Window::symmetric(BasisFamily::Haar, 6).with_m_max(48).with_trans_range(-64, 64).unwrap()
    }

    fn g_of(f: FCoordVec) -> GCoordVec {
        g_from_f(&f, &haar(), &haar_window()).unwrap().value
    }

    #[test]
    fn haar_wavelet_is_orthonormal() {
        let psi = g_of(FCoordVec::unit(TransIndex::new(1, 0)));
        let r = check_wavelet_orthonormality(&psi, &haar(), &PqRange::square(3), &haar_window(), 1e-10).unwrap();
        assert!(r.pass, "{} {:?}", r.max_residual, r.conditions);
        // translates of wavelets are wavelets
        let shifted = g_of(FCoordVec::unit(TransIndex::new(1, 3)));
        assert!(check_wavelet_orthonormality(&shifted, &haar(), &PqRange::square(2), &haar_window(), 1e-10).unwrap().pass);
    }

    #[test]
    fn haar_scaling_is_not_a_wavelet() {
        let phi = g_of(FCoordVec::unit(TransIndex::new(0, 0)));
        let r = check_wavelet_orthonormality(&phi, &haar(), &PqRange::square(3), &haar_window(), 1e-10).unwrap();
        assert!(!r.pass);
        let v = r.residual("(p=1,q=0)").unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert!(r.conditions.iter().all(|c| c.holds));
        let z = check_wavelet_orthonormality(&GCoordVec::new(), &haar(), &PqRange::square(1), &haar_window(), 1e-10).unwrap();
        assert_eq!(z.residual("(p=0,q=0)"), Some(1.0));
    }

    #[test]
    fn haar_completeness() {
        let psi = g_of(FCoordVec::unit(TransIndex::new(1, 0)));
        let f = [(Sign::Plus, 0), (Sign::Plus, 1), (Sign::Plus, 4), (Sign::Minus, 0), (Sign::Minus, 3)];
        let r = check_wavelet_completeness(&psi, &haar(), &f, 6, &haar_window(), 1e-8).unwrap();
        assert!(r.pass, "{:?}", r.metrics);
        let z = check_wavelet_completeness(&GCoordVec::new(), &haar(), &f[..1], 6, &haar_window(), 1e-8).unwrap();
        assert!(!z.pass);
        assert_eq!(z.metrics["rank"], 0.0);
        // translates of dilated indicators never reach (+, 4) inside the window
        let chi = GCoordVec::unit(DilIndex::plus(0, 0));
        let r = check_wavelet_completeness(&chi, &haar(), &[(Sign::Plus, 0), (Sign::Plus, 4)], 6, &haar_window(), 1e-8).unwrap();
        assert!(!r.pass);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.metrics["rank"], 1.0);
    }

    #[test]
    fn example1_cases() {
        let f = [(Sign::Plus, 0), (Sign::Plus, 1), (Sign::Minus, 1)];
        let w = haar_window();
        let shifted = GCoordVec::unit(DilIndex::plus(1, 0));
        let r = check_example1(&shifted, &haar(), &PqRange::square(3), &f, 6, &w, 1e-10, 1e-8).unwrap();
        assert!(r.pass, "{:?}", r.details.iter().filter(|d| d.residual > 1e-10).collect::<Vec<_>>());
        let chi = GCoordVec::unit(DilIndex::plus(0, 0));
        let r = check_example1(&chi, &haar(), &PqRange::square(3), &f, 6, &w, 1e-10, 1e-8).unwrap();
        assert!(!r.pass);
        assert!(r.conditions.iter().find(|c| c.name.ends_with("collapse_matches_general_form")).unwrap().holds);
        let r = check_example1(&GCoordVec::new(), &haar(), &PqRange::square(1), &f, 2, &w, 1e-10, 1e-8).unwrap();
        assert_eq!(r.residual("orthonormality:(p=0,q=0)"), Some(1.0));
        let bad = GCoordVec::unit(DilIndex::plus(0, 1));
        assert!(matches!(check_example1(&bad, &haar(), &PqRange::square(1), &f, 2, &w, 1e-10, 1e-8), Err(Error::OutsideSlice(_))));
    }

    #[test]
    fn scaling_identity_examples() {
        let r = check_scaling_coordinate_identity(&FCoordVec::unit(TransIndex::new(0, 0)), IndexRange::symmetric(4), 1e-15);
        assert!(r.pass);
        assert_eq!(r.max_residual, 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let two = FCoordVec::from_entries([(TransIndex::new(0, 0), Complex64::new(h, 0.0)), (TransIndex::new(0, 1), Complex64::new(h, 0.0))]);
        let r = check_scaling_coordinate_identity(&two, IndexRange::symmetric(4), 1e-12);
        assert!(!r.pass);
        assert!((r.residual("k=1").unwrap() - 0.5).abs() < 1e-15);
        assert!(r.conditions[0].holds);
        let z = check_scaling_coordinate_identity(&FCoordVec::new(), IndexRange::symmetric(2), 1e-12);
        assert_eq!(z.residual("k=0"), Some(1.0));
    }
}
