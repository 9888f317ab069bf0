//! Two-scale filters as Laurent polynomials `h(ω) = Σ_k h_k ω^k`, the
//! quadrature-mirror conditions, and the coordinate form of the two-scale
//! relation `φ = Σ_k h_k D T^k φ` in the translation model.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::alpha::{f_from_g, g_from_f, AlphaMatrix};
use crate::bases::FunctionSpec;
use crate::error::{Error, Result};
use crate::group_action::{shift_d, shift_t};
use crate::model::{CheckReport, Detail, FCoordVec, IndexRange, TransIndex, Window, Windowed, DROP_THRESHOLD};
use crate::oracle::{inner_product, QuadPlan};

/// Finitely supported `k ↦ h_k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Complex64>,
}

impl LaurentPoly {
    pub fn new() -> Self {
        Self::default()
    }

    /// Coefficients `h_start, h_start+1, ...`.
    pub fn from_real(start: i64, c: &[f64]) -> Self {
        c.iter().enumerate().map(|(i, v)| (start + i as i64, Complex64::new(*v, 0.0))).collect()
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn set(&mut self, k: i64, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(min k, max k)` of the nonzero coefficients.
    pub fn degree_range(&self) -> Option<(i64, i64)> {
        Some((*self.coeffs.keys().next()?, *self.coeffs.keys().next_back()?))
    }

    pub fn eval(&self, omega: Complex64) -> Complex64 {
        self.iter().map(|(k, c)| c * omega.powi(k as i32)).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.iter().map(|(k, c)| (k, c * a)).collect()
    }

    /// `Σ_k self_{k+l} conj(other_k)`.
    pub fn correlation(&self, other: &LaurentPoly, l: i64) -> Complex64 {
        other.iter().map(|(k, c)| self.get(k + l) * c.conj()).sum()
    }

    /// `{"k": [re, im]}` with integer keys.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, c) in self.iter() {
            m.insert(k.to_string(), Value::Array(vec![Value::from(c.re), Value::from(c.im)]));
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("filter must be a JSON object {k: [re, im]}".into()))?;
        let mut out = LaurentPoly::new();
        for (key, val) in obj {
            let k: i64 = key.trim().parse().map_err(|_| Error::Parse(format!("filter key '{key}' is not an integer")))?;
            let pair = val.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::Parse(format!("filter entry {key} must be [re, im]")))?;
            let re = pair[0].as_f64().ok_or_else(|| Error::Parse(format!("filter entry {key}: bad real part")))?;
            let im = pair[1].as_f64().ok_or_else(|| Error::Parse(format!("filter entry {key}: bad imaginary part")))?;
            out.set(k, Complex64::new(re, im));
        }
        Ok(out)
    }
}

impl FromIterator<(i64, Complex64)> for LaurentPoly {
    fn from_iter<T: IntoIterator<Item = (i64, Complex64)>>(iter: T) -> Self {
        let mut p = LaurentPoly::new();
        for (k, c) in iter {
            let v = p.get(k) + c;
            p.set(k, v);
        }
        p
    }
}

pub fn haar_filter() -> LaurentPoly {
    LaurentPoly::from_real(0, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2])
}

/// Daubechies filter with two vanishing moments.
pub fn daubechies4_filter() -> LaurentPoly {
    let s3 = 3f64.sqrt();
    let d = 4.0 * SQRT_2;
    LaurentPoly::from_real(0, &[(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d])
}

/// `h_k = (φ, φ_{1,k})` with `φ_{1,k} = D T^k φ`.
pub fn extract_two_scale(phi: &FunctionSpec, k_range: IndexRange, plan: &QuadPlan) -> Result<LaurentPoly> {
    if !phi.is_compact() {
        return Err(Error::UnboundedSupport);
    }
    let ks: Vec<i64> = k_range.iter().collect();
    let vals: Result<Vec<(i64, Complex64)>> = ks
        .par_iter()
        .map(|&k| Ok((k, inner_product(phi, &phi.clone().dilate_translate(1, k), plan)?)))
        .collect();
    Ok(vals?.into_iter().filter(|(_, c)| c.norm() > DROP_THRESHOLD).collect())
}

/// `n` values for which `Σ_k h_{k+2n} conj(h_k)` can be nonzero.
pub fn default_n_range(h: &LaurentPoly) -> IndexRange {
    let r = h.degree_range().map(|(a, b)| (b - a + 1) / 2).unwrap_or(0);
    IndexRange::symmetric(r.max(1))
}

fn unit(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * theta)
}

/// `Σ_k conj(h_k) h_{k+2n} = δ_n`, and `|h(ω)|² + |h(-ω)|² = 2` on 1024 points.
///
/// The sampled sum equals `2 Σ_n a_{2n} ω^{2n}` with `a_l = Σ_k h_{k+l} conj(h_k)`;
/// the largest gap between the two is reported as `route_max_diff`.
pub fn check_filter_orthogonality(h: &LaurentPoly, n_range: IndexRange, tol: f64) -> CheckReport {
    let mut details: Vec<Detail> = n_range
        .iter()
        .map(|n| {
            let target = if n == 0 { 1.0 } else { 0.0 };
            Detail::new(format!("coeff:n={n}"), (h.correlation(h, 2 * n) - target).norm())
        })
        .collect();
    let samples = 1024;
    let (lo, hi) = h.degree_range().unwrap_or((0, 0));
    let span = (hi - lo + 1) / 2 + 1;
    let even: Vec<(i64, Complex64)> = (-span..=span).map(|n| (n, h.correlation(h, 2 * n))).collect();
    let mut sampled = 0.0f64;
    let mut gap = 0.0f64;
    for d in 0..samples {
        let w = unit(d as f64 / samples as f64);
        let s = h.eval(w).norm_sqr() + h.eval(-w).norm_sqr();
        let series: Complex64 = even.iter().map(|(n, a)| 2.0 * a * w.powi(2 * *n as i32)).sum();
        sampled = sampled.max((s - 2.0).abs());
        gap = gap.max((series - s).norm());
    }
    details.push(Detail::new("sampled:max", sampled));
    CheckReport::from_details("filter_orthogonality", tol, None, details)
        .with_condition("routes_agree", gap <= tol, gap)
        .with_metric("route_max_diff", gap)
        .with_metric("sampled_max_residual", sampled)
        .with_note("the unit-circle identity is sampled at 1024 points")
}

/// `g_k = (-1)^{1-k} conj(h_{2m+1-k})`, i.e. `g(ω) = ω^{2m+1} conj(h(-ω))`.
pub fn mirror_filter(h: &LaurentPoly, m: i64) -> LaurentPoly {
    h.iter()
        .map(|(j, c)| {
            let k = 2 * m + 1 - j;
            let sign = if (1 - k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            (k, c.conj() * sign)
        })
        .collect()
}

/// Orthogonality of the even shifts of `h` and `g`, the mirror identity and
/// invertibility of the modulation matrix on `grid` points.
pub fn check_pair_conditions(h: &LaurentPoly, g: &LaurentPoly, n_range: IndexRange, grid: usize, tol: f64) -> CheckReport {
    let mut details = Vec::new();
    for n in n_range.iter() {
        if n != 0 {
            details.push(Detail::new(format!("(a):n={n}"), h.correlation(h, 2 * n).norm()));
            details.push(Detail::new(format!("(b):n={n}"), g.correlation(g, 2 * n).norm()));
        }
        details.push(Detail::new(format!("(c):n={n}"), h.correlation(g, 2 * n).norm()));
    }
    let grid = grid.max(2);
    let mut mirror = 0.0f64;
    let mut min_det = f64::INFINITY;
    let mut max_det = 0.0f64;
    for d in 0..grid {
        let w = unit(d as f64 / grid as f64);
        let (hp, hm, gp, gm) = (h.eval(w), h.eval(-w), g.eval(w), g.eval(-w));
        mirror = mirror.max((gp * hp.conj() + gm * hm.conj()).norm());
        let det = (hp * gm - hm * gp).norm();
        min_det = min_det.min(det);
        max_det = max_det.max(det);
    }
    details.push(Detail::new("mirror_identity:max", mirror));
    CheckReport::from_details("pair_conditions", tol, None, details)
        .with_condition("modulation_matrix_invertible", min_det > tol, min_det)
        .with_metric("min_abs_det", min_det)
        .with_metric("max_abs_det", max_det)
        .with_metric("grid", grid as f64)
        .with_note("completeness of the even shifts of h and g has no finite certificate; min_abs_det is grid evidence only")
        .with_note("passing pairs need not arise from a multiresolution analysis")
}

/// `[φ̂_{-1,0}]_i^(n) = Σ_k h_k φ̂_i^(n-k)`.
pub fn filter_action_on_coords(phi: &FCoordVec, h: &LaurentPoly) -> FCoordVec {
    let mut out = FCoordVec::new();
    for (k, c) in h.iter() {
        for (t, v) in phi.iter() {
            out.add(TransIndex::new(t.label, t.n + k), c * v);
        }
    }
    out.prune(DROP_THRESHOLD);
    out
}

/// `Σ_n x_i^(n) ω^n` for one label.
pub fn generating_function(x: &FCoordVec, label: i64, omega: Complex64) -> Complex64 {
    x.iter().filter(|(t, _)| t.label == label).map(|(t, c)| c * omega.powi(t.n as i32)).sum()
}

/// Filtering coordinates equals multiplying their generating functions by `h(ω)`, sampled at `samples` points.
pub fn check_transfer_route(phi: &FCoordVec, h: &LaurentPoly, samples: usize, tol: f64) -> CheckReport {
    let filtered = filter_action_on_coords(phi, h);
    let mut labels: Vec<i64> = phi.keys().map(|t| t.label).collect();
    labels.dedup();
    labels.sort();
    labels.dedup();
    let details = (0..samples)
        .map(|d| {
            let w = unit(d as f64 / samples as f64);
            let hw = h.eval(w);
            let worst = labels
                .iter()
                .map(|&i| (generating_function(&filtered, i, w) - hw * generating_function(phi, i, w)).norm())
                .fold(0.0, f64::max);
            Detail::new(format!("omega={d}/{samples}"), worst)
        })
        .collect();
    CheckReport::from_details("transfer_route", tol, None, details)
}

fn chain(a: f64, b: f64) -> f64 {
    let s = a.max(0.0).sqrt() + b.max(0.0).sqrt();
    s * s
}

/// `D x` through the dilation model: `f_from_g(shift_D(g_from_f(x), 1))`.
fn dilate_once(x: &FCoordVec, a: &AlphaMatrix, w: &Window) -> Result<Windowed<FCoordVec>> {
    let g = g_from_f(x, a, w)?;
    let back = f_from_g(&shift_d(&g.value, 1), a, w)?;
    Ok(Windowed { value: back.value, tail_sq: chain(g.tail_sq, back.tail_sq) })
}

/// `Σ_{s,j,m} conj(α_{p,q}^{s,j,m}) Σ_{i,n} α_{i,n}^{s,j,m-1} Σ_k f_k φ̂_i^(n-k)`.
pub fn two_scale_apply(phi: &FCoordVec, f: &LaurentPoly, a: &AlphaMatrix, w: &Window) -> Result<Windowed<FCoordVec>> {
    dilate_once(&filter_action_on_coords(phi, f), a, w)
}

/// Same sum in polyphase form `Σ_k T^k D (f_{2k} + f_{2k+1} T) φ̂`.
pub fn two_scale_apply_polyphase(phi: &FCoordVec, f: &LaurentPoly, a: &AlphaMatrix, w: &Window) -> Result<Windowed<FCoordVec>> {
    let Some((lo, hi)) = f.degree_range() else {
        return Ok(Windowed::exact(FCoordVec::new()));
    };
    let shifted = shift_t(phi, 1);
    let ks: Vec<i64> = (lo.div_euclid(2)..=hi.div_euclid(2)).collect();
    let parts: Result<Vec<Windowed<FCoordVec>>> = ks
        .par_iter()
        .map(|&k| {
            let x = phi.linear_combination(f.get(2 * k), &shifted, f.get(2 * k + 1));
            let d = dilate_once(&x, a, w)?;
            Ok(Windowed { value: shift_t(&d.value, k), tail_sq: d.tail_sq })
        })
        .collect();
    let mut out = FCoordVec::new();
    let mut tail = 0.0;
    for p in parts? {
        for (t, c) in p.value.iter() {
            out.add(*t, *c);
        }
        tail = chain(tail, p.tail_sq);
    }
    out.prune(DROP_THRESHOLD);
    Ok(Windowed { value: out, tail_sq: tail })
}

/// Both forms of the two-scale sum with filter `f`, plus a report on their agreement.
fn two_scale_both(phi: &FCoordVec, f: &LaurentPoly, a: &AlphaMatrix, w: &Window, name: &str, tol: f64) -> Result<(Windowed<FCoordVec>, CheckReport)> {
    let direct = two_scale_apply(phi, f, a, w)?;
    let poly = two_scale_apply_polyphase(phi, f, a, w)?;
    let (diff, at) = direct.value.max_abs_diff(&poly.value);
    let report = CheckReport::from_details(name, tol, Some(*w), Vec::new())
        .with_condition("polyphase_route_agrees", diff <= tol, diff)
        .with_metric("polyphase_max_diff", diff)
        .with_metric("window_tail_sq", direct.tail_sq)
        .with_note(match at {
            Some(t) if diff > tol => format!("largest route gap at {t}"),
            _ => "filtered sum and polyphase sum agree".to_string(),
        });
    Ok((direct, report))
}

/// Rebuilds `φ̂` from itself and `h`; the report compares the result with the input.
pub fn reconstruct_phi_prop27(phi: &FCoordVec, h: &LaurentPoly, a: &AlphaMatrix, w: &Window, tol: f64) -> Result<(Windowed<FCoordVec>, CheckReport)> {
    let (out, routes) = two_scale_both(phi, h, a, w, "reconstruction_routes", tol)?;
    let (diff, _) = out.value.max_abs_diff(phi);
    let fixed = CheckReport::from_details("fixed_point", tol, Some(*w), vec![Detail::new("max_abs_diff", diff)]);
    let report = CheckReport::combine("scaling_reconstruction", tol, Some(*w), vec![fixed, routes]);
    Ok((out, report))
}

/// `ψ̂` from `φ̂` and the mirror filter `g = mirror_filter(h, 0)`.
pub fn construct_wavelet_prop27(phi: &FCoordVec, h: &LaurentPoly, a: &AlphaMatrix, w: &Window, tol: f64) -> Result<(Windowed<FCoordVec>, CheckReport)> {
    let g = mirror_filter(h, 0);
    let (out, routes) = two_scale_both(phi, &g, a, w, "wavelet_construction", tol)?;
    Ok((out, routes.with_note("g_k = (-1)^(1-k) conj(h_(1-k)); the wavelet is fixed only up to a unimodular factor")))
}

/// `±expected`, whichever sign is closer; returns `(residual, sign)`.
pub fn equal_up_to_sign(x: &FCoordVec, expected: &FCoordVec) -> (f64, f64) {
    let plus = x.max_abs_diff(expected).0;
    let minus = x.max_abs_diff(&expected.scale(Complex64::new(-1.0, 0.0))).0;
    if plus <= minus {
        (plus, 1.0)
    } else {
        (minus, -1.0)
    }
}

/// Cell integrals of the scaling function of a real filter `h` with `Σ h_k = √2`.
///
/// `levels[j][k - first]` is `∫ φ` over `[k 2^-j, (k+1) 2^-j)`.
#[derive(Debug, Clone)]
pub struct CellIntegrals {
    pub support: (i64, i64),
    pub levels: Vec<Vec<f64>>,
}

impl CellIntegrals {
    pub fn get(&self, j: usize, k: i64) -> f64 {
        let first = self.support.0 << j;
        let idx = k - first;
        if idx < 0 || idx as usize >= self.levels[j].len() {
            0.0
        } else {
            self.levels[j][idx as usize]
        }
    }
}

/// Exact cell integrals of `φ` down to cell width `2^-finest` from the two-scale
/// relation: the integer cells solve an eigenproblem normalized by `∫ φ = 1`,
/// and `I_j(k) = Σ_l h_l / √2 · I_{j-1}(k - l 2^{j-1})` refines them.
pub fn cascade_cell_integrals(h: &LaurentPoly, finest: usize) -> Result<CellIntegrals> {
    let (a, b) = h.degree_range().ok_or_else(|| Error::InvalidArgument("empty filter".into()))?;
    if h.iter().any(|(_, c)| c.im != 0.0) {
        return Err(Error::InvalidArgument("cascade needs a real filter".into()));
    }
    let sum: f64 = h.iter().map(|(_, c)| c.re).sum();
    if (sum - SQRT_2).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("filter sum is {sum}, expected √2")));
    }
    let cells = (b - a).max(1) as usize;
    let hl = |l: i64| h.get(l).re / SQRT_2;
    // I_0(n) = Σ_l h_l/√2 (I_0(2n - l) + I_0(2n - l + 1)), cells n in [a, b)
    let mut m = DMatrix::<f64>::zeros(cells + 1, cells);
    for r in 0..cells {
        let n = a + r as i64;
        m[(r, r)] -= 1.0;
        for c in 0..cells {
            let x = a + c as i64;
            m[(r, c)] += hl(2 * n - x) + hl(2 * n - x + 1);
        }
    }
    for c in 0..cells {
        m[(cells, c)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(cells + 1);
    rhs[cells] = 1.0;
    let base = m.svd(true, true).solve(&rhs, 1e-14).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut levels = vec![base.iter().cloned().collect::<Vec<f64>>()];
    for j in 1..=finest {
        let first = a << j;
        let len = cells << j;
        let half = 1i64 << (j - 1);
        let prev = CellIntegrals { support: (a, b), levels: levels.clone() };
        let next: Vec<f64> = (0..len)
            .into_par_iter()
            .map(|i| {
                let k = first + i as i64;
                h.iter().map(|(l, c)| c.re / SQRT_2 * prev.get(j - 1, k - l * half)).sum()
            })
            .collect();
        levels.push(next);
    }
    Ok(CellIntegrals { support: (a, b), levels })
}

/// Haar-family translation coordinates of the scaling function of `h`, up to wavelet level `max_level`.
///
/// `φ̂_0^(n) = I_0(n)` and `φ̂_{2^p+q}^(n) = 2^{p/2} (I_{p+1}(2c) - I_{p+1}(2c+1))`, `c = n 2^p + q`.
pub fn scaling_coords_haar(h: &LaurentPoly, max_level: u32) -> Result<FCoordVec> {
    let ci = cascade_cell_integrals(h, max_level as usize + 1)?;
    let (a, b) = ci.support;
    let mut out = FCoordVec::new();
    for n in a..b.max(a + 1) {
        out.set(TransIndex::new(0, n), Complex64::new(ci.get(0, n), 0.0));
        for p in 0..=max_level {
            let scale = 2f64.powf(p as f64 / 2.0);
            for q in 0..(1i64 << p) {
                let c = (n << p) + q;
                let v = scale * (ci.get(p as usize + 1, 2 * c) - ci.get(p as usize + 1, 2 * c + 1));
                out.set(TransIndex::new((1i64 << p) + q, n), Complex64::new(v, 0.0));
            }
        }
    }
    out.prune(DROP_THRESHOLD);
    Ok(out)
}
