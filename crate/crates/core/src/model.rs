//! Index types, sparse coordinate vectors, truncation windows and check reports.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bases::BasisFamily;
use crate::error::{Error, Result};

/// Entries with modulus at or below this are dropped after arithmetic.
pub const DROP_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn parse(s: &str) -> Result<Sign> {
        match s.trim() {
            "+" | "plus" | "+1" | "1" => Ok(Sign::Plus),
            "-" | "minus" | "-1" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("unknown sign '{other}'"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(i, n)`: the translation-model basis function `L_i^(n) = T^n L_i^(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransIndex {
    pub label: i64,
    pub n: i64,
}

impl TransIndex {
    pub const fn new(label: i64, n: i64) -> Self {
        TransIndex { label, n }
    }
}

impl fmt::Display for TransIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(i={},n={})", self.label, self.n)
    }
}

/// `(s, j, m)`: the dilation-model basis function `K_{s,j}^(m) = D^m K_{s,j}^(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DilIndex {
    pub sign: Sign,
    pub label: i64,
    pub m: i64,
}

impl DilIndex {
    pub const fn new(sign: Sign, label: i64, m: i64) -> Self {
        DilIndex { sign, label, m }
    }
    pub const fn plus(label: i64, m: i64) -> Self {
        DilIndex { sign: Sign::Plus, label, m }
    }
    pub const fn minus(label: i64, m: i64) -> Self {
        DilIndex { sign: Sign::Minus, label, m }
    }
}

impl fmt::Display for DilIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(s={},j={},m={})", self.sign, self.label, self.m)
    }
}

/// Sparse complex coordinate vector. Absent keys are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordVec<I: Ord> {
    entries: BTreeMap<I, Complex64>,
}

pub type FCoordVec = CoordVec<TransIndex>;
pub type GCoordVec = CoordVec<DilIndex>;

impl<I: Ord> Default for CoordVec<I> {
    fn default() -> Self {
        CoordVec { entries: BTreeMap::new() }
    }
}

impl<I: Ord + Copy> CoordVec<I> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from entries, summing duplicates and dropping negligible values.
    pub fn from_entries<T: IntoIterator<Item = (I, Complex64)>>(it: T) -> Self {
        let mut v = Self::new();
        for (k, c) in it {
            v.add(k, c);
        }
        v.prune(DROP_THRESHOLD);
        v
    }

    pub fn unit(idx: I) -> Self {
        Self::from_entries([(idx, Complex64::new(1.0, 0.0))])
    }

    pub fn get(&self, idx: &I) -> Complex64 {
        self.entries.get(idx).copied().unwrap_or_default()
    }

    /// Overwrites an entry; a zero value removes it.
    pub fn set(&mut self, idx: I, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, c);
        }
    }

    pub fn add(&mut self, idx: I, c: Complex64) {
        *self.entries.entry(idx).or_default() += c;
    }

    pub fn remove(&mut self, idx: &I) -> Option<Complex64> {
        self.entries.remove(idx)
    }

    pub fn prune(&mut self, threshold: f64) {
        self.entries.retain(|_, c| c.norm() > threshold);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&I, &Complex64)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &I> {
        self.entries.keys()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self::from_entries(self.entries.iter().map(|(k, c)| (*k, c * a)))
    }

    pub fn conj(&self) -> Self {
        Self::from_entries(self.entries.iter().map(|(k, c)| (*k, c.conj())))
    }

    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Self {
        let mut out = Self::new();
        for (k, c) in &self.entries {
            out.add(*k, c * a);
        }
        for (k, c) in &other.entries {
            out.add(*k, c * b);
        }
        out.prune(DROP_THRESHOLD);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.linear_combination(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// `Σ self_k conj(other_k)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &small.entries {
            if let Some(b) = large.entries.get(k) {
                acc += if flip { b * a.conj() } else { a * b.conj() };
            }
        }
        acc
    }

    /// Largest entrywise modulus of `self - other` with its index.
    pub fn max_abs_diff(&self, other: &Self) -> (f64, Option<I>) {
        let mut best = (0.0, None);
        for (k, a) in &self.entries {
            let d = (a - other.get(k)).norm();
            if d > best.0 || best.1.is_none() && d >= best.0 {
                best = (d, Some(*k));
            }
        }
        for (k, b) in &other.entries {
            if !self.entries.contains_key(k) && (b.norm() > best.0 || best.1.is_none()) {
                best = (b.norm(), Some(*k));
            }
        }
        best
    }

    pub fn map_index<F: Fn(I) -> I>(&self, f: F) -> Self {
        CoordVec { entries: self.entries.iter().map(|(k, c)| (f(*k), *c)).collect() }
    }

    pub fn filter<F: Fn(&I) -> bool>(&self, keep: F) -> Self {
        CoordVec { entries: self.entries.iter().filter(|(k, _)| keep(k)).map(|(k, c)| (*k, *c)).collect() }
    }
}

impl<I: Ord + Copy> FromIterator<(I, Complex64)> for CoordVec<I> {
    fn from_iter<T: IntoIterator<Item = (I, Complex64)>>(iter: T) -> Self {
        Self::from_entries(iter)
    }
}

pub fn coord_norm_sq<I: Ord + Copy>(v: &CoordVec<I>) -> f64 {
    v.norm_sq()
}

pub fn coord_equal<I: Ord + Copy + fmt::Display>(a: &CoordVec<I>, b: &CoordVec<I>, tol: f64) -> CheckReport {
    let mut details = Vec::new();
    let mut all: Vec<I> = a.keys().copied().collect();
    all.extend(b.keys().copied().filter(|k| !a.entries.contains_key(k)));
    all.sort();
    for k in all {
        details.push(Detail::new(k.to_string(), (a.get(&k) - b.get(&k)).norm()));
    }
    CheckReport::from_details("coord_equal", tol, None, details)
}

/// Closed integer range `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRange {
    pub lo: i64,
    pub hi: i64,
}

impl IndexRange {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
        }
        Ok(IndexRange { lo, hi })
    }

    pub fn symmetric(r: i64) -> Self {
        let r = r.abs();
        IndexRange { lo: -r, hi: r }
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn intersect(&self, lo: i64, hi: i64) -> Option<(i64, i64)> {
        let a = self.lo.max(lo);
        let b = self.hi.min(hi);
        (a <= b).then_some((a, b))
    }
}

/// Finite truncation of the infinite index sets.
///
/// F side: labels `trans_labels`, exponents `trans_range`.
/// G side: both signs, labels `dil_labels`, exponents `dil_range`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub trans_labels: IndexRange,
    pub trans_range: IndexRange,
    pub dil_labels: IndexRange,
    pub dil_range: IndexRange,
}

impl Window {
    pub fn new(trans_labels: IndexRange, trans_range: IndexRange, dil_labels: IndexRange, dil_range: IndexRange) -> Self {
        Window { trans_labels, trans_range, dil_labels, dil_range }
    }

    /// Exponential: labels in `[-r, r]`. Haar: labels in `[0, 2^(r+1) - 1]`, i.e. levels `p <= r`.
    /// Exponents `n` and `m` range over `[-r, r]`.
    pub fn symmetric(family: BasisFamily, radius: i64) -> Self {
        let r = radius.abs();
        let labels = match family {
            BasisFamily::Exponential => IndexRange::symmetric(r),
            BasisFamily::Haar => IndexRange { lo: 0, hi: (1i64 << (r + 1).min(62)) - 1 },
        };
        Window {
            trans_labels: labels,
            trans_range: IndexRange::symmetric(r),
            dil_labels: labels,
            dil_range: IndexRange::symmetric(r),
        }
    }

    pub fn with_trans_labels(mut self, lo: i64, hi: i64) -> Result<Self> {
        self.trans_labels = IndexRange::new(lo, hi)?;
        Ok(self)
    }
    pub fn with_trans_range(mut self, lo: i64, hi: i64) -> Result<Self> {
        self.trans_range = IndexRange::new(lo, hi)?;
        Ok(self)
    }
    pub fn with_dil_labels(mut self, lo: i64, hi: i64) -> Result<Self> {
        self.dil_labels = IndexRange::new(lo, hi)?;
        Ok(self)
    }
    pub fn with_dil_range(mut self, lo: i64, hi: i64) -> Result<Self> {
        self.dil_range = IndexRange::new(lo, hi)?;
        Ok(self)
    }
    /// Same as `with_dil_range(-m_max, m_max)`.
    pub fn with_m_max(self, m_max: i64) -> Self {
        let m = m_max.abs();
        Window { dil_range: IndexRange { lo: -m, hi: m }, ..self }
    }

    pub fn contains_trans(&self, t: &TransIndex) -> bool {
        self.trans_labels.contains(t.label) && self.trans_range.contains(t.n)
    }

    pub fn contains_dil(&self, d: &DilIndex) -> bool {
        self.dil_labels.contains(d.label) && self.dil_range.contains(d.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rank_svd_threshold: f64,
    pub quadrature_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { abs_tol: 1e-9, rank_svd_threshold: 1e-8, quadrature_tol: 1e-10 }
    }
}

impl Tolerances {
    pub fn new(abs_tol: f64, rank_svd_threshold: f64, quadrature_tol: f64) -> Result<Self> {
        for (name, v) in [("abs_tol", abs_tol), ("rank_svd_threshold", rank_svd_threshold), ("quadrature_tol", quadrature_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Tolerances { abs_tol, rank_svd_threshold, quadrature_tol })
    }
}

/// A truncated result together with a bound on the squared ℓ² mass the truncation dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Windowed<T> {
    pub value: T,
    pub tail_sq: f64,
}

impl<T> Windowed<T> {
    pub fn exact(value: T) -> Self {
        Windowed { value, tail_sq: 0.0 }
    }

    /// ℓ² norm of the dropped part.
    pub fn tail_norm(&self) -> f64 {
        self.tail_sq.max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub index: String,
    pub residual: f64,
}

impl Detail {
    pub fn new(index: impl Into<String>, residual: f64) -> Self {
        Detail { index: index.into(), residual }
    }
}

/// A boolean side condition that is not a residual, e.g. a rank or a determinant floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub pass: bool,
    pub verdict: Verdict,
    pub max_residual: f64,
    pub tolerance: f64,
    pub window: Option<Window>,
    pub details: Vec<Detail>,
    pub conditions: Vec<Condition>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    /// `pass` iff every residual is at most `tol` (NaN residuals fail).
    pub fn from_details(name: &str, tol: f64, window: Option<Window>, details: Vec<Detail>) -> Self {
        let mut r = CheckReport {
            check_name: name.to_string(),
            pass: false,
            verdict: Verdict::Fail,
            max_residual: 0.0,
            tolerance: tol,
            window,
            details,
            conditions: Vec::new(),
            metrics: BTreeMap::new(),
            notes: Vec::new(),
        };
        r.refresh();
        r
    }

    fn refresh(&mut self) {
        let mut max = 0.0f64;
        let mut nan = false;
        for d in &self.details {
            if d.residual.is_nan() {
                nan = true;
            } else {
                max = max.max(d.residual);
            }
        }
        self.max_residual = if nan { f64::NAN } else { max };
        let ok = !nan && max <= self.tolerance && self.conditions.iter().all(|c| c.holds);
        if self.verdict != Verdict::Inconclusive {
            self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        }
        self.pass = self.verdict == Verdict::Pass;
    }

    pub fn push_detail(&mut self, index: impl Into<String>, residual: f64) {
        self.details.push(Detail::new(index, residual));
        self.refresh();
    }

    pub fn with_condition(mut self, name: impl Into<String>, holds: bool, value: f64) -> Self {
        self.conditions.push(Condition { name: name.into(), holds, value });
        self.refresh();
        self
    }

    pub fn with_metric(mut self, name: impl Into<String>, value: f64) -> Self {
        self.metrics.insert(name.into(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn mark_inconclusive(mut self) -> Self {
        self.verdict = Verdict::Inconclusive;
        self.pass = false;
        self
    }

    /// Residual recorded for `index`, if any.
    pub fn residual(&self, index: &str) -> Option<f64> {
        self.details.iter().find(|d| d.index == index).map(|d| d.residual)
    }

    /// Combines several reports; the result passes iff all parts pass.
    pub fn combine(name: &str, tol: f64, window: Option<Window>, parts: Vec<CheckReport>) -> Self {
        let mut out = CheckReport::from_details(name, tol, window, Vec::new());
        let mut inconclusive = false;
        for p in parts {
            for d in p.details {
                out.details.push(Detail::new(format!("{}:{}", p.check_name, d.index), d.residual));
            }
            for c in p.conditions {
                out.conditions.push(Condition { name: format!("{}:{}", p.check_name, c.name), ..c });
            }
            for (k, v) in p.metrics {
                out.metrics.insert(format!("{}:{}", p.check_name, k), v);
            }
            out.notes.extend(p.notes);
            if p.tolerance != tol {
                out.conditions.push(Condition {
                    name: format!("{}:pass", p.check_name),
                    holds: p.pass,
                    value: p.max_residual,
                });
            }
            inconclusive |= p.verdict == Verdict::Inconclusive;
        }
        if inconclusive {
            out.verdict = Verdict::Inconclusive;
        }
        out.refresh();
        out
    }
}
