//! The exponential and Haar basis families, and user test functions.
//!
//! Every function the oracle integrates is reduced to a finite sum of
//! piecewise exponential polynomials `c x^d e^{2πiλx}` on half-open intervals
//! plus optional Gaussian bumps.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DilIndex, Sign, TransIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    Exponential,
    Haar,
}

impl BasisFamily {
    /// Dilation ratio.
    pub const R: i64 = 2;
    /// Translation step.
    pub const T: i64 = 1;

    pub fn name(self) -> &'static str {
        match self {
            BasisFamily::Exponential => "exponential",
            BasisFamily::Haar => "haar",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exponential" | "exp" => Ok(BasisFamily::Exponential),
            "haar" => Ok(BasisFamily::Haar),
            other => Err(Error::Parse(format!("unknown basis family '{other}'"))),
        }
    }

    pub fn check_label(self, label: i64) -> Result<()> {
        match self {
            BasisFamily::Haar if label < 0 => Err(Error::InvalidLabel { family: self.name(), label }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Splits a positive Haar label `2^p + q` (`0 <= q < 2^p`) into `(p, q)`.
pub fn haar_level(label: i64) -> Option<(u32, i64)> {
    if label <= 0 {
        return None;
    }
    let p = 63 - label.leading_zeros();
    Some((p, label - (1i64 << p)))
}

/// `2^e` for any integer exponent in floating point.
pub fn pow2(e: i64) -> f64 {
    2f64.powi(e as i32)
}

/// `e^{2πi num / 2^den}` with exact argument reduction.
pub fn unit_phase(num: i128, den: u32) -> Complex64 {
    let modulus: i128 = 1i128 << den;
    let mut r = num.rem_euclid(modulus);
    if 4 * r % modulus == 0 {
        return match 4 * r / modulus {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    if 2 * r > modulus {
        r -= modulus;
    }
    let theta = 2.0 * PI * (r as f64) / (modulus as f64);
    Complex64::new(theta.cos(), theta.sin())
}

fn haar_mother(y: f64) -> f64 {
    if (0.0..0.5).contains(&y) {
        1.0
    } else if (0.5..1.0).contains(&y) {
        -1.0
    } else {
        0.0
    }
}

/// `2^{l/2} ψ(2^l x - k)`.
pub fn haar_psi(level: i64, shift: i64, x: f64) -> f64 {
    pow2(level).sqrt() * haar_mother(pow2(level) * x - shift as f64)
}

/// `2^{l/2} χ_[0,1)(2^l x - k)`.
pub fn haar_phi(level: i64, shift: i64, x: f64) -> f64 {
    let y = pow2(level) * x - shift as f64;
    if (0.0..1.0).contains(&y) {
        pow2(level).sqrt()
    } else {
        0.0
    }
}

/// Support of `L_i^(n)`: `[n, n+1)`.
pub fn support_l(idx: TransIndex) -> (f64, f64) {
    (idx.n as f64, idx.n as f64 + 1.0)
}

/// Support of `K_{s,j}^(m)`: `[2^-m, 2^{1-m})` for `+`, `[-2^{1-m}, -2^-m)` for `-`.
pub fn support_k(idx: DilIndex) -> (f64, f64) {
    let a = pow2(-idx.m);
    match idx.sign {
        Sign::Plus => (a, 2.0 * a),
        Sign::Minus => (-2.0 * a, -a),
    }
}

pub fn eval_l(family: BasisFamily, idx: TransIndex, x: f64) -> Result<Complex64> {
    family.check_label(idx.label)?;
    let y = x - idx.n as f64;
    if !(0.0..1.0).contains(&y) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(match family {
        BasisFamily::Exponential => {
            let th = 2.0 * PI * (idx.label as f64) * y;
            Complex64::new(th.cos(), th.sin())
        }
        BasisFamily::Haar => match haar_level(idx.label) {
            None => Complex64::new(1.0, 0.0),
            Some((p, q)) => Complex64::new(haar_psi(p as i64, q, y), 0.0),
        },
    })
}

pub fn eval_k(family: BasisFamily, idx: DilIndex, x: f64) -> Result<Complex64> {
    family.check_label(idx.label)?;
    let (a, b) = support_k(idx);
    if !(a <= x && x < b) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let scale = pow2(idx.m).sqrt();
    let y = pow2(idx.m) * x;
    Ok(match family {
        BasisFamily::Exponential => {
            let th = 2.0 * PI * (idx.label as f64) * y;
            Complex64::new(th.cos(), th.sin()) * scale
        }
        BasisFamily::Haar => {
            let v = match (idx.sign, haar_level(idx.label)) {
                (_, None) => 1.0,
                (Sign::Plus, Some((p, q))) => haar_psi(p as i64, (1i64 << p) + q, y),
                (Sign::Minus, Some((p, q))) => haar_psi(p as i64, q - (1i64 << (p + 1)), y),
            };
            Complex64::new(v * scale, 0.0)
        }
    })
}

/// `coeff · x^power · e^{2πi freq x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub power: u32,
    pub freq: f64,
}

impl Term {
    pub fn constant(c: f64) -> Self {
        Term { coeff: Complex64::new(c, 0.0), power: 0, freq: 0.0 }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let th = 2.0 * PI * self.freq * x;
        self.coeff * x.powi(self.power as i32) * Complex64::new(th.cos(), th.sin())
    }
}

/// A sum of terms on the half-open interval `[a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub terms: Vec<Term>,
}

impl Piece {
    pub fn constant(a: f64, b: f64, c: f64) -> Self {
        Piece { a, b, terms: vec![Term::constant(c)] }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        if self.a <= x && x < self.b {
            self.terms.iter().map(|t| t.eval(x)).sum()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

/// `amp · exp(-(x - center)² / (2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub amp: Complex64,
    pub center: f64,
    pub sigma: f64,
}

impl Gaussian {
    /// Half-width beyond which the bump is below `e^{-800}`.
    pub const CUTOFF_SIGMAS: f64 = 40.0;

    pub fn eval(&self, x: f64) -> Complex64 {
        let z = (x - self.center) / self.sigma;
        self.amp * (-0.5 * z * z).exp()
    }

    pub fn effective_support(&self) -> (f64, f64) {
        let h = Self::CUTOFF_SIGMAS * self.sigma;
        (self.center - h, self.center + h)
    }
}

/// Normalized form of a [`FunctionSpec`]: a finite sum of pieces and Gaussian bumps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Integrand {
    pub pieces: Vec<Piece>,
    pub gaussians: Vec<Gaussian>,
}

impl Integrand {
    pub fn eval(&self, x: f64) -> Complex64 {
        self.pieces.iter().map(|p| p.eval(x)).sum::<Complex64>() + self.gaussians.iter().map(|g| g.eval(x)).sum::<Complex64>()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.terms.iter().all(|t| t.coeff == Complex64::new(0.0, 0.0)))
            && self.gaussians.iter().all(|g| g.amp == Complex64::new(0.0, 0.0))
    }

    /// Smallest interval outside of which the function vanishes (Gaussians use their cutoff).
    pub fn support(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.pieces {
            if p.terms.iter().any(|t| t.coeff != Complex64::new(0.0, 0.0)) {
                lo = lo.min(p.a);
                hi = hi.max(p.b);
            }
        }
        for g in &self.gaussians {
            let (a, b) = g.effective_support();
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo < hi).then_some((lo, hi))
    }

    pub fn scale(mut self, c: Complex64) -> Self {
        for p in &mut self.pieces {
            for t in &mut p.terms {
                t.coeff *= c;
            }
        }
        for g in &mut self.gaussians {
            g.amp *= c;
        }
        self
    }

    /// `x ↦ 2^{p/2} f(2^p x - q)`, i.e. `D^p T^q f`.
    pub fn dilate_translate(self, p: i64, q: i64) -> Self {
        let s = pow2(p);
        let amp = s.sqrt();
        let qf = q as f64;
        let pieces = self
            .pieces
            .into_iter()
            .map(|pc| {
                let mut terms = Vec::new();
                for t in pc.terms {
                    // (s x - q)^d = Σ_k C(d,k) s^k x^k (-q)^{d-k}
                    let phase = unit_phase_f(-t.freq * qf);
                    let d = t.power;
                    for k in 0..=d {
                        let binom = binomial(d, k);
                        let c = t.coeff * phase * amp * binom * s.powi(k as i32) * (-qf).powi((d - k) as i32);
                        if c != Complex64::new(0.0, 0.0) {
                            terms.push(Term { coeff: c, power: k, freq: t.freq * s });
                        }
                    }
                }
                Piece { a: (pc.a + qf) / s, b: (pc.b + qf) / s, terms }
            })
            .collect();
        let gaussians = self
            .gaussians
            .into_iter()
            .map(|g| Gaussian { amp: g.amp * amp, center: (g.center + qf) / s, sigma: g.sigma / s })
            .collect();
        Integrand { pieces, gaussians }
    }

    pub fn merge(mut self, other: Integrand) -> Self {
        self.pieces.extend(other.pieces);
        self.gaussians.extend(other.gaussians);
        self
    }

    /// Sorted breakpoints of all pieces.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pieces.iter().flat_map(|p| [p.a, p.b]).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

fn unit_phase_f(t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let r = t - t.round();
    let th = 2.0 * PI * r;
    Complex64::new(th.cos(), th.sin())
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    HaarWavelet,
    HaarScaling,
    Indicator { a: f64, b: f64 },
    Gaussian { sigma: f64, center: f64 },
}

/// Symbolic test function.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Zero,
    Preset(Preset),
    /// Polynomial pieces; `coeffs[d]` multiplies `x^d`.
    Piecewise(Vec<(f64, f64, Vec<Complex64>)>),
    /// Basis function `L_i^(n)` of a family.
    BasisL(BasisFamily, TransIndex),
    /// Basis function `K_{s,j}^(m)` of a family.
    BasisK(BasisFamily, DilIndex),
    /// `D^p T^q f`.
    DilateTranslate { p: i64, q: i64, inner: Box<FunctionSpec> },
    /// `Σ c_k f_k`.
    Combination(Vec<(Complex64, FunctionSpec)>),
}

impl FunctionSpec {
    pub fn haar_wavelet() -> Self {
        FunctionSpec::Preset(Preset::HaarWavelet)
    }
    pub fn haar_scaling() -> Self {
        FunctionSpec::Preset(Preset::HaarScaling)
    }
    pub fn indicator(a: f64, b: f64) -> Self {
        FunctionSpec::Preset(Preset::Indicator { a, b })
    }
    pub fn gaussian(sigma: f64) -> Self {
        FunctionSpec::Preset(Preset::Gaussian { sigma, center: 0.0 })
    }
    pub fn dilate_translate(self, p: i64, q: i64) -> Self {
        FunctionSpec::DilateTranslate { p, q, inner: Box::new(self) }
    }

    pub fn is_compact(&self) -> bool {
        match self {
            FunctionSpec::Preset(Preset::Gaussian { .. }) => false,
            FunctionSpec::DilateTranslate { inner, .. } => inner.is_compact(),
            FunctionSpec::Combination(v) => v.iter().all(|(_, f)| f.is_compact()),
            _ => true,
        }
    }

    pub fn integrand(&self) -> Result<Integrand> {
        Ok(match self {
            FunctionSpec::Zero => Integrand::default(),
            FunctionSpec::Preset(Preset::HaarScaling) => Integrand { pieces: vec![Piece::constant(0.0, 1.0, 1.0)], gaussians: vec![] },
            FunctionSpec::Preset(Preset::HaarWavelet) => Integrand { pieces: haar_psi_pieces(0, 0), gaussians: vec![] },
            FunctionSpec::Preset(Preset::Indicator { a, b }) => {
                if !(a < b) {
                    return Err(Error::InvalidArgument(format!("indicator({a},{b}) is empty")));
                }
                Integrand { pieces: vec![Piece::constant(*a, *b, 1.0)], gaussians: vec![] }
            }
            FunctionSpec::Preset(Preset::Gaussian { sigma, center }) => {
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidArgument(format!("gaussian sigma must be positive, got {sigma}")));
                }
                Integrand {
                    pieces: vec![],
                    gaussians: vec![Gaussian { amp: Complex64::new(1.0, 0.0), center: *center, sigma: *sigma }],
                }
            }
            FunctionSpec::Piecewise(pieces) => {
                let mut out = Vec::new();
                for (a, b, coeffs) in pieces {
                    if !(a < b) {
                        return Err(Error::InvalidArgument(format!("empty piece [{a},{b})")));
                    }
                    let terms = coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
                        .map(|(d, c)| Term { coeff: *c, power: d as u32, freq: 0.0 })
                        .collect();
                    out.push(Piece { a: *a, b: *b, terms });
                }
                check_disjoint(&out)?;
                Integrand { pieces: out, gaussians: vec![] }
            }
            FunctionSpec::BasisL(fam, idx) => Integrand { pieces: basis_l_pieces(*fam, *idx)?, gaussians: vec![] },
            FunctionSpec::BasisK(fam, idx) => Integrand { pieces: basis_k_pieces(*fam, *idx)?, gaussians: vec![] },
            FunctionSpec::DilateTranslate { p, q, inner } => inner.integrand()?.dilate_translate(*p, *q),
            FunctionSpec::Combination(v) => {
                let mut acc = Integrand::default();
                for (c, f) in v {
                    acc = acc.merge(f.integrand()?.scale(*c));
                }
                acc
            }
        })
    }

    /// Parses the text form, e.g. `indicator(0,3)`, `dt(1,-1,haar_wavelet)`,
    /// `piecewise[(0,1/2^1):1+2*x; (1/2,1):-1]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = SpecParser { s: text.as_bytes(), pos: 0 };
        let f = p.spec()?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(f)
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Zero => write!(f, "zero"),
            FunctionSpec::Preset(Preset::HaarWavelet) => write!(f, "haar_wavelet"),
            FunctionSpec::Preset(Preset::HaarScaling) => write!(f, "haar_scaling"),
            FunctionSpec::Preset(Preset::Indicator { a, b }) => write!(f, "indicator({a},{b})"),
            FunctionSpec::Preset(Preset::Gaussian { sigma, center }) => {
                if *center == 0.0 {
                    write!(f, "gaussian({sigma})")
                } else {
                    write!(f, "gaussian({sigma},{center})")
                }
            }
            FunctionSpec::Piecewise(pieces) => {
                write!(f, "piecewise[")?;
                for (k, (a, b, c)) in pieces.iter().enumerate() {
                    if k > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "({a},{b}):")?;
                    for (d, c) in c.iter().enumerate() {
                        if d > 0 {
                            write!(f, "+")?;
                        }
                        write!(f, "{}", c.re)?;
                        if d > 0 {
                            write!(f, "*x^{d}")?;
                        }
                    }
                }
                write!(f, "]")
            }
            FunctionSpec::BasisL(fam, idx) => write!(f, "L[{fam}]{idx}"),
            FunctionSpec::BasisK(fam, idx) => write!(f, "K[{fam}]{idx}"),
            FunctionSpec::DilateTranslate { p, q, inner } => write!(f, "dt({p},{q},{inner})"),
            FunctionSpec::Combination(v) => {
                write!(f, "sum(")?;
                for (k, (c, g)) in v.iter().enumerate() {
                    if k > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{}*{g}", c.re)?;
                }
                write!(f, ")")
            }
        }
    }
}

pub fn eval_spec(f: &FunctionSpec, x: f64) -> Result<Complex64> {
    Ok(f.integrand()?.eval(x))
}

fn check_disjoint(pieces: &[Piece]) -> Result<()> {
    let mut iv: Vec<(f64, f64)> = pieces.iter().map(|p| (p.a, p.b)).collect();
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    for w in iv.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(Error::InvalidArgument(format!("overlapping pieces [{},{}) and [{},{})", w[0].0, w[0].1, w[1].0, w[1].1)));
        }
    }
    Ok(())
}

/// Pieces of `ψ_{l,k}`.
pub fn haar_psi_pieces(level: i64, shift: i64) -> Vec<Piece> {
    let w = pow2(-level);
    let a = shift as f64 * w;
    let amp = pow2(level).sqrt();
    vec![Piece::constant(a, a + 0.5 * w, amp), Piece::constant(a + 0.5 * w, a + w, -amp)]
}

/// Pieces of `φ_{l,k}`.
pub fn haar_phi_pieces(level: i64, shift: i64) -> Vec<Piece> {
    let w = pow2(-level);
    let a = shift as f64 * w;
    vec![Piece::constant(a, a + w, pow2(level).sqrt())]
}

pub fn basis_l_pieces(family: BasisFamily, idx: TransIndex) -> Result<Vec<Piece>> {
    family.check_label(idx.label)?;
    let n = idx.n;
    Ok(match family {
        BasisFamily::Exponential => vec![Piece {
            a: n as f64,
            b: n as f64 + 1.0,
            terms: vec![Term { coeff: Complex64::new(1.0, 0.0), power: 0, freq: idx.label as f64 }],
        }],
        BasisFamily::Haar => match haar_level(idx.label) {
            None => haar_phi_pieces(0, n),
            Some((p, q)) => haar_psi_pieces(p as i64, q + (n << p)),
        },
    })
}

pub fn basis_k_pieces(family: BasisFamily, idx: DilIndex) -> Result<Vec<Piece>> {
    family.check_label(idx.label)?;
    let m = idx.m;
    Ok(match family {
        BasisFamily::Exponential => {
            let (a, b) = support_k(idx);
            vec![Piece {
                a,
                b,
                terms: vec![Term { coeff: Complex64::new(pow2(m).sqrt(), 0.0), power: 0, freq: idx.label as f64 * pow2(m) }],
            }]
        }
        BasisFamily::Haar => match (idx.sign, haar_level(idx.label)) {
            (Sign::Plus, None) => haar_phi_pieces(m, 1),
            (Sign::Minus, None) => haar_phi_pieces(m, -2),
            (Sign::Plus, Some((p, q))) => haar_psi_pieces(p as i64 + m, (1i64 << p) + q),
            (Sign::Minus, Some((p, q))) => haar_psi_pieces(p as i64 + m, q - (1i64 << (p + 1))),
        },
    })
}

pub(crate) struct SpecParser<'a> {
    pub(crate) s: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> SpecParser<'a> {
    pub(crate) fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {} in function spec", self.pos))
    }

    pub(crate) fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    pub(crate) fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    pub(crate) fn ident(&mut self) -> String {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    pub(crate) fn integer(&mut self) -> Result<i64> {
        self.ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err("expected integer"))
    }

    /// Unsigned decimal literal.
    fn decimal(&mut self) -> Result<f64> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
            self.pos += 1;
        }
        if matches!(self.s.get(self.pos), Some(b'e') | Some(b'E')) {
            self.pos += 1;
            if matches!(self.s.get(self.pos), Some(b'-') | Some(b'+')) {
                self.pos += 1;
            }
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err("expected number"))
    }

    /// `[-] num [/ den]` where `den` is an integer or `2^k`.
    pub(crate) fn number(&mut self) -> Result<f64> {
        let neg = self.eat(b'-');
        if !neg {
            self.eat(b'+');
        }
        let mut v = self.decimal()?;
        if self.eat(b'/') {
            let d = self.decimal()?;
            let d = if self.eat(b'^') { d.powi(self.integer()? as i32) } else { d };
            if d == 0.0 {
                return Err(self.err("division by zero"));
            }
            v /= d;
        }
        Ok(if neg { -v } else { v })
    }

    fn breakpoint(&mut self) -> Result<f64> {
        let v = self.number()?;
        if !is_dyadic(v) {
            return Err(self.err(&format!("breakpoint {v} is not a dyadic rational")));
        }
        Ok(v)
    }

    fn spec(&mut self) -> Result<FunctionSpec> {
        let name = self.ident();
        match name.as_str() {
            "zero" => Ok(FunctionSpec::Zero),
            "haar_wavelet" => Ok(FunctionSpec::haar_wavelet()),
            "haar_scaling" => Ok(FunctionSpec::haar_scaling()),
            "indicator" => {
                self.expect(b'(')?;
                let a = self.breakpoint()?;
                self.expect(b',')?;
                let b = self.breakpoint()?;
                self.expect(b')')?;
                if !(a < b) {
                    return Err(self.err("indicator needs a < b"));
                }
                Ok(FunctionSpec::indicator(a, b))
            }
            "gaussian" => {
                self.expect(b'(')?;
                let sigma = self.number()?;
                let center = if self.eat(b',') { self.number()? } else { 0.0 };
                self.expect(b')')?;
                if !(sigma > 0.0) {
                    return Err(self.err("gaussian sigma must be positive"));
                }
                Ok(FunctionSpec::Preset(Preset::Gaussian { sigma, center }))
            }
            "dt" => {
                self.expect(b'(')?;
                let p = self.integer()?;
                self.expect(b',')?;
                let q = self.integer()?;
                self.expect(b',')?;
                let inner = self.spec()?;
                self.expect(b')')?;
                Ok(inner.dilate_translate(p, q))
            }
            "scale" => {
                self.expect(b'(')?;
                let c = self.number()?;
                self.expect(b',')?;
                let inner = self.spec()?;
                self.expect(b')')?;
                Ok(FunctionSpec::Combination(vec![(Complex64::new(c, 0.0), inner)]))
            }
            "sum" => {
                self.expect(b'(')?;
                let mut parts = vec![(Complex64::new(1.0, 0.0), self.spec()?)];
                while self.eat(b';') {
                    parts.push((Complex64::new(1.0, 0.0), self.spec()?));
                }
                self.expect(b')')?;
                Ok(FunctionSpec::Combination(parts))
            }
            "piecewise" => {
                self.expect(b'[')?;
                let mut pieces = Vec::new();
                loop {
                    self.expect(b'(')?;
                    let a = self.breakpoint()?;
                    self.expect(b',')?;
                    let b = self.breakpoint()?;
                    self.expect(b')')?;
                    self.expect(b':')?;
                    let coeffs = self.polynomial()?;
                    if !(a < b) {
                        return Err(self.err("piece needs a < b"));
                    }
                    pieces.push((a, b, coeffs));
                    if !self.eat(b';') {
                        break;
                    }
                }
                self.expect(b']')?;
                let f = FunctionSpec::Piecewise(pieces);
                f.integrand()?;
                Ok(f)
            }
            "" => Err(self.err("expected a function name")),
            other => Err(self.err(&format!("unknown function '{other}'"))),
        }
    }

    /// `c0 + c1*x + c2*x^2 - x^3 ...`
    fn polynomial(&mut self) -> Result<Vec<Complex64>> {
        let mut coeffs: Vec<Complex64> = Vec::new();
        let mut first = true;
        loop {
            let sign = if self.eat(b'-') {
                -1.0
            } else if self.eat(b'+') || first {
                1.0
            } else {
                break;
            };
            first = false;
            let (c, power) = if self.peek() == Some(b'x') {
                self.pos += 1;
                (1.0, self.power()?)
            } else {
                let c = self.number()?;
                if self.eat(b'*') {
                    if self.peek() != Some(b'x') {
                        return Err(self.err("expected 'x'"));
                    }
                    self.pos += 1;
                    (c, self.power()?)
                } else {
                    (c, 0)
                }
            };
            if coeffs.len() <= power {
                coeffs.resize(power + 1, Complex64::new(0.0, 0.0));
            }
            coeffs[power] += sign * c;
            if !matches!(self.peek(), Some(b'+') | Some(b'-')) {
                break;
            }
        }
        Ok(coeffs)
    }

    fn power(&mut self) -> Result<usize> {
        if self.eat(b'^') {
            let k = self.integer()?;
            if !(0..=16).contains(&k) {
                return Err(self.err("power out of range"));
            }
            Ok(k as usize)
        } else {
            Ok(1)
        }
    }
}

fn is_dyadic(v: f64) -> bool {
    v.is_finite() && (v * pow2(40)).fract() == 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn pointwise_values() {
        let one = Complex64::new(1.0, 0.0);
        assert!(close(eval_l(BasisFamily::Haar, TransIndex::new(0, 0), 0.3).unwrap(), one));
        assert!(close(eval_l(BasisFamily::Haar, TransIndex::new(1, 0), 0.7).unwrap(), -one));
        // e^{2πi·2·0.25} = e^{iπ}
        assert!(close(eval_l(BasisFamily::Exponential, TransIndex::new(2, 1), 1.25).unwrap(), -one));
        assert!(close(eval_l(BasisFamily::Exponential, TransIndex::new(1, 1), 1.25).unwrap(), Complex64::new(0.0, 1.0)));
        assert!(close(eval_k(BasisFamily::Haar, DilIndex::plus(0, 0), 1.5).unwrap(), one));
        assert!(close(eval_k(BasisFamily::Haar, DilIndex::plus(0, 1), 0.6).unwrap(), one * 2f64.sqrt()));
        assert!(eval_l(BasisFamily::Haar, TransIndex::new(-1, 0), 0.3).is_err());
    }

    #[test]
    fn negative_haar_branch_lives_on_minus_two_to_minus_one() {
        assert_eq!(eval_k(BasisFamily::Haar, DilIndex::minus(0, 0), -1.5).unwrap().re, 1.0);
        assert_eq!(eval_k(BasisFamily::Haar, DilIndex::minus(0, 0), -2.0).unwrap().re, 1.0);
        assert_eq!(eval_k(BasisFamily::Haar, DilIndex::minus(0, 0), -1.0).unwrap().re, 0.0);
        // ψ_{0,-2}: +1 on [-2,-1.5), -1 on [-1.5,-1)
        assert_eq!(eval_k(BasisFamily::Haar, DilIndex::minus(1, 0), -1.75).unwrap().re, 1.0);
        assert_eq!(eval_k(BasisFamily::Haar, DilIndex::minus(1, 0), -1.25).unwrap().re, -1.0);
    }

    #[test]
    fn spec_values() {
        let f = FunctionSpec::parse("haar_wavelet").unwrap();
        assert_eq!(eval_spec(&f, 0.25).unwrap().re, 1.0);
        assert_eq!(eval_spec(&FunctionSpec::indicator(1.0, 2.0), 2.0).unwrap().re, 0.0);
        assert_eq!(eval_spec(&FunctionSpec::gaussian(1.0), 0.0).unwrap().re, 1.0);
    }

    #[test]
    fn parser_accepts_the_grammar() {
        let f = FunctionSpec::parse("piecewise[(0,1/2^1):1+2*x; (1/2,1):-1 - x^2]").unwrap();
        let v = eval_spec(&f, 0.25).unwrap().re;
        assert!((v - 1.5).abs() < 1e-15);
        let v = eval_spec(&f, 0.75).unwrap().re;
        assert!((v + 1.5625).abs() < 1e-15);
        let g = FunctionSpec::parse("dt(1, 1, haar_scaling)").unwrap();
        assert_eq!(eval_spec(&g, 0.6).unwrap().re, 2f64.sqrt());
        assert_eq!(eval_spec(&g, 0.4).unwrap().re, 0.0);
        assert!(FunctionSpec::parse("indicator(0,1/3)").is_err());
        assert!(FunctionSpec::parse("piecewise[(0,1):1; (1/2,2):1]").is_err());
        assert!(FunctionSpec::parse("wobble").is_err());
        assert!(FunctionSpec::parse("haar_wavelet extra").is_err());
        assert_eq!(FunctionSpec::parse("sum(haar_scaling; scale(-1, haar_wavelet))").unwrap().to_string(), "sum(1*haar_scaling; 1*sum(-1*haar_wavelet))");
    }

    #[test]
    fn unit_phase_is_exact_at_quarters() {
        assert_eq!(unit_phase(1, 2), Complex64::new(0.0, 1.0));
        assert_eq!(unit_phase(-6, 2), Complex64::new(-1.0, 0.0));
        assert_eq!(unit_phase(1 << 40, 3), Complex64::new(1.0, 0.0));
        assert!((unit_phase(1, 3) - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
    }

    #[test]
    fn haar_levels() {
        assert_eq!(haar_level(1), Some((0, 0)));
        assert_eq!(haar_level(5), Some((2, 1)));
        assert_eq!(haar_level(0), None);
    }

    proptest! {
        #[test]
        fn pieces_agree_with_pointwise(label in 0i64..40, n in -4i64..4, m in -3i64..4, plus in any::<bool>(), x in -20.0f64..20.0) {
            for fam in [BasisFamily::Haar, BasisFamily::Exponential] {
                let t = TransIndex::new(label, n);
                let l = Integrand { pieces: basis_l_pieces(fam, t).unwrap(), gaussians: vec![] };
                prop_assert!((l.eval(x) - eval_l(fam, t, x).unwrap()).norm() < 1e-9);
                let d = DilIndex::new(if plus { Sign::Plus } else { Sign::Minus }, label, m);
                let k = Integrand { pieces: basis_k_pieces(fam, d).unwrap(), gaussians: vec![] };
                prop_assert!((k.eval(x) - eval_k(fam, d, x).unwrap()).norm() < 1e-9);
            }
        }

        #[test]
        fn support_containment(label in 0i64..40, m in -3i64..4, plus in any::<bool>()) {
            for fam in [BasisFamily::Haar, BasisFamily::Exponential] {
                let d = DilIndex::new(if plus { Sign::Plus } else { Sign::Minus }, label, m);
                let (a, b) = support_k(d);
                for x in [a - 1e-12, b, b + 1e-12] {
                    prop_assert_eq!(eval_k(fam, d, x).unwrap(), Complex64::new(0.0, 0.0));
                }
                let t = TransIndex::new(label, m);
                let (a, b) = support_l(t);
                for x in [a - 1e-12, b, b + 1e-12] {
                    prop_assert_eq!(eval_l(fam, t, x).unwrap(), Complex64::new(0.0, 0.0));
                }
            }
        }

        #[test]
        fn dilate_translate_matches_definition(p in -3i64..4, q in -4i64..5, x in -10.0f64..10.0) {
            let f = FunctionSpec::parse("piecewise[(0,1/2):1+2*x; (1/2,3/2):-1+x^2]").unwrap();
            let g = f.clone().dilate_translate(p, q);
            let lhs = eval_spec(&g, x).unwrap();
            let rhs = eval_spec(&f, pow2(p) * x - q as f64).unwrap() * pow2(p).sqrt();
            prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
        }
    }
}
