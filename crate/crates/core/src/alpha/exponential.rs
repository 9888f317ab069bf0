//! Change-of-basis entries between `L_k^(0)(x) = e^{2πikx}` on `[0,1)` and
//! `K_{±,j}^(0)(x) = e^{2πijx}` on `[1,2)` / `[-2,-1)`.
//!
//! Rows for `n ∈ {0, -1}` spread over all `m >= 1` and all `j`; block rows
//! (`|n| >= 2`) sit at the single scale `m = -p` but still spread over all `j`.
//! Truncation tails are bounded with `|α|² <= C / (x - j)²` and an integral
//! comparison.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bases::{pow2, unit_phase};
use crate::model::{DilIndex, IndexRange, Sign, TransIndex, Window};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Block position of a cell `n`: `n = 2^p + q` (`n >= 2`) or `n = -2^p - q - 1` (`n <= -3`).
fn block(n: i64) -> Option<(Sign, u32, i64)> {
    if n >= 2 {
        let p = 63 - n.leading_zeros();
        Some((Sign::Plus, p, n - (1i64 << p)))
    } else if n <= -3 {
        let x = -n - 1;
        let p = 63 - x.leading_zeros();
        Some((Sign::Minus, p, x - (1i64 << p)))
    } else {
        None
    }
}

pub fn entry(t: TransIndex, d: DilIndex) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let (k, n) = (t.label, t.n);
    let (s, j, m) = (d.sign, d.label, d.m);
    match n {
        0 | -1 => {
            let want = if n == 0 { Sign::Plus } else { Sign::Minus };
            if s != want || m <= 0 || m > 120 {
                return zero;
            }
            let c = k as i128 - (j as i128) * (1i128 << m);
            if c == 0 {
                return Complex64::new(pow2(-m).sqrt(), 0.0);
            }
            let amp = pow2(m).sqrt() / (2.0 * PI * c as f64);
            if n == 0 {
                let e = unit_phase(k as i128, m as u32);
                -I * amp * e * (e - 1.0)
            } else {
                let e = unit_phase(-(k as i128), m as u32);
                I * amp * e * (e - 1.0)
            }
        }
        1 => {
            if s == Sign::Plus && m == 0 && k == j {
                Complex64::new(1.0, 0.0)
            } else {
                zero
            }
        }
        -2 => {
            if s == Sign::Minus && m == 0 && k == j {
                Complex64::new(1.0, 0.0)
            } else {
                zero
            }
        }
        _ => {
            let (sign, p, q) = block(n).expect("block cell");
            if s != sign || m != -(p as i64) {
                return zero;
            }
            let c = (k as i128) * (1i128 << p) - j as i128;
            if c == 0 {
                return Complex64::new(pow2(-(p as i64)).sqrt(), 0.0);
            }
            let amp = pow2(p as i64).sqrt() / (2.0 * PI * c as f64);
            let jq = (j as i128) * (q as i128);
            match sign {
                Sign::Plus => -I * amp * unit_phase(-jq, p) * (unit_phase(-(j as i128), p) - 1.0),
                Sign::Minus => I * amp * unit_phase(jq, p) * (unit_phase(j as i128, p) - 1.0),
            }
        }
    }
}

/// Bound on `Σ_{j ∉ [lo, hi]} 1/(j - x)²`.
pub fn inv_sq_tail(x: f64, range: IndexRange) -> f64 {
    let side = |d: f64| if d > 0.0 { 1.0 / (d * d) + 1.0 / d } else { f64::INFINITY };
    side(range.hi as f64 + 1.0 - x) + side(x - (range.lo as f64 - 1.0))
}

/// Structural support of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowShape {
    /// Single entry.
    Single(DilIndex),
    /// All labels at every `m >= 1` for the given sign.
    Scales(Sign),
    /// All labels at the fixed scale `m`.
    Band(Sign, i64),
}

pub fn row_shape(t: TransIndex) -> RowShape {
    match t.n {
        0 => RowShape::Scales(Sign::Plus),
        -1 => RowShape::Scales(Sign::Minus),
        1 => RowShape::Single(DilIndex::plus(t.label, 0)),
        -2 => RowShape::Single(DilIndex::minus(t.label, 0)),
        n => {
            let (s, p, _) = block(n).expect("block cell");
            RowShape::Band(s, -(p as i64))
        }
    }
}

/// Row entries inside the window with a bound on the squared mass left outside.
pub fn row_in_window(t: TransIndex, w: &Window) -> (Vec<(DilIndex, Complex64)>, f64) {
    let mut out = Vec::new();
    let push_nonzero = |out: &mut Vec<(DilIndex, Complex64)>, d: DilIndex| {
        let a = entry(t, d);
        if a != Complex64::new(0.0, 0.0) {
            out.push((d, a));
        }
    };
    let tail = match row_shape(t) {
        RowShape::Single(d) => {
            if w.contains_dil(&d) {
                out.push((d, Complex64::new(1.0, 0.0)));
                0.0
            } else {
                1.0
            }
        }
        RowShape::Scales(s) => {
            // scale m carries mass 2^{-m}; within it |α|² <= 1/(π² 2^m (x - j)²), x = k 2^{-m}
            let (lo, hi) = (w.dil_range.lo.max(1), w.dil_range.hi);
            let mut tail = 0.0;
            if lo > hi {
                tail = 1.0;
            } else {
                tail += 1.0 - pow2(1 - lo); // m in [1, lo)
                tail += pow2(-hi); // m > hi
                for m in lo..=hi {
                    for j in w.dil_labels.iter() {
                        push_nonzero(&mut out, DilIndex::new(s, j, m));
                    }
                    let x = t.label as f64 * pow2(-m);
                    let bound = inv_sq_tail(x, w.dil_labels) / (PI * PI * pow2(m));
                    tail += bound.min(pow2(-m));
                }
            }
            tail
        }
        RowShape::Band(s, m) => {
            if !w.dil_range.contains(m) {
                1.0
            } else {
                for j in w.dil_labels.iter() {
                    push_nonzero(&mut out, DilIndex::new(s, j, m));
                }
                // |α|² <= 2^p / (π² (j - k 2^p)²)
                let p = -m;
                let x = t.label as f64 * pow2(p);
                (pow2(p) / (PI * PI) * inv_sq_tail(x, w.dil_labels)).min(1.0)
            }
        }
    };
    (out, tail)
}

/// Column entries inside the window with a bound on the squared mass left outside.
pub fn column_in_window(d: DilIndex, w: &Window) -> (Vec<(TransIndex, Complex64)>, f64) {
    let mut out = Vec::new();
    let (s, j, m) = (d.sign, d.label, d.m);
    let push_nonzero = |out: &mut Vec<(TransIndex, Complex64)>, t: TransIndex| {
        let a = entry(t, d);
        if a != Complex64::new(0.0, 0.0) {
            out.push((t, a));
        }
    };
    if m == 0 {
        let t = TransIndex::new(j, if s == Sign::Plus { 1 } else { -2 });
        return if w.contains_trans(&t) {
            (vec![(t, Complex64::new(1.0, 0.0))], 0.0)
        } else {
            (out, 1.0)
        };
    }
    if m > 0 {
        // one cell; |α|² <= 2^m / (π² (k - j 2^m)²)
        let n = if s == Sign::Plus { 0 } else { -1 };
        if !w.trans_range.contains(n) {
            return (out, 1.0);
        }
        for k in w.trans_labels.iter() {
            push_nonzero(&mut out, TransIndex::new(k, n));
        }
        let x = j as f64 * pow2(m);
        let tail = (pow2(m) / (PI * PI) * inv_sq_tail(x, w.trans_labels)).min(1.0);
        return (out, tail);
    }
    // m = -p: cells n = 2^p + q (or -2^p - q - 1), each carrying mass 2^{-p}
    let p = -m;
    if p >= 62 {
        return (out, 1.0);
    }
    let cells = 1i64 << p;
    let (first, last) = match s {
        Sign::Plus => (1i64 << p, (1i64 << (p + 1)) - 1),
        Sign::Minus => (-(1i64 << (p + 1)), -(1i64 << p) - 1),
    };
    let per_cell = pow2(-p);
    let mut tail = 0.0;
    let mut kept = 0i64;
    if let Some((a, b)) = w.trans_range.intersect(first, last) {
        let x = j as f64 * pow2(-p);
        let cell_tail = (inv_sq_tail(x, w.trans_labels) / (PI * PI * pow2(p))).min(per_cell);
        for n in a..=b {
            for k in w.trans_labels.iter() {
                push_nonzero(&mut out, TransIndex::new(k, n));
            }
            tail += cell_tail;
        }
        kept = b - a + 1;
    }
    tail += (cells - kept) as f64 * per_cell;
    (out, tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::BasisFamily;

    #[test]
    fn table_examples() {
        let a = entry(TransIndex::new(1, 0), DilIndex::plus(0, 1));
        assert!((a - Complex64::new(0.0, -(2f64.sqrt()) / PI)).norm() < 1e-15);
        assert_eq!(entry(TransIndex::new(7, 1), DilIndex::plus(7, 0)), Complex64::new(1.0, 0.0));
        assert_eq!(entry(TransIndex::new(7, 1), DilIndex::minus(7, 0)), Complex64::new(0.0, 0.0));
        // k ≡ 0 mod 2^m with k ≠ j 2^m: exact zero
        assert_eq!(entry(TransIndex::new(4, 0), DilIndex::plus(0, 2)), Complex64::new(0.0, 0.0));
        assert_eq!(entry(TransIndex::new(4, 0), DilIndex::plus(1, 2)), Complex64::new(0.5, 0.0));
        assert_eq!(block(2), Some((Sign::Plus, 1, 0)));
        assert_eq!(block(-3), Some((Sign::Minus, 1, 0)));
        assert_eq!(block(-5), Some((Sign::Minus, 2, 0)));
        assert_eq!(block(-8), Some((Sign::Minus, 2, 3)));
    }

    #[test]
    fn tail_bounds_dominate_actual_mass() {
        let w = Window::symmetric(BasisFamily::Exponential, 6).with_m_max(8);
        for k in -6..=6 {
            for n in -6..=6 {
                let t = TransIndex::new(k, n);
                let (row, tail) = row_in_window(t, &w);
                let kept: f64 = row.iter().map(|(_, a)| a.norm_sqr()).sum();
                assert!(kept <= 1.0 + 1e-12);
                assert!(kept + tail >= 1.0 - 1e-12, "row {t}: kept {kept} tail {tail}");
            }
        }
        for j in -6..=6 {
            for m in -5..=5 {
                for s in Sign::BOTH {
                    let d = DilIndex::new(s, j, m);
                    let (col, tail) = column_in_window(d, &w);
                    let kept: f64 = col.iter().map(|(_, a)| a.norm_sqr()).sum();
                    assert!(kept <= 1.0 + 1e-12);
                    assert!(kept + tail >= 1.0 - 1e-12, "col {d}: kept {kept} tail {tail}");
                }
            }
        }
    }
}
