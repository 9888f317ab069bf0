//! Change-of-basis entries between the Haar translation basis
//! (`L_0 = φ`, `L_{2^p+q} = ψ_{p,q}`) and the Haar dilation basis
//! (`K_{+,0} = φ_{0,1}`, `K_{+,2^p+q} = ψ_{p,2^p+q}`, `K_{-,0} = φ_{0,-2}`,
//! `K_{-,2^p+q} = ψ_{p,-2^{p+1}+q}`).
//!
//! All entries are real. Rows have finitely many entries except the `j = 0`
//! geometric tails of rows `(0,0)`, `(2^r,0)`, `(0,-1)` and `(2^{r+1}-1,-1)`.

use crate::bases::{haar_level, pow2};
use crate::model::{DilIndex, IndexRange, Sign, TransIndex, Window};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `(u, v)` with `n = 2^u + v`, `0 <= v < 2^u`, for `n >= 2`.
fn split_pos(n: i64) -> (u32, i64) {
    let u = 63 - n.leading_zeros();
    (u, n - (1i64 << u))
}

/// `(u, v)` with `n = -2^{u+1} + v`, `0 <= v < 2^u`, for `n <= -3`.
fn split_neg(n: i64) -> (u32, i64) {
    let x = -n;
    let u = 63 - (x - 1).leading_zeros();
    (u, n + (1i64 << (u + 1)))
}

/// The helper `w(u,v,p)` in its floor-expression form.
pub fn w_floor(u: u32, v: i64, p: u32) -> i64 {
    let a = 1i64 << (u - p);
    let b = 1i64 << (u - p - 1);
    (v - a * (v / a)) / b
}

/// The helper `w(u,v,p)` as bit `u - p - 1` of `v`.
pub fn w_bit(u: u32, v: i64, p: u32) -> i64 {
    (v >> (u - p - 1)) & 1
}

/// Entry `α_{i,n}^{s,j,m}` by direct case analysis.
pub fn entry(t: TransIndex, d: DilIndex) -> f64 {
    let (i, n) = (t.label, t.n);
    let (s, j, m) = (d.sign, d.label, d.m);
    match n {
        0 => {
            if s != Sign::Plus {
                return 0.0;
            }
            if i == 0 {
                return if j == 0 && m > 0 { pow2(-m).sqrt() } else { 0.0 };
            }
            let (r, tt) = haar_level(i).expect("positive label");
            let r = r as i64;
            if tt == 0 {
                if j != 0 {
                    0.0
                } else if m == r + 1 {
                    -FRAC_1_SQRT_2
                } else if m > r + 1 {
                    pow2(r - m).sqrt()
                } else {
                    0.0
                }
            } else {
                let (p, _) = haar_level(tt).expect("positive offset");
                if j == tt && m == r - p as i64 {
                    1.0
                } else {
                    0.0
                }
            }
        }
        1 => indicator(s == Sign::Plus && j == i && m == 0),
        -2 => indicator(s == Sign::Minus && j == i && m == 0),
        -1 => {
            if s != Sign::Minus {
                return 0.0;
            }
            if i == 0 {
                return if j == 0 && m > 0 { pow2(-m).sqrt() } else { 0.0 };
            }
            if (i + 1) & i == 0 {
                // i = 2^{r+1} - 1
                let r = (63 - (i + 1).leading_zeros()) as i64 - 1;
                return if j != 0 {
                    0.0
                } else if m == r + 1 {
                    FRAC_1_SQRT_2
                } else if m > r + 1 {
                    -pow2(r - m).sqrt()
                } else {
                    0.0
                };
            }
            // i = 2^{r+1} - 2^{p+1} + q with 0 <= p < r, 0 <= q < 2^p
            let r = (63 - i.leading_zeros()) as i64;
            let dist = (1i64 << (r + 1)) - i;
            let p = (63 - (dist - 1).leading_zeros()) as i64;
            let q = (1i64 << (p + 1)) - dist;
            indicator(j == (1i64 << p) + q && m == r - p)
        }
        _ => {
            let (sign, (u, v)) = if n > 1 { (Sign::Plus, split_pos(n)) } else { (Sign::Minus, split_neg(n)) };
            if s != sign || m != -(u as i64) {
                return 0.0;
            }
            if i > 0 {
                let (r, tt) = haar_level(i).expect("positive label");
                let target = ((1i128 << u) + v as i128) * (1i128 << r) + tt as i128;
                indicator(j as i128 == target)
            } else if j == 0 {
                pow2(-(u as i64)).sqrt()
            } else {
                let (p, qq) = haar_level(j).expect("positive label");
                if p < u && qq == v / (1i64 << (u - p)) {
                    let sgn = if w_floor(u, v, p) == 0 { 1.0 } else { -1.0 };
                    sgn * pow2(p as i64 - u as i64).sqrt()
                } else {
                    0.0
                }
            }
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Label-0 entries `(s, 0, m)` for all `m >= from_m`, with value `±2^{(shift - m)/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricTail {
    pub sign: Sign,
    pub from_m: i64,
    pub shift: i64,
    pub negative: bool,
}

impl GeometricTail {
    pub fn value(&self, m: i64) -> f64 {
        let a = pow2(self.shift - m).sqrt();
        if self.negative {
            -a
        } else {
            a
        }
    }

    /// `Σ_{m >= a} |value(m)|²`.
    fn mass_from(&self, a: i64) -> f64 {
        let a = a.max(self.from_m);
        pow2(self.shift + 1 - a)
    }
}

/// Structural description of one row: finitely many entries plus an optional tail.
#[derive(Debug, Clone, PartialEq)]
pub struct RowPattern {
    pub finite: Vec<(DilIndex, f64)>,
    pub tail: Option<GeometricTail>,
}

/// Labels may exceed `i64` for far-out rows; those never fall inside a window.
fn label_from_i128(x: i128) -> Option<i64> {
    i64::try_from(x).ok()
}

pub fn row_pattern(t: TransIndex) -> RowPattern {
    let (i, n) = (t.label, t.n);
    let mut finite = Vec::new();
    let mut tail = None;
    match n {
        0 => {
            if i == 0 {
                tail = Some(GeometricTail { sign: Sign::Plus, from_m: 1, shift: 0, negative: false });
            } else {
                let (r, tt) = haar_level(i).expect("positive label");
                if tt == 0 {
                    finite.push((DilIndex::plus(0, r as i64 + 1), -FRAC_1_SQRT_2));
                    tail = Some(GeometricTail { sign: Sign::Plus, from_m: r as i64 + 2, shift: r as i64, negative: false });
                } else {
                    let (p, _) = haar_level(tt).expect("positive offset");
                    finite.push((DilIndex::plus(tt, r as i64 - p as i64), 1.0));
                }
            }
        }
        1 => finite.push((DilIndex::plus(i, 0), 1.0)),
        -2 => finite.push((DilIndex::minus(i, 0), 1.0)),
        -1 => {
            if i == 0 {
                tail = Some(GeometricTail { sign: Sign::Minus, from_m: 1, shift: 0, negative: false });
            } else if (i + 1) & i == 0 {
                let r = (63 - (i + 1).leading_zeros()) as i64 - 1;
                finite.push((DilIndex::minus(0, r + 1), FRAC_1_SQRT_2));
                tail = Some(GeometricTail { sign: Sign::Minus, from_m: r + 2, shift: r, negative: true });
            } else {
                let r = (63 - i.leading_zeros()) as i64;
                let dist = (1i64 << (r + 1)) - i;
                let p = (63 - (dist - 1).leading_zeros()) as i64;
                let q = (1i64 << (p + 1)) - dist;
                finite.push((DilIndex::minus((1i64 << p) + q, r - p), 1.0));
            }
        }
        _ => {
            let (sign, (u, v)) = if n > 1 { (Sign::Plus, split_pos(n)) } else { (Sign::Minus, split_neg(n)) };
            let m = -(u as i64);
            if i > 0 {
                let (r, tt) = haar_level(i).expect("positive label");
                let j = ((1i128 << u) + v as i128) * (1i128 << r) + tt as i128;
                // rows whose label overflows i64 cannot be represented; they lie outside every window
                if let Some(j) = label_from_i128(j) {
                    finite.push((DilIndex::new(sign, j, m), 1.0));
                } else {
                    finite.push((DilIndex::new(sign, i64::MAX, m), 1.0));
                }
            } else {
                finite.push((DilIndex::new(sign, 0, m), pow2(m).sqrt()));
                for p in 0..u {
                    let j = (1i64 << p) + (v >> (u - p));
                    let sgn = if w_bit(u, v, p) == 0 { 1.0 } else { -1.0 };
                    finite.push((DilIndex::new(sign, j, m), sgn * pow2(p as i64 - u as i64).sqrt()));
                }
            }
        }
    }
    RowPattern { finite, tail }
}

/// Row entries inside the window and the exact squared mass left outside.
pub fn row_in_window(t: TransIndex, w: &Window) -> (Vec<(DilIndex, f64)>, f64) {
    let pat = row_pattern(t);
    let mut out = Vec::new();
    let mut dropped = 0.0;
    for (d, a) in pat.finite {
        if w.contains_dil(&d) {
            out.push((d, a));
        } else {
            dropped += a * a;
        }
    }
    if let Some(tail) = pat.tail {
        if w.dil_labels.contains(0) && tail.from_m <= w.dil_range.hi {
            let lo = tail.from_m.max(w.dil_range.lo);
            for m in lo..=w.dil_range.hi {
                out.push((DilIndex::new(tail.sign, 0, m), tail.value(m)));
            }
            dropped += tail.mass_from(tail.from_m) - tail.mass_from(lo) + tail.mass_from(w.dil_range.hi + 1);
        } else {
            dropped += tail.mass_from(tail.from_m);
        }
    }
    (out, dropped)
}

/// Column entries `(i, n) ↦ α_{i,n}^{s,j,m}` inside the window and the exact squared mass left outside.
pub fn column_in_window(d: DilIndex, w: &Window) -> (Vec<(TransIndex, f64)>, f64) {
    let (s, j, m) = (d.sign, d.label, d.m);
    let mut out: Vec<(TransIndex, f64)> = Vec::new();
    let mut dropped = 0.0;
    let push = |label: i128, n: i128, a: f64, out: &mut Vec<(TransIndex, f64)>, dropped: &mut f64| {
        let inside = match (i64::try_from(label), i64::try_from(n)) {
            (Ok(l), Ok(n)) => w.contains_trans(&TransIndex::new(l, n)).then_some(TransIndex::new(l, n)),
            _ => None,
        };
        match inside {
            Some(t) => out.push((t, a)),
            None => *dropped += a * a,
        }
    };
    if m >= 1 {
        let n_cell: i128 = if s == Sign::Plus { 0 } else { -1 };
        match haar_level(j) {
            None => {
                push(0, n_cell, pow2(-m).sqrt(), &mut out, &mut dropped);
                for r in 0..=(m - 1) {
                    let label = match s {
                        Sign::Plus => 1i128 << r,
                        Sign::Minus => (1i128 << (r + 1)) - 1,
                    };
                    let a = if r == m - 1 {
                        if s == Sign::Plus {
                            -FRAC_1_SQRT_2
                        } else {
                            FRAC_1_SQRT_2
                        }
                    } else if s == Sign::Plus {
                        pow2(r - m).sqrt()
                    } else {
                        -pow2(r - m).sqrt()
                    };
                    if r >= 120 {
                        dropped += a * a;
                        continue;
                    }
                    push(label, n_cell, a, &mut out, &mut dropped);
                }
            }
            Some((p, q)) => {
                let r = m + p as i64;
                let label = if r >= 120 {
                    None
                } else {
                    Some(match s {
                        Sign::Plus => (1i128 << r) + (1i128 << p) + q as i128,
                        Sign::Minus => (1i128 << (r + 1)) - (1i128 << (p + 1)) + q as i128,
                    })
                };
                match label {
                    Some(l) => push(l, n_cell, 1.0, &mut out, &mut dropped),
                    None => dropped += 1.0,
                }
            }
        }
        return (out, dropped);
    }
    if m == 0 {
        let n = if s == Sign::Plus { 1 } else { -2 };
        push(j as i128, n, 1.0, &mut out, &mut dropped);
        return (out, dropped);
    }
    let u = (-m) as u32;
    if u >= 62 {
        return (out, 1.0);
    }
    let base: i64 = if s == Sign::Plus { 1i64 << u } else { -(1i64 << (u + 1)) };
    let cells = 1i64 << u;
    // cells n = base + v, v in [0, 2^u), clipped to the window's n range
    let v_range = |lo_v: i64, hi_v: i64| -> Option<(i64, i64)> {
        let lo = lo_v.max(w.trans_range.lo - base);
        let hi = hi_v.min(w.trans_range.hi - base);
        (lo <= hi).then_some((lo, hi))
    };
    match haar_level(j) {
        None => {
            let per = pow2(m);
            let mut kept = 0i64;
            if w.trans_labels.contains(0) {
                if let Some((lo, hi)) = v_range(0, cells - 1) {
                    for v in lo..=hi {
                        out.push((TransIndex::new(0, base + v), per.sqrt()));
                    }
                    kept = hi - lo + 1;
                }
            }
            dropped += (cells - kept) as f64 * per;
        }
        Some((p, q)) if p < u => {
            let span = 1i64 << (u - p);
            let per = pow2(p as i64 - u as i64);
            let mut kept = 0i64;
            if w.trans_labels.contains(0) {
                if let Some((lo, hi)) = v_range(q * span, q * span + span - 1) {
                    for v in lo..=hi {
                        let sgn = if w_bit(u, v, p) == 0 { 1.0 } else { -1.0 };
                        out.push((TransIndex::new(0, base + v), sgn * per.sqrt()));
                    }
                    kept = hi - lo + 1;
                }
            }
            dropped += (span - kept) as f64 * per;
        }
        Some((p, _)) => {
            let r = p - u;
            let t = j & ((1i64 << r) - 1);
            let v = (j >> r) - (1i64 << u);
            push(((1i64 << r) + t) as i128, (base + v) as i128, 1.0, &mut out, &mut dropped);
        }
    }
    (out, dropped)
}

/// Labels of the translation basis at Haar level `<= p`: `[0, 2^{p+1} - 1]`.
pub fn labels_up_to_level(p: u32) -> IndexRange {
    IndexRange { lo: 0, hi: (1i64 << (p + 1)) - 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_examples() {
        assert_eq!(entry(TransIndex::new(5, 1), DilIndex::plus(5, 0)), 1.0);
        assert_eq!(entry(TransIndex::new(0, 4), DilIndex::plus(0, -2)), 0.5);
        assert_eq!(entry(TransIndex::new(1, 0), DilIndex::plus(0, 1)), -FRAC_1_SQRT_2);
        assert_eq!(entry(TransIndex::new(3, 0), DilIndex::plus(1, 1)), 1.0);
        let row = row_pattern(TransIndex::new(3, 0));
        assert_eq!(row.finite, vec![(DilIndex::plus(1, 1), 1.0)]);
        assert!(row.tail.is_none());
    }

    #[test]
    fn splits() {
        assert_eq!(split_pos(2), (1, 0));
        assert_eq!(split_pos(7), (2, 3));
        assert_eq!(split_neg(-3), (1, 1));
        assert_eq!(split_neg(-4), (1, 0));
        assert_eq!(split_neg(-5), (2, 3));
        assert_eq!(split_neg(-8), (2, 0));
    }

    #[test]
    fn w_forms_agree() {
        for u in 1..10u32 {
            for v in 0..(1i64 << u) {
                for p in 0..u {
                    assert_eq!(w_floor(u, v, p), w_bit(u, v, p), "u={u} v={v} p={p}");
                }
            }
        }
    }

    #[test]
    fn rows_have_unit_mass() {
        let big = Window::symmetric(crate::bases::BasisFamily::Haar, 6).with_m_max(200).with_dil_labels(0, 1 << 20).unwrap();
        for i in 0..64 {
            for n in -40..40 {
                let (row, dropped) = row_in_window(TransIndex::new(i, n), &big);
                let mass: f64 = row.iter().map(|(_, a)| a * a).sum();
                assert!((mass + dropped - 1.0).abs() < 1e-12, "row ({i},{n}) mass {mass} dropped {dropped}");
                assert!(dropped < 1e-50 || n.abs() > 6, "({i},{n}) dropped {dropped}");
            }
        }
    }

    proptest! {
        #[test]
        fn row_pattern_matches_entry(i in 0i64..200, n in -70i64..70, m in -8i64..9, j in 0i64..2000, plus in any::<bool>()) {
            let t = TransIndex::new(i, n);
            let d = DilIndex::new(if plus { Sign::Plus } else { Sign::Minus }, j, m);
            let pat = row_pattern(t);
            let mut from_row = pat.finite.iter().filter(|(e, _)| *e == d).map(|(_, a)| *a).sum::<f64>();
            if let Some(tail) = pat.tail {
                if d.sign == tail.sign && d.label == 0 && d.m >= tail.from_m {
                    from_row += tail.value(d.m);
                }
            }
            prop_assert_eq!(from_row, entry(t, d));
        }

        #[test]
        fn columns_transpose_rows(j in 0i64..300, m in -7i64..8, plus in any::<bool>()) {
            let d = DilIndex::new(if plus { Sign::Plus } else { Sign::Minus }, j, m);
            let w = Window::new(IndexRange { lo: 0, hi: 1 << 17 }, IndexRange { lo: -300, hi: 300 }, IndexRange { lo: 0, hi: 1 << 17 }, IndexRange { lo: -20, hi: 20 });
            let (col, dropped) = column_in_window(d, &w);
            let mass: f64 = col.iter().map(|(_, a)| a * a).sum();
            prop_assert!((mass + dropped - 1.0).abs() < 1e-12);
            prop_assert!(dropped == 0.0);
            for (t, a) in &col {
                prop_assert_eq!(*a, entry(*t, d));
                let (row, _) = row_in_window(*t, &w);
                prop_assert!(row.iter().any(|(e, b)| *e == d && b == a));
            }
        }
    }
}
