//! Coordinates of `D^p T^q f` and `T^q D^p f` in both models.
//!
//! `T` shifts `n` in the translation model and `D` shifts `m` in the dilation
//! model; the mixed actions go through the change of basis.

use crate::alpha::{f_from_g, g_from_f, AlphaMatrix};
use crate::error::Result;
use crate::model::{DilIndex, FCoordVec, GCoordVec, TransIndex, Window, Windowed};

/// `(i, n) ↦ (i, n + q)`.
pub fn shift_t(v: &FCoordVec, q: i64) -> FCoordVec {
    v.map_index(|t| TransIndex::new(t.label, t.n + q))
}

/// `(s, j, m) ↦ (s, j, m + p)`.
pub fn shift_d(v: &GCoordVec, p: i64) -> GCoordVec {
    v.map_index(|d| DilIndex::new(d.sign, d.label, d.m + p))
}

fn chain(a: f64, b: f64) -> f64 {
    let s = a.max(0.0).sqrt() + b.max(0.0).sqrt();
    s * s
}

/// `D^p T^q f` from the translation coordinates of `f`.
pub fn act_dt_on_f(v: &FCoordVec, p: i64, q: i64, a: &AlphaMatrix, w: &Window) -> Result<Windowed<FCoordVec>> {
    if p == 0 {
        return Ok(Windowed::exact(shift_t(v, q)));
    }
    let g = g_from_f(&shift_t(v, q), a, w)?;
    let back = f_from_g(&shift_d(&g.value, p), a, w)?;
    Ok(Windowed { value: back.value, tail_sq: chain(g.tail_sq, back.tail_sq) })
}

/// `T^q D^p f` from the translation coordinates of `f`.
pub fn act_td_on_f(v: &FCoordVec, p: i64, q: i64, a: &AlphaMatrix, w: &Window) -> Result<Windowed<FCoordVec>> {
    if p == 0 {
        return Ok(Windowed::exact(shift_t(v, q)));
    }
    let g = g_from_f(v, a, w)?;
    let back = f_from_g(&shift_d(&g.value, p), a, w)?;
    Ok(Windowed { value: shift_t(&back.value, q), tail_sq: chain(g.tail_sq, back.tail_sq) })
}

/// `D^p T^q f` from the dilation coordinates of `f`.
pub fn act_dt_on_g(v: &GCoordVec, p: i64, q: i64, a: &AlphaMatrix, w: &Window) -> Result<Windowed<GCoordVec>> {
    if q == 0 {
        return Ok(Windowed::exact(shift_d(v, p)));
    }
    let f = f_from_g(v, a, w)?;
    let g = g_from_f(&shift_t(&f.value, q), a, w)?;
    Ok(Windowed { value: shift_d(&g.value, p), tail_sq: chain(f.tail_sq, g.tail_sq) })
}

/// `T^q D^p f` from the dilation coordinates of `f`.
pub fn act_td_on_g(v: &GCoordVec, p: i64, q: i64, a: &AlphaMatrix, w: &Window) -> Result<Windowed<GCoordVec>> {
    if q == 0 {
        return Ok(Windowed::exact(shift_d(v, p)));
    }
    let f = f_from_g(&shift_d(v, p), a, w)?;
    let g = g_from_f(&shift_t(&f.value, q), a, w)?;
    Ok(Windowed { value: g.value, tail_sq: chain(f.tail_sq, g.tail_sq) })
}
