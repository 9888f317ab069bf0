//! The change-of-representation matrix `α_{i,n}^{s,j,m} = ∫ L_i^(n) conj(K_{s,j}^(m))`
//! and the coordinate transfer between the two models:
//!
//! `f̃_{s,j}^(m) = Σ_{i,n} α_{i,n}^{s,j,m} f̂_i^(n)` and `f̂_i^(n) = Σ_{s,j,m} conj(α_{i,n}^{s,j,m}) f̃_{s,j}^(m)`.

pub mod exponential;
pub mod haar;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bases::BasisFamily;
use crate::error::Result;
use crate::model::{DilIndex, FCoordVec, GCoordVec, Sign, TransIndex, Window, Windowed, DROP_THRESHOLD};

/// Structural support of one row `(i, n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RowSupport {
    /// Finitely many entries, plus the label-0 tail `(s, 0, m)` for `m >= from_m` if present.
    Finite { entries: Vec<DilIndex>, tail: Option<(Sign, i64)> },
    /// Every label at every scale `m >= 1`.
    AllPositiveScales(Sign),
    /// Every label at one scale.
    Band(Sign, i64),
}

/// Lazily evaluated `α` for one basis family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphaMatrix {
    family: BasisFamily,
}

impl AlphaMatrix {
    pub fn new(family: BasisFamily) -> Self {
        AlphaMatrix { family }
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn entry(&self, t: TransIndex, d: DilIndex) -> Result<Complex64> {
        self.family.check_label(t.label)?;
        self.family.check_label(d.label)?;
        Ok(match self.family {
            BasisFamily::Exponential => exponential::entry(t, d),
            BasisFamily::Haar => Complex64::new(haar::entry(t, d), 0.0),
        })
    }

    pub fn support_query(&self, t: TransIndex) -> Result<RowSupport> {
        self.family.check_label(t.label)?;
        Ok(match self.family {
            BasisFamily::Haar => {
                let pat = haar::row_pattern(t);
                RowSupport::Finite {
                    entries: pat.finite.into_iter().map(|(d, _)| d).collect(),
                    tail: pat.tail.map(|g| (g.sign, g.from_m)),
                }
            }
            BasisFamily::Exponential => match exponential::row_shape(t) {
                exponential::RowShape::Single(d) => RowSupport::Finite { entries: vec![d], tail: None },
                exponential::RowShape::Scales(s) => RowSupport::AllPositiveScales(s),
                exponential::RowShape::Band(s, m) => RowSupport::Band(s, m),
            },
        })
    }

    /// Nonzero entries of row `(i, n)` inside `w`; `tail_sq` bounds the squared mass outside.
    pub fn row(&self, t: TransIndex, w: &Window) -> Result<Windowed<Vec<(DilIndex, Complex64)>>> {
        self.family.check_label(t.label)?;
        let (value, tail_sq) = match self.family {
            BasisFamily::Exponential => exponential::row_in_window(t, w),
            BasisFamily::Haar => {
                let (v, tail) = haar::row_in_window(t, w);
                (v.into_iter().map(|(d, a)| (d, Complex64::new(a, 0.0))).collect(), tail)
            }
        };
        Ok(Windowed { value, tail_sq })
    }

    /// Nonzero entries of column `(s, j, m)` inside `w`; `tail_sq` bounds the squared mass outside.
    pub fn column(&self, d: DilIndex, w: &Window) -> Result<Windowed<Vec<(TransIndex, Complex64)>>> {
        self.family.check_label(d.label)?;
        let (value, tail_sq) = match self.family {
            BasisFamily::Exponential => exponential::column_in_window(d, w),
            BasisFamily::Haar => {
                let (v, tail) = haar::column_in_window(d, w);
                (v.into_iter().map(|(t, a)| (t, Complex64::new(a, 0.0))).collect(), tail)
            }
        };
        Ok(Windowed { value, tail_sq })
    }
}

pub fn alpha_entry(family: BasisFamily, t: TransIndex, d: DilIndex) -> Result<Complex64> {
    AlphaMatrix::new(family).entry(t, d)
}

pub fn alpha_row(family: BasisFamily, t: TransIndex, w: &Window) -> Result<Vec<(DilIndex, Complex64)>> {
    Ok(AlphaMatrix::new(family).row(t, w)?.value)
}

/// `f̃ = α f̂`, truncated to the G side of `w`.
///
/// `tail_sq` bounds `‖dropped part‖²` by `(Σ |f̂_t| · ‖row_t outside w‖)²`.
pub fn g_from_f(v: &FCoordVec, a: &AlphaMatrix, w: &Window) -> Result<Windowed<GCoordVec>> {
    let items: Vec<(TransIndex, Complex64)> = v.iter().map(|(k, c)| (*k, *c)).collect();
    let rows: Result<Vec<_>> = items.par_iter().map(|(t, c)| Ok((*c, a.row(*t, w)?))).collect();
    let mut out = GCoordVec::new();
    let mut tail = 0.0;
    for (c, row) in rows? {
        for (d, alpha) in row.value {
            out.add(d, alpha * c);
        }
        tail += c.norm() * row.tail_sq.sqrt();
    }
    out.prune(DROP_THRESHOLD);
    Ok(Windowed { value: out, tail_sq: tail * tail })
}

/// `f̂ = α* f̃`, truncated to the F side of `w`.
pub fn f_from_g(v: &GCoordVec, a: &AlphaMatrix, w: &Window) -> Result<Windowed<FCoordVec>> {
    let items: Vec<(DilIndex, Complex64)> = v.iter().map(|(k, c)| (*k, *c)).collect();
    let cols: Result<Vec<_>> = items.par_iter().map(|(d, c)| Ok((*c, a.column(*d, w)?))).collect();
    let mut out = FCoordVec::new();
    let mut tail = 0.0;
    for (c, col) in cols? {
        for (t, alpha) in col.value {
            out.add(t, alpha.conj() * c);
        }
        tail += c.norm() * col.tail_sq.sqrt();
    }
    out.prune(DROP_THRESHOLD);
    Ok(Windowed { value: out, tail_sq: tail * tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IndexRange;

    #[test]
    fn haar_table_examples() {
        let h = AlphaMatrix::new(BasisFamily::Haar);
        for i in 0..20 {
            assert_eq!(h.entry(TransIndex::new(i, 1), DilIndex::plus(i, 0)).unwrap(), Complex64::new(1.0, 0.0));
        }
        for u in 1..6 {
            let a = h.entry(TransIndex::new(0, (1 << u) + 1), DilIndex::plus(0, -u)).unwrap();
            assert!((a.re - 2f64.powi(-u as i32).sqrt()).abs() < 1e-15);
        }
        assert!(h.entry(TransIndex::new(-1, 0), DilIndex::plus(0, 0)).is_err());
        let e = AlphaMatrix::new(BasisFamily::Exponential);
        assert_eq!(e.entry(TransIndex::new(-3, 1), DilIndex::plus(-3, 0)).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn haar_row_examples() {
        let w = Window::symmetric(BasisFamily::Haar, 4);
        let row = alpha_row(BasisFamily::Haar, TransIndex::new(1, 0), &w).unwrap();
        let mut expected = vec![(DilIndex::plus(0, 1), -std::f64::consts::FRAC_1_SQRT_2)];
        for m in 2..=4 {
            expected.push((DilIndex::plus(0, m), 2f64.powi(-m as i32).sqrt()));
        }
        let got: Vec<(DilIndex, f64)> = row.iter().map(|(d, a)| (*d, a.re)).collect();
        assert_eq!(got, expected);
        let row = alpha_row(BasisFamily::Haar, TransIndex::new(3, 0), &w).unwrap();
        assert_eq!(row, vec![(DilIndex::plus(1, 1), Complex64::new(1.0, 0.0))]);
        // row (0,0) restricted to m <= 0 is empty
        let w0 = w.with_dil_range(-3, 0).unwrap();
        assert!(alpha_row(BasisFamily::Haar, TransIndex::new(0, 0), &w0).unwrap().is_empty());
    }

    #[test]
    fn transfer_examples() {
        let a = AlphaMatrix::new(BasisFamily::Haar);
        let w = Window::symmetric(BasisFamily::Haar, 3);
        let g = g_from_f(&FCoordVec::unit(TransIndex::new(0, 1)), &a, &w).unwrap();
        assert_eq!(g.value, GCoordVec::unit(DilIndex::plus(0, 0)));
        let f = f_from_g(&GCoordVec::unit(DilIndex::plus(0, 0)), &a, &w).unwrap();
        assert_eq!(f.value, FCoordVec::unit(TransIndex::new(0, 1)));
        assert!(g_from_f(&FCoordVec::new(), &a, &w).unwrap().value.is_empty());
        assert!(f_from_g(&GCoordVec::new(), &a, &w).unwrap().value.is_empty());
    }

    #[test]
    fn support_query_shapes() {
        let h = AlphaMatrix::new(BasisFamily::Haar);
        assert_eq!(
            h.support_query(TransIndex::new(2, 0)).unwrap(),
            RowSupport::Finite { entries: vec![DilIndex::plus(0, 2)], tail: Some((Sign::Plus, 3)) }
        );
        let e = AlphaMatrix::new(BasisFamily::Exponential);
        assert_eq!(e.support_query(TransIndex::new(2, 5)).unwrap(), RowSupport::Band(Sign::Plus, -2));
        assert_eq!(e.support_query(TransIndex::new(2, -1)).unwrap(), RowSupport::AllPositiveScales(Sign::Minus));
        let _ = IndexRange::symmetric(0);
    }
}
