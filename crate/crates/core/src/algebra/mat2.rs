//! 2x2 matrices of series: products, determinant, adjugate, exact inverse.

use std::fmt;
use std::sync::Arc;

use crate::algebra::field::FieldParams;
use crate::algebra::series::{Series, Valuation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat2 {
    entries: [[Series; 2]; 2],
}

impl Mat2 {
    pub fn new(entries: [[Series; 2]; 2]) -> Mat2 {
        Mat2 { entries }
    }

    pub fn from_rows(a: Series, b: Series, c: Series, d: Series) -> Mat2 {
        Mat2 {
            entries: [[a, b], [c, d]],
        }
    }

    pub fn identity(field: &Arc<FieldParams>) -> Mat2 {
        Mat2::diag(Series::one(field), Series::one(field))
    }

    pub fn zero(field: &Arc<FieldParams>) -> Mat2 {
        Mat2::diag(Series::zero(field), Series::zero(field))
    }

    pub fn diag(a: Series, d: Series) -> Mat2 {
        let field = Arc::clone(a.field());
        Mat2 {
            entries: [
                [a, Series::zero(&field)],
                [Series::zero(&field), d],
            ],
        }
    }

    pub fn field(&self) -> &Arc<FieldParams> {
        self.entries[0][0].field()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Series {
        &self.entries[i][j]
    }

    pub fn map(&self, f: impl Fn(&Series) -> Series) -> Mat2 {
        Mat2 {
            entries: [
                [f(&self.entries[0][0]), f(&self.entries[0][1])],
                [f(&self.entries[1][0]), f(&self.entries[1][1])],
            ],
        }
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let e = &self.entries;
        let o = &other.entries;
        let prod = |i: usize, j: usize| e[i][0].mul(&o[0][j]).add(&e[i][1].mul(&o[1][j]));
        Mat2 {
            entries: [[prod(0, 0), prod(0, 1)], [prod(1, 0), prod(1, 1)]],
        }
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        Mat2 {
            entries: [
                [
                    self.entries[0][0].add(&other.entries[0][0]),
                    self.entries[0][1].add(&other.entries[0][1]),
                ],
                [
                    self.entries[1][0].add(&other.entries[1][0]),
                    self.entries[1][1].add(&other.entries[1][1]),
                ],
            ],
        }
    }

    pub fn scale(&self, s: &Series) -> Mat2 {
        self.map(|x| x.mul(s))
    }

    pub fn det(&self) -> Series {
        let e = &self.entries;
        e[0][0].mul(&e[1][1]).sub(&e[0][1].mul(&e[1][0]))
    }

    pub fn trace(&self) -> Series {
        self.entries[0][0].add(&self.entries[1][1])
    }

    /// Adjugate of (a, b; c, d): (d, -b; -c, a). M * adj(M) = det(M) * Id.
    pub fn adjugate(&self) -> Mat2 {
        let e = &self.entries;
        Mat2 {
            entries: [
                [e[1][1].clone(), e[0][1].neg()],
                [e[1][0].neg(), e[0][0].clone()],
            ],
        }
    }

    pub fn transpose(&self) -> Mat2 {
        let e = &self.entries;
        Mat2 {
            entries: [
                [e[0][0].clone(), e[1][0].clone()],
                [e[0][1].clone(), e[1][1].clone()],
            ],
        }
    }

    /// Entrywise u -> u^p.
    pub fn frobenius(&self) -> Mat2 {
        self.map(Series::frobenius)
    }

    /// All four entries integral.
    pub fn is_integral(&self) -> Result<bool> {
        for row in &self.entries {
            for s in row {
                if !s.is_integral()? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// All four entries exactly zero.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Series::is_zero)
    }

    /// Inverse as adj(M) / det(M). Exact whenever the determinant is a
    /// single term; otherwise capped through the determinant's inverse.
    pub fn inverse(&self, work_prec: i64) -> Result<Mat2> {
        let det = self.det();
        let det_inv = det.inverse(work_prec).map_err(|e| match e {
            Error::DivisionByZero => Error::SingularMatrix,
            other => other,
        })?;
        Ok(self.adjugate().scale(&det_inv))
    }

    /// Valuation of the determinant.
    pub fn det_valuation(&self) -> Result<Valuation> {
        self.det().valuation()
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}; {}, {}]",
            self.entries[0][0], self.entries[0][1], self.entries[1][0], self.entries[1][1]
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::{FieldCtor, FieldParams};

    fn f9() -> Arc<FieldParams> {
        FieldParams::new(3, 2).unwrap()
    }

    fn u(f: &Arc<FieldParams>, k: i64) -> Series {
        Series::u_pow(f, k)
    }

    #[test]
    fn det_of_diag() {
        let f = f9();
        let m = Mat2::diag(u(&f, 4), Series::one(&f));
        assert_eq!(m.det(), u(&f, 4));
    }

    #[test]
    fn factored_diagonal_identity() {
        // (0, 1; -1, 2u) * (2, -u; u^-1, 0) = (u^-1, 0; 0, u), exactly.
        let f = f9();
        let two = Series::constant(&f, 2);
        let neg_one = Series::constant(&f, 2); // -1 = 2 in F_3
        let lhs1 = Mat2::from_rows(
            Series::zero(&f),
            Series::one(&f),
            neg_one,
            u(&f, 1).scale(&f.scalar(2)),
        );
        let lhs2 = Mat2::from_rows(two, u(&f, 1).neg(), u(&f, -1), Series::zero(&f));
        let prod = lhs1.mul(&lhs2);
        let expect = Mat2::diag(u(&f, -1), u(&f, 1));
        assert_eq!(prod, expect);
    }

    #[test]
    fn adjugate_identities() {
        let f = f9();
        let b = Series::monomial(&f, f.gen(), 2);
        let m = Mat2::from_rows(Series::zero(&f), b.clone(), Series::zero(&f), Series::zero(&f));
        let adj = m.adjugate();
        assert_eq!(adj.entry(0, 1), &b.neg());
        assert!(adj.entry(0, 0).is_zero());
        // M * adj(M) = det(M) * Id for a dense example.
        let m = Mat2::from_rows(u(&f, -1), Series::one(&f), u(&f, 2), u(&f, 1));
        let d = m.det();
        let prod = m.mul(&m.adjugate());
        assert_eq!(prod, Mat2::diag(d.clone(), d));
    }

    #[test]
    fn exact_inverse_when_det_is_monomial() {
        let f = f9();
        let m = Mat2::from_rows(u(&f, -1), Series::one(&f), Series::zero(&f), u(&f, 1));
        let inv = m.inverse(8).unwrap();
        assert_eq!(m.mul(&inv), Mat2::identity(&f));
        assert!(inv.entry(0, 0).precision().is_exact());
    }

    #[test]
    fn singular_matrix_rejected() {
        let f = f9();
        let m = Mat2::from_rows(Series::one(&f), Series::one(&f), Series::one(&f), Series::one(&f));
        assert!(matches!(m.inverse(8), Err(Error::SingularMatrix)));
    }
}
