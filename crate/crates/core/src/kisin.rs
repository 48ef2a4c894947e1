//! Rank-2 Kisin-module presentations as cyclically indexed matrix tuples,
//! with the semilinear change-of-basis calculus, the validity predicate,
//! the lattice identity test, and the triangular (Iwasawa) normal form.
//!
//! Matrices are stored exactly as displayed in the classification: a
//! presentation `(A_1, ..., A_r)` records `phi(basis row i) = A_i * (basis
//! row i+1)` with basis vectors stacked as a column of rows, the index
//! cyclic. Read as operators on column coordinates these matrices act
//! through their transposes; the convention here keeps every displayed
//! product (change of basis, off-diagonal constraints, path products) in
//! its textbook order.

use std::ops::Index;
use std::sync::Arc;

use crate::algebra::series::Valuation;
use crate::algebra::{FieldParams, Mat2, Series};
use crate::error::{Error, Result};

/// Ambient parameters: the coefficient field, the ramification index e,
/// and the working precision for capped inversions.
///
/// Requires (p - 1) | e so that the base-lattice exponent e/(p-1) is an
/// integer.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    field: Arc<FieldParams>,
    e: i64,
    work_prec: i64,
}

impl Params {
    pub fn new(field: Arc<FieldParams>, e: i64) -> Result<Params> {
        let p = field.p() as i64;
        if e < 1 {
            return Err(Error::InvalidParams(format!("e = {e} must be positive")));
        }
        if e % (p - 1) != 0 {
            return Err(Error::InvalidParams(format!(
                "(p-1) = {} must divide e = {e}",
                p - 1
            )));
        }
        let work_prec = 4 * e * p + 8;
        Ok(Params {
            field,
            e,
            work_prec,
        })
    }

    pub fn with_work_prec(mut self, work_prec: i64) -> Params {
        self.work_prec = work_prec;
        self
    }

    pub fn field(&self) -> &Arc<FieldParams> {
        &self.field
    }

    pub fn p(&self) -> i64 {
        self.field.p() as i64
    }

    pub fn r(&self) -> usize {
        self.field.r()
    }

    pub fn e(&self) -> i64 {
        self.e
    }

    /// The boundary exponent e/(p-1).
    pub fn d(&self) -> i64 {
        self.e / (self.p() - 1)
    }

    pub fn work_prec(&self) -> i64 {
        self.work_prec
    }

    /// The base lattice: A_i = diag(u^e, 1) for every i.
    pub fn base_model(&self) -> Presentation {
        let f = &self.field;
        let mats = (0..self.r())
            .map(|_| Mat2::diag(Series::u_pow(f, self.e), Series::one(f)))
            .collect();
        Presentation {
            params: self.clone(),
            mats: Tuple::new(mats),
        }
    }

    /// The etale ambient module: A_i = Id for every i. Not a valid
    /// presentation for e > 0 (its determinant has valuation 0, not e).
    pub fn ambient_phi(&self) -> Presentation {
        let mats = (0..self.r()).map(|_| Mat2::identity(&self.field)).collect();
        Presentation {
            params: self.clone(),
            mats: Tuple::new(mats),
        }
    }
}

/// A length-r vector with cyclic successor indexing (0-based internally).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tuple<T> {
    items: Vec<T>,
}

impl<T> Tuple<T> {
    pub fn new(items: Vec<T>) -> Tuple<T> {
        Tuple { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Cyclic successor: i + 1, wrapping r - 1 back to 0.
    pub fn succ(&self, i: usize) -> usize {
        (i + 1) % self.items.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.items.iter()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tuple<U> {
        Tuple {
            items: self.items.iter().map(f).collect(),
        }
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }
}

impl<T> Index<usize> for Tuple<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.items[i]
    }
}

/// phi on a rank-2 module: phi(basis of component i) = A_i * (basis of
/// component i+1).
#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    params: Params,
    mats: Tuple<Mat2>,
}

impl Presentation {
    pub fn new(params: Params, mats: Vec<Mat2>) -> Result<Presentation> {
        if mats.len() != params.r() {
            return Err(Error::InvalidParams(format!(
                "expected {} matrices, got {}",
                params.r(),
                mats.len()
            )));
        }
        Ok(Presentation {
            params,
            mats: Tuple::new(mats),
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn mats(&self) -> &Tuple<Mat2> {
        &self.mats
    }

    /// Change of basis by B: A'_i = phi(B_i) * A_i * B_{i+1}^{-1}.
    pub fn change_basis(&self, b: &BasisChange) -> Result<Presentation> {
        if self.params != b.params {
            return Err(Error::MismatchedField);
        }
        let r = self.mats.len();
        let mut out = Vec::with_capacity(r);
        for i in 0..r {
            let next_inv = b.mats[self.mats.succ(i)].inverse(self.params.work_prec)?;
            let m = b.mats[i].frobenius().mul(&self.mats[i]).mul(&next_inv);
            out.push(m);
        }
        Ok(Presentation {
            params: self.params.clone(),
            mats: Tuple::new(out),
        })
    }

    /// True iff every A_i is integral with det A_i of valuation exactly e.
    ///
    /// The further requirement that u^e * A_i^{-1} be integral is automatic
    /// in rank 2: u^e * A^{-1} = adj(A) * (u^e / det A) = adj(A) * alpha^{-1}
    /// with alpha a unit, and adj(A) is integral whenever A is.
    pub fn is_valid(&self) -> Result<bool> {
        for m in self.mats.iter() {
            if !m.is_integral()? {
                return Ok(false);
            }
            if m.det_valuation()? != Valuation::Finite(self.params.e) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A tuple of basis-change matrices, each with unit determinant valuation.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange {
    params: Params,
    mats: Tuple<Mat2>,
}

impl BasisChange {
    pub fn new(params: Params, mats: Vec<Mat2>) -> Result<BasisChange> {
        if mats.len() != params.r() {
            return Err(Error::InvalidParams(format!(
                "expected {} matrices, got {}",
                params.r(),
                mats.len()
            )));
        }
        for m in &mats {
            if m.det_valuation()? != Valuation::Finite(0) {
                return Err(Error::Precondition(
                    "basis-change determinant must have valuation 0".into(),
                ));
            }
        }
        Ok(BasisChange {
            params,
            mats: Tuple::new(mats),
        })
    }

    pub fn identity(params: &Params) -> BasisChange {
        let mats = (0..params.r())
            .map(|_| Mat2::identity(params.field()))
            .collect();
        BasisChange {
            params: params.clone(),
            mats: Tuple::new(mats),
        }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn mats(&self) -> &Tuple<Mat2> {
        &self.mats
    }

    /// Composite basis change applying `earlier` first, then `self`:
    /// (self o earlier)_i = self_i * earlier_i.
    pub fn compose(&self, earlier: &BasisChange) -> Result<BasisChange> {
        if self.params != earlier.params {
            return Err(Error::MismatchedField);
        }
        let mats = (0..self.mats.len())
            .map(|i| self.mats[i].mul(&earlier.mats[i]))
            .collect();
        BasisChange::new(self.params.clone(), mats)
    }

    /// Same-lattice test: true iff C_i = other_i * self_i^{-1} is integral
    /// with unit determinant for every i, i.e. the two bases generate the
    /// same tuple of lattices.
    pub fn same_lattice(&self, other: &BasisChange) -> Result<bool> {
        if self.params != other.params {
            return Err(Error::MismatchedField);
        }
        for i in 0..self.mats.len() {
            let c = other.mats[i].mul(&self.mats[i].inverse(self.params.work_prec)?);
            if !c.is_integral()? {
                return Ok(false);
            }
            if c.det_valuation()? != Valuation::Finite(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Presentation of the lattice tuple whose generators are the columns of
/// the G_i inside the ambient identity module: A_i = G_{i+1}^{-1} * phi(G_i).
///
/// Reading the G_i as stacked generator rows instead corresponds to
/// `ambient_phi().change_basis(G)` and produces the entrywise transpose;
/// the two readings agree for diagonal generators and always agree on
/// integrality and determinant valuation, so validity is unaffected.
pub fn lattice_presentation(params: &Params, gens: &[Mat2]) -> Result<Presentation> {
    if gens.len() != params.r() {
        return Err(Error::InvalidParams(format!(
            "expected {} generator matrices, got {}",
            params.r(),
            gens.len()
        )));
    }
    let r = gens.len();
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let next_inv = gens[(i + 1) % r].inverse(params.work_prec)?;
        out.push(next_inv.mul(&gens[i].frobenius()));
    }
    Ok(Presentation {
        params: params.clone(),
        mats: Tuple::new(out),
    })
}

/// Result of triangularizing a basis-change matrix: B = Q * T with Q
/// integral of unit determinant and T = (u^-a, v; 0, u^a), v reduced mod
/// u^a F[[u]].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub a: i64,
    pub v: Series,
    /// The integral unit-determinant left cofactor Q.
    pub unit: Mat2,
}

impl NormalForm {
    /// The canonical triangular factor T = (u^-a, v; 0, u^a).
    pub fn triangular(&self) -> Mat2 {
        let f = self.v.field();
        Mat2::from_rows(
            Series::u_pow(f, -self.a),
            self.v.clone(),
            Series::zero(f),
            Series::u_pow(f, self.a),
        )
    }
}

/// Iwasawa normal form of a matrix with unit determinant valuation.
///
/// The row lattice ideal of first coordinates is generated by u^{-a} where
/// -a is the least first-column valuation; v is carried by the pivot row
/// and reduced mod u^a using only authoritative coefficients. Unit
/// normalization of the diagonal happens implicitly through the exact
/// monomial diagonal of T, with the unit parts absorbed into Q.
pub fn iwasawa_normal_form(b: &Mat2, work_prec: i64) -> Result<NormalForm> {
    if b.det_valuation()? != Valuation::Finite(0) {
        return Err(Error::Precondition(
            "Iwasawa normal form needs determinant of valuation 0".into(),
        ));
    }
    let f = b.field();
    let v00 = b.entry(0, 0).valuation()?;
    let v10 = b.entry(1, 0).valuation()?;
    let (pivot, pivot_val) = match (v00, v10) {
        (Valuation::Finite(x), Valuation::Finite(y)) => {
            if x <= y {
                (0, x)
            } else {
                (1, y)
            }
        }
        (Valuation::Finite(x), Valuation::Infinite) => (0, x),
        (Valuation::Infinite, Valuation::Finite(y)) => (1, y),
        (Valuation::Infinite, Valuation::Infinite) => {
            unreachable!("zero first column contradicts unit determinant")
        }
    };
    let a = -pivot_val;
    let p0 = b.entry(pivot, 0);
    let p1 = b.entry(pivot, 1);
    let v_full = p1.mul(&p0.inverse(work_prec)?).shift(-a);
    let v = v_full.reduced_below(a)?;
    let t = Mat2::from_rows(
        Series::u_pow(f, -a),
        v.clone(),
        Series::zero(f),
        Series::u_pow(f, a),
    );
    // det T = 1, so T^{-1} is the exact adjugate.
    let t_inv = t.adjugate();
    let q = b.mul(&t_inv);
    if !q.is_integral()? || q.det_valuation()? != Valuation::Finite(0) {
        return Err(Error::Precondition(
            "triangularization produced a non-unit cofactor".into(),
        ));
    }
    Ok(NormalForm { a, v, unit: q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FieldParams;

    fn params(p: u64, r: usize, e: i64) -> Params {
        Params::new(FieldParams::new(p, r).unwrap(), e).unwrap()
    }

    fn u(params: &Params, k: i64) -> Series {
        Series::u_pow(params.field(), k)
    }

    #[test]
    fn divisibility_precondition() {
        let f = FieldParams::new(3, 2).unwrap();
        assert!(Params::new(Arc::clone(&f), 3).is_err());
        assert!(Params::new(Arc::clone(&f), 0).is_err());
        assert!(Params::new(f, 4).is_ok());
    }

    #[test]
    fn base_model_formula() {
        for (p, r, e) in [(3, 2, 4), (3, 2, 2), (5, 2, 4)] {
            let pr = params(p, r, e);
            let base = pr.base_model();
            for m in base.mats().iter() {
                assert_eq!(m, &Mat2::diag(u(&pr, e), Series::one(pr.field())));
            }
            assert!(base.is_valid().unwrap());
        }
    }

    #[test]
    fn ambient_is_identity_and_invalid() {
        let pr = params(3, 2, 4);
        let amb = pr.ambient_phi();
        for m in amb.mats().iter() {
            assert_eq!(m, &Mat2::identity(pr.field()));
        }
        assert!(!amb.is_valid().unwrap());
        // Unit-determinant basis changes keep the determinant valuation 0.
        let b = BasisChange::new(
            pr.clone(),
            vec![
                Mat2::diag(u(&pr, -1), u(&pr, 1)),
                Mat2::diag(u(&pr, 2), u(&pr, -2)),
            ],
        )
        .unwrap();
        let changed = amb.change_basis(&b).unwrap();
        for m in changed.mats().iter() {
            assert_eq!(m.det_valuation().unwrap(), Valuation::Finite(0));
        }
    }

    #[test]
    fn identity_change_fixes_presentation() {
        let pr = params(3, 2, 4);
        let base = pr.base_model();
        let id = BasisChange::identity(&pr);
        assert_eq!(base.change_basis(&id).unwrap(), base);
    }

    #[test]
    fn diagonal_change_of_basis() {
        // B_i = diag(u^-1, u) applied to diag(u^4, 1) gives diag(u^2, u^2):
        // phi(diag(u^-1, u)) * diag(u^4, 1) * diag(u, u^-1)
        //   = diag(u^-3, u^3) * diag(u^4, 1) * diag(u, u^-1) = diag(u^2, u^2).
        let pr = params(3, 2, 4);
        let base = pr.base_model();
        let b = BasisChange::new(
            pr.clone(),
            vec![Mat2::diag(u(&pr, -1), u(&pr, 1)), Mat2::diag(u(&pr, -1), u(&pr, 1))],
        )
        .unwrap();
        let changed = base.change_basis(&b).unwrap();
        for m in changed.mats().iter() {
            assert_eq!(m, &Mat2::diag(u(&pr, 2), u(&pr, 2)));
        }
        assert!(changed.is_valid().unwrap());
    }

    #[test]
    fn validity_counterexamples() {
        let pr = params(3, 2, 4);
        let good = Presentation::new(
            pr.clone(),
            vec![
                Mat2::diag(u(&pr, 2), u(&pr, 2)),
                Mat2::diag(u(&pr, 2), u(&pr, 2)),
            ],
        )
        .unwrap();
        assert!(good.is_valid().unwrap());
        // det valuation 5, not e = 4.
        let wrong_det = Presentation::new(
            pr.clone(),
            vec![
                Mat2::diag(u(&pr, 4), u(&pr, 1)),
                Mat2::diag(u(&pr, 4), u(&pr, 1)),
            ],
        )
        .unwrap();
        assert!(!wrong_det.is_valid().unwrap());
        // Not integral despite det valuation 4.
        let not_integral = Presentation::new(
            pr.clone(),
            vec![
                Mat2::diag(u(&pr, -1), u(&pr, 5)),
                Mat2::diag(u(&pr, -1), u(&pr, 5)),
            ],
        )
        .unwrap();
        assert!(!not_integral.is_valid().unwrap());
    }

    #[test]
    fn lattice_presentation_examples() {
        let pr = params(3, 2, 4);
        // Identity generators give the ambient module.
        let id_gens: Vec<Mat2> = (0..2).map(|_| Mat2::identity(pr.field())).collect();
        assert_eq!(
            lattice_presentation(&pr, &id_gens).unwrap(),
            pr.ambient_phi()
        );
        // G_i = diag(u^{e/(p-1)}, 1) gives the base model:
        // exponent p*e/(p-1) - e/(p-1) = e.
        let d = pr.d();
        let gens: Vec<Mat2> = (0..2)
            .map(|_| Mat2::diag(u(&pr, d), Series::one(pr.field())))
            .collect();
        assert_eq!(lattice_presentation(&pr, &gens).unwrap(), pr.base_model());
        // G_i = u * Id scales to diag(u^{p-1}, u^{p-1}).
        let gens: Vec<Mat2> = (0..2)
            .map(|_| Mat2::diag(u(&pr, 1), u(&pr, 1)))
            .collect();
        let pres = lattice_presentation(&pr, &gens).unwrap();
        for m in pres.mats().iter() {
            assert_eq!(m, &Mat2::diag(u(&pr, 2), u(&pr, 2)));
        }
    }

    #[test]
    fn same_lattice_cases() {
        let pr = params(3, 2, 4);
        let tri = |a: i64, v: &Series| {
            Mat2::from_rows(
                u(&pr, -a),
                v.clone(),
                Series::zero(pr.field()),
                u(&pr, a),
            )
        };
        let v = Series::zero(pr.field());
        let b = BasisChange::new(pr.clone(), vec![tri(1, &v), tri(1, &v)]).unwrap();
        assert!(b.same_lattice(&b).unwrap());
        // Adding u^{a_i} to v_i changes the basis by a unipotent integral
        // factor: (1, 1; 0, 1) * (u^-1, 0; 0, u) = (u^-1, u; 0, u).
        let v2 = u(&pr, 1);
        let b2 = BasisChange::new(pr.clone(), vec![tri(1, &v2), tri(1, &v2)]).unwrap();
        assert!(b.same_lattice(&b2).unwrap());
        let c = b2.mats()[0].mul(&b.mats()[0].inverse(pr.work_prec()).unwrap());
        assert_eq!(
            c,
            Mat2::from_rows(
                Series::one(pr.field()),
                Series::one(pr.field()),
                Series::zero(pr.field()),
                Series::one(pr.field())
            )
        );
        // diag(u^-1, u) is a different lattice than the standard one.
        let id = BasisChange::identity(&pr);
        let diag = BasisChange::new(
            pr.clone(),
            vec![
                Mat2::diag(u(&pr, -1), u(&pr, 1)),
                Mat2::diag(u(&pr, -1), u(&pr, 1)),
            ],
        )
        .unwrap();
        assert!(!id.same_lattice(&diag).unwrap());
    }

    #[test]
    fn iwasawa_examples() {
        let pr = params(3, 2, 4);
        let w = pr.work_prec();
        // Identity: a = 0, v = 0.
        let nf = iwasawa_normal_form(&Mat2::identity(pr.field()), w).unwrap();
        assert_eq!(nf.a, 0);
        assert!(nf.v.is_zero());
        // The factored matrix (2, -u; u^-1, 0) differs from diag(u^-1, u)
        // by an integral unit: a = 1, v = 0.
        let m = Mat2::from_rows(
            Series::constant(pr.field(), 2),
            u(&pr, 1).neg(),
            u(&pr, -1),
            Series::zero(pr.field()),
        );
        let nf = iwasawa_normal_form(&m, w).unwrap();
        assert_eq!(nf.a, 1);
        assert!(nf.v.is_zero());
        assert_eq!(nf.unit.mul(&nf.triangular()), m);
        // Already reduced upper triangular: a = 2, v = 1.
        let m = Mat2::from_rows(
            u(&pr, -2),
            Series::one(pr.field()),
            Series::zero(pr.field()),
            u(&pr, 2),
        );
        let nf = iwasawa_normal_form(&m, w).unwrap();
        assert_eq!(nf.a, 2);
        assert!(nf.v.is_one());
    }

    #[test]
    fn iwasawa_rejects_nonunit_determinant() {
        let pr = params(3, 2, 4);
        let m = Mat2::diag(u(&pr, 1), u(&pr, 1));
        assert!(iwasawa_normal_form(&m, pr.work_prec()).is_err());
    }
}
