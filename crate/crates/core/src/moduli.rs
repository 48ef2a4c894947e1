//! The F-points of the moduli of finite flat models with cyclotomic
//! determinant: a-vector combinatorics, canonical model points, the
//! constraint-propagation enumeration, and an independent lattice-side
//! brute-force oracle.
//!
//! Two routes compute the same set. `enumerate_models` works in model
//! coordinates: every candidate is a basis change B_i = (u^-a_i, w_i; 0,
//! u^a_i) applied to the base lattice, and the off-diagonal entry of
//! phi(B_i) A_i B_{i+1}^{-1}, namely u^{-a_{i+1}} phi(w_i) -
//! u^{e - p a_i} w_{i+1}, must be integral. `brute_force_lattices` never
//! references the base-model coordinates: it enumerates triangular
//! Hermite-style generator matrices for lattice tuples boxed around the
//! base lattice, prunes by the determinant index, and keeps exactly what
//! `lattice_presentation` validates. Both reduce to canonical (a, w)
//! points and must agree.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{FieldCtor, FieldElem, FieldParams, Mat2, Series};
use crate::error::{Error, Result};
use crate::kisin::{lattice_presentation, BasisChange, Params, Presentation};
use crate::meta::{ParamsMeta, ToolMeta};

/// Default cap on candidate evaluations per enumeration call.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// The tuple of diagonal exponents of a model's triangular basis change.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AVector(Vec<i64>);

impl AVector {
    pub fn new(coords: Vec<i64>) -> AVector {
        AVector(coords)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The cyclic inequality system: e >= p a_i - a_{i+1} >= 0 for all i.
    pub fn is_valid(&self, params: &Params) -> bool {
        let p = params.p();
        let e = params.e();
        let r = self.0.len();
        r == params.r()
            && (0..r).all(|i| {
                let t = p * self.0[i] - self.0[(i + 1) % r];
                (0..=e).contains(&t)
            })
    }

    /// Strictly interior: 0 < a_i < e/(p-1) for all i.
    pub fn is_interior(&self, params: &Params) -> bool {
        let d = params.d();
        self.0.iter().all(|&a| 0 < a && a < d)
    }

    pub fn decremented(&self, j: usize) -> AVector {
        let mut c = self.0.clone();
        c[j] -= 1;
        AVector(c)
    }

    pub fn incremented(&self, j: usize) -> AVector {
        let mut c = self.0.clone();
        c[j] += 1;
        AVector(c)
    }
}

/// All integer vectors satisfying the cyclic inequality system, found by
/// scanning the provably sufficient box [-e, 2e]^r; by the bounds lemma
/// the result lies in [0, e/(p-1)]^r. Lexicographically sorted.
pub fn valid_a_vectors(params: &Params) -> Vec<AVector> {
    let e = params.e();
    let r = params.r();
    let mut out = Vec::new();
    let mut current = vec![-e; r];
    loop {
        let cand = AVector::new(current.clone());
        if cand.is_valid(params) {
            out.push(cand);
        }
        let mut k = r;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if current[k] < 2 * e {
                current[k] += 1;
                break;
            }
            current[k] = -e;
        }
    }
}

/// Ordinary iff the a-vector is all zero or all e/(p-1).
pub fn classify_ordinary(a: &AVector, params: &Params) -> Result<bool> {
    if !a.is_valid(params) {
        return Err(Error::InvalidAVector(a.coords().to_vec()));
    }
    let d = params.d();
    Ok(a.coords().iter().all(|&x| x == 0) || a.coords().iter().all(|&x| x == d))
}

/// A canonical model point: diagonal exponents a and reduced off-diagonal
/// entries w, each w_i supported strictly below u^{a_i}.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    a: AVector,
    w: Vec<Series>,
}

impl ModelPoint {
    pub fn new(a: AVector, w: Vec<Series>) -> Result<ModelPoint> {
        if a.len() != w.len() {
            return Err(Error::InvalidParams(
                "a-vector and w-tuple lengths differ".into(),
            ));
        }
        for (i, wi) in w.iter().enumerate() {
            if !wi.precision().is_exact() {
                return Err(Error::Precondition("model entries must be exact".into()));
            }
            if wi.terms().any(|(exp, _)| exp >= a.coords()[i]) {
                return Err(Error::Precondition(format!(
                    "w_{} not reduced mod u^{}",
                    i + 1,
                    a.coords()[i]
                )));
            }
        }
        Ok(ModelPoint { a, w })
    }

    pub fn diagonal(a: AVector, field: &Arc<FieldParams>) -> ModelPoint {
        let w = (0..a.len()).map(|_| Series::zero(field)).collect();
        ModelPoint { a, w }
    }

    pub fn a(&self) -> &AVector {
        &self.a
    }

    pub fn w(&self) -> &[Series] {
        &self.w
    }

    pub fn is_diagonal(&self) -> bool {
        self.w.iter().all(Series::is_zero)
    }

    /// The basis change B_i = (u^-a_i, w_i; 0, u^a_i); det B_i = 1.
    pub fn basis_change(&self, params: &Params) -> Result<BasisChange> {
        let f = params.field();
        let mats = self
            .a
            .coords()
            .iter()
            .zip(&self.w)
            .map(|(&a, w)| {
                Mat2::from_rows(
                    Series::u_pow(f, -a),
                    w.clone(),
                    Series::zero(f),
                    Series::u_pow(f, a),
                )
            })
            .collect();
        BasisChange::new(params.clone(), mats)
    }

    /// The induced presentation phi(B_i) * base_i * B_{i+1}^{-1}.
    pub fn presentation(&self, params: &Params) -> Result<Presentation> {
        params
            .base_model()
            .change_basis(&self.basis_change(params)?)
    }

    /// Canonical sort key: (a lexicographic, serialized w lexicographic).
    pub fn sort_key(&self) -> (Vec<i64>, Vec<String>) {
        (
            self.a.coords().to_vec(),
            self.w
                .iter()
                .map(|s| s.to_grammar_string().expect("model entries are exact"))
                .collect(),
        )
    }
}

/// A canonically sorted, deduplicated set of model points.
#[derive(Debug, Clone)]
pub struct ModelSet {
    params: Params,
    window: i64,
    points: Vec<ModelPoint>,
}

impl ModelSet {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn points(&self) -> &[ModelPoint] {
        &self.points
    }

    pub fn point(&self, id: usize) -> &ModelPoint {
        &self.points[id]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ordinary_flags(&self) -> Result<Vec<bool>> {
        self.points
            .iter()
            .map(|m| classify_ordinary(&m.a, &self.params))
            .collect()
    }

    pub fn non_ordinary_ids(&self) -> Result<Vec<usize>> {
        Ok(self
            .ordinary_flags()?
            .into_iter()
            .enumerate()
            .filter_map(|(i, ord)| (!ord).then_some(i))
            .collect())
    }

    /// Id of the point with the given coordinates, if present.
    pub fn find(&self, a: &AVector, w: &[Series]) -> Option<usize> {
        self.points.iter().position(|m| &m.a == a && m.w == w)
    }

    /// Canonical key sequence; set equality is key-sequence equality.
    pub fn canonical_keys(&self) -> Vec<(Vec<i64>, Vec<String>)> {
        self.points.iter().map(ModelPoint::sort_key).collect()
    }

    fn from_raw(params: Params, window: i64, mut points: Vec<ModelPoint>) -> Result<ModelSet> {
        points.sort_by_cached_key(ModelPoint::sort_key);
        // Canonical coordinates are unique per lattice, so duplicates can
        // only be identical keys; certify any collision with the lattice
        // identity test before dropping it.
        let mut dedup: Vec<ModelPoint> = Vec::with_capacity(points.len());
        for pt in points {
            if let Some(prev) = dedup.last() {
                if prev.sort_key() == pt.sort_key() {
                    let same = prev
                        .basis_change(&params)?
                        .same_lattice(&pt.basis_change(&params)?)?;
                    if !same {
                        return Err(Error::Precondition(
                            "identical canonical keys for distinct lattices".into(),
                        ));
                    }
                    continue;
                }
            }
            dedup.push(pt);
        }
        Ok(ModelSet {
            params,
            window,
            points: dedup,
        })
    }

    pub fn to_json(&self) -> Result<ModelSetJson> {
        let flags = self.ordinary_flags()?;
        Ok(ModelSetJson {
            tool: ToolMeta::current(),
            params: ParamsMeta::of(&self.params),
            window: self.window,
            models: self
                .points
                .iter()
                .zip(flags)
                .enumerate()
                .map(|(id, (m, ordinary))| {
                    Ok(ModelJson {
                        id,
                        a: m.a.coords().to_vec(),
                        w: m
                            .w
                            .iter()
                            .map(|s| s.to_grammar_string())
                            .collect::<Result<Vec<_>>>()?,
                        ordinary,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        })
    }

    pub fn from_json(json: &ModelSetJson) -> Result<ModelSet> {
        let params = json.params.to_params()?;
        let field = params.field();
        let mut points = Vec::with_capacity(json.models.len());
        for m in &json.models {
            let w = m
                .w
                .iter()
                .map(|s| Series::parse(field, s))
                .collect::<Result<Vec<_>>>()?;
            points.push(ModelPoint::new(AVector::new(m.a.clone()), w)?);
        }
        ModelSet::from_raw(params, json.window, points)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSetJson {
    pub tool: ToolMeta,
    pub params: ParamsMeta,
    pub window: i64,
    pub models: Vec<ModelJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    pub id: usize,
    pub a: Vec<i64>,
    pub w: Vec<String>,
    pub ordinary: bool,
}

// ---- coefficient-slot constraint solving ----
//
// The integrality constraints coupling the w_i (or the oracle's v_i) are
// plain equalities between single coefficients, or zero-forcings: the
// Frobenius fixes coefficients and monomial shifts do not scale them. The
// solution set per exponent pattern is therefore a union-find over
// coefficient slots with a zero marker, and enumeration walks F_q over the
// free classes.

struct SlotLayout {
    /// Per component: inclusive lower and exclusive upper exponent bound.
    ranges: Vec<(i64, i64)>,
    offsets: Vec<usize>,
    total: usize,
}

impl SlotLayout {
    fn new(ranges: Vec<(i64, i64)>) -> SlotLayout {
        let mut offsets = Vec::with_capacity(ranges.len());
        let mut total = 0usize;
        for &(lo, hi) in &ranges {
            offsets.push(total);
            total += (hi - lo).max(0) as usize;
        }
        SlotLayout {
            ranges,
            offsets,
            total,
        }
    }

    fn slot(&self, comp: usize, exp: i64) -> Option<usize> {
        let (lo, hi) = self.ranges[comp];
        if exp < lo || exp >= hi {
            return None;
        }
        Some(self.offsets[comp] + (exp - lo) as usize)
    }

    fn slots_of(&self, comp: usize) -> impl Iterator<Item = (i64, usize)> + '_ {
        let (lo, hi) = self.ranges[comp];
        let off = self.offsets[comp];
        (lo..hi).map(move |exp| (exp, off + (exp - lo) as usize))
    }
}

struct SlotSolver {
    parent: Vec<usize>,
    zero: Vec<bool>,
}

impl SlotSolver {
    fn new(n: usize) -> SlotSolver {
        SlotSolver {
            parent: (0..n).collect(),
            zero: vec![false; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, x: usize, y: usize) {
        let rx = self.find(x);
        let ry = self.find(y);
        if rx == ry {
            return;
        }
        // Smaller index stays root, for determinism.
        let (keep, drop) = if rx < ry { (rx, ry) } else { (ry, rx) };
        self.parent[drop] = keep;
        self.zero[keep] = self.zero[keep] || self.zero[drop];
    }

    fn force_zero(&mut self, x: usize) {
        let r = self.find(x);
        self.zero[r] = true;
    }

    fn is_zero(&mut self, x: usize) -> bool {
        let r = self.find(x);
        self.zero[r]
    }

    /// Representatives of the non-zero-forced classes, ascending.
    fn free_classes(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut out = Vec::new();
        for x in 0..n {
            if self.find(x) == x && !self.zero[x] {
                out.push(x);
            }
        }
        out
    }
}

/// Deterministic enumeration order for F_q: base-p digit odometer on the
/// coordinate vector, constant digit fastest.
fn field_elements(field: &Arc<FieldParams>) -> Vec<FieldElem> {
    let p = field.p();
    let r = field.r();
    let q = field.q();
    (0..q)
        .map(|v| {
            let mut digits = vec![0u64; r];
            let mut x = v;
            for d in digits.iter_mut() {
                *d = x % p;
                x /= p;
            }
            field.elem(&digits)
        })
        .collect()
}

struct BudgetMeter {
    cap: u64,
    used: u64,
}

impl BudgetMeter {
    fn new(cap: u64) -> BudgetMeter {
        BudgetMeter { cap, used: 0 }
    }

    fn charge(&mut self, n: u64) -> Result<()> {
        self.used = self.used.saturating_add(n);
        if self.used > self.cap {
            return Err(Error::BudgetExceeded(self.cap));
        }
        Ok(())
    }

    fn charge_pow(&mut self, base: u64, exp: usize) -> Result<u64> {
        let n = base
            .checked_pow(exp.try_into().map_err(|_| Error::BudgetExceeded(self.cap))?)
            .ok_or(Error::BudgetExceeded(self.cap))?;
        self.charge(n)?;
        Ok(n)
    }
}

/// Walk all assignments of field elements to the free classes, build the
/// per-component series from the slot layout, and hand each tuple to the
/// consumer.
fn for_each_assignment(
    field: &Arc<FieldParams>,
    layout: &SlotLayout,
    solver: &mut SlotSolver,
    free: &[usize],
    mut consume: impl FnMut(Vec<Series>) -> Result<()>,
) -> Result<()> {
    let elements = field_elements(field);
    let q = elements.len();
    let class_index: BTreeMap<usize, usize> =
        free.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let comps = layout.ranges.len();
    let mut odometer = vec![0usize; free.len()];
    loop {
        let mut tuple = Vec::with_capacity(comps);
        for i in 0..comps {
            let mut terms: Vec<(i64, FieldElem)> = Vec::new();
            for (exp, slot) in layout.slots_of(i) {
                if solver.is_zero(slot) {
                    continue;
                }
                let root = solver.find(slot);
                let c = &elements[odometer[class_index[&root]]];
                if !c.is_zero() {
                    terms.push((exp, c.clone()));
                }
            }
            tuple.push(Series::from_terms(field, terms));
        }
        consume(tuple)?;
        let mut k = free.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            if odometer[k] + 1 < q {
                odometer[k] += 1;
                break;
            }
            odometer[k] = 0;
        }
    }
}

/// Solve the slot constraints for one a-vector in model coordinates and
/// push every surviving model point.
///
/// For each edge i -> i+1 and exponent n < 0, the matching coefficient of
/// u^{-a_{i+1}} phi(w_i) - u^{e - p a_i} w_{i+1} must vanish: slots pair
/// up as w_i[(n + a_{i+1})/p] = w_{i+1}[n - e + p a_i] when
/// p | n + a_{i+1}, and a slot equated with an out-of-range (hence zero)
/// partner is forced to zero.
fn stratum_points(
    params: &Params,
    a: &AVector,
    window: i64,
    budget: &mut BudgetMeter,
    points: &mut Vec<ModelPoint>,
) -> Result<()> {
    let p = params.p();
    let e = params.e();
    let r = params.r();
    let field = params.field();
    let layout = SlotLayout::new(a.coords().iter().map(|&ai| (-window, ai)).collect());
    let mut solver = SlotSolver::new(layout.total);
    for i in 0..r {
        let j = (i + 1) % r;
        let (ai, aj) = (a.coords()[i], a.coords()[j]);
        let n_lo = (p * (-window) - aj).min(-window + e - p * ai).min(-1);
        for n in n_lo..0 {
            let src = if (n + aj).rem_euclid(p) == 0 {
                layout.slot(i, (n + aj).div_euclid(p))
            } else {
                None
            };
            let tgt = layout.slot(j, n - e + p * ai);
            match (src, tgt) {
                (Some(s), Some(t)) => solver.union(s, t),
                (Some(s), None) => solver.force_zero(s),
                (None, Some(t)) => solver.force_zero(t),
                (None, None) => {}
            }
        }
    }
    let free = solver.free_classes();
    budget.charge_pow(field.q(), free.len())?;

    let base = params.base_model();
    for_each_assignment(field, &layout, &mut solver, &free, |w| {
        let point = ModelPoint::new(a.clone(), w)?;
        let pres = base.change_basis(&point.basis_change(params)?)?;
        if pres.is_valid()? {
            points.push(point);
        }
        Ok(())
    })
}

/// Enumerate the model points with w-support bounded below by -window.
///
/// No solution can have negative w-support: a least negative exponent
/// across the tuple would need cancellation from a strictly lower slot
/// (its partner sits at p*k + (p a_i - a_{i+1} - e) <= p*k < k for k < 0),
/// an infinite descent. The window parameter and the window-stability
/// check are the executable certificate of that argument.
pub fn enumerate_models(params: &Params, window: i64, budget_cap: u64) -> Result<ModelSet> {
    if window < 0 {
        return Err(Error::InvalidParams("window must be nonnegative".into()));
    }
    let mut budget = BudgetMeter::new(budget_cap);
    // The a-vector box scan counts toward the budget too.
    budget.charge_pow((3 * params.e() + 1) as u64, params.r())?;
    let mut points = Vec::new();
    for a in valid_a_vectors(params) {
        stratum_points(params, &a, window, &mut budget, &mut points)?;
    }
    ModelSet::from_raw(params.clone(), window, points)
}

/// Lattice-side oracle: enumerate r-tuples of lattices L_i with
/// u^box B <= L_i <= u^-box B around the base lattice B, via triangular
/// generator matrices G_i = (u^alpha_i, 0; v_i, u^beta_i) whose columns
/// generate L_i inside the ambient module; keep the tuples whose
/// `lattice_presentation` is valid, and reduce to canonical points via
/// a_i = beta_i, w_i = v_i.
///
/// The determinant-index prune comes first: val det(G_{i+1}^{-1} phi(G_i))
/// = p(alpha_i + beta_i) - (alpha_{i+1} + beta_{i+1}) must equal e for
/// every i around the cycle, which forces alpha_i + beta_i = e/(p-1). The
/// box containments then bound beta_i into [-box, box] and the v_i slots
/// into [-box, beta_i). The remaining coupling is the lower-left
/// congruence u^{alpha_{i+1}} phi(v_i) = u^{p alpha_i} v_{i+1} mod u^d,
/// again pure slot aliasing, enumerated blindly and re-verified through
/// the full matrix machinery.
pub fn brute_force_lattices(params: &Params, box_bound: i64, budget_cap: u64) -> Result<ModelSet> {
    if box_bound < 0 || box_bound > 2 * params.e() {
        return Err(Error::InvalidParams("oracle box must lie in [0, 2e]".into()));
    }
    let p = params.p();
    let d = params.d();
    let r = params.r();
    let b = box_bound;
    let mut budget = BudgetMeter::new(budget_cap);
    budget.charge_pow((2 * b + 1) as u64, r)?;

    let mut points = Vec::new();
    let mut betas = vec![-b; r];
    'patterns: loop {
        let alphas: Vec<i64> = betas.iter().map(|&bt| d - bt).collect();
        let exps_ok = (0..r).all(|i| {
            let j = (i + 1) % r;
            // Diagonal integrality of G_{i+1}^{-1} phi(G_i).
            p * alphas[i] + betas[j] >= d && p * betas[i] + alphas[j] >= d
        });
        if exps_ok {
            collect_oracle_pattern(params, &alphas, &betas, b, &mut budget, &mut points)?;
        }
        let mut k = r;
        loop {
            if k == 0 {
                break 'patterns;
            }
            k -= 1;
            if betas[k] < b {
                betas[k] += 1;
                break;
            }
            betas[k] = -b;
        }
    }
    ModelSet::from_raw(params.clone(), box_bound, points)
}

fn collect_oracle_pattern(
    params: &Params,
    alphas: &[i64],
    betas: &[i64],
    b: i64,
    budget: &mut BudgetMeter,
    points: &mut Vec<ModelPoint>,
) -> Result<()> {
    let p = params.p();
    let d = params.d();
    let r = params.r();
    let field = params.field();
    let layout = SlotLayout::new(betas.iter().map(|&bt| (-b, bt)).collect());
    let mut solver = SlotSolver::new(layout.total);
    for i in 0..r {
        let j = (i + 1) % r;
        // Lower-left entry of u^{-d} adj(G_j) phi(G_i), coefficient by
        // coefficient below u^d:
        // u^{alpha_j} phi(v_i) - u^{p alpha_i} v_j = 0 mod u^d.
        let n_lo = (p * (-b) + alphas[j]).min(-b + p * alphas[i]).min(d - 1);
        for n in n_lo..d {
            let src = if (n - alphas[j]).rem_euclid(p) == 0 {
                layout.slot(i, (n - alphas[j]).div_euclid(p))
            } else {
                None
            };
            let tgt = layout.slot(j, n - p * alphas[i]);
            match (src, tgt) {
                (Some(s), Some(t)) => solver.union(s, t),
                (Some(s), None) => solver.force_zero(s),
                (None, Some(t)) => solver.force_zero(t),
                (None, None) => {}
            }
        }
    }
    let free = solver.free_classes();
    budget.charge_pow(field.q(), free.len())?;

    for_each_assignment(field, &layout, &mut solver, &free, |vs| {
        let gens: Vec<Mat2> = vs
            .iter()
            .enumerate()
            .map(|(i, v)| {
                Mat2::from_rows(
                    Series::u_pow(field, alphas[i]),
                    Series::zero(field),
                    v.clone(),
                    Series::u_pow(field, betas[i]),
                )
            })
            .collect();
        let pres = lattice_presentation(params, &gens)?;
        if pres.is_valid()? {
            points.push(ModelPoint::new(AVector::new(betas.to_vec()), vs)?);
        }
        Ok(())
    })
}
