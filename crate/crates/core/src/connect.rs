//! The path-lemma edge condition, the two explicit moves, component-graph
//! assembly over a model set, and the verifier showing every non-ordinary
//! point reaches the all-ones diagonal hub.
//!
//! Every emitted edge carries a witness that is re-verified at
//! construction and again on reload; reachability is computed by
//! union-find over the verified edges only, so the graph never claims
//! more than its witnesses prove.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2, Series};
use crate::error::{Error, Result};
use crate::kisin::{Params, Presentation, Tuple};
use crate::meta::{mat_from_strings, mat_to_strings, ParamsMeta, ToolMeta};
use crate::moduli::{enumerate_models, AVector, ModelPoint, ModelSet};

/// A tuple of exactly nilpotent matrices: trace and determinant are
/// checked to vanish identically.
#[derive(Debug, Clone, PartialEq)]
pub struct NilTuple {
    mats: Tuple<Mat2>,
}

impl NilTuple {
    pub fn new(params: &Params, mats: Vec<Mat2>) -> Result<NilTuple> {
        if mats.len() != params.r() {
            return Err(Error::InvalidParams(format!(
                "expected {} matrices, got {}",
                params.r(),
                mats.len()
            )));
        }
        for m in &mats {
            if !m.trace().check_zero()? || !m.det().check_zero()? {
                return Err(Error::Precondition(
                    "witness matrices must be nilpotent (zero trace and determinant)".into(),
                ));
            }
        }
        Ok(NilTuple {
            mats: Tuple::new(mats),
        })
    }

    pub fn zero(params: &Params) -> NilTuple {
        NilTuple {
            mats: Tuple::new(
                (0..params.r())
                    .map(|_| Mat2::zero(params.field()))
                    .collect(),
            ),
        }
    }

    pub fn mats(&self) -> &Tuple<Mat2> {
        &self.mats
    }
}

/// The products phi(N_i) * A_i * adj(N_{i+1}), cyclic index.
pub fn path_products(n: &NilTuple, a: &Presentation) -> Result<Vec<Mat2>> {
    let r = n.mats.len();
    if r != a.mats().len() {
        return Err(Error::MismatchedField);
    }
    Ok((0..r)
        .map(|i| {
            n.mats[i]
                .frobenius()
                .mul(&a.mats()[i])
                .mul(&n.mats[(i + 1) % r].adjugate())
        })
        .collect())
}

/// The path-lemma condition: phi(N_i) * A_i * adj(N_{i+1}) integral for
/// every i. Requires a valid presentation.
pub fn path_condition(n: &NilTuple, a: &Presentation) -> Result<bool> {
    if !a.is_valid()? {
        return Err(Error::Precondition(
            "path condition needs a valid presentation".into(),
        ));
    }
    for prod in path_products(n, a)? {
        if !prod.is_integral()? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveKind {
    KillOffdiagonal,
    /// Unit increment at the 1-based coordinate j, between diagonal points.
    Shift { j: usize },
    /// Two ids whose basis changes generate the same lattice tuple.
    Identification,
}

#[derive(Debug, Clone)]
pub struct MoveEdge {
    pub from: usize,
    pub to: usize,
    pub kind: MoveKind,
    /// Nilpotent witness for kill and shift moves; identifications are
    /// witnessed by the lattice identity itself.
    pub witness: Option<NilTuple>,
}

impl MoveEdge {
    /// Re-verify the witness against the model set: nilpotency is enforced
    /// by `NilTuple`, the path condition is re-run against the source
    /// presentation, and identifications re-run the lattice identity test.
    pub fn verify(&self, ms: &ModelSet) -> Result<bool> {
        let params = ms.params();
        match (&self.kind, &self.witness) {
            (MoveKind::Identification, _) => {
                let b1 = ms.point(self.from).basis_change(params)?;
                let b2 = ms.point(self.to).basis_change(params)?;
                b1.same_lattice(&b2)
            }
            (_, Some(n)) => {
                let source = ms.point(self.from).presentation(params)?;
                path_condition(n, &source)
            }
            (_, None) => Err(Error::Precondition(
                "kill and shift edges need a nilpotent witness".into(),
            )),
        }
    }
}

/// The erratum move: from a point with some w_i nonzero to the diagonal
/// point with the same a-vector, witnessed by N_i = (0, -w_i u^{-a_i};
/// 0, 0) for all i simultaneously.
///
/// Against the upper-triangular source presentation the products
/// phi(N_i) A_i adj(N_{i+1}) vanish identically; that stronger fact is
/// asserted here rather than assumed, and a failure is reported loudly
/// since it would falsify the move at these parameters.
pub fn kill_offdiagonal_move(ms: &ModelSet, id: usize) -> Result<MoveEdge> {
    let params = ms.params();
    let f = params.field();
    let m = ms.point(id);
    if m.is_diagonal() {
        return Err(Error::Precondition(
            "kill move needs a nonzero off-diagonal entry".into(),
        ));
    }
    let mats: Vec<Mat2> = m
        .a()
        .coords()
        .iter()
        .zip(m.w())
        .map(|(&a, w)| {
            Mat2::from_rows(
                Series::zero(f),
                w.neg().shift(-a),
                Series::zero(f),
                Series::zero(f),
            )
        })
        .collect();
    let witness = NilTuple::new(params, mats)?;
    let source = m.presentation(params)?;
    for prod in path_products(&witness, &source)? {
        if !prod.is_zero() {
            return Err(Error::Precondition(format!(
                "kill witness product is not exactly zero for model {id}: falsifies the move"
            )));
        }
    }
    if !path_condition(&witness, &source)? {
        return Err(Error::Precondition(format!(
            "kill witness fails the path condition for model {id}"
        )));
    }
    // (1 + N_i) B_i must reproduce the diagonal basis change.
    let diag = ModelPoint::diagonal(m.a().clone(), f);
    let to = ms
        .find(diag.a(), diag.w())
        .ok_or_else(|| Error::Precondition("diagonal partner missing from model set".into()))?;
    let b = m.basis_change(params)?;
    let shifted: Vec<Mat2> = (0..params.r())
        .map(|i| {
            Mat2::identity(f)
                .add(&witness.mats()[i])
                .mul(&b.mats()[i])
        })
        .collect();
    let shifted = crate::kisin::BasisChange::new(params.clone(), shifted)?;
    if !shifted.same_lattice(&diag.basis_change(params)?)? {
        return Err(Error::Precondition(
            "kill move does not land on the diagonal lattice".into(),
        ));
    }
    Ok(MoveEdge {
        from: id,
        to,
        kind: MoveKind::KillOffdiagonal,
        witness: Some(witness),
    })
}

/// The factorization move between diagonal points a and a + e_j (j is
/// 1-based): undirected, witnessed by N_j = (1, -u; u^{-1}, -1) placed at
/// the smaller endpoint, all other positions zero. N_j^2 = 0 exactly, and
/// with a single nonzero position the path condition holds automatically;
/// both facts are asserted.
pub fn shift_move(ms: &ModelSet, id: usize, j: usize) -> Result<MoveEdge> {
    let params = ms.params();
    let f = params.field();
    let m = ms.point(id);
    if !m.is_diagonal() {
        return Err(Error::Precondition("shift moves join diagonal points".into()));
    }
    if j == 0 || j > params.r() {
        return Err(Error::Precondition(format!("coordinate {j} out of range")));
    }
    let partner = m.a().incremented(j - 1);
    if !m.a().is_valid(params) || !partner.is_valid(params) {
        return Err(Error::Precondition(format!(
            "both endpoints must be valid a-vectors, got {:?} and {:?}",
            m.a().coords(),
            partner.coords()
        )));
    }
    let diag = ModelPoint::diagonal(partner, f);
    let to = ms
        .find(diag.a(), diag.w())
        .ok_or_else(|| Error::Precondition("shift partner missing from model set".into()))?;
    let nil = Mat2::from_rows(
        Series::one(f),
        Series::u_pow(f, 1).neg(),
        Series::u_pow(f, -1),
        Series::one(f).neg(),
    );
    if !nil.mul(&nil).is_zero() {
        return Err(Error::Precondition("shift witness must square to zero".into()));
    }
    let mats: Vec<Mat2> = (0..params.r())
        .map(|i| {
            if i == j - 1 {
                nil.clone()
            } else {
                Mat2::zero(f)
            }
        })
        .collect();
    let witness = NilTuple::new(params, mats)?;
    let source = m.presentation(params)?;
    if !path_condition(&witness, &source)? {
        return Err(Error::Precondition(format!(
            "shift witness fails the path condition for model {id}, j = {j}"
        )));
    }
    Ok(MoveEdge {
        from: id,
        to,
        kind: MoveKind::Shift { j },
        witness: Some(witness),
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Smaller root wins so labels are minimum member ids.
            let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[drop] = keep;
        }
    }
}

/// The component graph: all verified move edges over a model set, with
/// union-find components labeled by minimum member id.
#[derive(Debug, Clone)]
pub struct ComponentGraph {
    model_set: ModelSet,
    edges: Vec<MoveEdge>,
    labels: Vec<usize>,
}

/// Component labels from an edge list: invariant under edge order.
fn component_labels(n: usize, edges: &[MoveEdge]) -> Vec<usize> {
    let mut uf = UnionFind::new(n);
    for e in edges {
        uf.union(e.from, e.to);
    }
    (0..n).map(|x| uf.find(x)).collect()
}

/// Assemble the graph: one kill edge per non-diagonal point, every valid
/// shift between diagonal points (added from the smaller endpoint), and
/// identification edges for any same-lattice collision (none arise from a
/// canonical set; collisions are detected by canonical-key equality and
/// certified with the lattice identity test).
pub fn build_component_graph(ms: &ModelSet) -> Result<ComponentGraph> {
    let params = ms.params();
    let mut edges = Vec::new();
    for id in 0..ms.len() {
        let m = ms.point(id);
        if m.is_diagonal() {
            for j in 1..=params.r() {
                let partner = m.a().incremented(j - 1);
                if partner.is_valid(params) {
                    let diag = ModelPoint::diagonal(partner, params.field());
                    if ms.find(diag.a(), diag.w()).is_some() {
                        edges.push(shift_move(ms, id, j)?);
                    }
                }
            }
        } else {
            edges.push(kill_offdiagonal_move(ms, id)?);
        }
    }
    for id in 1..ms.len() {
        if ms.point(id - 1).sort_key() == ms.point(id).sort_key() {
            let b1 = ms.point(id - 1).basis_change(params)?;
            let b2 = ms.point(id).basis_change(params)?;
            if b1.same_lattice(&b2)? {
                edges.push(MoveEdge {
                    from: id - 1,
                    to: id,
                    kind: MoveKind::Identification,
                    witness: None,
                });
            }
        }
    }
    let labels = component_labels(ms.len(), &edges);
    Ok(ComponentGraph {
        model_set: ms.clone(),
        edges,
        labels,
    })
}

impl ComponentGraph {
    pub fn model_set(&self) -> &ModelSet {
        &self.model_set
    }

    pub fn edges(&self) -> &[MoveEdge] {
        &self.edges
    }

    pub fn component_label(&self, id: usize) -> usize {
        self.labels[id]
    }

    /// Components as sorted lists of member ids, ordered by label.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (id, &label) in self.labels.iter().enumerate() {
            by_label.entry(label).or_default().push(id);
        }
        by_label.into_values().collect()
    }

    /// The hub C: the all-ones diagonal point.
    pub fn hub_id(&self) -> Option<usize> {
        let r = self.model_set.params().r();
        let ones = AVector::new(vec![1; r]);
        let diag = ModelPoint::diagonal(ones, self.model_set.params().field());
        self.model_set.find(diag.a(), diag.w())
    }

    /// Ids of non-ordinary points not in the hub's component.
    pub fn disconnected_non_ordinary(&self) -> Result<Vec<usize>> {
        let non_ord = self.model_set.non_ordinary_ids()?;
        if non_ord.is_empty() {
            return Ok(Vec::new());
        }
        let hub = self.hub_id().ok_or_else(|| {
            Error::Precondition("non-ordinary points exist but the all-ones hub is missing".into())
        })?;
        let hub_label = self.labels[hub];
        Ok(non_ord
            .into_iter()
            .filter(|&id| self.labels[id] != hub_label)
            .collect())
    }

    /// Shortest witness paths (as edge-index sequences) from each
    /// non-ordinary point to the hub, by breadth-first search.
    pub fn witness_paths(&self) -> Result<BTreeMap<usize, Vec<usize>>> {
        let non_ord = self.model_set.non_ordinary_ids()?;
        let mut out = BTreeMap::new();
        let Some(hub) = self.hub_id() else {
            return Ok(out);
        };
        let n = self.model_set.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (idx, e) in self.edges.iter().enumerate() {
            adj[e.from].push((e.to, idx));
            adj[e.to].push((e.from, idx));
        }
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        seen[hub] = true;
        queue.push_back(hub);
        while let Some(x) = queue.pop_front() {
            for &(y, eidx) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, eidx));
                    queue.push_back(y);
                }
            }
        }
        for id in non_ord {
            if !seen[id] {
                continue;
            }
            let mut path = Vec::new();
            let mut cur = id;
            while let Some((prev, eidx)) = parent[cur] {
                path.push(eidx);
                cur = prev;
            }
            out.insert(id, path);
        }
        Ok(out)
    }

    pub fn to_report(&self) -> Result<ConnectivityReport> {
        let failures = self.disconnected_non_ordinary()?;
        let witnesses = self.witness_paths()?;
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Ok(MoveEdgeJson {
                    from: e.from,
                    to: e.to,
                    kind: match e.kind {
                        MoveKind::KillOffdiagonal => "kill_offdiagonal".into(),
                        MoveKind::Shift { .. } => "shift".into(),
                        MoveKind::Identification => "identification".into(),
                    },
                    j: match e.kind {
                        MoveKind::Shift { j } => Some(j),
                        _ => None,
                    },
                    witness: e
                        .witness
                        .as_ref()
                        .map(|n| {
                            n.mats()
                                .iter()
                                .map(mat_to_strings)
                                .collect::<Result<Vec<_>>>()
                        })
                        .transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConnectivityReport {
            tool: ToolMeta::current(),
            params: ParamsMeta::of(self.model_set.params()),
            window: self.model_set.window(),
            components: self.components(),
            edges,
            witnesses: witnesses
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            verified: failures.is_empty(),
            failures,
        })
    }

    /// Graphviz rendering: components as clusters, nodes labeled by
    /// coordinates and ordinarity, edges labeled by move kind.
    pub fn to_dot(&self) -> Result<String> {
        let flags = self.model_set.ordinary_flags()?;
        let mut s = String::from("graph components {\n");
        for (c, members) in self.components().iter().enumerate() {
            s.push_str(&format!("  subgraph cluster_{c} {{\n"));
            s.push_str(&format!("    label=\"component {c}\";\n"));
            for &id in members {
                let m = self.model_set.point(id);
                let w: Vec<String> = m
                    .w()
                    .iter()
                    .map(|x| x.to_grammar_string())
                    .collect::<Result<Vec<_>>>()?;
                s.push_str(&format!(
                    "    n{id} [label=\"a={:?} w=[{}] ord={}\"];\n",
                    m.a().coords(),
                    w.join(","),
                    if flags[id] { "T" } else { "F" }
                ));
            }
            s.push_str("  }\n");
        }
        for e in &self.edges {
            let label = match e.kind {
                MoveKind::KillOffdiagonal => "kill_offdiagonal".to_string(),
                MoveKind::Shift { j } => format!("shift j={j}"),
                MoveKind::Identification => "identification".to_string(),
            };
            s.push_str(&format!("  n{} -- n{} [label=\"{label}\"];\n", e.from, e.to));
        }
        s.push_str("}\n");
        Ok(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub tool: ToolMeta,
    pub params: ParamsMeta,
    pub window: i64,
    pub components: Vec<Vec<usize>>,
    pub edges: Vec<MoveEdgeJson>,
    /// Non-ordinary point id -> edge-index path to the hub.
    pub witnesses: BTreeMap<String, Vec<usize>>,
    pub verified: bool,
    pub failures: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoveEdgeJson {
    pub from: usize,
    pub to: usize,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub j: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Vec<[[String; 2]; 2]>>,
}

impl MoveEdgeJson {
    pub fn to_edge(&self, params: &Params) -> Result<MoveEdge> {
        let kind = match (self.kind.as_str(), self.j) {
            ("kill_offdiagonal", None) => MoveKind::KillOffdiagonal,
            ("shift", Some(j)) => MoveKind::Shift { j },
            ("identification", None) => MoveKind::Identification,
            _ => {
                return Err(Error::Parse(format!(
                    "bad move kind '{}' (j = {:?})",
                    self.kind, self.j
                )))
            }
        };
        let witness = self
            .witness
            .as_ref()
            .map(|mats| {
                let mats = mats
                    .iter()
                    .map(|m| mat_from_strings(params.field(), m))
                    .collect::<Result<Vec<_>>>()?;
                NilTuple::new(params, mats)
            })
            .transpose()?;
        Ok(MoveEdge {
            from: self.from,
            to: self.to,
            kind,
            witness,
        })
    }
}

/// Re-verify every edge of a serialized report against a model set:
/// witnesses are re-checked for nilpotency and the path condition (or the
/// lattice identity) from scratch.
pub fn verify_report_edges(report: &ConnectivityReport, ms: &ModelSet) -> Result<bool> {
    for ej in &report.edges {
        let edge = ej.to_edge(ms.params())?;
        if !edge.verify(ms)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Enumerate, build the graph, and check that every non-ordinary point
/// lies in the hub's component. Disconnection is reported through the
/// `verified`/`failures` fields of the report, not as an error.
pub fn verify_nonordinary_connected(
    params: &Params,
    window: i64,
    budget: u64,
) -> Result<ComponentGraph> {
    let ms = enumerate_models(params, window, budget)?;
    build_component_graph(&ms)
}
