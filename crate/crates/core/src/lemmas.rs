//! Brute-force verifiers for the two combinatorial lemmas on a-vectors,
//! and the decrement-chain constructor used by the connectivity argument.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kisin::Params;
use crate::meta::{ParamsMeta, ToolMeta};
use crate::moduli::{valid_a_vectors, AVector};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub tool: ToolMeta,
    pub lemma: String,
    pub params: ParamsMeta,
    /// Vectors examined (box cells for bounds, hypothesis vectors for
    /// decrement).
    pub checked: u64,
    pub counterexamples: Vec<Counterexample>,
    /// Bounds lemma: every valid vector found. Decrement lemma: the chosen
    /// decrement coordinate per hypothesis vector (1-based).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub valid_vectors: Vec<Vec<i64>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub decrements: Vec<ChosenDecrement>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub a: Vec<i64>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChosenDecrement {
    pub a: Vec<i64>,
    pub j: usize,
}

/// Verify the bounds lemma by scanning the box [-e, 2e]^r: every solution
/// of the inequality system lies in [0, e/(p-1)]^r, any zero coordinate
/// forces the zero vector, any coordinate e/(p-1) forces the constant
/// vector, and no solution touches the scan-box boundary.
pub fn verify_bounds_lemma(params: &Params) -> LemmaReport {
    let e = params.e();
    let d = params.d();
    let r = params.r();
    let box_cells = ((3 * e + 1) as u64).pow(r as u32);
    let mut counterexamples = Vec::new();
    let mut valid_vectors = Vec::new();
    for a in valid_a_vectors(params) {
        let c = a.coords();
        if c.iter().any(|&x| x < 0 || x > d) {
            counterexamples.push(Counterexample {
                a: c.to_vec(),
                reason: format!("coordinate outside [0, {d}]"),
            });
        }
        if c.contains(&0) && !c.iter().all(|&x| x == 0) {
            counterexamples.push(Counterexample {
                a: c.to_vec(),
                reason: "a zero coordinate without the zero vector".into(),
            });
        }
        if c.contains(&d) && !c.iter().all(|&x| x == d) {
            counterexamples.push(Counterexample {
                a: c.to_vec(),
                reason: format!("a coordinate {d} without the constant vector"),
            });
        }
        if c.iter().any(|&x| x == -e || x == 2 * e) {
            counterexamples.push(Counterexample {
                a: c.to_vec(),
                reason: "solution touches the scan-box boundary".into(),
            });
        }
        valid_vectors.push(c.to_vec());
    }
    LemmaReport {
        tool: ToolMeta::current(),
        lemma: "bounds".into(),
        params: ParamsMeta::of(params),
        checked: box_cells,
        counterexamples,
        valid_vectors,
        decrements: Vec::new(),
    }
}

/// Verify the decrement lemma: every valid strictly interior vector other
/// than all-ones admits a coordinate whose decrement is again valid. The
/// report records the smallest such coordinate per vector (1-based).
pub fn verify_decrement_lemma(params: &Params) -> LemmaReport {
    let mut checked = 0;
    let mut counterexamples = Vec::new();
    let mut decrements = Vec::new();
    for a in valid_a_vectors(params) {
        if !a.is_interior(params) || a.coords().iter().all(|&x| x == 1) {
            continue;
        }
        checked += 1;
        match (0..a.len()).find(|&j| a.decremented(j).is_valid(params)) {
            Some(j) => decrements.push(ChosenDecrement {
                a: a.coords().to_vec(),
                j: j + 1,
            }),
            None => counterexamples.push(Counterexample {
                a: a.coords().to_vec(),
                reason: "no coordinate admits a valid decrement".into(),
            }),
        }
    }
    LemmaReport {
        tool: ToolMeta::current(),
        lemma: "decrement".into(),
        params: ParamsMeta::of(params),
        checked,
        counterexamples,
        valid_vectors: Vec::new(),
        decrements,
    }
}

/// Greedy decrement chain from a valid strictly interior vector down to
/// all-ones: at each step decrement a largest coordinate whose decrement
/// stays valid (smallest index among ties). Returns 1-based coordinate
/// indices; interiority is preserved automatically because a valid vector
/// with a zero coordinate is the zero vector.
pub fn decrement_chain(a: &AVector, params: &Params) -> Result<Vec<usize>> {
    if !a.is_valid(params) {
        return Err(Error::InvalidAVector(a.coords().to_vec()));
    }
    if !a.is_interior(params) {
        return Err(Error::Precondition(format!(
            "{:?} is not strictly interior",
            a.coords()
        )));
    }
    let mut current = a.clone();
    let mut chain = Vec::new();
    while !current.coords().iter().all(|&x| x == 1) {
        let best = (0..current.len())
            .filter(|&j| current.decremented(j).is_valid(params))
            .max_by_key(|&j| (current.coords()[j], std::cmp::Reverse(j)))
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "decrement chain stuck at {:?}: lemma counterexample",
                    current.coords()
                ))
            })?;
        current = current.decremented(best);
        if !current.is_interior(params) {
            return Err(Error::Precondition(format!(
                "decrement chain left the interior at {:?}",
                current.coords()
            )));
        }
        chain.push(best + 1);
    }
    Ok(chain)
}

/// The desk-scale sweep grid: p in {3, 5}, r in 2..=r_max, e = m(p-1) for
/// m in 1..=m_max.
pub fn sweep_grid(r_max: usize, m_max: i64) -> Vec<(u64, usize, i64)> {
    let mut out = Vec::new();
    for &p in &[3u64, 5] {
        for r in 2..=r_max {
            for m in 1..=m_max {
                out.push((p, r, m * (p as i64 - 1)));
            }
        }
    }
    out
}
