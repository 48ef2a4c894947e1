//! Artifact metadata and serialization glue shared by every JSON output:
//! tool identification, the params header, and series/matrix string
//! conversion in the text grammar.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{FieldParams, Mat2, Series};
use crate::error::{Error, Result};
use crate::kisin::Params;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolMeta {
    pub name: String,
    pub version: String,
}

impl ToolMeta {
    pub fn current() -> ToolMeta {
        ToolMeta {
            name: "kisinlab".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Params header embedded in every artifact for reproducibility. The
/// modulus is always the canonical one for (p, r); a mismatch on load is
/// rejected rather than silently reinterpreted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsMeta {
    pub p: u64,
    pub r: usize,
    pub e: i64,
    pub modulus: String,
    pub work_prec: i64,
}

impl ParamsMeta {
    pub fn of(params: &Params) -> ParamsMeta {
        ParamsMeta {
            p: params.field().p(),
            r: params.field().r(),
            e: params.e(),
            modulus: params.field().modulus_string(),
            work_prec: params.work_prec(),
        }
    }

    pub fn to_params(&self) -> Result<Params> {
        let field = FieldParams::new(self.p, self.r)?;
        if field.modulus_string() != self.modulus {
            return Err(Error::InvalidParams(format!(
                "modulus '{}' is not the canonical modulus '{}' for ({}, {})",
                self.modulus,
                field.modulus_string(),
                self.p,
                self.r
            )));
        }
        Ok(Params::new(field, self.e)?.with_work_prec(self.work_prec))
    }
}

/// A 2x2 matrix as series strings, row major.
pub fn mat_to_strings(m: &Mat2) -> Result<[[String; 2]; 2]> {
    Ok([
        [
            m.entry(0, 0).to_grammar_string()?,
            m.entry(0, 1).to_grammar_string()?,
        ],
        [
            m.entry(1, 0).to_grammar_string()?,
            m.entry(1, 1).to_grammar_string()?,
        ],
    ])
}

pub fn mat_from_strings(field: &Arc<FieldParams>, s: &[[String; 2]; 2]) -> Result<Mat2> {
    Ok(Mat2::from_rows(
        Series::parse(field, &s[0][0])?,
        Series::parse(field, &s[0][1])?,
        Series::parse(field, &s[1][0])?,
        Series::parse(field, &s[1][1])?,
    ))
}
