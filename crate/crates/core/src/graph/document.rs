//! JSON graph documents.
//!
//! Either a named family
//! `{"family": "arms"|"ladder"|"rose"|"lattice-walk", "params": {...}}`
//! or an explicit graph `{"vertices": [...], "edges": [{"src": .., "dst": ..}, ...]}`.
//! Vertex identifiers may be integers or strings. An explicit edge may carry
//! an `"id"` (default `e<k>`, 1-based in document order) and a `"count"` of
//! parallel copies (default 1).

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{GraphBuilder, GraphFamily};
use crate::error::{Error, Result};
use crate::lattice::LatticeWalk;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IdToken {
    Int(i64),
    Str(String),
}

impl IdToken {
    fn into_string(self) -> String {
        match self {
            IdToken::Int(i) => i.to_string(),
            IdToken::Str(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub src: IdToken,
    pub dst: IdToken,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<IdToken>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphDocument {
    Family {
        family: String,
        #[serde(default)]
        params: Map<String, Value>,
    },
    Explicit {
        vertices: Vec<IdToken>,
        edges: Vec<EdgeDoc>,
    },
}

/// Parses a graph document and validates it.
pub fn load_graph(text: &str) -> Result<GraphFamily> {
    let doc: GraphDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("not a graph document: {e}")))?;
    doc.into_family()
}

impl GraphDocument {
    pub fn into_family(self) -> Result<GraphFamily> {
        match self {
            GraphDocument::Family { family, params } => family_from_params(&family, &params),
            GraphDocument::Explicit { vertices, edges } => {
                let mut b = GraphBuilder::new();
                for v in vertices {
                    b.vertex(v.into_string());
                }
                for (k, e) in edges.into_iter().enumerate() {
                    let src = e.src.into_string();
                    let dst = e.dst.into_string();
                    let count = e.count.unwrap_or(1);
                    if count < 0 {
                        return Err(Error::NegativeMultiplicity { src, dst, count });
                    }
                    let id = e.id.map(IdToken::into_string).unwrap_or_else(|| format!("e{}", k + 1));
                    b.edges(id, src, dst, count as u64);
                }
                Ok(GraphFamily::explicit(b.build()?))
            }
        }
    }
}

fn uint_param(params: &Map<String, Value>, keys: &[&str], default: u64) -> Result<u64> {
    for k in keys {
        if let Some(v) = params.get(*k) {
            return v
                .as_u64()
                .ok_or_else(|| Error::Parse(format!("parameter {k} must be a non-negative integer")));
        }
    }
    Ok(default)
}

#[derive(Deserialize)]
struct MuEntry {
    w: Vec<i64>,
    count: i64,
}

pub(crate) fn family_from_params(family: &str, params: &Map<String, Value>) -> Result<GraphFamily> {
    match family {
        "arms" => GraphFamily::arms(uint_param(params, &["arms", "n"], 3)? as usize),
        "ladder" => Ok(GraphFamily::Ladder),
        "rose" => GraphFamily::rose(uint_param(params, &["n", "loops"], 2)? as usize),
        "lattice-walk" => {
            let d = uint_param(params, &["d"], 1)? as usize;
            let mu = params
                .get("mu")
                .ok_or_else(|| Error::Parse("lattice-walk needs params.mu".into()))?;
            let entries: Vec<MuEntry> =
                serde_json::from_value(mu.clone()).map_err(|e| Error::Parse(format!("params.mu: {e}")))?;
            let mut steps = Vec::with_capacity(entries.len());
            for m in entries {
                if m.count < 0 {
                    return Err(Error::NegativeMultiplicity {
                        src: "0".into(),
                        dst: format!("{:?}", m.w),
                        count: m.count,
                    });
                }
                steps.push((m.w, m.count as u64));
            }
            Ok(GraphFamily::LatticeWalk(LatticeWalk::new(d, steps)?))
        }
        other => Err(Error::Parse(format!("unknown family {other:?}"))),
    }
}
