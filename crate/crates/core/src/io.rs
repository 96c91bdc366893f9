//! JSON files for instances and flows.
//!
//! Values may be rational strings (`"3/4"`, `"-2"`, `"0.25"`) or plain JSON
//! numbers. Strings are always exact. Numbers are read from their decimal
//! text in exact mode and as `f64` in float mode.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{DirectedGraph, EdgeData, GmnfInstance};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn scalar<S: Scalar>(v: &Value, what: &str) -> Result<S> {
    match v {
        Value::String(s) => Ok(S::from_rational(&parse_rational(s)?)),
        Value::Number(n) if S::EXACT => Ok(S::from_rational(&parse_rational(&n.to_string())?)),
        Value::Number(n) => n
            .as_f64()
            .map(|x| S::from_rational(&float_to_rational(x)))
            .ok_or_else(|| bad(format!("{what} is not a finite number"))),
        _ => Err(bad(format!("{what} must be a number or a rational string"))),
    }
}

fn float_to_rational(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_default()
}

fn index(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|i| usize::try_from(i).ok())
        .ok_or_else(|| bad(format!("{what} must be a non-negative integer")))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| bad(format!("{what} lacks `{key}`")))
}

type Slot<S> = ((usize, usize), EdgeData<S>);

/// Parses an instance, enforcing `a_tail > 0`, `a_head < 0` and edge ids
/// `0..m` (in any order).
pub fn instance_from_json<S: Scalar>(text: &str) -> Result<GmnfInstance<S>> {
    let root: Value = serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
    let root = root.as_object().ok_or_else(|| bad("instance must be a JSON object"))?;
    let n = index(field(root, "vertices", "instance")?, "`vertices`")?;
    let raw_edges = field(root, "edges", "instance")?
        .as_array()
        .ok_or_else(|| bad("`edges` must be an array"))?;
    let m = raw_edges.len();
    let mut slots: Vec<Option<Slot<S>>> = vec![None; m];
    for (pos, raw) in raw_edges.iter().enumerate() {
        let what = format!("edge #{pos}");
        let obj = raw.as_object().ok_or_else(|| bad(format!("{what} must be an object")))?;
        let id = index(field(obj, "id", &what)?, &format!("{what} id"))?;
        if id >= m {
            return Err(bad(format!("edge id {id} is out of range 0..{m}")));
        }
        if slots[id].is_some() {
            return Err(bad(format!("edge id {id} appears twice")));
        }
        let what = format!("edge {id}");
        let tail = index(field(obj, "tail", &what)?, &format!("{what} tail"))?;
        let head = index(field(obj, "head", &what)?, &format!("{what} head"))?;
        if tail >= n || head >= n {
            return Err(bad(format!("{what} names a vertex outside 0..{n}")));
        }
        let data: EdgeData<S> = EdgeData {
            cost: scalar(field(obj, "cost", &what)?, &format!("{what} cost"))?,
            capacity: scalar(field(obj, "capacity", &what)?, &format!("{what} capacity"))?,
            a_tail: scalar(field(obj, "a_tail", &what)?, &format!("{what} a_tail"))?,
            a_head: scalar(field(obj, "a_head", &what)?, &format!("{what} a_head"))?,
        };
        if !data.a_tail.is_positive() || !data.a_head.is_negative() {
            return Err(bad(format!("{what} must have a_tail > 0 and a_head < 0")));
        }
        slots[id] = Some(((tail, head), data));
    }
    let (ends, edges): (Vec<_>, Vec<_>) = slots.into_iter().map(|s| s.expect("ids are a permutation")).unzip();
    let balance = field(root, "balance", "instance")?
        .as_array()
        .ok_or_else(|| bad("`balance` must be an array"))?
        .iter()
        .enumerate()
        .map(|(v, b)| scalar(b, &format!("balance of vertex {v}")))
        .collect::<Result<Vec<S>>>()?;
    if balance.len() != n {
        return Err(bad(format!("`balance` has {} entries for {n} vertices", balance.len())));
    }
    GmnfInstance::new(DirectedGraph::new(n, ends)?, edges, balance)
}

/// Canonical JSON with every value written as an exact rational string.
pub fn instance_to_json(inst: &GmnfInstance<Rational>) -> String {
    let edges: Vec<Value> = inst
        .edges
        .iter()
        .enumerate()
        .map(|(e, d)| {
            let (tail, head) = inst.graph.edge(e);
            json!({
                "id": e,
                "tail": tail,
                "head": head,
                "cost": format_rational(&d.cost),
                "capacity": format_rational(&d.capacity),
                "a_tail": format_rational(&d.a_tail),
                "a_head": format_rational(&d.a_head),
            })
        })
        .collect();
    let balance: Vec<String> = inst.balance.iter().map(format_rational).collect();
    let value = json!({ "vertices": inst.vertex_count(), "edges": edges, "balance": balance });
    serde_json::to_string_pretty(&value).expect("serializable") + "\n"
}

/// Reads a flow given either as a bare array or as `{"flow": [...]}`.
pub fn flow_from_json<S: Scalar>(text: &str) -> Result<Vec<S>> {
    let root: Value = serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
    let list = match &root {
        Value::Array(a) => a,
        Value::Object(o) => field(o, "flow", "flow file")?
            .as_array()
            .ok_or_else(|| bad("`flow` must be an array"))?,
        _ => return Err(bad("flow must be an array or an object with `flow`")),
    };
    list.iter()
        .enumerate()
        .map(|(e, v)| scalar(v, &format!("flow on edge {e}")))
        .collect()
}

pub fn flow_to_json(flow: &[Rational]) -> String {
    let values: Vec<String> = flow.iter().map(format_rational).collect();
    serde_json::to_string(&json!({ "flow": values })).expect("serializable") + "\n"
}
