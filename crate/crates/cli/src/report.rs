use std::fmt::Write as _;
use std::time::Duration;

use gmnf_core::scalar::Show;
use gmnf_core::{NumericMode, Scalar};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_SIZE_CAP: i32 = 4;

pub fn fingerprint(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

pub fn scalar_json<S: Scalar>(s: &S) -> Value {
    if S::EXACT {
        Value::String(Show(s).to_string())
    } else {
        json!(s.to_f64())
    }
}

pub fn vec_json<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(scalar_json).collect())
}

pub fn show_vec<S: Scalar>(v: &[S]) -> String {
    let items: Vec<String> = v.iter().map(|s| Show(s).to_string()).collect();
    format!("[{}]", items.join(", "))
}

/// Command result: machine payload, human text and exit code.
pub struct Outcome {
    pub payload: Value,
    pub text: String,
    pub code: i32,
}

impl Outcome {
    pub fn new(payload: Value, text: String, code: i32) -> Self {
        Outcome { payload, text, code }
    }
}

pub struct RunReport<'a> {
    pub command: &'a str,
    pub fingerprint: Option<String>,
    pub numeric: NumericMode,
    pub outcome: Outcome,
    pub wall_time: Duration,
}

fn mode_name(mode: NumericMode) -> &'static str {
    match mode {
        NumericMode::Rational => "rational",
        NumericMode::Float => "float",
    }
}

impl RunReport<'_> {
    pub fn to_json(&self) -> String {
        let value = json!({
            "command": self.command,
            "instance": self.fingerprint,
            "numeric": mode_name(self.numeric),
            "exit_code": self.outcome.code,
            "result": self.outcome.payload,
            "wall_time_ms": self.wall_time.as_secs_f64() * 1e3,
        });
        serde_json::to_string_pretty(&value).expect("serializable")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command:   {}", self.command);
        if let Some(fp) = &self.fingerprint {
            let _ = writeln!(out, "instance:  {fp}");
        }
        let _ = writeln!(out, "numeric:   {}", mode_name(self.numeric));
        out.push_str(&self.outcome.text);
        if !self.outcome.text.ends_with('\n') {
            out.push('\n');
        }
        let _ = write!(out, "wall time: {:.3} ms", self.wall_time.as_secs_f64() * 1e3);
        out
    }
}
