//! Run reports: one JSON object per command invocation.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt;
use std::time::Duration;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        })
    }
}

/// Digest of the command name and every input that can change its output.
/// Parts are length-prefixed so that concatenations cannot collide.
pub fn inputs_digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub status: Status,
    pub payload: Value,
    /// Wall-clock time; only serialized on request so that default reports
    /// are byte-identical across runs.
    pub timing: Option<Duration>,
}

impl RunReport {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "status": self.status.to_string(),
            "payload": self.payload,
        });
        if let Some(t) = self.timing {
            v["timing_ms"] = json!(t.as_secs_f64() * 1e3);
        }
        v
    }

    /// Pretty JSON with a trailing newline. Object keys come out sorted.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("values are finite");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_prefix_free() {
        assert_ne!(inputs_digest(&[b"ab", b"c"]), inputs_digest(&[b"a", b"bc"]));
        assert_eq!(inputs_digest(&[b"x"]), inputs_digest(&[b"x"]));
    }

    #[test]
    fn timing_is_opt_in() {
        let mut r = RunReport {
            command: "t".into(),
            inputs_digest: inputs_digest(&[]),
            status: Status::Pass,
            payload: json!({"b": 1, "a": 2}),
            timing: None,
        };
        assert!(!r.render().contains("timing_ms"));
        assert!(r.render().find("\"a\"").unwrap() < r.render().find("\"b\"").unwrap());
        r.timing = Some(Duration::from_millis(3));
        assert!(r.render().contains("timing_ms"));
    }
}
