use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use braidwork_core::check::{Check, Status};
use braidwork_core::curtis::{Bidegree, DifferentialRecord, StemReport, TotalOrder};
use braidwork_core::exactla::AbelianGroup;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E1Row {
    pub bidegree: Bidegree,
    pub group: AbelianGroup,
    /// Generator cycles, empty when the entry is too large to present.
    pub basis: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub e1: Vec<E1Row>,
    pub differentials: Vec<DifferentialRecord>,
    pub stems: Vec<StemReport>,
    pub wall_time_ms: Option<u64>,
}

impl Report {
    pub fn new(cfg: &RunConfig) -> Report {
        Report {
            command: cfg.command.to_string(),
            config: cfg.echo(),
            seed: cfg.seed,
            checks: Vec::new(),
            e1: Vec::new(),
            differentials: Vec::new(),
            stems: Vec::new(),
            wall_time_ms: None,
        }
    }

    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn any_undetermined(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Undetermined)
    }

    pub fn exit_code(&self, strict: bool) -> i32 {
        if self.any_failed() || (strict && self.any_undetermined()) {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "versions": {
                "braidwork": env!("CARGO_PKG_VERSION"),
                "schema": SCHEMA_VERSION,
            },
            "wall_time_ms": self.wall_time_ms,
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "status": c.status,
                "details": c.details,
            })).collect::<Vec<_>>(),
            "e1": self.e1.iter().map(|r| json!({
                "t": r.bidegree.t,
                "n": r.bidegree.n,
                "free_rank": r.group.free_rank,
                "torsion": group_torsion(&r.group),
                "basis": r.basis,
            })).collect::<Vec<_>>(),
            "differentials": self.differentials.iter().map(|d| json!({
                "t": d.t,
                "n": d.n,
                "r": d.r,
                "target_t": d.target_t,
                "status": d.status,
                "reason": d.reason,
            })).collect::<Vec<_>>(),
            "stems": self.stems.iter().map(|s| json!({
                "n": s.n,
                "graded_orders": s.graded_orders,
                "total_order": s.total.to_string(),
                "interval": matches!(s.total, TotalOrder::Interval { .. }),
                "reference": s.reference.as_ref().map(|r| r.to_string()),
                "match": s.matches,
            })).collect::<Vec<_>>(),
        })
    }

    /// Canonical JSON: sorted keys, compact separators, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "braidwork {}  seed={}", self.command, self.seed);
        if let Some(ms) = self.wall_time_ms {
            let _ = writeln!(out, "wall time: {ms} ms");
        }
        if !self.checks.is_empty() {
            let rows: Vec<Vec<String>> =
                self.checks.iter().map(|c| vec![c.status.to_string(), c.name.clone(), c.details.clone()]).collect();
            out.push('\n');
            out.push_str(&table(&["status", "check", "details"], &rows));
        }
        if !self.e1.is_empty() {
            let rows: Vec<Vec<String>> = self
                .e1
                .iter()
                .map(|r| vec![r.bidegree.t.to_string(), r.bidegree.n.to_string(), r.group.to_string(), r.basis.join("; ")])
                .collect();
            out.push('\n');
            out.push_str(&table(&["t", "n", "E1", "generators"], &rows));
        }
        if !self.differentials.is_empty() {
            let rows: Vec<Vec<String>> = self
                .differentials
                .iter()
                .map(|d| {
                    vec![
                        format!("({},{})", d.t, d.n),
                        format!("d^{}", d.r),
                        format!("({},{})", d.target_t, d.n - 1),
                        serde_json::to_value(d.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                        d.reason.clone(),
                    ]
                })
                .collect();
            out.push('\n');
            out.push_str(&table(&["source", "page", "target", "status", "reason"], &rows));
        }
        if !self.stems.is_empty() {
            let rows: Vec<Vec<String>> = self
                .stems
                .iter()
                .map(|s| {
                    let graded =
                        s.graded_orders.iter().map(|g| format!("t={}:{}{}", g.t, g.order, if g.exact { "" } else { "?" })).collect::<Vec<_>>();
                    vec![
                        s.n.to_string(),
                        if graded.is_empty() { "-".into() } else { graded.join(" ") },
                        s.total.to_string(),
                        s.reference.as_ref().map(|r| r.to_string()).unwrap_or_else(|| "-".into()),
                        serde_json::to_value(s.matches).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                    ]
                })
                .collect();
            out.push('\n');
            out.push_str(&table(&["stem", "graded orders", "total", "reference", "match"], &rows));
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_canonical_json(),
            Format::Text => self.to_text(),
        }
    }
}

fn group_torsion(g: &AbelianGroup) -> Value {
    serde_json::to_value(g).map(|v| v["invariant_factors"].clone()).unwrap_or(Value::Null)
}

/// Left-aligned columns separated by two spaces; the last column is not padded.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = vec![0; cols];
    for (i, h) in header.iter().enumerate() {
        width[i] = h.chars().count();
    }
    for r in rows {
        for (i, c) in r.iter().enumerate().take(cols) {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i + 1 == cols {
                s.push_str(c);
            } else {
                s.push_str(c);
                s.extend(std::iter::repeat(' ').take(width[i] - c.chars().count() + 2));
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(header.to_vec(), &mut out);
    line(width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect(), &mut out);
    for r in rows {
        line(r.iter().map(|s| s.as_str()).collect(), &mut out);
    }
    out
}

/// Writes to `path`, or stdout when `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(text.as_bytes())?;
            f.flush()
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Command, RunConfig};

    #[test]
    fn empty_report_is_canonical() {
        let r = Report::new(&RunConfig::for_command(Command::VerifyBraid));
        let s = r.to_canonical_json();
        assert!(s.starts_with("{\"checks\":[],"), "{s}");
        assert!(!s.contains(": ") && !s.contains(", "));
        let keys: Vec<String> = r.to_json().as_object().unwrap().keys().cloned().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn e1_row_shape() {
        let mut r = Report::new(&RunConfig::for_command(Command::E1));
        r.e1.push(E1Row {
            bidegree: Bidegree::new(4, 3),
            group: AbelianGroup::from_orders(0, &[2.into()]),
            basis: vec![],
        });
        let s = r.to_canonical_json();
        assert!(s.contains("{\"basis\":[],\"free_rank\":0,\"n\":3,\"t\":4,\"torsion\":[2]}"), "{s}");
    }

    #[test]
    fn text_columns_align() {
        let t = table(&["a", "bbb"], &[vec!["xxxx".into(), "y".into()], vec!["z".into(), "w".into()]]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "a     bbb");
        assert_eq!(lines[2], "xxxx  y");
        assert_eq!(lines[3], "z     w");
    }
}
