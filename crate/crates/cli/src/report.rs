//! The job report and its JSON / text renderings.

use std::fmt::Write as _;

use paracr::report::{Check, Status};
use serde::{Deserialize, Serialize};

use crate::config::JobConfig;

pub const TOOL: &str = "paracr";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

/// Field order here is the field order of the JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub job: JobConfig,
    pub status: Status,
    pub summary: Summary,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn new(mut job: JobConfig, checks: Vec<Check>) -> RunReport {
        let seed = job.seed();
        job.job.seed = Some(seed);
        let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
        let summary = Summary {
            pass: count(Status::Pass),
            fail: count(Status::Fail),
            inconclusive: count(Status::Inconclusive),
        };
        let status = if summary.fail > 0 {
            Status::Fail
        } else if summary.inconclusive > 0 {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        RunReport {
            tool: TOOL.into(),
            version: VERSION.into(),
            seed,
            job,
            status,
            summary,
            checks,
        }
    }

    /// 0 all pass, 1 any failure, 3 inconclusive but nothing failed.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

pub fn render_report(r: &RunReport, fmt: Format) -> Vec<u8> {
    match fmt {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(r).expect("report serializes");
            out.push(b'\n');
            out
        }
        Format::Text => render_text(r).into_bytes(),
    }
}

fn word(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Inconclusive => "INCONCLUSIVE",
    }
}

fn render_text(r: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} | job {} | seed {}", r.tool, r.version, r.job.job.kind.name(), r.seed);
    for (k, v) in &r.job.exprs {
        let _ = writeln!(s, "  {k} = {v}");
    }
    for c in &r.checks {
        let _ = write!(s, "{:<12} {}", word(c.status), c.name);
        if let Some(res) = c.residual {
            let _ = write!(s, "  residual={res:.3e}");
        }
        if let Some(tol) = c.tolerance {
            let _ = write!(s, " tol={tol:.1e}");
        }
        if c.samples > 0 {
            let _ = write!(s, " n={}", c.samples);
        }
        for v in &c.values {
            let _ = write!(s, " {}={}", v.name, v.value);
        }
        if let Some(n) = &c.note {
            let _ = write!(s, "  ({n})");
        }
        s.push('\n');
        if let Some(w) = &c.witness {
            let pts: Vec<String> = w.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
            let _ = writeln!(s, "{:<12}   at {}", "", pts.join(", "));
        }
    }
    let _ = writeln!(
        s,
        "{}: {} pass, {} fail, {} inconclusive",
        word(r.status),
        r.summary.pass,
        r.summary.fail,
        r.summary.inconclusive
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> JobConfig {
        JobConfig::parse("[job]\nkind = \"flat-model\"\n").unwrap()
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = RunReport::new(cfg(), Vec::new());
        let text = String::from_utf8(render_report(&r, Format::Json)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["checks"], serde_json::json!([]));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn json_round_trips_with_fixed_field_order() {
        let checks = vec![
            Check::bound("a", 0.5, 1.0, 3).with_value("v", 2.0),
            Check::new("b", Status::Inconclusive).with_note("starved"),
        ];
        let r = RunReport::new(cfg(), checks);
        let bytes = render_report(&r, Format::Json);
        let back: RunReport = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, r);
        assert_eq!(render_report(&back, Format::Json), bytes);
        let text = String::from_utf8(bytes).unwrap();
        let keys = ["\"tool\"", "\"version\"", "\"seed\"", "\"job\"", "\"status\"", "\"summary\"", "\"checks\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exit_codes() {
        let pass = Check::new("p", Status::Pass);
        let fail = Check::new("f", Status::Fail);
        let inc = Check::new("i", Status::Inconclusive);
        assert_eq!(RunReport::new(cfg(), vec![pass.clone()]).exit_code(), 0);
        assert_eq!(RunReport::new(cfg(), vec![pass.clone(), inc.clone()]).exit_code(), 3);
        assert_eq!(RunReport::new(cfg(), vec![pass, inc, fail]).exit_code(), 1);
    }

    #[test]
    fn text_summary() {
        let r = RunReport::new(cfg(), vec![Check::bound("x", 2.0, 1.0, 1)]);
        let t = String::from_utf8(render_report(&r, Format::Text)).unwrap();
        assert!(t.contains("FAIL         x"));
        assert!(t.ends_with("FAIL: 0 pass, 1 fail, 0 inconclusive\n"));
    }
}
