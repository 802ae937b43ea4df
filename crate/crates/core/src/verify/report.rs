use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCheck {
    pub name: String,
    pub passed: bool,
    /// Offending index, point or cell when the check fails.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McCheck {
    pub name: String,
    pub samples: u64,
    pub failures: u64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeficitEntry {
    pub n: usize,
    pub window: usize,
    pub deficit: String,
    pub bound: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub exact_checks: Vec<ExactCheck>,
    pub mc_checks: Vec<McCheck>,
    pub deficit_trace: Vec<DeficitEntry>,
    pub provenance: Provenance,
}

impl VerificationReport {
    pub fn new(spec_hash: String, seed: Option<u64>) -> Self {
        Self {
            exact_checks: Vec::new(),
            mc_checks: Vec::new(),
            deficit_trace: Vec::new(),
            provenance: Provenance {
                spec_hash,
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    /// Records a check; `Err(witness)` marks a failure.
    pub fn check(&mut self, name: &str, outcome: std::result::Result<(), String>) {
        let (passed, witness) = match outcome {
            Ok(()) => (true, None),
            Err(w) => (false, Some(w)),
        };
        self.exact_checks.push(ExactCheck {
            name: name.to_string(),
            passed,
            witness,
        });
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.exact_checks.extend(other.exact_checks);
        self.mc_checks.extend(other.mc_checks);
        if self.deficit_trace.is_empty() {
            self.deficit_trace = other.deficit_trace;
        }
    }

    pub fn exact_passed(&self) -> bool {
        self.exact_checks.iter().all(|c| c.passed)
    }

    pub fn passed(&self) -> bool {
        self.exact_passed() && self.mc_checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&ExactCheck> {
        self.exact_checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn exact(&self, name: &str) -> Option<&ExactCheck> {
        self.exact_checks.iter().find(|c| c.name == name)
    }

    pub fn mc(&self, name: &str) -> Option<&McCheck> {
        self.mc_checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let p = &self.provenance;
        let _ = writeln!(out, "verification report (version {})", p.version);
        let _ = writeln!(out, "spec  {}", p.spec_hash);
        if let Some(seed) = p.seed {
            let _ = writeln!(out, "seed  {seed}");
        }
        let _ = writeln!(out, "\nexact checks");
        for c in &self.exact_checks {
            let mark = if c.passed { "pass" } else { "FAIL" };
            match &c.witness {
                Some(w) => {
                    let _ = writeln!(out, "  [{mark}] {}: {w}", c.name);
                }
                None => {
                    let _ = writeln!(out, "  [{mark}] {}", c.name);
                }
            }
        }
        if !self.mc_checks.is_empty() {
            let _ = writeln!(out, "\nmonte carlo checks");
            for c in &self.mc_checks {
                let mark = if c.passed { "pass" } else { "FAIL" };
                let _ = write!(out, "  [{mark}] {}: {} failures in {} samples", c.name, c.failures, c.samples);
                if let (Some(s), Some(t)) = (&c.statistic, &c.threshold) {
                    let _ = write!(out, " (statistic {s}, threshold {t})");
                }
                let _ = writeln!(out, "; {}", c.note);
            }
        }
        if !self.deficit_trace.is_empty() {
            let _ = writeln!(out, "\ndeficit trace");
            let _ = writeln!(out, "  {:>3} {:>6} {:>14} {:>10}", "n", "window", "deficit", "bound");
            for d in &self.deficit_trace {
                let _ = writeln!(out, "  {:>3} {:>6} {:>14} {:>10}", d.n, d.window, d.deficit, d.bound);
            }
        }
        let _ = writeln!(out, "\nresult: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}
