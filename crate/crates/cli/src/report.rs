use std::fmt;
use std::path::Path;
use std::time::Duration;

use amalgam::{Budget, Error, Verdict};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub kind: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn new(path: &Path, kind: &str, text: &str) -> Self {
        Self {
            path: path.display().to_string(),
            kind: kind.to_string(),
            sha256: format!("{:x}", Sha256::digest(text.as_bytes())),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct BudgetUse {
    pub limit: u64,
    pub used: u64,
    pub exhausted: bool,
}

impl BudgetUse {
    pub fn absorb(&mut self, b: &Budget) {
        self.limit = self.limit.max(b.limit());
        self.used += b.used();
        self.exhausted |= b.is_exhausted();
    }
}

/// What a command did: its inputs, one entry per check, and resource use.
#[derive(Clone, Debug, Serialize)]
pub struct CommandReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
    /// Rendered text, such as DOT, carried in JSON output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub document: Option<String>,
    pub elapsed_ms: f64,
    pub budget: BudgetUse,
}

impl CommandReport {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            inputs: Vec::new(),
            checks: Vec::new(),
            outputs: Vec::new(),
            document: None,
            elapsed_ms: 0.0,
            budget: BudgetUse::default(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, outcome: Outcome) -> &mut Check {
        self.checks.push(Check {
            name: name.into(),
            outcome,
            witness: None,
            note: None,
        });
        self.checks.last_mut().unwrap()
    }

    pub fn flag(&mut self, name: impl Into<String>, ok: bool) -> &mut Check {
        self.push(name, if ok { Outcome::Holds } else { Outcome::Fails })
    }

    pub fn verdict<W: Serialize>(&mut self, name: impl Into<String>, v: &Verdict<W>) -> &mut Check {
        let (outcome, witness) = match v {
            Verdict::Holds => (Outcome::Holds, None),
            Verdict::Fails(w) => (Outcome::Fails, serde_json::to_value(w).ok()),
            Verdict::Unknown => (Outcome::Unknown, None),
        };
        let c = self.push(name, outcome);
        c.witness = witness;
        c
    }

    /// Folds in the checks of a report over another input.
    pub fn merge(&mut self, prefix: &str, other: CommandReport) {
        self.inputs.extend(other.inputs);
        self.outputs.extend(other.outputs);
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.checks.push(c);
        }
        self.budget.limit = self.budget.limit.max(other.budget.limit);
        self.budget.used += other.budget.used;
        self.budget.exhausted |= other.budget.exhausted;
    }

    pub fn set_elapsed(&mut self, d: Duration) {
        self.elapsed_ms = d.as_secs_f64() * 1e3;
    }

    /// 1 if some check fails, 3 if none fails but some is unknown, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.outcome == Outcome::Fails) {
            1
        } else if self.checks.iter().any(|c| c.outcome == Outcome::Unknown) {
            3
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

impl fmt::Display for CommandReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.command)?;
        for i in &self.inputs {
            writeln!(f, "  input  {} ({}, sha256 {})", i.path, i.kind, &i.sha256[..12])?;
        }
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            write!(f, "  {:<width$}  {}", c.name, c.outcome)?;
            if let Some(n) = &c.note {
                write!(f, "  {n}")?;
            }
            if let Some(w) = &c.witness {
                write!(f, "  witness: {w}")?;
            }
            writeln!(f)?;
        }
        for o in &self.outputs {
            writeln!(f, "  wrote  {o}")?;
        }
        write!(f, "  {:.1} ms", self.elapsed_ms)?;
        if self.budget.limit > 0 {
            write!(f, ", {} of {} budget steps", self.budget.used, self.budget.limit)?;
            if self.budget.exhausted {
                f.write_str(" (exhausted)")?;
            }
        }
        Ok(())
    }
}

/// 3 for searches cut short, 2 for everything else.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExhausted(_) | Error::Cancelled => 3,
        _ => 2,
    }
}
