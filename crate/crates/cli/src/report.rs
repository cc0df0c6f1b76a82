//! Machine-readable run reports with a human-readable rendering.

use std::collections::BTreeMap;

use serde::Serialize;
use torsionlab_core::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub cluster_tol: f64,
    pub check_tol: f64,
}

impl From<&ToleranceConfig> for Tolerances {
    fn from(t: &ToleranceConfig) -> Self {
        Self {
            rank_tol: t.rank_tol,
            cluster_tol: t.cluster_tol,
            check_tol: t.check_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Convention {
    pub sign_mode: String,
    /// The anchor pinning the torsion exponent convention.
    pub tau_anchor: &'static str,
}

/// One reported quantity: either a number (rendered at 17 significant
/// digits), a complex pair, an integer list, or text.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Complex([f64; 2]),
    Counts(Vec<usize>),
    Text(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: Status,
    pub tolerances: Tolerances,
    pub convention: Convention,
    pub results: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: String, tol: &ToleranceConfig, sign_mode: &str) -> Self {
        Self {
            command,
            status: Status::Pass,
            tolerances: tol.into(),
            convention: Convention {
                sign_mode: sign_mode.to_string(),
                tau_anchor: "two-term complex with d = (a) has torsion a",
            },
            results: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn real(&mut self, key: &str, v: f64) -> &mut Self {
        self.results.insert(key.to_string(), Value::Real(v));
        self
    }

    pub fn complex_pair(&mut self, key: &str, v: num_complex::Complex64) -> &mut Self {
        self.results.insert(key.to_string(), Value::Complex([v.re, v.im]));
        self
    }

    pub fn counts(&mut self, key: &str, v: Vec<usize>) -> &mut Self {
        self.results.insert(key.to_string(), Value::Counts(v));
        self
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) -> &mut Self {
        self.results.insert(key.to_string(), Value::Text(v.into()));
        self
    }

    pub fn warn(&mut self, message: impl Into<String>) -> &mut Self {
        self.warnings.push(message.into());
        self
    }

    /// Marks the run failed when `residual` exceeds `bound`, recording both.
    pub fn check(&mut self, key: &str, residual: f64, bound: f64) -> &mut Self {
        self.real(key, residual);
        if !(residual <= bound) {
            self.status = Status::Failed;
            self.warn(format!("{key} = {residual:.3e} exceeds {bound:.3e}"));
        }
        self
    }

    pub fn fail(&mut self, message: impl Into<String>) -> &mut Self {
        self.status = Status::Failed;
        self.warn(message);
        self
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(self).expect("serializable report");
            s.push('\n');
            return s;
        }
        let mut out = String::new();
        out.push_str(&format!("command     {}\n", self.command));
        out.push_str(&format!(
            "status      {}\n",
            match self.status {
                Status::Pass => "PASS",
                Status::Failed => "FAILED",
            }
        ));
        out.push_str(&format!(
            "tolerances  rank {:.3e}  cluster {:.3e}  check {:.3e}\n",
            self.tolerances.rank_tol, self.tolerances.cluster_tol, self.tolerances.check_tol
        ));
        out.push_str(&format!(
            "convention  sign_mode {}  ({})\n",
            self.convention.sign_mode, self.convention.tau_anchor
        ));
        for (key, value) in &self.results {
            let rendered = match value {
                Value::Real(v) => format!("{v:.16e}"),
                Value::Complex([re, im]) => format!("[{re:.16e}, {im:.16e}]"),
                Value::Counts(c) => format!("{c:?}"),
                Value::Text(t) => t.clone(),
            };
            out.push_str(&format!("{key:<28}{rendered}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning     {w}\n"));
        }
        out
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Failed => 1,
        }
    }
}
