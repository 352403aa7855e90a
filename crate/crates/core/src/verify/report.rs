//! Per-check verdicts and the suite report.

use serde::{Deserialize, Serialize};

use super::stats::{KsKind, KsReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    KsTwoSample,
    KsOneSample,
    /// A count of exact mismatches; passes at zero.
    Exact,
    /// `value < threshold`.
    Below,
    /// `value > threshold`.
    Above,
    /// `lower ≤ value ≤ threshold`.
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub kind: CheckKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    pub pass: bool,
}

impl Check {
    fn base(label: impl Into<String>, kind: CheckKind, threshold: f64, pass: bool) -> Self {
        Check { label: label.into(), kind, statistic: None, value: None, threshold, lower: None, n: None, pass }
    }

    pub fn below(label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { value: Some(value), ..Self::base(label, CheckKind::Below, threshold, value < threshold) }
    }

    pub fn above(label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { value: Some(value), ..Self::base(label, CheckKind::Above, threshold, value > threshold) }
    }

    pub fn within(label: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        let pass = value >= lower && value <= upper;
        Check { value: Some(value), lower: Some(lower), ..Self::base(label, CheckKind::Interval, upper, pass) }
    }

    pub fn exact(label: impl Into<String>, mismatches: usize, n: usize) -> Self {
        Check {
            value: Some(mismatches as f64),
            n: Some(n),
            ..Self::base(label, CheckKind::Exact, 0.0, mismatches == 0)
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }
}

impl From<KsReport> for Check {
    fn from(r: KsReport) -> Self {
        let kind = match r.kind {
            KsKind::OneSample => CheckKind::KsOneSample,
            KsKind::TwoSample => CheckKind::KsTwoSample,
        };
        Check {
            statistic: Some(r.statistic),
            n: Some(r.n),
            ..Self::base(r.observable, kind, r.threshold, r.pass)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    /// Replica override; `0` means each check used its own default.
    pub replicas: usize,
    pub workers: usize,
    pub params: serde_json::Map<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub elapsed_s: f64,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON without the fields that depend on the machine rather than the seed.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("elapsed_s");
            m.remove("workers");
        }
        serde_json::to_string(&v).expect("value serializes")
    }

    /// `label,kind,statistic,value,lower,threshold,n,pass` rows.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("label,kind,statistic,value,lower,threshold,n,pass\n");
        for c in &self.checks {
            let kind = serde_json::to_value(c.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            out.push_str(&format!(
                "\"{}\",{},{},{},{},{},{},{}\n",
                c.label.replace('"', "'"),
                kind,
                opt(c.statistic),
                opt(c.value),
                opt(c.lower),
                c.threshold,
                c.n.map(|n| n.to_string()).unwrap_or_default(),
                c.pass
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_drops_timing() {
        let r = SuiteReport {
            suite: "x".into(),
            seed: 1,
            replicas: 0,
            workers: 3,
            params: Default::default(),
            checks: vec![Check::below("a", 0.5, 1.0), Check::within("b", 2.0, 0.0, 1.0)],
            pass: false,
            elapsed_s: 1.25,
        };
        let other = SuiteReport { workers: 1, elapsed_s: 9.0, ..r.clone() };
        assert_eq!(r.canonical_json(), other.canonical_json());
        assert!(!r.canonical_json().contains("elapsed_s"));
        assert_eq!(r.failures().count(), 1);
        assert!(r.to_csv().lines().nth(2).unwrap().ends_with("false"));
    }
}
