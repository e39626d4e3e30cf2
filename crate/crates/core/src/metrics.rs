//! Policy comparison metrics.
//!
//! A delta is `(baseline - candidate) / baseline` on both mean and worst
//! LCOH; positive means the candidate is cheaper.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::PolicySolution;
use crate::simulation::{DispatchResult, TestReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyDelta {
    /// `VSS`, `VRAS`, `VAES`, `VS-Dem` or any custom name.
    pub metric: String,
    pub baseline: String,
    pub candidate: String,
    pub mean_delta: f64,
    pub worst_delta: f64,
}

/// Relative improvement from `a` to `b`.
pub fn relative_delta(a: f64, b: f64) -> Result<f64> {
    if a == 0.0 {
        return Err(Error::Degenerate("baseline value is zero".into()));
    }
    Ok((a - b) / a)
}

/// Compare two reports on the same test set. Reports built from different
/// configurations are refused unless `force` is set.
pub fn policy_delta(baseline: &TestReport, candidate: &TestReport, name: &str, force: bool) -> Result<PolicyDelta> {
    if baseline.test_set_hash != candidate.test_set_hash || baseline.test_set != candidate.test_set {
        return Err(Error::Comparison(format!(
            "{} was tested on {} ({}) but {} on {} ({})",
            baseline.policy,
            baseline.test_set,
            baseline.test_set_hash,
            candidate.policy,
            candidate.test_set,
            candidate.test_set_hash
        )));
    }
    if !force && baseline.config_hash != candidate.config_hash {
        return Err(Error::Comparison(format!(
            "{} and {} come from different configurations ({} vs {})",
            baseline.policy, candidate.policy, baseline.config_hash, candidate.config_hash
        )));
    }
    Ok(PolicyDelta {
        metric: name.to_string(),
        baseline: baseline.policy.clone(),
        candidate: candidate.policy.clone(),
        mean_delta: relative_delta(baseline.mean_lcoh, candidate.mean_lcoh)?,
        worst_delta: relative_delta(baseline.worst_lcoh, candidate.worst_lcoh)?,
    })
}

/// Expected hedged energy (paid PPA output plus futures) over expected
/// network consumption. Above 1 means over-hedged.
pub fn hedge_ratio(solution: &PolicySolution) -> Result<f64> {
    let consumed = solution.expected_network_mwh();
    if !(consumed > 0.0) {
        return Err(Error::Degenerate(format!("{} consumes no electricity in-sample", solution.label)));
    }
    Ok(solution.expected_hedged_mwh() / consumed)
}

/// Certified-green fraction of hydrogen produced.
pub fn rfnbo_share(result: &DispatchResult) -> Result<f64> {
    result
        .rfnbo_share
        .ok_or_else(|| Error::Degenerate(format!("{} produced no hydrogen", result.label)))
}

/// Mean and worst of equally weighted LCOH values.
pub fn lcoh_summary(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Degenerate("no LCOH values to summarise".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let worst = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((mean, worst))
}

/// A named pairing of two policy labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub name: String,
    pub baseline: String,
    pub candidate: String,
}

impl MetricSpec {
    pub fn new(name: &str, baseline: &str, candidate: &str) -> Self {
        Self {
            name: name.into(),
            baseline: baseline.into(),
            candidate: candidate.into(),
        }
    }

    /// Parse `NAME=BASELINE:CANDIDATE`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("metric {text:?} is not NAME=BASELINE:CANDIDATE"));
        let (name, pair) = text.split_once('=').ok_or_else(bad)?;
        let (a, b) = pair.split_once(':').ok_or_else(bad)?;
        if name.is_empty() || a.is_empty() || b.is_empty() {
            return Err(bad());
        }
        Ok(Self::new(name, a, b))
    }
}

/// Evaluate `specs` over `reports`, looked up by policy label. All reports
/// must come from one test set; a label may repeat only on identical reports.
pub fn metrics_table(reports: &[TestReport], specs: &[MetricSpec], force: bool) -> Result<Vec<PolicyDelta>> {
    if let Some(first) = reports.first() {
        if let Some(other) = reports
            .iter()
            .find(|r| r.test_set != first.test_set || r.test_set_hash != first.test_set_hash)
        {
            return Err(Error::Comparison(format!(
                "reports mix test sets {} and {}",
                first.test_set, other.test_set
            )));
        }
    }
    let find = |label: &str| {
        let mut hits = reports.iter().filter(|r| r.policy == label);
        let hit = hits
            .next()
            .ok_or_else(|| Error::Comparison(format!("no report for policy {label}")))?;
        if hits.any(|r| r != hit) {
            return Err(Error::Comparison(format!("several different reports for policy {label}")));
        }
        Ok(hit)
    };
    specs
        .iter()
        .map(|m| policy_delta(find(&m.baseline)?, find(&m.candidate)?, &m.name, force))
        .collect()
}

/// Every ordered pair `(i, j)`, `i < j`, of the reports, named `A vs B`.
pub fn all_pairs(reports: &[TestReport]) -> Vec<MetricSpec> {
    let mut out = Vec::new();
    for (i, a) in reports.iter().enumerate() {
        for b in &reports[i + 1..] {
            out.push(MetricSpec::new(&format!("{} vs {}", a.policy, b.policy), &a.policy, &b.policy));
        }
    }
    out
}

pub fn metrics_csv(rows: &[PolicyDelta]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Serde(e.to_string());
    w.write_record(["metric", "baseline", "candidate", "mean_delta", "worst_delta"])
        .map_err(err)?;
    for r in rows {
        w.write_record([
            r.metric.clone(),
            r.baseline.clone(),
            r.candidate.clone(),
            r.mean_delta.to_string(),
            r.worst_delta.to_string(),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::Serde(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DesignDecisions;

    fn report(policy: &str, lcoh: &[f64]) -> TestReport {
        let (mean_lcoh, worst_lcoh) = lcoh_summary(lcoh).unwrap();
        TestReport {
            policy: policy.into(),
            test_set: "ts1".into(),
            test_set_hash: "h".into(),
            config_hash: "c".into(),
            design: DesignDecisions::default(),
            design_cost: 0.0,
            mean_lcoh,
            worst_lcoh,
            scenarios: Vec::new(),
        }
    }

    #[test]
    fn deltas_use_baseline_denominator() {
        let a = report("A", &[7.06]);
        let b = report("B", &[6.76]);
        let d = policy_delta(&a, &b, "VSS", false).unwrap();
        assert!((d.mean_delta - 0.30 / 7.06).abs() < 1e-12);
        let same = policy_delta(&a, &a, "x", false).unwrap();
        assert_eq!((same.mean_delta, same.worst_delta), (0.0, 0.0));
        let back = policy_delta(&b, &a, "x", false).unwrap();
        assert!(back.mean_delta < 0.0 && d.mean_delta > 0.0);
        assert!((back.mean_delta + 0.30 / 6.76).abs() < 1e-12);
    }

    #[test]
    fn refuses_mismatched_reports() {
        let a = report("A", &[7.0]);
        let mut b = report("B", &[6.0]);
        b.config_hash = "other".into();
        assert!(matches!(policy_delta(&a, &b, "x", false), Err(Error::Comparison(_))));
        assert!(policy_delta(&a, &b, "x", true).is_ok());
        b.test_set = "ts2".into();
        assert!(matches!(policy_delta(&a, &b, "x", true), Err(Error::Comparison(_))));
    }

    #[test]
    fn summary_and_pairs() {
        assert_eq!(lcoh_summary(&[6.0, 8.0]).unwrap(), (7.0, 8.0));
        assert_eq!(lcoh_summary(&[5.0]).unwrap(), (5.0, 5.0));
        let reports = [report("A", &[7.0]), report("B", &[6.0]), report("C", &[5.0])];
        let pairs = all_pairs(&reports);
        assert_eq!(pairs.len(), 3);
        assert_eq!(metrics_table(&reports, &pairs, false).unwrap().len(), 3);
        assert_eq!(MetricSpec::parse("VSS=A:B").unwrap(), MetricSpec::new("VSS", "A", "B"));
        assert!(MetricSpec::parse("VSS").is_err());
    }
}
