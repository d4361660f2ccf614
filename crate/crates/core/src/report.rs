//! Report document shared by every CLI command, with a structured (JSON)
//! rendering at full precision and a text-table rendering at 3 decimals.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dataset::{Evaluation, LoadedDataset};
use crate::reliability::CeilingReport;
use crate::simulation::{AggregateResult, CccCheck};

pub const TOOL_NAME: &str = "kappa-ceiling";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<LoadedDataset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ceiling_report: Option<CeilingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<Evaluation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<AggregateResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ccc_check: Option<CccCheck>,
    pub warnings: Vec<String>,
}

impl ReportDocument {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        Self {
            tool: TOOL_NAME,
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config,
            dataset: None,
            ceiling_report: None,
            evaluation: None,
            aggregate: None,
            ccc_check: None,
            warnings: Vec::new(),
        }
    }

    pub fn with_dataset(mut self, ds: LoadedDataset) -> Self {
        self.dataset = Some(ds);
        self
    }

    pub fn with_ceilings(mut self, rep: CeilingReport) -> Self {
        self.push_warnings(&rep.warnings);
        self.ceiling_report = Some(rep);
        self
    }

    /// Attach an evaluation; its ceilings become the document's ceiling report.
    pub fn with_evaluation(mut self, ev: Evaluation) -> Self {
        self.push_warnings(&ev.warnings);
        self.ceiling_report = Some(ev.ceilings.clone());
        self.evaluation = Some(ev);
        self
    }

    pub fn with_aggregate(mut self, agg: AggregateResult) -> Self {
        self.push_warnings(&agg.warnings);
        self.aggregate = Some(agg);
        self
    }

    pub fn with_ccc_check(mut self, check: CccCheck) -> Self {
        self.push_warnings(&check.warnings);
        self.ccc_check = Some(check);
        self
    }

    fn push_warnings(&mut self, warnings: &[String]) {
        for w in warnings {
            if !self.warnings.contains(w) {
                self.warnings.push(w.clone());
            }
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}: {}", self.tool, self.version, self.command);
        if let Some(ds) = &self.dataset {
            let _ = writeln!(
                out,
                "dataset: {} ({} rows used, {} dropped, target rule {})",
                ds.spec.path.display(),
                ds.n_rows,
                ds.n_dropped,
                ds.spec.target_rule
            );
        }
        if let Some(rep) = &self.ceiling_report {
            out.push('\n');
            render_ceilings(&mut out, rep);
        }
        if let Some(ev) = &self.evaluation {
            out.push('\n');
            render_evaluation(&mut out, ev);
        }
        if let Some(agg) = &self.aggregate {
            out.push('\n');
            render_aggregate(&mut out, agg);
        }
        if let Some(c) = &self.ccc_check {
            out.push('\n');
            let _ = writeln!(out, "CCC approximation check (seed {})", c.seed);
            let _ = writeln!(out, "  trials            {}", c.points.len());
            let _ = writeln!(out, "  mean |e|          {:.3}", c.mae);
            let _ = writeln!(out, "  max |e|           {:.3}", c.max_abs_error);
        }
        if !self.warnings.is_empty() {
            out.push_str("\nwarnings:\n");
            for w in &self.warnings {
                let _ = writeln!(out, "  - {w}");
            }
        }
        out
    }
}

fn opt3(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}

fn render_ceilings(out: &mut String, rep: &CeilingReport) {
    let r = &rep.reliability;
    let _ = writeln!(out, "ceilings");
    let _ = writeln!(out, "  kappa_max (theoretical)  {:.3}", rep.kappa_max);
    let _ = writeln!(out, "  kappa_HL (human-like)    {:.3}", rep.kappa_hl);
    let _ = writeln!(out, "  kappa_H (human-human)    {:.3}", rep.kappa_h);
    let _ = writeln!(out, "  r_H                      {:.3}", rep.r_h);
    let _ = writeln!(out, "  F_H                      {:.3}", rep.f_h);
    let _ = writeln!(out, "reliability");
    let _ = writeln!(out, "  rho_1 (ICC(1,1))         {:.3}", r.rho_1);
    let _ = writeln!(out, "  rho_Y (ICC(1,k))         {:.3}", r.rho_y);
    let _ = writeln!(out, "  MSB                      {:.3}", r.anova.msb);
    let _ = writeln!(out, "  MSW                      {:.3}", r.anova.msw);
    let _ = writeln!(
        out,
        "  n, k                     {}, {}",
        r.anova.n, r.anova.k
    );
}

fn render_evaluation(out: &mut String, ev: &Evaluation) {
    let _ = writeln!(
        out,
        "model evaluation{}",
        if ev.rounded { " (rounded)" } else { "" }
    );
    let _ = writeln!(out, "  QWK                      {:.3}", ev.qwk);
    let _ = writeln!(out, "  correlation              {}", opt3(ev.correlation));
    let _ = writeln!(
        out,
        "  QWK / kappa_max          {}",
        opt3(ev.attainment_max)
    );
    let _ = writeln!(out, "  QWK / kappa_HL           {}", opt3(ev.attainment_hl));
}

fn render_aggregate(out: &mut String, agg: &AggregateResult) {
    let human_like = agg
        .levels
        .iter()
        .any(|l| l.kappa_humanlike_empirical.is_some());
    let _ = writeln!(
        out,
        "noise sweep: {} trials per level, seed {}",
        agg.trials, agg.seed
    );
    let _ = write!(
        out,
        "{:>11} {:>8} {:>10} {:>9} {:>8} {:>8}",
        "sigma_noise", "r_true", "kappa_true", "kappa_max", "kappa_HL", "kappa_H"
    );
    if human_like {
        let _ = write!(out, " {:>12}", "kappa_HL_emp");
    }
    out.push('\n');
    for l in &agg.levels {
        let _ = write!(
            out,
            "{:>11.2} {:>8.3} {:>10.3} {:>9.3} {:>8.3} {:>8.3}",
            l.sigma_noise, l.r_true, l.kappa_true, l.kappa_max_hat, l.kappa_hl_hat, l.kappa_h_hat
        );
        if human_like {
            let _ = write!(out, " {:>12}", opt3(l.kappa_humanlike_empirical));
        }
        out.push('\n');
    }
}

/// Two-column `kappa_ccc,kappa_true` CSV for plotting the CCC check.
pub fn ccc_points_csv(check: &CccCheck) -> String {
    let mut s = String::from("kappa_ccc,kappa_true\n");
    for p in &check.points {
        let _ = writeln!(s, "{},{}", p.kappa_ccc, p.kappa_true);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reliability::ceiling_report;
    use crate::scale::{RaterMatrix, ScoreScale};
    use crate::simulation::{run_ccc_check, run_noise_sweep, SimulationConfig};

    fn fixture_report() -> CeilingReport {
        let m =
            RaterMatrix::new(vec![[1, 2], [3, 3], [5, 4], [7, 8]], ScoreScale::default()).unwrap();
        ceiling_report(&m).unwrap()
    }

    #[test]
    fn table_uses_three_decimals() {
        let doc =
            ReportDocument::new("analyze", serde_json::json!({})).with_ceilings(fixture_report());
        let t = doc.render_table();
        assert!(t.contains("kappa_max (theoretical)  0.986"), "{t}");
        assert!(t.contains("kappa_HL (human-like)    0.958"), "{t}");
    }

    #[test]
    fn json_keeps_full_precision_and_field_names() {
        let rep = fixture_report();
        let doc = ReportDocument::new("analyze", serde_json::json!({"seed": 1}))
            .with_ceilings(rep.clone());
        let v: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        let c = &v["ceiling_report"];
        assert_eq!(c["kappa_max"].as_f64().unwrap(), rep.kappa_max);
        for key in [
            "kappa_max",
            "kappa_hl",
            "kappa_h",
            "r_h",
            "f_h",
            "reliability",
            "warnings",
        ] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["config"]["seed"], 1);
    }

    #[test]
    fn inner_warnings_surface_verbatim() {
        let m = RaterMatrix::new(
            vec![[0, 10], [10, 0], [0, 10], [10, 1]],
            ScoreScale::default(),
        )
        .unwrap();
        let rep = ceiling_report(&m).unwrap();
        let doc = ReportDocument::new("analyze", serde_json::json!({})).with_ceilings(rep.clone());
        assert_eq!(doc.warnings, rep.warnings);
        let t = doc.render_table();
        for w in &rep.warnings {
            assert!(t.contains(w.as_str()));
        }
    }

    #[test]
    fn structured_output_is_stable() {
        let c = SimulationConfig {
            n: 100,
            trials: 4,
            ..Default::default()
        };
        let make = || {
            ReportDocument::new("simulate table1", serde_json::to_value(&c).unwrap())
                .with_aggregate(run_noise_sweep(&c).unwrap())
                .with_ccc_check(run_ccc_check(&c).unwrap())
                .to_json()
        };
        assert_eq!(make(), make());
    }

    #[test]
    fn points_csv_has_header_and_rows() {
        let c = SimulationConfig {
            n: 100,
            trials: 5,
            ..Default::default()
        };
        let csv = ccc_points_csv(&run_ccc_check(&c).unwrap());
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "kappa_ccc,kappa_true");
        assert_eq!(lines.len(), 6);
    }
}
