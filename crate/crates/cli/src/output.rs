use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use renorm_core::renorm::DivergenceProbe;
use renorm_core::{Check, FlowRecord, ScenarioConfig, Status};
use serde::Serialize;
use serde_json::Value;

use crate::studies::{Study, StudyOutcome};
use crate::Format;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub studies: Vec<&'static str>,
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub checks: Vec<Check>,
    pub results: BTreeMap<&'static str, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<&'static str, f64>>,
    #[serde(skip)]
    pub flow: Option<Vec<FlowRecord>>,
    #[serde(skip)]
    pub probes: Option<Vec<DivergenceProbe>>,
}

impl RunReport {
    pub fn new(config: &ScenarioConfig, seed: u64, studies: &[Study]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            studies: studies.iter().map(|s| s.name()).collect(),
            seed,
            scenario: config.clone(),
            checks: Vec::new(),
            results: BTreeMap::new(),
            timing_ms: None,
            flow: None,
            probes: None,
        }
    }

    pub fn absorb(&mut self, outcome: StudyOutcome) {
        let prefix = outcome.study.name();
        self.checks.extend(outcome.checks.into_iter().map(|mut c| {
            c.name = format!("{prefix}/{}", c.name);
            c
        }));
        self.results.insert(prefix, outcome.payload);
        if let Some(ms) = outcome.elapsed_ms {
            self.timing_ms.get_or_insert_with(BTreeMap::new).insert(prefix, ms);
        }
        if outcome.flow.is_some() {
            self.flow = outcome.flow;
        }
        if outcome.probes.is_some() {
            self.probes = outcome.probes;
        }
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status.is_failure())
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let tag = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Inconclusive => "inconclusive",
                    Status::Divergent => "divergent",
                    Status::Bounded => "bounded",
                };
                format!("[{tag}] {} value={:.6e} tol={:.1e}", c.name, c.value, c.tolerance)
            })
            .collect()
    }
}

/// 17 significant digits, locale independent.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn status_str(s: Status) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

pub fn write_flow_csv(path: &Path, rows: &[FlowRecord]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "lambda_n", "E_n", "resolvent_gap", "shale_n", "status"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.n),
            fmt_f64(r.lambda_n),
            fmt_f64(r.e_n),
            fmt_f64(r.resolvent_gap),
            fmt_f64(r.shale_n),
            status_str(r.status),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_probe_csv(path: &Path, rows: &[DivergenceProbe]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "alpha",
        "lambda",
        "tau_max",
        "i_tau_max",
        "i0_est",
        "i0_quad",
        "trace_tau_max",
        "u_slope",
        "u_slope_limit",
        "head",
        "head_bound",
        "pointwise_divergent",
        "status",
    ])?;
    for p in rows {
        let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
        w.write_record([
            fmt_f64(p.alpha),
            fmt_f64(p.lambda),
            fmt_f64(last(&p.tau_ladder)),
            fmt_f64(last(&p.i_tau)),
            fmt_f64(p.i0_est),
            fmt_f64(p.i0_quad),
            fmt_f64(last(&p.trace_tau)),
            fmt_f64(p.u_slope),
            fmt_f64(p.u_slope_limit),
            fmt_f64(p.head),
            fmt_f64(p.head_bound),
            p.trace_divergent_pointwise.to_string(),
            status_str(p.status),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_outputs(report: &RunReport, dir: &Path, format: Format) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    if matches!(format, Format::Json | Format::Both) {
        let text = serde_json::to_string_pretty(report)?;
        fs::write(dir.join("report.json"), text + "\n")?;
    }
    if matches!(format, Format::Csv | Format::Both) {
        if let Some(rows) = &report.flow {
            write_flow_csv(&dir.join("flow.csv"), rows)?;
        }
        if let Some(rows) = &report.probes {
            write_probe_csv(&dir.join("probe.csv"), rows)?;
        }
    }
    Ok(())
}
