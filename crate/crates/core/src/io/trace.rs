//! Solver trace export as CSV or JSON. Every float is written with 17
//! significant digits so that parsing restores the exact double.

use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::driver::{IterationRecord, RunStatus, SolveResult, SolverConfig, StepPoly, Violations};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn ser17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(fmt17(*x)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

fn de17<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub instance_id: String,
    pub backend: String,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub alpha: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub kappa: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub beta: f64,
    pub n: usize,
    pub m: usize,
    pub config: SolverConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub alpha: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub gap: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub t: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub x_norm_e: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub primal_obj: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub dual_obj: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub qtilde_a: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub qtilde_b: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub qtilde_c: f64,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub wallclock: f64,
    pub primal_decrease: bool,
    pub dual_increase: bool,
    pub dual_carry_over: bool,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        TraceRow {
            k: r.k,
            alpha: r.alpha,
            gap: r.gap,
            t: r.t,
            x_norm_e: r.x_norm_e,
            primal_obj: r.primal_obj,
            dual_obj: r.dual_obj,
            qtilde_a: r.qtilde.a,
            qtilde_b: r.qtilde.b,
            qtilde_c: r.qtilde.c,
            wallclock: r.wallclock,
            primal_decrease: r.primal_decrease,
            dual_increase: r.dual_increase,
            dual_carry_over: r.dual_carry_over,
        }
    }
}

impl TraceRow {
    pub fn qtilde(&self) -> StepPoly {
        StepPoly { a: self.qtilde_a, b: self.qtilde_b, c: self.qtilde_c }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFooter {
    pub status: RunStatus,
    pub iterations: usize,
    #[serde(serialize_with = "ser17", deserialize_with = "de17")]
    pub final_gap: f64,
    pub violations: Violations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub header: TraceHeader,
    pub rows: Vec<TraceRow>,
    pub footer: TraceFooter,
}

impl TraceFile {
    pub fn new(instance_id: &str, backend: &str, n: usize, m: usize, config: &SolverConfig, result: &SolveResult) -> Self {
        TraceFile {
            header: TraceHeader {
                instance_id: instance_id.to_string(),
                backend: backend.to_string(),
                alpha: result.schedule.alpha,
                kappa: result.schedule.kappa,
                beta: result.schedule.beta,
                n,
                m,
                config: *config,
            },
            rows: result.trace.iter().map(TraceRow::from).collect(),
            footer: TraceFooter {
                status: result.status,
                iterations: result.iterations(),
                final_gap: result.final_gap,
                violations: result.violations,
            },
        }
    }
}

const CSV_COLUMNS: [&str; 14] = [
    "k",
    "alpha",
    "gap",
    "t",
    "x_norm_e",
    "primal_obj",
    "dual_obj",
    "qtilde_a",
    "qtilde_b",
    "qtilde_c",
    "wallclock",
    "primal_decrease",
    "dual_increase",
    "dual_carry_over",
];

fn to_csv(trace: &TraceFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", CSV_COLUMNS.join(","));
    for r in &trace.rows {
        let floats = [r.alpha, r.gap, r.t, r.x_norm_e, r.primal_obj, r.dual_obj, r.qtilde_a, r.qtilde_b, r.qtilde_c, r.wallclock];
        let floats: Vec<String> = floats.iter().map(|v| fmt17(*v)).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.k,
            floats.join(","),
            r.primal_decrease,
            r.dual_increase,
            r.dual_carry_over
        );
    }
    let h = &trace.header;
    let f = &trace.footer;
    let _ = writeln!(
        out,
        "# instance_id={} backend={} alpha={} kappa={} beta={} n={} m={} gap_tol={} max_iters={} step_mode={:?}",
        h.instance_id,
        h.backend,
        fmt17(h.alpha),
        fmt17(h.kappa),
        fmt17(h.beta),
        h.n,
        h.m,
        fmt17(h.config.gap_tol),
        h.config.max_iters,
        h.config.step_mode
    );
    let v = &f.violations;
    let _ = writeln!(
        out,
        "# status={:?} iterations={} final_gap={} primal_monotonicity={} dual_monotonicity={} ratio_bound={} swath={} dual_carry_over={}",
        f.status,
        f.iterations,
        fmt17(f.final_gap),
        v.primal_monotonicity,
        v.dual_monotonicity,
        v.ratio_bound,
        v.swath,
        v.dual_carry_over
    );
    out
}

pub fn export_trace(trace: &TraceFile, format: TraceFormat) -> Result<String> {
    match format {
        TraceFormat::Csv => Ok(to_csv(trace)),
        TraceFormat::Json => Ok(serde_json::to_string_pretty(trace)?),
    }
}

pub fn parse_trace_json(text: &str) -> Result<TraceFile> {
    Ok(serde_json::from_str(text)?)
}
