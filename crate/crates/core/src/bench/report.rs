use std::fmt::Write;

use super::{BenchPlan, Pair};
use crate::suite::Registry;

#[derive(Clone, Debug, PartialEq)]
pub struct PairRow {
    pub kem: u16,
    pub sig: u16,
    pub label: String,
    /// Successful handshakes inside the measurement windows.
    pub completed: u64,
    pub failed: u64,
    pub cps: f64,
    pub ratio_to_control: f64,
    pub p50_ns: u64,
    pub p95_ns: u64,
    pub bytes_per_handshake: u64,
    /// More than 1% of attempts failed.
    pub degraded: bool,
    /// Live mode: completions per client, summing to `completed`.
    pub per_client: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub plan: BenchPlan,
    pub rows: Vec<PairRow>,
    pub wall_clock_s: f64,
    names: Vec<(u16, String)>,
}

impl BenchReport {
    /// Fills in ratios against the first row matching the plan's control.
    /// Without a control row every ratio is NaN.
    pub fn new(
        plan: BenchPlan,
        registry: &Registry,
        mut rows: Vec<PairRow>,
        wall_clock_s: f64,
    ) -> Self {
        let control = rows.iter().position(|r| (r.kem, r.sig) == plan.control);
        let control_cps = control.map_or(f64::NAN, |i| rows[i].cps);
        for (i, row) in rows.iter_mut().enumerate() {
            row.ratio_to_control = if Some(i) == control {
                1.0
            } else {
                row.cps / control_cps
            };
        }
        let mut names: Vec<(u16, String)> = rows
            .iter()
            .flat_map(|r| [r.kem, r.sig])
            .filter_map(|c| {
                registry
                    .metadata(c)
                    .ok()
                    .map(|m| (c, m.id.name.to_string()))
            })
            .collect();
        names.sort();
        names.dedup();
        Self {
            plan,
            rows,
            wall_clock_s,
            names,
        }
    }

    pub fn row(&self, pair: Pair) -> Option<&PairRow> {
        self.rows.iter().find(|r| (r.kem, r.sig) == pair)
    }

    fn name(&self, code: u16) -> String {
        self.names
            .iter()
            .find(|(c, _)| *c == code)
            .map_or_else(|| format!("0x{code:04x}"), |(_, n)| n.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
    PlotData,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "plotdata" => Ok(Format::PlotData),
            other => Err(format!(
                "unknown format {other:?}, expected csv, markdown or plotdata"
            )),
        }
    }
}

pub const CSV_HEADER: &str =
    "pair,kem,sig,mode,completed,cps,ratio_to_control,p50_ns,p95_ns,bytes_per_handshake";

fn label(row: &PairRow) -> String {
    if row.degraded {
        format!("{} (degraded)", row.label)
    } else {
        row.label.clone()
    }
}

pub fn emit_report(report: &BenchReport, format: Format) -> Vec<u8> {
    let mode = report.plan.mode.as_str();
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in &report.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{mode},{},{:.3},{:.6},{},{},{}",
                    label(r),
                    report.name(r.kem),
                    report.name(r.sig),
                    r.completed,
                    r.cps,
                    r.ratio_to_control,
                    r.p50_ns,
                    r.p95_ns,
                    r.bytes_per_handshake
                );
            }
        }
        Format::Markdown => {
            let p = &report.plan;
            let _ = writeln!(
                out,
                "mode: {mode}, clients: {}, workers: {}, duration: {} s, warmup: {} s, repetitions: {}, \
                 rtt: {} s, bandwidth: {} B/s, unit: {} s, seed: {}, wall clock: {:.3} s\n",
                p.clients,
                p.workers,
                p.duration_s,
                p.warmup_s,
                p.repetitions,
                p.network.rtt_s,
                p.network.bandwidth_bps,
                p.unit_time_s,
                p.seed,
                report.wall_clock_s
            );
            out.push_str("| pair | kem | sig | completed | failed | cps | ratio | p50 ns | p95 ns | bytes |\n");
            out.push_str("|---|---|---|---:|---:|---:|---:|---:|---:|---:|\n");
            for r in &report.rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {:.3} | {:.6} | {} | {} | {} |",
                    label(r),
                    report.name(r.kem),
                    report.name(r.sig),
                    r.completed,
                    r.failed,
                    r.cps,
                    r.ratio_to_control,
                    r.p50_ns,
                    r.p95_ns,
                    r.bytes_per_handshake
                );
            }
        }
        Format::PlotData => {
            out.push_str("# pair\tratio_to_control\n");
            for r in &report.rows {
                let _ = writeln!(out, "{}\t{:.6}", r.label, r.ratio_to_control);
            }
        }
    }
    out.into_bytes()
}
