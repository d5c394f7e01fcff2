use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use super::{check_input, check_output, load_polytope, Context, RunReport};
use crate::dynamics::{average_gap, ensure_member, run_errors, sup_error, sup_error_range, RandomGammas, Trace};
use crate::error::{Error, Result};
use crate::polytope::{Polytope, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Synthetic {
    /// Every demand is the vertex centroid.
    Barycenter,
    /// Seeded uniform points of the polytope.
    Random,
    /// The vertices in index order, repeated.
    Vertices,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportNorm {
    L1,
    L2,
    Linf,
}

impl ReportNorm {
    fn of(self, v: &[f64]) -> f64 {
        match self {
            ReportNorm::L1 => v.iter().map(|x| x.abs()).sum(),
            ReportNorm::L2 => crate::linalg::norm(v),
            ReportNorm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScheduleArgs {
    /// Preset or polytope file.
    #[arg(long, default_value = "simplex(3)")]
    pub polytope: String,
    /// CSV of demands, one point per row (a non-numeric first row is a header).
    #[arg(long, value_name = "PATH", conflicts_with = "synthetic")]
    pub demands: Option<PathBuf>,
    /// Generated demand stream when no CSV is given.
    #[arg(long, value_enum, default_value = "random")]
    pub synthetic: Synthetic,
    /// Number of steps (at most the number of CSV rows).
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Norm used for reporting the error; the greedy choice is always Euclidean.
    #[arg(long, value_enum, default_value = "l2")]
    pub norm: ReportNorm,
    /// Assignment stream `k,vid,eps_norm,running_sup`.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Full trace `k,gamma_i..,vid,eps_i..,eps_norm`.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
}

fn read_demands(path: &std::path::Path, dim: usize) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut first = true;
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = body.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let is_header = first && parsed.is_err();
        first = false;
        if is_header {
            continue;
        }
        let row = parsed.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        if row.len() != dim {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: format!("expected {dim} values, got {}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

fn demand_stream(a: &ScheduleArgs, p: &Polytope, seed: u64) -> Result<Vec<Vec<f64>>> {
    if let Some(path) = &a.demands {
        let mut rows = read_demands(path, p.dim())?;
        rows.truncate(a.steps);
        return Ok(rows);
    }
    Ok(match a.synthetic {
        Synthetic::Barycenter => vec![p.centroid(); a.steps],
        Synthetic::Random => RandomGammas::new(p, seed).take_vecs(a.steps),
        Synthetic::Vertices => (0..a.steps).map(|k| p.vertex(VertexId(k % p.len())).to_vec()).collect(),
    })
}

/// Smallest period (up to `max`) of the assignments over the second half of the run.
fn eventual_period(ids: &[VertexId], max: usize) -> Option<usize> {
    let tail = &ids[ids.len() / 2..];
    (1..=max.min(tail.len() / 2)).find(|&q| tail.iter().zip(&tail[q..]).all(|(a, b)| a == b))
}

pub(crate) fn run(a: &ScheduleArgs, ctx: &Context, report: &mut RunReport) -> Result<()> {
    if let Some(d) = &a.demands {
        check_input(d)?;
    }
    for o in [&a.out, &a.trace].into_iter().flatten() {
        check_output(o)?;
    }
    let p = load_polytope(&a.polytope)?;
    let demands = demand_stream(a, &p, ctx.seed)?;
    if demands.is_empty() {
        return Err(Error::Empty("demand stream"));
    }
    if ctx.strict {
        for g in &demands {
            ensure_member(&p, g, 1e-9)?;
        }
    }
    let trace = run_errors(&p, demands.len(), &vec![0.0; p.dim()], |k, out| {
        out.copy_from_slice(&demands[k]);
        Ok(())
    })?;
    let n = trace.len();

    let mut running = Vec::with_capacity(n);
    let mut sup = 0.0_f64;
    for k in 0..n {
        sup = sup.max(a.norm.of(trace.eps(k)));
        running.push(sup);
    }
    if let Some(path) = &a.out {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "k,vid,eps_norm,running_sup")?;
        for (k, s) in running.iter().enumerate() {
            writeln!(w, "{k},{},{},{s}", trace.vid(k), a.norm.of(trace.eps(k)))?;
        }
        w.flush()?;
    }
    if let Some(path) = &a.trace {
        let mut w = BufWriter::new(fs::File::create(path)?);
        trace.write_csv(&mut w)?;
        w.flush()?;
    }

    let sup_l2 = sup_error(&trace)?;
    report.metric("steps", n);
    report.metric("sup_error", sup);
    report.metric("sup_error_l2", sup_l2);
    report.metric("norm", a.norm);
    let counts: Vec<usize> = p
        .vertex_ids()
        .map(|v| trace.vids().iter().filter(|&&u| u == v).count())
        .collect();
    report.metric("assignment_counts", counts);

    let logged: Vec<usize> = std::iter::successors(Some(1usize), |m| m.checked_mul(10))
        .take_while(|&m| m <= n)
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut gaps = Vec::new();
    for &m in &logged {
        let g = average_gap(&p, &trace, m)?;
        gaps.push((m, g));
        worst = worst.max(g - 2.0 * sup_l2 / m as f64);
    }
    report.metric("average_gap", &gaps);
    report.assert(
        "average_gap_bound",
        worst <= 0.0,
        format!("max over logged n of average_gap(n) - 2 sup/n = {worst:.3e}"),
        &["average_gap", "sup_error_l2"],
    );

    if a.demands.is_none() {
        check_synthetic(a.synthetic, &p, &trace, report)?;
    }
    Ok(())
}

fn check_synthetic(kind: Synthetic, p: &Polytope, trace: &Trace, report: &mut RunReport) -> Result<()> {
    let n = trace.len();
    match kind {
        Synthetic::Vertices => {
            let echo = (0..n).all(|k| trace.vid(k) == VertexId(k % p.len()));
            let zero = (0..n).all(|k| trace.eps(k).iter().all(|&e| e == 0.0));
            report.assert(
                "assignments_echo_input",
                echo && zero,
                format!("echo {echo}, zero error {zero}"),
                &["assignment_counts", "sup_error"],
            );
        }
        Synthetic::Barycenter => {
            let period = eventual_period(trace.vids(), 4 * p.len());
            report.metric("period", period);
            report.assert(
                "assignments_cyclic",
                period.is_some(),
                format!("eventual period {period:?}"),
                &["period"],
            );
            if n >= 4 {
                let a = sup_error_range(trace, 0..n / 2)?;
                let b = sup_error_range(trace, n / 2..n)?;
                report.metric("sup_error_halves", [a, b]);
                report.assert(
                    "sup_error_bounded",
                    b <= a + 1e-9,
                    format!("sup over second half {b} vs first half {a}"),
                    &["sup_error_halves"],
                );
            }
        }
        Synthetic::Random => {}
    }
    Ok(())
}
