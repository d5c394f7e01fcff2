use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::{check_output, load_polytope, numbers, parse_sweep, Context, RunReport};
use crate::classical::{absorbing_interval_check, pursuit as run_pursuit, sturmian as run_sturmian, sturmian_stats};
use crate::dynamics::{ensure_member, RandomGammas};
use crate::error::{Error, Result};
use crate::polytope::VertexId;
use crate::regions::{counterexample_3d, Octahedron};

#[derive(Debug, Clone, Args, Serialize)]
pub struct SturmianArgs {
    #[arg(long)]
    pub gamma: f64,
    /// Number of bits.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Longest window length in the balance check.
    #[arg(long, default_value_t = 200)]
    pub lmax: usize,
    /// Write the bits as one ASCII line of 0/1.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Bit strings up to this length are embedded in the report.
const INLINE_BITS: usize = 1000;

pub(crate) fn sturmian(a: &SturmianArgs, ctx: &Context, report: &mut RunReport) -> Result<()> {
    if let Some(o) = &a.out {
        check_output(o)?;
    }
    let seq = run_sturmian(a.gamma, a.x0, a.n, ctx.strict)?;
    let st = sturmian_stats(&seq, a.lmax)?;
    let ascii = seq.to_ascii();
    if let Some(o) = &a.out {
        fs::write(o, format!("{ascii}\n"))?;
    }
    if seq.len() <= INLINE_BITS {
        report.metric("bits", &ascii);
    }
    let dev = (st.frequency - a.gamma).abs();
    let bound = 2.0 / a.n as f64;
    report.metric("frequency", st.frequency);
    report.metric("frequency_deviation", dev);
    report.metric("stats", &st);
    report.assert(
        "frequency_close",
        dev <= bound,
        format!("|frequency - gamma| = {dev:.3e} <= 2/n = {bound:.3e}"),
        &["frequency", "frequency_deviation"],
    );
    report.assert(
        "balanced",
        st.balance_defect <= 1,
        format!(
            "balance defect {} over windows up to {} (worst length {})",
            st.balance_defect,
            a.lmax.min(a.n),
            st.worst_length
        ),
        &["stats"],
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    /// Seeded uniform points of the polytope.
    Random,
    /// The fixed point given by --gamma.
    Constant,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PursuitArgs {
    #[arg(long, default_value = "interval")]
    pub polytope: String,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "random")]
    pub input: InputKind,
    /// Constant input `g1,g2,..` for --input constant.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Start of the pursuer; defaults to vertex 0.
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    /// Start of the target; defaults to the centroid.
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<String>,
    /// Required final distance.
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    /// CSV trace `n,p_i..,q_i..,distance,eps_norm`.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub(crate) fn pursuit(a: &PursuitArgs, ctx: &Context, report: &mut RunReport) -> Result<()> {
    if let Some(o) = &a.out {
        check_output(o)?;
    }
    let p = load_polytope(&a.polytope)?;
    let point = |flag: &str, s: &Option<String>, default: Vec<f64>| match s {
        Some(s) => numbers(flag, s),
        None => Ok(default),
    };
    let p0 = point("p0", &a.p0, p.vertex(VertexId(0)).to_vec())?;
    let q0 = point("q0", &a.q0, p.centroid())?;
    if ctx.strict {
        ensure_member(&p, &q0, 1e-9)?;
    }
    let trace = match a.input {
        InputKind::Random => {
            let mut g = RandomGammas::new(&p, ctx.seed);
            run_pursuit(&p, &p0, &q0, a.steps, |_, out| g.fill(out))?
        }
        InputKind::Constant => {
            let s = a
                .gamma
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("--input constant needs --gamma".into()))?;
            let g = numbers("gamma", s)?;
            if g.len() != p.dim() {
                return Err(Error::DimensionMismatch {
                    expected: p.dim(),
                    found: g.len(),
                });
            }
            if ctx.strict {
                ensure_member(&p, &g, 1e-9)?;
            }
            run_pursuit(&p, &p0, &q0, a.steps, |_, out| out.copy_from_slice(&g))?
        }
    };
    if let Some(o) = &a.out {
        let mut w = BufWriter::new(fs::File::create(o)?);
        trace.write_csv(&mut w)?;
        w.flush()?;
    }
    let last = *trace.distance.last().expect("at least one step");
    report.metric("steps", trace.steps());
    report.metric("final_distance", last);
    report.metric("max_eps_norm", trace.eps_norm.iter().fold(0.0_f64, |m, &e| m.max(e)));
    report.metric("max_position_residual", trace.max_position_residual);
    report.metric("max_identity_residual", trace.max_identity_residual);
    report.assert(
        "pursuer_catches_up",
        last < a.tolerance,
        format!("||q(n) - p(n)|| = {last:.3e} at n = {}", trace.steps()),
        &["final_distance"],
    );
    report.assert(
        "position_identity",
        trace.max_position_residual <= 1e-9,
        format!("max |n (q(n) - p(n+1)) - eps(n)| = {:.3e}", trace.max_position_residual),
        &["max_position_residual"],
    );
    report.assert(
        "error_recursion",
        trace.max_identity_residual <= 1e-9,
        format!("max recursion defect {:.3e}", trace.max_identity_residual),
        &["max_identity_residual"],
    );
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CounterexampleArgs {
    /// Translations of the two hexagonal faces, `start:stop:step` (stop excluded) or a list.
    #[arg(long, default_value = "0:2:0.05")]
    pub sweep: String,
    /// Translations of the six cube faces; defaults to --sweep.
    #[arg(long)]
    pub side_sweep: Option<String>,
    /// Offset of the cutting planes `x + y - z = cut` and `= 1 - cut`.
    #[arg(long, default_value_t = 0.25)]
    pub cut: f64,
    /// CSV table of failure modes per translation pair.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub(crate) fn counterexample(a: &CounterexampleArgs, _ctx: &Context, report: &mut RunReport) -> Result<()> {
    if let Some(o) = &a.out {
        check_output(o)?;
    }
    let sweep = |flag: &str, s: &str| parse_sweep(s).map_err(|e| Error::InvalidArgument(format!("--{flag}: {e}")));
    let hex = sweep("sweep", &a.sweep)?;
    let side = match &a.side_sweep {
        Some(s) => sweep("side-sweep", s)?,
        None => hex.clone(),
    };
    if hex.is_empty() || side.is_empty() {
        return Err(Error::Empty("translation sweep"));
    }
    let oct = Octahedron::new(a.cut)?;
    let rep = counterexample_3d(&oct, &hex, &side)?;
    if let Some(o) = &a.out {
        let mut w = BufWriter::new(fs::File::create(o)?);
        writeln!(
            w,
            "hex_shift,side_shift,overshoot_a,overshoot_b,failure_a,failure_b,midpoint_fails,corner_fails,exact_margin"
        )?;
        for r in &rep.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.hex_shift,
                r.side_shift,
                r.overshoot_a,
                r.overshoot_b,
                r.failure_a,
                r.failure_b,
                r.midpoint_fails,
                r.corner_fails,
                r.exact_margin
            )?;
        }
        w.flush()?;
    } else {
        report.metric("rows", &rep.rows);
    }
    let count =
        |f: fn(&crate::regions::counterexample::CounterexampleRow) -> bool| rep.rows.iter().filter(|r| f(r)).count();
    report.metric("grid", [hex.len(), side.len()]);
    report.metric("passing", rep.passing);
    report.metric("invariant", rep.invariant);
    report.metric(
        "failures",
        json!({
            "a": count(|r| r.failure_a),
            "b": count(|r| r.failure_b),
            "midpoint": count(|r| r.midpoint_fails),
            "corner": count(|r| r.corner_fails),
        }),
    );
    report.assert(
        "no_translation_is_invariant",
        rep.passing == 0,
        format!("{} of {} grid points avoid both failures", rep.passing, rep.rows.len()),
        &["passing", "failures"],
    );
    report.assert(
        "exact_check_agrees",
        rep.invariant == 0,
        format!("{} grid points pass the full exact check", rep.invariant),
        &["invariant"],
    );
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AbsorbArgs {
    /// Constant input in (0, 1).
    #[arg(long, required_unless_present = "random")]
    pub gamma: Option<f64>,
    /// Start points `x0,x1,..`.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "random")]
    pub x0: Option<String>,
    /// Draw this many seeded `(gamma, x0)` pairs instead.
    #[arg(long, conflicts_with_all = ["gamma", "x0"])]
    pub random: Option<usize>,
    /// Random starts are uniform in `[-x0_max, x0_max]`.
    #[arg(long, default_value_t = 1000.0)]
    pub x0_max: f64,
    /// Step limit for entry; by default enough to cross the starting distance.
    #[arg(long)]
    pub max_entry: Option<usize>,
    /// Steps checked after entry.
    #[arg(long, default_value_t = 10_000)]
    pub horizon: usize,
}

/// Steps that suffice to reach the interval: each step moves by `gamma` to
/// the right of it or by `1 - gamma` to the left.
fn entry_budget(gamma: f64, x0: f64) -> usize {
    let speed = gamma.min(1.0 - gamma);
    if speed <= 0.0 {
        return 0;
    }
    ((x0.abs() + 2.0) / speed).ceil().min(1e9) as usize + 2
}

pub(crate) fn absorb(a: &AbsorbArgs, ctx: &Context, report: &mut RunReport) -> Result<()> {
    let pairs: Vec<(f64, f64)> = match a.random {
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            (0..n)
                .map(|_| {
                    // open interval: gamma = 0 or 1 has no absorbing interval
                    let mut g: f64 = rng.random();
                    while g == 0.0 {
                        g = rng.random();
                    }
                    (g, rng.random_range(-a.x0_max..=a.x0_max))
                })
                .collect()
        }
        None => {
            let g = a.gamma.expect("clap requires --gamma");
            let xs = numbers("x0", a.x0.as_deref().expect("clap requires --x0"))?;
            xs.into_iter().map(|x| (g, x)).collect()
        }
    };
    let mut records = Vec::with_capacity(pairs.len());
    let mut failed = 0;
    let mut worst_entry = 0;
    for &(g, x0) in &pairs {
        let budget = a.max_entry.unwrap_or_else(|| entry_budget(g, x0));
        let r = absorbing_interval_check(g, &[x0], budget, a.horizon)?;
        let rec = &r.records[0];
        if !r.pass {
            failed += 1;
        }
        worst_entry = worst_entry.max(rec.entry.unwrap_or(0));
        records.push(json!({
            "gamma": g,
            "x0": x0,
            "interval": r.interval,
            "entry": rec.entry,
            "left": rec.left,
        }));
    }
    report.metric("cases", pairs.len());
    report.metric("max_entry_step", worst_entry);
    report.metric("records", records);
    report.assert(
        "absorbed",
        failed == 0,
        format!("{failed} of {} starts failed to enter and stay", pairs.len()),
        &["records", "max_entry_step"],
    );
    Ok(())
}
