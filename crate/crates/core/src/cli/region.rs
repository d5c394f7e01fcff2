use std::fs;
use std::path::PathBuf;

use clap::{ArgGroup, Args};
use serde::Serialize;
use serde_json::json;

use super::{check_output, load_polytope, numbers, Context, RunReport};
use crate::error::{Error, Result};
use crate::polytope::Polytope;
use crate::regions::omega::mean_centroid;
use crate::regions::{
    absorption_test_random, exact_invariance, find_min_t, find_rho, interval_region, polygon_region, shared_omega,
    verify_invariance, ConvexRegion2D, Region, Verdict, VerifyConfig,
};

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("mode").required(true).args(["t", "find_min_t", "q_infinity"])))]
pub struct RegionArgs {
    /// Preset or polytope file; repeat for a shared region (with --q-infinity).
    #[arg(long, default_value = "square")]
    pub polytope: Vec<String>,
    /// Verify `Q_t`, the polytope with every facet moved outward by `t`.
    #[arg(long)]
    pub t: Option<f64>,
    /// Search for the smallest invariant `Q_t`.
    #[arg(long)]
    pub find_min_t: bool,
    /// Verify `rho Q_inf` built from the marked normal directions.
    #[arg(long)]
    pub q_infinity: bool,
    /// Scale of `Q_inf`; searched by doubling when omitted.
    #[arg(long, requires = "q_infinity")]
    pub rho: Option<f64>,
    /// Half-angle (radians) of the removed arcs; a third of the smallest gap when omitted.
    #[arg(long, requires = "q_infinity")]
    pub theta: Option<f64>,
    /// Bisection resolution for --find-min-t.
    #[arg(long, default_value_t = 1e-3)]
    pub resolution: f64,
    /// Largest `t` tried by --find-min-t.
    #[arg(long, default_value_t = 1000.0)]
    pub cap: f64,
    /// Largest `rho`, as a multiple of the polytope diameter.
    #[arg(long, default_value_t = 100.0)]
    pub cap_factor: f64,
    /// Boundary samples per verification.
    #[arg(long, default_value_t = 4000)]
    pub boundary: usize,
    /// Interior samples per verification.
    #[arg(long, default_value_t = 500)]
    pub interior: usize,
    /// Random inputs besides the vertices.
    #[arg(long, default_value_t = 16)]
    pub gammas: usize,
    /// Write the region boundary as `arc`/`seg` lines.
    #[arg(long, value_name = "PATH")]
    pub export: Option<PathBuf>,
    /// Start point `x,y,..` of an absorption test into the region.
    #[arg(long, value_name = "POINT", allow_hyphen_values = true)]
    pub absorb_from: Option<String>,
    /// Inputs are drawn from the polytope shrunk by this margin.
    #[arg(long, default_value_t = 0.2)]
    pub absorb_margin: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub stay_steps: usize,
}

fn verdict_record(key: &str, value: f64, v: &Verdict) -> serde_json::Value {
    json!({
        key: value,
        "pass": v.pass,
        "margin": v.margin,
        "method": v.method,
        "samples": v.points * v.gammas.max(1),
        "witness": v.witness,
    })
}

pub(crate) fn run(a: &RegionArgs, ctx: &Context, report: &mut RunReport) -> Result<()> {
    if let Some(e) = &a.export {
        check_output(e)?;
    }
    let polys = a
        .polytope
        .iter()
        .map(|s| load_polytope(s))
        .collect::<Result<Vec<_>>>()?;
    if polys.len() > 1 && !a.q_infinity {
        return Err(Error::InvalidArgument("several polytopes need --q-infinity".into()));
    }
    let cfg = VerifyConfig {
        boundary: a.boundary,
        interior: a.interior,
        gammas: a.gammas,
        seed: ctx.seed,
    };
    let p = &polys[0];
    let region: Box<dyn Region> = if let Some(t) = a.t {
        fixed_t(p, t, &cfg, report, a)?
    } else if a.find_min_t {
        min_t(p, a, &cfg, report)?
    } else {
        q_infinity(&polys, a, &cfg, report)?
    };
    if let Some(x0) = &a.absorb_from {
        let x0 = numbers("absorb-from", x0)?;
        for (k, p) in polys.iter().enumerate() {
            let r = absorption_test_random(
                region.as_ref(),
                p,
                a.absorb_margin,
                &x0,
                ctx.seed,
                a.max_steps,
                a.stay_steps,
            );
            let key = format!("absorption_{k}");
            match r {
                Ok(r) => {
                    report.assert(
                        &format!("absorbed_{k}"),
                        r.stayed,
                        format!(
                            "entered at step {}, stayed {} steps: {}",
                            r.entry_step, r.checked_after, r.stayed
                        ),
                        &[&key],
                    );
                    report.metric(&key, r);
                }
                Err(Error::NoEntry { steps, distance }) => {
                    report.assert(
                        &format!("absorbed_{k}"),
                        false,
                        format!("no entry within {steps} steps, distance {distance}"),
                        &[&key],
                    );
                    report.metric(&key, json!({"entry_step": null, "distance": distance}));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

fn export(a: &RegionArgs, text: Result<String>) -> Result<()> {
    if let Some(path) = &a.export {
        fs::write(path, text?)?;
    }
    Ok(())
}

fn fixed_t(
    p: &Polytope,
    t: f64,
    cfg: &VerifyConfig,
    report: &mut RunReport,
    a: &RegionArgs,
) -> Result<Box<dyn Region>> {
    if p.dim() == 1 {
        let iv = interval_region(p, t)?;
        let v = verify_invariance(&iv.region, p, cfg)?;
        report.metric("verdict", verdict_record("t", t, &v));
        report.metric("overshoot", iv.overshoot);
        report.assert(
            "invariant",
            v.pass && iv.invariant,
            format!(
                "closed form {}, endpoint check {} (margin {})",
                iv.invariant, v.pass, v.margin
            ),
            &["verdict", "overshoot"],
        );
        export(a, Ok(format!("seg {} 0 {} 0\n", iv.region.lo, iv.region.hi)))?;
        return Ok(Box::new(iv.region));
    }
    let q = polygon_region(p, t)?;
    let v = verify_invariance(&q, p, cfg)?;
    let ex = exact_invariance(&q, p)?;
    report.metric("verdict", verdict_record("t", t, &v));
    report.metric("exact", verdict_record("t", t, &ex));
    report.assert(
        "invariant",
        v.pass,
        format!("sampled margin {}", v.margin),
        &["verdict"],
    );
    report.assert(
        "invariant_exact",
        ex.pass,
        format!("cell-vertex margin {}", ex.margin),
        &["exact"],
    );
    export(a, q.export())?;
    Ok(Box::new(q))
}

fn min_t(p: &Polytope, a: &RegionArgs, cfg: &VerifyConfig, report: &mut RunReport) -> Result<Box<dyn Region>> {
    let r = find_min_t(p, a.resolution, a.cap, cfg)?;
    report.metric("t", r.t);
    report.metric("evaluations", r.evaluations);
    report.metric("verdict", verdict_record("t", r.t, &r.verdict));
    report.metric("recheck", verdict_record("t", r.t, &r.recheck));
    report.assert(
        "min_t_passes",
        r.verdict.pass,
        format!("margin {}", r.verdict.margin),
        &["t", "verdict"],
    );
    report.assert(
        "min_t_passes_recheck",
        r.recheck.pass,
        format!("margin {} at 4x sampling", r.recheck.margin),
        &["recheck"],
    );
    if let Some((tb, vb)) = &r.below {
        report.metric("below", verdict_record("t", *tb, vb));
        report.assert(
            "below_fails_with_witness",
            !vb.pass && vb.witness.is_some(),
            format!("t = {tb}: pass {}, margin {}", vb.pass, vb.margin),
            &["below"],
        );
    }
    if let Some(ex) = &r.exact {
        report.metric("exact", verdict_record("t", r.t, ex));
        report.assert(
            "min_t_exact",
            ex.pass,
            format!("cell-vertex margin {}", ex.margin),
            &["exact"],
        );
    }
    report.metric("non_monotone", &r.non_monotone);
    report.assert(
        "monotone_above",
        r.non_monotone.is_empty(),
        format!("{} failing t above T", r.non_monotone.len()),
        &["non_monotone"],
    );
    if p.dim() == 1 {
        let iv = interval_region(p, r.t)?;
        export(a, Ok(format!("seg {} 0 {} 0\n", iv.region.lo, iv.region.hi)))?;
        return Ok(Box::new(iv.region));
    }
    let q = polygon_region(p, r.t)?;
    export(a, q.export())?;
    Ok(Box::new(q))
}

fn q_infinity(
    polys: &[Polytope],
    a: &RegionArgs,
    cfg: &VerifyConfig,
    report: &mut RunReport,
) -> Result<Box<dyn Region>> {
    let (region, verdicts) = match a.rho {
        Some(rho) => {
            let omega = shared_omega(polys, a.theta)?;
            let region = ConvexRegion2D::new(omega, rho, mean_centroid(polys))?;
            let verdicts = polys
                .iter()
                .map(|p| verify_invariance(&region, p, cfg))
                .collect::<Result<Vec<_>>>()?;
            (region, verdicts)
        }
        None => {
            let r = find_rho(polys, a.theta, a.cap_factor, cfg)?;
            report.metric("tried", &r.tried);
            let rechecks: Vec<_> = r.rechecks.iter().map(|v| verdict_record("rho", r.rho, v)).collect();
            report.metric("rechecks", rechecks);
            (r.region, r.verdicts)
        }
    };
    let rho = region.rho();
    let diam = polys.iter().map(Polytope::diameter).fold(0.0, f64::max);
    report.metric("rho", rho);
    report.metric("rho_over_diameter", rho / diam);
    report.metric("theta", region.omega().theta());
    report.metric("marks", region.omega().marks().len());
    report.metric("min_gap", region.omega().min_gap());
    let records: Vec<_> = verdicts.iter().map(|v| verdict_record("rho", rho, v)).collect();
    report.metric("verdicts", records);
    for (k, v) in verdicts.iter().enumerate() {
        report.assert(
            &format!("invariant_{k}"),
            v.pass,
            format!("polytope {}: margin {}", a.polytope[k], v.margin),
            &["verdicts", "rho"],
        );
    }
    let convex = region.check_convex();
    report.assert(
        "region_convex",
        convex.is_ok(),
        match &convex {
            Ok(()) => "turning angles non-negative, total 2π".to_string(),
            Err(e) => e.to_string(),
        },
        &["theta", "marks"],
    );
    export(a, Ok(region.export()))?;
    Ok(Box::new(region))
}
