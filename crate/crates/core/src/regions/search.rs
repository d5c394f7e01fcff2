//! Searches for the smallest invariant `Q_t` and for a scale `ρ` at which
//! `ρ Q_∞` is invariant.

use serde::Serialize;

use super::halfspace::{exact_invariance, polygon_region};
use super::interval::interval_region;
use super::omega::{mean_centroid, shared_omega, ConvexRegion2D};
use super::{verify_invariance, Verdict, VerifyConfig};
use crate::error::{Error, Result};
use crate::polytope::Polytope;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinTResult {
    pub t: f64,
    pub resolution: f64,
    pub verdict: Verdict,
    /// Re-verification at `T` with four times the sampling budget.
    pub recheck: Verdict,
    /// Verdict at `T - 10 * resolution` (expected to fail), when that is non-negative.
    pub below: Option<(f64, Verdict)>,
    /// Exact cell-vertex check at `T` for polygons.
    pub exact: Option<Verdict>,
    /// Values of `t` above `T` that failed, contradicting monotonicity.
    pub non_monotone: Vec<f64>,
    pub evaluations: usize,
}

/// Smallest `t` (to `resolution`) for which `Q_t` passes verification, by
/// bisection on `[0, hi]` where `hi` doubles from the diameter up to `cap`.
pub fn find_min_t(p: &Polytope, resolution: f64, cap: f64, cfg: &VerifyConfig) -> Result<MinTResult> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} must be positive"
        )));
    }
    if p.dim() == 1 {
        let v0 = p.vertex(crate::polytope::VertexId(0))[0];
        let v1 = p.vertex(crate::polytope::VertexId(1))[0];
        let t = (v1 - v0) / 2.0;
        let at = interval_region(p, t)?;
        let verdict = verify_invariance(&at.region, p, cfg)?;
        let below_t = t - 10.0 * resolution;
        let below = if below_t >= 0.0 {
            let r = interval_region(p, below_t)?;
            Some((below_t, verify_invariance(&r.region, p, cfg)?))
        } else {
            None
        };
        return Ok(MinTResult {
            t,
            resolution,
            recheck: verdict.clone(),
            verdict,
            below,
            exact: None,
            non_monotone: Vec::new(),
            evaluations: 1,
        });
    }
    let mut evaluations = 0;
    let mut check = |t: f64, c: &VerifyConfig| -> Result<Verdict> {
        evaluations += 1;
        verify_invariance(&polygon_region(p, t)?, p, c)
    };
    let mut hi = p.diameter();
    while !check(hi, cfg)?.pass {
        hi *= 2.0;
        if hi > cap {
            return Err(Error::NoPassBelowCap { cap });
        }
    }
    let top = hi;
    let mut lo = 0.0;
    if check(lo, cfg)?.pass {
        hi = lo;
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if check(mid, cfg)?.pass {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = hi;
    let verdict = check(t, cfg)?;
    let recheck = check(t, &cfg.scaled(4))?;
    let below_t = t - 10.0 * resolution;
    let below = if below_t >= 0.0 {
        Some((below_t, check(below_t, cfg)?))
    } else {
        None
    };
    let mut non_monotone = Vec::new();
    for k in 1..=8 {
        let s = t + (top - t) * k as f64 / 8.0;
        if !check(s, cfg)?.pass {
            non_monotone.push(s);
        }
    }
    let exact = Some(exact_invariance(&polygon_region(p, t)?, p)?);
    Ok(MinTResult {
        t,
        resolution,
        verdict,
        recheck,
        below,
        exact,
        non_monotone,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoResult {
    pub rho: f64,
    pub theta: f64,
    pub marks: usize,
    pub region: ConvexRegion2D,
    /// One verdict per polytope.
    pub verdicts: Vec<Verdict>,
    /// The same at double sampling density.
    pub rechecks: Vec<Verdict>,
    /// Every scale tried, with its combined verdict.
    pub tried: Vec<(f64, bool)>,
}

/// Doubles `ρ` from the largest diameter until `ρ Q_∞` (built from the
/// shared `Ω` and centered at the mean centroid) passes for every polytope,
/// giving up beyond `cap_factor` times that diameter.
pub fn find_rho(polys: &[Polytope], theta: Option<f64>, cap_factor: f64, cfg: &VerifyConfig) -> Result<RhoResult> {
    let omega = shared_omega(polys, theta)?;
    let center = mean_centroid(polys);
    let diam = polys.iter().map(Polytope::diameter).fold(0.0, f64::max);
    let cap = cap_factor * diam;
    let mut rho = diam;
    let mut tried = Vec::new();
    while rho <= cap {
        let region = ConvexRegion2D::new(omega.clone(), rho, center)?;
        let verdicts = polys
            .iter()
            .map(|p| verify_invariance(&region, p, cfg))
            .collect::<Result<Vec<_>>>()?;
        let pass = verdicts.iter().all(|v| v.pass);
        tried.push((rho, pass));
        if pass {
            let rechecks = polys
                .iter()
                .map(|p| verify_invariance(&region, p, &cfg.scaled(2)))
                .collect::<Result<Vec<_>>>()?;
            if rechecks.iter().all(|v| v.pass) {
                return Ok(RhoResult {
                    rho,
                    theta: omega.theta(),
                    marks: omega.marks().len(),
                    region,
                    verdicts,
                    rechecks,
                    tried,
                });
            }
        }
        rho *= 2.0;
    }
    Err(Error::NoPassBelowCap { cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::preset;

    fn quick() -> VerifyConfig {
        VerifyConfig {
            boundary: 1500,
            interior: 100,
            gammas: 4,
            seed: 1,
        }
    }

    #[test]
    fn interval_route_is_exact() {
        let p = preset("interval").unwrap();
        let r = find_min_t(&p, 1e-3, 100.0, &quick()).unwrap();
        assert_eq!(r.t, 0.5);
        assert!(r.verdict.pass);
        assert!(!r.below.unwrap().1.pass);
    }

    #[test]
    fn square_min_t_near_half() {
        let p = preset("square").unwrap();
        let r = find_min_t(&p, 1e-3, 100.0, &quick()).unwrap();
        assert!(r.t >= 0.5 && r.t <= 0.5 + 1e-3, "{}", r.t);
        assert!(r.recheck.pass && r.exact.as_ref().unwrap().pass);
        assert!(!r.below.unwrap().1.pass);
        assert!(r.non_monotone.is_empty());
    }

    #[test]
    fn equilateral_triangle() {
        let p = preset("polygon(3)").unwrap();
        let r = find_min_t(&p, 1e-3, 100.0, &quick()).unwrap();
        assert!(r.recheck.pass);
        assert!(r.exact.unwrap().margin >= -1e-3);
    }
}
