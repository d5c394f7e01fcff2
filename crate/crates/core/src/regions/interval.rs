//! Intervals on the line.

use serde::Serialize;

use super::{pass_tolerance, Region, Verdict, Witness};
use crate::error::{Error, Result};
use crate::polytope::{Polytope, VertexId};

/// The closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalRegion {
    pub lo: f64,
    pub hi: f64,
}

impl IntervalRegion {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }
}

impl Region for IntervalRegion {
    fn dim(&self) -> usize {
        1
    }

    fn margin(&self, x: &[f64]) -> f64 {
        (x[0] - self.lo).min(self.hi - x[0])
    }

    fn boundary_points(&self, _n: usize) -> Vec<Vec<f64>> {
        vec![vec![self.lo], vec![self.hi]]
    }

    fn center(&self) -> Vec<f64> {
        vec![0.5 * (self.lo + self.hi)]
    }

    fn extent(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    fn as_interval(&self) -> Option<(f64, f64)> {
        Some((self.lo, self.hi))
    }
}

/// Exact verdict for `[v0 - t, v1 + t]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalVerdict {
    pub region: IntervalRegion,
    pub t: f64,
    pub invariant: bool,
    /// How far the worst image passes the region's ends: `(v1 - v0)/2 - t`.
    pub overshoot: f64,
    /// `(x, gamma, phi_gamma(x))` when not invariant.
    pub witness: Option<(f64, f64, f64)>,
}

/// The interval `P` widened by `t` at both ends, with its invariance verdict.
///
/// On the left cell `[v0 - t, m]`, `m` the midpoint, the map translates by
/// `gamma - v0 ∈ [0, v1 - v0]`, so the image reaches `m + v1 - v0 = v1 + h`
/// with `h = (v1 - v0)/2`; the right cell is symmetric. Both overshoots are
/// `h - t`, independent of the translation terms, so the verdict is decided
/// by comparing `t` with `h` and flips exactly there.
pub fn interval_region(p: &Polytope, t: f64) -> Result<IntervalVerdict> {
    if p.dim() != 1 || p.len() != 2 {
        return Err(Error::InvalidArgument(
            "interval_region needs a two-vertex polytope on the line".into(),
        ));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("translation {t} must be non-negative")));
    }
    let (v0, v1) = (p.vertex(VertexId(0))[0], p.vertex(VertexId(1))[0]);
    if v1 <= v0 {
        return Err(Error::InvalidPolytope(format!(
            "interval endpoints out of order: {v0} >= {v1}"
        )));
    }
    let h = (v1 - v0) / 2.0;
    let region = IntervalRegion::new(v0 - t, v1 + t)?;
    let invariant = t >= h;
    let witness = (!invariant).then(|| {
        let x = v0 + h;
        (x, v1, x + v1 - v0)
    });
    Ok(IntervalVerdict {
        region,
        t,
        invariant,
        overshoot: h - t,
        witness,
    })
}

/// Cell-by-cell endpoint check of `[lo, hi]` for any polytope on the line.
pub(crate) fn exact_interval_check(lo: f64, hi: f64, p: &Polytope) -> Verdict {
    let mut vs: Vec<(f64, usize)> = p.vertices().enumerate().map(|(i, v)| (v[0], i)).collect();
    vs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (gmin, gmax) = (vs[0].0, vs[vs.len() - 1].0);
    let mut worst = (f64::INFINITY, 0.0, 0.0, 0usize);
    for k in 0..vs.len() {
        let (v, id) = vs[k];
        let left = if k == 0 {
            f64::NEG_INFINITY
        } else {
            0.5 * (vs[k - 1].0 + v)
        };
        let right = if k + 1 == vs.len() {
            f64::INFINITY
        } else {
            0.5 * (v + vs[k + 1].0)
        };
        let a = lo.max(left);
        let b = hi.min(right);
        if a > b {
            continue;
        }
        let low_margin = (a + gmin - v) - lo;
        let high_margin = hi - (b + gmax - v);
        if low_margin < worst.0 {
            worst = (low_margin, a, gmin, id);
        }
        if high_margin < worst.0 {
            worst = (high_margin, b, gmax, id);
        }
    }
    let (margin, x, g, id) = worst;
    let pass = margin >= -pass_tolerance(0.5 * (hi - lo));
    Verdict {
        pass,
        margin,
        method: "exact",
        points: 2 * vs.len(),
        gammas: 2,
        witness: (!pass).then(|| Witness {
            x: vec![x],
            gamma: vec![g],
            vertex: id,
            image: vec![x + g - p.vertex(VertexId(id))[0]],
            margin,
            direct: p.nearest_unchecked(&[x]).0 == id,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::phi;
    use crate::polytope::preset;
    use crate::regions::verify_invariance;

    /// Grid search over `x` in the region and `gamma` in P for an escaping image.
    fn grid_witness(p: &Polytope, r: &IntervalRegion, step: f64) -> Option<(f64, f64)> {
        let v0 = p.vertex(VertexId(0))[0];
        let v1 = p.vertex(VertexId(1))[0];
        let nx = ((r.hi - r.lo) / step).round() as usize;
        let ng = ((v1 - v0) / step).round() as usize;
        for a in 0..=nx {
            let x = r.lo + (r.hi - r.lo) * a as f64 / nx as f64;
            for b in 0..=ng {
                let g = v0 + (v1 - v0) * b as f64 / ng as f64;
                let y = phi(p, &[g], &[x]).unwrap()[0];
                if y < r.lo - 1e-12 || y > r.hi + 1e-12 {
                    return Some((x, g));
                }
            }
        }
        None
    }

    #[test]
    fn unit_interval_examples() {
        let p = preset("interval").unwrap();
        assert!(interval_region(&p, 0.5).unwrap().invariant);
        let v = interval_region(&p, 0.25).unwrap();
        assert!(!v.invariant);
        let (x, g, y) = v.witness.unwrap();
        assert_eq!((x, g, y), (0.5, 1.0, 1.5));
        assert_eq!(phi(&p, &[g], &[x]).unwrap(), vec![y]);
        assert!(y > v.region.hi);
        assert!(!interval_region(&p, 0.0).unwrap().invariant);
        assert!(interval_region(&p, -1.0).is_err());
    }

    #[test]
    fn matches_grid_search() {
        let p = preset("interval").unwrap();
        for t in [0.0, 0.1, 0.25, 0.45, 0.5, 0.7, 1.0] {
            let v = interval_region(&p, t).unwrap();
            let found = grid_witness(&p, &v.region, 1e-3);
            assert_eq!(found.is_none(), v.invariant, "t = {t}");
        }
    }

    #[test]
    fn general_check_agrees() {
        let p = Polytope::new(vec![vec![-1.0], vec![3.0]]).unwrap();
        for t in [0.0, 1.0, 1.999, 2.0, 2.5] {
            let v = interval_region(&p, t).unwrap();
            let e = verify_invariance(&v.region, &p, &Default::default()).unwrap();
            assert_eq!(e.pass, v.invariant, "t = {t}");
            assert_eq!(e.method, "exact");
        }
    }

    #[test]
    fn reversed_interval_is_rejected() {
        let p = Polytope::new(vec![vec![1.0], vec![0.0]]).unwrap();
        assert!(matches!(interval_region(&p, 1.0), Err(Error::InvalidPolytope(_))));
    }
}
