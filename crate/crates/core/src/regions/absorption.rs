//! Entry of orbits into an invariant region from far away.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{pass_tolerance, Region};
use crate::error::{check_dim, Error, Result};
use crate::polytope::Polytope;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionReport {
    /// First `k` with `x(k)` in the region.
    pub entry_step: usize,
    /// Steps iterated after entry.
    pub checked_after: usize,
    /// All post-entry iterates stayed in the region.
    pub stayed: bool,
    /// Smallest margin seen after entry.
    pub min_margin_after: f64,
    /// Distance outside (negative margin) at the start.
    pub start_excess: f64,
}

/// Iterates `x(k+1) = phi_{gamma(k+1)}(x(k))` from `x0` until `x(k)` enters
/// the region, then for `stay_steps` more steps checks it never leaves.
pub fn absorption_test<R, G>(
    region: &R,
    p: &Polytope,
    x0: &[f64],
    mut gamma_at: G,
    max_steps: usize,
    stay_steps: usize,
) -> Result<AbsorptionReport>
where
    R: Region + ?Sized,
    G: FnMut(usize, &mut [f64]),
{
    check_dim(p.dim(), x0.len())?;
    check_dim(p.dim(), region.dim())?;
    let tol = pass_tolerance(region.extent());
    let mut x = x0.to_vec();
    let mut g = vec![0.0; p.dim()];
    let start_excess = -region.margin(&x);
    let mut k = 0;
    while region.margin(&x) < 0.0 {
        if k == max_steps {
            return Err(Error::NoEntry {
                steps: max_steps,
                distance: -region.margin(&x),
            });
        }
        k += 1;
        step(p, &mut x, &mut g, k, &mut gamma_at);
    }
    let entry_step = k;
    let mut min_margin_after = region.margin(&x);
    let mut stayed = true;
    for s in 1..=stay_steps {
        step(p, &mut x, &mut g, k + s, &mut gamma_at);
        let m = region.margin(&x);
        min_margin_after = min_margin_after.min(m);
        if m < -tol {
            stayed = false;
        }
    }
    Ok(AbsorptionReport {
        entry_step,
        checked_after: stay_steps,
        stayed,
        min_margin_after,
        start_excess,
    })
}

fn step<G: FnMut(usize, &mut [f64])>(p: &Polytope, x: &mut [f64], g: &mut [f64], k: usize, gamma_at: &mut G) {
    let id = p.nearest_unchecked(x);
    gamma_at(k, g);
    for (i, v) in p.vertex(id).iter().enumerate() {
        x[i] += g[i] - v;
    }
}

/// [`absorption_test`] with inputs uniform in `P` shrunk toward its centroid by `margin`.
pub fn absorption_test_random<R: Region + ?Sized>(
    region: &R,
    p: &Polytope,
    margin: f64,
    x0: &[f64],
    seed: u64,
    max_steps: usize,
    stay_steps: usize,
) -> Result<AbsorptionReport> {
    let p0 = p.shrunk(margin)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    absorption_test(region, p, x0, |_, g| p0.sample_into(&mut rng, g), max_steps, stay_steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::preset;
    use crate::regions::{polygon_region, IntervalRegion};

    #[test]
    fn constant_half_from_one_hundred() {
        let p = preset("interval").unwrap();
        let q = IntervalRegion::new(-0.5, 1.5).unwrap();
        let r = absorption_test(&q, &p, &[100.0], |_, g| g[0] = 0.5, 1000, 1000).unwrap();
        // x(k) = 100 - k/2 reaches 1.5 at k = 197
        assert_eq!(r.entry_step, 197);
        assert!(r.stayed);
        let direct = (0..).find(|&k| 100.0 - 0.5 * k as f64 <= 1.5).unwrap();
        assert_eq!(direct, 197);
    }

    #[test]
    fn inside_start_is_zero_steps() {
        let p = preset("interval").unwrap();
        let q = IntervalRegion::new(-0.5, 1.5).unwrap();
        let r = absorption_test(&q, &p, &[0.2], |_, g| g[0] = 0.3, 10, 100).unwrap();
        assert_eq!(r.entry_step, 0);
    }

    #[test]
    fn square_from_fifty() {
        let sq = preset("square").unwrap();
        let q = polygon_region(&sq, 0.5).unwrap();
        let r = absorption_test_random(&q, &sq, 0.2, &[50.0, 50.0], 3, 100_000, 10_000).unwrap();
        assert!(r.entry_step > 0 && r.stayed);
    }

    #[test]
    fn no_entry_is_reported() {
        let p = preset("interval").unwrap();
        let q = IntervalRegion::new(-0.5, 1.5).unwrap();
        let e = absorption_test(&q, &p, &[100.0], |_, g| g[0] = 1.0, 50, 0).unwrap_err();
        assert!(matches!(e, Error::NoEntry { steps: 50, .. }));
    }
}
