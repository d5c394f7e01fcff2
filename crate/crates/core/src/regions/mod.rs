//! Invariant convex regions for the map `phi_gamma` and their verification.
//!
//! A region `Q` is invariant when `phi_gamma(Q)` stays in `Q` for every input
//! `gamma` in the polytope. Within one Voronoi cell `phi_gamma` is a
//! translation, so the worst image of `Q ∩ R_v` is attained at an extreme
//! point of that set, and the worst input is a vertex of the polytope.

pub mod absorption;
pub mod counterexample;
pub mod halfspace;
pub mod interval;
pub mod omega;
pub mod search;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::phi;
use crate::error::{check_dim, Result};
use crate::linalg::{dist, solve};
use crate::polytope::{Polytope, VertexId};

pub use absorption::{absorption_test, absorption_test_random, AbsorptionReport};
pub use counterexample::{counterexample_3d, CounterexampleReport, Octahedron};
pub use halfspace::{exact_invariance, polygon_region, HalfspaceRegion};
pub use interval::{interval_region, IntervalRegion, IntervalVerdict};
pub use omega::{build_omega_2d, build_q_infinity, shared_omega, shared_region, ConvexRegion2D, Omega2D};
pub use search::{find_min_t, find_rho, MinTResult, RhoResult};

/// Relative tie tolerance used to collect every cell whose closure holds a candidate point.
const CLOSURE_TOL: f64 = 1e-9;

/// A closed convex region with a signed membership margin.
pub trait Region: Send + Sync {
    fn dim(&self) -> usize;

    /// Non-negative inside, negative outside; for polygonal regions the
    /// smallest slack over unit-normal constraints.
    fn margin(&self, x: &[f64]) -> f64;

    fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.margin(x) >= -tol
    }

    /// At least `n` points on the boundary, always including every corner.
    fn boundary_points(&self, n: usize) -> Vec<Vec<f64>>;

    /// A point in the interior.
    fn center(&self) -> Vec<f64>;

    /// Largest distance from [`Region::center`] to the boundary, or a bound on it.
    fn extent(&self) -> f64;

    /// `(lo, hi)` for one-dimensional regions.
    fn as_interval(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Pass threshold on the minimum image margin for a region of the given extent.
pub fn pass_tolerance(extent: f64) -> f64 {
    1e-9 * (1.0 + extent)
}

/// Sampling budget for [`verify_invariance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub boundary: usize,
    pub interior: usize,
    /// Random inputs drawn in addition to the polytope vertices.
    pub gammas: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            boundary: 4000,
            interior: 500,
            gammas: 16,
            seed: 0,
        }
    }
}

impl VerifyConfig {
    /// Same seed, all budgets multiplied by `factor`.
    pub fn scaled(self, factor: usize) -> Self {
        Self {
            boundary: self.boundary * factor,
            interior: self.interior * factor,
            gammas: self.gammas * factor,
            seed: self.seed,
        }
    }
}

/// A point whose image leaves the region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Vertex subtracted by the map at `x`.
    pub vertex: usize,
    pub image: Vec<f64>,
    pub margin: f64,
    /// True when `image` is `phi_gamma(x)` under the tie rule itself; false when
    /// the violation was found only on a cell boundary through a neighboring cell.
    pub direct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    /// Minimum image margin found (negative means a violation).
    pub margin: f64,
    pub method: &'static str,
    /// Candidate points tested.
    pub points: usize,
    /// Inputs tested per point.
    pub gammas: usize,
    pub witness: Option<Witness>,
}

/// Checks `phi_gamma(Q) ⊂ Q` on candidate points and inputs.
///
/// One-dimensional regions are checked exactly. In the plane the candidates
/// are boundary points (with corners), the chords of every bisector line
/// through the region, Voronoi vertices inside the region, and random interior
/// points; each is tested against every cell whose closure contains it and
/// against the polytope vertices plus random inputs. The pass verdict is only
/// as dense as the sampling of curved boundary pieces.
pub fn verify_invariance<R: Region + ?Sized>(region: &R, p: &Polytope, cfg: &VerifyConfig) -> Result<Verdict> {
    check_dim(p.dim(), region.dim())?;
    if let Some((lo, hi)) = region.as_interval() {
        return Ok(interval::exact_interval_check(lo, hi, p));
    }
    let points = candidate_points(region, p, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut gammas: Vec<Vec<f64>> = p.to_vertex_list();
    gammas.extend((0..cfg.gammas).map(|_| p.sample(&mut rng)));
    Ok(check_points(region, p, &points, &gammas, "sampled"))
}

/// Minimum image margin over `points x closure cells x gammas`, with a witness.
pub(crate) fn check_points<R: Region + ?Sized>(
    region: &R,
    p: &Polytope,
    points: &[Vec<f64>],
    gammas: &[Vec<f64>],
    method: &'static str,
) -> Verdict {
    let dim = p.dim();
    let best = points
        .par_iter()
        .enumerate()
        .map(|(idx, x)| {
            let mut y = vec![0.0; dim];
            let mut out = (f64::INFINITY, idx, 0usize, 0usize);
            for cell in p.closure_cells(x, CLOSURE_TOL) {
                let v = p.vertex(cell);
                for (gi, g) in gammas.iter().enumerate() {
                    for k in 0..dim {
                        y[k] = x[k] + g[k] - v[k];
                    }
                    let m = region.margin(&y);
                    if m < out.0 {
                        out = (m, idx, cell.0, gi);
                    }
                }
            }
            out
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, 0, 0),
            |a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a },
        );
    let (margin, idx, cell, gi) = best;
    let tol = pass_tolerance(region.extent());
    let pass = margin >= -tol;
    let witness = (!pass).then(|| realize_witness(region, p, &points[idx], VertexId(cell), &gammas[gi], margin));
    Verdict {
        pass,
        margin,
        method,
        points: points.len(),
        gammas: gammas.len(),
        witness,
    }
}

/// Turns a closure-cell violation into one the tie rule itself exhibits by
/// stepping slightly from `x` toward the cell's vertex.
fn realize_witness<R: Region + ?Sized>(
    region: &R,
    p: &Polytope,
    x: &[f64],
    cell: VertexId,
    gamma: &[f64],
    margin: f64,
) -> Witness {
    let v = p.vertex(cell);
    if p.nearest_unchecked(x) == cell {
        let image = phi(p, gamma, x).expect("dimension checked");
        let m = region.margin(&image);
        return Witness {
            x: x.to_vec(),
            gamma: gamma.to_vec(),
            vertex: cell.0,
            image,
            margin: m,
            direct: true,
        };
    }
    let tol = pass_tolerance(region.extent());
    for eta in [1e-9, 1e-7, 1e-5] {
        let xs: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + eta * (b - a)).collect();
        if p.nearest_unchecked(&xs) == cell && region.margin(&xs) >= 0.0 {
            let image = phi(p, gamma, &xs).expect("dimension checked");
            let m = region.margin(&image);
            if m < -tol {
                return Witness {
                    x: xs,
                    gamma: gamma.to_vec(),
                    vertex: cell.0,
                    image,
                    margin: m,
                    direct: true,
                };
            }
        }
    }
    Witness {
        x: x.to_vec(),
        gamma: gamma.to_vec(),
        vertex: cell.0,
        image: x.iter().zip(gamma).zip(v).map(|((a, g), b)| a + g - b).collect(),
        margin,
        direct: false,
    }
}

fn candidate_points<R: Region + ?Sized>(region: &R, p: &Polytope, cfg: &VerifyConfig) -> Vec<Vec<f64>> {
    let mut pts = region.boundary_points(cfg.boundary);
    if p.dim() == 2 {
        let per_chord = (cfg.boundary / 40).max(4);
        for i in p.vertex_ids() {
            for j in p.vertex_ids().filter(|j| j.0 > i.0) {
                pts.extend(bisector_chord(region, p.vertex(i), p.vertex(j), per_chord));
            }
        }
        pts.extend(voronoi_vertices_2d(p).into_iter().filter(|x| region.margin(x) >= 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let c = region.center();
    let boundary = region.boundary_points(cfg.boundary.max(16));
    for _ in 0..cfg.interior {
        let b = boundary.choose(&mut rng).expect("non-empty boundary");
        let s: f64 = rng.random();
        pts.push(c.iter().zip(b).map(|(ci, bi)| ci + s * (bi - ci)).collect());
    }
    pts
}

/// Points on the part of the bisector of `a` and `b` that lies in the region,
/// including both chord endpoints.
fn bisector_chord<R: Region + ?Sized>(region: &R, a: &[f64], b: &[f64], n: usize) -> Vec<Vec<f64>> {
    let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let len = dist(a, b);
    let d = [-(b[1] - a[1]) / len, (b[0] - a[0]) / len];
    let at = |s: f64| vec![m[0] + s * d[0], m[1] + s * d[1]];
    let f = |s: f64| region.margin(&at(s));
    let span = 2.0 * (region.extent() + dist(&m, &region.center())) + 1.0;
    let s_star = golden_max(&f, -span, span);
    if f(s_star) < 0.0 {
        return Vec::new();
    }
    let lo = bisect_edge(&f, s_star, -span);
    let hi = bisect_edge(&f, s_star, span);
    let mut out = vec![at(lo), at(hi)];
    for k in 1..n {
        out.push(at(lo + (hi - lo) * k as f64 / n as f64));
    }
    out
}

/// Maximizer of a concave function on `[a, b]`.
fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

/// Last point from `inside` toward `outside` with non-negative margin.
fn bisect_edge<F: Fn(f64) -> f64>(f: &F, mut inside: f64, mut outside: f64) -> f64 {
    if f(outside) >= 0.0 {
        return outside;
    }
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if f(mid) >= 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Points equidistant from three or more vertices.
fn voronoi_vertices_2d(p: &Polytope) -> Vec<Vec<f64>> {
    let vs = p.to_vertex_list();
    let mut out = Vec::new();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            for k in j + 1..vs.len() {
                let (a, b, c) = (&vs[i], &vs[j], &vs[k]);
                let m = [b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1]];
                let rhs = [
                    0.5 * (b[0] * b[0] + b[1] * b[1] - a[0] * a[0] - a[1] * a[1]),
                    0.5 * (c[0] * c[0] + c[1] * c[1] - a[0] * a[0] - a[1] * a[1]),
                ];
                if let Some(x) = solve(&m, &rhs, 2) {
                    out.push(x);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_and_bisect() {
        let f = |s: f64| 1.0 - (s - 0.3).abs();
        let s = golden_max(&f, -10.0, 10.0);
        assert!((s - 0.3).abs() < 1e-9);
        let e = bisect_edge(&f, s, 10.0);
        assert!((e - 1.3).abs() < 1e-12 && f(e) >= 0.0);
    }

    #[test]
    fn voronoi_vertex_of_square_is_center() {
        let sq = crate::polytope::preset("square").unwrap();
        for x in voronoi_vertices_2d(&sq) {
            if x.iter().all(|c| c.is_finite()) {
                assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
            }
        }
    }
}
