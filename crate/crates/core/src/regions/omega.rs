//! The planar direction set `Ω` (the unit circle with small open arcs
//! removed around marked directions, the marked centers kept) and the convex
//! region `ρ Q_∞ = ∩_{ω ∈ Ω} {x : x·ω <= ρ}`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::Region;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{angle_dist, cross2, dir2, wrap_angle};
use crate::polytope::Polytope;

/// Angular tolerance for merging marked directions.
pub const MARK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Omega2D {
    /// Marked directions as sorted angles in `[0, 2π)`.
    marks: Vec<f64>,
    /// Half-angle of every removed arc.
    theta: f64,
    min_gap: f64,
}

impl Omega2D {
    /// Removes open arcs of half-angle `theta` about each marked angle.
    /// `None` picks a third of the smallest gap between marks.
    pub fn new(marks: Vec<f64>, theta: Option<f64>) -> Result<Self> {
        let marks = dedupe_angles(marks);
        if marks.is_empty() {
            return Ok(Self {
                marks,
                theta: 0.0,
                min_gap: TAU,
            });
        }
        let n = marks.len();
        let min_gap = (0..n)
            .map(|k| {
                if k + 1 == n {
                    marks[0] + TAU - marks[k]
                } else {
                    marks[k + 1] - marks[k]
                }
            })
            .fold(f64::INFINITY, f64::min);
        let theta = theta.unwrap_or(min_gap / 3.0);
        if !(theta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "arc half-angle {theta} must be positive"
            )));
        }
        if theta >= min_gap / 2.0 || theta >= PI / 2.0 {
            return Err(Error::Interference { theta, gap: min_gap });
        }
        // arcs narrower than a half-circle leave Ω outside every closed half-circle
        Ok(Self { marks, theta, min_gap })
    }

    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Angular distance from `a` to the nearest retained direction.
    pub fn distance_to_retained(&self, a: f64) -> f64 {
        for &c in &self.marks {
            let d = angle_dist(a, c);
            if d < self.theta {
                return d.min(self.theta - d);
            }
        }
        0.0
    }
}

fn dedupe_angles(mut a: Vec<f64>) -> Vec<f64> {
    for x in a.iter_mut() {
        *x = wrap_angle(*x);
    }
    a.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(a.len());
    for x in a {
        if out.last().is_none_or(|&y| x - y > MARK_TOL) {
            out.push(x);
        }
    }
    if out.len() > 1 && out[0] + TAU - out[out.len() - 1] <= MARK_TOL {
        out.pop();
    }
    out
}

/// Both unit-normal directions of `v_i - v_j` for every vertex pair.
fn pair_normals(p: &Polytope) -> Result<Vec<f64>> {
    check_dim(2, p.dim())?;
    let mut out = Vec::new();
    for i in p.vertex_ids() {
        for j in p.vertex_ids().filter(|j| j.0 > i.0) {
            let (a, b) = (p.vertex(i), p.vertex(j));
            let t = (b[1] - a[1]).atan2(b[0] - a[0]);
            out.push(t + PI / 2.0);
            out.push(t - PI / 2.0);
        }
    }
    Ok(out)
}

/// `Ω` for the edges and diagonals of one polygon.
pub fn build_omega_2d(p: &Polytope, theta: Option<f64>) -> Result<Omega2D> {
    Omega2D::new(pair_normals(p)?, theta)
}

/// `Ω` marking the pair normals of every polytope in `polys`.
pub fn shared_omega(polys: &[Polytope], theta: Option<f64>) -> Result<Omega2D> {
    if polys.is_empty() {
        return Err(Error::Empty("polytope list"));
    }
    let mut marks = Vec::new();
    for p in polys {
        marks.extend(pair_normals(p)?);
    }
    Omega2D::new(marks, theta)
}

/// One boundary piece of a [`ConvexRegion2D`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BoundaryElement {
    /// Circle arc about the center from angle `a0` to `a1` (`a1 > a0`).
    Arc {
        r: f64,
        a0: f64,
        a1: f64,
    },
    Segment {
        from: [f64; 2],
        to: [f64; 2],
    },
}

/// `c + ρ Q_∞`: a disc of radius `ρ` flattened by three tangent segments
/// around every marked direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexRegion2D {
    omega: Omega2D,
    rho: f64,
    center: [f64; 2],
    boundary: Vec<BoundaryElement>,
    /// Exterior angle at each junction between boundary pieces and along arcs, in order.
    turning: Vec<f64>,
}

/// `ρ Q_∞` centered at the origin.
pub fn build_q_infinity(omega: &Omega2D, rho: f64) -> Result<ConvexRegion2D> {
    ConvexRegion2D::new(omega.clone(), rho, [0.0, 0.0])
}

/// `ρ Q_∞` for the shared `Ω` of several polygons, centered at the mean of their centroids.
pub fn shared_region(polys: &[Polytope], rho: f64, theta: Option<f64>) -> Result<ConvexRegion2D> {
    let omega = shared_omega(polys, theta)?;
    ConvexRegion2D::new(omega, rho, mean_centroid(polys))
}

pub(crate) fn mean_centroid(polys: &[Polytope]) -> [f64; 2] {
    let mut c = [0.0; 2];
    for p in polys {
        let pc = p.centroid();
        c[0] += pc[0] / polys.len() as f64;
        c[1] += pc[1] / polys.len() as f64;
    }
    c
}

impl ConvexRegion2D {
    pub fn new(omega: Omega2D, rho: f64, center: [f64; 2]) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale {rho} must be positive")));
        }
        let th = omega.theta;
        let corner = rho / (th / 2.0).cos();
        let at = |r: f64, a: f64| {
            let d = dir2(a);
            [center[0] + r * d[0], center[1] + r * d[1]]
        };
        let mut boundary = Vec::new();
        let mut turning = Vec::new();
        let marks = &omega.marks;
        let n = marks.len();
        if n == 0 {
            boundary.push(BoundaryElement::Arc {
                r: rho,
                a0: 0.0,
                a1: TAU,
            });
            turning.push(TAU);
        }
        for k in 0..n {
            let c = marks[k];
            let p0 = at(rho, c - th);
            let q0 = at(corner, c - th / 2.0);
            let q1 = at(corner, c + th / 2.0);
            let p1 = at(rho, c + th);
            boundary.push(BoundaryElement::Segment { from: p0, to: q0 });
            turning.push(th);
            boundary.push(BoundaryElement::Segment { from: q0, to: q1 });
            turning.push(th);
            boundary.push(BoundaryElement::Segment { from: q1, to: p1 });
            // the last segment lies on the tangent at c + θ, so the arc continues smoothly
            turning.push(0.0);
            let next = if k + 1 == n { marks[0] + TAU } else { marks[k + 1] };
            let (a0, a1) = (c + th, next - th);
            if a1 < a0 - 1e-15 {
                return Err(Error::Interference {
                    theta: th,
                    gap: omega.min_gap,
                });
            }
            if a1 > a0 {
                boundary.push(BoundaryElement::Arc { r: rho, a0, a1 });
                turning.push(a1 - a0);
            }
            // junction of the arc end with the next notch's first segment
            turning.push(0.0);
        }
        let region = Self {
            omega,
            rho,
            center,
            boundary,
            turning,
        };
        region.check_convex()?;
        Ok(region)
    }

    pub fn omega(&self) -> &Omega2D {
        &self.omega
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn center_point(&self) -> [f64; 2] {
        self.center
    }

    pub fn boundary(&self) -> &[BoundaryElement] {
        &self.boundary
    }

    pub fn turning_angles(&self) -> &[f64] {
        &self.turning
    }

    /// Gauge of `Q_∞`: `max_{ω∈Ω} y·ω`, with `y` measured from the center.
    pub fn gauge(&self, y: [f64; 2]) -> f64 {
        let r = y[0].hypot(y[1]);
        if r == 0.0 {
            return 0.0;
        }
        let a = y[1].atan2(y[0]);
        r * self.omega.distance_to_retained(a).cos()
    }

    /// Membership of `x` in `ρ Q_∞` by the unscaled test on `(x - c)/ρ`.
    pub fn contains_scaled(&self, x: &[f64]) -> bool {
        let y = [(x[0] - self.center[0]) / self.rho, (x[1] - self.center[1]) / self.rho];
        self.gauge(y) <= 1.0
    }

    /// Analytic turning angles non-negative and summing to `2π`, and the
    /// sampled boundary polygon turning one way.
    pub fn check_convex(&self) -> Result<()> {
        if self.turning.iter().any(|&t| t < 0.0) {
            return Err(Error::Degenerate("negative turning angle".into()));
        }
        let total: f64 = self.turning.iter().sum();
        if (total - TAU).abs() > 1e-12 {
            return Err(Error::Degenerate(format!("turning angles sum to {total}, not 2π")));
        }
        let pts = self.boundary_points(64 * self.boundary.len().max(8));
        let m = pts.len();
        let tol = 1e-12 * self.rho * self.rho;
        for k in 0..m {
            let (a, b, c) = (&pts[k], &pts[(k + 1) % m], &pts[(k + 2) % m]);
            let t = cross2([b[0] - a[0], b[1] - a[1]], [c[0] - b[0], c[1] - b[1]]);
            if t < -tol {
                return Err(Error::Degenerate(format!("boundary turns clockwise near {b:?}")));
            }
        }
        Ok(())
    }

    /// Plain-text boundary: `arc cx cy r a0 a1` and `seg x0 y0 x1 y1` lines.
    pub fn export(&self) -> String {
        let mut s = String::new();
        for e in &self.boundary {
            match e {
                BoundaryElement::Arc { r, a0, a1 } => s.push_str(&format!(
                    "arc {} {} {} {} {}\n",
                    self.center[0], self.center[1], r, a0, a1
                )),
                BoundaryElement::Segment { from, to } => {
                    s.push_str(&format!("seg {} {} {} {}\n", from[0], from[1], to[0], to[1]))
                }
            }
        }
        s
    }
}

impl Region for ConvexRegion2D {
    fn dim(&self) -> usize {
        2
    }

    fn margin(&self, x: &[f64]) -> f64 {
        self.rho - self.gauge([x[0] - self.center[0], x[1] - self.center[1]])
    }

    fn boundary_points(&self, n: usize) -> Vec<Vec<f64>> {
        let len_of = |e: &BoundaryElement| match e {
            BoundaryElement::Arc { r, a0, a1 } => r * (a1 - a0),
            BoundaryElement::Segment { from, to } => (to[0] - from[0]).hypot(to[1] - from[1]),
        };
        let perim: f64 = self.boundary.iter().map(len_of).sum();
        let mut out = Vec::with_capacity(n + self.boundary.len());
        for e in &self.boundary {
            let steps = ((n as f64 * len_of(e) / perim).ceil() as usize).max(1);
            for s in 0..steps {
                let u = s as f64 / steps as f64;
                out.push(match e {
                    BoundaryElement::Arc { r, a0, a1 } => {
                        let d = dir2(a0 + u * (a1 - a0));
                        vec![self.center[0] + r * d[0], self.center[1] + r * d[1]]
                    }
                    BoundaryElement::Segment { from, to } => {
                        vec![from[0] + u * (to[0] - from[0]), from[1] + u * (to[1] - from[1])]
                    }
                });
            }
        }
        out
    }

    fn center(&self) -> Vec<f64> {
        self.center.to_vec()
    }

    fn extent(&self) -> f64 {
        self.rho / (self.omega.theta / 2.0).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::preset;

    #[test]
    fn segment_has_two_vertical_marks() {
        let seg = preset("segment").unwrap();
        let om = build_omega_2d(&seg, None).unwrap();
        assert_eq!(om.marks().len(), 2);
        assert!((om.marks()[0] - PI / 2.0).abs() < 1e-15);
        assert!((om.marks()[1] - 1.5 * PI).abs() < 1e-15);
        assert!((om.theta() - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn square_marks_and_theta() {
        let sq = preset("square").unwrap();
        let om = build_omega_2d(&sq, None).unwrap();
        assert_eq!(om.marks().len(), 8);
        assert!((om.min_gap() - PI / 4.0).abs() < 1e-12);
        assert!((om.theta().to_degrees() - 15.0).abs() < 1e-9);
        assert!(matches!(
            build_omega_2d(&sq, Some(PI / 8.0)),
            Err(Error::Interference { .. })
        ));
        assert!(build_omega_2d(&sq, Some(PI / 8.0 - 1e-6)).is_ok());
    }

    #[test]
    fn antipodal_symmetry() {
        for name in ["square", "triangle", "pentagon", "segment"] {
            let om = build_omega_2d(&preset(name).unwrap(), None).unwrap();
            for &a in om.marks() {
                assert!(om.marks().iter().any(|&b| angle_dist(a + PI, b) < 1e-9), "{name}");
            }
        }
    }

    #[test]
    fn empty_omega_is_disc() {
        let om = Omega2D::new(vec![], None).unwrap();
        let q = build_q_infinity(&om, 2.0).unwrap();
        assert!(q.contains(&[2.0, 0.0], 1e-12) && !q.contains(&[1.5, 1.5], 0.0));
        assert_eq!(q.export(), format!("arc 0 0 2 0 {}\n", TAU));
    }

    #[test]
    fn notch_geometry() {
        // one antipodal pair of marks: check the tangent points and corners directly
        let th = 0.3;
        let om = Omega2D::new(vec![0.0, PI], Some(th)).unwrap();
        let q = build_q_infinity(&om, 1.0).unwrap();
        // the segment tangent at the mark is the line x = 1 between the two corners
        let corner_y = (th / 2.0).tan();
        assert!(q.margin(&[1.0, corner_y]).abs() < 1e-12);
        assert!(q.margin(&[1.0, 0.0]).abs() < 1e-12);
        assert!(q.margin(&[1.0 + 1e-9, 0.0]) < 0.0);
        // endpoint tangent point is on the circle
        assert!(q.margin(&[(th).cos(), (th).sin()]).abs() < 1e-12);
        // the unit disc lies inside, touching only at retained directions
        assert!((q.margin(&[(th / 2.0).cos(), (th / 2.0).sin()]) - (1.0 - (th / 2.0).cos())).abs() < 1e-12);
        let total: f64 = q.turning_angles().iter().sum();
        assert!((total - TAU).abs() < 1e-12);
        for e in q.boundary() {
            if let BoundaryElement::Segment { from, to } = e {
                for p in [from, to] {
                    assert!(q.margin(&p[..]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn boundary_points_have_zero_margin() {
        let om = build_omega_2d(&preset("pentagon").unwrap(), None).unwrap();
        let q = build_q_infinity(&om, 3.0).unwrap();
        for x in q.boundary_points(2000) {
            assert!(q.margin(&x).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn shared_square_and_rotated_square() {
        let sq = preset("square").unwrap();
        let rot = Polytope::new(vec![
            vec![0.5, 0.5 - 0.5f64.sqrt()],
            vec![0.5 + 0.5f64.sqrt(), 0.5],
            vec![0.5, 0.5 + 0.5f64.sqrt()],
            vec![0.5 - 0.5f64.sqrt(), 0.5],
        ])
        .unwrap();
        let om = shared_omega(&[sq.clone(), rot], None).unwrap();
        assert_eq!(om.marks().len(), 8);
        let single = shared_omega(std::slice::from_ref(&sq), None).unwrap();
        assert_eq!(single, build_omega_2d(&sq, None).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn scaling_is_exact(x in -50.0f64..50.0, y in -50.0f64..50.0, rho in 0.5f64..40.0) {
                let om = build_omega_2d(&preset("triangle").unwrap(), None).unwrap();
                let big = build_q_infinity(&om, rho).unwrap();
                let unit = build_q_infinity(&om, 1.0).unwrap();
                prop_assert_eq!(big.contains_scaled(&[x, y]), unit.gauge([x / rho, y / rho]) <= 1.0);
            }

            #[test]
            fn gauge_is_max_over_retained(a in 0.0f64..TAU, r in 0.1f64..5.0) {
                // brute-force max of y·ω over a fine sampling of Ω plus the marks and arc ends
                let om = build_omega_2d(&preset("square").unwrap(), None).unwrap();
                let q = build_q_infinity(&om, 1.0).unwrap();
                let y = [r * a.cos(), r * a.sin()];
                let mut best = f64::NEG_INFINITY;
                let mut dirs: Vec<f64> = (0..20_000).map(|k| TAU * k as f64 / 20_000.0)
                    .filter(|&w| om.distance_to_retained(w) == 0.0).collect();
                for &c in om.marks() {
                    dirs.extend([c, c - om.theta(), c + om.theta()]);
                }
                for w in dirs {
                    best = best.max(y[0] * w.cos() + y[1] * w.sin());
                }
                prop_assert!((q.gauge(y) - best).abs() <= 1e-6 * r);
                prop_assert!(q.gauge(y) >= best - 1e-12);
            }
        }
    }
}
