//! Regions cut out by finitely many half-spaces, the outward-translated
//! polygons `Q_t`, and the exact cell-by-cell invariance check.

use serde::Serialize;

use super::{check_points, pass_tolerance, Region, Verdict};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, solve};
use crate::polytope::{polygon_facets, HalfSpace, Polytope};

/// `{x : n_j · x <= d_j for all j}` with unit normals, bounded, with nonempty interior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfspaceRegion {
    dim: usize,
    constraints: Vec<HalfSpace>,
    /// Extreme points; counter-clockwise in the plane.
    vertices: Vec<Vec<f64>>,
    center: Vec<f64>,
    extent: f64,
}

impl HalfspaceRegion {
    /// Normalizes the constraints and enumerates vertices (dimensions 2 and 3).
    pub fn new(constraints: Vec<HalfSpace>) -> Result<Self> {
        let dim = constraints
            .first()
            .map(|h| h.normal.len())
            .ok_or(Error::Empty("constraint list"))?;
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "half-space regions are supported in dimensions 2 and 3, not {dim}"
            )));
        }
        for h in &constraints {
            check_dim(dim, h.normal.len())?;
        }
        let constraints: Vec<HalfSpace> = constraints.iter().map(HalfSpace::normalized).collect();
        let mut vertices = enumerate_vertices(&constraints, dim);
        if vertices.len() <= dim {
            return Err(Error::Degenerate("region has empty interior or is unbounded".into()));
        }
        if dim == 2 && !normals_surround(&constraints) {
            return Err(Error::Degenerate("2-D region is unbounded".into()));
        }
        let mut center = vec![0.0; dim];
        for v in &vertices {
            for (c, x) in center.iter_mut().zip(v) {
                *c += x / vertices.len() as f64;
            }
        }
        let inner = constraints
            .iter()
            .map(|h| -h.excess(&center))
            .fold(f64::INFINITY, f64::min);
        let extent = vertices.iter().map(|v| dist(v, &center)).fold(0.0, f64::max);
        if inner <= 1e-12 * (1.0 + extent) {
            return Err(Error::Degenerate("region has empty interior".into()));
        }
        if dim == 2 {
            vertices.sort_by(|a, b| {
                let ta = (a[1] - center[1]).atan2(a[0] - center[0]);
                let tb = (b[1] - center[1]).atan2(b[0] - center[0]);
                ta.total_cmp(&tb)
            });
        }
        Ok(Self {
            dim,
            constraints,
            vertices,
            center,
            extent,
        })
    }

    pub fn constraints(&self) -> &[HalfSpace] {
        &self.constraints
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Largest constraint excess at `x` (non-positive inside).
    pub fn excess(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|h| h.excess(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Plain-text boundary: one `seg x0 y0 x1 y1` line per edge.
    pub fn export(&self) -> Result<String> {
        check_dim(2, self.dim)?;
        let n = self.vertices.len();
        let mut s = String::new();
        for k in 0..n {
            let (a, b) = (&self.vertices[k], &self.vertices[(k + 1) % n]);
            s.push_str(&format!("seg {} {} {} {}\n", a[0], a[1], b[0], b[1]));
        }
        Ok(s)
    }
}

fn normals_surround(hs: &[HalfSpace]) -> bool {
    let mut ang: Vec<f64> = hs.iter().map(|h| h.normal[1].atan2(h.normal[0])).collect();
    ang.sort_by(f64::total_cmp);
    let n = ang.len();
    (0..n).all(|k| {
        let next = if k + 1 == n {
            ang[0] + std::f64::consts::TAU
        } else {
            ang[k + 1]
        };
        next - ang[k] < std::f64::consts::PI - 1e-12
    })
}

impl Region for HalfspaceRegion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn margin(&self, x: &[f64]) -> f64 {
        -self.excess(x)
    }

    fn boundary_points(&self, n: usize) -> Vec<Vec<f64>> {
        if self.dim != 2 {
            return self.vertices.clone();
        }
        let m = self.vertices.len();
        let perim: f64 = (0..m)
            .map(|k| dist(&self.vertices[k], &self.vertices[(k + 1) % m]))
            .sum();
        let mut out = Vec::with_capacity(n + m);
        for k in 0..m {
            let (a, b) = (&self.vertices[k], &self.vertices[(k + 1) % m]);
            let steps = ((n as f64 * dist(a, b) / perim).ceil() as usize).max(1);
            for s in 0..steps {
                let u = s as f64 / steps as f64;
                out.push(vec![a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]);
            }
        }
        out
    }

    fn center(&self) -> Vec<f64> {
        self.center.clone()
    }

    fn extent(&self) -> f64 {
        self.extent
    }
}

/// All points where `dim` constraints are tight and the rest hold, deduplicated.
pub fn enumerate_vertices(hs: &[HalfSpace], dim: usize) -> Vec<Vec<f64>> {
    let scale = hs.iter().map(|h| h.offset.abs()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    let n = hs.len();
    if n < dim {
        return out;
    }
    let mut m = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    loop {
        for (r, &i) in idx.iter().enumerate() {
            m[r * dim..(r + 1) * dim].copy_from_slice(&hs[i].normal);
            rhs[r] = hs[i].offset;
        }
        if let Some(x) = solve(&m, &rhs, dim) {
            if hs.iter().all(|h| h.excess(&x) <= tol) && !out.iter().any(|y| dist(y, &x) <= tol) {
                out.push(x);
            }
        }
        // next combination in lexicographic order
        let mut k = dim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < n - dim + k {
                break;
            }
        }
        idx[k] += 1;
        for r in k + 1..dim {
            idx[r] = idx[r - 1] + 1;
        }
    }
}

/// The polygon with every edge line of `P` moved outward by `t`.
pub fn polygon_region(p: &Polytope, t: f64) -> Result<HalfspaceRegion> {
    check_dim(2, p.dim())?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("translation {t} must be non-negative")));
    }
    let facets = polygon_facets(p)?;
    HalfspaceRegion::new(
        facets
            .into_iter()
            .map(|h| HalfSpace::new(h.normal, h.offset + t))
            .collect(),
    )
}

/// Exact invariance check: for every cell, enumerate the vertices of
/// `closure(R_v) ∩ Q` and test their images under every polytope vertex.
pub fn exact_invariance(region: &HalfspaceRegion, p: &Polytope) -> Result<Verdict> {
    check_dim(p.dim(), region.dim)?;
    let mut points = Vec::new();
    for i in p.vertex_ids() {
        let mut hs = region.constraints.clone();
        hs.extend(p.voronoi_halfspaces(i)?.iter().map(HalfSpace::normalized));
        points.extend(enumerate_vertices(&hs, region.dim));
    }
    let gammas = p.to_vertex_list();
    let mut v = check_points(region, p, &points, &gammas, "exact");
    v.pass = v.margin >= -pass_tolerance(region.extent);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::polytope::preset;
    use crate::regions::{verify_invariance, VerifyConfig};

    fn dot_margin(h: &HalfSpace, x: &[f64]) -> f64 {
        h.offset - dot(&h.normal, x)
    }

    #[test]
    fn square_t1_is_enlarged_square() {
        let sq = preset("square").unwrap();
        let q = polygon_region(&sq, 1.0).unwrap();
        let mut vs: Vec<(i64, i64)> = q
            .vertices()
            .iter()
            .map(|v| (v[0].round() as i64, v[1].round() as i64))
            .collect();
        vs.sort();
        assert_eq!(vs, vec![(-1, -1), (-1, 2), (2, -1), (2, 2)]);
        for v in q.vertices() {
            assert!(v.iter().all(|c| (c - c.round()).abs() < 1e-12));
        }
    }

    #[test]
    fn triangle_t0_is_itself() {
        let tri = preset("triangle").unwrap();
        let q = polygon_region(&tri, 0.0).unwrap();
        assert_eq!(q.vertices().len(), 3);
        for v in tri.vertices() {
            assert!(q.vertices().iter().any(|w| dist(v, w) < 1e-12));
        }
    }

    #[test]
    fn collinear_is_rejected() {
        let p = Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(polygon_region(&p, 1.0).is_err());
    }

    #[test]
    fn square_threshold_is_one_half() {
        let sq = preset("square").unwrap();
        for (t, ok) in [
            (0.0, false),
            (0.49, false),
            (0.4999, false),
            (0.5, true),
            (0.6, true),
            (10.0, true),
        ] {
            let q = polygon_region(&sq, t).unwrap();
            let e = exact_invariance(&q, &sq).unwrap();
            assert_eq!(e.pass, ok, "exact at t = {t}: {e:?}");
            let s = verify_invariance(&q, &sq, &VerifyConfig::default()).unwrap();
            assert_eq!(s.pass, ok, "sampled at t = {t}: {s:?}");
        }
    }

    #[test]
    fn square_t0_witness_is_real() {
        let sq = preset("square").unwrap();
        let q = polygon_region(&sq, 0.0).unwrap();
        let v = verify_invariance(&q, &sq, &VerifyConfig::default()).unwrap();
        let w = v.witness.unwrap();
        assert!(w.direct && w.margin < 0.0);
        let img = crate::dynamics::phi(&sq, &w.gamma, &w.x).unwrap();
        assert_eq!(img, w.image);
        assert!(q.margin(&w.x) >= 0.0 && q.margin(&img) < 0.0);
    }

    #[test]
    fn nesting() {
        let p = preset("pentagon").unwrap();
        let small = polygon_region(&p, 0.2).unwrap();
        let big = polygon_region(&p, 0.7).unwrap();
        for x in small.boundary_points(500) {
            assert!(big.margin(&x) >= 0.5 - 1e-12);
        }
        for h in small.constraints() {
            assert!(dot_margin(h, &small.center()) > 0.0);
        }
    }

    #[test]
    fn enumerate_unit_cube() {
        let cube = preset("cube(3)").unwrap();
        let vs = enumerate_vertices(cube.facets().unwrap(), 3);
        assert_eq!(vs.len(), 8);
    }

    #[test]
    fn unbounded_is_rejected() {
        let hs = [
            HalfSpace::new(vec![1.0, 0.0], 1.0),
            HalfSpace::new(vec![0.0, 1.0], 1.0),
            HalfSpace::new(vec![-1.0, -1.0], 1.0),
            HalfSpace::new(vec![1.0, 1.0], 3.0),
        ];
        assert!(HalfspaceRegion::new(hs[..3].to_vec()).is_ok());
        let open = vec![HalfSpace::new(vec![1.0, 0.0], 1.0), HalfSpace::new(vec![0.0, 1.0], 1.0)];
        assert!(HalfspaceRegion::new(open).is_err());
    }
}
