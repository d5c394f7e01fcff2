//! A polytope in R^3 for which no outward translation of its faces is
//! invariant: the unit cube cut by two parallel planes of normal `(1,1,-1)`.
//!
//! With `s = x + y - z`, the slab `c1 <= s <= 1 - c1` meets the cube in an
//! octahedral solid (six cube faces, two hexagons) with vertices
//! `a..f` on `s = c1` and `g..l` on `s = 1 - c1`.

use rayon::prelude::*;
use serde::Serialize;

use super::halfspace::{enumerate_vertices, exact_invariance, HalfspaceRegion};
use super::{Region, Verdict};
use crate::error::{Error, Result};
use crate::polytope::{HalfSpace, Polytope, VertexId};

/// Vertex labels in index order.
pub const LABELS: [char; 12] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l'];

pub const A: VertexId = VertexId(0);
pub const B: VertexId = VertexId(1);
pub const C: VertexId = VertexId(2);
pub const D: VertexId = VertexId(3);
pub const G: VertexId = VertexId(6);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Octahedron {
    /// Offset of the lower cutting plane; the upper one is at `1 - cut`.
    pub cut: f64,
}

impl Default for Octahedron {
    fn default() -> Self {
        Self { cut: 0.25 }
    }
}

impl Octahedron {
    pub fn new(cut: f64) -> Result<Self> {
        if !(cut > 0.0 && cut < 0.5) {
            return Err(Error::InvalidArgument(format!("cut {cut} must lie in (0, 0.5)")));
        }
        Ok(Self { cut })
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let (c1, c2) = (self.cut, 1.0 - self.cut);
        vec![
            vec![c1, 0.0, 0.0],
            vec![1.0, 0.0, 1.0 - c1],
            vec![1.0, c1, 1.0],
            vec![c1, 1.0, 1.0],
            vec![0.0, 1.0, 1.0 - c1],
            vec![0.0, c1, 0.0],
            vec![c2, 1.0, 1.0],
            vec![1.0, c2, 1.0],
            vec![1.0, 0.0, 1.0 - c2],
            vec![c2, 0.0, 0.0],
            vec![0.0, c2, 0.0],
            vec![0.0, 1.0, 1.0 - c2],
        ]
    }

    /// Six cube faces followed by the two hexagons, all with unit normals.
    pub fn faces(&self) -> Vec<HalfSpace> {
        let s3 = 3f64.sqrt();
        let mut f = Vec::with_capacity(8);
        for k in 0..3 {
            let mut e = vec![0.0; 3];
            e[k] = 1.0;
            f.push(HalfSpace::new(e.clone(), 1.0));
            e[k] = -1.0;
            f.push(HalfSpace::new(e, 0.0));
        }
        f.push(HalfSpace::new(
            vec![1.0 / s3, 1.0 / s3, -1.0 / s3],
            (1.0 - self.cut) / s3,
        ));
        f.push(HalfSpace::new(vec![-1.0 / s3, -1.0 / s3, 1.0 / s3], -self.cut / s3));
        f
    }

    pub fn polytope(&self) -> Polytope {
        Polytope::with_facets(self.vertices(), self.faces()).expect("valid reconstruction")
    }

    /// Faces moved outward: cube faces by `side_shift`, hexagons by `hex_shift`.
    pub fn translated_region(&self, hex_shift: f64, side_shift: f64) -> Result<HalfspaceRegion> {
        if !(hex_shift >= 0.0 && side_shift >= 0.0) {
            return Err(Error::InvalidArgument("face translations must be non-negative".into()));
        }
        let faces = self
            .faces()
            .into_iter()
            .enumerate()
            .map(|(k, h)| {
                let t = if k < 6 { side_shift } else { hex_shift };
                HalfSpace::new(h.normal, h.offset + t)
            })
            .collect();
        HalfspaceRegion::new(faces)
    }
}

/// Largest excess over `region` of `x + u - v_i` for `x` in `closure(R_{v_i}) ∩ region`,
/// with the maximizing `x`.
pub fn cell_overshoot(region: &HalfspaceRegion, p: &Polytope, i: VertexId, u: VertexId) -> Result<(f64, Vec<f64>)> {
    let mut hs = region.constraints().to_vec();
    hs.extend(p.voronoi_halfspaces(i)?.iter().map(HalfSpace::normalized));
    let shift: Vec<f64> = p.vertex(u).iter().zip(p.vertex(i)).map(|(a, b)| a - b).collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for x in enumerate_vertices(&hs, 3) {
        let y: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let e = region.excess(&y);
        if e > best.0 {
            best = (e, x);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub hex_shift: f64,
    pub side_shift: f64,
    /// Worst excess of `x + d - g` over the closed cell of `g`; positive means failure (a).
    pub overshoot_a: f64,
    /// Worst excess of `x + b - c` over the closed cell of `c`; positive means failure (b).
    pub overshoot_b: f64,
    pub failure_a: bool,
    pub failure_b: bool,
    /// The midpoint of `dc` lies in the region and `m + d - g` leaves it.
    pub midpoint_fails: bool,
    /// The point `(1,0,1)` lies in the region and `(1,0,1) + b - c` leaves it.
    pub corner_fails: bool,
    /// Minimum margin of the full exact check over all cells and inputs.
    pub exact_margin: f64,
}

impl CounterexampleRow {
    pub fn passes(&self) -> bool {
        !self.failure_a && !self.failure_b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub cut: f64,
    pub rows: Vec<CounterexampleRow>,
    /// Grid points with neither failure.
    pub passing: usize,
    /// Grid points that pass the full exact check.
    pub invariant: usize,
}

/// Evaluates one pair of face translations.
pub fn evaluate(oct: &Octahedron, hex_shift: f64, side_shift: f64) -> Result<CounterexampleRow> {
    let p = oct.polytope();
    let q = oct.translated_region(hex_shift, side_shift)?;
    let tol = 1e-9;
    let (oa, _) = cell_overshoot(&q, &p, G, D)?;
    let (ob, _) = cell_overshoot(&q, &p, C, B)?;
    let shift = |x: &[f64], u: VertexId, v: VertexId| -> Vec<f64> {
        x.iter()
            .zip(p.vertex(u))
            .zip(p.vertex(v))
            .map(|((a, b), c)| a + b - c)
            .collect()
    };
    let m: Vec<f64> = p
        .vertex(D)
        .iter()
        .zip(p.vertex(C))
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let corner = [1.0, 0.0, 1.0];
    let midpoint_fails = q.margin(&m) >= 0.0 && q.margin(&shift(&m, D, G)) < -tol;
    let corner_fails = q.margin(&corner) >= 0.0 && q.margin(&shift(&corner, B, C)) < -tol;
    let exact: Verdict = exact_invariance(&q, &p)?;
    Ok(CounterexampleRow {
        hex_shift,
        side_shift,
        overshoot_a: oa,
        overshoot_b: ob,
        failure_a: oa > tol,
        failure_b: ob > tol,
        midpoint_fails,
        corner_fails,
        exact_margin: exact.margin,
    })
}

/// Sweeps every `(hex_shift, side_shift)` pair of the two grids.
pub fn counterexample_3d(oct: &Octahedron, hex_shifts: &[f64], side_shifts: &[f64]) -> Result<CounterexampleReport> {
    let pairs: Vec<(f64, f64)> = hex_shifts
        .iter()
        .flat_map(|&h| side_shifts.iter().map(move |&s| (h, s)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(h, s)| evaluate(oct, h, s))
        .collect::<Result<Vec<_>>>()?;
    let passing = rows.iter().filter(|r| r.passes()).count();
    let invariant = rows
        .iter()
        .filter(|r| r.exact_margin >= -super::pass_tolerance(3.0))
        .count();
    Ok(CounterexampleReport {
        cut: oct.cut,
        rows,
        passing,
        invariant,
    })
}
