//! Polytopes as ordered vertex lists, nearest-vertex (Voronoi) queries with
//! smallest-index tie breaking, and the preset polytopes used throughout.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist_sq, dot, norm_sq};

/// Relative tolerance on squared distances below which two vertices are tied.
pub const TIE_REL_TOL: f64 = 1e-12;

/// Index of a vertex in its owning [`Polytope`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The closed half-space `{x : normal · x <= offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// Signed excess `normal · x - offset`; non-positive inside.
    #[inline]
    pub fn excess(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.excess(x) <= tol
    }

    /// Same half-space with a unit normal.
    pub fn normalized(&self) -> Self {
        let n = norm_sq(&self.normal).sqrt();
        Self {
            normal: self.normal.iter().map(|v| v / n).collect(),
            offset: self.offset / n,
        }
    }
}

/// A polytope given by its vertices, in a fixed construction order.
///
/// The order matters: ties in [`Polytope::nearest_vertex`] resolve to the
/// smallest index. Vertices are trusted to be extreme points; see
/// [`Polytope::uncertified_vertices`] for an optional check.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    coords: Vec<f64>,
    facets: Option<Vec<HalfSpace>>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let mut p = Self::from_vertices(vertices)?;
        p.facets = match p.dim {
            1 => Some(interval_facets(&p)),
            2 => polygon_facets(&p).ok(),
            _ => None,
        };
        Ok(p)
    }

    fn from_vertices(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidPolytope(format!(
                "need at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        let dim = vertices[0].len();
        if dim == 0 {
            return Err(Error::InvalidPolytope("zero-dimensional vertices".into()));
        }
        let mut coords = Vec::with_capacity(dim * vertices.len());
        for v in &vertices {
            check_dim(dim, v.len())?;
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidPolytope(format!("non-finite vertex {v:?}")));
            }
            coords.extend_from_slice(v);
        }
        for i in 0..vertices.len() {
            for j in 0..i {
                if vertices[i] == vertices[j] {
                    return Err(Error::InvalidPolytope(format!("vertices {j} and {i} coincide")));
                }
            }
        }
        Ok(Self {
            dim,
            coords,
            facets: None,
        })
    }

    pub(crate) fn with_facets(vertices: Vec<Vec<f64>>, facets: Vec<HalfSpace>) -> Result<Self> {
        let mut p = Self::from_vertices(vertices)?;
        p.facets = Some(facets);
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn vertex(&self, id: VertexId) -> &[f64] {
        &self.coords[id.0 * self.dim..(id.0 + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.len()).map(VertexId)
    }

    pub fn to_vertex_list(&self) -> Vec<Vec<f64>> {
        self.vertices().map(<[f64]>::to_vec).collect()
    }

    /// Facet half-spaces, when known (1-D, convex 2-D, and most presets).
    pub fn facets(&self) -> Option<&[HalfSpace]> {
        self.facets.as_deref()
    }

    pub fn check_index(&self, id: VertexId) -> Result<()> {
        if id.0 < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: id.0,
                len: self.len(),
            })
        }
    }

    /// Closest vertex in Euclidean distance; exact ties go to the smallest index.
    pub fn nearest_vertex(&self, x: &[f64]) -> Result<VertexId> {
        check_dim(self.dim, x.len())?;
        Ok(self.nearest_unchecked(x))
    }

    /// [`Polytope::nearest_vertex`] without the dimension check.
    #[inline]
    pub fn nearest_unchecked(&self, x: &[f64]) -> VertexId {
        let mut dmin = f64::INFINITY;
        let mut dmax = 0.0_f64;
        for v in self.vertices() {
            let d = dist_sq(x, v);
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        let cut = dmin + TIE_REL_TOL * (1.0 + dmax);
        for (i, v) in self.vertices().enumerate() {
            if dist_sq(x, v) <= cut {
                return VertexId(i);
            }
        }
        unreachable!("non-finite query point {x:?}")
    }

    /// All vertices whose squared distance to `x` is within
    /// `rel_tol * (1 + max squared distance)` of the minimum, i.e. every cell
    /// whose closure contains `x` up to that tolerance.
    pub fn closure_cells(&self, x: &[f64], rel_tol: f64) -> Vec<VertexId> {
        let d: Vec<f64> = self.vertices().map(|v| dist_sq(x, v)).collect();
        let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
        let dmax = d.iter().copied().fold(0.0, f64::max);
        let cut = dmin + rel_tol * (1.0 + dmax);
        d.iter()
            .enumerate()
            .filter(|(_, &di)| di <= cut)
            .map(|(i, _)| VertexId(i))
            .collect()
    }

    /// Half-spaces whose intersection is the Voronoi region of vertex `i`:
    /// for each `j != i`, `(v_j - v_i) · x <= (|v_j|^2 - |v_i|^2) / 2`.
    pub fn voronoi_halfspaces(&self, i: VertexId) -> Result<Vec<HalfSpace>> {
        self.check_index(i)?;
        let vi = self.vertex(i);
        Ok(self
            .vertex_ids()
            .filter(|&j| j != i)
            .map(|j| {
                let vj = self.vertex(j);
                let normal = vj.iter().zip(vi).map(|(a, b)| a - b).collect();
                HalfSpace::new(normal, 0.5 * (norm_sq(vj) - norm_sq(vi)))
            })
            .collect())
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0_f64;
        let vs: Vec<&[f64]> = self.vertices().collect();
        for i in 0..vs.len() {
            for j in 0..i {
                best = best.max(dist_sq(vs[i], vs[j]));
            }
        }
        best.sqrt()
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in self.vertices() {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi;
            }
        }
        let m = self.len() as f64;
        c.iter_mut().for_each(|ci| *ci /= m);
        c
    }

    /// Polytope shifted by `c`.
    pub fn translated(&self, c: &[f64]) -> Result<Self> {
        check_dim(self.dim, c.len())?;
        let verts = self
            .vertices()
            .map(|v| v.iter().zip(c).map(|(a, b)| a + b).collect())
            .collect();
        let facets = self.facets.as_ref().map(|fs| {
            fs.iter()
                .map(|h| HalfSpace::new(h.normal.clone(), h.offset + dot(&h.normal, c)))
                .collect()
        });
        let mut p = Self::from_vertices(verts)?;
        p.facets = facets;
        Ok(p)
    }

    /// Homothetic copy shrunk toward the centroid: `c + (1 - margin)(v - c)`.
    pub fn shrunk(&self, margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "shrink margin {margin} must lie in (0, 1)"
            )));
        }
        let c = self.centroid();
        let s = 1.0 - margin;
        let verts = self
            .vertices()
            .map(|v| v.iter().zip(&c).map(|(a, ci)| ci + s * (a - ci)).collect())
            .collect();
        let facets = self.facets.as_ref().map(|fs| {
            fs.iter()
                .map(|h| {
                    let hc = dot(&h.normal, &c);
                    HalfSpace::new(h.normal.clone(), hc + s * (h.offset - hc))
                })
                .collect()
        });
        let mut p = Self::from_vertices(verts)?;
        p.facets = facets;
        Ok(p)
    }

    /// Membership through the facet representation; `None` when no facets are known.
    pub fn contains(&self, x: &[f64], tol: f64) -> Option<bool> {
        self.facets.as_ref().map(|fs| fs.iter().all(|h| h.contains(x, tol)))
    }

    /// Uniform random point of the polytope as a Dirichlet(1, ..., 1)
    /// combination of its vertices.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(rng, &mut out);
        out
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut total = 0.0;
        for v in self.vertices() {
            let w: f64 = rng.sample(Exp1);
            total += w;
            for (o, vi) in out.iter_mut().zip(v) {
                *o += w * vi;
            }
        }
        out.iter_mut().for_each(|o| *o /= total);
    }

    /// Vertices for which no separating direction was found among
    /// `directions` random trials: an empty result certifies every vertex as
    /// extreme. A non-empty result is inconclusive, not a proof of redundancy.
    pub fn uncertified_vertices<R: Rng + ?Sized>(&self, directions: usize, rng: &mut R) -> Vec<VertexId> {
        let c = self.centroid();
        self.vertex_ids()
            .filter(|&i| {
                let vi = self.vertex(i);
                let exposes = |u: &[f64]| {
                    let hi = dot(u, vi);
                    self.vertex_ids()
                        .filter(|&j| j != i)
                        .all(|j| dot(u, self.vertex(j)) < hi)
                };
                let radial: Vec<f64> = vi.iter().zip(&c).map(|(a, b)| a - b).collect();
                if exposes(&radial) {
                    return false;
                }
                let mut u = vec![0.0; self.dim];
                for _ in 0..directions {
                    for (k, uk) in u.iter_mut().enumerate() {
                        let g: f64 = rng.random::<f64>() - 0.5;
                        *uk = radial[k] + 4.0 * g;
                    }
                    if exposes(&u) {
                        return false;
                    }
                }
                true
            })
            .collect()
    }

    /// Parses the plain-text vertex format: one vertex per line,
    /// whitespace-separated decimals, `#` starts a comment.
    pub fn parse_literal(text: &str, origin: &Path) -> Result<Self> {
        let mut verts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let v = body
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|e| Error::Parse {
                        path: origin.to_path_buf(),
                        line: lineno + 1,
                        msg: format!("bad coordinate `{tok}`: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            verts.push(v);
        }
        Self::new(verts)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_literal(&text, path)
    }

    /// Writes the plain-text vertex format.
    pub fn to_literal(&self) -> String {
        let mut s = String::new();
        for v in self.vertices() {
            let line: Vec<String> = v.iter().map(|c| c.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Vertices of a 2-D polytope sorted counter-clockwise about the centroid.
    pub fn ccw_order(&self) -> Result<Vec<VertexId>> {
        check_dim(2, self.dim)?;
        let c = self.centroid();
        let mut ids: Vec<VertexId> = self.vertex_ids().collect();
        ids.sort_by(|&a, &b| {
            let va = self.vertex(a);
            let vb = self.vertex(b);
            let ta = (va[1] - c[1]).atan2(va[0] - c[0]);
            let tb = (vb[1] - c[1]).atan2(vb[0] - c[0]);
            ta.total_cmp(&tb)
        });
        Ok(ids)
    }
}

fn interval_facets(p: &Polytope) -> Vec<HalfSpace> {
    let lo = p.vertices().map(|v| v[0]).fold(f64::INFINITY, f64::min);
    let hi = p.vertices().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
    vec![HalfSpace::new(vec![1.0], hi), HalfSpace::new(vec![-1.0], -lo)]
}

/// Outward unit-normal edge half-spaces of a convex polygon, in
/// counter-clockwise edge order. Fails on collinear or non-convex input.
pub(crate) fn polygon_facets(p: &Polytope) -> Result<Vec<HalfSpace>> {
    let order = p.ccw_order()?;
    let m = order.len();
    if m < 3 {
        return Err(Error::Degenerate(format!("a polygon needs 3 vertices, got {m}")));
    }
    let scale = p.diameter();
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let a = p.vertex(order[k]);
        let b = p.vertex(order[(k + 1) % m]);
        let c = p.vertex(order[(k + 2) % m]);
        let turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if turn <= 1e-12 * scale * scale {
            return Err(Error::Degenerate(format!(
                "vertices are collinear or not in convex position near {b:?}"
            )));
        }
        let e = [b[0] - a[0], b[1] - a[1]];
        let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
        let n = vec![e[1] / len, -e[0] / len];
        let d = dot(&n, a);
        out.push(HalfSpace::new(n, d));
    }
    Ok(out)
}

/// Named polytopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `[0, 1]`.
    Interval,
    /// `{0,1}^N` in binary-counter order (bit `k` of the index is coordinate `k`).
    Cube(usize),
    /// Origin followed by the `N` standard basis vectors.
    Simplex(usize),
    /// Eight printer colors K, R, G, B, C, M, Y, W in tristimulus coordinates.
    Tristimulus,
    /// The truncated-cube octahedral polytope with twelve vertices `a..l`.
    Octa3d,
    /// Unit square in counter-clockwise order from the origin.
    Square,
    /// `(0,0), (1,0), (0,1)`.
    Triangle,
    /// `(0,0), (1,0)` in the plane.
    Segment,
    /// Regular `n`-gon on the unit circle, first vertex at angle 0.
    RegularPolygon(usize),
}

/// Tristimulus coordinates of the eight printer colors, in preset order.
pub const TRISTIMULUS: [(&str, [f64; 3]); 8] = [
    ("K", [5.0, 6.0, 6.0]),
    ("R", [30.0, 18.0, 7.0]),
    ("G", [11.0, 22.0, 13.0]),
    ("B", [9.0, 7.0, 20.0]),
    ("C", [21.0, 27.0, 72.0]),
    ("M", [33.0, 18.0, 22.0]),
    ("Y", [65.0, 76.0, 14.0]),
    ("W", [84.0, 87.0, 105.0]),
];

impl Preset {
    pub fn build(self) -> Result<Polytope> {
        match self {
            Preset::Interval => Polytope::new(vec![vec![0.0], vec![1.0]]),
            Preset::Cube(n) => {
                if n == 0 || n > 16 {
                    return Err(Error::InvalidArgument(format!("cube dimension {n} out of range")));
                }
                let verts = (0..1usize << n)
                    .map(|i| (0..n).map(|k| ((i >> k) & 1) as f64).collect())
                    .collect();
                let mut facets = Vec::with_capacity(2 * n);
                for k in 0..n {
                    let mut e = vec![0.0; n];
                    e[k] = 1.0;
                    facets.push(HalfSpace::new(e.clone(), 1.0));
                    e[k] = -1.0;
                    facets.push(HalfSpace::new(e, 0.0));
                }
                Polytope::with_facets(verts, facets)
            }
            Preset::Simplex(n) => {
                if n == 0 {
                    return Err(Error::InvalidArgument("simplex dimension must be positive".into()));
                }
                let mut verts = vec![vec![0.0; n]];
                let mut facets = Vec::with_capacity(n + 1);
                for k in 0..n {
                    let mut e = vec![0.0; n];
                    e[k] = 1.0;
                    verts.push(e.clone());
                    e[k] = -1.0;
                    facets.push(HalfSpace::new(e, 0.0));
                }
                let s = 1.0 / (n as f64).sqrt();
                facets.push(HalfSpace::new(vec![s; n], s));
                Polytope::with_facets(verts, facets)
            }
            Preset::Tristimulus => Polytope::new(TRISTIMULUS.iter().map(|(_, c)| c.to_vec()).collect()),
            Preset::Octa3d => Ok(crate::regions::counterexample::Octahedron::default().polytope()),
            Preset::Square => Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]),
            Preset::Triangle => Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]),
            Preset::Segment => Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]),
            Preset::RegularPolygon(n) => {
                if n < 3 {
                    return Err(Error::InvalidArgument(format!(
                        "a regular polygon needs n >= 3, got {n}"
                    )));
                }
                let verts = (0..n)
                    .map(|k| {
                        let a = std::f64::consts::TAU * k as f64 / n as f64;
                        vec![a.cos(), a.sin()]
                    })
                    .collect();
                Polytope::new(verts)
            }
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let (name, arg) = match t.find(['(', ':']) {
            Some(i) => {
                let rest = t[i + 1..].trim_end_matches(')');
                let n = rest.parse::<usize>().map_err(|_| Error::UnknownPreset(s.to_string()))?;
                (&t[..i], Some(n))
            }
            None => (t.as_str(), None),
        };
        match (name, arg) {
            ("interval", None) => Ok(Preset::Interval),
            ("cube", Some(n)) => Ok(Preset::Cube(n)),
            ("simplex", Some(n)) => Ok(Preset::Simplex(n)),
            ("tristimulus", None) => Ok(Preset::Tristimulus),
            ("octa3d", None) => Ok(Preset::Octa3d),
            ("square", None) => Ok(Preset::Square),
            ("triangle", None) => Ok(Preset::Triangle),
            ("segment", None) => Ok(Preset::Segment),
            ("pentagon", None) => Ok(Preset::RegularPolygon(5)),
            ("hexagon", None) => Ok(Preset::RegularPolygon(6)),
            ("polygon", Some(n)) => Ok(Preset::RegularPolygon(n)),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

/// Builds a named preset polytope.
pub fn preset(name: &str) -> Result<Polytope> {
    name.parse::<Preset>()?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> Polytope {
        Preset::Square.build().unwrap()
    }

    fn brute_nearest(p: &Polytope, x: &[f64]) -> usize {
        // exhaustive scan, first strict minimum wins
        let mut best = 0;
        for i in 1..p.len() {
            if dist_sq(x, p.vertex(VertexId(i))) < dist_sq(x, p.vertex(VertexId(best))) {
                best = i;
            }
        }
        best
    }

    #[test]
    fn nearest_vertex_examples() {
        let sq = unit_square();
        assert_eq!(sq.nearest_vertex(&[0.3, 0.2]).unwrap(), VertexId(0));
        assert_eq!(sq.nearest_vertex(&[0.5, 0.5]).unwrap(), VertexId(0));
        let iv = Preset::Interval.build().unwrap();
        assert_eq!(iv.nearest_vertex(&[0.5]).unwrap(), VertexId(0));
        assert_eq!(iv.nearest_vertex(&[0.5000001]).unwrap(), VertexId(1));
    }

    #[test]
    fn nearest_vertex_dimension_mismatch() {
        let sq = unit_square();
        assert!(matches!(
            sq.nearest_vertex(&[0.1]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn voronoi_halfspaces_interval_and_segment() {
        let iv = Preset::Interval.build().unwrap();
        let hs = iv.voronoi_halfspaces(VertexId(0)).unwrap();
        assert_eq!(hs, vec![HalfSpace::new(vec![1.0], 0.5)]);

        let seg = Polytope::new(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let hs = seg.voronoi_halfspaces(VertexId(0)).unwrap();
        assert_eq!(hs.len(), 1);
        let h = hs[0].normalized();
        assert_eq!(h.normal, vec![1.0, 0.0]);
        assert_eq!(h.offset, 1.0);
        assert!(iv.voronoi_halfspaces(VertexId(2)).is_err());
    }

    #[test]
    fn square_cell_zero_has_two_binding_constraints() {
        // Sample the cell; the diagonal bisector must never be the only violated constraint.
        let sq = unit_square();
        let hs = sq.voronoi_halfspaces(VertexId(0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut redundant = vec![true; hs.len()];
        for _ in 0..20_000 {
            let x = [rng.random_range(-2.0..3.0), rng.random_range(-2.0..3.0)];
            let violated: Vec<usize> = (0..hs.len()).filter(|&k| !hs[k].contains(&x, 0.0)).collect();
            if violated.len() == 1 {
                redundant[violated[0]] = false;
            }
        }
        // order of others: v1=(1,0), v2=(1,1), v3=(0,1)
        assert_eq!(redundant, vec![false, true, false]);
    }

    #[test]
    fn diameters() {
        assert_eq!(Preset::Interval.build().unwrap().diameter(), 1.0);
        assert!((unit_square().diameter() - 2f64.sqrt()).abs() < 1e-15);
        let tri = Preset::Tristimulus.build().unwrap();
        let mut best = 0.0_f64;
        for (_, a) in TRISTIMULUS {
            for (_, b) in TRISTIMULUS {
                best = best.max(dist_sq(&a, &b).sqrt());
            }
        }
        assert_eq!(tri.diameter(), best);
        // K to W
        assert!((best - (79.0f64 * 79.0 + 81.0 * 81.0 + 99.0 * 99.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn presets() {
        let tri = preset("tristimulus").unwrap();
        assert_eq!(tri.vertex(VertexId(4)), &[21.0, 27.0, 72.0]);
        assert_eq!(tri.vertex(VertexId(7)), &[84.0, 87.0, 105.0]);
        let c1 = preset("cube(1)").unwrap();
        assert_eq!(c1.to_vertex_list(), vec![vec![0.0], vec![1.0]]);
        let c2 = preset("cube:2").unwrap();
        assert_eq!(
            c2.to_vertex_list(),
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]
        );
        let s3 = preset("simplex(3)").unwrap();
        assert_eq!(s3.len(), 4);
        assert!(s3.contains(&[0.25, 0.25, 0.25], 0.0).unwrap());
        assert!(!s3.contains(&[0.5, 0.5, 0.25], 0.0).unwrap());
        assert_eq!(preset("octa3d").unwrap().len(), 12);
        assert!(matches!(preset("dodecahedron"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn invalid_polytopes() {
        assert!(Polytope::new(vec![vec![0.0]]).is_err());
        assert!(Polytope::new(vec![vec![0.0], vec![0.0]]).is_err());
        assert!(Polytope::new(vec![vec![0.0], vec![1.0, 2.0]]).is_err());
        assert!(Polytope::new(vec![vec![f64::NAN], vec![1.0]]).is_err());
    }

    #[test]
    fn literal_roundtrip_and_comments() {
        let text = "# square\n0 0\n1 0 # right\n\n1 1\n0 1\n";
        let p = Polytope::parse_literal(text, Path::new("sq.txt")).unwrap();
        assert_eq!(p, unit_square());
        let back = Polytope::parse_literal(&p.to_literal(), Path::new("x")).unwrap();
        assert_eq!(back, p);
        let err = Polytope::parse_literal("0 0\n1 x\n", Path::new("bad.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn polygon_facets_reject_collinear() {
        let p = Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!(p.facets().is_none());
        assert!(polygon_facets(&p).is_err());
    }

    #[test]
    fn extreme_point_certificate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(unit_square().uncertified_vertices(64, &mut rng).is_empty());
        let p = Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.2, 0.2]]).unwrap();
        assert_eq!(p.uncertified_vertices(64, &mut rng), vec![VertexId(3)]);
    }

    #[test]
    fn samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for name in ["interval", "cube(3)", "simplex(3)", "square", "pentagon"] {
            let p = preset(name).unwrap();
            for _ in 0..2000 {
                let x = p.sample(&mut rng);
                assert!(p.contains(&x, 1e-12).unwrap(), "{name}: {x:?}");
            }
        }
    }

    #[test]
    fn agrees_with_brute_force_on_presets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for name in [
            "interval",
            "cube(2)",
            "cube(3)",
            "simplex(2)",
            "simplex(3)",
            "tristimulus",
            "octa3d",
            "pentagon",
        ] {
            let p = preset(name).unwrap();
            let scale = p.diameter();
            let c = p.centroid();
            for _ in 0..10_000 {
                let x: Vec<f64> = c
                    .iter()
                    .map(|ci| ci + scale * (2.0 * rng.random::<f64>() - 1.0))
                    .collect();
                assert_eq!(p.nearest_unchecked(&x).0, brute_nearest(&p, &x), "{name} at {x:?}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pt2() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-3.0f64..4.0, 2)
        }

        proptest! {
            #[test]
            fn nearest_lies_in_its_voronoi_cell(x in pt2()) {
                for p in [unit_square(), preset("pentagon").unwrap(), preset("cube(2)").unwrap()] {
                    let id = p.nearest_vertex(&x).unwrap();
                    for h in p.voronoi_halfspaces(id).unwrap() {
                        prop_assert!(h.excess(&x) <= 1e-9);
                    }
                }
            }

            #[test]
            fn bisector_matches_distance_order(x in pt2()) {
                let p = preset("pentagon").unwrap();
                for i in p.vertex_ids() {
                    for (k, h) in p.voronoi_halfspaces(i).unwrap().iter().enumerate() {
                        let j = if k < i.0 { k } else { k + 1 };
                        let closer = dist_sq(&x, p.vertex(i)) - dist_sq(&x, p.vertex(VertexId(j)));
                        // (v_j - v_i)·x - offset equals half the difference of squared distances
                        prop_assert!((h.excess(&x) - 0.5 * closer).abs() <= 1e-9);
                    }
                }
            }

            #[test]
            fn translation_equivariance(x in pt2(), c in pt2()) {
                let p = preset("pentagon").unwrap();
                let mut d: Vec<f64> = p.vertices().map(|v| dist_sq(&x, v)).collect();
                d.sort_by(f64::total_cmp);
                prop_assume!(d[1] - d[0] > 1e-9);
                let shifted = p.translated(&c).unwrap();
                let xc: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a + b).collect();
                prop_assert_eq!(shifted.nearest_vertex(&xc).unwrap(), p.nearest_vertex(&x).unwrap());
            }
        }
    }
}
