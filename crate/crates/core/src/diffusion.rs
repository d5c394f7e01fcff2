//! Halftoning by simple and general error diffusion on rasters, neighborhood
//! weight schemes, and the local cumulative error `E(R)` over pixel windows.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::WEIGHT_SUM_TOL;
use crate::error::{check_dim, Error, Result};
use crate::linalg::norm;
use crate::netpbm::Image;
use crate::polytope::{Polytope, VertexId, TRISTIMULUS};

/// `height x width` grid of `channels`-dimensional samples, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidArgument("raster with zero channels".into()));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a {height}x{width}x{channels} raster",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite raster sample".into()));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, value: &[f64]) -> Self {
        let data = value
            .iter()
            .copied()
            .cycle()
            .take(width * height * value.len())
            .collect();
        Self {
            width,
            height,
            channels: value.len(),
            data,
        }
    }

    /// Independent uniform samples of `p` at every pixel.
    pub fn random(width: usize, height: usize, p: &Polytope, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = p.dim();
        let mut data = vec![0.0; width * height * dim];
        for px in data.chunks_exact_mut(dim) {
            p.sample_into(&mut rng, px);
        }
        Self {
            width,
            height,
            channels: dim,
            data,
        }
    }

    /// Grayscale values drawn uniformly from `[0, 1]`.
    pub fn random_gray(width: usize, height: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..width * height).map(|_| rng.random::<f64>()).collect();
        Self {
            width,
            height,
            channels: 1,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &[f64] {
        let i = (row * self.width + col) * self.channels;
        &self.data[i..i + self.channels]
    }

    #[inline]
    fn get_mut(&mut self, row: usize, col: usize) -> &mut [f64] {
        let i = (row * self.width + col) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Mean sample over all pixels.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.channels];
        for px in self.data.chunks_exact(self.channels) {
            for (a, b) in m.iter_mut().zip(px) {
                *a += b;
            }
        }
        let n = (self.width * self.height).max(1) as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Largest per-pixel Euclidean norm over rows `rows`.
    pub fn max_norm_rows(&self, rows: std::ops::Range<usize>) -> f64 {
        let lo = rows.start * self.width * self.channels;
        let hi = rows.end * self.width * self.channels;
        self.data[lo..hi]
            .chunks_exact(self.channels)
            .map(norm)
            .fold(0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.max_norm_rows(0..self.height)
    }
}

/// Vertex chosen at each pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputRaster {
    width: usize,
    height: usize,
    ids: Vec<VertexId>,
}

impl OutputRaster {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> VertexId {
        self.ids[row * self.width + col]
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    /// Mean output vertex.
    pub fn mean(&self, p: &Polytope) -> Vec<f64> {
        let mut m = vec![0.0; p.dim()];
        for id in &self.ids {
            for (a, b) in m.iter_mut().zip(p.vertex(*id)) {
                *a += b;
            }
        }
        let n = self.ids.len().max(1) as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Fraction of pixels whose output is `id`.
    pub fn density(&self, id: VertexId) -> f64 {
        self.ids.iter().filter(|&&v| v == id).count() as f64 / self.ids.len().max(1) as f64
    }
}

/// One neighborhood tap: the pixel `row_offset` rows above and `col_offset`
/// columns to the right of the current one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tap {
    pub row_offset: usize,
    pub col_offset: isize,
    pub weight: f64,
}

impl Tap {
    /// Distance back in the lexicographic pixel order for an image `width` wide.
    pub fn linear_lag(&self, width: usize) -> isize {
        self.row_offset as isize * width as isize - self.col_offset
    }
}

/// Weights over already-processed neighbors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodScheme {
    name: String,
    taps: Vec<Tap>,
}

/// Offsets of the twelve labelled neighborhood positions `p1..p12`:
/// `p1, p2` to the left in the current row, `p3..p7` in the row above from
/// right to left, `p8..p12` two rows above from right to left.
pub const TABLE_OFFSETS: [(usize, isize); 12] = [
    (0, -1),
    (0, -2),
    (1, 2),
    (1, 1),
    (1, 0),
    (1, -1),
    (1, -2),
    (2, 2),
    (2, 1),
    (2, 0),
    (2, -1),
    (2, -2),
];

impl NeighborhoodScheme {
    pub fn new(name: impl Into<String>, taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidScheme("no taps".into()));
        }
        for (i, t) in taps.iter().enumerate() {
            if t.row_offset == 0 && t.col_offset >= 0 {
                return Err(Error::InvalidScheme(format!(
                    "tap ({}, {}) does not precede the current pixel",
                    t.row_offset, t.col_offset
                )));
            }
            if !t.weight.is_finite() || t.weight < 0.0 {
                return Err(Error::InvalidScheme(format!("negative weight {}", t.weight)));
            }
            if taps[..i]
                .iter()
                .any(|u| (u.row_offset, u.col_offset) == (t.row_offset, t.col_offset))
            {
                return Err(Error::InvalidScheme(format!(
                    "duplicate tap ({}, {})",
                    t.row_offset, t.col_offset
                )));
            }
        }
        let s: f64 = taps.iter().map(|t| t.weight).sum();
        if (s - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidScheme(format!("weights sum to {s}, not 1")));
        }
        Ok(Self {
            name: name.into(),
            taps,
        })
    }

    /// Scheme from weights on the labelled positions `p1..p12`; zero weights are dropped.
    pub fn from_table(name: impl Into<String>, weights: [f64; 12]) -> Result<Self> {
        let taps = TABLE_OFFSETS
            .iter()
            .zip(weights)
            .filter(|(_, w)| *w != 0.0)
            .map(|(&(r, c), w)| Tap {
                row_offset: r,
                col_offset: c,
                weight: w,
            })
            .collect();
        Self::new(name, taps)
    }

    /// Only the previous pixel in the row, weight 1.
    pub fn simple() -> Self {
        Self::from_table("simple", [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap()
    }

    /// Left 7/16, above 5/16, above-left 4/16.
    pub fn fs3() -> Self {
        let mut w = [0.0; 12];
        w[0] = 7.0 / 16.0;
        w[4] = 5.0 / 16.0;
        w[5] = 4.0 / 16.0;
        Self::from_table("fs3", w).unwrap()
    }

    /// All twelve positions at 1/12.
    pub fn uniform12() -> Self {
        Self::from_table("uniform12", [1.0 / 12.0; 12]).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    /// Parses lines `row_offset col_offset weight` with `#` comments.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut taps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse {
                path: origin.to_path_buf(),
                line: lineno + 1,
                msg,
            };
            let f: Vec<&str> = body.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(format!("expected 3 fields, got {}", f.len())));
            }
            let row_offset = f[0]
                .parse::<usize>()
                .map_err(|e| bad(format!("row offset `{}`: {e}", f[0])))?;
            let col_offset = f[1]
                .parse::<isize>()
                .map_err(|e| bad(format!("column offset `{}`: {e}", f[1])))?;
            let weight = f[2]
                .parse::<f64>()
                .map_err(|e| bad(format!("weight `{}`: {e}", f[2])))?;
            taps.push(Tap {
                row_offset,
                col_offset,
                weight,
            });
        }
        let name = origin
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "file".into());
        Self::new(name, taps)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        self.taps
            .iter()
            .map(|t| format!("{} {} {}\n", t.row_offset, t.col_offset, t.weight))
            .collect()
    }
}

impl FromStr for NeighborhoodScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Self::simple()),
            "fs3" => Ok(Self::fs3()),
            "uniform12" => Ok(Self::uniform12()),
            other => Err(Error::InvalidScheme(format!("unknown scheme `{other}`"))),
        }
    }
}

impl fmt::Display for NeighborhoodScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Output vertices and the per-pixel error field.
#[derive(Debug, Clone, PartialEq)]
pub struct Halftone {
    pub output: OutputRaster,
    pub errors: Raster,
}

/// Simple error diffusion: the error of each pixel is carried to the next in
/// row-major order, across line breaks, starting from zero.
pub fn halftone_simple(img: &Raster, p: &Polytope) -> Result<Halftone> {
    check_dim(p.dim(), img.channels)?;
    let dim = p.dim();
    let mut errors = Raster::constant(img.width, img.height, &vec![0.0; dim]);
    let mut ids = Vec::with_capacity(img.width * img.height);
    let mut eps = vec![0.0; dim];
    let mut x = vec![0.0; dim];
    for i in 0..img.height {
        for j in 0..img.width {
            for ((xc, e), g) in x.iter_mut().zip(&eps).zip(img.get(i, j)) {
                *xc = e + g;
            }
            let id = p.nearest_unchecked(&x);
            for ((e, xc), v) in eps.iter_mut().zip(&x).zip(p.vertex(id)) {
                *e = xc - v;
            }
            errors.get_mut(i, j).copy_from_slice(&eps);
            ids.push(id);
        }
    }
    Ok(Halftone {
        output: OutputRaster {
            width: img.width,
            height: img.height,
            ids,
        },
        errors,
    })
}

/// General error diffusion: each pixel quantizes its input plus the
/// scheme-weighted errors of already-processed neighbors.
///
/// Taps that fall outside the image are dropped and the remaining weights are
/// rescaled to sum to one. If no tap lands inside, the previous pixel's error
/// in row-major order is carried instead (zero at the first pixel).
pub fn halftone_general(img: &Raster, p: &Polytope, scheme: &NeighborhoodScheme) -> Result<Halftone> {
    check_dim(p.dim(), img.channels)?;
    let dim = p.dim();
    let (h, w) = (img.height, img.width);
    let mut errors = Raster::constant(w, h, &vec![0.0; dim]);
    let mut ids = Vec::with_capacity(w * h);
    let mut x = vec![0.0; dim];
    let mut live: Vec<(usize, usize, f64)> = Vec::with_capacity(scheme.taps.len());
    for i in 0..h {
        for j in 0..w {
            live.clear();
            let mut mass = 0.0;
            for t in &scheme.taps {
                let c = j as isize + t.col_offset;
                if t.row_offset <= i && c >= 0 && (c as usize) < w && t.weight > 0.0 {
                    live.push((i - t.row_offset, c as usize, t.weight));
                    mass += t.weight;
                }
            }
            x.copy_from_slice(img.get(i, j));
            if mass > 0.0 {
                for &(r, c, wt) in &live {
                    let s = wt / mass;
                    for (xc, e) in x.iter_mut().zip(errors.get(r, c)) {
                        *xc += s * e;
                    }
                }
            } else if i > 0 || j > 0 {
                let (r, c) = if j > 0 { (i, j - 1) } else { (i - 1, w - 1) };
                for (xc, e) in x.iter_mut().zip(errors.get(r, c)) {
                    *xc += e;
                }
            }
            let id = p.nearest_unchecked(&x);
            let out = errors.get_mut(i, j);
            for ((o, xc), v) in out.iter_mut().zip(&x).zip(p.vertex(id)) {
                *o = xc - v;
            }
            ids.push(id);
        }
    }
    Ok(Halftone {
        output: OutputRaster {
            width: w,
            height: h,
            ids,
        },
        errors,
    })
}

/// Dispatches to [`halftone_simple`] for the single-tap scheme.
pub fn halftone(img: &Raster, p: &Polytope, scheme: &NeighborhoodScheme) -> Result<Halftone> {
    if scheme.taps == NeighborhoodScheme::simple().taps {
        halftone_simple(img, p)
    } else {
        halftone_general(img, p, scheme)
    }
}

fn check_window(img: &Raster, out: &OutputRaster, top: (usize, usize), n: usize) -> Result<()> {
    if (img.width, img.height) != (out.width, out.height) {
        return Err(Error::InvalidArgument(
            "input and output rasters differ in shape".into(),
        ));
    }
    if n == 0 || top.0 + n > img.height || top.1 + n > img.width {
        return Err(Error::WindowOutOfBounds {
            row: top.0,
            col: top.1,
            size: n,
            height: img.height,
            width: img.width,
        });
    }
    Ok(())
}

/// `E(R) = sum over the n x n window at `top` of (input - output vertex)`.
pub fn local_error(img: &Raster, out: &OutputRaster, p: &Polytope, top: (usize, usize), n: usize) -> Result<Vec<f64>> {
    check_dim(p.dim(), img.channels)?;
    check_window(img, out, top, n)?;
    let mut s = vec![0.0; p.dim()];
    for i in top.0..top.0 + n {
        for j in top.1..top.1 + n {
            let v = p.vertex(out.get(i, j));
            for ((a, g), b) in s.iter_mut().zip(img.get(i, j)).zip(v) {
                *a += g - b;
            }
        }
    }
    Ok(s)
}

/// Summed-area table of the residual `input - output vertex`.
struct ResidualTable {
    w1: usize,
    dim: usize,
    s: Vec<f64>,
}

impl ResidualTable {
    fn new(img: &Raster, out: &OutputRaster, p: &Polytope) -> Self {
        let (h, w, dim) = (img.height, img.width, p.dim());
        let w1 = w + 1;
        let mut s = vec![0.0; (h + 1) * w1 * dim];
        for i in 0..h {
            for j in 0..w {
                let v = p.vertex(out.get(i, j));
                let g = img.get(i, j);
                for c in 0..dim {
                    let at = |r: usize, q: usize| (r * w1 + q) * dim + c;
                    s[at(i + 1, j + 1)] = (g[c] - v[c]) + s[at(i, j + 1)] + s[at(i + 1, j)] - s[at(i, j)];
                }
            }
        }
        Self { w1, dim, s }
    }

    fn window_norm(&self, top: (usize, usize), n: usize) -> f64 {
        let (r0, c0, r1, c1) = (top.0, top.1, top.0 + n, top.1 + n);
        let mut sq = 0.0;
        for c in 0..self.dim {
            let at = |r: usize, q: usize| self.s[(r * self.w1 + q) * self.dim + c];
            let e = at(r1, c1) - at(r0, c1) - at(r1, c0) + at(r0, c0);
            sq += e * e;
        }
        sq.sqrt()
    }
}

/// Result of a window-size sweep of `max ||E(R)||`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub scheme: String,
    pub anchors_per_size: usize,
    /// `(n, max ||E(R)||)` per window size.
    pub points: Vec<(usize, f64)>,
    /// Least-squares slope of `log max ||E||` against `log n`; `None` when degenerate.
    pub slope: Option<f64>,
    /// Standard error of the slope (needs at least 3 sizes).
    pub slope_stderr: Option<f64>,
    /// Some maximum is zero to within roundoff, so the log-log fit is undefined.
    pub degenerate: bool,
}

/// Halftones `img` and measures `max ||E(R)||` over an `anchors x anchors`
/// grid of window positions for each size.
pub fn scaling_experiment(
    img: &Raster,
    p: &Polytope,
    scheme: &NeighborhoodScheme,
    sizes: &[usize],
    anchors: usize,
) -> Result<ScalingReport> {
    let ht = halftone(img, p, scheme)?;
    scaling_from_output(img, &ht.output, p, scheme.name(), sizes, anchors)
}

/// [`scaling_experiment`] on an existing output.
pub fn scaling_from_output(
    img: &Raster,
    out: &OutputRaster,
    p: &Polytope,
    label: &str,
    sizes: &[usize],
    anchors: usize,
) -> Result<ScalingReport> {
    if sizes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 window sizes, got {}",
            sizes.len()
        )));
    }
    if anchors == 0 {
        return Err(Error::InvalidArgument("need at least one anchor".into()));
    }
    check_dim(p.dim(), img.channels)?;
    for &n in sizes {
        check_window(img, out, (0, 0), n)?;
    }
    let table = ResidualTable::new(img, out, p);
    let place = |span: usize, a: usize| {
        if anchors == 1 {
            span / 2
        } else {
            a * span / (anchors - 1)
        }
    };
    let mut points = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let (sr, sc) = (img.height - n, img.width - n);
        let mut best = 0.0_f64;
        for a in 0..anchors {
            for b in 0..anchors {
                best = best.max(table.window_norm((place(sr, a), place(sc, b)), n));
            }
        }
        points.push((n, best));
    }
    let scale = p.diameter();
    let degenerate = points.iter().any(|&(n, e)| e <= 1e-9 * scale * n as f64);
    let (slope, slope_stderr) = if degenerate {
        (None, None)
    } else {
        let xy: Vec<(f64, f64)> = points.iter().map(|&(n, e)| ((n as f64).ln(), e.ln())).collect();
        let (b, se) = ols_slope(&xy);
        (Some(b), se)
    };
    Ok(ScalingReport {
        scheme: label.to_string(),
        anchors_per_size: anchors * anchors,
        points,
        slope,
        slope_stderr,
        degenerate,
    })
}

/// Ordinary least-squares slope and its standard error.
pub fn ols_slope(xy: &[(f64, f64)]) -> (f64, Option<f64>) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let se = (xy.len() > 2).then(|| {
        let ssr: f64 = xy.iter().map(|p| (p.1 - my - b * (p.0 - mx)).powi(2)).sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    });
    (b, se)
}

/// How 8-bit samples map to polytope coordinates and back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMap {
    /// `value / maxval` per channel in, `coordinate * 255` (clamped) out.
    Unit,
    /// RGB cube corners mapped onto the eight printer colors by trilinear
    /// interpolation in; each color rendered as its RGB corner out.
    Tristimulus,
}

/// RGB corner of each tristimulus color, in preset order K R G B C M Y W.
const TRISTIMULUS_RGB: [[u8; 3]; 8] = [
    [0, 0, 0],
    [255, 0, 0],
    [0, 255, 0],
    [0, 0, 255],
    [0, 255, 255],
    [255, 0, 255],
    [255, 255, 0],
    [255, 255, 255],
];

impl ColorMap {
    pub fn to_raster(self, img: &Image) -> Result<Raster> {
        let m = img.maxval as f64;
        match self {
            ColorMap::Unit => Raster::new(
                img.width,
                img.height,
                img.channels,
                img.data.iter().map(|&b| b as f64 / m).collect(),
            ),
            ColorMap::Tristimulus => {
                if img.channels != 3 {
                    return Err(Error::DimensionMismatch {
                        expected: 3,
                        found: img.channels,
                    });
                }
                let mut data = Vec::with_capacity(img.data.len());
                for px in img.data.chunks_exact(3) {
                    let rgb = [px[0] as f64 / m, px[1] as f64 / m, px[2] as f64 / m];
                    let mut acc = [0.0; 3];
                    for (corner, (_, color)) in TRISTIMULUS_RGB.iter().zip(TRISTIMULUS.iter()) {
                        let mut wt = 1.0;
                        for c in 0..3 {
                            wt *= if corner[c] > 0 { rgb[c] } else { 1.0 - rgb[c] };
                        }
                        for c in 0..3 {
                            acc[c] += wt * color[c];
                        }
                    }
                    data.extend_from_slice(&acc);
                }
                Raster::new(img.width, img.height, 3, data)
            }
        }
    }

    pub fn render(self, out: &OutputRaster, p: &Polytope) -> Result<Image> {
        let mut data = Vec::with_capacity(out.ids.len() * 3);
        let channels = match self {
            ColorMap::Unit => {
                if p.dim() != 1 && p.dim() != 3 {
                    return Err(Error::InvalidArgument(format!(
                        "cannot render a {}-dimensional polytope as an image",
                        p.dim()
                    )));
                }
                for id in &out.ids {
                    data.extend(
                        p.vertex(*id)
                            .iter()
                            .map(|c| (c * 255.0).round().clamp(0.0, 255.0) as u8),
                    );
                }
                p.dim()
            }
            ColorMap::Tristimulus => {
                check_dim(TRISTIMULUS_RGB.len(), p.len())?;
                for id in &out.ids {
                    data.extend_from_slice(&TRISTIMULUS_RGB[id.0]);
                }
                3
            }
        };
        Image::new(out.width, out.height, channels, data)
    }
}
