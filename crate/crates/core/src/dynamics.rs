//! The map `phi_gamma(x) = x + gamma - v(x)`, the greedy error recursion in
//! its simple and weighted forms, orbits, and discrepancy statistics.

use std::io::Write;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::norm;
use crate::polytope::{Polytope, VertexId};

/// Tolerance on the sum of a [`WeightVector`].
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// `x + gamma - v(x)`.
pub fn phi(p: &Polytope, gamma: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_dim(p.dim(), gamma.len())?;
    let v = p.vertex(p.nearest_vertex(x)?);
    Ok(x.iter().zip(gamma).zip(v).map(|((a, g), b)| a + g - b).collect())
}

/// One greedy step: the vertex nearest to `eps + gamma` and the new error.
pub fn greedy_step(p: &Polytope, eps: &[f64], gamma: &[f64]) -> Result<(Vec<f64>, VertexId)> {
    check_dim(p.dim(), eps.len())?;
    check_dim(p.dim(), gamma.len())?;
    let x: Vec<f64> = eps.iter().zip(gamma).map(|(e, g)| e + g).collect();
    Ok(quantize(p, x))
}

fn quantize(p: &Polytope, mut x: Vec<f64>) -> (Vec<f64>, VertexId) {
    let id = p.nearest_unchecked(&x);
    for (xi, vi) in x.iter_mut().zip(p.vertex(id)) {
        *xi -= vi;
    }
    (x, id)
}

/// Fails when `gamma` lies outside `p` by more than `tol`, as judged by the
/// facet representation. Polytopes without known facets always pass.
pub fn ensure_member(p: &Polytope, gamma: &[f64], tol: f64) -> Result<()> {
    check_dim(p.dim(), gamma.len())?;
    match p.contains(gamma, tol) {
        Some(false) => Err(Error::OutsidePolytope { point: gamma.to_vec() }),
        _ => Ok(()),
    }
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidWeights(format!("weight {bad} is negative or not finite")));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {s}, not 1")));
        }
        Ok(Self(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Weighted step: quantizes the modified input `sum_i w_i history[i] + gamma`,
/// where `history[0]` is the most recent error.
pub fn general_step(
    p: &Polytope,
    history: &[Vec<f64>],
    weights: &WeightVector,
    gamma: &[f64],
) -> Result<(Vec<f64>, VertexId)> {
    if history.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for a history of depth {}",
            weights.len(),
            history.len()
        )));
    }
    check_dim(p.dim(), gamma.len())?;
    let mut x = gamma.to_vec();
    for (h, w) in history.iter().zip(weights.as_slice()) {
        check_dim(p.dim(), h.len())?;
        for (xi, hi) in x.iter_mut().zip(h) {
            *xi += w * hi;
        }
    }
    Ok(quantize(p, x))
}

/// Ring buffer of the last `m` error vectors, initially zero.
#[derive(Debug, Clone)]
pub struct ErrorHistory {
    dim: usize,
    depth: usize,
    buf: Vec<f64>,
    head: usize,
}

impl ErrorHistory {
    pub fn new(dim: usize, depth: usize) -> Self {
        Self {
            dim,
            depth,
            buf: vec![0.0; dim * depth.max(1)],
            head: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The `i`-th most recent error (`i = 0` is the newest).
    pub fn get(&self, i: usize) -> &[f64] {
        debug_assert!(i < self.depth);
        let slot = (self.head + self.depth - 1 - i) % self.depth;
        &self.buf[slot * self.dim..(slot + 1) * self.dim]
    }

    pub fn push(&mut self, eps: &[f64]) {
        let slot = self.head;
        self.buf[slot * self.dim..(slot + 1) * self.dim].copy_from_slice(eps);
        self.head = (self.head + 1) % self.depth;
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        (0..self.depth).map(|i| self.get(i).to_vec()).collect()
    }
}

/// A recorded orbit: inputs, points `x(k)`, chosen vertices and errors.
///
/// `x(k) = gamma(k) + eps(k-1)` with `eps(-1)` stored separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    dim: usize,
    eps_init: Vec<f64>,
    gammas: Vec<f64>,
    xs: Vec<f64>,
    vids: Vec<VertexId>,
    epss: Vec<f64>,
}

impl Trace {
    fn with_capacity(dim: usize, eps_init: Vec<f64>, n: usize) -> Self {
        Self {
            dim,
            eps_init,
            gammas: Vec::with_capacity(n * dim),
            xs: Vec::with_capacity(n * dim),
            vids: Vec::with_capacity(n),
            epss: Vec::with_capacity(n * dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vids.is_empty()
    }

    pub fn gamma(&self, k: usize) -> &[f64] {
        &self.gammas[k * self.dim..(k + 1) * self.dim]
    }

    pub fn x(&self, k: usize) -> &[f64] {
        &self.xs[k * self.dim..(k + 1) * self.dim]
    }

    pub fn vid(&self, k: usize) -> VertexId {
        self.vids[k]
    }

    pub fn vids(&self) -> &[VertexId] {
        &self.vids
    }

    pub fn eps(&self, k: usize) -> &[f64] {
        &self.epss[k * self.dim..(k + 1) * self.dim]
    }

    /// `eps(-1)`.
    pub fn eps_init(&self) -> &[f64] {
        &self.eps_init
    }

    /// `eps(k - 1)`, falling back to `eps(-1)` at `k = 0`.
    pub fn eps_before(&self, k: usize) -> &[f64] {
        if k == 0 {
            &self.eps_init
        } else {
            self.eps(k - 1)
        }
    }

    fn push(&mut self, gamma: &[f64], x: &[f64], id: VertexId, eps: &[f64]) {
        self.gammas.extend_from_slice(gamma);
        self.xs.extend_from_slice(x);
        self.vids.push(id);
        self.epss.extend_from_slice(eps);
    }

    /// CSV with columns `k, gamma_0.., vid, eps_0.., eps_norm`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["k".to_string()];
        header.extend((0..self.dim).map(|i| format!("gamma_{i}")));
        header.push("vid".into());
        header.extend((0..self.dim).map(|i| format!("eps_{i}")));
        header.push("eps_norm".into());
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            write!(w, "{k}")?;
            for g in self.gamma(k) {
                write!(w, ",{g}")?;
            }
            write!(w, ",{}", self.vid(k))?;
            for e in self.eps(k) {
                write!(w, ",{e}")?;
            }
            writeln!(w, ",{}", norm(self.eps(k)))?;
        }
        Ok(())
    }
}

/// Orbit of `x(k+1) = phi_{gamma(k+1)}(x(k))` from `x(0) = x0`.
///
/// The trace has one entry per input; `eps(-1) = x0 - gamma(0)`.
pub fn run_orbit(p: &Polytope, gammas: &[Vec<f64>], x0: &[f64]) -> Result<Trace> {
    check_dim(p.dim(), x0.len())?;
    let Some(g0) = gammas.first() else {
        return Ok(Trace::with_capacity(p.dim(), vec![0.0; p.dim()], 0));
    };
    check_dim(p.dim(), g0.len())?;
    let eps_init: Vec<f64> = x0.iter().zip(g0).map(|(x, g)| x - g).collect();
    run_errors(p, gammas.len(), &eps_init, |k, out| {
        check_dim(p.dim(), gammas[k].len())?;
        out.copy_from_slice(&gammas[k]);
        Ok(())
    })
}

/// Greedy recursion from a given `eps(-1)`, drawing each input from `gamma_at`.
pub fn run_errors<F>(p: &Polytope, n: usize, eps_init: &[f64], mut gamma_at: F) -> Result<Trace>
where
    F: FnMut(usize, &mut [f64]) -> Result<()>,
{
    let dim = p.dim();
    check_dim(dim, eps_init.len())?;
    let mut trace = Trace::with_capacity(dim, eps_init.to_vec(), n);
    let mut eps = eps_init.to_vec();
    let mut gamma = vec![0.0; dim];
    let mut x = vec![0.0; dim];
    for k in 0..n {
        gamma_at(k, &mut gamma)?;
        for i in 0..dim {
            x[i] = gamma[i] + eps[i];
        }
        let id = p.nearest_unchecked(&x);
        for (i, v) in p.vertex(id).iter().enumerate() {
            eps[i] = x[i] - v;
        }
        trace.push(&gamma, &x, id, &eps);
    }
    Ok(trace)
}

/// Weighted recursion on a sequence: at step `k` the modified input is
/// `sum_i w_i eps(k-1-i) + gamma(k)` with the weights supplied per step.
/// The history starts at zero. `x(k)` in the trace is the modified input.
pub fn run_general<F, W>(p: &Polytope, n: usize, depth: usize, mut gamma_at: F, mut weights_at: W) -> Result<Trace>
where
    F: FnMut(usize, &mut [f64]) -> Result<()>,
    W: FnMut(usize) -> WeightVector,
{
    let dim = p.dim();
    let mut trace = Trace::with_capacity(dim, vec![0.0; dim], n);
    let mut hist = ErrorHistory::new(dim, depth);
    let mut gamma = vec![0.0; dim];
    let mut x = vec![0.0; dim];
    for k in 0..n {
        gamma_at(k, &mut gamma)?;
        let w = weights_at(k);
        if w.len() != depth {
            return Err(Error::InvalidWeights(format!(
                "step {k}: {} weights for depth {depth}",
                w.len()
            )));
        }
        x.copy_from_slice(&gamma);
        for (i, wi) in w.as_slice().iter().enumerate() {
            for (xj, hj) in x.iter_mut().zip(hist.get(i)) {
                *xj += wi * hj;
            }
        }
        let id = p.nearest_unchecked(&x);
        let eps: Vec<f64> = x.iter().zip(p.vertex(id)).map(|(a, b)| a - b).collect();
        trace.push(&gamma, &x, id, &eps);
        hist.push(&eps);
    }
    Ok(trace)
}

/// Deterministic stream of uniform random points of a polytope.
#[derive(Debug, Clone)]
pub struct RandomGammas<'a> {
    p: &'a Polytope,
    rng: ChaCha8Rng,
}

impl<'a> RandomGammas<'a> {
    pub fn new(p: &'a Polytope, seed: u64) -> Self {
        Self {
            p,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        self.p.sample_into(&mut self.rng, out);
    }

    pub fn take_vecs(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.p.sample(&mut self.rng)).collect()
    }
}

/// Greedy orbit on `n` seeded random inputs with `eps(-1) = 0`.
pub fn random_orbit(p: &Polytope, n: usize, seed: u64) -> Result<Trace> {
    let mut g = RandomGammas::new(p, seed);
    run_errors(p, n, &vec![0.0; p.dim()], |_, out| {
        g.fill(out);
        Ok(())
    })
}

/// `|| (1/n) sum_{k<n} gamma(k) - (1/n) sum_{k<n} v(x(k)) ||`, summed directly.
pub fn average_gap(p: &Polytope, trace: &Trace, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("average over zero steps".into()));
    }
    if n > trace.len() {
        return Err(Error::InvalidArgument(format!(
            "average over {n} steps of a {}-step trace",
            trace.len()
        )));
    }
    let mut s = vec![0.0; trace.dim()];
    for k in 0..n {
        let v = p.vertex(trace.vid(k));
        for (si, (g, vi)) in s.iter_mut().zip(trace.gamma(k).iter().zip(v)) {
            *si += g - vi;
        }
    }
    Ok(norm(&s) / n as f64)
}

/// Largest `||eps(k)||` over the whole trace.
pub fn sup_error(trace: &Trace) -> Result<f64> {
    sup_error_range(trace, 0..trace.len())
}

/// Largest `||eps(k)||` for `k` in `range`.
pub fn sup_error_range(trace: &Trace, range: Range<usize>) -> Result<f64> {
    if range.is_empty() || range.end > trace.len() {
        return Err(Error::Empty("error range"));
    }
    Ok(range.map(|k| norm(trace.eps(k))).fold(0.0, f64::max))
}
