//! Constant-input dynamics on `[0, 1]` (rotations and Sturmian words) and
//! the predator-prey pursuit driven by the greedy recursion.

use std::io::Write;

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, norm};
use crate::polytope::{Polytope, Preset};

/// `(sqrt(5) - 1) / 2`.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;
/// `sqrt(2) - 1`.
pub const SILVER: f64 = 0.414_213_562_373_095_1;

fn unit_interval() -> Polytope {
    Preset::Interval.build().expect("interval preset")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BitSequence {
    pub bits: Vec<u8>,
}

impl BitSequence {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_ascii(&self) -> String {
        self.bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }
}

/// Output bits `v(x(k))` of `x(k+1) = x(k) + gamma - v(x(k))` on `[0, 1]`
/// from `x(0) = x0`. With `strict`, `gamma` outside `[0, 1]` is rejected.
pub fn sturmian(gamma: f64, x0: f64, n: usize, strict: bool) -> Result<BitSequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one bit".into()));
    }
    if strict && !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutsidePolytope { point: vec![gamma] });
    }
    let p = unit_interval();
    let mut x = x0;
    let mut bits = Vec::with_capacity(n);
    for _ in 0..n {
        let v = p.nearest_unchecked(&[x]).0 as u8;
        bits.push(v);
        x = x + gamma - v as f64;
    }
    Ok(BitSequence { bits })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SturmianStats {
    pub n: usize,
    pub ones: usize,
    pub frequency: f64,
    /// Largest spread in the number of ones between windows of equal length.
    pub balance_defect: usize,
    /// Window length attaining the defect.
    pub worst_length: usize,
}

/// Frequency of ones and the balance defect over all window lengths `1..=l_max`.
pub fn sturmian_stats(seq: &BitSequence, l_max: usize) -> Result<SturmianStats> {
    let n = seq.len();
    if n == 0 {
        return Err(Error::Empty("bit sequence"));
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0usize);
    for &b in &seq.bits {
        prefix.push(prefix.last().unwrap() + b as usize);
    }
    let mut defect = 0;
    let mut worst = 0;
    for l in 1..=l_max.min(n) {
        let (mut lo, mut hi) = (usize::MAX, 0);
        for i in 0..=n - l {
            let c = prefix[i + l] - prefix[i];
            lo = lo.min(c);
            hi = hi.max(c);
        }
        if hi - lo > defect {
            defect = hi - lo;
            worst = l;
        }
    }
    Ok(SturmianStats {
        n,
        ones: prefix[n],
        frequency: prefix[n] as f64 / n as f64,
        balance_defect: defect,
        worst_length: worst,
    })
}

/// `[gamma - 1/2, gamma + 1/2]`.
pub fn absorbing_interval(gamma: f64) -> (f64, f64) {
    (gamma - 0.5, gamma + 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryRecord {
    pub x0: f64,
    /// First `k` with `x(k)` in the interval, if reached.
    pub entry: Option<usize>,
    /// Some later iterate left the interval.
    pub left: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorbingReport {
    pub gamma: f64,
    pub interval: (f64, f64),
    pub records: Vec<EntryRecord>,
    pub pass: bool,
}

/// For each start, iterates until `x(k)` lies in `[gamma - 1/2, gamma + 1/2]`
/// (at most `max_entry` steps), then `horizon` more steps checking it stays.
pub fn absorbing_interval_check(gamma: f64, x0s: &[f64], max_entry: usize, horizon: usize) -> Result<AbsorbingReport> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutsidePolytope { point: vec![gamma] });
    }
    let p = unit_interval();
    let (lo, hi) = absorbing_interval(gamma);
    // the interval ends are images under the same roundings as the orbit
    let tol = 1e-12;
    let inside = |x: f64| x >= lo - tol && x <= hi + tol;
    let step = |x: f64| x + gamma - p.nearest_unchecked(&[x]).0 as f64;
    let records: Vec<EntryRecord> = x0s
        .iter()
        .map(|&x0| {
            let mut x = x0;
            let mut k = 0;
            while !inside(x) && k < max_entry {
                x = step(x);
                k += 1;
            }
            if !inside(x) {
                return EntryRecord {
                    x0,
                    entry: None,
                    left: false,
                };
            }
            let mut left = false;
            for _ in 0..horizon {
                x = step(x);
                if !inside(x) {
                    left = true;
                    break;
                }
            }
            EntryRecord {
                x0,
                entry: Some(k),
                left,
            }
        })
        .collect();
    let pass = records.iter().all(|r| r.entry.is_some() && !r.left);
    Ok(AbsorbingReport {
        gamma,
        interval: (lo, hi),
        records,
        pass,
    })
}

/// Positions and diagnostics of a pursuit run; index `0` is `n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PursuitTrace {
    pub dim: usize,
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    /// `||q(n) - p(n)||`.
    pub distance: Vec<f64>,
    /// `||eps(n)||` from the greedy recursion.
    pub eps_norm: Vec<f64>,
    /// Largest `|n (q(n) - p(n+1)) - eps(n)|` over the run.
    pub max_position_residual: f64,
    /// Largest defect of `eps(n+1) = eps(n) + gamma(n+1) - V(n+2)` with both
    /// errors taken from the positions.
    pub max_identity_residual: f64,
}

impl PursuitTrace {
    pub fn steps(&self) -> usize {
        self.distance.len()
    }

    /// CSV with columns `n, p_0.., q_0.., distance, eps_norm`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["n".to_string()];
        header.extend((0..self.dim).map(|i| format!("p_{i}")));
        header.extend((0..self.dim).map(|i| format!("q_{i}")));
        header.push("distance".into());
        header.push("eps_norm".into());
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.steps() {
            write!(w, "{}", k + 1)?;
            for v in self.p[k].iter().chain(&self.q[k]) {
                write!(w, ",{v}")?;
            }
            writeln!(w, ",{},{}", self.distance[k], self.eps_norm[k])?;
        }
        Ok(())
    }
}

/// The pursuit game
///
/// `p(n+1) = p(n) + (V(n+1) - p(n))/n`, `q(n+1) = q(n) + (gamma(n+1) - q(n))/(n+1)`
///
/// from `p(1) = p0`, `q(1) = q0`, with `V(n+1) = v(eps(n-1) + gamma(n))`,
/// `eps(0) = 0`. Then `eps(n) = n (q(n) - p(n+1))`, which forces
/// `gamma(1) = q0`; `gamma_at(n, out)` supplies `gamma(n)` for `n >= 2`.
pub fn pursuit<G>(p: &Polytope, p0: &[f64], q0: &[f64], n_steps: usize, mut gamma_at: G) -> Result<PursuitTrace>
where
    G: FnMut(usize, &mut [f64]),
{
    let dim = p.dim();
    check_dim(dim, p0.len())?;
    check_dim(dim, q0.len())?;
    if n_steps == 0 {
        return Err(Error::InvalidArgument("pursuit needs at least one step".into()));
    }
    let mut pp = p0.to_vec();
    let mut qq = q0.to_vec();
    let mut eps = vec![0.0; dim];
    let mut gamma = q0.to_vec();
    let mut x = vec![0.0; dim];
    let mut out = PursuitTrace {
        dim,
        p: Vec::with_capacity(n_steps),
        q: Vec::with_capacity(n_steps),
        distance: Vec::with_capacity(n_steps),
        eps_norm: Vec::with_capacity(n_steps),
        max_position_residual: 0.0,
        max_identity_residual: 0.0,
    };
    let mut prev_pos_eps: Option<Vec<f64>> = None;
    let mut next_gamma = vec![0.0; dim];
    for n in 1..=n_steps {
        // gamma holds gamma(n), eps holds eps(n-1), pp = p(n), qq = q(n)
        out.p.push(pp.clone());
        out.q.push(qq.clone());
        out.distance.push(dist(&qq, &pp));
        for i in 0..dim {
            x[i] = eps[i] + gamma[i];
        }
        let id = p.nearest_unchecked(&x);
        let v = p.vertex(id);
        for i in 0..dim {
            eps[i] = x[i] - v[i];
        }
        out.eps_norm.push(norm(&eps));
        let nf = n as f64;
        let p_next: Vec<f64> = pp.iter().zip(v).map(|(a, b)| a + (b - a) / nf).collect();
        let pos_eps: Vec<f64> = qq.iter().zip(&p_next).map(|(a, b)| nf * (a - b)).collect();
        let r = pos_eps.iter().zip(&eps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        out.max_position_residual = out.max_position_residual.max(r);
        if let Some(prev) = &prev_pos_eps {
            // pos_eps(n) = pos_eps(n-1) + gamma(n) - V(n+1)
            let r = (0..dim)
                .map(|i| (pos_eps[i] - (prev[i] + gamma[i] - v[i])).abs())
                .fold(0.0, f64::max);
            out.max_identity_residual = out.max_identity_residual.max(r);
        }
        prev_pos_eps = Some(pos_eps);
        gamma_at(n + 1, &mut next_gamma);
        qq = qq
            .iter()
            .zip(&next_gamma)
            .map(|(a, g)| a + (g - a) / (nf + 1.0))
            .collect();
        pp = p_next;
        gamma.copy_from_slice(&next_gamma);
    }
    Ok(out)
}
