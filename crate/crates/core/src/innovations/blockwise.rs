//! The divergence/convergence dichotomy construction.
//!
//! Given a nonincreasing null sequence `psi`, build block boundaries
//! `n_1 = 1 < n_2 < ...` with `n_{k+1} - n_k > n_{k+1}/2` and
//! `psi_j <= 1/k^2` for `j >= n_k`, and the piecewise-constant
//! coefficients `u_j = 1/n_{k+1}` on `[n_k, n_{k+1})`. By construction
//! `sum u_j` diverges (each completed block contributes more than 1/2)
//! while `sum u_j^2` stays summable, so the induced causal linear
//! innovation sequence has an unbounded spectral density even though the
//! psi-weighted projective sums converge.

use crate::error::{Error, Result};
use crate::num::CompensatedSum;

/// Evaluable nonincreasing null sequences for the construction.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiSequence {
    /// `psi_n = 1 / ln(n + 2)`.
    InverseLog,
    /// `psi_n = n^(-theta)`, `theta > 0`.
    InversePower { theta: f64 },
    /// Identically zero.
    Zero,
    /// Finite table for `n = 1..=len`, zero beyond.
    Table(Vec<f64>),
}

impl PsiSequence {
    /// `psi_n` for `n >= 1`.
    pub fn eval(&self, n: u64) -> f64 {
        match self {
            PsiSequence::InverseLog => 1.0 / ((n + 2) as f64).ln(),
            PsiSequence::InversePower { theta } => (n as f64).powf(-theta),
            PsiSequence::Zero => 0.0,
            PsiSequence::Table(t) => t.get((n - 1) as usize).copied().unwrap_or(0.0),
        }
    }

    fn validate(&self, inspect_to: u64) -> Result<()> {
        match self {
            PsiSequence::InversePower { theta } if !(*theta > 0.0) => {
                return Err(Error::Precondition(format!(
                    "psi power exponent must be positive, got {theta}"
                )));
            }
            PsiSequence::Table(t) => {
                if t.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    return Err(Error::Precondition(
                        "psi table must be finite and nonnegative".into(),
                    ));
                }
            }
            _ => {}
        }
        let mut prev = f64::INFINITY;
        for n in 1..=inspect_to.min(1 << 22) {
            let v = self.eval(n);
            if v > prev + 1e-15 {
                return Err(Error::Precondition(format!(
                    "psi is not nonincreasing at n = {n}: {v} > {prev}"
                )));
            }
            prev = v;
        }
        Ok(())
    }

    /// Smallest `m >= from` with `psi_m <= level` (monotone search).
    fn first_below(&self, level: f64, from: u64) -> Result<u64> {
        const SEARCH_CAP: u64 = 1 << 62;
        if self.eval(from) <= level {
            return Ok(from);
        }
        // Exponential bracket, then bisect.
        let mut lo = from; // psi(lo) > level
        let mut hi = from.max(1);
        loop {
            hi = hi.saturating_mul(2);
            if hi >= SEARCH_CAP {
                return Err(Error::Precondition(format!(
                    "psi never drops below required level {level:.6e}"
                )));
            }
            if self.eval(hi) <= level {
                break;
            }
            lo = hi;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.eval(mid) <= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Materialized construction: block starts, coefficients to a cutoff.
#[derive(Debug, Clone)]
pub struct BlockwiseConstruction {
    psi: PsiSequence,
    /// `n_1, n_2, ..., n_{K+1}` with `n_K <= cutoff < n_{K+1}` (the final
    /// entry overshoots the cutoff so the last partial block has a level).
    block_starts: Vec<u64>,
    /// `u_0..u_cutoff`; `u_0 = 0` (index 0 precedes the first block).
    u: Vec<f64>,
    cutoff: usize,
}

/// Build the construction: `n_1 = 1`,
/// `n_{k+1} = max(2 n_k + 1, first m with psi_j <= 1/(k+1)^2 for all j >= m)`.
pub fn blockwise_divergence_weights(psi: PsiSequence, cutoff: usize) -> Result<BlockwiseConstruction> {
    if cutoff < 2 {
        return Err(Error::Precondition("cutoff must be at least 2".into()));
    }
    if cutoff > 100_000_000 {
        return Err(Error::Precondition(
            "cutoff beyond 1e8 would not fit in memory".into(),
        ));
    }
    psi.validate(cutoff as u64)?;

    let mut starts: Vec<u64> = vec![1];
    loop {
        let k = starts.len() as u64; // next boundary is n_{k+1}
        let n_k = *starts.last().unwrap();
        let level = 1.0 / ((k + 1) * (k + 1)) as f64;
        let m = psi.first_below(level, 1)?;
        let next = (2 * n_k + 1).max(m);
        starts.push(next);
        if next > cutoff as u64 {
            break;
        }
    }

    let mut u = vec![0.0f64; cutoff + 1];
    for w in starts.windows(2) {
        let (start, end) = (w[0], w[1]);
        let value = 1.0 / end as f64;
        for j in start..end.min(cutoff as u64 + 1) {
            u[j as usize] = value;
        }
    }

    let c = BlockwiseConstruction {
        psi,
        block_starts: starts,
        u,
        cutoff,
    };
    c.verify_invariants()?;
    Ok(c)
}

impl BlockwiseConstruction {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn block_starts(&self) -> &[u64] {
        &self.block_starts
    }

    pub fn psi(&self) -> &PsiSequence {
        &self.psi
    }

    /// `u_j` for `j <= cutoff`; zero beyond (callers must account for the
    /// unmaterialized tail through [`Self::tail_sum_sq_bound`]).
    pub fn u(&self, j: i64) -> f64 {
        if j < 0 || j as usize > self.cutoff {
            0.0
        } else {
            self.u[j as usize]
        }
    }

    pub fn u_table(&self) -> &[f64] {
        &self.u
    }

    /// Number of blocks fully contained in `[1, cutoff]`.
    pub fn completed_blocks(&self) -> usize {
        self.block_starts
            .windows(2)
            .filter(|w| w[1] <= self.cutoff as u64 + 1)
            .count()
    }

    /// Certified upper bound on `sum_{i > cutoff} u_i^2`: blockwise,
    /// `sum_{i >= n_k} u_i^2 <= sum_{i >= k} n_{i+1} / n_{i+1}^2 <= 2 / n_{k+1}`
    /// because the starts at least double.
    pub fn tail_sum_sq_bound(&self) -> f64 {
        2.0 / *self.block_starts.last().unwrap() as f64
    }

    /// Exact suffix `sum_{i = m}^{cutoff} u_i^2` plus the certified
    /// unmaterialized tail: returns an enclosure `[lo, hi]`.
    pub fn suffix_sum_sq(&self, m: i64) -> (f64, f64) {
        let from = m.max(0) as usize;
        let mut s = CompensatedSum::<f64>::new();
        if from <= self.cutoff {
            for &v in &self.u[from..] {
                s.add(v * v);
            }
        }
        let exact = s.value();
        (exact, exact + self.tail_sum_sq_bound())
    }

    /// Partial sums `sum_{i <= j} u_i` at block boundaries, the blockwise
    /// divergence witness: each completed block adds more than 1/2.
    pub fn partial_sums_at_blocks(&self) -> Vec<(u64, f64)> {
        let mut acc = CompensatedSum::<f64>::new();
        let mut out = Vec::new();
        let mut next_block = 1;
        for j in 1..=self.cutoff as u64 {
            acc.add(self.u(j as i64));
            if next_block < self.block_starts.len() && j + 1 == self.block_starts[next_block] {
                out.push((j, acc.value()));
                next_block += 1;
            }
        }
        out
    }

    fn verify_invariants(&self) -> Result<()> {
        // (1) n_{k+1} - n_k > n_{k+1} / 2, as integers: 2(n_{k+1} - n_k) > n_{k+1}.
        for w in self.block_starts.windows(2) {
            if 2 * (w[1] - w[0]) <= w[1] {
                return Err(Error::Precondition(format!(
                    "block gap invariant failed: n_k = {}, n_k+1 = {}",
                    w[0], w[1]
                )));
            }
        }
        // (2) psi_j <= 1/k^2 for j >= n_k; psi nonincreasing makes the
        // boundary value sufficient.
        for (idx, &n_k) in self.block_starts.iter().enumerate() {
            let k = (idx + 1) as f64;
            if self.psi.eval(n_k) > 1.0 / (k * k) + 1e-15 {
                return Err(Error::Precondition(format!(
                    "psi({n_k}) = {} exceeds 1/k^2 = {}",
                    self.psi.eval(n_k),
                    1.0 / (k * k)
                )));
            }
        }
        // (3) u_j = 1/n_{k+1} on [n_k, n_{k+1}).
        for w in self.block_starts.windows(2) {
            let expect = 1.0 / w[1] as f64;
            for &j in &[w[0], (w[0] + w[1] - 1) / 2, w[1] - 1] {
                if j <= self.cutoff as u64 && self.u(j as i64) != expect {
                    return Err(Error::Precondition(format!(
                        "u({j}) != 1/n_(k+1) inside block starting at {}",
                        w[0]
                    )));
                }
            }
        }
        Ok(())
    }
}
