//! Z-bar evaluation: naive O(N k_n) rolling sums and an O(N) block fast path
//! for piecewise-polynomial weights.
//!
//! The fast path uses the summation-by-parts form
//!     Zbar_i = -sum_{j=1..k} (g_j - g_{j-1}) Z_{i+j-1}
//! and the fact that for a polynomial piece the discrete weight g_j - g_{j-1}
//! is a polynomial in j/k. Window sums then reduce to differences of power-
//! weighted prefix sums. Prefix sums are rebuilt every k_n windows with a
//! local origin so that roundoff does not accumulate across the series.

use crate::error::{Error, Result};
use crate::kernels::{DiscreteWeights, WeightFunction};

/// Strategy for evaluating the pre-averaged increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZbarMode {
    /// Fast path when the weight is piecewise polynomial and the window is
    /// long enough to benefit; naive otherwise.
    #[default]
    Auto,
    Naive,
    Fast,
}

pub(super) fn zbar(
    values: &[f64],
    weights: &DiscreteWeights,
    g: &WeightFunction,
    mode: ZbarMode,
) -> Result<Vec<f64>> {
    let k = weights.k_n();
    match mode {
        ZbarMode::Naive => Ok(zbar_naive(values, weights)),
        ZbarMode::Fast => match FastPlan::build(g, k) {
            Some(plan) => Ok(zbar_fast(values, weights, &plan)),
            None => Err(Error::InvalidParameter(
                "fast pre-averaging path requires a piecewise-polynomial weight of low degree"
                    .into(),
            )),
        },
        ZbarMode::Auto => {
            if k >= 32 {
                if let Some(plan) = FastPlan::build(g, k) {
                    return Ok(zbar_fast(values, weights, &plan));
                }
            }
            Ok(zbar_naive(values, weights))
        }
    }
}

/// Direct rolling sums: Zbar_i = sum_{j=1..k-1} g_j (Z_{i+j} - Z_{i+j-1}).
pub(super) fn zbar_naive(values: &[f64], weights: &DiscreteWeights) -> Vec<f64> {
    let k = weights.k_n();
    let n = values.len() - 1;
    let nw = n - k + 1;
    let mut d = vec![0.0; n];
    for i in 0..n {
        d[i] = values[i + 1] - values[i];
    }
    let gv = &weights.vals()[1..k]; // g_1 .. g_{k-1}
    let mut out = vec![0.0; nw];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = gv
            .iter()
            .zip(&d[i..i + k - 1])
            .map(|(w, x)| w * x)
            .sum();
    }
    out
}

/// A maximal run of window offsets whose discrete weight follows one
/// polynomial, plus the leftover offsets handled directly.
struct FastPlan {
    k: usize,
    max_deg: usize,
    runs: Vec<Run>,
    /// offsets j (1-based) evaluated from the weight table directly
    exceptional: Vec<usize>,
}

struct Run {
    a: usize,
    b: usize,
    /// coefficients of q(y) with y = j/k, q(j/k) = g_j - g_{j-1}
    q: Vec<f64>,
    /// exact telescoped weight sum g_{b} - g_{a-1} over the run
    weight_sum: f64,
}

impl FastPlan {
    fn build(g: &WeightFunction, k: usize) -> Option<FastPlan> {
        let polys = g.polynomial_pieces()?;
        let max_piece_deg = polys
            .iter()
            .map(|(_, _, c)| c.len().saturating_sub(1))
            .max()
            .unwrap_or(0);
        if max_piece_deg > 6 {
            return None;
        }
        let kf = k as f64;
        let step = 1.0 / kf;
        let tol = 1e-12;

        // piece index for each offset, None when the offset straddles pieces
        let piece_of = |j: usize| -> Option<usize> {
            let x0 = (j as f64 - 1.0) / kf;
            let x1 = j as f64 / kf;
            polys
                .iter()
                .position(|(lo, hi, _)| *lo <= x0 + tol && x1 <= *hi + tol)
        };

        let vals: Vec<f64> = (0..=k).map(|i| g.eval(i as f64 / kf)).collect();
        let mut runs = Vec::new();
        let mut exceptional = Vec::new();
        let mut j = 1usize;
        let mut max_deg = 0usize;
        while j <= k {
            match piece_of(j) {
                None => {
                    exceptional.push(j);
                    j += 1;
                }
                Some(pi) => {
                    let mut b = j;
                    while b + 1 <= k && piece_of(b + 1) == Some(pi) {
                        b += 1;
                    }
                    // q(y) = P(y) - P(y - 1/k)
                    let coeffs = &polys[pi].2;
                    let shifted = shift_poly(coeffs, step);
                    let mut q = vec![0.0; coeffs.len()];
                    for (m, &c) in coeffs.iter().enumerate() {
                        q[m] = c - shifted[m];
                    }
                    while q.len() > 1 && q.last().map(|v| v.abs() < 1e-300).unwrap_or(false) {
                        q.pop();
                    }
                    max_deg = max_deg.max(q.len() - 1);
                    runs.push(Run {
                        a: j,
                        b,
                        q,
                        weight_sum: vals[b] - vals[j - 1],
                    });
                    j = b + 1;
                }
            }
        }
        Some(FastPlan {
            k,
            max_deg,
            runs,
            exceptional,
        })
    }
}

/// Coefficients of P(y - s) given those of P(y).
fn shift_poly(coeffs: &[f64], s: f64) -> Vec<f64> {
    let d = coeffs.len();
    let mut out = vec![0.0; d];
    for (m, &a) in coeffs.iter().enumerate() {
        // a (y - s)^m = a sum_r C(m,r) y^r (-s)^{m-r}
        let mut binom = 1.0f64;
        // iterate r from m down to 0, maintaining C(m,r)
        let mut pow = 1.0f64; // (-s)^{m-r}, starts at r = m
        for r in (0..=m).rev() {
            out[r] += a * binom * pow;
            if r > 0 {
                binom = binom * r as f64 / (m - r + 1) as f64;
                pow *= -s;
            }
        }
    }
    out
}

fn zbar_fast(values: &[f64], weights: &DiscreteWeights, plan: &FastPlan) -> Vec<f64> {
    let k = plan.k;
    let n = values.len() - 1;
    let nw = n - k + 1;
    let kf = k as f64;
    let deg = plan.max_deg;
    let mut out = vec![0.0; nw];

    // binomial table up to deg
    let mut binom = vec![vec![0.0f64; deg + 1]; deg + 1];
    for (r, row) in binom.iter_mut().enumerate() {
        row[0] = 1.0;
        for s in 1..=r {
            row[s] = row[s - 1] * (r - s + 1) as f64 / s as f64;
        }
    }

    let mut prefix: Vec<Vec<f64>> = vec![Vec::new(); deg + 1];
    let mut block_start = 0usize;
    while block_start < nw {
        let block_end = (block_start + k).min(nw);
        let local_len = (block_end - 1 - block_start) + k; // values used: l in [i0, i0+local_len-1]
        let zb = values[block_start];

        for (r, pref) in prefix.iter_mut().enumerate() {
            pref.clear();
            pref.reserve(local_len + 1);
            pref.push(0.0);
            let mut acc = 0.0;
            for m in 0..local_len {
                let lam = m as f64 / kf;
                let centered = values[block_start + m] - zb;
                acc += lam.powi(r as i32) * centered;
                pref.push(acc);
            }
        }

        for i in block_start..block_end {
            let delta = i - block_start;
            let u = (delta as f64 - 1.0) / kf;
            let mut acc = 0.0;
            for run in &plan.runs {
                let lo = delta + run.a - 1;
                let hi = delta + run.b - 1;
                // gamma_s(u) = sum_{r >= s} q_r C(r,s) (-u)^{r-s}
                let mut run_val = 0.0;
                for s in 0..run.q.len() {
                    let mut gamma = 0.0;
                    let mut pow = 1.0; // (-u)^{r-s}
                    for r in s..run.q.len() {
                        gamma += run.q[r] * binom[r][s] * pow;
                        pow *= -u;
                    }
                    run_val += gamma * (prefix[s][hi + 1] - prefix[s][lo]);
                }
                acc += run_val + zb * run.weight_sum;
            }
            for &j in &plan.exceptional {
                acc += weights.diff(j) * values[i + j - 1];
            }
            out[i] = -acc;
        }
        block_start = block_end;
    }
    out
}
