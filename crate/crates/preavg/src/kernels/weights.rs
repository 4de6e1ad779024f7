//! Weight functions on [0, 1] and their discretizations.
//!
//! A weight function g is continuous, piecewise C1, vanishes at 0 and 1 and
//! has positive L2 norm. It is extended by zero outside [0, 1]. Every kernel
//! constant of the library is an integral of g, g' or their lagged products,
//! so the representation keeps explicit per-piece evaluators together with
//! the breakpoints where g' may jump.

use crate::error::{Error, Result};
use crate::kernels::quad;
use serde::{Deserialize, Serialize};

/// Closed-form evaluator for one smooth piece.
#[derive(Debug, Clone)]
pub enum PieceExpr {
    /// Polynomial in the global coordinate x, ascending coefficients.
    Poly(Vec<f64>),
    /// amp * sin(omega * x + phase)
    Sin { amp: f64, omega: f64, phase: f64 },
}

impl PieceExpr {
    fn eval(&self, x: f64) -> f64 {
        match self {
            PieceExpr::Poly(c) => c.iter().rev().fold(0.0, |acc, &a| acc * x + a),
            PieceExpr::Sin { amp, omega, phase } => amp * (omega * x + phase).sin(),
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        match self {
            PieceExpr::Poly(c) => {
                let mut acc = 0.0;
                for (m, &a) in c.iter().enumerate().skip(1).rev() {
                    acc = acc * x + a * m as f64;
                }
                acc
            }
            PieceExpr::Sin { amp, omega, phase } => amp * omega * (omega * x + phase).cos(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub expr: PieceExpr,
}

/// A weight function g on [0, 1], extended by zero elsewhere.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    name: String,
    pieces: Vec<Piece>,
    breakpoints: Vec<f64>,
}

impl WeightFunction {
    /// Build from ordered pieces covering [0, 1]; validates the weight
    /// conditions (continuity, boundary zeros, positive L2 norm).
    pub fn new(name: impl Into<String>, pieces: Vec<Piece>) -> Result<Self> {
        let name = name.into();
        if pieces.is_empty() {
            return Err(Error::InvalidWeight(format!("{name}: no pieces")));
        }
        if (pieces[0].lo).abs() > 1e-12 || (pieces[pieces.len() - 1].hi - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeight(format!(
                "{name}: pieces must cover [0,1] exactly"
            )));
        }
        for w in pieces.windows(2) {
            if (w[0].hi - w[1].lo).abs() > 1e-12 {
                return Err(Error::InvalidWeight(format!(
                    "{name}: pieces must be contiguous (gap at {})",
                    w[0].hi
                )));
            }
            let left = w[0].expr.eval(w[0].hi);
            let right = w[1].expr.eval(w[1].lo);
            if (left - right).abs() > 1e-10 {
                return Err(Error::InvalidWeight(format!(
                    "{name}: discontinuity at {} ({left} vs {right})",
                    w[0].hi
                )));
            }
        }
        for p in &pieces {
            if !(p.hi > p.lo) {
                return Err(Error::InvalidWeight(format!(
                    "{name}: empty or reversed piece [{}, {}]",
                    p.lo, p.hi
                )));
            }
        }
        if pieces[0].expr.eval(0.0).abs() > 1e-12 {
            return Err(Error::InvalidWeight(format!("{name}: g(0) must be 0")));
        }
        if pieces[pieces.len() - 1].expr.eval(1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeight(format!("{name}: g(1) must be 0")));
        }
        let mut breakpoints = vec![0.0];
        for p in &pieces {
            breakpoints.push(p.hi);
        }
        breakpoints.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

        let wf = WeightFunction {
            name,
            pieces,
            breakpoints,
        };
        let l2 = quad::integrate_with_breakpoints(
            |x| wf.eval(x) * wf.eval(x),
            0.0,
            1.0,
            &wf.breakpoints,
            1e-12,
        )?;
        if l2 <= 1e-12 {
            return Err(Error::InvalidWeight(format!(
                "{}: integral of g^2 must be positive",
                wf.name
            )));
        }
        Ok(wf)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// g(x); zero outside [0, 1].
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        self.piece_at(x).expr.eval(x)
    }

    /// g'(x); zero outside [0, 1]. At a breakpoint the right derivative is
    /// returned (the value at an isolated point never enters an integral).
    pub fn deriv(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        self.piece_at(x).expr.deriv(x)
    }

    fn piece_at(&self, x: f64) -> &Piece {
        for p in &self.pieces {
            if x < p.hi {
                return p;
            }
        }
        self.pieces.last().unwrap()
    }

    /// Sorted abscissae (including 0 and 1) where g' may jump.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Per-piece polynomial coefficients when every piece is polynomial;
    /// None if any piece uses a non-polynomial closed form.
    pub fn polynomial_pieces(&self) -> Option<Vec<(f64, f64, Vec<f64>)>> {
        let mut out = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            match &p.expr {
                PieceExpr::Poly(c) => out.push((p.lo, p.hi, c.clone())),
                PieceExpr::Sin { .. } => return None,
            }
        }
        Some(out)
    }

    /// Discretize at window length k_n: g(i/k_n) for i = 0..=k_n.
    pub fn discretize(&self, k_n: usize) -> DiscreteWeights {
        assert!(k_n >= 2, "window length must be at least 2");
        let vals: Vec<f64> = (0..=k_n).map(|i| self.eval(i as f64 / k_n as f64)).collect();
        let diffs: Vec<f64> = (1..=k_n).map(|i| vals[i] - vals[i - 1]).collect();
        DiscreteWeights {
            k_n,
            g_vals: vals,
            g_diffs: diffs,
        }
    }
}

/// The built-in registry addressable by name.
pub fn by_name(name: &str) -> Result<WeightFunction> {
    match name {
        "triangle" => triangle(),
        "sine" => sine(),
        other => Err(Error::InvalidWeight(format!(
            "unknown weight function '{other}' (built-ins: triangle, sine)"
        ))),
    }
}

/// g(x) = min(x, 1-x).
pub fn triangle() -> Result<WeightFunction> {
    WeightFunction::new(
        "triangle",
        vec![
            Piece {
                lo: 0.0,
                hi: 0.5,
                expr: PieceExpr::Poly(vec![0.0, 1.0]),
            },
            Piece {
                lo: 0.5,
                hi: 1.0,
                expr: PieceExpr::Poly(vec![1.0, -1.0]),
            },
        ],
    )
}

/// g(x) = sin(pi x).
pub fn sine() -> Result<WeightFunction> {
    WeightFunction::new(
        "sine",
        vec![Piece {
            lo: 0.0,
            hi: 1.0,
            expr: PieceExpr::Sin {
                amp: 1.0,
                omega: std::f64::consts::PI,
                phase: 0.0,
            },
        }],
    )
}

/// JSON form of a user-defined piecewise polynomial weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightSpecJson {
    #[serde(default)]
    pub name: Option<String>,
    pub pieces: Vec<PieceJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PieceJson {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

impl WeightSpecJson {
    pub fn build(&self) -> Result<WeightFunction> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: p.lo,
                hi: p.hi,
                expr: PieceExpr::Poly(p.coeffs.clone()),
            })
            .collect();
        WeightFunction::new(self.name.clone().unwrap_or_else(|| "custom".into()), pieces)
    }
}

/// A weight referenced either by registry name or by an inline spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightConfig {
    Named(String),
    Inline(WeightSpecJson),
}

impl WeightConfig {
    pub fn build(&self) -> Result<WeightFunction> {
        match self {
            WeightConfig::Named(n) => by_name(n),
            WeightConfig::Inline(spec) => spec.build(),
        }
    }
}

/// g^n_i = g(i / k_n) together with the first differences g'^n_i.
#[derive(Debug, Clone)]
pub struct DiscreteWeights {
    k_n: usize,
    /// g(i/k_n) for i = 0..=k_n; first and last are zero.
    g_vals: Vec<f64>,
    /// g^n_i - g^n_{i-1} for i = 1..=k_n (index shifted by one).
    g_diffs: Vec<f64>,
}

impl DiscreteWeights {
    pub fn k_n(&self) -> usize {
        self.k_n
    }

    /// g(i/k_n); valid for i = 0..=k_n.
    pub fn val(&self, i: usize) -> f64 {
        self.g_vals[i]
    }

    /// g'^n_i = g^n_i - g^n_{i-1}; valid for i = 1..=k_n.
    pub fn diff(&self, i: usize) -> f64 {
        self.g_diffs[i - 1]
    }

    pub fn vals(&self) -> &[f64] {
        &self.g_vals
    }

    pub fn diffs(&self) -> &[f64] {
        &self.g_diffs
    }

    /// Discrete norm: sum_{i=1..k_n} |g^n_i|^p.
    pub fn norm(&self, p: f64) -> f64 {
        self.g_vals.iter().skip(1).map(|v| v.abs().powf(p)).sum()
    }

    /// Discrete derivative norm: sum_{i=1..k_n} |g'^n_i|^p.
    pub fn norm_diff(&self, p: f64) -> f64 {
        self.g_diffs.iter().map(|v| v.abs().powf(p)).sum()
    }
}
