//! Neumann-series solution of the Volterra equation for the second threshold
//! solution u₂ of the free linearized operator, in the gauge v = e^{√2 x} u₂:
//!
//!   v(x) = [0, 1]ᵗ + ∫ₓ^∞ K(x,y) v(y) dy,
//!   K(x,y) = -√2 [2√2(y-x), √2(y-x); sinh(√2(y-x)), 2 sinh(√2(y-x))]
//!            · sech²y · e^{√2(x-y)},
//!
//! checked against the exact closed form
//! u₂ = e^{-√2 x}/(1+√2)² [-sech²x, (tanh x + √2)²]ᵗ.

use crate::error::{Error, Result};

pub const X_LEFT: f64 = -10.0;
pub const X_RIGHT: f64 = 30.0;
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Discretized 2-vector state on the uniform Volterra grid over [-10, 30].
#[derive(Debug, Clone)]
pub struct VolterraState {
    pub x: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl VolterraState {
    pub fn constant(n: usize, c1: f64, c2: f64) -> Self {
        let dx = (X_RIGHT - X_LEFT) / (n as f64 - 1.0);
        VolterraState {
            x: (0..n).map(|j| X_LEFT + j as f64 * dx).collect(),
            v1: vec![c1; n],
            v2: vec![c2; n],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.v1
            .iter()
            .zip(&self.v2)
            .map(|(a, b)| (a * a + b * b).sqrt())
            .fold(0.0, f64::max)
    }
}

/// One application of the kernel, trapezoid in y over [x, X_RIGHT] per node.
///
/// The kernel separates into suffix integrals:
///   row 1: -2 e^{√2 x} [ S₂(x) - x S₁(x) ],    S₁ = ∫ₓ g, S₂ = ∫ₓ y g,
///          g = e^{-√2 y} sech²y (2v₁ + v₂),
///   row 2: -(√2/2) [ T₁(x) - e^{2√2 x} T₂(x) ], T₁ = ∫ₓ h, T₂ = ∫ₓ e^{-2√2 y} h,
///          h = sech²y (v₁ + 2v₂),
/// which reproduces the per-node trapezoid sums exactly in O(n).
pub fn volterra_apply(state: &VolterraState) -> VolterraState {
    let n = state.x.len();
    let dx = state.x[1] - state.x[0];
    let mut g = vec![0.0; n];
    let mut yg = vec![0.0; n];
    let mut h = vec![0.0; n];
    let mut eh = vec![0.0; n];
    for j in 0..n {
        let y = state.x[j];
        let s2 = 1.0 / (y.cosh() * y.cosh());
        g[j] = (-SQRT2 * y).exp() * s2 * (2.0 * state.v1[j] + state.v2[j]);
        yg[j] = y * g[j];
        h[j] = s2 * (state.v1[j] + 2.0 * state.v2[j]);
        eh[j] = (-2.0 * SQRT2 * y).exp() * h[j];
    }
    // Suffix trapezoid sums.
    let suffix = |f: &[f64]| -> Vec<f64> {
        let mut s = vec![0.0; n];
        for j in (0..n - 1).rev() {
            s[j] = s[j + 1] + 0.5 * dx * (f[j] + f[j + 1]);
        }
        s
    };
    let s1 = suffix(&g);
    let s2 = suffix(&yg);
    let t1 = suffix(&h);
    let t2 = suffix(&eh);

    let mut out = VolterraState { x: state.x.clone(), v1: vec![0.0; n], v2: vec![0.0; n] };
    for j in 0..n {
        let x = state.x[j];
        out.v1[j] = -2.0 * (SQRT2 * x).exp() * (s2[j] - x * s1[j]);
        out.v2[j] = -(SQRT2 / 2.0) * (t1[j] - (2.0 * SQRT2 * x).exp() * t2[j]);
    }
    out
}

/// Partial sum v = Σ_{m=0}^{n_terms-1} K^m [0,1]ᵗ with a geometric-decay
/// convergence check on the term norms.
pub fn volterra_series(n_terms: usize, grid_points: usize) -> Result<VolterraState> {
    if n_terms < 1 {
        return Err(Error::Config("need at least one Neumann term".into()));
    }
    let mut term = VolterraState::constant(grid_points, 0.0, 1.0);
    let mut sum = term.clone();
    let mut prev_norm = term.sup_norm();
    for m in 1..n_terms {
        term = volterra_apply(&term);
        let norm = term.sup_norm();
        if m >= 3 && norm > prev_norm {
            return Err(Error::NoConvergence {
                what: format!("Neumann series (term {m} grew: {prev_norm} -> {norm})"),
                iterations: m,
            });
        }
        prev_norm = norm;
        for j in 0..sum.x.len() {
            sum.v1[j] += term.v1[j];
            sum.v2[j] += term.v2[j];
        }
    }
    Ok(sum)
}

/// Exact second threshold solution u₂(x).
pub fn exact_u2(x: f64) -> (f64, f64) {
    let norm = (1.0 + SQRT2) * (1.0 + SQRT2);
    let e = (-SQRT2 * x).exp() / norm;
    let s = 1.0 / x.cosh();
    let t = x.tanh();
    (-s * s * e, (t + SQRT2) * (t + SQRT2) * e)
}

/// e^{√2 x} u₂(x), the quantity the Volterra gauge computes.
pub fn exact_v(x: f64) -> (f64, f64) {
    let (u1, u2) = exact_u2(x);
    let e = (SQRT2 * x).exp();
    (u1 * e, u2 * e)
}

/// The x -> -∞ limit of the second component of e^{√2 x}u₂:
/// ((√2-1)/(√2+1))² = (3-2√2)/(3+2√2).
pub fn resonance_limit() -> f64 {
    (3.0 - 2.0 * SQRT2) / (3.0 + 2.0 * SQRT2)
}
