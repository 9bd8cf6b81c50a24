//! Explicit spectral data of the linearized operator at q = 0: the Kaup
//! continuum states, the generalized kernel and its dual pairings, the free
//! continuous-spectrum propagator at the origin, and its stationary-phase
//! asymptotics. Also the plane-wave toy model showing how non-normality
//! produces amplitude oscillations.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{pairwise_sum_c, ComplexField, Grid, Vec2Field};
use crate::ground::{ground_state_at, GroundStateParams};
use crate::linalg::PanelMesh;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Continuum state Ψ₊(x,k) = [(tanh x - ik)², -sech²x]ᵗ e^{ikx}.
pub fn kaup_state(x: f64, k: Complex64) -> (Complex64, Complex64) {
    let t = x.tanh();
    let s = 1.0 / x.cosh();
    let phase = (I * k * x).exp();
    ((t - I * k) * (t - I * k) * phase, -Complex64::new(s * s, 0.0) * phase)
}

/// Ψ₋ = σ₁ Ψ₊ (component swap).
pub fn kaup_state_minus(x: f64, k: Complex64) -> (Complex64, Complex64) {
    let (a, b) = kaup_state(x, k);
    (b, a)
}

/// φ₊ = σ₃ Ψ₊.
pub fn kaup_dual(x: f64, k: Complex64) -> (Complex64, Complex64) {
    let (a, b) = kaup_state(x, k);
    (a, -b)
}

/// Scattering-normalized v₊ = Ψ₊ / (1 + i|k|)² for real k.
pub fn v_plus(x: f64, k: f64) -> (Complex64, Complex64) {
    let norm = (Complex64::new(1.0, k.abs())).powi(2);
    let (a, b) = kaup_state(x, Complex64::new(k, 0.0));
    (a / norm, b / norm)
}

/// Transmission coefficient T₊(k) = (1-ik)²/(1+ik)², |T₊| = 1.
pub fn transmission(k: f64) -> Complex64 {
    (Complex64::new(1.0, -k) / Complex64::new(1.0, k)).powi(2)
}

/// Generalized-kernel vectors of the free linearized operator in the
/// [u, ū]-pair representation, normalized so that H₀Ψ₂ = Ψ₁, H₀Ψ₄ = Ψ₃ and
/// the dual pairings below are exactly ±1:
/// Ψ₁ = [-η', -η'], Ψ₂ = ½[xη, -xη], Ψ₃ = [-η, η], Ψ₄ = ½[η+xη', η+xη'].
pub fn kernel_vectors(grid: Grid) -> [Vec2Field; 4] {
    let eta = |x: f64| 1.0 / x.cosh();
    let deta = |x: f64| -x.tanh() / x.cosh();
    let r = |v: f64| Complex64::new(v, 0.0);
    [
        Vec2Field::from_fn(grid, |x| (r(-deta(x)), r(-deta(x)))),
        Vec2Field::from_fn(grid, |x| (r(0.5 * x * eta(x)), r(-0.5 * x * eta(x)))),
        Vec2Field::from_fn(grid, |x| (r(-eta(x)), r(eta(x)))),
        Vec2Field::from_fn(grid, |x| {
            let w = 0.5 * (eta(x) + x * deta(x));
            (r(w), r(w))
        }),
    ]
}

/// Dual kernel vectors φⱼ = σ₃ Ψⱼ. Pairings: ∫φ₂*Ψ₁ = ∫φ₁*Ψ₂ = 1,
/// ∫φ₄*Ψ₃ = ∫φ₃*Ψ₄ = -1, all other pairings zero.
pub fn dual_kernel_vectors(grid: Grid) -> [Vec2Field; 4] {
    let psi = kernel_vectors(grid);
    psi.map(|v| Vec2Field {
        grid: v.grid,
        upper: v.upper.clone(),
        lower: v.lower.iter().map(|c| -c).collect(),
    })
}

/// Hermitian pairing ∫ a(x)* b(x) dx of 2-vector fields (trapezoid).
pub fn pair(a: &Vec2Field, b: &Vec2Field) -> Complex64 {
    let grid = &a.grid;
    let terms: Vec<Complex64> = (0..grid.n)
        .map(|j| {
            grid.weight(j) * (a.upper[j].conj() * b.upper[j] + a.lower[j].conj() * b.lower[j])
        })
        .collect();
    pairwise_sum_c(&terms)
}

/// Discrete application of H_q (λ = 1) to a 2-vector field; centered second
/// differences with the jump condition folded into the center node, zeros at
/// the two boundary nodes (callers look at interior residuals).
pub fn apply_hq(state: &Vec2Field, q: f64) -> Vec2Field {
    let grid = state.grid;
    let n = grid.n;
    let dx2 = grid.dx * grid.dx;
    let j0 = grid.center();
    let p = GroundStateParams::new(1.0, q).expect("|q| < 1");
    let mut upper = vec![Complex64::new(0.0, 0.0); n];
    let mut lower = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..n - 1 {
        let v = ground_state_at(p, grid.x(j));
        let v2 = v * v;
        let mut d2u = (state.upper[j - 1] - 2.0 * state.upper[j] + state.upper[j + 1]) / dx2;
        let mut d2l = (state.lower[j - 1] - 2.0 * state.lower[j] + state.lower[j + 1]) / dx2;
        if j == j0 {
            // ∂² + 2qδ₀ discretized as the corrected second difference.
            d2u += 2.0 * q / grid.dx * state.upper[j];
            d2l += 2.0 * q / grid.dx * state.lower[j];
        }
        upper[j] = -d2u + state.upper[j] - 4.0 * v2 * state.upper[j] - 2.0 * v2 * state.lower[j];
        lower[j] = d2l - state.lower[j] + 2.0 * v2 * state.upper[j] + 4.0 * v2 * state.lower[j];
    }
    Vec2Field { grid, upper, lower }
}

/// Sup-norm over interior nodes of (H_q - mu) state, relative to sup |state|.
pub fn hq_residual(state: &Vec2Field, q: f64, mu: Complex64) -> f64 {
    let applied = apply_hq(state, q);
    let n = state.grid.n;
    let mut worst: f64 = 0.0;
    let mut sup: f64 = 0.0;
    for j in 1..n - 1 {
        let ru = applied.upper[j] - mu * state.upper[j];
        let rl = applied.lower[j] - mu * state.lower[j];
        worst = worst.max(ru.norm()).max(rl.norm());
        sup = sup.max(state.upper[j].norm()).max(state.lower[j].norm());
    }
    worst / sup.max(1e-300)
}

/// Discrete generalized-kernel projection P_d[w₀, w₀]ᵗ evaluated as a
/// complex field (first component), built from the Ψⱼ/φⱼ pairs.
pub fn discrete_kernel_projection(w0: &ComplexField) -> ComplexField {
    let grid = w0.grid;
    let w2 = Vec2Field {
        grid,
        upper: w0.values.clone(),
        lower: w0.values.iter().map(|v| v.conj()).collect(),
    };
    let psi = kernel_vectors(grid);
    let phi = dual_kernel_vectors(grid);
    // Gram structure: <φ₂,Ψ₁> = <φ₁,Ψ₂> = 1, <φ₄,Ψ₃> = <φ₃,Ψ₄> = -1.
    let c1 = pair(&phi[1], &w2);
    let c2 = pair(&phi[0], &w2);
    let c3 = -pair(&phi[3], &w2);
    let c4 = -pair(&phi[2], &w2);
    let values = (0..grid.n)
        .map(|j| c1 * psi[0].upper[j] + c2 * psi[1].upper[j] + c3 * psi[2].upper[j] + c4 * psi[3].upper[j])
        .collect();
    ComplexField { grid, values }
}

/// Samples of a spectral-transform function on a wavenumber mesh.
#[derive(Debug, Clone)]
pub struct SpectralSamples {
    pub k: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Even-sector distorted Fourier transform of real w₀ at k ≥ 0:
/// f(k) = (1/(√(2π)(1-ik)²)) ∫ ((tanh x + ik)² + sech²x) e^{-ikx} w₀(x) dx,
/// reduced over the half line for even data.
pub fn free_f_at(w0: &ComplexField, k: f64) -> Complex64 {
    debug_assert!(k >= 0.0);
    let grid = &w0.grid;
    let j0 = grid.center();
    // Even part of the integrand: (1-k²)cos(kx) + 2k tanh(x) sin(kx), doubled
    // over x >= 0.
    let terms: Vec<f64> = (j0..grid.n)
        .map(|j| {
            let x = grid.x(j);
            let w = if j == j0 { 0.5 * grid.dx } else { grid.weight(j) };
            let re_part = (1.0 - k * k) * (k * x).cos() + 2.0 * k * x.tanh() * (k * x).sin();
            2.0 * w * re_part * w0.values[j].re
        })
        .collect();
    let raw = crate::grid::pairwise_sum(&terms);
    Complex64::new(raw / (2.0 * PI).sqrt(), 0.0) / Complex64::new(1.0, -k).powi(2)
}

pub fn free_f_transform(w0: &ComplexField, kgrid: &[f64]) -> SpectralSamples {
    SpectralSamples { k: kgrid.to_vec(), values: kgrid.iter().map(|&k| free_f_at(w0, k)).collect() }
}

const K_MAX: f64 = 40.0;
const NODE_BUDGET: usize = 20_000_000;

/// Oscillatory k-mesh: spacing 0.01/√max(t,1) resolves the e^{±itk²/2}
/// phase uniformly after the s = k√t substitution; truncation at k = 40 is
/// far below the transform's decay scale.
fn oscillatory_mesh(t: f64, refine: f64) -> Result<PanelMesh> {
    let dk = 0.01 / t.max(1.0).sqrt() * refine;
    let count = (K_MAX / dk) as usize;
    if count > NODE_BUDGET {
        return Err(Error::Accuracy(format!(
            "t = {t} needs {count} quadrature nodes, over the budget {NODE_BUDGET}"
        )));
    }
    Ok(PanelMesh::graded(0.0, K_MAX, K_MAX, |_| dk))
}

/// e^{-itH₀/2} P_c w₀ at x = 0 via quadrature of the continuum integral,
/// with a(0,k) = -k²/(1+ik)², b(0,k) = -1/(1+ik)².
pub fn free_propagator_origin(w0: &ComplexField, t: f64) -> Result<Complex64> {
    if t < 0.0 {
        return Err(Error::Domain(format!("propagator wants t >= 0, got {t}")));
    }
    let mesh = oscillatory_mesh(t, 1.0)?;
    let f: Vec<Complex64> = mesh.nodes.iter().map(|&k| free_f_at(w0, k)).collect();
    Ok(free_origin_from_transform(&mesh, &f, t))
}

pub(crate) fn free_origin_from_transform(mesh: &PanelMesh, f: &[Complex64], t: f64) -> Complex64 {
    let samples: Vec<Complex64> = mesh
        .nodes
        .iter()
        .zip(f)
        .map(|(&k, fk)| {
            let denom = Complex64::new(1.0, k).powi(2);
            let a0 = Complex64::new(-k * k, 0.0) / denom;
            let b0 = Complex64::new(-1.0, 0.0) / denom;
            let em = (-I * 0.5 * (1.0 + k * k) * t).exp();
            let ep = (I * 0.5 * (1.0 + k * k) * t).exp();
            (a0 * em + b0 * ep) * fk
        })
        .collect();
    (2.0 / PI).sqrt() * mesh.integrate_c(&samples)
}

/// P_c w₀ reconstructed pointwise at x (t = 0 completeness check and the
/// V₊V₊* recovery test).
pub fn free_continuum_reconstruction(w0: &ComplexField, x: f64) -> Result<Complex64> {
    let mesh = oscillatory_mesh(1.0, 1.0)?;
    let samples: Vec<Complex64> = mesh
        .nodes
        .iter()
        .map(|&k| {
            let fk = free_f_at(w0, k);
            let tx = x.tanh();
            let s2 = 1.0 / (x.cosh() * x.cosh());
            let dp = Complex64::new(1.0, k).powi(2);
            let e = (I * k * x).exp();
            let a_sum = ((tx - I * k).powi(2) * e + (tx + I * k).powi(2) * e.conj()) / dp;
            let b_sum = (-s2 * e - s2 * e.conj()) / dp;
            (a_sum + b_sum) * fk
        })
        .collect();
    Ok(mesh.integrate_c(&samples) / (2.0 * PI).sqrt())
}

/// Leading stationary-phase term
/// -(1/√(2πt)) e^{it/2} e^{iπ/4} ∫ w₀ dx, valid for t ≥ 1.
pub fn free_stationary_phase(w0: &ComplexField, t: f64) -> Result<Complex64> {
    if t < 1.0 {
        return Err(Error::Domain(format!("stationary phase wants t >= 1, got {t}")));
    }
    let integral = crate::grid::integrate(w0);
    Ok(-(1.0 / (2.0 * PI * t).sqrt())
        * (I * 0.5 * t).exp()
        * (I * PI / 4.0).exp()
        * integral)
}

/// Phase correction φ(h) from the inverse-scattering exact solution,
/// φ(h) ≈ 0.6 h² as h → 0. Computed by quadrature of
/// ∫₀^∞ log(1 + sin²(πh)/cosh²(πζ)) ζ/(ζ² + (1+2h)²) dζ.
pub fn phase_correction(h: f64) -> f64 {
    let s2 = (PI * h).sin().powi(2);
    let b2 = (1.0 + 2.0 * h) * (1.0 + 2.0 * h);
    let m = 20_000usize;
    let zmax = 6.0;
    let dz = zmax / m as f64;
    let samples: Vec<Complex64> = (0..=m)
        .map(|j| {
            let z = j as f64 * dz;
            let c = (PI * z).cosh();
            Complex64::new((1.0 + s2 / (c * c)).ln() * z / (z * z + b2), 0.0)
        })
        .collect();
    crate::linalg::simpson_uniform_c(&samples, dz).re
}

/// Free-case breathing prediction e^{-it/2}u(0,t) ≈ e^{iφ} - e^{iπ/4}√(π/(2t)) e^{it/2} h
/// for the rescaled family u(x,0) = (1+h)/(1+2h) sech(x/(1+2h)). The φ(h)
/// refinement is off by default (φ = 0).
pub fn free_breathing_prediction(h: f64, t: f64, phase_refine: bool) -> Result<Complex64> {
    if !(0.0..=0.3).contains(&h) {
        return Err(Error::Domain(format!("prediction calibrated for 0 <= h <= 0.3, got {h}")));
    }
    if t < 1.0 {
        return Err(Error::Domain(format!("prediction wants t >= 1, got {t}")));
    }
    let phi = if phase_refine { phase_correction(h) } else { 0.0 };
    Ok((I * phi).exp() - (I * PI / 4.0).exp() * (PI / (2.0 * t)).sqrt() * (I * 0.5 * t).exp() * h)
}

/// Initial data of the free-case breathing family.
pub fn free_breathing_initial(h: f64, grid: Grid) -> ComplexField {
    ComplexField::from_real_fn(grid, move |x| {
        (1.0 + h) / (1.0 + 2.0 * h) / (x / (1.0 + 2.0 * h)).cosh()
    })
}

/// Plane-wave solution of the non-normal toy model:
/// w = cos(tω + γx) + iσ sin(tω + γx), ω = √((γ²-α)(γ²-β)),
/// σ = √((γ²-α)/(γ²-β)). |w| is constant iff σ = 1 (α = β).
pub fn nonnormal_toy(alpha: f64, beta: f64, gamma: f64, x: f64, t: f64) -> Result<Complex64> {
    let g2 = gamma * gamma;
    if g2 <= alpha.max(beta) {
        return Err(Error::Domain(format!(
            "toy model wants γ² > max(α, β), got γ² = {g2}, α = {alpha}, β = {beta}"
        )));
    }
    let omega = ((g2 - alpha) * (g2 - beta)).sqrt();
    let sigma = ((g2 - alpha) / (g2 - beta)).sqrt();
    let phase = t * omega + gamma * x;
    Ok(Complex64::new(phase.cos(), sigma * phase.sin()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{default_grid, l2_norm_sq, make_grid};
    use approx::assert_abs_diff_eq;

    fn h_family_w0(h: f64, grid: Grid) -> ComplexField {
        ComplexField::from_real_fn(grid, move |x| {
            (1.0 + h) / (1.0 + 2.0 * h) / (x / (1.0 + 2.0 * h)).cosh() - 1.0 / x.cosh()
        })
    }

    #[test]
    fn kaup_state_solves_h0_and_has_threshold_resonance() {
        let g = make_grid(-15.0, 15.0, 60001).unwrap();
        let k = Complex64::new(0.7, 0.0);
        let psi = Vec2Field::from_fn(g, |x| kaup_state(x, k));
        let res = hq_residual(&psi, 0.0, Complex64::new(1.0 + 0.49, 0.0));
        assert!(res < 1e-6, "residual {res}");

        let (a, b) = kaup_state(1.3, Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(a.re, 1.3f64.tanh().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(b.re, -(1.0 / 1.3f64.cosh()).powi(2), epsilon = 1e-14);
    }

    #[test]
    fn residuals_for_all_four_families() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let g = make_grid(-15.0, 15.0, 60001).unwrap();
        for _ in 0..20 {
            let k: f64 = rng.gen_range(0.1..5.0);
            let mu = (k * k + 2.0).sqrt();
            let kk = Complex64::new(k, 0.0);
            // H₀ ψ = +(1+k²)ψ family.
            for state in [
                Vec2Field::from_fn(g, |x| kaup_state(x, kk)),
                Vec2Field::from_fn(g, |x| kaup_state(x, -kk)),
                Vec2Field::from_fn(g, |x| kaup_state_minus(x, Complex64::new(0.0, mu))),
                Vec2Field::from_fn(g, |x| kaup_state_minus(x, Complex64::new(0.0, -mu))),
            ] {
                let res = hq_residual(&state, 0.0, Complex64::new(1.0 + k * k, 0.0));
                assert!(res < 1e-5, "k = {k}: residual {res}");
            }
        }
    }

    #[test]
    fn transmission_behavior_at_large_x() {
        let k = 1.0;
        let (a, _) = v_plus(20.0, k);
        let want = transmission(k) * (I * k * 20.0).exp();
        assert!((a - want).norm() < 1e-6);
        assert_abs_diff_eq!(transmission(k).norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn kernel_ladder_and_pairings() {
        let g = make_grid(-20.0, 20.0, 40001).unwrap();
        let psi = kernel_vectors(g);
        let phi = dual_kernel_vectors(g);

        // H₀ annihilates Ψ₁, Ψ₃ and maps Ψ₂ -> Ψ₁, Ψ₄ -> Ψ₃.
        for idx in [0, 2] {
            let h = apply_hq(&psi[idx], 0.0);
            assert!(h.sup_norm() < 1e-5, "Ψ{} not annihilated", idx + 1);
        }
        for (from, to) in [(1usize, 0usize), (3, 2)] {
            let h = apply_hq(&psi[from], 0.0);
            let diff: f64 = (1..g.n - 1)
                .map(|j| {
                    ((h.upper[j] - psi[to].upper[j]).norm_sqr()
                        + (h.lower[j] - psi[to].lower[j]).norm_sqr())
                    .sqrt()
                })
                .fold(0.0, f64::max);
            assert!(diff < 1e-5, "ladder Ψ{} -> Ψ{} off by {diff}", from + 1, to + 1);
        }

        // Pairings: <φ₂,Ψ₁> = <φ₁,Ψ₂> = 1, <φ₄,Ψ₃> = <φ₃,Ψ₄> = -1.
        assert_abs_diff_eq!(pair(&phi[1], &psi[0]).re, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(pair(&phi[0], &psi[1]).re, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(pair(&phi[3], &psi[2]).re, -1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(pair(&phi[2], &psi[3]).re, -1.0, epsilon = 1e-6);
        // Cross-block pairings vanish.
        for (i, j) in [(0usize, 0usize), (1, 1), (0, 2), (1, 2), (0, 3), (3, 0), (2, 1)] {
            assert_abs_diff_eq!(pair(&phi[i], &psi[j]).norm(), 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn f_transform_examples() {
        let g = default_grid();
        let h = 0.1;
        let w0 = h_family_w0(h, g);
        // f(0) = h √(π/2) up to O(h²).
        let f0 = free_f_at(&w0, 0.0);
        let want = h * (PI / 2.0).sqrt();
        assert!((f0.re - want).abs() / want < 0.02, "f(0) = {f0}");
        assert_abs_diff_eq!(f0.im, 0.0, epsilon = 1e-12);

        // Decay envelope: |f(k)| <= C/(1+k²); fitted exponent >= 2 on [2, 20].
        let ks: Vec<f64> = (0..=18).map(|j| 2.0 + j as f64).collect();
        let f = free_f_transform(&w0, &ks);
        let pts: Vec<(f64, f64)> = ks
            .iter()
            .zip(&f.values)
            .map(|(&k, v)| (k.ln(), v.norm().max(1e-15).ln()))
            .collect();
        let slope = crate::testutil::fit_slope(&pts);
        assert!(-slope >= 2.0, "decay exponent {}", -slope);
    }

    #[test]
    fn completeness_at_origin_and_in_l2() {
        let g = default_grid();
        let w0 = h_family_w0(0.1, g);
        // t = 0: the continuum integral equals w₀(0) - (P_d w₀)(0).
        let got = free_propagator_origin(&w0, 0.0).unwrap();
        let pd = discrete_kernel_projection(&w0);
        let want = w0.at0() - pd.at0();
        assert!((got - want).norm() < 1e-4, "got {got}, want {want}");

        // Pointwise recovery of P_c w₀ in L² over a window.
        let window = make_grid(-10.0, 10.0, 401).unwrap();
        let mut err2 = 0.0;
        for (j, x) in window.xs().enumerate() {
            let rec = free_continuum_reconstruction(&w0, x).unwrap();
            let jj = ((x - g.xmin) / g.dx).round() as usize;
            let want = w0.values[jj] - pd.values[jj];
            err2 += window.weight(j) * (rec - want).norm_sqr();
        }
        assert!(err2.sqrt() < 1e-3, "L² completeness error {}", err2.sqrt());
    }

    #[test]
    fn p4_coefficient_is_about_04_h_squared() {
        // <w₀, sech>/h² ≈ 0.4 for the rescaled family (the quoted constant),
        // verified rather than assumed.
        let g = default_grid();
        for h in [0.05, 0.1] {
            let w0 = h_family_w0(h, g);
            let sech = ComplexField::from_real_fn(g, |x| 1.0 / x.cosh());
            let c = crate::grid::inner(&w0, &sech).unwrap() / (h * h);
            assert!((0.3..0.5).contains(&c.abs()), "h = {h}: coefficient {c}");
        }
    }

    #[test]
    fn stationary_phase_matches_quadrature_at_large_t() {
        let g = default_grid();
        let w0 = h_family_w0(0.1, g);
        let mut pts = Vec::new();
        for t in [20.0, 35.0, 60.0, 100.0, 160.0, 200.0] {
            let full = free_propagator_origin(&w0, t).unwrap();
            let lead = free_stationary_phase(&w0, t).unwrap();
            pts.push((t.ln(), (full - lead).norm().ln()));
        }
        let slope = crate::testutil::fit_slope(&pts);
        assert!(
            (-1.7..=-1.3).contains(&slope),
            "stationary-phase residual exponent {slope}"
        );

        // Cross-check the §-level example: within 15% at t = 25.
        let f25 = free_propagator_origin(&w0, 25.0).unwrap();
        let l25 = free_stationary_phase(&w0, 25.0).unwrap();
        assert!((f25 - l25).norm() < 0.15 * l25.norm());
    }

    #[test]
    fn stationary_phase_trivia() {
        let g = default_grid();
        // zero integral -> zero leading term
        let odd = ComplexField::from_real_fn(g, |x| x * (-x * x).exp());
        assert!(free_stationary_phase(&odd, 10.0).unwrap().norm() < 1e-12);
        // |result| = |∫w₀| / √(2πt)
        let w0 = h_family_w0(0.1, g);
        let t = 7.0;
        let got = free_stationary_phase(&w0, t).unwrap().norm();
        let want = crate::grid::integrate(&w0).re.abs() / (2.0 * PI * t).sqrt();
        assert_abs_diff_eq!(got, want, epsilon = 1e-14);
        // domain error below t = 1
        assert!(free_stationary_phase(&w0, 0.5).is_err());
        // zero data -> zero propagator
        assert!(free_propagator_origin(&ComplexField::zeros(g), 12.0).unwrap().norm() < 1e-14);
    }

    #[test]
    fn breathing_prediction_structure() {
        // h = 0: exactly 1.
        assert_eq!(free_breathing_prediction(0.0, 10.0, false).unwrap(), Complex64::new(1.0, 0.0));
        // The oscillating part advances phase at rate exactly 1/2: over
        // t -> t + 4π it returns with ratio √(t/(t+4π)) and phase 2π.
        let h = 0.1;
        for t in [10.0, 25.0, 40.0] {
            let c1 = free_breathing_prediction(h, t, false).unwrap() - 1.0;
            let c2 = free_breathing_prediction(h, t + 4.0 * PI, false).unwrap() - 1.0;
            let ratio = c2 / c1;
            assert_abs_diff_eq!(ratio.arg(), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(ratio.norm(), (t / (t + 4.0 * PI)).sqrt(), epsilon = 1e-12);
        }
        // φ(h) ≈ 0.6 h².
        let phi = phase_correction(0.1);
        assert!((phi / 0.01 - 0.6).abs() < 0.06, "φ(0.1)/h² = {}", phi / 0.01);
    }

    #[test]
    fn toy_model_amplitude_oscillation() {
        // α = β: unimodular for all (x, t).
        for (x, t) in [(0.0, 0.0), (1.0, 3.0), (-2.0, 7.7)] {
            let w = nonnormal_toy(-1.0, -1.0, 1.0, x, t).unwrap();
            assert_abs_diff_eq!(w.norm(), 1.0, epsilon = 1e-14);
        }
        // α = 5, β = 1, γ = 3: σ = 1/√2; |w| sweeps [1/√2, 1].
        let sigma = (0.5f64).sqrt();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in 0..4000 {
            let t = j as f64 * 0.005;
            let w = nonnormal_toy(5.0, 1.0, 3.0, 0.3, t).unwrap();
            lo = lo.min(w.norm());
            hi = hi.max(w.norm());
        }
        assert_abs_diff_eq!(lo, sigma, epsilon = 1e-4);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-4);
        // Domain error outside γ² > max(α, β).
        assert!(nonnormal_toy(5.0, 1.0, 2.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn free_f_even_sector_kills_odd_data() {
        // Odd w₀ has zero even part; its even-sector transform is the
        // transform of the even part, i.e. zero.
        let g = default_grid();
        let odd = ComplexField::from_real_fn(g, |x| x * (-0.5 * x * x).exp());
        let even_part = ComplexField {
            grid: g,
            values: (0..g.n)
                .map(|j| 0.5 * (odd.values[j] + odd.values[g.n - 1 - j]))
                .collect(),
        };
        assert!(l2_norm_sq(&even_part).sqrt() < 1e-15);
        for k in [0.0, 0.3, 1.1, 4.0] {
            assert!(free_f_at(&even_part, k).norm() < 1e-15);
        }
    }
}
