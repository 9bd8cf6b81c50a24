//! Closed-form nonlinear ground states v_λ(x) = λ sech(λ|x| + atanh(q/λ)),
//! nonlinear eigenvalue selection, and the generalized-kernel symplectic
//! projection.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    inner, integrate, same_grid, symplectic_form, ComplexField, Grid,
};

/// Parameters (λ, q) of the ground state, with θ = atanh(q/λ) cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateParams {
    pub lambda: f64,
    pub q: f64,
    pub theta: f64,
}

impl GroundStateParams {
    pub fn new(lambda: f64, q: f64) -> Result<Self> {
        if !(lambda > q.abs()) {
            return Err(Error::Domain(format!(
                "ground state requires lambda > |q|, got lambda = {lambda}, q = {q}"
            )));
        }
        Ok(GroundStateParams { lambda, q, theta: (q / lambda).atanh() })
    }
}

/// Pointwise ground-state profile.
pub fn ground_state_at(p: GroundStateParams, x: f64) -> f64 {
    p.lambda / (p.lambda * x.abs() + p.theta).cosh()
}

/// ∂_λ v_λ in closed form, including the θ(λ) dependence:
/// ∂_λ v = sech z - λ sech z tanh z (|x| - q/(λ²-q²)),  z = λ|x| + θ.
pub fn dlambda_ground_state_at(p: GroundStateParams, x: f64) -> f64 {
    let z = p.lambda * x.abs() + p.theta;
    let sech = 1.0 / z.cosh();
    let dtheta = -p.q / (p.lambda * p.lambda - p.q * p.q);
    sech - p.lambda * sech * z.tanh() * (x.abs() + dtheta)
}

/// Sample v_λ on a grid.
pub fn ground_state(p: GroundStateParams, grid: Grid) -> ComplexField {
    ComplexField::from_real_fn(grid, |x| ground_state_at(p, x))
}

/// Sample ∂_λ v_λ on a grid.
pub fn dlambda_ground_state(p: GroundStateParams, grid: Grid) -> ComplexField {
    ComplexField::from_real_fn(grid, |x| dlambda_ground_state_at(p, x))
}

/// Generalized-kernel pair: v3 = i v_λ and v4 = ∂_λ v_λ.
#[derive(Debug, Clone)]
pub struct KernelPair {
    pub v3: ComplexField,
    pub v4: ComplexField,
}

pub fn kernel_pair(p: GroundStateParams, grid: Grid) -> KernelPair {
    let v = ground_state(p, grid);
    KernelPair { v3: v.scaled(Complex64::new(0.0, 1.0)), v4: dlambda_ground_state(p, grid) }
}

/// Linear eigenvalue selection: λ = 1 + ⟨w0, v1⟩ with v1 the λ = 1 ground
/// state at the same q.
pub fn select_lambda_linear(w0: &ComplexField, q: f64) -> Result<f64> {
    let p = GroundStateParams::new(1.0, q)?;
    let v1 = ground_state(p, w0.grid);
    Ok(1.0 + inner(w0, &v1)?)
}

/// Exact eigenvalue selection: Newton iteration on
/// F(λ,θ) = [ω(φ - e^{iθ}v_λ, i e^{iθ}v_λ), ω(φ - e^{iθ}v_λ, e^{iθ}∂_λv_λ)].
/// Returns (λ, θ) with |F| < 1e-10.
pub fn select_lambda_exact(
    phi: &ComplexField,
    q: f64,
    guess: (f64, f64),
) -> Result<(f64, f64)> {
    let grid = phi.grid;
    let f = |lambda: f64, theta: f64| -> Result<[f64; 2]> {
        let p = GroundStateParams::new(lambda, q)?;
        let phase = Complex64::new(0.0, theta).exp();
        let v = ground_state(p, grid);
        let dv = dlambda_ground_state(p, grid);
        let resid = phi.sub(&v.scaled(phase))?;
        let f1 = symplectic_form(&resid, &v.scaled(Complex64::new(0.0, 1.0) * phase))?;
        let f2 = symplectic_form(&resid, &dv.scaled(phase))?;
        Ok([f1, f2])
    };

    let (mut lambda, mut theta) = guess;
    let tol = 1e-10;
    for iter in 0..50 {
        let f0 = f(lambda, theta)?;
        let norm = (f0[0] * f0[0] + f0[1] * f0[1]).sqrt();
        if norm < tol {
            return Ok((lambda, theta));
        }
        // Finite-difference Jacobian; the map is smooth and well conditioned
        // near the root ([dF] ~ diag(1, -1)).
        let hl = 1e-7 * lambda.abs().max(1.0);
        let ht = 1e-7;
        let fl = f(lambda + hl, theta)?;
        let ft = f(lambda, theta + ht)?;
        let j11 = (fl[0] - f0[0]) / hl;
        let j21 = (fl[1] - f0[1]) / hl;
        let j12 = (ft[0] - f0[0]) / ht;
        let j22 = (ft[1] - f0[1]) / ht;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-14 {
            return Err(Error::NoConvergence {
                what: "eigenvalue selection Newton (singular Jacobian)".into(),
                iterations: iter,
            });
        }
        let dl = (f0[0] * j22 - f0[1] * j12) / det;
        let dt = (j11 * f0[1] - j21 * f0[0]) / det;
        lambda -= dl;
        theta -= dt;
        if !(lambda > q.abs()) {
            return Err(Error::NoConvergence {
                what: "eigenvalue selection Newton (left the domain lambda > |q|)".into(),
                iterations: iter,
            });
        }
    }
    Err(Error::NoConvergence { what: "eigenvalue selection Newton".into(), iterations: 50 })
}

/// Symplectic projection onto span{v3, v4}, normalized by ω(v3, v4):
/// P φ = [ω(φ, v4) v3 - ω(φ, v3) v4] / ω(v3, v4).
pub fn project_kernel(phi: &ComplexField, p: GroundStateParams) -> Result<ComplexField> {
    let pair = kernel_pair(p, phi.grid);
    same_grid(phi, &pair.v3)?;
    let norm = symplectic_form(&pair.v3, &pair.v4)?;
    let c3 = symplectic_form(phi, &pair.v4)? / norm;
    let c4 = -symplectic_form(phi, &pair.v3)? / norm;
    pair.v3.scaled(Complex64::new(c3, 0.0)).add(&pair.v4.scaled(Complex64::new(c4, 0.0)))
}

/// ∫ w0 dx on the grid (real part; used by the breathing predictions).
pub fn integral_real(w0: &ComplexField) -> f64 {
    integrate(w0).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{default_grid, h1_norm_sq, l2_norm_sq, make_grid};
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_lambda_below_q() {
        assert!(GroundStateParams::new(0.04, 0.05).is_err());
        assert!(GroundStateParams::new(0.05, 0.05).is_err());
    }

    #[test]
    fn q_zero_is_sech() {
        let p = GroundStateParams::new(1.0, 0.0).unwrap();
        let g = default_grid();
        let v = ground_state(p, g);
        assert_abs_diff_eq!(v.at0().re, 1.0, epsilon = 1e-15);
        for (x, val) in g.xs().zip(&v.values) {
            assert_abs_diff_eq!(val.re, 1.0 / x.cosh(), epsilon = 1e-14);
        }
    }

    #[test]
    fn center_value_is_sqrt_one_minus_q_sq() {
        let q = 0.07;
        let p = GroundStateParams::new(1.0, q).unwrap();
        assert_abs_diff_eq!(ground_state_at(p, 0.0), (1.0 - q * q).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn mass_identity_two_lambda_minus_q() {
        let g = default_grid();
        for (lambda, q, want) in [(1.0, 0.0, 2.0), (1.3, 0.05, 2.5), (1.2, 0.05, 2.3)] {
            let p = GroundStateParams::new(lambda, q).unwrap();
            let v = ground_state(p, g);
            assert_abs_diff_eq!(l2_norm_sq(&v), want, epsilon = 1e-6);
        }
    }

    #[test]
    fn ground_state_is_even() {
        let g = default_grid();
        let p = GroundStateParams::new(1.17, -0.04).unwrap();
        let v = ground_state(p, g);
        let n = g.n;
        let max_asym = (0..n)
            .map(|j| (v.values[j] - v.values[n - 1 - j]).norm())
            .fold(0.0, f64::max);
        assert!(max_asym < 1e-12);
    }

    #[test]
    fn dlambda_matches_finite_differences() {
        let g = default_grid();
        let q = 0.05;
        let h = 1e-6;
        let pm = GroundStateParams::new(1.0 - h, q).unwrap();
        let pp = GroundStateParams::new(1.0 + h, q).unwrap();
        let p = GroundStateParams::new(1.0, q).unwrap();
        for x in [-3.0, -0.5, 0.0, 0.02, 1.0, 7.5] {
            let fd = (ground_state_at(pp, x) - ground_state_at(pm, x)) / (2.0 * h);
            assert_abs_diff_eq!(dlambda_ground_state_at(p, x), fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn kernel_pair_normalizations() {
        let g = default_grid();
        // q = 0: v4 = sech - x sech tanh; <v4, v1> = 1.
        let p0 = GroundStateParams::new(1.0, 0.0).unwrap();
        let pair0 = kernel_pair(p0, g);
        let v10 = ground_state(p0, g);
        for (x, val) in g.xs().zip(&pair0.v4.values) {
            let want = 1.0 / x.cosh() - x / x.cosh() * x.tanh();
            assert_abs_diff_eq!(val.re, want, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(inner(&pair0.v4, &v10).unwrap(), 1.0, epsilon = 1e-6);

        // any q: ω(v3, v4) = -<v1, ∂λ vλ> = -1.
        for q in [0.0, 0.05, -0.03] {
            let p = GroundStateParams::new(1.0, q).unwrap();
            let pair = kernel_pair(p, g);
            assert_abs_diff_eq!(
                symplectic_form(&pair.v3, &pair.v4).unwrap(),
                -1.0,
                epsilon = 1e-6
            );
            // v3(0) = i sqrt(1 - q²)
            let at0 = pair.v3.at0();
            assert_abs_diff_eq!(at0.re, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(at0.im, (1.0 - q * q).sqrt(), epsilon = 1e-14);
        }
    }

    #[test]
    fn select_lambda_linear_examples() {
        let g = default_grid();
        // w0 = 0 -> 1
        let zero = ComplexField::zeros(g);
        assert_abs_diff_eq!(select_lambda_linear(&zero, 0.05).unwrap(), 1.0, epsilon = 1e-15);
        // w0 = eps*sech, q = 0 -> 1 + 2 eps
        let eps = 1e-3;
        let w = ComplexField::from_real_fn(g, |x| eps / x.cosh());
        assert_abs_diff_eq!(select_lambda_linear(&w, 0.0).unwrap(), 1.0 + 2.0 * eps, epsilon = 1e-8);
    }

    #[test]
    fn select_lambda_linear_refined_grid_oracle() {
        // Independent oracle: the same integrand on a 16x-refined grid.
        let q = 0.05;
        let g = default_grid();
        let p1 = GroundStateParams::new(1.0, q).unwrap();
        let w0 = |x: f64| {
            (x / (1.0 + q)).cosh().recip() / (1.0 + q) - ground_state_at(p1, x)
        };
        let coarse =
            select_lambda_linear(&ComplexField::from_real_fn(g, w0), q).unwrap();
        let gf = make_grid(-40.0, 40.0, 64001).unwrap();
        let fine = select_lambda_linear(&ComplexField::from_real_fn(gf, w0), q).unwrap();
        assert_abs_diff_eq!(coarse, fine, epsilon = 1e-8);
    }

    #[test]
    fn select_lambda_exact_recovers_ground_states() {
        let g = default_grid();
        // φ = v_{1.1} at q = 0.03, guess (1.0, 0)
        let q = 0.03;
        let p = GroundStateParams::new(1.1, q).unwrap();
        let phi = ground_state(p, g);
        let (lam, th) = select_lambda_exact(&phi, q, (1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(lam, 1.1, epsilon = 1e-8);
        assert_abs_diff_eq!(th, 0.0, epsilon = 1e-8);

        // φ = e^{0.2i} v_{0.9}
        let p2 = GroundStateParams::new(0.9, q).unwrap();
        let phi2 = ground_state(p2, g).scaled(Complex64::new(0.0, 0.2).exp());
        let (lam2, th2) = select_lambda_exact(&phi2, q, (1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(lam2, 0.9, epsilon = 1e-8);
        assert_abs_diff_eq!(th2, 0.2, epsilon = 1e-8);
    }

    #[test]
    fn select_lambda_exact_parameter_sweep() {
        let g = make_grid(-40.0, 40.0, 2001).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let lambda = 0.8 + 0.05 * i as f64;
                let q = -0.045 + 0.01 * j as f64;
                let p = GroundStateParams::new(lambda, q).unwrap();
                let phi = ground_state(p, g);
                let (lam, th) = select_lambda_exact(&phi, q, (1.0, 0.0)).unwrap();
                assert_abs_diff_eq!(lam, lambda, epsilon = 1e-8);
                assert_abs_diff_eq!(th, 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn exact_vs_linear_selection_is_order_q_squared() {
        let g = default_grid();
        let diff_at = |q: f64| -> f64 {
            let w0 = ComplexField::from_real_fn(g, |x| {
                (x / (1.0 + q)).cosh().recip() / (1.0 + q)
                    - ground_state_at(GroundStateParams::new(1.0, q).unwrap(), x)
            });
            let lin = select_lambda_linear(&w0, q).unwrap();
            let phi =
                ComplexField::from_real_fn(g, |x| (x / (1.0 + q)).cosh().recip() / (1.0 + q));
            let (exact, _) = select_lambda_exact(&phi, q, (lin, 0.0)).unwrap();
            (exact - lin).abs()
        };
        let d1 = diff_at(0.05);
        let d2 = diff_at(0.025);
        // O(q²): halving q shrinks the gap by roughly 4; accept [2.5, 6].
        let ratio = d1 / d2;
        assert!(d1 < 1e-2, "gap too large: {d1}");
        assert!((2.5..=6.0).contains(&ratio), "unexpected O(q²) ratio {ratio}");
    }

    #[test]
    fn projection_fixes_kernel_and_annihilates_orthogonals() {
        let g = default_grid();
        let q = 0.04;
        let p = GroundStateParams::new(1.0, q).unwrap();
        let pair = kernel_pair(p, g);

        let pv3 = project_kernel(&pair.v3, p).unwrap();
        assert!(pv3.sub(&pair.v3).unwrap().sup_norm() < 1e-6);
        let pv4 = project_kernel(&pair.v4, p).unwrap();
        assert!(pv4.sub(&pair.v4).unwrap().sup_norm() < 1e-6);

        // Real even φ projects onto a real multiple of v4.
        let phi = ComplexField::from_real_fn(g, |x| (-0.3 * x * x).exp());
        let pphi = project_kernel(&phi, p).unwrap();
        let coeff = inner(&phi, &ground_state(p, g)).unwrap();
        for (a, b) in pphi.values.iter().zip(&pair.v4.values) {
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a.re, coeff * b.re, epsilon = 1e-6);
        }

        // φ symplectically orthogonal to the kernel projects to zero.
        let odd_real = ComplexField::from_real_fn(g, |x| x * (-x * x).exp());
        let podd = project_kernel(&odd_real, p).unwrap();
        assert!(podd.sup_norm() < 1e-8);
    }

    #[test]
    fn projection_is_idempotent_on_random_fields() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let g = make_grid(-40.0, 40.0, 2001).unwrap();
        let p = GroundStateParams::new(1.0, 0.02).unwrap();
        for _ in 0..5 {
            let amp: Vec<Complex64> = (0..g.n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            // Smooth envelope keeps the field H¹-like.
            let phi = ComplexField {
                grid: g,
                values: g
                    .xs()
                    .zip(amp)
                    .map(|(x, a)| a * (-0.1 * x * x).exp())
                    .collect(),
            };
            let p1 = project_kernel(&phi, p).unwrap();
            let p2 = project_kernel(&p1, p).unwrap();
            let err = l2_norm_sq(&p2.sub(&p1).unwrap()).sqrt();
            let scale = l2_norm_sq(&phi).sqrt().max(1.0) * 1e-6;
            assert!(err <= scale, "projection not idempotent: {err} > {scale}");
        }
    }

    #[test]
    fn h1_norm_of_ground_state_is_finite_and_positive() {
        let g = default_grid();
        let p = GroundStateParams::new(1.0, 0.05).unwrap();
        let v = ground_state(p, g);
        let h1 = h1_norm_sq(&v);
        assert!(h1 > 2.0 && h1 < 4.0, "unexpected H1 norm {h1}");
    }
}
