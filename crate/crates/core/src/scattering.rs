//! Connection coefficients of the impurity-linearized operator: the exact
//! (A, B, C, D) at wavenumber k, the equivalent 4x4 linear system used as an
//! independent oracle, generalized eigenfunctions built from them, the
//! threshold eigenstate for repulsive q, and root-finding for the
//! eigenvalues encoded by zeros of B's numerator factor.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, Vec2Field};
use crate::linalg::solve_dense_c;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// √(2 + k²) on the branch cut along (-i∞, -i√2] ∪ [i√2, +i∞), real and
/// positive for real k. The principal square root of 2 + k² realizes
/// exactly this branch.
pub fn mu_branch(k: Complex64) -> Complex64 {
    (Complex64::new(2.0, 0.0) + k * k).sqrt()
}

/// Connection coefficients at complex wavenumber k for impurity strength q.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringCoeffs {
    pub k: Complex64,
    pub q: f64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub mu: Complex64,
}

fn denominator(k: Complex64, q: f64, mu: Complex64) -> Complex64 {
    let k2q2 = k * k + q * q;
    1.0 + q * q * (k * k + 2.0 * q * q - 2.0) + 2.0 * q * k2q2 * mu + k2q2 * mu * mu
}

/// Numerator factors of B: B ∝ (k - iq) v(k) w(k) with
/// v(k) = (i + kμ) + q(k - iμ) - 2iq², w(k) = (-i + kμ) + q(k - iμ).
/// Zeros of v near k = -i encode the eigenvalues near 0.
pub fn b_numerator_v(k: Complex64, q: f64) -> Complex64 {
    let mu = mu_branch(k);
    (I + k * mu) + q * (k - I * mu) - 2.0 * I * q * q
}

pub fn b_numerator_w(k: Complex64, q: f64) -> Complex64 {
    let mu = mu_branch(k);
    (-I + k * mu) + q * (k - I * mu)
}

fn b_numerator_v_prime(k: Complex64, q: f64) -> Complex64 {
    let mu = mu_branch(k);
    // dμ/dk = k/μ.
    let dmu = k / mu;
    mu + k * dmu + q * (1.0 - I * dmu)
}

/// Closed-form evaluation of (A, B, C, D).
pub fn scattering_coeffs(k: Complex64, q: f64) -> Result<ScatteringCoeffs> {
    let mu = mu_branch(k);
    let theta = q.atanh();
    let den = denominator(k, q, mu);
    if den.norm() < 1e-14 {
        return Err(Error::Pole(format!("denominator {den} at k = {k}, q = {q}")));
    }
    if k.norm() < 1e-14 {
        return Err(Error::Pole(format!("B and C are singular at k = 0 (threshold), k = {k}")));
    }
    let a = -2.0 * ((-I * k + mu) * theta).exp() * q * (I * k + q) * (q * q - 1.0) / den;
    let b = (-2.0 * I * k * theta).exp() * (k - I * q) * b_numerator_v(k, q) * b_numerator_w(k, q)
        / (k * den);
    let c = -I * q * (-1.0 + (2.0 + k * k) * q * q + 2.0 * q * (k * k + q * q) * mu + (k * k + q * q) * mu * mu)
        / (k * den);
    let d = -a;
    Ok(ScatteringCoeffs { k, q, a, b, c, d, mu })
}

/// Independent oracle: solve the 4x4 continuity/jump system directly.
/// Unknowns are the tilde-coefficients; the plain ones carry the θ phases.
pub fn scattering_coeffs_linsolve(k: Complex64, q: f64) -> Result<ScatteringCoeffs> {
    let mu = mu_branch(k);
    let theta = q.atanh();
    let q2 = 1.0 - q * q;
    let c_ = |v: f64| Complex64::new(v, 0.0);
    let mut mat = vec![
        vec![c_(q2), (q - I * k) * (q - I * k), (q + I * k) * (q + I * k), -c_(q2)],
        vec![(q + mu) * (q + mu), c_(q2), c_(q2), -(q + mu) * (q + mu)],
        vec![c_(q2), (q - I * k) * (mu - q), (q + I * k) * (mu - q), c_(q2)],
        vec![
            -(q + mu) * (k * k + q * q),
            q2 * (q - I * k),
            q2 * (q + I * k),
            -(q + mu) * (k * k + q * q),
        ],
    ];
    let mut rhs = vec![
        q * 4.0 * I * k,
        Complex64::new(0.0, 0.0),
        -q * 2.0 * (mu - q),
        Complex64::new(-q * 2.0 * q2, 0.0),
    ];
    solve_dense_c(&mut mat, &mut rhs)?;
    let (ta, tb, tc, td) = (rhs[0], rhs[1] + 1.0, rhs[2], rhs[3]);
    Ok(ScatteringCoeffs {
        k,
        q,
        a: ((-I * k + mu) * theta).exp() * ta,
        b: (-2.0 * I * k * theta).exp() * tb,
        c: tc,
        d: ((-I * k + mu) * theta).exp() * td,
        mu,
    })
}

/// Piecewise generalized eigenfunction ψ(x, k) built from the coefficients.
pub fn psi(coeffs: &ScatteringCoeffs, x: f64) -> (Complex64, Complex64) {
    let q = coeffs.q;
    let theta = q.atanh();
    let k = coeffs.k;
    let mu = coeffs.mu;
    let arg = x + x.signum() * theta;
    let t = Complex64::new(arg.tanh(), 0.0);
    let s2 = Complex64::new(1.0 / (arg.cosh() * arg.cosh()), 0.0);
    if x < 0.0 {
        let e_inc = (I * k * (x - theta)).exp();
        let e_a = (mu * (x - theta)).exp();
        (
            (t - I * k) * (t - I * k) * e_inc - coeffs.a * s2 * e_a,
            -s2 * e_inc + coeffs.a * (t - mu) * (t - mu) * e_a,
        )
    } else {
        let e_b = (I * k * (x + theta)).exp();
        let e_c = (-I * k * (x + theta)).exp();
        let e_d = (-mu * (x + theta)).exp();
        (
            coeffs.b * (t - I * k) * (t - I * k) * e_b + coeffs.c * (t + I * k) * (t + I * k) * e_c
                - coeffs.d * s2 * e_d,
            -coeffs.b * s2 * e_b - coeffs.c * s2 * e_c + coeffs.d * (t + mu) * (t + mu) * e_d,
        )
    }
}

/// Scattering-normalized continuum state v₊(x,k) = [a(x,k), b(x,k)]ᵗ for
/// real k ≠ 0, its components evaluated at one x. For k > 0 this is
/// ψ(-x,-k)/((1+ik)² B(-k)); for k < 0, ψ(x,k)/((1-ik)² B(k)).
pub struct GeneralizedEigenfunction {
    pub k: f64,
    pub q: f64,
    coeffs: ScatteringCoeffs,
    norm: Complex64,
    flip: bool,
}

impl GeneralizedEigenfunction {
    pub fn new(k: f64, q: f64) -> Result<Self> {
        if k == 0.0 {
            return Err(Error::Domain("generalized eigenfunction needs real k ≠ 0".into()));
        }
        let (coeffs, norm, flip) = if k > 0.0 {
            let c = scattering_coeffs(Complex64::new(-k, 0.0), q)?;
            let norm = Complex64::new(1.0, k).powi(2) * c.b;
            (c, norm, true)
        } else {
            let c = scattering_coeffs(Complex64::new(k, 0.0), q)?;
            let norm = Complex64::new(1.0, -k).powi(2) * c.b;
            (c, norm, false)
        };
        if norm.norm() < 1e-12 {
            return Err(Error::Pole(format!("B({:.3e}) too small at k = {k}", norm.norm())));
        }
        Ok(GeneralizedEigenfunction { k, q, coeffs, norm, flip })
    }

    /// (a(x,k), b(x,k)).
    pub fn components(&self, x: f64) -> (Complex64, Complex64) {
        let (u, l) = if self.flip { psi(&self.coeffs, -x) } else { psi(&self.coeffs, x) };
        (u / self.norm, l / self.norm)
    }

    /// Even parts a_ev, b_ev (averages over ±x).
    pub fn even_components(&self, x: f64) -> (Complex64, Complex64) {
        let (up, lp) = self.components(x);
        let (um, lm) = self.components(-x);
        (0.5 * (up + um), 0.5 * (lp + lm))
    }

    /// Sample v₊ on a grid.
    pub fn sample(&self, grid: Grid) -> Vec2Field {
        Vec2Field::from_fn(grid, |x| self.components(x))
    }
}

/// a(0,k) and b(0,k) entering the origin trace of the propagator.
pub fn origin_components(k: f64, q: f64) -> Result<(Complex64, Complex64)> {
    let ge = GeneralizedEigenfunction::new(k, q)?;
    Ok(ge.components(0.0))
}

/// Threshold eigenstate for repulsive impurity (q < 0): eigenvalue 1 - q²,
/// profile |q|^{1/2} [(tanh(|x|+θ) - q)², -sech²(|x|+θ)]ᵗ e^{q(|x|+θ)},
/// rescaled so that ∫ u* σ₃ u = 1.
pub struct EigenstateNearOne {
    pub q: f64,
    pub mu_eig: f64,
    pub state: Vec2Field,
}

pub fn eigenstate_near_one(q: f64, grid: Grid) -> Result<EigenstateNearOne> {
    if q >= 0.0 {
        return Err(Error::Domain(format!(
            "no eigenvalue near 1 for attractive impurity (q = {q} >= 0)"
        )));
    }
    let theta = q.atanh();
    let raw = Vec2Field::from_fn(grid, |x| {
        let z = x.abs() + theta;
        let e = (q * z).exp() * q.abs().sqrt();
        let t = z.tanh();
        let s = 1.0 / z.cosh();
        (Complex64::new((t - q) * (t - q) * e, 0.0), Complex64::new(-s * s * e, 0.0))
    });
    // σ₃ normalization ∫ (u₁² - u₂²) = 1.
    let terms: Vec<f64> = (0..grid.n)
        .map(|j| grid.weight(j) * (raw.upper[j].re.powi(2) - raw.lower[j].re.powi(2)))
        .collect();
    let s3 = crate::grid::pairwise_sum(&terms);
    if s3 <= 0.0 {
        return Err(Error::Domain("σ₃ pairing not positive".into()));
    }
    let scale = 1.0 / s3.sqrt();
    let state = Vec2Field {
        grid,
        upper: raw.upper.iter().map(|v| v * scale).collect(),
        lower: raw.lower.iter().map(|v| v * scale).collect(),
    };
    Ok(EigenstateNearOne { q, mu_eig: 1.0 - q * q, state })
}

/// Newton root of the B-numerator factor v(k) from a given seed.
fn newton_v_root(mut k: Complex64, q: f64) -> Result<Complex64> {
    for _ in 0..60 {
        let f = b_numerator_v(k, q);
        if f.norm() < 1e-12 {
            return Ok(k);
        }
        let df = b_numerator_v_prime(k, q);
        if df.norm() < 1e-14 {
            break;
        }
        k -= f / df;
    }
    Err(Error::NoConvergence { what: format!("B-root Newton (q = {q})"), iterations: 60 })
}

/// Both roots of v(k) near k = -i for 0 < |q| <= 0.05, seeded at
/// k = -i ± i√q (q > 0) or k = -i ± √|q| (q < 0). Falls back to a local
/// grid search around the seed if Newton stalls. Eigenvalues sit at 1 + k².
pub fn find_b_roots_near_zero(q: f64) -> Result<(Complex64, Complex64)> {
    if q == 0.0 || q.abs() > 0.05 {
        return Err(Error::Domain(format!("root finder calibrated for 0 < |q| <= 0.05, got {q}")));
    }
    let off = q.abs().sqrt();
    let seeds = if q > 0.0 {
        [Complex64::new(0.0, -1.0 + off), Complex64::new(0.0, -1.0 - off)]
    } else {
        [Complex64::new(off, -1.0), Complex64::new(-off, -1.0)]
    };
    let mut roots = [Complex64::new(0.0, 0.0); 2];
    for (slot, seed) in seeds.into_iter().enumerate() {
        roots[slot] = match newton_v_root(seed, q) {
            Ok(r) => r,
            Err(_) => {
                // Companion search: best |v| on a small grid around the seed,
                // then Newton again.
                let mut best = (f64::INFINITY, seed);
                let m = 40;
                for a in 0..=m {
                    for b in 0..=m {
                        let cand = seed
                            + Complex64::new(
                                (a as f64 / m as f64 - 0.5) * 4.0 * off,
                                (b as f64 / m as f64 - 0.5) * 4.0 * off,
                            );
                        let f = b_numerator_v(cand, q).norm();
                        if f < best.0 {
                            best = (f, cand);
                        }
                    }
                }
                newton_v_root(best.1, q)?
            }
        };
    }
    Ok((roots[0], roots[1]))
}

/// Report of the conormal-structure bounds on the coefficient ratios at
/// real k > 0.
#[derive(Debug, Clone, Copy)]
pub struct ConormalReport {
    pub k: f64,
    pub q: f64,
    /// 1/B - k/(k - iq)
    pub r1: Complex64,
    /// C/B - iq/(k - iq)
    pub r2: Complex64,
    pub a_over_b: Complex64,
    pub d_over_b: Complex64,
    /// q + min(k², 1), the allowed size scale for r1, r2.
    pub scale: f64,
}

pub fn conormal_coefficient_check(k: f64, q: f64) -> Result<ConormalReport> {
    if k <= 0.0 {
        return Err(Error::Domain(format!("conormal check wants k > 0, got {k}")));
    }
    let kk = Complex64::new(k, 0.0);
    let c = scattering_coeffs(kk, q)?;
    let lead = kk / (kk - I * q);
    Ok(ConormalReport {
        k,
        q,
        r1: 1.0 / c.b - lead,
        r2: c.c / c.b - I * q / (kk - I * q),
        a_over_b: c.a / c.b,
        d_over_b: c.d / c.b,
        scale: q.abs() + (k * k).min(1.0),
    })
}
