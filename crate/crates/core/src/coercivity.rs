//! Constrained Rayleigh-quotient minimization for the linearized quadratic
//! forms: min ⟨L_{q±}f, f⟩ / ||f||²_{H¹} over even f with the symplectic
//! constraints ⟨f₁, v⟩ = 0 (plus block) and ⟨f₂, ∂λvλ⟩ = 0 (minus block).
//! The impurity enters the forms variationally as -q f(0)².
//!
//! Primary path: bordered inverse-power iteration on the banded pencil.
//! Oracle: dense symmetric eigensolve of the same constrained forms on a
//! coarse grid.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::ground::{dlambda_ground_state_at, ground_state_at, GroundStateParams};
use crate::linalg::TridiagLu;

#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    fn matvec(&self, f: &[f64], out: &mut Vec<f64>) {
        let m = self.diag.len();
        out.clear();
        out.resize(m, 0.0);
        for j in 0..m {
            out[j] = self.diag[j] * f[j];
            if j > 0 {
                out[j] += self.off[j - 1] * f[j - 1];
            }
            if j < m - 1 {
                out[j] += self.off[j] * f[j + 1];
            }
        }
    }

    fn quad(&self, f: &[f64]) -> f64 {
        let m = self.diag.len();
        let mut s = 0.0;
        for j in 0..m {
            s += self.diag[j] * f[j] * f[j];
            if j < m - 1 {
                s += 2.0 * self.off[j] * f[j] * f[j + 1];
            }
        }
        s
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let m = self.diag.len();
        let mut out = DMatrix::zeros(m, m);
        for j in 0..m {
            out[(j, j)] = self.diag[j];
            if j < m - 1 {
                out[(j, j + 1)] = self.off[j];
                out[(j + 1, j)] = self.off[j];
            }
        }
        out
    }
}

/// Half-grid (x >= 0) even-sector discretization of one block.
pub struct EvenBlock {
    pub a: SymTridiag,
    pub gram: SymTridiag,
    pub constraint: Vec<f64>,
}

/// `coupling` = 6 for the plus block (L_{q+}), 2 for the minus block (L_{q-}).
fn build_block(q: f64, grid: Grid, coupling: f64, constraint_profile: impl Fn(f64) -> f64) -> EvenBlock {
    let p = GroundStateParams::new(1.0, q).expect("|q| < 1");
    let dx = grid.dx;
    // Unknowns f_0 .. f_{m-2} at x_j = j dx; f at the wall is Dirichlet 0.
    let mh = grid.center() + 1;
    let m = mh - 1;
    let wj = |j: usize| if j == 0 { dx } else { 2.0 * dx };

    // Full-line stiffness ∫f'² = 2 Σ (f_{j+1}-f_j)²/dx for even f.
    let mut k_diag = vec![0.0; m];
    let mut k_off = vec![0.0; m - 1];
    for j in 0..m {
        // interval [j, j+1] always exists (the wall node is implicit);
        // interval [j-1, j] exists for j >= 1.
        k_diag[j] = if j == 0 { 2.0 / dx } else { 4.0 / dx };
        if j + 1 < m {
            k_off[j] = -2.0 / dx;
        }
    }

    let mut a_diag = vec![0.0; m];
    let mut a_off = vec![0.0; m - 1];
    let mut g_diag = vec![0.0; m];
    let mut g_off = vec![0.0; m - 1];
    for j in 0..m {
        let x = j as f64 * dx;
        let v = ground_state_at(p, x);
        let pot = wj(j) * (1.0 - coupling * v * v);
        a_diag[j] = 0.5 * (k_diag[j] + pot);
        g_diag[j] = wj(j) + k_diag[j];
        if j + 1 < m {
            a_off[j] = 0.5 * k_off[j];
            g_off[j] = k_off[j];
        }
    }
    // δ impurity: -q f(0)² in the quadratic form.
    a_diag[0] -= q;

    let constraint: Vec<f64> =
        (0..m).map(|j| wj(j) * constraint_profile(j as f64 * dx)).collect();

    EvenBlock {
        a: SymTridiag { diag: a_diag, off: a_off },
        gram: SymTridiag { diag: g_diag, off: g_off },
        constraint,
    }
}

pub fn plus_block(q: f64, grid: Grid) -> EvenBlock {
    let p = GroundStateParams::new(1.0, q).expect("|q| < 1");
    build_block(q, grid, 6.0, move |x| ground_state_at(p, x))
}

pub fn minus_block(q: f64, grid: Grid) -> EvenBlock {
    let p = GroundStateParams::new(1.0, q).expect("|q| < 1");
    build_block(q, grid, 2.0, move |x| dlambda_ground_state_at(p, x))
}

/// Smallest pencil eigenvalue of (A, M) restricted to {cᵀf = 0} by bordered
/// inverse-power iteration with shift σ.
fn constrained_min_eig(
    block: &EvenBlock,
    constrained: bool,
    sigma: f64,
) -> Result<f64> {
    let m = block.a.diag.len();
    let shifted_diag: Vec<f64> = block
        .a
        .diag
        .iter()
        .zip(&block.gram.diag)
        .map(|(a, g)| a - sigma * g)
        .collect();
    let shifted_off: Vec<f64> = block
        .a
        .off
        .iter()
        .zip(&block.gram.off)
        .map(|(a, g)| a - sigma * g)
        .collect();
    let lu = TridiagLu::factor(&shifted_off, &shifted_diag, &shifted_off)?;

    let mut z = Vec::new();
    if constrained {
        lu.solve(&block.constraint, &mut z);
    }
    let czdot = if constrained {
        block.constraint.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()
    } else {
        1.0
    };

    // Deterministic start: a gaussian bump, projected onto the constraint.
    let mut f: Vec<f64> = (0..m).map(|j| (-(j as f64 / m as f64) * 6.0).exp()).collect();
    if constrained {
        let cf: f64 = block.constraint.iter().zip(&f).map(|(a, b)| a * b).sum();
        let cc: f64 = block.constraint.iter().map(|a| a * a).sum();
        for j in 0..m {
            f[j] -= cf / cc * block.constraint[j];
        }
    }

    let mut mf = Vec::new();
    let mut y = Vec::new();
    let mut theta_prev = f64::INFINITY;
    for iter in 0..5000 {
        block.gram.matvec(&f, &mut mf);
        lu.solve(&mf, &mut y);
        if constrained {
            let cy: f64 = block.constraint.iter().zip(&y).map(|(a, b)| a * b).sum();
            let nu = cy / czdot;
            for j in 0..m {
                y[j] -= nu * z[j];
            }
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in y.iter_mut() {
            *v /= norm;
        }
        std::mem::swap(&mut f, &mut y);
        let theta = block.a.quad(&f) / block.gram.quad(&f);
        if (theta - theta_prev).abs() <= 1e-13 * theta.abs().max(1.0) {
            return Ok(theta);
        }
        theta_prev = theta;
        if iter == 4999 {
            break;
        }
    }
    Err(Error::NoConvergence { what: "constrained inverse-power iteration".into(), iterations: 5000 })
}

/// Constrained minimum of each block's Rayleigh quotient against the H¹
/// norm, and the overall coercivity constant min(m₊, m₋).
pub fn coercivity_blocks(q: f64, grid: Grid) -> Result<(f64, f64)> {
    if q.abs() > 0.1 {
        return Err(Error::Domain(format!("coercivity check calibrated for |q| <= 0.1, got {q}")));
    }
    let mp = constrained_min_eig(&plus_block(q, grid), true, 0.0)?;
    let mm = constrained_min_eig(&minus_block(q, grid), true, 0.0)?;
    Ok((mp, mm))
}

pub fn coercivity_estimate(q: f64, grid: Grid) -> Result<f64> {
    let (mp, mm) = coercivity_blocks(q, grid)?;
    Ok(mp.min(mm))
}

/// Unconstrained minimum of the plus block (negative: the linearization has
/// a bound state below the continuum).
pub fn unconstrained_plus_minimum(q: f64, grid: Grid) -> Result<f64> {
    constrained_min_eig(&plus_block(q, grid), false, -2.0)
}

/// Dense-eigensolver oracle for the same constrained minimum (intended for
/// coarse grids). The constraint is removed by a Householder basis of its
/// orthogonal complement, the Gram factor by Cholesky.
pub fn coercivity_dense_oracle(q: f64, grid: Grid) -> Result<f64> {
    let mut best = f64::INFINITY;
    for block in [plus_block(q, grid), minus_block(q, grid)] {
        best = best.min(dense_constrained_min(&block)?);
    }
    Ok(best)
}

fn dense_constrained_min(block: &EvenBlock) -> Result<f64> {
    let m = block.a.diag.len();
    let a = block.a.to_dense();
    let g = block.gram.to_dense();

    // Householder vector u with (I - 2uuᵀ/uᵀu) c = ||c|| e₁.
    let c = nalgebra::DVector::from_column_slice(&block.constraint);
    let norm = c.norm();
    let mut u = c.clone();
    u[0] -= norm * if c[0] >= 0.0 { -1.0 } else { 1.0 };
    let uu = u.dot(&u);
    let h = DMatrix::identity(m, m) - (&u * u.transpose()) * (2.0 / uu);

    let b = (&h * &a * &h).view((1, 1), (m - 1, m - 1)).into_owned();
    let gg = (&h * &g * &h).view((1, 1), (m - 1, m - 1)).into_owned();

    let chol = gg
        .cholesky()
        .ok_or_else(|| Error::Domain("H¹ Gram not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&b)
        .ok_or_else(|| Error::Domain("triangular solve failed".into()))?;
    let y = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Domain("triangular solve failed".into()))?;
    let w = (&y + y.transpose()) * 0.5;
    let eig = w.symmetric_eigenvalues();
    Ok(eig.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Apply the discrete L_{q-} = ½(1 - ∂² - 2v² - 2qδ₀) (jump condition folded
/// into the center stencil) to samples of a real function.
pub fn apply_l_minus(values: &[f64], q: f64, grid: Grid) -> Vec<f64> {
    let p = GroundStateParams::new(1.0, q).expect("|q| < 1");
    let n = grid.n;
    let dx2 = grid.dx * grid.dx;
    let j0 = grid.center();
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        let v = ground_state_at(p, grid.x(j));
        let mut d2 = (values[j - 1] - 2.0 * values[j] + values[j + 1]) / dx2;
        if j == j0 {
            d2 += 2.0 * q / grid.dx * values[j];
        }
        out[j] = 0.5 * (values[j] - d2 - 2.0 * v * v * values[j]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn kernel_state_is_annihilated_by_l_minus() {
        // L_{q-} v = 0 up to discretization; residual decays at second order.
        let q = 0.05;
        let res_at = |n: usize| -> f64 {
            let g = make_grid(-40.0, 40.0, n).unwrap();
            let p = GroundStateParams::new(1.0, q).unwrap();
            let vals: Vec<f64> = g.xs().map(|x| ground_state_at(p, x)).collect();
            let r = apply_l_minus(&vals, q, g);
            let terms: Vec<f64> = (1..n - 1).map(|j| g.weight(j) * r[j] * r[j]).collect();
            crate::grid::pairwise_sum(&terms).sqrt()
        };
        let coarse = res_at(4001);
        let fine = res_at(8001);
        assert!(coarse < 1e-3, "residual {coarse}");
        assert!(coarse / fine > 2.5, "not O(dx²): {coarse} vs {fine}");
    }

    #[test]
    fn coercivity_constant_at_q_zero() {
        let g = make_grid(-40.0, 40.0, 4001).unwrap();
        let min = coercivity_estimate(0.0, g).unwrap();
        assert!(min >= 0.0555 * 0.99, "coercivity constant {min}");
        // The bound is a lower bound; the true constant is below 1/2
        // (continuum Rayleigh limit).
        assert!(min < 0.5, "constant {min} suspiciously large");
    }

    #[test]
    fn unconstrained_plus_block_is_negative() {
        let g = make_grid(-40.0, 40.0, 4001).unwrap();
        let min = unconstrained_plus_minimum(0.0, g).unwrap();
        assert!(min < 0.0, "L₊ unconstrained minimum {min} not negative");
    }

    #[test]
    fn impurity_case_positive_and_matches_dense_oracle() {
        let coarse = make_grid(-40.0, 40.0, 1001).unwrap();
        for q in [0.0, 0.05, -0.05] {
            let banded = coercivity_estimate(q, coarse).unwrap();
            let dense = coercivity_dense_oracle(q, coarse).unwrap();
            assert!(banded > 0.0, "q = {q}: constrained minimum {banded}");
            assert!(
                (banded - dense).abs() <= 1e-3,
                "q = {q}: banded {banded} vs dense {dense}"
            );
        }
    }
}
