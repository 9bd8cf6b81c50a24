//! Small numerical kernels: tridiagonal solvers, composite Simpson panels,
//! dense complex elimination for the 4x4 scattering system, and peak fitting.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Thomas algorithm for a complex tridiagonal system with constant
/// off-diagonals. Diagonal dominance holds for the Crank-Nicolson matrices
/// used here, so no pivoting is needed.
pub fn thomas_const_offdiag(
    diag: &[Complex64],
    off: Complex64,
    rhs: &[Complex64],
    out: &mut [Complex64],
    scratch_c: &mut Vec<Complex64>,
    scratch_d: &mut Vec<Complex64>,
) {
    let n = diag.len();
    scratch_c.resize(n, Complex64::new(0.0, 0.0));
    scratch_d.resize(n, Complex64::new(0.0, 0.0));

    let mut denom = diag[0];
    scratch_c[0] = off / denom;
    scratch_d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off * scratch_c[i - 1];
        scratch_c[i] = off / denom;
        scratch_d[i] = (rhs[i] - off * scratch_d[i - 1]) / denom;
    }
    out[n - 1] = scratch_d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = scratch_d[i] - scratch_c[i] * out[i + 1];
    }
}

/// LU factorization of a real tridiagonal matrix with partial pivoting
/// (LAPACK dgttrf layout: second superdiagonal fill-in). Needed because the
/// shifted operators in the coercivity solve are indefinite.
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    pivoted: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<TridiagLu> {
        let n = diag.len();
        assert_eq!(sub.len(), n - 1);
        assert_eq!(sup.len(), n - 1);
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut pivoted = vec![false; n - 1];

        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    return Err(Error::Domain("singular tridiagonal matrix".into()));
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - fact * d[i + 1];
                if i < n - 2 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                pivoted[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            return Err(Error::Domain("singular tridiagonal matrix".into()));
        }
        Ok(TridiagLu { dl, d, du, du2, pivoted })
    }

    pub fn solve(&self, rhs: &[f64], out: &mut Vec<f64>) {
        let n = self.d.len();
        out.clear();
        out.extend_from_slice(rhs);
        for i in 0..n - 1 {
            if self.pivoted[i] {
                out.swap(i, i + 1);
            }
            let t = self.dl[i] * out[i];
            out[i + 1] -= t;
        }
        out[n - 1] /= self.d[n - 1];
        if n >= 2 {
            out[n - 2] = (out[n - 2] - self.du[n - 2] * out[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            out[i] = (out[i] - self.du[i] * out[i + 1] - self.du2[i] * out[i + 2]) / self.d[i];
        }
    }
}

/// Composite Simpson on a uniform panel, f sampled at an odd number of nodes.
pub fn simpson_uniform_c(samples: &[Complex64], h: f64) -> Complex64 {
    let n = samples.len();
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd node count, got {n}");
    let mut terms: Vec<Complex64> = Vec::with_capacity(n);
    terms.push(samples[0]);
    for (j, s) in samples.iter().enumerate().take(n - 1).skip(1) {
        terms.push(if j % 2 == 1 { 4.0 * s } else { 2.0 * s });
    }
    terms.push(samples[n - 1]);
    crate::grid::pairwise_sum_c(&terms) * (h / 3.0)
}

/// A k-mesh made of uniform panels, each with an even interval count, for
/// composite Simpson quadrature of oscillatory integrals.
#[derive(Debug, Clone)]
pub struct PanelMesh {
    /// Node coordinates, strictly increasing, shared panel endpoints included once.
    pub nodes: Vec<f64>,
    /// (start index, node count, spacing) per panel; node counts are odd.
    panels: Vec<(usize, usize, f64)>,
}

impl PanelMesh {
    /// Build panels over [a, b] where `spacing(k)` bounds the local step.
    /// Panel boundaries double away from `a` so the step can grow smoothly.
    pub fn graded(a: f64, b: f64, first_panel_width: f64, spacing: impl Fn(f64) -> f64) -> PanelMesh {
        assert!(b > a);
        let mut nodes: Vec<f64> = Vec::new();
        let mut panels = Vec::new();
        let mut left = a;
        let mut width = first_panel_width.min(b - a);
        while left < b {
            let right = (left + width).min(b);
            let h_target = spacing(left).min(spacing(right));
            let mut m = ((right - left) / h_target).ceil() as usize;
            if m < 2 {
                m = 2;
            }
            if m % 2 == 1 {
                m += 1;
            }
            let h = (right - left) / m as f64;
            let start = if nodes.is_empty() {
                nodes.push(left);
                0
            } else {
                nodes.len() - 1
            };
            for j in 1..=m {
                nodes.push(left + j as f64 * h);
            }
            panels.push((start, m + 1, h));
            left = right;
            width *= 2.0;
        }
        PanelMesh { nodes, panels }
    }

    /// Composite Simpson of samples given at `self.nodes`.
    pub fn integrate_c(&self, samples: &[Complex64]) -> Complex64 {
        assert_eq!(samples.len(), self.nodes.len());
        let mut acc = Complex64::new(0.0, 0.0);
        for &(start, count, h) in &self.panels {
            acc += simpson_uniform_c(&samples[start..start + count], h);
        }
        acc
    }
}

/// Gaussian elimination with partial pivoting for a small dense complex
/// system (the 4x4 scattering system).
pub fn solve_dense_c(a: &mut [Vec<Complex64>], b: &mut [Complex64]) -> Result<()> {
    let n = b.len();
    for col in 0..n {
        let (piv, piv_mag) = (col..n)
            .map(|r| (r, a[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if piv_mag < 1e-300 {
            return Err(Error::Pole("singular coefficient matrix".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let t = f * a[col][c];
                a[r][c] -= t;
            }
            let t = f * b[col];
            b[r] -= t;
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col][c] * b[c];
        }
        b[col] = s / a[col][col];
    }
    Ok(())
}

/// Refine a local maximum at index j (0 < j < len-1) by a 3-point parabola.
/// Returns (abscissa offset in samples, refined peak value).
pub fn parabolic_peak(ym: f64, y0: f64, yp: f64) -> (f64, f64) {
    let denom = ym - 2.0 * y0 + yp;
    if denom.abs() < 1e-300 {
        return (0.0, y0);
    }
    let delta = 0.5 * (ym - yp) / denom;
    let value = y0 - 0.25 * (ym - yp) * delta;
    (delta, value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn thomas_solves_reference_system() {
        let n = 64;
        let diag: Vec<Complex64> =
            (0..n).map(|j| Complex64::new(4.0 + 0.01 * j as f64, 0.3)).collect();
        let off = Complex64::new(-1.0, 0.05);
        let x_true: Vec<Complex64> =
            (0..n).map(|j| Complex64::new((j as f64 * 0.1).sin(), (j as f64 * 0.2).cos())).collect();
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            rhs[j] = diag[j] * x_true[j];
            if j > 0 {
                rhs[j] += off * x_true[j - 1];
            }
            if j < n - 1 {
                rhs[j] += off * x_true[j + 1];
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        let (mut s1, mut s2) = (Vec::new(), Vec::new());
        thomas_const_offdiag(&diag, off, &rhs, &mut out, &mut s1, &mut s2);
        for j in 0..n {
            assert_abs_diff_eq!((out[j] - x_true[j]).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pivoted_lu_handles_indefinite_matrix() {
        // diag crosses zero; plain Thomas would break down.
        let n = 101;
        let diag: Vec<f64> = (0..n).map(|j| j as f64 - 50.3).collect();
        let sub = vec![1.0; n - 1];
        let sup = vec![1.5; n - 1];
        let x_true: Vec<f64> = (0..n).map(|j| ((j * 7 % 13) as f64) - 6.0).collect();
        let mut rhs = vec![0.0; n];
        for j in 0..n {
            rhs[j] = diag[j] * x_true[j];
            if j > 0 {
                rhs[j] += sub[j - 1] * x_true[j - 1];
            }
            if j < n - 1 {
                rhs[j] += sup[j] * x_true[j + 1];
            }
        }
        let lu = TridiagLu::factor(&sub, &diag, &sup).unwrap();
        let mut out = Vec::new();
        lu.solve(&rhs, &mut out);
        for j in 0..n {
            assert_abs_diff_eq!(out[j], x_true[j], epsilon = 1e-9);
        }
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let h = 0.1;
        let samples: Vec<Complex64> = (0..11)
            .map(|j| {
                let x = j as f64 * h;
                Complex64::new(x * x * x - 2.0 * x, 1.0 + x * x)
            })
            .collect();
        let got = simpson_uniform_c(&samples, h);
        assert_abs_diff_eq!(got.re, 0.25 - 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, 1.0 + 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn graded_mesh_integrates_scale_separated_integrand() {
        // 1/(k²+q²)-type variation near 0 plus a smooth tail.
        let q = 0.01;
        let mesh = PanelMesh::graded(0.0, 10.0, 10.0 * q, |k| (q / 10.0).max(k / 20.0).min(0.05));
        let samples: Vec<Complex64> = mesh
            .nodes
            .iter()
            .map(|&k| Complex64::new(k * k / (k * k + q * q) * (-k).exp(), 0.0))
            .collect();
        let got = mesh.integrate_c(&samples).re;
        // Reference computed with a very fine uniform Simpson mesh.
        let fine: Vec<Complex64> = (0..2_000_001)
            .map(|j| {
                let k = j as f64 * 10.0 / 2_000_000.0;
                Complex64::new(k * k / (k * k + q * q) * (-k).exp(), 0.0)
            })
            .collect();
        let want = simpson_uniform_c(&fine, 10.0 / 2_000_000.0).re;
        assert_abs_diff_eq!(got, want, epsilon = 1e-8);
    }

    #[test]
    fn dense_solve_roundtrip() {
        let a0 = vec![
            vec![Complex64::new(1.0, 2.0), Complex64::new(0.5, -1.0), Complex64::new(0.0, 0.1), Complex64::new(2.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.2), Complex64::new(1.0, 1.0), Complex64::new(-1.0, 0.4)],
            vec![Complex64::new(2.0, -0.3), Complex64::new(0.1, 0.0), Complex64::new(0.0, -2.0), Complex64::new(1.0, 1.0)],
            vec![Complex64::new(0.7, 0.7), Complex64::new(-0.2, 0.1), Complex64::new(1.5, 0.0), Complex64::new(0.0, 0.9)],
        ];
        let x_true = vec![
            Complex64::new(1.0, -1.0),
            Complex64::new(0.3, 0.4),
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.5, 2.0),
        ];
        let mut b: Vec<Complex64> = (0..4)
            .map(|r| (0..4).map(|c| a0[r][c] * x_true[c]).sum())
            .collect();
        let mut a = a0.clone();
        solve_dense_c(&mut a, &mut b).unwrap();
        for j in 0..4 {
            assert_abs_diff_eq!((b[j] - x_true[j]).norm(), 0.0, epsilon = 1e-12);
        }
    }
}
