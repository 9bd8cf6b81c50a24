//! Effective soliton-parameter dynamics in the impurity field:
//! a' = v, v' = ½ q ∂ₓ(sech²)(a), γ' = ½ + v²/2 + q sech²(a) + ½ q a ∂ₓ(sech²)(a),
//! plus the amplitude diagnostic and the peak-spacing period estimator used
//! by several experiments.

use crate::error::{Error, Result};
use crate::linalg::parabolic_peak;
use crate::pde::TimeSeries;

#[derive(Debug, Clone, Copy)]
pub struct SolitonState {
    pub t: f64,
    pub a: f64,
    pub v: f64,
    pub gamma: f64,
}

fn rhs(q: f64, s: &[f64; 3]) -> [f64; 3] {
    let (a, v) = (s[0], s[1]);
    let sech2 = 1.0 / (a.cosh() * a.cosh());
    let dsech2 = -2.0 * sech2 * a.tanh();
    [
        v,
        0.5 * q * dsech2,
        0.5 + 0.5 * v * v + q * sech2 + 0.5 * q * a * dsech2,
    ]
}

/// Classical RK4 trajectory of (a, v, γ) from (a0, v0, 0).
pub fn integrate_soliton_ode(
    a0: f64,
    v0: f64,
    q: f64,
    t_max: f64,
    dt: f64,
) -> Result<Vec<SolitonState>> {
    if !(dt > 0.0 && dt <= 1e-2) {
        return Err(Error::Config(format!("RK4 step must satisfy 0 < dt <= 1e-2, got {dt}")));
    }
    let steps = (t_max / dt).round() as usize;
    let mut s = [a0, v0, 0.0];
    let mut out = Vec::with_capacity(steps + 1);
    out.push(SolitonState { t: 0.0, a: s[0], v: s[1], gamma: s[2] });
    for step in 1..=steps {
        let k1 = rhs(q, &s);
        let s2 = [s[0] + 0.5 * dt * k1[0], s[1] + 0.5 * dt * k1[1], s[2] + 0.5 * dt * k1[2]];
        let k2 = rhs(q, &s2);
        let s3 = [s[0] + 0.5 * dt * k2[0], s[1] + 0.5 * dt * k2[1], s[2] + 0.5 * dt * k2[2]];
        let k3 = rhs(q, &s3);
        let s4 = [s[0] + dt * k3[0], s[1] + dt * k3[1], s[2] + dt * k3[2]];
        let k4 = rhs(q, &s4);
        for i in 0..3 {
            s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(SolitonState { t: step as f64 * dt, a: s[0], v: s[1], gamma: s[2] });
    }
    Ok(out)
}

/// Conserved energy of the (a, v) subsystem: v²/2 - (q/2) sech²(a).
pub fn center_energy(q: f64, s: &SolitonState) -> f64 {
    0.5 * s.v * s.v - 0.5 * q / (s.a.cosh() * s.a.cosh())
}

/// Rescaled amplitude diagnostic scale·(|u(a(t),t)| - 1) from a series that
/// carries the center track.
pub fn amplitude_diagnostic(series: &TimeSeries, scale: f64) -> Result<Vec<f64>> {
    let amp = series
        .amp_at_center
        .as_ref()
        .ok_or_else(|| Error::InsufficientData("series has no center track".into()))?;
    Ok(amp.iter().map(|a| scale * (a - 1.0)).collect())
}

/// Mean spacing of successive local maxima after a 5-sample moving average,
/// with parabolic peak refinement. Needs at least 3 interior maxima.
pub fn period_estimate(series: &[f64], times: &[f64]) -> Result<f64> {
    if series.len() != times.len() || series.len() < 7 {
        return Err(Error::InsufficientData(format!(
            "period estimate needs matched series of length >= 7, got {} and {}",
            series.len(),
            times.len()
        )));
    }
    let n = series.len();
    let mut smooth = vec![0.0; n];
    for j in 0..n {
        let lo = j.saturating_sub(2);
        let hi = (j + 2).min(n - 1);
        smooth[j] = series[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
    }
    let mut peaks = Vec::new();
    for j in 2..n - 2 {
        if smooth[j] > smooth[j - 1] && smooth[j] >= smooth[j + 1] {
            let (delta, _) = parabolic_peak(smooth[j - 1], smooth[j], smooth[j + 1]);
            let dt = times[j + 1] - times[j];
            peaks.push(times[j] + delta.clamp(-1.0, 1.0) * dt);
        }
    }
    if peaks.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "found only {} interior maxima, need 3",
            peaks.len()
        )));
    }
    let spacings: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(spacings.iter().sum::<f64>() / spacings.len() as f64)
}
