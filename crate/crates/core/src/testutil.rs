//! Shared helpers for unit tests (least-squares slope fits, phase
//! unwrapping). Compiled only for test builds.

use num_complex::Complex64;

pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

pub fn unwrap_phase(series: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut prev = series[0].arg();
    let mut acc = prev;
    out.push(acc);
    for v in &series[1..] {
        let a = v.arg();
        let mut d = a - prev;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        acc += d;
        prev = a;
        out.push(acc);
    }
    out
}
