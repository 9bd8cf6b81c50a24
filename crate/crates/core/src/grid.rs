//! Uniform symmetric grids, complex fields, and the real inner product /
//! symplectic form used throughout.
//!
//! Conventions: fields are complex functions sampled on a uniform mesh with a
//! node pinned at x = 0 (the impurity site). All x-integrals are trapezoid
//! sums with pairwise (deterministic) reduction; derivatives are centered
//! second-order differences, one-sided at the box ends.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform 1-D mesh on [xmin, xmax] with an odd number of nodes so that
/// x = 0 is exactly the center node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub xmin: f64,
    pub xmax: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid {
    pub fn x(&self, j: usize) -> f64 {
        self.xmin + j as f64 * self.dx
    }

    /// Index of the node at x = 0.
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.x(j))
    }

    /// Trapezoid weight of node j.
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.n - 1 {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Same span, twice the resolution (n -> 2n-1). Keeps the center node.
    pub fn refined(&self) -> Grid {
        make_grid(self.xmin, self.xmax, 2 * self.n - 1).expect("refinement keeps invariants")
    }
}

/// Build a grid. Requires an odd node count and a symmetric box so that x = 0
/// lands exactly on a node.
pub fn make_grid(xmin: f64, xmax: f64, n: usize) -> Result<Grid> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::Config(format!("grid size must be odd and >= 3, got {n}")));
    }
    if !(xmin < 0.0 && 0.0 < xmax) {
        return Err(Error::Config(format!("grid must straddle 0, got [{xmin}, {xmax}]")));
    }
    if xmin != -xmax {
        return Err(Error::Config(format!(
            "0 is not a mesh node: default policy requires xmin = -xmax, got [{xmin}, {xmax}]"
        )));
    }
    let dx = (xmax - xmin) / (n as f64 - 1.0);
    Ok(Grid { xmin, xmax, n, dx })
}

/// The default scenario grid: [-40, 40] with dx = 0.02.
pub fn default_grid() -> Grid {
    make_grid(-40.0, 40.0, 4001).expect("default grid is valid")
}

/// Complex-valued function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: Grid) -> Self {
        ComplexField { grid, values: vec![Complex64::new(0.0, 0.0); grid.n] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values: Vec<Complex64> = grid.xs().map(f).collect();
        debug_assert!(values.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        ComplexField { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn at0(&self) -> Complex64 {
        self.values[self.grid.center()]
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        ComplexField { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn add(&self, other: &ComplexField) -> Result<Self> {
        same_grid(self, other)?;
        Ok(ComplexField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &ComplexField) -> Result<Self> {
        same_grid(self, other)?;
        Ok(ComplexField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// 2-vector-valued complex function (linearized-operator states).
#[derive(Debug, Clone)]
pub struct Vec2Field {
    pub grid: Grid,
    pub upper: Vec<Complex64>,
    pub lower: Vec<Complex64>,
}

impl Vec2Field {
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> (Complex64, Complex64)) -> Self {
        let mut upper = Vec::with_capacity(grid.n);
        let mut lower = Vec::with_capacity(grid.n);
        for x in grid.xs() {
            let (a, b) = f(x);
            upper.push(a);
            lower.push(b);
        }
        Vec2Field { grid, upper, lower }
    }

    pub fn sup_norm(&self) -> f64 {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }
}

pub fn same_grid(u: &ComplexField, v: &ComplexField) -> Result<()> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Pairwise (cascade) summation: deterministic reduction order, O(eps log n)
/// error growth.
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    if terms.len() <= 32 {
        return terms.iter().sum();
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
}

pub fn pairwise_sum_c(terms: &[Complex64]) -> Complex64 {
    if terms.len() <= 32 {
        return terms.iter().sum();
    }
    let mid = terms.len() / 2;
    pairwise_sum_c(&terms[..mid]) + pairwise_sum_c(&terms[mid..])
}

/// Trapezoid rule for grid samples.
pub fn trapezoid(grid: &Grid, samples: &[f64]) -> f64 {
    debug_assert_eq!(samples.len(), grid.n);
    let terms: Vec<f64> = samples.iter().enumerate().map(|(j, s)| grid.weight(j) * s).collect();
    pairwise_sum(&terms)
}

pub fn trapezoid_c(grid: &Grid, samples: &[Complex64]) -> Complex64 {
    debug_assert_eq!(samples.len(), grid.n);
    let terms: Vec<Complex64> =
        samples.iter().enumerate().map(|(j, s)| grid.weight(j) * s).collect();
    pairwise_sum_c(&terms)
}

/// Trapezoid integral of a complex field.
pub fn integrate(u: &ComplexField) -> Complex64 {
    trapezoid_c(&u.grid, &u.values)
}

/// ∫ |u|² by the trapezoid rule.
pub fn l2_norm_sq(u: &ComplexField) -> f64 {
    let sq: Vec<f64> = u.values.iter().map(|v| v.norm_sqr()).collect();
    trapezoid(&u.grid, &sq)
}

/// Centered-difference derivative samples (one-sided at the ends).
pub fn derivative(u: &ComplexField) -> Vec<Complex64> {
    let n = u.grid.n;
    let dx = u.grid.dx;
    let v = &u.values;
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    d[0] = (v[1] - v[0]) / dx;
    d[n - 1] = (v[n - 1] - v[n - 2]) / dx;
    for j in 1..n - 1 {
        d[j] = (v[j + 1] - v[j - 1]) / (2.0 * dx);
    }
    d
}

/// ∫ (|u|² + |u'|²) with the centered-difference derivative.
pub fn h1_norm_sq(u: &ComplexField) -> f64 {
    let d = derivative(u);
    let sq: Vec<f64> =
        u.values.iter().zip(&d).map(|(v, dv)| v.norm_sqr() + dv.norm_sqr()).collect();
    trapezoid(&u.grid, &sq)
}

/// Real inner product ⟨u,v⟩ = Re ∫ u v̄.
pub fn inner(u: &ComplexField, v: &ComplexField) -> Result<f64> {
    same_grid(u, v)?;
    let terms: Vec<f64> = u
        .values
        .iter()
        .zip(&v.values)
        .enumerate()
        .map(|(j, (a, b))| u.grid.weight(j) * (a * b.conj()).re)
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Symplectic form ω(u,v) = ⟨iu, v⟩ = Im ∫ ū v. Antisymmetric.
pub fn symplectic_form(u: &ComplexField, v: &ComplexField) -> Result<f64> {
    same_grid(u, v)?;
    let terms: Vec<f64> = u
        .values
        .iter()
        .zip(&v.values)
        .enumerate()
        .map(|(j, (a, b))| u.grid.weight(j) * (a.conj() * b).im)
        .collect();
    Ok(pairwise_sum(&terms))
}
