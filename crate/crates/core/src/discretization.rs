//! Staggered radial grid, midpoint quadrature, the second-difference stencil,
//! sampled fields and the mode parameters shared by operator assembly.

use crate::error::{Error, Result};
use crate::specfun;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Default node count.
pub const DEFAULT_N: usize = 600;
/// Default truncation radius.
pub const DEFAULT_R_MAX: f64 = 30.0;

/// Midpoint grid r_j = (j − 1/2)h, j = 1..n, h = r_max/n, on (0, r_max].
///
/// No node sits at the origin, so singular potentials such as 1/r² never
/// need special handling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    n: usize,
    r_max: f64,
}

impl RadialGrid {
    /// Unchecked-resolution constructor: any n ≥ 1 and finite r_max > 0.
    pub fn new(n: usize, r_max: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("grid needs at least one node".into()));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Config(format!("r_max must be positive, got {r_max}")));
        }
        Ok(RadialGrid { n, r_max })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Spacing h, which is also the quadrature weight.
    pub fn spacing(&self) -> f64 {
        self.r_max / self.n as f64
    }

    /// Node r_{j+1} for a zero-based index j.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// The same radius with the node count doubled.
    pub fn refined(&self) -> Self {
        RadialGrid { n: 2 * self.n, r_max: self.r_max }
    }
}

/// Checked grid constructor with the resolution floor used for production
/// runs: n ≥ 16 and r_max ≥ 10.
pub fn make_grid(n: usize, r_max: f64) -> Result<RadialGrid> {
    if n < 16 {
        return Err(Error::Config(format!("n must be at least 16, got {n}")));
    }
    if !(r_max.is_finite() && r_max >= 10.0) {
        return Err(Error::Config(format!("r_max must be at least 10, got {r_max}")));
    }
    RadialGrid::new(n, r_max)
}

/// Complex samples of a radial function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: RadialGrid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Usage(format!(
                "field has {} samples but the grid has {} nodes",
                values.len(),
                grid.n()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Field { grid, values: vec![Complex64::new(0.0, 0.0); grid.n()] }
    }

    pub fn from_fn(grid: RadialGrid, mut f: impl FnMut(f64) -> Complex64) -> Self {
        let values = (0..grid.n()).map(|j| f(grid.node(j))).collect();
        Field { grid, values }
    }

    pub fn from_real_fn(grid: RadialGrid, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete L² norm.
    pub fn norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Pointwise multiplication by a real function of r.
    pub fn scaled_by(&self, mut f: impl FnMut(f64) -> f64) -> Field {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * f(self.grid.node(j)))
            .collect();
        Field { grid: self.grid, values }
    }

    /// self + c·other.
    pub fn add_scaled(&self, c: Complex64, other: &Field) -> Result<Field> {
        same_grid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(Field { grid: self.grid, values })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }

    /// Discrete L² norm restricted to nodes `skip..n-skip`.
    pub fn interior_norm(&self, skip: usize) -> f64 {
        let n = self.values.len();
        if n <= 2 * skip {
            return 0.0;
        }
        let s: f64 = self.values[skip..n - skip].iter().map(|v| v.norm_sqr()).sum();
        (self.grid.spacing() * s).sqrt()
    }
}

fn same_grid(a: &Field, b: &Field) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Usage(format!(
            "fields live on different grids ({:?} vs {:?})",
            a.grid, b.grid
        )));
    }
    Ok(())
}

/// Midpoint-rule inner product h·Σ a_j·conj(b_j).
pub fn quadrature(a: &Field, b: &Field) -> Result<Complex64> {
    same_grid(a, b)?;
    let s: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y.conj()).sum();
    Ok(s * a.grid.spacing())
}

/// Real symmetric tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// off[j] couples rows j and j+1.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut y = x[i] * self.diag[i];
                if i > 0 {
                    y += x[i - 1] * self.off[i - 1];
                }
                if i + 1 < n {
                    y += x[i + 1] * self.off[i];
                }
                y
            })
            .collect()
    }
}

/// Three-point stencil for −∂² with odd reflection through r = 0 and a
/// Dirichlet condition at r_max (ghost values −u₁ and −u_n).
pub fn second_derivative_stencil(grid: RadialGrid) -> SymTridiagonal {
    let n = grid.n();
    let h2 = grid.spacing() * grid.spacing();
    let mut diag = vec![2.0 / h2; n];
    diag[0] += 1.0 / h2;
    diag[n - 1] += 1.0 / h2;
    if n == 1 {
        diag[0] = 4.0 / h2;
    }
    let off = vec![-1.0 / h2; n.saturating_sub(1)];
    SymTridiagonal { diag, off }
}

/// Parameters of one angular mode: circulation Reynolds number α, angular
/// wavenumber k, imaginary spectral shift λ and dilation angle θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub alpha: f64,
    pub k: i64,
    pub lambda: f64,
    pub theta: f64,
}

impl ModeSpec {
    pub fn new(alpha: f64, k: i64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Usage("angular wavenumber k must be nonzero".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
        }
        Ok(ModeSpec { alpha, k, lambda: 0.0, theta: 0.0 })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda must be finite, got {lambda}")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    /// Imaginary dilation angle; must satisfy |θ| < π/8.
    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta.abs() < PI / 8.0) {
            return Err(Error::Domain(format!(
                "dilation angle must satisfy |theta| < pi/8, got {theta}"
            )));
        }
        self.theta = theta;
        Ok(self)
    }

    /// β_k = αk/(8π).
    pub fn beta(&self) -> f64 {
        self.alpha * self.k as f64 / (8.0 * PI)
    }

    /// ν_k = λ/β_k, undefined for β_k = 0.
    pub fn nu(&self) -> Option<f64> {
        let b = self.beta();
        (b != 0.0).then(|| self.lambda / b)
    }

    /// Critical-layer radius r_k with σ(r_k) = ν_k, when ν_k ∈ (0, 1).
    pub fn critical_radius(&self) -> Option<f64> {
        let nu = self.nu()?;
        specfun::sigma_inverse(nu).ok()
    }

    pub fn abs_k(&self) -> u32 {
        self.k.unsigned_abs() as u32
    }
}
