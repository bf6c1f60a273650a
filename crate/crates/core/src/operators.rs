//! Matrix assembly of the radial operators on a [`RadialGrid`], plus O(n)
//! grid transforms for the kernel operator and the wave operator and its
//! adjoint.
//!
//! Local operators (the Schrödinger-type part and the restricted k=1 model)
//! are stored as tridiagonal matrices; anything containing the Green's
//! function kernel is dense.

use crate::discretization::{second_derivative_stencil, Field, ModeSpec, RadialGrid};
use crate::error::{Error, Result};
use crate::specfun;
use faer::Mat;
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which operator a matrix discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// Local Schrödinger-type part −∂² + (k²−1/4)/r² + r²/16 − 1/2.
    Schrodinger,
    /// Green's function kernel of −∂² + (k²−1/4)/r².
    Kernel,
    /// σ − g·Kernel[g·].
    Skew,
    /// Schrodinger + iβ·Skew − iλ.
    Full,
    /// Restricted k=1 model Schrodinger + f + iβσ − iλ.
    RestrictedModel,
    /// Full or restricted operator after complex dilation.
    Deformed,
    /// Dirichlet Green's function on (0, r_k).
    TruncatedKernel,
}

/// Storage of an assembled operator.
#[derive(Debug, Clone)]
pub enum Storage {
    Tridiagonal { sub: Vec<Complex64>, diag: Vec<Complex64>, sup: Vec<Complex64> },
    Dense(Mat<Complex64>),
}

/// An assembled operator tagged with its grid, kind and mode parameters.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub grid: RadialGrid,
    pub kind: OperatorKind,
    pub mode: ModeSpec,
    pub storage: Storage,
}

impl OperatorMatrix {
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn is_tridiagonal(&self) -> bool {
        matches!(self.storage, Storage::Tridiagonal { .. })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Tridiagonal { sub, diag, sup } => {
                if i == j {
                    diag[i]
                } else if i == j + 1 {
                    sub[j]
                } else if j == i + 1 {
                    sup[i]
                } else {
                    ZERO
                }
            }
        }
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Tridiagonal { .. } => Mat::from_fn(self.n(), self.n(), |i, j| self.get(i, j)),
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.norm_l2(),
            Storage::Tridiagonal { sub, diag, sup } => sub
                .iter()
                .chain(diag)
                .chain(sup)
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub fn apply_values(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        match &self.storage {
            Storage::Dense(m) => (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)] * x[j]).sum())
                .collect(),
            Storage::Tridiagonal { sub, diag, sup } => (0..n)
                .map(|i| {
                    let mut y = diag[i] * x[i];
                    if i > 0 {
                        y += sub[i - 1] * x[i - 1];
                    }
                    if i + 1 < n {
                        y += sup[i] * x[i + 1];
                    }
                    y
                })
                .collect(),
        }
    }

    pub fn apply(&self, w: &Field) -> Result<Field> {
        if w.grid() != self.grid {
            return Err(Error::Usage("field and operator live on different grids".into()));
        }
        Field::new(self.grid, self.apply_values(w.values()))
    }

    /// Largest |M_ij − M_ji|; zero for complex-symmetric matrices.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        match &self.storage {
            Storage::Tridiagonal { sub, sup, .. } => {
                for j in 0..n.saturating_sub(1) {
                    worst = worst.max((sub[j] - sup[j]).norm());
                }
            }
            Storage::Dense(m) => {
                for i in 0..n {
                    for j in 0..i {
                        worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
                    }
                }
            }
        }
        worst
    }
}

fn require_nonzero_k(k: i64) -> Result<u32> {
    if k == 0 {
        Err(Error::Usage("angular wavenumber k must be nonzero".into()))
    } else {
        Ok(k.unsigned_abs() as u32)
    }
}

/// (k² − 1/4)/r² + r²/16 − 1/2.
fn schrodinger_potential(k: u32, r: f64) -> f64 {
    let k2 = (k as f64) * (k as f64);
    (k2 - 0.25) / (r * r) + r * r / 16.0 - 0.5
}

fn tridiagonal_from_stencil(
    grid: RadialGrid,
    stencil_scale: Complex64,
    mut potential: impl FnMut(f64) -> Result<Complex64>,
) -> Result<Storage> {
    let st = second_derivative_stencil(grid);
    let diag = st
        .diag
        .iter()
        .enumerate()
        .map(|(j, d)| Ok(stencil_scale * *d + potential(grid.node(j))?))
        .collect::<Result<Vec<_>>>()?;
    let off: Vec<Complex64> = st.off.iter().map(|o| stencil_scale * *o).collect();
    Ok(Storage::Tridiagonal { sub: off.clone(), diag, sup: off })
}

/// Schrödinger-type part −∂² + (k²−1/4)/r² + r²/16 − 1/2.
pub fn assemble_schrodinger(k: i64, grid: RadialGrid) -> Result<OperatorMatrix> {
    let ak = require_nonzero_k(k)?;
    let storage = tridiagonal_from_stencil(grid, Complex64::new(1.0, 0.0), |r| {
        Ok(Complex64::new(schrodinger_potential(ak, r), 0.0))
    })?;
    Ok(OperatorMatrix {
        grid,
        kind: OperatorKind::Schrodinger,
        mode: ModeSpec::new(0.0, k)?,
        storage,
    })
}

/// Nyström weight of the Green's function kernel between nodes r and s,
/// including the quadrature weight h.
fn kernel_entry(k: u32, r: f64, s: f64, h: f64) -> f64 {
    let ratio = if r < s { r / s } else { s / r };
    ratio.powi(k as i32) * (r * s).sqrt() * h / (2.0 * k as f64)
}

fn kernel_real(k: u32, grid: RadialGrid) -> Mat<f64> {
    let nodes = grid.nodes();
    let h = grid.spacing();
    Mat::from_fn(grid.n(), grid.n(), |i, j| kernel_entry(k, nodes[i], nodes[j], h))
}

/// Green's function kernel (1/2|k|)·min(r/s, s/r)^{|k|}(rs)^{1/2} by
/// midpoint Nyström.
pub fn assemble_kernel(k: i64, grid: RadialGrid) -> Result<OperatorMatrix> {
    let ak = require_nonzero_k(k)?;
    let kr = kernel_real(ak, grid);
    Ok(OperatorMatrix {
        grid,
        kind: OperatorKind::Kernel,
        mode: ModeSpec::new(0.0, k)?,
        storage: Storage::Dense(Mat::from_fn(grid.n(), grid.n(), |i, j| {
            Complex64::new(kr[(i, j)], 0.0)
        })),
    })
}

fn skew_real(k: u32, grid: RadialGrid) -> Result<Mat<f64>> {
    let nodes = grid.nodes();
    let sig = nodes.iter().map(|&r| specfun::sigma(r)).collect::<Result<Vec<_>>>()?;
    let g = nodes.iter().map(|&r| specfun::gaussian(r)).collect::<Result<Vec<_>>>()?;
    let mut b = kernel_real(k, grid);
    for i in 0..grid.n() {
        for j in 0..grid.n() {
            b[(i, j)] *= -(g[i] * g[j]);
        }
        b[(i, i)] += sig[i];
    }
    Ok(b)
}

/// σ − g·Kernel[g·].
pub fn assemble_skew(k: i64, grid: RadialGrid) -> Result<OperatorMatrix> {
    let ak = require_nonzero_k(k)?;
    let b = skew_real(ak, grid)?;
    Ok(OperatorMatrix {
        grid,
        kind: OperatorKind::Skew,
        mode: ModeSpec::new(0.0, k)?,
        storage: Storage::Dense(Mat::from_fn(grid.n(), grid.n(), |i, j| {
            Complex64::new(b[(i, j)], 0.0)
        })),
    })
}

/// Full mode operator Schrodinger + iβ_k·Skew − iλ (undeformed).
pub fn assemble_full(mode: ModeSpec, grid: RadialGrid) -> Result<OperatorMatrix> {
    let ak = require_nonzero_k(mode.k)?;
    if mode.theta != 0.0 {
        return Err(Error::Usage(
            "mode has a nonzero dilation angle; use assemble_deformed".into(),
        ));
    }
    let beta = mode.beta();
    let shift = -I * mode.lambda;
    if beta == 0.0 {
        let storage = tridiagonal_from_stencil(grid, Complex64::new(1.0, 0.0), |r| {
            Ok(schrodinger_potential(ak, r) + shift)
        })?;
        return Ok(OperatorMatrix { grid, kind: OperatorKind::Full, mode, storage });
    }
    let b = skew_real(ak, grid)?;
    let st = second_derivative_stencil(grid);
    let n = grid.n();
    let mut m = Mat::from_fn(n, n, |i, j| I * beta * b[(i, j)]);
    for i in 0..n {
        m[(i, i)] += st.diag[i] + schrodinger_potential(ak, grid.node(i)) + shift;
        if i + 1 < n {
            m[(i, i + 1)] += st.off[i];
            m[(i + 1, i)] += st.off[i];
        }
    }
    Ok(OperatorMatrix { grid, kind: OperatorKind::Full, mode, storage: Storage::Dense(m) })
}

/// Restricted k=±1 model: Schrodinger₁ + f + i(β₁σ − λ).
pub fn assemble_restricted(mode: ModeSpec, grid: RadialGrid) -> Result<OperatorMatrix> {
    if mode.k.abs() != 1 {
        return Err(Error::Usage(format!(
            "restricted model is defined for |k| = 1 only, got k = {}",
            mode.k
        )));
    }
    let beta = mode.beta();
    let storage = tridiagonal_from_stencil(grid, Complex64::new(1.0, 0.0), |r| {
        let real = schrodinger_potential(1, r) + specfun::commutator_potential(r)?;
        Ok(Complex64::new(real, beta * specfun::sigma(r)? - mode.lambda))
    })?;
    Ok(OperatorMatrix { grid, kind: OperatorKind::RestrictedModel, mode, storage })
}

/// Operator conjugated by the dilation r → re^{iθ} with θ = mode.theta.
///
/// For |k| = 1 this deforms the restricted model, for |k| ≥ 2 the full
/// operator. At θ = 0 the result coincides with the undeformed assembly.
pub fn assemble_deformed(mode: ModeSpec, grid: RadialGrid) -> Result<OperatorMatrix> {
    let ak = require_nonzero_k(mode.k)?;
    let theta = mode.theta;
    if !(theta.abs() < PI / 8.0) {
        return Err(Error::Domain(format!(
            "dilation angle {theta} lies outside the analytic strip |theta| < pi/8"
        )));
    }
    let beta = mode.beta();
    let rot = Complex64::from_polar(1.0, 2.0 * theta);
    let inv_rot = rot.conj();
    let shift = -I * mode.lambda;
    let arg = |r: f64| 0.25 * r * r * rot;
    if ak == 1 {
        let storage = tridiagonal_from_stencil(grid, inv_rot, |r| {
            let z = arg(r);
            Ok(35.0 * inv_rot / (4.0 * r * r) + r * r * rot / 16.0 - 0.5
                + specfun::deformed_correction(z)?
                + I * beta * specfun::complex_sigma(z)?
                + shift)
        })?;
        return Ok(OperatorMatrix { grid, kind: OperatorKind::Deformed, mode, storage });
    }
    let k2 = (ak as f64) * (ak as f64);
    let potential = |r: f64| -> Result<Complex64> {
        let z = arg(r);
        Ok((k2 - 0.25) * inv_rot / (r * r) + r * r * rot / 16.0 - 0.5
            + I * beta * specfun::complex_sigma(z)?
            + shift)
    };
    if beta == 0.0 {
        let storage = tridiagonal_from_stencil(grid, inv_rot, potential)?;
        return Ok(OperatorMatrix { grid, kind: OperatorKind::Deformed, mode, storage });
    }
    let n = grid.n();
    let nodes = grid.nodes();
    let half = nodes
        .iter()
        .map(|&r| specfun::half_gaussian(arg(r)))
        .collect::<Result<Vec<_>>>()?;
    let kr = kernel_real(ak, grid);
    let coupling = -I * beta * rot;
    let mut m = Mat::from_fn(n, n, |i, j| coupling * (half[i] * half[j]) * kr[(i, j)]);
    let st = second_derivative_stencil(grid);
    for i in 0..n {
        m[(i, i)] += inv_rot * st.diag[i] + potential(nodes[i])?;
        if i + 1 < n {
            m[(i, i + 1)] += inv_rot * st.off[i];
            m[(i + 1, i)] += inv_rot * st.off[i];
        }
    }
    Ok(OperatorMatrix { grid, kind: OperatorKind::Deformed, mode, storage: Storage::Dense(m) })
}

/// Dirichlet Green's function of −∂² + (k²−1/4)/r² on (0, r_k), extended by
/// zero beyond r_k.
pub fn assemble_truncated_kernel(
    k: i64,
    r_k: f64,
    grid: RadialGrid,
) -> Result<OperatorMatrix> {
    let ak = require_nonzero_k(k)?;
    if !(r_k > 0.0 && r_k < grid.r_max()) {
        return Err(Error::Usage(format!(
            "truncation radius {r_k} must lie in (0, {})",
            grid.r_max()
        )));
    }
    let nodes = grid.nodes();
    let h = grid.spacing();
    let n = grid.n();
    let m = Mat::from_fn(n, n, |i, j| {
        let (r, s) = (nodes[i], nodes[j]);
        if r >= r_k || s >= r_k {
            return ZERO;
        }
        let free = kernel_entry(ak, r, s, h);
        let image = (r * s / (r_k * r_k)).powi(ak as i32) * (r * s).sqrt() * h / (2.0 * ak as f64);
        Complex64::new((free - image).max(0.0), 0.0)
    });
    Ok(OperatorMatrix {
        grid,
        kind: OperatorKind::TruncatedKernel,
        mode: ModeSpec::new(0.0, k)?,
        storage: Storage::Dense(m),
    })
}

/// Kernel[w] in O(n), identical to multiplying by the Nyström matrix.
pub fn apply_kernel(k: i64, w: &Field) -> Result<Field> {
    let ak = require_nonzero_k(k)? as f64;
    let grid = w.grid();
    let n = grid.n();
    let h = grid.spacing();
    let x = w.values();
    let nodes = grid.nodes();
    let mut inner = vec![ZERO; n];
    let mut acc = ZERO;
    for i in 1..n {
        acc = (acc + x[i - 1]) * (nodes[i - 1] / nodes[i]).powf(ak + 0.5);
        inner[i] = acc;
    }
    let mut outer = vec![ZERO; n];
    acc = ZERO;
    for i in (0..n - 1).rev() {
        acc = (acc + x[i + 1]) * (nodes[i] / nodes[i + 1]).powf(ak - 0.5);
        outer[i] = acc;
    }
    let scale = h / (2.0 * ak);
    Field::new(
        grid,
        (0..n).map(|i| (inner[i] + x[i] + outer[i]) * nodes[i] * scale).collect(),
    )
}

/// Skew[w] = σw − g·Kernel[g·w] in O(n).
pub fn apply_skew(k: i64, w: &Field) -> Result<Field> {
    let gw = w.scaled_by(|r| (-r * r / 8.0).exp());
    let kgw = apply_kernel(k, &gw)?;
    let grid = w.grid();
    let values = (0..grid.n())
        .map(|i| {
            let r = grid.node(i);
            Ok(w.values()[i] * specfun::sigma(r)? - kgw.values()[i] * specfun::gaussian(r)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Field::new(grid, values)
}

/// Full undeformed operator applied to a field in O(n).
pub fn apply_full(mode: ModeSpec, w: &Field) -> Result<Field> {
    let grid = w.grid();
    let local = assemble_schrodinger(mode.k, grid)?.apply(w)?;
    let skew = apply_skew(mode.k, w)?;
    let beta = mode.beta();
    let values = (0..grid.n())
        .map(|i| local.values()[i] + I * beta * skew.values()[i] - I * mode.lambda * w.values()[i])
        .collect();
    Field::new(grid, values)
}

/// r^{3/2}·g(r), the spanning vector of the kernel of Skew₁.
pub fn ground_profile(r: f64) -> f64 {
    r.powf(1.5) * (-r * r / 8.0).exp()
}

const GAUSS_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Product-integration weights of a weight function ρ against the cubic
/// Lagrange interpolant of the nodal values. Cell j = [r_j, r_{j+1}] uses the
/// four nodes starting at `first`, so that ∫_{cell j} ρ·w =
/// Σ_q weights[q]·w[first + q]. Integrated with 4-point Gauss-Legendre.
struct CellRule {
    first: usize,
    weights: [f64; 4],
}

fn cell_weights(grid: RadialGrid, rho: impl Fn(f64) -> Result<f64>) -> Result<Vec<CellRule>> {
    let n = grid.n();
    let h = grid.spacing();
    let mut cells = Vec::with_capacity(n.saturating_sub(1));
    for j in 0..n.saturating_sub(1) {
        let first = if n < 4 { 0 } else { j.saturating_sub(1).min(n - 4) };
        let width = n.min(4);
        let a = grid.node(j);
        let mut weights = [0.0; 4];
        for q in 0..4 {
            // Position in units of h relative to node `first`.
            let t = 0.5 * (GAUSS_X[q] + 1.0);
            let x = (j - first) as f64 + t;
            let wq = 0.5 * h * GAUSS_W[q] * rho(a + h * t)?;
            for (m, wm) in weights.iter_mut().enumerate().take(width) {
                let mut l = 1.0;
                for p in 0..width {
                    if p != m {
                        l *= (x - p as f64) / (m as f64 - p as f64);
                    }
                }
                *wm += wq * l;
            }
        }
        cells.push(CellRule { first, weights });
    }
    Ok(cells)
}

fn cell_integral(rule: &CellRule, x: &[Complex64]) -> Complex64 {
    rule.weights
        .iter()
        .enumerate()
        .filter(|(q, _)| rule.first + q < x.len())
        .map(|(q, w)| x[rule.first + q] * *w)
        .sum()
}

/// g/(σ′ r^{3/2}), singular like −4r^{−5/2} at the origin.
fn wave_factor(r: f64) -> Result<f64> {
    Ok(specfun::gaussian(r)? / (specfun::sigma_prime_over_r(r)? * r.powf(2.5)))
}

/// Wave operator Tw = w + I₁[w]·g/(σ′ r^{3/2}) with
/// I₁[w](r) = ∫₀^r s^{3/2} g w ds.
///
/// I₁ is integrated against the piecewise cubic interpolant of w, with
/// w ≈ w_0·(s/r_0)^{3/2} on [0, r_0] (the behaviour of the domain of the
/// k = 1 operator). Plain midpoint sums lose accuracy next to the origin,
/// where the factor g/(σ′ r^{3/2}) amplifies quadrature errors.
pub fn apply_wave(w: &Field) -> Result<Field> {
    let grid = w.grid();
    let n = grid.n();
    let x = w.values();
    let cells = cell_weights(grid, |s| Ok(ground_profile(s)))?;
    let r0 = grid.node(0);
    let mut start = 0.0;
    for q in 0..4 {
        let s = 0.5 * r0 * (GAUSS_X[q] + 1.0);
        start += 0.5 * r0 * GAUSS_W[q] * ground_profile(s) * (s / r0).powf(1.5);
    }
    let mut out = Vec::with_capacity(n);
    let mut integral = x[0] * start;
    for i in 0..n {
        if i > 0 {
            integral += cell_integral(&cells[i - 1], x);
        }
        out.push(x[i] + integral * wave_factor(grid.node(i))?);
    }
    Field::new(grid, out)
}

/// Adjoint T*ω = ω + r^{3/2}g·∫_r^∞ ωg/(s^{3/2}σ′) ds, with the tail
/// integral taken against the piecewise cubic interpolant of ω and
/// truncated at r_max.
pub fn apply_wave_adjoint(w: &Field) -> Result<Field> {
    let grid = w.grid();
    let n = grid.n();
    let x = w.values();
    let cells = cell_weights(grid, wave_factor)?;
    let mut out = vec![ZERO; n];
    let mut tail = ZERO;
    for i in (0..n).rev() {
        if i + 1 < n {
            tail += cell_integral(&cells[i], x);
        }
        out[i] = x[i] + tail * ground_profile(grid.node(i));
    }
    Field::new(grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{make_grid, quadrature};

    #[test]
    fn kernel_diagonal_entry() {
        let g = make_grid(100, 10.0).unwrap();
        let k = assemble_kernel(3, g).unwrap();
        let h = g.spacing();
        for i in [0, 17, 99] {
            let expected = g.node(i) * h / 6.0;
            assert!((k.get(i, i).re - expected).abs() < 1e-15);
        }
        assert!(assemble_kernel(0, g).is_err());
    }

    #[test]
    fn fast_kernel_matches_matrix() {
        let g = make_grid(64, 10.0).unwrap();
        let w = Field::from_fn(g, |r| Complex64::new((-r).exp() * r, r.sin()));
        for k in [1, 2, 5] {
            let dense = assemble_kernel(k, g).unwrap().apply(&w).unwrap();
            let fast = apply_kernel(k, &w).unwrap();
            let err = dense.sub(&fast).unwrap().norm() / dense.norm();
            assert!(err < 1e-13, "k={k} err={err}");
        }
    }

    #[test]
    fn wave_adjoint_matches_quadrature_adjoint() {
        // T and T* are separate product-integration rules, so adjointness
        // holds up to discretization error only.
        let g = make_grid(1200, 12.0).unwrap();
        let a = Field::from_fn(g, |r| Complex64::new(1.0 + r, 0.3) * r.powf(1.5) * (-r * r / 8.0).exp());
        let b = Field::from_fn(g, |r| Complex64::new(r.cos(), r) * r.powf(1.5) * (-r).exp());
        let lhs = quadrature(&apply_wave(&a).unwrap(), &b).unwrap();
        let rhs = quadrature(&a, &apply_wave_adjoint(&b).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-5 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn full_operator_is_complex_symmetric() {
        let g = make_grid(40, 10.0).unwrap();
        let mode = ModeSpec::new(300.0, 2).unwrap().with_lambda(3.0).unwrap();
        let h = assemble_full(mode, g).unwrap();
        assert_eq!(h.asymmetry(), 0.0);
        assert!(assemble_full(mode.with_theta(0.1).unwrap(), g).is_err());
    }

    #[test]
    fn restricted_requires_unit_k() {
        let g = make_grid(40, 10.0).unwrap();
        assert!(assemble_restricted(ModeSpec::new(1.0, 2).unwrap(), g).is_err());
    }
}
