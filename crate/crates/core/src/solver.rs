//! Dense and banded linear algebra: eigenvalues of non-Hermitian matrices,
//! smallest singular values of shifted matrices, and the bottom of the
//! spectrum of the Hermitian part.
//!
//! Dense problems go to `faer`. Tridiagonal problems use bisection with
//! Sturm-type inertia counts, which costs O(n) per count and works on the
//! shifted matrix itself.

use crate::error::{Error, Result};
use crate::operators::{OperatorMatrix, Storage};
use faer::{Mat, Side};
use num_complex::Complex64;

/// Largest dimension accepted by the dense solvers.
pub const MAX_DENSE_N: usize = 4000;

/// Eigenvalues sorted by (Re, Im), with the worst normwise residual
/// max ‖Mv − μv‖/‖v‖ over all computed eigenpairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub values: Vec<Complex64>,
    pub backward_error: f64,
    pub matrix_norm: f64,
}

impl EigenResult {
    /// Smallest real part of the spectrum.
    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }
}

fn check_dense_size(n: usize) -> Result<()> {
    if n > MAX_DENSE_N {
        return Err(Error::Config(format!(
            "dense solve requested for n = {n} > {MAX_DENSE_N}"
        )));
    }
    Ok(())
}

fn sort_by_real_then_imag(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// All eigenvalues, with residuals computed from the eigenvectors.
pub fn eigenvalues(m: &OperatorMatrix) -> Result<EigenResult> {
    check_dense_size(m.n())?;
    let dense = m.to_dense();
    let evd = dense
        .eigen()
        .map_err(|e| Error::Solver(format!("eigendecomposition failed: {e:?}")))?;
    let vecs = evd.U();
    let vals = evd.S();
    let n = m.n();
    let mut values = Vec::with_capacity(n);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let mu = vals[j];
        let v: Vec<Complex64> = (0..n).map(|i| vecs[(i, j)]).collect();
        let mv = m.apply_values(&v);
        let res: f64 = mv.iter().zip(&v).map(|(a, b)| (a - mu * b).norm_sqr()).sum::<f64>().sqrt();
        let vn: f64 = v.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
        if vn > 0.0 {
            worst = worst.max(res / vn);
        }
        values.push(mu);
    }
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Solver("eigensolver returned non-finite values".into()));
    }
    sort_by_real_then_imag(&mut values);
    Ok(EigenResult { values, backward_error: worst, matrix_norm: m.norm() })
}

/// Eigenvalues only, without residuals; for sweeps where the eigenvector
/// cost is not wanted.
pub fn eigenvalues_only(m: &OperatorMatrix) -> Result<Vec<Complex64>> {
    check_dense_size(m.n())?;
    let mut values = m
        .to_dense()
        .eigenvalues()
        .map_err(|e| Error::Solver(format!("eigenvalue computation failed: {e:?}")))?;
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Solver("eigensolver returned non-finite values".into()));
    }
    sort_by_real_then_imag(&mut values);
    Ok(values)
}

/// s_min(M − iλI).
pub fn smallest_singular_value(m: &OperatorMatrix, lambda: f64) -> Result<f64> {
    let shift = Complex64::new(0.0, lambda);
    match &m.storage {
        Storage::Tridiagonal { sub, diag, sup } => {
            let diag: Vec<Complex64> = diag.iter().map(|d| d - shift).collect();
            Ok(tridiagonal_smallest_singular_value(sub, &diag, sup))
        }
        Storage::Dense(a) => {
            check_dense_size(m.n())?;
            let mut shifted = a.clone();
            for i in 0..m.n() {
                shifted[(i, i)] -= shift;
            }
            let sv = shifted
                .singular_values()
                .map_err(|e| Error::Solver(format!("SVD failed: {e:?}")))?;
            Ok(sv.iter().copied().fold(f64::INFINITY, f64::min).max(0.0))
        }
    }
}

/// Smallest eigenvalue of (M + M*)/2.
pub fn hermitian_part_min_eig(m: &OperatorMatrix) -> Result<f64> {
    match &m.storage {
        Storage::Tridiagonal { sub, diag, sup } => {
            let d: Vec<f64> = diag.iter().map(|z| z.re).collect();
            let e: Vec<f64> = (0..sup.len()).map(|i| 0.5 * (sup[i] + sub[i].conj()).norm()).collect();
            Ok(symmetric_tridiagonal_min_eig(&d, &e))
        }
        Storage::Dense(a) => {
            check_dense_size(m.n())?;
            let n = m.n();
            let herm = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
            let vals = herm
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Solver(format!("Hermitian eigensolver failed: {e:?}")))?;
            vals.first()
                .copied()
                .ok_or_else(|| Error::Solver("empty matrix".into()))
        }
    }
}

/// All eigenvalues of (M + M*)/2 in increasing order (dense path).
pub fn hermitian_part_eigenvalues(m: &OperatorMatrix) -> Result<Vec<f64>> {
    check_dense_size(m.n())?;
    let n = m.n();
    let a = m.to_dense();
    let herm = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    herm.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Solver(format!("Hermitian eigensolver failed: {e:?}")))
}

/// Number of eigenvalues of the symmetric tridiagonal (d, e) below x.
fn sturm_count(d: &[f64], e: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a real symmetric tridiagonal matrix by bisection.
pub fn symmetric_tridiagonal_min_eig(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        let rad = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - rad);
        hi = hi.max(d[i] + rad);
        scale = scale.max(d[i].abs() + rad);
    }
    let pivmin = f64::MIN_POSITIVE.max(scale * scale * f64::EPSILON * f64::EPSILON);
    let tol = 4.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut hi_b = hi;
    while hi_b - lo > tol {
        let mid = 0.5 * (lo + hi_b);
        if mid <= lo || mid >= hi_b {
            break;
        }
        if sturm_count(d, e, mid, pivmin) >= 1 {
            hi_b = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi_b)
}

/// 2×2 complex matrix [[a, b], [c, d]] stored row-major.
#[derive(Clone, Copy)]
struct Block([Complex64; 4]);

impl Block {
    fn mul(self, o: Block) -> Block {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        Block([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    fn adjoint(self) -> Block {
        let [a, b, c, d] = self.0;
        Block([a.conj(), c.conj(), b.conj(), d.conj()])
    }
}

/// Number of eigenvalues below s of the Golub–Kahan matrix
/// [[0, M], [M*, 0]] for tridiagonal M, counted through a block LDL*
/// factorization of the interleaved (block tridiagonal) form.
fn golub_kahan_count(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    s: f64,
    pivmin: f64,
) -> usize {
    let n = diag.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut count = 0;
    // Pivot block of the running factorization: Hermitian [[p, q], [q̄, t]].
    let mut prev_inv: Option<Block> = None;
    for i in 0..n {
        let mut p = Complex64::new(-s, 0.0);
        let mut q = diag[i];
        let mut t = Complex64::new(-s, 0.0);
        if let Some(inv) = prev_inv {
            // Coupling from block i−1 to block i: rows (x_{i−1}, y_{i−1}),
            // columns (x_i, y_i).
            let e = Block([zero, sup[i - 1], sub[i - 1].conj(), zero]);
            let corr = e.adjoint().mul(inv).mul(e);
            p -= corr.0[0];
            q -= corr.0[1];
            t -= corr.0[3];
        }
        let (pr, tr) = (p.re, t.re);
        let mut det = pr * tr - q.norm_sqr();
        let (mut pr, mut tr) = (pr, tr);
        if det.abs() < pivmin {
            pr -= pivmin.sqrt();
            tr -= pivmin.sqrt();
            det = pr * tr - q.norm_sqr();
            if det.abs() < pivmin {
                det = -pivmin;
            }
        }
        count += if det < 0.0 {
            1
        } else if pr + tr < 0.0 {
            2
        } else {
            0
        };
        let inv_det = 1.0 / det;
        prev_inv = Some(Block([
            Complex64::new(tr * inv_det, 0.0),
            -q * inv_det,
            -q.conj() * inv_det,
            Complex64::new(pr * inv_det, 0.0),
        ]));
    }
    count
}

/// Smallest singular value of a complex tridiagonal matrix by bisection on
/// the inertia of its Golub–Kahan form; absolute accuracy O(ε‖M‖).
pub fn tridiagonal_smallest_singular_value(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
) -> f64 {
    let n = diag.len();
    let mut bound: f64 = 0.0;
    for i in 0..n {
        let row = diag[i].norm()
            + if i > 0 { sub[i - 1].norm() } else { 0.0 }
            + if i + 1 < n { sup[i].norm() } else { 0.0 };
        let col = diag[i].norm()
            + if i > 0 { sup[i - 1].norm() } else { 0.0 }
            + if i + 1 < n { sub[i].norm() } else { 0.0 };
        bound = bound.max(row.max(col));
    }
    if bound == 0.0 {
        return 0.0;
    }
    let pivmin = f64::MIN_POSITIVE.max(bound * bound * f64::EPSILON * f64::EPSILON);
    let (mut lo, mut hi) = (0.0, bound);
    let tol = 4.0 * f64::EPSILON * bound;
    while hi - lo > tol.max(1e-15 * hi) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if golub_kahan_count(sub, diag, sup, mid, pivmin) > n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{make_grid, ModeSpec, RadialGrid};
    use crate::operators::{assemble_full, assemble_restricted, OperatorKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tri_op(sub: Vec<Complex64>, diag: Vec<Complex64>, sup: Vec<Complex64>) -> OperatorMatrix {
        let n = diag.len();
        OperatorMatrix {
            grid: RadialGrid::new(n, 1.0).unwrap(),
            kind: OperatorKind::Full,
            mode: ModeSpec::new(0.0, 1).unwrap(),
            storage: Storage::Tridiagonal { sub, diag, sup },
        }
    }

    #[test]
    fn diagonal_eigenvalues() {
        let m = tri_op(vec![c(0.0, 0.0); 2], vec![c(3.0, 1.0), c(-1.0, 0.0), c(2.0, -2.0)], vec![c(0.0, 0.0); 2]);
        let e = eigenvalues(&m).unwrap();
        assert_eq!(e.values.len(), 3);
        assert!((e.values[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((e.values[2] - c(3.0, 1.0)).norm() < 1e-14);
        assert!(e.backward_error < 1e-12);
    }

    #[test]
    fn identity_singular_value() {
        let m = tri_op(vec![c(0.0, 0.0); 4], vec![c(1.0, 0.0); 5], vec![c(0.0, 0.0); 4]);
        assert!((smallest_singular_value(&m, 0.0).unwrap() - 1.0).abs() < 1e-13);
        let dense = OperatorMatrix { storage: Storage::Dense(m.to_dense()), ..m.clone() };
        assert!((smallest_singular_value(&dense, 0.0).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn tridiagonal_path_matches_dense_svd() {
        let n = 57;
        let sub: Vec<Complex64> = (0..n - 1).map(|i| c((i as f64 * 0.7).sin(), 0.3 * (i as f64).cos())).collect();
        let sup: Vec<Complex64> = (0..n - 1).map(|i| c(-1.0 + 0.01 * i as f64, (i as f64 * 1.3).sin())).collect();
        let diag: Vec<Complex64> = (0..n).map(|i| c(0.1 * i as f64 - 2.0, (i as f64 * 0.37).cos())).collect();
        let m = tri_op(sub, diag, sup);
        let dense = OperatorMatrix { storage: Storage::Dense(m.to_dense()), ..m.clone() };
        for lambda in [0.0, 0.4, -1.3] {
            let a = smallest_singular_value(&m, lambda).unwrap();
            let b = smallest_singular_value(&dense, lambda).unwrap();
            assert!((a - b).abs() < 1e-11, "lambda={lambda}: {a} vs {b}");
        }
        let ha = hermitian_part_min_eig(&m).unwrap();
        let hb = hermitian_part_min_eig(&dense).unwrap();
        assert!((ha - hb).abs() < 1e-11, "{ha} vs {hb}");
    }

    #[test]
    fn schrodinger_ground_state_via_hermitian_part() {
        let g = make_grid(600, 30.0).unwrap();
        let m = assemble_full(ModeSpec::new(0.0, 2).unwrap(), g).unwrap();
        let v = hermitian_part_min_eig(&m).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn restricted_self_adjoint_distance() {
        let g = make_grid(600, 30.0).unwrap();
        let m = assemble_restricted(ModeSpec::new(0.0, 1).unwrap(), g).unwrap();
        let s = smallest_singular_value(&m, 0.0).unwrap();
        assert!((s - 1.5).abs() < 2e-3, "{s}");
    }
}
