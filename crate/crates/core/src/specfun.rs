//! Scalar special functions of the radial vortex operators, for real and
//! complex arguments.
//!
//! Every function switches from a truncated Taylor series to the closed form
//! at a fixed threshold in `u = r²/4` (or `|z|`); below the threshold the
//! closed forms lose digits to cancellation in `1 − e^{−u}` and `e^u − 1 − u`.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Below this value of `u = r²/4` (or `|z|`) the series branch is used.
pub const SERIES_THRESHOLD: f64 = 0.5;
/// Number of series terms; enough to saturate double precision for `u < 1`.
pub const SERIES_TERMS: usize = 25;

/// Tag for every scalar function exposed by this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarFunId {
    Sigma,
    SigmaPrime,
    Gaussian,
    CommutatorPotential,
    CoercivityProfile,
    ExpRemainder,
    ComplexSigma,
    HalfGaussian,
    ComplexPotential,
    DeformedCorrection,
    DeformationMargin,
    PhiMoment,
}

impl ScalarFunId {
    /// Short tag used in reports.
    pub fn tag(self) -> &'static str {
        match self {
            ScalarFunId::Sigma => "sigma",
            ScalarFunId::SigmaPrime => "sigma_prime",
            ScalarFunId::Gaussian => "g",
            ScalarFunId::CommutatorPotential => "f",
            ScalarFunId::CoercivityProfile => "h",
            ScalarFunId::ExpRemainder => "F0",
            ScalarFunId::ComplexSigma => "F1",
            ScalarFunId::HalfGaussian => "F2",
            ScalarFunId::ComplexPotential => "F3",
            ScalarFunId::DeformedCorrection => "F4",
            ScalarFunId::DeformationMargin => "F5",
            ScalarFunId::PhiMoment => "phi_moment",
        }
    }
}

fn check_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {x}")))
    }
}

fn check_positive(r: f64, what: &str) -> Result<()> {
    check_finite(r, what)?;
    if r > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive, got {r}")))
    }
}

fn check_nonnegative(r: f64, what: &str) -> Result<()> {
    check_finite(r, what)?;
    if r >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be nonnegative, got {r}")))
    }
}

/// 1/n! for n = 0..=SERIES_TERMS+3.
fn inv_factorials() -> [f64; SERIES_TERMS + 4] {
    let mut out = [1.0; SERIES_TERMS + 4];
    for n in 1..out.len() {
        out[n] = out[n - 1] / n as f64;
    }
    out
}

/// Evaluate Σ c_m x^m by Horner's rule.
fn horner<T>(coeffs: &[f64], x: T) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Add<f64, Output = T> + From<f64>,
{
    let mut acc = T::from(0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Coefficients of σ as a power series in u: (−1)^m/(m+1)!.
fn sigma_coeffs() -> [f64; SERIES_TERMS] {
    let inv = inv_factorials();
    std::array::from_fn(|m| if m % 2 == 0 { inv[m + 1] } else { -inv[m + 1] })
}

/// Coefficients of dσ/du: (−1)^{m+1}(m+1)/(m+2)!.
fn sigma_du_coeffs() -> [f64; SERIES_TERMS] {
    let inv = inv_factorials();
    std::array::from_fn(|m| {
        let c = (m + 1) as f64 * inv[m + 2];
        if m % 2 == 0 {
            -c
        } else {
            c
        }
    })
}

/// Coefficients of (e^u − 1 − u)/u² = Σ u^m/(m+2)!.
fn exp_remainder_reduced_coeffs() -> [f64; SERIES_TERMS] {
    let inv = inv_factorials();
    std::array::from_fn(|m| inv[m + 2])
}

/// Numerator series of the commutator potential divided by u²:
/// Σ_m (2/(m+1)! − 3/(m+2)!) u^m.
fn potential_numerator_coeffs() -> [f64; SERIES_TERMS] {
    let inv = inv_factorials();
    std::array::from_fn(|m| 2.0 * inv[m + 1] - 3.0 * inv[m + 2])
}

/// Series coefficients of (N − 2D²)/u where N is the reduced numerator and D
/// the reduced exponential remainder. The constant terms cancel exactly.
fn deformed_correction_numerator_coeffs() -> [f64; SERIES_TERMS] {
    let num = potential_numerator_coeffs();
    let den = exp_remainder_reduced_coeffs();
    let mut out = [0.0; SERIES_TERMS];
    for m in 1..=SERIES_TERMS {
        let mut sq = 0.0;
        for i in 0..=m.min(SERIES_TERMS - 1) {
            let j = m - i;
            if j < SERIES_TERMS {
                sq += den[i] * den[j];
            }
        }
        let n_m = if m < SERIES_TERMS { num[m] } else { 0.0 };
        out[m - 1] = n_m - 2.0 * sq;
    }
    out
}

/// σ(r) = (1 − e^{−r²/4})/(r²/4), with σ(0) = 1.
pub fn sigma(r: f64) -> Result<f64> {
    check_nonnegative(r, "r")?;
    let u = 0.25 * r * r;
    Ok(sigma_of_u(u))
}

fn sigma_of_u(u: f64) -> f64 {
    if u < SERIES_THRESHOLD {
        horner(&sigma_coeffs(), u)
    } else {
        -(-u).exp_m1() / u
    }
}

/// Radial derivative σ′(r); strictly negative for r > 0.
pub fn sigma_prime(r: f64) -> Result<f64> {
    check_positive(r, "r")?;
    Ok(r * sigma_prime_over_r_unchecked(r))
}

/// σ′(r)/r, finite down to r = 0 where it equals −1/4.
pub fn sigma_prime_over_r(r: f64) -> Result<f64> {
    check_nonnegative(r, "r")?;
    Ok(sigma_prime_over_r_unchecked(r))
}

fn sigma_prime_over_r_unchecked(r: f64) -> f64 {
    let u = 0.25 * r * r;
    if u < SERIES_THRESHOLD {
        0.5 * horner(&sigma_du_coeffs(), u)
    } else {
        2.0 * ((-u).exp() - sigma_of_u(u)) / (r * r)
    }
}

/// Inverse of σ on (0, 1) by bisection.
pub fn sigma_inverse(nu: f64) -> Result<f64> {
    check_finite(nu, "nu")?;
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain(format!("nu must lie in (0,1), got {nu}")));
    }
    let mut hi = 1.0;
    while sigma_of_u(0.25 * hi * hi) > nu {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sigma_of_u(0.25 * mid * mid) > nu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// g(r) = e^{−r²/8}.
pub fn gaussian(r: f64) -> Result<f64> {
    check_nonnegative(r, "r")?;
    Ok((-0.125 * r * r).exp())
}

/// The commutator potential f(r) = 2g⁴/σ′² + g²(6/r − r)/σ′, which is
/// nonnegative and behaves like 8/r² near the origin.
pub fn commutator_potential(r: f64) -> Result<f64> {
    check_positive(r, "r")?;
    let u = 0.25 * r * r;
    if u < 1.0 {
        let num = horner(&potential_numerator_coeffs(), u);
        let den = horner(&exp_remainder_reduced_coeffs(), u);
        Ok(num / (u * den * den))
    } else {
        let g2 = (-u).exp();
        let sp = r * sigma_prime_over_r_unchecked(r);
        Ok(2.0 * g2 * g2 / (sp * sp) + g2 * (6.0 / r - r) / sp)
    }
}

/// Lower envelope of the restricted k=1 potential:
/// 3/(4r²) + r²/16 − 1/2 + r²/(4(e^{r²/4} − 1 − r²/4)).
pub fn coercivity_profile(r: f64) -> Result<f64> {
    check_positive(r, "r")?;
    let u = 0.25 * r * r;
    let tail = if u < SERIES_THRESHOLD {
        1.0 / (u * horner(&exp_remainder_reduced_coeffs(), u))
    } else {
        u / (u.exp_m1() - u)
    };
    Ok(3.0 / (16.0 * u) + 0.25 * u - 0.5 + tail)
}

fn check_complex(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("z must be finite, got {z}")))
    }
}

/// e^z − z − 1.
pub fn exp_remainder(z: Complex64) -> Result<Complex64> {
    check_complex(z)?;
    if z.norm() < SERIES_THRESHOLD {
        Ok(z * z * horner(&exp_remainder_reduced_coeffs(), z))
    } else {
        Ok(z.exp() - z - 1.0)
    }
}

/// Analytic continuation of σ in u: (1 − e^{−z})/z, equal to 1 at z = 0.
pub fn complex_sigma(z: Complex64) -> Result<Complex64> {
    check_complex(z)?;
    if z.norm() < SERIES_THRESHOLD {
        Ok(horner(&sigma_coeffs(), z))
    } else {
        Ok((1.0 - (-z).exp()) / z)
    }
}

/// Analytic continuation of g in u: e^{−z/2}.
pub fn half_gaussian(z: Complex64) -> Result<Complex64> {
    check_complex(z)?;
    Ok((-0.5 * z).exp())
}

/// 1/(e^z − z − 1) for |z| ≥ the series threshold, without overflow for
/// large Re z.
fn reciprocal_exp_remainder(z: Complex64) -> Result<Complex64> {
    let pole = || Error::Pole(format!("e^z - z - 1 vanishes near z = {z}"));
    if z.re > 1.0 {
        let e = (-z).exp();
        let den = 1.0 - (1.0 + z) * e;
        if den.norm() < 1e-14 {
            return Err(pole());
        }
        Ok(e / den)
    } else {
        let f0 = z.exp() - z - 1.0;
        let scale = z.exp().norm() + z.norm() + 1.0;
        if f0.norm() <= 1e-14 * scale {
            return Err(pole());
        }
        Ok(1.0 / f0)
    }
}

/// Analytic continuation of the commutator potential in u = r²/4:
/// (4z²/F₀ − 6 + 4z)·z/(2F₀) with F₀ = e^z − z − 1, so that f(r) equals
/// this function at z = r²/4.
pub fn complex_potential(z: Complex64) -> Result<Complex64> {
    check_complex(z)?;
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole("complex potential has a simple pole at 0".into()));
    }
    if z.norm() < SERIES_THRESHOLD {
        let num = horner(&potential_numerator_coeffs(), z);
        let den = horner(&exp_remainder_reduced_coeffs(), z);
        Ok(num / (z * den * den))
    } else {
        let w = reciprocal_exp_remainder(z)?;
        Ok((4.0 * z * z * w - 6.0 + 4.0 * z) * z * 0.5 * w)
    }
}

/// The regular part of the complex potential: F₃(z) − 2/z, holomorphic at 0.
pub fn deformed_correction(z: Complex64) -> Result<Complex64> {
    check_complex(z)?;
    if z.norm() < SERIES_THRESHOLD {
        let num = horner(&deformed_correction_numerator_coeffs(), z);
        let den = horner(&exp_remainder_reduced_coeffs(), z);
        Ok(num / (den * den))
    } else {
        Ok(complex_potential(z)? - 2.0 / z)
    }
}

/// Dispatch for the complex-argument family F₀…F₄.
pub fn eval_complex(id: ScalarFunId, z: Complex64) -> Result<Complex64> {
    match id {
        ScalarFunId::ExpRemainder => exp_remainder(z),
        ScalarFunId::ComplexSigma => complex_sigma(z),
        ScalarFunId::HalfGaussian => half_gaussian(z),
        ScalarFunId::ComplexPotential => complex_potential(z),
        ScalarFunId::DeformedCorrection => deformed_correction(z),
        other => Err(Error::Usage(format!(
            "{} is not a complex-argument function",
            other.tag()
        ))),
    }
}

/// sinθ − e^{−r cosθ} sin(r sinθ + θ) = −Im(e^{−iθ} − e^{−re^{iθ} − iθ}),
/// defined for 0 < θ < π/4; zero at r = 0.
pub fn deformation_margin(r: f64, theta: f64) -> Result<f64> {
    check_nonnegative(r, "r")?;
    check_finite(theta, "theta")?;
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_4) {
        return Err(Error::Domain(format!(
            "theta must lie in (0, pi/4), got {theta}"
        )));
    }
    let (s, c) = theta.sin_cos();
    Ok(s - (-r * c).exp() * (r * s + theta).sin())
}

/// Φ(a) = 3 − (3 + 3a + a²)e^{−a}; increasing from 0 to 3.
pub fn phi_moment(a: f64) -> Result<f64> {
    check_finite(a, "a")?;
    if a < 0.0 {
        return Err(Error::Domain(format!("a must be nonnegative, got {a}")));
    }
    if a < 1.0 {
        // e^{−a}(a²/2 + 3Σ_{n≥3} aⁿ/n!) avoids the cancellation 3 − 3.
        let inv = inv_factorials();
        let mut tail = 0.0;
        let mut pow = a * a * a;
        for c in inv.iter().skip(3) {
            tail += c * pow;
            pow *= a;
        }
        Ok((-a).exp() * (0.5 * a * a + 3.0 * tail))
    } else {
        Ok(3.0 - (3.0 + 3.0 * a + a * a) * (-a).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(0.0).unwrap(), 1.0);
        assert!(rel(sigma(2.0).unwrap(), 1.0 - (-1.0f64).exp()) < 1e-15);
        let r = 1e4;
        assert!(rel(r * r * sigma(r).unwrap(), 4.0) < 1e-12);
        assert!(sigma(f64::NAN).is_err());
        assert!(sigma(-1.0).is_err());
    }

    #[test]
    fn sigma_prime_values() {
        let expected = (-1.0f64).exp() - (1.0 - (-1.0f64).exp());
        assert!(rel(sigma_prime(2.0).unwrap(), expected) < 1e-14);
        assert!(rel(sigma_prime(1e-4).unwrap() / 1e-4, -0.25) < 1e-8);
        let r: f64 = 1e3;
        assert!(rel(r.powi(3) * sigma_prime(r).unwrap(), -8.0) < 1e-10);
        assert!(sigma_prime(0.0).is_err());
    }

    #[test]
    fn sigma_inverse_round_trip() {
        let nu = 1.0 - (-1.0f64).exp();
        assert!((sigma_inverse(nu).unwrap() - 2.0).abs() < 1e-10);
        assert!((sigma_inverse(sigma(5.0).unwrap()).unwrap() - 5.0).abs() < 1e-10);
        assert!(sigma_inverse(1.0 - 1e-12).unwrap() < 1e-5);
        assert!(sigma_inverse(0.0).is_err());
        assert!(sigma_inverse(1.0).is_err());
    }

    #[test]
    fn commutator_potential_limits() {
        let r = 1e-3;
        assert!(rel(r * r * commutator_potential(r).unwrap(), 8.0) < 1e-6);
        assert!(commutator_potential(40.0).unwrap() < 1e-60);
        assert!(commutator_potential(0.0).is_err());
    }

    #[test]
    fn coercivity_profile_value() {
        let expected = 3.0 / 16.0 + 0.25 - 0.5 + 1.0 / (std::f64::consts::E - 2.0);
        assert!(rel(coercivity_profile(2.0).unwrap(), expected) < 1e-14);
    }

    #[test]
    fn complex_functions_match_real() {
        for r in [0.5, 1.0, 2.0, 5.0] {
            let u = 0.25 * r * r;
            let z = c(u, 0.0);
            let f = commutator_potential(r).unwrap();
            assert!(rel(complex_potential(z).unwrap().re, f) < 1e-10, "r={r}");
            assert!(rel(complex_sigma(z).unwrap().re, sigma(r).unwrap()) < 1e-14);
            assert!(rel(half_gaussian(z).unwrap().re, gaussian(r).unwrap()) < 1e-14);
        }
        assert_eq!(complex_sigma(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn deformed_correction_limit() {
        // z·F₃(z) → 2 along the sector, so F₃ − 2/z stays bounded.
        let dir = Complex64::from_polar(1.0, 0.5);
        let z = dir * 1e-6;
        assert!((z * complex_potential(z).unwrap() - 2.0).norm() < 1e-5);
        let at0 = deformed_correction(c(0.0, 0.0)).unwrap();
        assert!((at0 - c(2.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn large_argument_no_overflow() {
        let z = Complex64::from_polar(2000.0, 0.5);
        let v = complex_potential(z).unwrap();
        assert!(v.re.is_finite() && v.im.is_finite());
        assert!(v.norm() < 1e-300);
    }

    #[test]
    fn deformation_margin_values() {
        assert!(deformation_margin(0.0, 0.3).unwrap().abs() < 1e-16);
        assert!(deformation_margin(1.0, 0.0).is_err());
        assert!(deformation_margin(1.0, 0.8).is_err());
        for u in [0.1, 1.0, 10.0] {
            for theta in [0.1, 0.3] {
                let z = Complex64::from_polar(u, 2.0 * theta);
                let lhs = -complex_sigma(z).unwrap().im;
                let rhs = deformation_margin(u, 2.0 * theta).unwrap() / u;
                assert!((lhs - rhs).abs() < 1e-14, "u={u} theta={theta}");
            }
        }
    }

    #[test]
    fn phi_moment_limits() {
        assert_eq!(phi_moment(0.0).unwrap(), 0.0);
        assert!((phi_moment(60.0).unwrap() - 3.0).abs() < 1e-20);
        assert!(phi_moment(-1.0).is_err());
        let a: f64 = 1e-4;
        assert!(rel(phi_moment(a).unwrap(), 0.5 * a * a) < 1e-3);
    }

    #[test]
    fn pole_is_reported() {
        assert!(complex_potential(c(0.0, 0.0)).is_err());
        // A nontrivial zero of e^z − z − 1, located by Newton iteration.
        let mut z = c(2.09, 7.46);
        for _ in 0..50 {
            z -= (z.exp() - z - 1.0) / (z.exp() - 1.0);
        }
        assert!(matches!(complex_potential(z), Err(Error::Pole(_))));
    }
}
