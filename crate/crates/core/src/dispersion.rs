//! Plasma dispersion function and the Maxwellian Landau root.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Faddeeva function `w(z) = e^{−z²} erfc(−iz)`, continued analytically to
/// the lower half plane by `w(z) = 2e^{−z²} − conj(w(conj z))`.
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        let upper = faddeeva_upper(z.conj());
        return 2.0 * (-z * z).exp() - upper.conj();
    }
    faddeeva_upper(z)
}

fn faddeeva_upper(z: Complex64) -> Complex64 {
    if z.norm() > 6.0 || z.im > 3.0 {
        // Laplace continued fraction, backward evaluation
        let mut r = z;
        for k in (1..=60).rev() {
            r = z - (k as f64 / 2.0) / r;
        }
        return Complex64::i() / (SQRT_PI * r);
    }
    // Trapezoidal rule for ∫ e^{−t²}/(z − t) dt with the pole contribution,
    // the grid shifted away from Re z
    let h = 0.5;
    let ratio = z.re / h;
    let shifted = (ratio - ratio.round()).abs() <= 0.25;
    let s = if shifted { 0.5 } else { 0.0 };
    let mut sum = Complex64::new(0.0, 0.0);
    for n in -40..=40 {
        let t = (n as f64 + s) * h;
        sum += (-t * t).exp() / (z - t);
    }
    sum *= Complex64::new(0.0, h / std::f64::consts::PI);
    let e = (Complex64::new(0.0, -2.0 * std::f64::consts::PI / h) * z).exp();
    let denom = if shifted { 1.0 + e } else { 1.0 - e };
    sum + 2.0 * (-z * z).exp() / denom
}

/// `Z(z) = i√π w(z)`, valid on the whole plane (Landau contour).
pub fn plasma_z(z: Complex64) -> Complex64 {
    Complex64::new(0.0, SQRT_PI) * faddeeva(z)
}

/// `Z'(z) = −2(1 + zZ(z))`.
pub fn plasma_z_prime(z: Complex64) -> Complex64 {
    -2.0 * (1.0 + z * plasma_z(z))
}

/// `ε(k, ω) = 1 + (1/k²)(1 + ζZ(ζ))`, `ζ = ω/(√2 k)`.
pub fn epsilon_maxwellian(k: f64, omega: Complex64) -> Complex64 {
    let zeta = omega / (2f64.sqrt() * k);
    1.0 + (1.0 + zeta * plasma_z(zeta)) / (k * k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LandauRoot {
    pub k: f64,
    pub omega: f64,
    /// Positive for damping: the root is `ω − iγ`.
    pub gamma: f64,
    pub residual: f64,
    pub iterations: usize,
}

const MAX_NEWTON: usize = 100;

pub fn solve_landau_root(k: f64) -> Result<LandauRoot> {
    if !(0.2..=1.0).contains(&k) {
        return Err(Error::WavenumberOutOfRange(k));
    }
    let s2k = 2f64.sqrt() * k;
    let mut omega = Complex64::new((1.0 + 3.0 * k * k).sqrt(), -0.1);
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_NEWTON {
        let zeta = omega / s2k;
        let z = plasma_z(zeta);
        let eps = 1.0 + (1.0 + zeta * z) / (k * k);
        // dε/dω = (Z + ζZ')/(k² √2 k)
        let deps = (z + zeta * plasma_z_prime(zeta)) / (k * k * s2k);
        let step = eps / deps;
        omega -= step;
        residual = epsilon_maxwellian(k, omega).norm();
        if residual < 1e-13 || step.norm() < 1e-15 * omega.norm() {
            if residual < 1e-10 {
                return Ok(LandauRoot {
                    k,
                    omega: omega.re,
                    gamma: -omega.im,
                    residual,
                    iterations: it,
                });
            }
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_NEWTON,
        last_re: omega.re,
        last_im: omega.im,
        residual,
    })
}
