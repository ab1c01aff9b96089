//! Semiclassical expansion of the wavefunction up to third order.
//!
//! With `ψ = exp(iS/ħ)` and `S = S0 + ħS1 + ħ²S2 + ħ³S3`, the derivatives are
//!
//! ```text
//! S0' = ±p
//! S1' = i p' / (2p)
//! S2' = ±[-p'' / (4p²) + 3p'² / (8p³)]
//! S3' = i[-p''' / (8p³) + 3p'p'' / (4p⁴) - 3p'³ / (4p⁵)]
//! ```
//!
//! where `p = sqrt(2m(E - V))`. The odd terms are purely imaginary, so they
//! are stored as the real coefficient multiplying `i`.

use num_complex::Complex64;

use crate::constants::{ELECTRON_MASS, HBAR};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::{integrate, QuadOptions};

/// Minimum kinetic energy (J) for which WKB forms are evaluated.
pub const TURNING_POINT_GUARD: f64 = 1e-25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMomentum {
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl LocalMomentum {
    /// Local wavenumber `p / ħ`.
    pub fn k(&self) -> f64 {
        self.p / HBAR
    }

    /// `dk/dx`.
    pub fn k1(&self) -> f64 {
        self.p1 / HBAR
    }
}

pub fn momentum_derivs(potential: &dyn Potential, energy: f64, x: f64) -> Result<LocalMomentum> {
    let [v, v1, v2, v3] = potential.jet(x);
    let gap = energy - v;
    if !(gap > TURNING_POINT_GUARD) {
        return Err(Error::TurningPoint { x, gap });
    }
    let m = ELECTRON_MASS;
    let p = (2.0 * m * gap).sqrt();
    let p2_ = p * p;
    let p3_ = p2_ * p;
    let p1 = -m * v1 / p;
    let p2 = -m * v2 / p - m * m * v1 * v1 / p3_;
    let p3 = -m * v3 / p - 3.0 * m * m * v1 * v2 / p3_ - 3.0 * m * m * m * v1 * v1 * v1 / (p3_ * p2_);
    Ok(LocalMomentum { p, p1, p2, p3 })
}

/// `S0'..S3'` on the right-moving branch. `s1` and `s3` multiply `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SPrimeTerms {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl SPrimeTerms {
    pub fn from_momentum(lm: &LocalMomentum) -> Self {
        let LocalMomentum { p, p1, p2, p3 } = *lm;
        let pp = p * p;
        SPrimeTerms {
            s0: p,
            s1: 0.5 * p1 / p,
            s2: -p2 / (4.0 * pp) + 3.0 * p1 * p1 / (8.0 * pp * p),
            s3: -p3 / (8.0 * pp * p) + 3.0 * p1 * p2 / (4.0 * pp * pp)
                - 3.0 * p1 * p1 * p1 / (4.0 * pp * pp * p),
        }
    }

    fn truncated(self) -> Self {
        SPrimeTerms {
            s2: 0.0,
            s3: 0.0,
            ..self
        }
    }

    /// `ħⁿ Sₙ'` summed up to `order` (0..=3) on the given branch.
    pub fn composite(&self, order: usize, right_moving: bool) -> Complex64 {
        let sign = if right_moving { 1.0 } else { -1.0 };
        let terms = [
            Complex64::new(sign * self.s0, 0.0),
            Complex64::new(0.0, HBAR * self.s1),
            Complex64::new(sign * HBAR * HBAR * self.s2, 0.0),
            Complex64::new(0.0, HBAR * HBAR * HBAR * self.s3),
        ];
        terms.iter().take(order + 1).sum()
    }
}

pub fn s_prime_terms(potential: &dyn Potential, energy: f64, x: f64) -> Result<SPrimeTerms> {
    Ok(SPrimeTerms::from_momentum(&momentum_derivs(
        potential, energy, x,
    )?))
}

/// Integrated phases `S0..S3` at `x` (relative to `x_ref`) together with
/// their derivatives at `x`.
///
/// The incident (right-moving) and reflected actions differ only in the signs
/// of the even terms:
///
/// ```text
/// Si = +S0 + ħS1 + ħ²S2 + ħ³S3
/// Sr = -S0 + ħS1 - ħ²S2 + ħ³S3
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbPhase {
    pub x: f64,
    pub x_ref: f64,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub deriv: SPrimeTerms,
}

impl WkbPhase {
    /// Phase data with the reference placed at `x` itself.
    pub fn local(potential: &dyn Potential, energy: f64, x: f64) -> Result<Self> {
        Ok(WkbPhase {
            x,
            x_ref: x,
            s0: 0.0,
            s1: 0.0,
            s2: 0.0,
            s3: 0.0,
            deriv: s_prime_terms(potential, energy, x)?,
        })
    }

    fn action(&self, sign: f64) -> Complex64 {
        let h = HBAR;
        Complex64::new(
            sign * self.s0 + sign * h * h * self.s2,
            h * self.s1 + h * h * h * self.s3,
        )
    }

    pub fn incident(&self) -> Complex64 {
        self.action(1.0)
    }

    pub fn reflected(&self) -> Complex64 {
        self.action(-1.0)
    }

    pub fn incident_deriv(&self) -> Complex64 {
        self.deriv.composite(3, true)
    }

    pub fn reflected_deriv(&self) -> Complex64 {
        self.deriv.composite(3, false)
    }

    /// Drops S2 and S3, leaving the first-order WKB wave.
    pub fn truncated_to_first_order(&self) -> Self {
        WkbPhase {
            s2: 0.0,
            s3: 0.0,
            deriv: self.deriv.truncated(),
            ..*self
        }
    }
}

/// Integrates `S0'..S3'` from `x_ref` to `x`. Each term is integrated on its
/// own so the small even/odd corrections are not swamped by `S0`.
pub fn integrate_phase(potential: &dyn Potential, energy: f64, x_ref: f64, x: f64) -> Result<WkbPhase> {
    let deriv = s_prime_terms(potential, energy, x)?;
    s_prime_terms(potential, energy, x_ref)?;
    // a turning point inside makes S2 and S3 non-integrable
    const PROBES: usize = 4096;
    for i in 1..PROBES {
        let xi = x_ref + (x - x_ref) * i as f64 / PROBES as f64;
        let gap = energy - potential.value(xi);
        if !(gap > TURNING_POINT_GUARD) {
            return Err(Error::TurningPoint { x: xi, gap });
        }
    }

    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };
    let term = |pick: fn(&SPrimeTerms) -> f64| {
        integrate(
            |xi| {
                s_prime_terms(potential, energy, xi)
                    .map(|t| pick(&t))
                    .unwrap_or(f64::NAN)
            },
            x_ref,
            x,
            opts,
        )
        .map(|q| q.value)
    };
    Ok(WkbPhase {
        x,
        x_ref,
        s0: term(|t| t.s0)?,
        s1: term(|t| t.s1)?,
        s2: term(|t| t.s2)?,
        s3: term(|t| t.s3)?,
        deriv,
    })
}

/// Relative residual `|ψ''/ψ + p²/ħ²| / (p²/ħ²)` of the order-`order` WKB
/// wave at `x`. Second derivatives of `S` come from a five-point stencil.
pub fn schrodinger_residual(
    potential: &dyn Potential,
    energy: f64,
    x: f64,
    order: usize,
    step: f64,
) -> Result<f64> {
    let sp =
        |xi: f64| -> Result<Complex64> { Ok(s_prime_terms(potential, energy, xi)?.composite(order, true)) };
    let s1 = sp(x)?;
    let s2 = (sp(x - 2.0 * step)? - sp(x - step)? * 8.0 + sp(x + step)? * 8.0 - sp(x + 2.0 * step)?)
        / (12.0 * step);
    let p = momentum_derivs(potential, energy, x)?.p;
    let k2 = p * p / (HBAR * HBAR);
    let i = Complex64::i();
    let r = i * s2 / HBAR - s1 * s1 / (HBAR * HBAR) + k2;
    Ok(r.norm() / k2)
}
