//! Closed-form transmission coefficients and the WKB tunneling formula.
//!
//! Energies are measured from the barrier top, so both reference barriers
//! peak at `V(0) = 0`.
//!
//! The WKB formula integrates `sqrt(2m(V - E))` between the turning points.
//! Written with `E - V` under the root, the integrand would be imaginary in
//! the forbidden region; the positive-real barrier form is the one used here.

use std::f64::consts::PI;

use crate::constants::{ELECTRON_MASS, HBAR};
use crate::error::{Error, Result};
use crate::potential::{Potential, Reference};
use crate::quadrature::{integrate, QuadOptions};

const SCAN_POINTS: usize = 10_000;

/// Kemble formula for the inverted parabola `-alpha x^2`.
pub fn exact_tc_parabolic(energy: f64, alpha: f64) -> f64 {
    let omega = (2.0 * alpha / ELECTRON_MASS).sqrt();
    let z = 2.0 * PI * energy / (HBAR * omega);
    // logistic(z) without overflow for large |z|
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let ez = z.exp();
        ez / (1.0 + ez)
    }
}

/// `8 m v0 a^2 / hbar^2`, the dimensionless strength of an Eckart barrier.
pub fn eckart_strength(v0: f64, width: f64) -> f64 {
    8.0 * ELECTRON_MASS * v0 * width * width / (HBAR * HBAR)
}

/// Transmission through `v0 (sech^2(x/width) - 1)` on the infinite line.
pub fn exact_tc_sech2(energy: f64, v0: f64, width: f64) -> Result<f64> {
    if !(v0 > 0.0 && width > 0.0) {
        return Err(Error::param("v0/width", "must be positive"));
    }
    let kinetic = energy + v0;
    if kinetic <= 0.0 {
        return Err(Error::NoPropagatingChannel {
            x: f64::NEG_INFINITY,
            energy,
            potential: -v0,
        });
    }
    let k = (2.0 * ELECTRON_MASS * kinetic).sqrt() / HBAR;
    let c = PI * k * width;
    let lambda = eckart_strength(v0, width);
    // transmission = 1 / (1 + (g / sinh c)^2) where g = cosh((pi/2) sqrt(lambda - 1)),
    // or cos((pi/2) sqrt(1 - lambda)) for weak barriers
    let ln_ratio = if lambda >= 1.0 {
        let b = 0.5 * PI * (lambda - 1.0).sqrt();
        ln_cosh(b) - ln_sinh(c)
    } else {
        let g = (0.5 * PI * (1.0 - lambda).sqrt()).cos().abs();
        if g == 0.0 {
            return Ok(1.0);
        }
        g.ln() - ln_sinh(c)
    };
    let ratio_sq = (2.0 * ln_ratio).exp();
    Ok(1.0 / (1.0 + ratio_sq))
}

fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (0.5 * (1.0 + (-2.0 * x).exp())).ln()
}

fn ln_sinh(x: f64) -> f64 {
    // x > 0
    if x < 20.0 {
        x.sinh().ln()
    } else {
        x + (0.5 * (1.0 - (-2.0 * x).exp())).ln()
    }
}

/// Exact transmission for a potential with a known closed form.
pub fn exact_tc(reference: Reference, energy: f64) -> Result<f64> {
    match reference {
        Reference::Kemble { alpha } => Ok(exact_tc_parabolic(energy, alpha)),
        Reference::Eckart { v0, width } => exact_tc_sech2(energy, v0, width),
    }
}

pub const SUPPORTED_REFERENCES: &str = "parabolic, sech2";

/// Exact transmission for `potential`, or an error naming the supported models.
pub fn exact_tc_for(potential: &dyn Potential, energy: f64) -> Result<f64> {
    let reference = potential.reference().ok_or_else(|| Error::NoExactReference {
        name: potential.name().to_string(),
        supported: SUPPORTED_REFERENCES,
    })?;
    exact_tc(reference, energy)
}

/// Classical turning points `x1 < x2` bracketing the forbidden region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoints {
    pub x1: f64,
    pub x2: f64,
}

struct Scan {
    xs: Vec<f64>,
    gaps: Vec<f64>,
    scale: f64,
}

// V(x) - E on a uniform grid over the domain
fn scan(potential: &dyn Potential, energy: f64) -> Scan {
    let d = potential.domain();
    let xs: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| d.lo + d.width() * i as f64 / SCAN_POINTS as f64)
        .collect();
    let values: Vec<f64> = xs.iter().map(|&x| potential.value(x)).collect();
    let scale = values.iter().fold(energy.abs(), |acc, v| acc.max(v.abs()));
    let gaps = values.iter().map(|v| v - energy).collect();
    Scan { xs, gaps, scale }
}

fn bisect(potential: &dyn Potential, energy: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let f = |x: f64| potential.value(x) - energy;
    let rising = f(hi) > f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() <= tol {
            return mid;
        }
        if (fm > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Outermost sign changes of `V - E`, refined by bisection.
pub fn find_turning_points(potential: &dyn Potential, energy: f64) -> Result<TurningPoints> {
    let s = scan(potential, energy);
    let n = s.gaps.len();
    if s.gaps[0] >= 0.0 || s.gaps[n - 1] >= 0.0 {
        let (x, gap) = if s.gaps[0] >= 0.0 {
            (s.xs[0], -s.gaps[0])
        } else {
            (s.xs[n - 1], -s.gaps[n - 1])
        };
        return Err(Error::NoPropagatingChannel {
            x,
            energy,
            potential: energy - gap,
        });
    }
    let first = s.gaps.windows(2).position(|w| w[0] < 0.0 && w[1] >= 0.0);
    let last = s.gaps.windows(2).rposition(|w| w[0] >= 0.0 && w[1] < 0.0);
    let (Some(i), Some(j)) = (first, last) else {
        return Err(Error::NoTurningPoints { energy });
    };
    let tol = 1e-12 * s.scale;
    let x1 = bisect(potential, energy, s.xs[i], s.xs[i + 1], tol);
    let x2 = bisect(potential, energy, s.xs[j], s.xs[j + 1], tol);
    if x1 >= x2 {
        return Err(Error::NoTurningPoints { energy });
    }
    Ok(TurningPoints { x1, x2 })
}

/// `(2/hbar) ∫ sqrt(2m(V - E)) dx` between the turning points.
///
/// The substitution `x = x1 + (x2 - x1) sin^2 u` removes the square-root
/// zeros at both ends.
pub fn barrier_action(potential: &dyn Potential, energy: f64, tp: TurningPoints) -> Result<f64> {
    let span = tp.x2 - tp.x1;
    let integrand = |u: f64| {
        let s = u.sin();
        let x = tp.x1 + span * s * s;
        let gap = (potential.value(x) - energy).max(0.0);
        (2.0 * ELECTRON_MASS * gap).sqrt() * span * (2.0 * u).sin()
    };
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        max_intervals: 4000,
    };
    let q = integrate(integrand, 0.0, 0.5 * PI, opts)?;
    Ok(2.0 / HBAR * q.value)
}

fn at_barrier_top(potential: &dyn Potential, energy: f64) -> bool {
    let s = scan(potential, energy);
    let peak = s.gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    peak.abs() <= 1e-12 * s.scale
}

/// WKB transmission `e^-θ / (1 + e^-θ / 4)^2`.
///
/// At the barrier top the action vanishes and the result is 0.64. Above the
/// barrier there are no turning points and the formula does not apply.
pub fn wkb_tc(potential: &dyn Potential, energy: f64) -> Result<f64> {
    let theta = match find_turning_points(potential, energy) {
        Ok(tp) => barrier_action(potential, energy, tp)?,
        Err(Error::NoTurningPoints { .. }) if at_barrier_top(potential, energy) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(wkb_formula(theta))
}

pub fn wkb_formula(theta: f64) -> f64 {
    let t = (-theta).exp();
    t / ((1.0 + 0.25 * t) * (1.0 + 0.25 * t))
}
