//! Direct integration of the Schrödinger equation in polar form.
//!
//! With `x̄ = (x - x_lo)/D`, `V̄ = V/(eV_s)`, `Ē = E/(eV_s)` and
//! `V_s = ħ²/(2meD²)`, writing `ψ = F r e^{iθ}` turns the equation into
//!
//! ```text
//! r'' + [(Ē - V̄) - 1/r⁴] r = 0,     θ' = 1/r²
//! ```
//!
//! The outgoing wave fixes `r(1)` and `r'(1)`; `r` is then integrated backward
//! to `x̄ = 0` with classic RK4 and matched to incident plus reflected waves.

use crate::constants::{ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR};
use crate::error::{Error, Result};
use crate::method::{Method, TcResult};
use crate::potential::{DerivOrder, Potential};

pub const DEFAULT_STEPS: usize = 200_000;

/// Boundary waves used at both edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolarBoundary {
    /// Plane waves with the wavenumber frozen at the edge.
    PlaneWave,
    /// First-order WKB waves `(Ē - V̄)^{-1/4} e^{±i∫√(Ē - V̄)}`.
    Wkb,
}

impl PolarBoundary {
    pub fn method(self) -> Method {
        match self {
            PolarBoundary::PlaneWave => Method::DePw,
            PolarBoundary::Wkb => Method::DeWkb,
        }
    }

    pub fn from_method(method: Method) -> Option<Self> {
        match method {
            Method::DePw => Some(PolarBoundary::PlaneWave),
            Method::DeWkb => Some(PolarBoundary::Wkb),
            _ => None,
        }
    }
}

/// Dimensionless view of a potential at one energy.
#[derive(Debug, Clone, Copy)]
pub struct NondimScaling<'a> {
    potential: &'a dyn Potential,
    pub x_lo: f64,
    /// domain extent (m)
    pub d: f64,
    /// `ħ²/(2meD²)` in volts
    pub vs: f64,
    pub energy: f64,
    pub e_bar: f64,
}

impl<'a> NondimScaling<'a> {
    /// Energy scale `eV_s` in joules.
    pub fn energy_scale(&self) -> f64 {
        ELEMENTARY_CHARGE * self.vs
    }

    pub fn x_of(&self, xbar: f64) -> f64 {
        self.x_lo + self.d * xbar
    }

    pub fn vbar(&self, xbar: f64) -> f64 {
        self.potential.value(self.x_of(xbar)) / self.energy_scale()
    }

    pub fn vbar1(&self, xbar: f64) -> f64 {
        self.potential.deriv(self.x_of(xbar), DerivOrder::First) * self.d / self.energy_scale()
    }

    /// `Ē - V̄(x̄)`
    pub fn eps(&self, xbar: f64) -> f64 {
        self.e_bar - self.vbar(xbar)
    }

    /// `Ē - V̄(0)`
    pub fn eps_bar(&self) -> f64 {
        self.eps(0.0)
    }
}

pub fn nondimensionalize(potential: &dyn Potential, energy: f64) -> NondimScaling<'_> {
    let domain = potential.domain();
    let d = domain.width();
    let vs = HBAR * HBAR / (2.0 * ELECTRON_MASS * ELEMENTARY_CHARGE * d * d);
    NondimScaling {
        potential,
        x_lo: domain.lo,
        d,
        vs,
        energy,
        e_bar: energy / (ELEMENTARY_CHARGE * vs),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub xbar: f64,
    pub r: f64,
    /// `dr/dx̄`
    pub r1: f64,
}

fn require_allowed(scaling: &NondimScaling, xbar: f64) -> Result<f64> {
    let eps = scaling.eps(xbar);
    if !(eps > 0.0) {
        let x = scaling.x_of(xbar);
        return Err(Error::NoPropagatingChannel {
            x,
            energy: scaling.energy,
            potential: scaling.potential.value(x),
        });
    }
    Ok(eps)
}

/// Outgoing wave at `x̄ = 1`: `r = ε^{-1/4}` and, for WKB, `r' = V̄'/(4ε^{5/4})`
/// (the derivative of `ε^{-1/4}` with `ε' = -V̄'`).
pub fn initial_conditions(scaling: &NondimScaling, kind: PolarBoundary) -> Result<PolarState> {
    let eps = require_allowed(scaling, 1.0)?;
    let r = eps.powf(-0.25);
    let r1 = match kind {
        PolarBoundary::PlaneWave => 0.0,
        PolarBoundary::Wkb => scaling.vbar1(1.0) / (4.0 * eps.powf(1.25)),
    };
    Ok(PolarState { xbar: 1.0, r, r1 })
}

/// How the amplitude equation is advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PolarScheme {
    /// RK4 on `ψ'' = -(Ē - V̄)ψ` for complex `ψ = u + iv` with `u v' - v u' = 1`,
    /// reporting `r = |ψ|` and `r' = (u u' + v v')/r`. The trajectory is the
    /// same as that of the amplitude equation but stays smooth where `r`
    /// becomes small.
    #[default]
    Linear,
    /// RK4 directly on `r'' = -(Ē - V̄) r + 1/r³`. Breaks down for deep
    /// tunnelling, where `r` dips close to zero on the incident side.
    Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarOptions {
    pub steps: usize,
    /// Repeat the integration with half the step and report the change in `r(0)`.
    pub check_step_doubling: bool,
    pub store_profile: bool,
    pub scheme: PolarScheme,
}

impl Default for PolarOptions {
    fn default() -> Self {
        PolarOptions {
            steps: DEFAULT_STEPS,
            check_step_doubling: true,
            store_profile: false,
            scheme: PolarScheme::Linear,
        }
    }
}

impl PolarOptions {
    pub fn with_steps(steps: usize) -> Self {
        PolarOptions {
            steps,
            check_step_doubling: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarSolution {
    pub start: PolarState,
    pub end: PolarState,
    pub steps: usize,
    /// `|r_h(0) - r_{h/2}(0)| / r_{h/2}(0)`
    pub step_doubling_rel: Option<f64>,
    /// States from `x̄ = 1` down to `x̄ = 0`, one per step, when requested.
    pub profile: Vec<PolarState>,
    /// `r² dθ/dx̄` along the profile, which is 1 for an exact trajectory.
    /// Only the linear scheme carries the phase needed to measure it.
    pub flux: Vec<f64>,
}

#[derive(Default)]
struct Recorder {
    states: Vec<PolarState>,
    flux: Vec<f64>,
}

// r'' = -(ε - 1/r⁴) r
fn accel(scaling: &NondimScaling, xbar: f64, r: f64) -> f64 {
    let r2 = r * r;
    -(scaling.eps(xbar) - 1.0 / (r2 * r2)) * r
}

// grid point i of a run from x_start to 0
fn grid_x(x_start: f64, h: f64, i: usize, steps: usize) -> f64 {
    if i == steps {
        0.0
    } else {
        x_start + h * i as f64
    }
}

fn rk4_amplitude(
    scaling: &NondimScaling,
    start: PolarState,
    steps: usize,
    mut profile: Option<&mut Recorder>,
) -> Result<PolarState> {
    let h = -start.xbar / steps as f64;
    let PolarState {
        xbar: x_start,
        mut r,
        r1: mut v,
    } = start;
    for i in 0..steps {
        let x = grid_x(x_start, h, i, steps);
        let xm = x + 0.5 * h;
        let xn = grid_x(x_start, h, i + 1, steps);
        let k1r = v;
        let k1v = accel(scaling, x, r);
        let k2r = v + 0.5 * h * k1v;
        let k2v = accel(scaling, xm, r + 0.5 * h * k1r);
        let k3r = v + 0.5 * h * k2v;
        let k3v = accel(scaling, xm, r + 0.5 * h * k2r);
        let k4r = v + h * k3v;
        let k4v = accel(scaling, xn, r + h * k3r);
        r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(r > f64::MIN_POSITIVE) || !r.is_finite() || !v.is_finite() {
            return Err(Error::AmplitudeCollapse { xbar: xn, r });
        }
        if let Some(p) = profile.as_deref_mut() {
            p.states.push(PolarState { xbar: xn, r, r1: v });
        }
    }
    Ok(PolarState { xbar: 0.0, r, r1: v })
}

fn rk4_linear(
    scaling: &NondimScaling,
    start: PolarState,
    steps: usize,
    mut profile: Option<&mut Recorder>,
) -> Result<PolarState> {
    let h = -start.xbar / steps as f64;
    let x_start = start.xbar;
    // ψ = r e^{iθ} with θ = 0 at the start, so ψ' = r' + i/r there
    let mut y = [start.r, start.r1, 0.0, 1.0 / start.r];
    let f = |x: f64, y: &[f64; 4]| {
        let e = scaling.eps(x);
        [y[1], -e * y[0], y[3], -e * y[2]]
    };
    let axpy = |y: &[f64; 4], a: f64, k: &[f64; 4]| {
        [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]]
    };
    let state = |x: f64, y: &[f64; 4]| {
        let r = y[0].hypot(y[2]);
        PolarState {
            xbar: x,
            r,
            r1: (y[0] * y[1] + y[2] * y[3]) / r,
        }
    };
    for i in 0..steps {
        let x = grid_x(x_start, h, i, steps);
        let xm = x + 0.5 * h;
        let xn = grid_x(x_start, h, i + 1, steps);
        let k1 = f(x, &y);
        let k2 = f(xm, &axpy(&y, 0.5 * h, &k1));
        let k3 = f(xm, &axpy(&y, 0.5 * h, &k2));
        let k4 = f(xn, &axpy(&y, h, &k3));
        for j in 0..4 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::AmplitudeCollapse {
                xbar: xn,
                r: f64::NAN,
            });
        }
        if let Some(p) = profile.as_deref_mut() {
            p.states.push(state(xn, &y));
            p.flux.push(y[0] * y[3] - y[2] * y[1]);
        }
    }
    let end = state(0.0, &y);
    if !(end.r > f64::MIN_POSITIVE) {
        return Err(Error::AmplitudeCollapse { xbar: 0.0, r: end.r });
    }
    Ok(end)
}

fn rk4_run(
    scaling: &NondimScaling,
    start: PolarState,
    steps: usize,
    scheme: PolarScheme,
    profile: Option<&mut Recorder>,
) -> Result<PolarState> {
    match scheme {
        PolarScheme::Linear => rk4_linear(scaling, start, steps, profile),
        PolarScheme::Amplitude => rk4_amplitude(scaling, start, steps, profile),
    }
}

/// Integrates from `start` (normally `x̄ = 1`) back to `x̄ = 0` with
/// fixed-step RK4.
pub fn integrate_polar(
    scaling: &NondimScaling,
    start: PolarState,
    opts: PolarOptions,
) -> Result<PolarSolution> {
    if opts.steps == 0 {
        return Err(Error::param("steps", "need at least one integration step"));
    }
    if !(start.r > 0.0) || !start.r.is_finite() || !start.r1.is_finite() {
        return Err(Error::param("start", format!("invalid initial state {start:?}")));
    }
    let mut rec = Recorder::default();
    if opts.store_profile {
        rec.states.reserve(opts.steps + 1);
        rec.states.push(start);
        if opts.scheme == PolarScheme::Linear {
            rec.flux.reserve(opts.steps + 1);
            rec.flux.push(1.0);
        }
    }
    let end = rk4_run(
        scaling,
        start,
        opts.steps,
        opts.scheme,
        if opts.store_profile { Some(&mut rec) } else { None },
    )?;
    let step_doubling_rel = if opts.check_step_doubling {
        let fine = rk4_run(scaling, start, 2 * opts.steps, opts.scheme, None)?;
        Some(((end.r - fine.r) / fine.r).abs())
    } else {
        None
    };
    Ok(PolarSolution {
        start,
        end,
        steps: opts.steps,
        step_doubling_rel,
        profile: rec.states,
        flux: rec.flux,
    })
}

/// Phase along a stored profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    /// ascending
    pub xbar: Vec<f64>,
    /// `θ(x̄)` with `θ(1) = 0`
    pub theta: Vec<f64>,
    pub current: f64,
    /// `F = √(mJ/e)`
    pub normalization: f64,
}

/// Trapezoid accumulation of `θ' = 1/r²` from `θ(1) = 0`.
pub fn compute_phase(solution: &PolarSolution, current: f64) -> Result<PhaseRecord> {
    let prof = &solution.profile;
    if prof.len() < 2 {
        return Err(Error::param("solution", "no stored profile; set store_profile"));
    }
    if !(current > 0.0) {
        return Err(Error::param("current", "must be positive"));
    }
    let n = prof.len();
    let mut theta = vec![0.0; n];
    for j in 1..n {
        let (a, b) = (&prof[j - 1], &prof[j]);
        let mean = 0.5 * (1.0 / (a.r * a.r) + 1.0 / (b.r * b.r));
        theta[j] = theta[j - 1] + mean * (b.xbar - a.xbar);
    }
    theta.reverse();
    Ok(PhaseRecord {
        xbar: prof.iter().rev().map(|s| s.xbar).collect(),
        theta,
        current,
        normalization: (ELECTRON_MASS * current / ELEMENTARY_CHARGE).sqrt(),
    })
}

/// Transmitted over incident flux from `r(0)`, `r'(0)`.
///
/// With `u± = ε^{-1/4} e^{±iφ}` and `ε' = -V̄'`, the incident amplitude is
/// `W(u-, ψ)/2i` and
///
/// ```text
/// T = 4 / [ (r'/ε^{1/4} - r V̄'/(4ε^{5/4}))² + (ε^{1/4} r + 1/(ε^{1/4} r))² ]
/// ```
///
/// For plane-wave boundaries the `V̄'` term is absent.
pub fn tc_from_polar(state: &PolarState, scaling: &NondimScaling, kind: PolarBoundary) -> Result<f64> {
    let eps = require_allowed(scaling, 0.0)?;
    if !(state.r > 0.0) {
        return Err(Error::AmplitudeCollapse {
            xbar: state.xbar,
            r: state.r,
        });
    }
    let q = eps.powf(0.25);
    let slope = match kind {
        PolarBoundary::PlaneWave => 0.0,
        PolarBoundary::Wkb => scaling.vbar1(0.0) / (4.0 * eps.powf(1.25)),
    };
    let a = state.r1 / q - state.r * slope;
    let b = q * state.r + 1.0 / (q * state.r);
    Ok(4.0 / (a * a + b * b))
}

pub fn compute_tc_de(
    potential: &dyn Potential,
    energy: f64,
    kind: PolarBoundary,
    steps: usize,
) -> Result<TcResult> {
    Ok(compute_tc_de_with(potential, energy, kind, PolarOptions::with_steps(steps))?.0)
}

/// Like [`compute_tc_de`], also returning the integration record.
pub fn compute_tc_de_with(
    potential: &dyn Potential,
    energy: f64,
    kind: PolarBoundary,
    opts: PolarOptions,
) -> Result<(TcResult, PolarSolution)> {
    let scaling = nondimensionalize(potential, energy);
    let start = initial_conditions(&scaling, kind)?;
    let sol = integrate_polar(&scaling, start, opts)?;
    let tc = tc_from_polar(&sol.end, &scaling, kind)?;
    Ok((
        TcResult {
            energy,
            method: kind.method(),
            n_steps: opts.steps,
            tc,
        },
        sol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_constant, make_parabolic, make_sech2, Domain};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn scale_for_four_nanometres() {
        let p = make_parabolic(1.0, Domain::standard()).unwrap();
        let s = nondimensionalize(&p, 1e-19);
        assert_eq!(s.d, 4e-9);
        // ħ²/(2 m e D²)
        assert!(rel(s.vs, 2.381_238_779_895_034e-3) < 1e-12, "{}", s.vs);
        assert!(rel(s.e_bar * s.energy_scale(), 1e-19) < 1e-15);
        assert_eq!(s.x_of(0.0), -2e-9);
        assert_eq!(s.x_of(1.0), 2e-9);
    }

    #[test]
    fn chain_rule_for_vbar() {
        let p = make_sech2(1e-18, 1e-9, Domain::standard()).unwrap();
        let s = nondimensionalize(&p, 0.0);
        for &xb in &[0.1, 0.37, 0.8] {
            let x = s.x_of(xb);
            let expected = p.deriv(x, DerivOrder::First) * s.d / (ELEMENTARY_CHARGE * s.vs);
            assert!(rel(s.vbar1(xb), expected) < 1e-15);
        }
        let flat = make_constant(0.0, Domain::standard()).unwrap();
        let s = nondimensionalize(&flat, 1e-19);
        assert_eq!(s.vbar(0.3), 0.0);
        assert_eq!(s.vbar1(0.3), 0.0);
    }

    #[test]
    fn flat_initial_conditions() {
        let flat = make_constant(0.0, Domain::standard()).unwrap();
        let s = nondimensionalize(&flat, 1e-19);
        let w = initial_conditions(&s, PolarBoundary::Wkb).unwrap();
        let pw = initial_conditions(&s, PolarBoundary::PlaneWave).unwrap();
        assert_eq!(w, pw);
        assert!(rel(w.r, s.e_bar.powf(-0.25)) < 1e-15);
        assert_eq!(w.r1, 0.0);
    }

    #[test]
    fn outgoing_wkb_slope_sign() {
        // V decreases at the right edge, so the amplitude ε^{-1/4} decreases too
        let p = make_parabolic(1.0, Domain::standard()).unwrap();
        let s = nondimensionalize(&p, 1e-19);
        assert!(s.vbar1(1.0) < 0.0);
        let st = initial_conditions(&s, PolarBoundary::Wkb).unwrap();
        assert!(st.r1 < 0.0);
        let h = 1e-6;
        let fd = (s.eps(1.0 + h).powf(-0.25) - s.eps(1.0 - h).powf(-0.25)) / (2.0 * h);
        assert!(rel(st.r1, fd) < 1e-6);
    }

    #[test]
    fn closed_edge_is_rejected() {
        let p = make_parabolic(1.0, Domain::standard()).unwrap();
        let s = nondimensionalize(&p, -5e-18);
        assert!(matches!(
            initial_conditions(&s, PolarBoundary::Wkb),
            Err(Error::NoPropagatingChannel { .. })
        ));
    }

    #[test]
    fn constant_potential_fixed_point() {
        let flat = make_constant(-0.5e-19, Domain::standard()).unwrap();
        for kind in [PolarBoundary::PlaneWave, PolarBoundary::Wkb] {
            let (tc, sol) = compute_tc_de_with(&flat, 1e-19, kind, PolarOptions::default()).unwrap();
            assert!(rel(sol.end.r, sol.start.r) < 1e-12);
            assert!(sol.end.r1.abs() < 1e-12);
            assert!((tc.tc - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_of_a_free_wave() {
        let flat = make_constant(0.0, Domain::standard()).unwrap();
        let opts = PolarOptions {
            steps: 20_000,
            check_step_doubling: false,
            store_profile: true,
            scheme: PolarScheme::Linear,
        };
        let (_, sol) = compute_tc_de_with(&flat, 1e-19, PolarBoundary::Wkb, opts).unwrap();
        let ph = compute_phase(&sol, 1.0).unwrap();
        let s = nondimensionalize(&flat, 1e-19);
        assert_eq!(ph.xbar[0], 0.0);
        assert_eq!(*ph.theta.last().unwrap(), 0.0);
        for (x, t) in ph.xbar.iter().zip(&ph.theta) {
            assert!((t - s.e_bar.sqrt() * (x - 1.0)).abs() < 1e-10 * s.e_bar.sqrt());
        }
        assert!(rel(ph.normalization, (ELECTRON_MASS / ELEMENTARY_CHARGE).sqrt()) < 1e-15);
    }

    #[test]
    fn phase_is_monotone_and_consistent() {
        let p = make_parabolic(1.0, Domain::standard()).unwrap();
        let opts = PolarOptions {
            steps: DEFAULT_STEPS,
            check_step_doubling: false,
            store_profile: true,
            scheme: PolarScheme::Linear,
        };
        let (_, sol) = compute_tc_de_with(&p, -0.5e-19, PolarBoundary::Wkb, opts).unwrap();
        let ph = compute_phase(&sol, 2.5).unwrap();
        assert!(ph.theta.windows(2).all(|w| w[1] > w[0]));
        // r² dθ/dx̄ = 1 pointwise
        assert_eq!(sol.flux.len(), sol.profile.len());
        assert!(sol.flux.iter().all(|w| (w - 1.0).abs() < 1e-10));
        assert!(compute_phase(&sol, 0.0).is_err());
    }

    #[test]
    fn kemble_midpoint() {
        let p = make_parabolic(1.0, Domain::standard()).unwrap();
        let (tc, sol) = compute_tc_de_with(&p, 0.0, PolarBoundary::Wkb, PolarOptions::default()).unwrap();
        assert!(sol.end.r.is_finite() && sol.end.r > 0.0);
        assert!(rel(tc.tc, 0.5) < 1e-3, "{}", tc.tc);
        assert!(sol.step_doubling_rel.unwrap() < 1e-8);
    }

    #[test]
    fn bounded_by_one() {
        let p = make_parabolic(1.0, Domain::standard()).unwrap();
        for i in 0..=20 {
            let e = -2e-19 + 2e-20 * i as f64;
            for kind in [PolarBoundary::PlaneWave, PolarBoundary::Wkb] {
                let t = compute_tc_de(&p, e, kind, 20_000).unwrap().tc;
                assert!(t > 0.0 && t <= 1.0 + 1e-12, "{kind:?} {e}: {t}");
            }
        }
    }

    #[test]
    fn rejects_bad_options() {
        let p = make_parabolic(1.0, Domain::standard()).unwrap();
        let opts = PolarOptions {
            steps: 0,
            ..Default::default()
        };
        assert!(compute_tc_de_with(&p, 0.0, PolarBoundary::Wkb, opts).is_err());
    }
}
