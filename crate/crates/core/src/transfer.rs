//! Step-potential transfer matrices with open boundaries.
//!
//! The domain `[x_0, x_N]` is cut into `N` equal segments, each carrying the
//! potential at its midpoint and the plane waves `A_j e^{ik_j x} + B_j e^{-ik_j x}`.
//! Interior interfaces use the analytic step matrix. The two outer matrices
//! connect segment 1 and segment N to the wave assumed beyond the domain:
//!
//! * [`BoundaryKind::PlaneWave`]: the potential is frozen at its edge value;
//! * [`BoundaryKind::Wkb1`]: first-order WKB waves `p^{-1/2} e^{±i∫k}`;
//! * [`BoundaryKind::Wkb3`]: third-order WKB waves `e^{iS_i/ħ}`, `e^{iS_r/ħ}`.
//!
//! With `A_0 = 1` and `B_{N+1} = 0` the transmitted amplitude is
//! `det(M) / M22` for `M = M_N · … · M_0`.

use num_complex::Complex64;

use crate::constants::{ELECTRON_MASS, HBAR};
use crate::error::{Error, Result};
use crate::matrix::{ChainProduct, ComplexMatrix2};
use crate::method::{Method, TcResult};
use crate::potential::{DerivOrder, Potential};
use crate::wkb::{integrate_phase, WkbPhase, TURNING_POINT_GUARD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    PlaneWave,
    Wkb1,
    Wkb3,
}

impl BoundaryKind {
    pub fn method(self) -> Method {
        match self {
            BoundaryKind::PlaneWave => Method::TmPw,
            BoundaryKind::Wkb1 => Method::TmWkb1,
            BoundaryKind::Wkb3 => Method::TmWkb3,
        }
    }

    pub fn from_method(method: Method) -> Option<Self> {
        match method {
            Method::TmPw => Some(BoundaryKind::PlaneWave),
            Method::TmWkb1 => Some(BoundaryKind::Wkb1),
            Method::TmWkb3 => Some(BoundaryKind::Wkb3),
            _ => None,
        }
    }
}

/// Piecewise-constant approximation of a potential at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGrid {
    pub energy: f64,
    /// `x_0..x_N`
    pub x_edges: Vec<f64>,
    /// `V_1..V_N`, stored at index `j - 1`
    pub v: Vec<f64>,
    /// `k_0, k_1..k_N, k_{N+1}`; `k_0` and `k_{N+1}` belong to the edge values of V
    pub k: Vec<Complex64>,
    /// `dk/dx` just outside the left and right edges
    pub kprime_lo: f64,
    pub kprime_hi: f64,
}

impl StepGrid {
    pub fn n_segments(&self) -> usize {
        self.v.len()
    }

    pub fn width(&self) -> f64 {
        self.x_edges[1] - self.x_edges[0]
    }

    pub fn x0(&self) -> f64 {
        self.x_edges[0]
    }

    pub fn xn(&self) -> f64 {
        self.x_edges[self.x_edges.len() - 1]
    }
}

/// `sqrt(2m(E - V)) / ħ` on the branch with `Im k ≥ 0`.
pub fn wavenumber(energy: f64, v: f64) -> Complex64 {
    let gap = energy - v;
    let mag = (2.0 * ELECTRON_MASS * gap.abs()).sqrt() / HBAR;
    if gap >= 0.0 {
        Complex64::new(mag, 0.0)
    } else {
        Complex64::new(0.0, mag)
    }
}

pub fn discretize(potential: &dyn Potential, energy: f64, n: usize) -> Result<StepGrid> {
    if n == 0 {
        return Err(Error::param("n_steps", "need at least one segment"));
    }
    let d = potential.domain();
    for x in [d.lo, d.hi] {
        let v = potential.value(x);
        if !(energy > v) {
            return Err(Error::NoPropagatingChannel {
                x,
                energy,
                potential: v,
            });
        }
    }
    let h = d.width() / n as f64;
    let x_edges: Vec<f64> = (0..=n)
        .map(|j| if j == n { d.hi } else { d.lo + h * j as f64 })
        .collect();
    let v: Vec<f64> = x_edges
        .windows(2)
        .map(|w| potential.value(0.5 * (w[0] + w[1])))
        .collect();
    let mut k = Vec::with_capacity(n + 2);
    k.push(wavenumber(energy, potential.value(d.lo)));
    k.extend(v.iter().map(|&vj| wavenumber(energy, vj)));
    k.push(wavenumber(energy, potential.value(d.hi)));
    let kprime =
        |x: f64, kk: f64| -ELECTRON_MASS * potential.deriv(x, DerivOrder::First) / (kk * HBAR * HBAR);
    let kprime_lo = kprime(d.lo, k[0].re);
    let kprime_hi = kprime(d.hi, k[n + 1].re);
    Ok(StepGrid {
        energy,
        x_edges,
        v,
        k,
        kprime_lo,
        kprime_hi,
    })
}

/// Matching matrix from `A e^{ik_a x} + B e^{-ik_a x}` on the left of `x` to
/// the same form with `k_b` on the right.
pub fn interface_matrix(k_a: Complex64, k_b: Complex64, x: f64, index: usize) -> Result<ComplexMatrix2> {
    if k_b.norm() == 0.0 {
        return Err(Error::ZeroWavenumber { segment: index });
    }
    let ratio = k_a / k_b;
    let i = Complex64::i();
    let e_diff = (i * (k_b - k_a) * x).exp();
    let e_sum = (i * (k_b + k_a) * x).exp();
    let plus = 0.5 * (1.0 + ratio);
    let minus = 0.5 * (1.0 - ratio);
    Ok(ComplexMatrix2::new(
        plus / e_diff,
        minus / e_sum,
        minus * e_sum,
        plus * e_diff,
    ))
}

/// Interior step matrix at `x_l`, `1 <= l <= N - 1`. Its determinant is `k_l / k_{l+1}`.
pub fn step_matrix(grid: &StepGrid, l: usize) -> Result<ComplexMatrix2> {
    let n = grid.n_segments();
    if l == 0 || l >= n {
        return Err(Error::param(
            "l",
            format!("interface {l} outside 1..{}", n.saturating_sub(1)),
        ));
    }
    interface_matrix(grid.k[l], grid.k[l + 1], grid.x_edges[l], l + 1)
}

/// Auxiliary quantities of the first-order WKB boundary matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTerms {
    pub alpha0: Complex64,
    pub beta0: Complex64,
    pub gamma0_plus: Complex64,
    pub gamma0_minus: Complex64,
    /// `k_{N+1} + k_N`
    pub sn_plus: Complex64,
    /// `k_{N+1} - k_N`
    pub sn_minus: Complex64,
    /// `k'_{N+1} / (2 k_{N+1})`
    pub rn: f64,
    pub kprime0: f64,
    pub kprime_n1: f64,
}

impl BoundaryTerms {
    /// `β_0 = i k'_0 / (2 k_0 k_1)`, which follows from `d/dx (ħk)^{-1/2} e^{i∫k}
    /// = (ik - k'/(2k)) (ħk)^{-1/2} e^{i∫k}`.
    pub fn new(grid: &StepGrid) -> Self {
        let n = grid.n_segments();
        let k0 = grid.k[0];
        let k1 = grid.k[1];
        let kn = grid.k[n];
        let kn1 = grid.k[n + 1];
        let alpha0 = k0 / k1;
        let beta0 = Complex64::i() * grid.kprime_lo / (2.0 * k0 * k1);
        BoundaryTerms {
            alpha0,
            beta0,
            gamma0_plus: alpha0 + beta0,
            gamma0_minus: alpha0 - beta0,
            sn_plus: kn1 + kn,
            sn_minus: kn1 - kn,
            rn: grid.kprime_hi / (2.0 * kn1.re),
            kprime0: grid.kprime_lo,
            kprime_n1: grid.kprime_hi,
        }
    }
}

fn check_edge(x: f64, k: Complex64) -> Result<()> {
    let kinetic = (HBAR * k.re).powi(2) / (2.0 * ELECTRON_MASS);
    if k.im != 0.0 || !(kinetic > TURNING_POINT_GUARD) {
        let gap = kinetic - (HBAR * k.im).powi(2) / (2.0 * ELECTRON_MASS);
        return Err(Error::TurningPoint { x, gap });
    }
    Ok(())
}

/// Left boundary matrix `M_0`, mapping `(A_0, B_0)` to `(A_1, B_1)`.
pub fn boundary_left(
    grid: &StepGrid,
    kind: BoundaryKind,
    phase: Option<&WkbPhase>,
) -> Result<ComplexMatrix2> {
    let x0 = grid.x0();
    let k1 = grid.k[1];
    match kind {
        BoundaryKind::PlaneWave => interface_matrix(grid.k[0], k1, x0, 1),
        BoundaryKind::Wkb1 => {
            check_edge(x0, grid.k[0])?;
            let t = BoundaryTerms::new(grid);
            let i = Complex64::i();
            let em = (-i * k1 * x0).exp();
            let ep = (i * k1 * x0).exp();
            let pref = 1.0 / (2.0 * (HBAR * grid.k[0].re).sqrt());
            Ok(ComplexMatrix2::new(
                (1.0 + t.gamma0_plus) * em,
                (1.0 - t.gamma0_minus) * em,
                (1.0 - t.gamma0_plus) * ep,
                (1.0 + t.gamma0_minus) * ep,
            )
            .scaled(Complex64::new(pref, 0.0)))
        }
        BoundaryKind::Wkb3 => {
            let ph = phase.ok_or(Error::MissingPhase)?;
            check_edge(x0, grid.k[0])?;
            let i = Complex64::i();
            let si = ph.incident();
            let sr = ph.reflected();
            let hk1 = HBAR * k1;
            let di = ph.incident_deriv() / hk1;
            let dr = ph.reflected_deriv() / hk1;
            let ei = i * si / HBAR;
            let er = i * sr / HBAR;
            let kx = i * k1 * x0;
            Ok(ComplexMatrix2::new(
                0.5 * (1.0 + di) * (ei - kx).exp(),
                0.5 * (1.0 + dr) * (er - kx).exp(),
                0.5 * (1.0 - di) * (ei + kx).exp(),
                0.5 * (1.0 - dr) * (er + kx).exp(),
            ))
        }
    }
}

/// Right boundary matrix `M_N`, mapping `(A_N, B_N)` to `(A_{N+1}, B_{N+1})`.
pub fn boundary_right(
    grid: &StepGrid,
    kind: BoundaryKind,
    phase: Option<&WkbPhase>,
) -> Result<ComplexMatrix2> {
    let n = grid.n_segments();
    let xn = grid.xn();
    let kn = grid.k[n];
    let kn1 = grid.k[n + 1];
    let i = Complex64::i();
    match kind {
        BoundaryKind::PlaneWave => interface_matrix(kn, kn1, xn, n + 1),
        BoundaryKind::Wkb1 => {
            check_edge(xn, kn1)?;
            let t = BoundaryTerms::new(grid);
            let ep = (i * kn * xn).exp();
            let em = (-i * kn * xn).exp();
            let pref = HBAR.sqrt() / (2.0 * i * kn1.re.sqrt());
            Ok(ComplexMatrix2::new(
                (i * t.sn_plus + t.rn) * ep,
                (i * t.sn_minus + t.rn) * em,
                (i * t.sn_minus - t.rn) * ep,
                (i * t.sn_plus - t.rn) * em,
            )
            .scaled(pref))
        }
        BoundaryKind::Wkb3 => {
            let ph = phase.ok_or(Error::MissingPhase)?;
            check_edge(xn, kn1)?;
            let si = ph.incident() / HBAR;
            let sr = ph.reflected() / HBAR;
            let di = ph.incident_deriv();
            let dr = ph.reflected_deriv();
            let hkn = HBAR * kn;
            let kx = kn * xn;
            let pref = 1.0 / (di - dr);
            Ok(ComplexMatrix2::new(
                (hkn - dr) * (i * (kx - si)).exp(),
                -(hkn + dr) * (i * (-kx - si)).exp(),
                -(hkn - di) * (i * (kx - sr)).exp(),
                (hkn + di) * (i * (-kx - sr)).exp(),
            )
            .scaled(pref))
        }
    }
}

/// Incident/transmitted amplitudes for `A_0 = 1`, `B_{N+1} = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitudes {
    pub a0: Complex64,
    pub b0: Complex64,
    pub a_n1: Complex64,
    pub b_n1: Complex64,
}

/// Solves `M (1, B_0)ᵀ = (A_{N+1}, 0)ᵀ`. `A_{N+1}` is `det(M) / M22`.
pub fn scattering_amplitudes(m: &ComplexMatrix2) -> Result<ScatteringAmplitudes> {
    if m.m22.norm() == 0.0 {
        return Err(Error::SingularChain);
    }
    let b0 = -m.m21 / m.m22;
    let a_n1 = m.det_entries() / m.m22 * m.scale_log.exp();
    Ok(ScatteringAmplitudes {
        a0: Complex64::new(1.0, 0.0),
        b0,
        a_n1,
        b_n1: Complex64::new(0.0, 0.0),
    })
}

// |A_{N+1}|² evaluated in log form
fn transmitted_norm_sqr(m: &ComplexMatrix2) -> Result<f64> {
    if m.m22.norm() == 0.0 {
        return Err(Error::SingularChain);
    }
    let ratio = (m.det_entries() / m.m22).norm_sqr();
    Ok(ratio * (2.0 * m.scale_log).exp())
}

/// Transmission for plane-wave or first-order WKB boundaries.
pub fn tc_first_order(m: &ComplexMatrix2, grid: &StepGrid, kind: BoundaryKind) -> Result<TcResult> {
    let a2 = transmitted_norm_sqr(m)?;
    let n = grid.n_segments();
    let tc = match kind {
        // flux ratio of the exterior plane waves
        BoundaryKind::PlaneWave => a2 * grid.k[n + 1].re / grid.k[0].re,
        // (ħk)^{-1/2} normalization makes flux proportional to |A|²
        BoundaryKind::Wkb1 => a2,
        BoundaryKind::Wkb3 => return Err(Error::param("kind", "third-order boundaries need tc_third_order")),
    };
    Ok(TcResult {
        energy: grid.energy,
        method: kind.method(),
        n_steps: n,
        tc,
    })
}

/// Transmission for third-order WKB boundaries: transmitted over incident flux,
///
/// `|A_{N+1}|² Re S_i'(x_N) / Re S_i'(x_0) · exp((2/ħ)(Im S_i(x_0) - Im S_i(x_N)))`.
pub fn tc_third_order(m: &ComplexMatrix2, left: &WkbPhase, right: &WkbPhase) -> Result<f64> {
    let a2 = transmitted_norm_sqr(m)?;
    let in_flux = left.incident_deriv().re;
    if !(in_flux > 0.0) {
        return Err(Error::TurningPoint { x: left.x, gap: 0.0 });
    }
    let ratio = right.incident_deriv().re / in_flux;
    let damping = (2.0 / HBAR * (left.incident().im - right.incident().im)).exp();
    Ok(a2 * ratio * damping)
}

/// Options for the transfer-matrix pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TmOptions {
    /// Zero `S2` and `S3` in the third-order boundaries.
    pub first_order_phases: bool,
}

/// WKB phase data at both edges. The reference point is `x_0`; when a turning
/// point lies inside the domain the integral to `x_N` does not exist and the
/// right-edge data uses a local reference instead. The transmission is
/// unaffected because `Im S_i(x_N)` cancels between `|A_{N+1}|²` and the flux
/// factor.
pub fn boundary_phases(potential: &dyn Potential, energy: f64) -> Result<(WkbPhase, WkbPhase)> {
    let d = potential.domain();
    let left = WkbPhase::local(potential, energy, d.lo)?;
    let right = match integrate_phase(potential, energy, d.lo, d.hi) {
        Ok(ph) => ph,
        Err(Error::TurningPoint { .. }) | Err(Error::QuadratureFailed { .. }) => {
            WkbPhase::local(potential, energy, d.hi)?
        }
        Err(e) => return Err(e),
    };
    Ok((left, right))
}

/// Full pipeline: discretize, build `M_0..M_N`, multiply, extract the transmission.
pub fn compute_tc_tm(
    potential: &dyn Potential,
    energy: f64,
    n: usize,
    kind: BoundaryKind,
) -> Result<TcResult> {
    compute_tc_tm_with(potential, energy, n, kind, TmOptions::default())
}

pub fn compute_tc_tm_with(
    potential: &dyn Potential,
    energy: f64,
    n: usize,
    kind: BoundaryKind,
    opts: TmOptions,
) -> Result<TcResult> {
    let grid = discretize(potential, energy, n)?;
    let phases = match kind {
        BoundaryKind::Wkb3 => {
            let (l, r) = boundary_phases(potential, energy)?;
            if opts.first_order_phases {
                Some((l.truncated_to_first_order(), r.truncated_to_first_order()))
            } else {
                Some((l, r))
            }
        }
        _ => None,
    };
    let (left, right) = match &phases {
        Some((l, r)) => (Some(l), Some(r)),
        None => (None, None),
    };

    let mut chain = ChainProduct::new();
    chain.push(boundary_left(&grid, kind, left)?)?;
    for l in 1..n {
        chain.push(step_matrix(&grid, l)?)?;
    }
    chain.push(boundary_right(&grid, kind, right)?)?;
    let m = chain.finish();

    match (kind, phases) {
        (BoundaryKind::Wkb3, Some((l, r))) => Ok(TcResult {
            energy,
            method: Method::TmWkb3,
            n_steps: n,
            tc: tc_third_order(&m, &l, &r)?,
        }),
        _ => tc_first_order(&m, &grid, kind),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_tc_parabolic;
    use crate::potential::{make_constant, make_parabolic, Domain};
    use crate::wkb::s_prime_terms;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn parabola() -> crate::potential::Parabolic {
        make_parabolic(1.0, Domain::standard()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_segment_flat() {
        let flat = make_constant(0.0, Domain::standard()).unwrap();
        let g = discretize(&flat, 1e-19, 1).unwrap();
        assert_eq!(g.n_segments(), 1);
        assert_eq!(g.k.len(), 3);
        let k = (2.0 * ELECTRON_MASS * 1e-19).sqrt() / HBAR;
        for kj in &g.k {
            assert_eq!(*kj, c(k, 0.0));
        }
        assert_eq!(
            discretize(&flat, 1e-19, 0).unwrap_err(),
            Error::param("n_steps", "need at least one segment")
        );
    }

    #[test]
    fn grid_geometry_and_branch() {
        let p = parabola();
        let g = discretize(&p, -1e-19, 1000).unwrap();
        assert_eq!(g.x0(), -2e-9);
        assert_eq!(g.xn(), 2e-9);
        assert!((g.width() - 4e-12).abs() < 1e-24);
        for (j, w) in g.x_edges.windows(2).enumerate() {
            assert_eq!(g.v[j], p.value(0.5 * (w[0] + w[1])));
        }
        // under the barrier the wavenumber is imaginary with positive part
        assert!(g.k[500].im > 0.0 && g.k[500].re == 0.0);
        assert!(g.k.iter().all(|k| k.im >= 0.0));
        assert!(discretize(&p, -5e-18, 10).is_err());
    }

    #[test]
    fn step_matrix_identity_for_equal_k() {
        let m = interface_matrix(c(3e9, 0.0), c(3e9, 0.0), 1.3e-9, 1).unwrap();
        assert!((m.m11 - c(1.0, 0.0)).norm() < 1e-15);
        assert!((m.m22 - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(m.m12, c(0.0, 0.0));
        assert_eq!(m.m21, c(0.0, 0.0));
        assert!(interface_matrix(c(1.0, 0.0), c(0.0, 0.0), 0.0, 7).is_err());
    }

    #[test]
    fn real_step_matrix_symmetry() {
        let m = interface_matrix(c(2.1e9, 0.0), c(3.4e9, 0.0), -0.7e-9, 1).unwrap();
        assert!((m.m11 - m.m22.conj()).norm() < 1e-15);
        assert!((m.m12 - m.m21.conj()).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn step_determinant(ka in 1e7f64..3e10, kb in 1e7f64..3e10, ia in any::<bool>(), ib in any::<bool>(), x in -2e-9f64..2e-9) {
            let ka = if ia { c(0.0, ka) } else { c(ka, 0.0) };
            let kb = if ib { c(0.0, kb) } else { c(kb, 0.0) };
            let m = interface_matrix(ka, kb, x, 1).unwrap();
            let det = m.det();
            prop_assert!((det - ka / kb).norm() <= 1e-12 * (ka / kb).norm());
        }
    }

    #[test]
    fn wkb1_flat_boundary_is_diagonal() {
        let flat = make_constant(0.0, Domain::standard()).unwrap();
        let g = discretize(&flat, 1e-19, 10).unwrap();
        let t = BoundaryTerms::new(&g);
        assert_eq!(t.beta0, c(0.0, 0.0));
        assert_eq!(t.rn, 0.0);
        assert_eq!(t.sn_minus, c(0.0, 0.0));
        let m0 = boundary_left(&g, BoundaryKind::Wkb1, None).unwrap();
        assert!(m0.m12.norm() < 1e-30 && m0.m21.norm() < 1e-30);
        let mn = boundary_right(&g, BoundaryKind::Wkb1, None).unwrap();
        assert!(mn.m12.norm() < 1e-30 && mn.m21.norm() < 1e-30);
    }

    #[test]
    fn boundary_term_identities() {
        let p = parabola();
        let g = discretize(&p, 0.7e-19, 500).unwrap();
        let t = BoundaryTerms::new(&g);
        let n = g.n_segments();
        assert!((t.sn_plus - t.sn_minus - 2.0 * g.k[n]).norm() < 1e-14 * g.k[n].norm());
        assert!((t.gamma0_plus - t.alpha0 - t.beta0).norm() < 1e-15);
        assert!((t.gamma0_minus - t.alpha0 + t.beta0).norm() < 1e-15);
        // k'_0 = -m V'(x0) / (k0 ħ²)
        let lm = crate::wkb::momentum_derivs(&p, 0.7e-19, -2e-9).unwrap();
        assert!(rel(t.kprime0, lm.k1()) < 1e-13);
    }

    #[test]
    fn wkb3_right_prefactor() {
        let p = parabola();
        let e = 1e-19;
        let (_, r) = boundary_phases(&p, e).unwrap();
        let t = s_prime_terms(&p, e, 2e-9).unwrap();
        let diff = r.incident_deriv() - r.reflected_deriv();
        assert!(rel(diff.re, 2.0 * t.s0 + 2.0 * HBAR * HBAR * t.s2) < 1e-15);
    }

    #[test]
    fn missing_phase() {
        let p = parabola();
        let g = discretize(&p, 1e-19, 10).unwrap();
        assert_eq!(
            boundary_left(&g, BoundaryKind::Wkb3, None).unwrap_err(),
            Error::MissingPhase
        );
        assert_eq!(
            boundary_right(&g, BoundaryKind::Wkb3, None).unwrap_err(),
            Error::MissingPhase
        );
    }

    #[test]
    fn free_propagation_is_unitary() {
        let flat = make_constant(-3e-19, Domain::standard()).unwrap();
        for kind in [BoundaryKind::PlaneWave, BoundaryKind::Wkb1, BoundaryKind::Wkb3] {
            for n in [1, 2, 10, 1000] {
                let r = compute_tc_tm(&flat, 1e-19, n, kind).unwrap();
                assert!((r.tc - 1.0).abs() < 1e-12, "{kind:?} N={n}: {}", r.tc);
            }
        }
    }

    #[test]
    fn chain_determinant_telescopes() {
        let p = parabola();
        let g = discretize(&p, -1.3e-19, 20_000).unwrap();
        let n = g.n_segments();
        let mats: Vec<_> = (1..n).map(|l| step_matrix(&g, l).unwrap()).collect();
        let m = crate::matrix::chain_product(&mats).unwrap();
        let expected = g.k[1] / g.k[n];
        let det = m.det_entries() * (2.0 * m.scale_log).exp();
        assert!((det - expected).norm() < 1e-8 * expected.norm());
    }

    #[test]
    fn scattering_amplitudes_solve_the_system() {
        let p = parabola();
        let g = discretize(&p, 0.2e-19, 200).unwrap();
        let mut chain = ChainProduct::new();
        chain
            .push(boundary_left(&g, BoundaryKind::PlaneWave, None).unwrap())
            .unwrap();
        for l in 1..200 {
            chain.push(step_matrix(&g, l).unwrap()).unwrap();
        }
        chain
            .push(boundary_right(&g, BoundaryKind::PlaneWave, None).unwrap())
            .unwrap();
        let m = chain.finish();
        let s = scattering_amplitudes(&m).unwrap();
        let out = m.apply_entries([s.a0, s.b0]);
        let scale = m.scale_log.exp();
        assert!((out[0] * scale - s.a_n1).norm() < 1e-12 * s.a_n1.norm());
        assert!(out[1].norm() < 1e-12);
        // flux conservation: |B0|² + TC = 1 for equal edge potentials
        let tc = tc_first_order(&m, &g, BoundaryKind::PlaneWave).unwrap().tc;
        assert!((s.b0.norm_sqr() + tc - 1.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_n_runs() {
        let p = parabola();
        for kind in [BoundaryKind::PlaneWave, BoundaryKind::Wkb1, BoundaryKind::Wkb3] {
            let r = compute_tc_tm(&p, 1e-19, 3, kind).unwrap();
            assert!(r.tc.is_finite() && r.tc >= 0.0);
        }
    }

    #[test]
    fn kemble_midpoint() {
        let p = parabola();
        let w1 = compute_tc_tm(&p, 0.0, 20_000, BoundaryKind::Wkb1).unwrap().tc;
        let w3 = compute_tc_tm(&p, 0.0, 20_000, BoundaryKind::Wkb3).unwrap().tc;
        assert!(rel(w1, 0.5) < 1e-3, "{w1}");
        assert!(rel(w3, 0.5) < 1e-4, "{w3}");
        assert_eq!(exact_tc_parabolic(0.0, 1.0), 0.5);
    }

    #[test]
    fn symmetric_flux_ratio_is_one() {
        let p = parabola();
        let (l, r) = boundary_phases(&p, 0.4e-19).unwrap();
        assert!(rel(r.incident_deriv().re, l.incident_deriv().re) < 1e-12);
    }

    #[test]
    fn phase_reference_does_not_change_tc() {
        // x_0 reference vs local reference at x_N
        let p = parabola();
        let e = 0.9e-19;
        let grid = discretize(&p, e, 5000).unwrap();
        let (l, r_int) = boundary_phases(&p, e).unwrap();
        assert!(r_int.x_ref == -2e-9 && r_int.s0 > 0.0);
        let r_loc = WkbPhase::local(&p, e, 2e-9).unwrap();
        let tc_with = |r: &WkbPhase| {
            let mut chain = ChainProduct::new();
            chain
                .push(boundary_left(&grid, BoundaryKind::Wkb3, Some(&l)).unwrap())
                .unwrap();
            for j in 1..5000 {
                chain.push(step_matrix(&grid, j).unwrap()).unwrap();
            }
            chain
                .push(boundary_right(&grid, BoundaryKind::Wkb3, Some(r)).unwrap())
                .unwrap();
            tc_third_order(&chain.finish(), &l, r).unwrap()
        };
        assert!(rel(tc_with(&r_int), tc_with(&r_loc)) < 1e-10);
    }

    #[test]
    fn deep_barrier_long_chain() {
        let p = parabola();
        let r = compute_tc_tm(&p, -2e-19, 100_000, BoundaryKind::PlaneWave).unwrap();
        assert!(r.tc > 0.0 && r.tc < 1e-3);
    }
}
