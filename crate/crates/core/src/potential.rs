//! Potential-energy landscapes on a finite computational domain.
//!
//! Energies are in joules and positions in metres. Every model exposes its
//! value and first three derivatives; the WKB boundary terms need all of them.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::param("domain", "bounds must be finite"));
        }
        if lo >= hi {
            return Err(Error::param(
                "domain",
                format!("degenerate interval [{lo:e}, {hi:e}]"),
            ));
        }
        Ok(Domain { lo, hi })
    }

    /// The [-2 nm, 2 nm] window used for both reference barriers.
    pub fn standard() -> Self {
        Domain { lo: -2e-9, hi: 2e-9 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
    Third,
}

/// Closed-form transmission known for a potential on the infinite line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// Inverted parabola `-alpha x^2`.
    Kemble { alpha: f64 },
    /// `v0 (sech^2(x/width) - 1)`.
    Eckart { v0: f64, width: f64 },
}

pub trait Potential: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn domain(&self) -> Domain;

    fn value(&self, x: f64) -> f64;

    fn deriv(&self, x: f64, order: DerivOrder) -> f64;

    fn params(&self) -> Vec<(&'static str, f64)> {
        Vec::new()
    }

    fn reference(&self) -> Option<Reference> {
        None
    }

    /// `[V, V', V'', V''']` at `x`.
    fn jet(&self, x: f64) -> [f64; 4] {
        [
            self.value(x),
            self.deriv(x, DerivOrder::First),
            self.deriv(x, DerivOrder::Second),
            self.deriv(x, DerivOrder::Third),
        ]
    }
}

/// `V(x) = -alpha x^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Parabolic {
    alpha: f64,
    domain: Domain,
}

pub fn make_parabolic(alpha: f64, domain: Domain) -> Result<Parabolic> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha:e}")));
    }
    let domain = Domain::new(domain.lo, domain.hi)?;
    Ok(Parabolic { alpha, domain })
}

impl Parabolic {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Potential for Parabolic {
    fn name(&self) -> &str {
        "parabolic"
    }

    fn domain(&self) -> Domain {
        self.domain
    }

    fn value(&self, x: f64) -> f64 {
        -self.alpha * x * x
    }

    fn deriv(&self, x: f64, order: DerivOrder) -> f64 {
        match order {
            DerivOrder::First => -2.0 * self.alpha * x,
            DerivOrder::Second => -2.0 * self.alpha,
            DerivOrder::Third => 0.0,
        }
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("alpha", self.alpha)]
    }

    fn reference(&self) -> Option<Reference> {
        Some(Reference::Kemble { alpha: self.alpha })
    }
}

/// `V(x) = v0 (sech^2(x / width) - 1)`; zero at the top, `-v0` asymptotically.
#[derive(Debug, Clone, PartialEq)]
pub struct Sech2 {
    v0: f64,
    width: f64,
    domain: Domain,
}

pub fn make_sech2(v0: f64, width: f64, domain: Domain) -> Result<Sech2> {
    if !(v0 > 0.0 && v0.is_finite()) {
        return Err(Error::param("v0", format!("must be positive, got {v0:e}")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::param("width", format!("must be positive, got {width:e}")));
    }
    let domain = Domain::new(domain.lo, domain.hi)?;
    Ok(Sech2 { v0, width, domain })
}

impl Sech2 {
    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    // (sech^2 u, tanh u)
    fn st(&self, x: f64) -> (f64, f64) {
        let u = x / self.width;
        let c = u.cosh();
        (1.0 / (c * c), u.tanh())
    }
}

impl Potential for Sech2 {
    fn name(&self) -> &str {
        "sech2"
    }

    fn domain(&self) -> Domain {
        self.domain
    }

    fn value(&self, x: f64) -> f64 {
        // sech^2 - 1 = -tanh^2, without the cancellation
        let t = (x / self.width).tanh();
        -self.v0 * t * t
    }

    fn deriv(&self, x: f64, order: DerivOrder) -> f64 {
        let (s, t) = self.st(x);
        let a = self.width;
        match order {
            DerivOrder::First => self.v0 / a * (-2.0 * s * t),
            DerivOrder::Second => self.v0 / (a * a) * (4.0 * s * t * t - 2.0 * s * s),
            DerivOrder::Third => self.v0 / (a * a * a) * (-8.0 * s * t * t * t + 16.0 * s * s * t),
        }
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("v0", self.v0), ("width", self.width)]
    }

    fn reference(&self) -> Option<Reference> {
        Some(Reference::Eckart {
            v0: self.v0,
            width: self.width,
        })
    }
}

/// Flat potential. Used for free-propagation checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    level: f64,
    domain: Domain,
}

pub fn make_constant(level: f64, domain: Domain) -> Result<Constant> {
    if !level.is_finite() {
        return Err(Error::param("level", "must be finite"));
    }
    let domain = Domain::new(domain.lo, domain.hi)?;
    Ok(Constant { level, domain })
}

impl Potential for Constant {
    fn name(&self) -> &str {
        "constant"
    }

    fn domain(&self) -> Domain {
        self.domain
    }

    fn value(&self, _x: f64) -> f64 {
        self.level
    }

    fn deriv(&self, _x: f64, _order: DerivOrder) -> f64 {
        0.0
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("level", self.level)]
    }
}

/// Cubic-spline interpolant through user samples.
///
/// The end slopes are clamped to the derivative of the cubic through the
/// four outermost samples, so cubic data is reproduced exactly. The third
/// derivative is piecewise constant and therefore the least accurate output.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

pub fn make_tabulated(samples: &[(f64, f64)]) -> Result<Tabulated> {
    if samples.len() < 4 {
        return Err(Error::InvalidTable(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    for (i, w) in samples.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(Error::InvalidTable(format!(
                "abscissae must be strictly increasing (rows {} and {})",
                i,
                i + 1
            )));
        }
    }
    if samples.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
        return Err(Error::InvalidTable("non-finite sample".into()));
    }
    let x: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let n = x.len();
    let s_lo = lagrange_slope([x[0], x[1], x[2], x[3]], [y[0], y[1], y[2], y[3]], 0);
    let s_hi = lagrange_slope(
        [x[n - 4], x[n - 3], x[n - 2], x[n - 1]],
        [y[n - 4], y[n - 3], y[n - 2], y[n - 1]],
        3,
    );
    let m = clamped_second_derivatives(&x, &y, s_lo, s_hi);
    Ok(Tabulated { x, y, m })
}

/// Parses two-column `x V` text (whitespace or comma separated, `#` comments).
pub fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::InvalidTable(format!(
                "line {}: expected 2 columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |f: &str| {
            f.parse::<f64>()
                .map_err(|e| Error::InvalidTable(format!("line {}: `{f}`: {e}", lineno + 1)))
        };
        rows.push((parse(fields[0])?, parse(fields[1])?));
    }
    Ok(rows)
}

pub fn load_table(path: &Path) -> Result<Tabulated> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    make_tabulated(&parse_table(&text)?)
}

// Derivative at xs[at] of the cubic through the four points.
fn lagrange_slope(xs: [f64; 4], ys: [f64; 4], at: usize) -> f64 {
    let x0 = xs[at];
    let mut slope = 0.0;
    for j in 0..4 {
        let denom: f64 = (0..4).filter(|&m| m != j).map(|m| xs[j] - xs[m]).product();
        let dl = if j == at {
            (0..4)
                .filter(|&m| m != j)
                .map(|m| 1.0 / (x0 - xs[m]))
                .sum::<f64>()
        } else {
            (0..4)
                .filter(|&m| m != j && m != at)
                .map(|m| x0 - xs[m])
                .product::<f64>()
                / denom
        };
        slope += ys[j] * dl;
    }
    slope
}

fn clamped_second_derivatives(x: &[f64], y: &[f64], s_lo: f64, s_hi: f64) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];

    diag[0] = 2.0 * h[0];
    sup[0] = h[0];
    rhs[0] = 6.0 * ((y[1] - y[0]) / h[0] - s_lo);
    for i in 1..n - 1 {
        sub[i] = h[i - 1];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        sup[i] = h[i];
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    sub[n - 1] = h[n - 2];
    diag[n - 1] = 2.0 * h[n - 2];
    rhs[n - 1] = 6.0 * (s_hi - (y[n - 1] - y[n - 2]) / h[n - 2]);

    // Thomas algorithm; the system is diagonally dominant.
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
    }
    m
}

impl Tabulated {
    fn interval(&self, x: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&xi| xi <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    fn eval(&self, x: f64) -> [f64; 4] {
        let i = self.interval(x);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = x1 - x;
        let b = x - x0;
        let c0 = y0 / h - m0 * h / 6.0;
        let c1 = y1 / h - m1 * h / 6.0;
        let v = m0 * a * a * a / (6.0 * h) + m1 * b * b * b / (6.0 * h) + c0 * a + c1 * b;
        let d1 = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - c0 + c1;
        let d2 = (m0 * a + m1 * b) / h;
        let d3 = (m1 - m0) / h;
        [v, d1, d2, d3]
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.y.iter().copied())
    }
}

impl Potential for Tabulated {
    fn name(&self) -> &str {
        "table"
    }

    fn domain(&self) -> Domain {
        Domain {
            lo: self.x[0],
            hi: self.x[self.x.len() - 1],
        }
    }

    fn value(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }

    fn deriv(&self, x: f64, order: DerivOrder) -> f64 {
        let e = self.eval(x);
        match order {
            DerivOrder::First => e[1],
            DerivOrder::Second => e[2],
            DerivOrder::Third => e[3],
        }
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("samples", self.x.len() as f64)]
    }

    fn jet(&self, x: f64) -> [f64; 4] {
        self.eval(x)
    }
}
