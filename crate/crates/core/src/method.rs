use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Every way this crate can produce a transmission coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "tm-pw")]
    TmPw,
    #[serde(rename = "tm-wkb1")]
    TmWkb1,
    #[serde(rename = "tm-wkb3")]
    TmWkb3,
    #[serde(rename = "de-pw")]
    DePw,
    #[serde(rename = "de-wkb")]
    DeWkb,
    #[serde(rename = "wkb-formula")]
    WkbFormula,
    #[serde(rename = "exact")]
    Exact,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::TmPw,
        Method::TmWkb1,
        Method::TmWkb3,
        Method::DePw,
        Method::DeWkb,
        Method::WkbFormula,
        Method::Exact,
    ];

    /// The five discretized solvers.
    pub const NUMERICAL: [Method; 5] = [
        Method::TmPw,
        Method::TmWkb1,
        Method::TmWkb3,
        Method::DePw,
        Method::DeWkb,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::TmPw => "tm-pw",
            Method::TmWkb1 => "tm-wkb1",
            Method::TmWkb3 => "tm-wkb3",
            Method::DePw => "de-pw",
            Method::DeWkb => "de-wkb",
            Method::WkbFormula => "wkb-formula",
            Method::Exact => "exact",
        }
    }

    pub fn is_transfer_matrix(self) -> bool {
        matches!(self, Method::TmPw | Method::TmWkb1 | Method::TmWkb3)
    }

    pub fn is_polar_ode(self) -> bool {
        matches!(self, Method::DePw | Method::DeWkb)
    }

    pub fn is_analytic(self) -> bool {
        matches!(self, Method::WkbFormula | Method::Exact)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL.iter().copied().find(|m| m.tag() == s).ok_or_else(|| {
            let tags: Vec<_> = Method::ALL.iter().map(|m| m.tag()).collect();
            Error::Config(format!(
                "unknown method `{s}` (expected one of {})",
                tags.join(", ")
            ))
        })
    }
}

/// One transmission coefficient. `n_steps` is 0 for closed-form methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcResult {
    pub energy: f64,
    pub method: Method,
    pub n_steps: usize,
    pub tc: f64,
}
