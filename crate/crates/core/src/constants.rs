//! Physical constants in SI units.
//!
//! The values are frozen so that sweep outputs are reproducible bit for bit.

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.0545718e-34;
/// Electron mass (kg).
pub const ELECTRON_MASS: f64 = 9.10938356e-31;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// Bundle of the constants used by every solver. The particle is an electron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    pub charge: f64,
}

impl PhysicalConstants {
    pub const ELECTRON: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        mass: ELECTRON_MASS,
        charge: ELEMENTARY_CHARGE,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::ELECTRON
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_positive() {
        let c = PhysicalConstants::default();
        assert!(c.hbar > 0.0 && c.mass > 0.0 && c.charge > 0.0);
        assert_eq!(c.hbar, 1.0545718e-34);
        assert_eq!(c.mass, 9.10938356e-31);
        assert_eq!(c.charge, 1.602176634e-19);
    }
}
