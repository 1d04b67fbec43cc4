//! Isotropic elastic constants and linear isotropic hardening.
//!
//! Units are MPa for stresses and moduli, mm for lengths.

use nalgebra::Matrix4;

use crate::error::{Error, Result};

/// Voigt vector ordering (xx, yy, zz, xy); strains carry the engineering shear 2*eps_xy.
pub type Voigt = nalgebra::Vector4<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    /// Young modulus (MPa).
    pub young: f64,
    pub poisson: f64,
    /// Initial yield stress (MPa).
    pub yield_stress: f64,
    /// Linear hardening modulus (MPa).
    pub hardening: f64,
}

impl Material {
    pub fn new(young: f64, poisson: f64, yield_stress: f64, hardening: f64) -> Result<Self> {
        if !(young > 0.0) {
            return Err(Error::InvalidMaterial(format!("E must be positive, got {young}")));
        }
        if !(poisson > 0.0 && poisson < 0.5) {
            return Err(Error::InvalidMaterial(format!("nu must lie in (0, 0.5), got {poisson}")));
        }
        if !(yield_stress > 0.0) {
            return Err(Error::InvalidMaterial(format!("sigma_y0 must be positive, got {yield_stress}")));
        }
        if !(hardening >= 0.0) {
            return Err(Error::InvalidMaterial(format!("H must be non-negative, got {hardening}")));
        }
        Ok(Material { young, poisson, yield_stress, hardening })
    }

    /// Structural steel used for both specimens: E = 210 GPa, nu = 0.3,
    /// sigma_y0 = 205 MPa, H = 2 GPa.
    pub fn steel() -> Self {
        Material { young: 210_000.0, poisson: 0.3, yield_stress: 205.0, hardening: 2_000.0 }
    }

    pub fn shear_modulus(&self) -> f64 {
        self.young / (2.0 * (1.0 + self.poisson))
    }

    pub fn lame_lambda(&self) -> f64 {
        self.young * self.poisson / ((1.0 + self.poisson) * (1.0 - 2.0 * self.poisson))
    }

    /// Plane-strain elastic matrix acting on Voigt strains.
    pub fn elastic_matrix(&self) -> Matrix4<f64> {
        let l = self.lame_lambda();
        let g = self.shear_modulus();
        let d = l + 2.0 * g;
        Matrix4::new(
            d, l, l, 0.0, //
            l, d, l, 0.0, //
            l, l, d, 0.0, //
            0.0, 0.0, 0.0, g,
        )
    }

    /// Current uniaxial yield stress for accumulated plastic strain `ebar`.
    pub fn yield_at(&self, ebar: f64) -> f64 {
        self.yield_stress + self.hardening * ebar
    }
}
