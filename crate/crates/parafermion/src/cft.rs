//! Coulomb-gas formulas relating lattice spins to conformal data.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CftError {
    #[error("coupling g must be positive, got {0}")]
    NonPositiveCoupling(f64),
    #[error("spin -1/2 is a pole of c(s)")]
    SpinPole,
    #[error("kappa must be positive and N at least 1 (got kappa={kappa}, N={n})")]
    BadBoundaryWeight { n: i64, kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombGas {
    g: f64,
}

impl CoulombGas {
    pub fn new(g: f64) -> Result<CoulombGas, CftError> {
        if g > 0.0 && g.is_finite() {
            Ok(CoulombGas { g })
        } else {
            Err(CftError::NonPositiveCoupling(g))
        }
    }

    /// Dense Potts phase, g = 1 − γ/π.
    pub fn potts(gamma: f64) -> Result<CoulombGas, CftError> {
        CoulombGas::new(1.0 - gamma / PI)
    }

    /// Dilute O(n) branch, g = 2η/π.
    pub fn dilute(eta: f64) -> Result<CoulombGas, CftError> {
        CoulombGas::new(2.0 * eta / PI)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn central_charge(&self) -> f64 {
        central_charge(self.g)
    }

    pub fn weight(&self, r: i64, rp: i64) -> f64 {
        conformal_weight(self.g, r, rp)
    }
}

pub fn central_charge(g: f64) -> f64 {
    1.0 - 6.0 * (1.0 - g).powi(2) / g
}

/// h_{r,r'} = ((g r − r')² − (1 − g)²) / (4g).
pub fn conformal_weight(g: f64, r: i64, rp: i64) -> f64 {
    let x = g * r as f64 - rp as f64;
    (x * x - (1.0 - g).powi(2)) / (4.0 * g)
}

/// Central charge of the O(n) branch with −π < η < 0, in terms of g′ = 2(π+η)/π.
pub fn c_regime34(gp: f64) -> f64 {
    1.5 - 6.0 * (1.0 - gp).powi(2) / gp
}

pub fn regime34_coupling(eta: f64) -> f64 {
    2.0 * (PI + eta) / PI
}

/// Central charge implied by a curve of spin s under the simple SLE relation.
pub fn sle_c_of_s(s: f64) -> Result<f64, CftError> {
    let d = 2.0 * s + 1.0;
    if d.abs() < 1e-15 {
        return Err(CftError::SpinPole);
    }
    Ok(2.0 * s * (5.0 - 8.0 * s) / d)
}

/// Spin of a boundary operator creating N strands, s = h_{N+1,1} = N(2N+4−κ)/(2κ).
pub fn spin_from_boundary_weight(n: i64, kappa: f64) -> Result<f64, CftError> {
    if n < 1 || !(kappa > 0.0) {
        return Err(CftError::BadBoundaryWeight { n, kappa });
    }
    let nf = n as f64;
    Ok(nf * (2.0 * nf + 4.0 - kappa) / (2.0 * kappa))
}

/// κ associated with coupling g (κ = 4/g).
pub fn kappa_of_g(g: f64) -> f64 {
    4.0 / g
}

/// Spins at which the simple SLE relation gives c = 1. The quadratic has a
/// double root at s = 1/4, where cos πs = 1/√2.
pub fn sle_c1_spins() -> Vec<f64> {
    // 10s − 16s² = 2s + 1  ⇔  16s² − 8s + 1 = 0
    let (a, b, c) = (16.0f64, -8.0f64, 1.0f64);
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let r1 = (-b - disc.sqrt()) / (2.0 * a);
    let r2 = (-b + disc.sqrt()) / (2.0 * a);
    if (r1 - r2).abs() < 1e-15 {
        vec![r1]
    } else {
        vec![r1, r2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgRow {
    pub param: f64,
    pub g: f64,
    pub c: f64,
    pub s: f64,
    pub h21: f64,
    pub h31: f64,
}

/// Potts table over γ: s = 1 − 2γ/π.
pub fn gamma_row(gamma: f64) -> CgRow {
    let g = 1.0 - gamma / PI;
    CgRow {
        param: gamma,
        g,
        c: central_charge(g),
        s: 1.0 - 2.0 * gamma / PI,
        h21: conformal_weight(g, 2, 1),
        h31: conformal_weight(g, 3, 1),
    }
}

/// O(n) table over η: s = 3η/(2π) − 1/2.
pub fn eta_row(eta: f64) -> CgRow {
    let g = 2.0 * eta / PI;
    let c = if g > 0.0 { central_charge(g) } else { f64::NAN };
    CgRow {
        param: eta,
        g,
        c,
        s: 3.0 * eta / (2.0 * PI) - 0.5,
        h21: if g > 0.0 { conformal_weight(g, 2, 1) } else { f64::NAN },
        h31: if g > 0.0 { conformal_weight(g, 3, 1) } else { f64::NAN },
    }
}
