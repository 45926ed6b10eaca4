//! Planck scales of time, length, momentum and energy.
//!
//! From `{c, b, ħ}`:
//!
//! ```text
//! λt = √(ħ/(bc))   λq = √(ħc/b)   λp = √(ħb/c)   λe = √(ħbc)
//! ```
//!
//! and with `G = αG c⁴/b` the familiar `{c, G, ħ}` forms follow. Residuals are
//! relative throughout because the four scales span dozens of decades.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

pub const CODATA_C: f64 = 2.997_924_58e8;
pub const CODATA_HBAR: f64 = 1.054_571_817e-34;
pub const CODATA_G: f64 = 6.674_30e-11;

/// Tolerance for the consistency check between `b`, `G` and `αG`.
pub const CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleConstants {
    c: f64,
    hbar: f64,
    b: Option<f64>,
    g: Option<f64>,
    alpha_g: Option<f64>,
}

impl ScaleConstants {
    pub fn new(c: f64, hbar: f64, b: Option<f64>, g: Option<f64>, alpha_g: Option<f64>) -> Result<Self> {
        positive("c", c)?;
        positive("hbar", hbar)?;
        let b = b.map(|x| positive("b", x)).transpose()?;
        let g = g.map(|x| positive("G", x)).transpose()?;
        let alpha_g = alpha_g.map(|x| positive("alpha_G", x)).transpose()?;
        match (b, g) {
            (None, None) => {
                return Err(Error::InvalidParameter {
                    name: "b",
                    reason: "one of b or G is required".into(),
                })
            }
            (Some(b), Some(g)) => {
                let expected = alpha_g.unwrap_or(1.0) * c.powi(4) / b;
                let rel = (g - expected).abs() / expected;
                if rel > CONSISTENCY_TOL {
                    return Err(Error::InvalidParameter {
                        name: "G",
                        reason: format!("G differs from alpha_G c^4/b by {rel:e} relative"),
                    });
                }
            }
            _ => {}
        }
        Ok(Self { c, hbar, b, g, alpha_g })
    }

    /// CODATA `c`, `ħ`, `G` with the force scale taken from `b = αG c⁴/G`.
    pub fn codata(alpha_g: f64) -> Result<Self> {
        Self::new(CODATA_C, CODATA_HBAR, None, Some(CODATA_G), Some(alpha_g))
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn alpha_g(&self) -> f64 {
        self.alpha_g.unwrap_or(1.0)
    }

    /// `b`, or `αG c⁴/G` when only `G` was given.
    pub fn force_scale(&self) -> f64 {
        match (self.b, self.g) {
            (Some(b), _) => b,
            (None, Some(g)) => self.alpha_g() * self.c.powi(4) / g,
            (None, None) => unreachable!("checked at construction"),
        }
    }

    /// `G`, or `αG c⁴/b` when only `b` was given.
    pub fn gravitational(&self) -> f64 {
        match (self.g, self.b) {
            (Some(g), _) => g,
            (None, Some(b)) => self.alpha_g() * self.c.powi(4) / b,
            (None, None) => unreachable!("checked at construction"),
        }
    }

    pub fn scales(&self) -> Result<PlanckScales> {
        planck_from_cbh(self.c, self.force_scale(), self.hbar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanckScales {
    pub lambda_t: f64,
    pub lambda_q: f64,
    pub lambda_p: f64,
    pub lambda_e: f64,
}

impl PlanckScales {
    pub fn as_array(&self) -> [f64; 4] {
        [self.lambda_t, self.lambda_q, self.lambda_p, self.lambda_e]
    }

    /// Largest relative difference between corresponding scales.
    pub fn max_relative_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn planck_from_cbh(c: f64, b: f64, hbar: f64) -> Result<PlanckScales> {
    positive("c", c)?;
    positive("b", b)?;
    positive("hbar", hbar)?;
    Ok(PlanckScales {
        lambda_t: (hbar / (b * c)).sqrt(),
        lambda_q: (hbar * c / b).sqrt(),
        lambda_p: (hbar * b / c).sqrt(),
        lambda_e: (hbar * b * c).sqrt(),
    })
}

pub fn planck_from_cgh(c: f64, g: f64, hbar: f64) -> Result<PlanckScales> {
    positive("c", c)?;
    positive("G", g)?;
    positive("hbar", hbar)?;
    Ok(PlanckScales {
        lambda_t: (hbar * g / c.powi(5)).sqrt(),
        lambda_q: (hbar * g / c.powi(3)).sqrt(),
        lambda_p: (hbar * c.powi(3) / g).sqrt(),
        lambda_e: (hbar * c.powi(5) / g).sqrt(),
    })
}

/// Relative residuals of the six identities tying the scales to `c`, `b`, `ħ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `λq/λt = c`
    pub length_over_time: f64,
    /// `λe/λp = c`
    pub energy_over_momentum: f64,
    /// `λq λp = ħ`
    pub length_times_momentum: f64,
    /// `λt λe = ħ`
    pub time_times_energy: f64,
    /// `λp/λt = b`
    pub momentum_over_time: f64,
    /// `λe/λq = b`
    pub energy_over_length: f64,
}

impl IdentityResiduals {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.length_over_time,
            self.energy_over_momentum,
            self.length_times_momentum,
            self.time_times_energy,
            self.momentum_over_time,
            self.energy_over_length,
        ]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }
}

fn rel(value: f64, target: f64) -> f64 {
    if value == target {
        0.0
    } else {
        ((value - target) / target).abs()
    }
}

pub fn verify_identities(s: &PlanckScales, c: f64, force_scale: f64, hbar: f64) -> IdentityResiduals {
    IdentityResiduals {
        length_over_time: rel(s.lambda_q / s.lambda_t, c),
        energy_over_momentum: rel(s.lambda_e / s.lambda_p, c),
        length_times_momentum: rel(s.lambda_q * s.lambda_p, hbar),
        time_times_energy: rel(s.lambda_t * s.lambda_e, hbar),
        momentum_over_time: rel(s.lambda_p / s.lambda_t, force_scale),
        energy_over_length: rel(s.lambda_e / s.lambda_q, force_scale),
    }
}
