//! Delta sources and region tags.

use crate::error::{Error, Result};
use crate::spinor::Spinor;

/// Regions separated by the interfaces: Ω₂ above Γ (or Γ₂), Ω₁ below Γ
/// (between Γ₁ and Γ₂ for two interfaces), Ω₀ below Γ₁.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    Omega0,
    Omega1,
    Omega2,
}

impl Region {
    /// Signed mass of the region for interface mass m: +m in Ω₂ and Ω₀, −m in Ω₁.
    pub fn mass(self, m: f64) -> f64 {
        match self {
            Region::Omega1 => -m,
            _ => m,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Omega0 => "omega0",
            Region::Omega1 => "omega1",
            Region::Omega2 => "omega2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "omega0" | "0" => Ok(Region::Omega0),
            "omega1" | "1" => Ok(Region::Omega1),
            "omega2" | "2" => Ok(Region::Omega2),
            _ => Err(Error::Validation(format!("unknown region '{s}'"))),
        }
    }
}

/// f = δ_{x₀}·amplitude inside one region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceSpec {
    pub location: [f64; 2],
    pub amplitude: Spinor,
    pub region: Region,
}

impl SourceSpec {
    pub fn new(location: [f64; 2], amplitude: Spinor, region: Region) -> Self {
        Self { location, amplitude, region }
    }
}
