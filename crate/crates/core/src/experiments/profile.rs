use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdv::Soliton;
use crate::params::ModelParams;
use crate::spectral::{Grid1D, RealField};

/// Largest boundary value of an initial profile, relative to its peak.
pub const LOCALIZATION_RATIO: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileShape {
    Gaussian,
    Sech2,
    Soliton,
}

impl fmt::Display for ProfileShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::Sech2 => "sech2",
            Self::Soliton => "soliton",
        })
    }
}

impl FromStr for ProfileShape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "sech2" => Ok(Self::Sech2),
            "soliton" => Ok(Self::Soliton),
            other => Err(format!("unknown profile '{other}' (gaussian | sech2 | soliton)")),
        }
    }
}

/// Localized initial surface. `center = None` puts the crest mid-cell.
/// For `Soliton` the width follows from the amplitude and the parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    pub shape: ProfileShape,
    pub amplitude: f64,
    pub width: f64,
    pub center: Option<f64>,
}

impl Default for InitialProfile {
    fn default() -> Self {
        Self {
            shape: ProfileShape::Gaussian,
            amplitude: 1.0,
            width: 2.0,
            center: None,
        }
    }
}

impl InitialProfile {
    pub fn zero() -> Self {
        Self {
            amplitude: 0.0,
            ..Self::default()
        }
    }

    /// Samples the profile and checks that it has decayed at the cell edges.
    pub fn sample(&self, grid: &Arc<Grid1D>, p: &ModelParams) -> Result<RealField> {
        let x0 = self.center.unwrap_or(0.5 * grid.length());
        let a = self.amplitude;
        let field = match self.shape {
            ProfileShape::Gaussian => {
                let w = self.width;
                RealField::from_fn(grid, |x| a * (-((x - x0) / w).powi(2)).exp())
            }
            ProfileShape::Sech2 => {
                let w = self.width;
                RealField::from_fn(grid, |x| a / ((x - x0) / w).cosh().powi(2))
            }
            ProfileShape::Soliton => {
                if a <= 0.0 {
                    return Err(Error::InvalidParams(
                        "soliton profile needs a positive amplitude".into(),
                    ));
                }
                Soliton {
                    amplitude: a,
                    center: x0,
                }
                .profile(grid, p, 0.0)
            }
        };
        let peak = field.norm_linf();
        let edge = field.values()[0].abs().max(field.values()[grid.len() - 1].abs());
        if peak > 0.0 && edge > LOCALIZATION_RATIO * peak {
            return Err(Error::NotLocalized {
                what: format!("{} initial profile", self.shape),
                edge,
                limit: LOCALIZATION_RATIO * peak,
            });
        }
        Ok(field)
    }
}
