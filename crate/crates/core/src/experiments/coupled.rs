use crate::error::Result;
use crate::kdv::{self, KdVState};
use crate::params::ModelParams;
use crate::peregrine::PeregrineState;
use crate::spectral::RealField;
use crate::waterwave::{averaged_velocity, WaterWaveSolver, WaterWaveState};

use super::profile::InitialProfile;

/// Initial data shared by the three models.
///
/// The surfaces are the same samples. The water-wave potential is chosen so
/// that its depth-averaged velocity equals `v_kdv(eta0)`, and the Peregrine
/// velocity is that depth average recomputed from `(zeta0, Phi0)`.
#[derive(Clone, Debug)]
pub struct CoupledInitialData {
    pub eta0: RealField,
    pub xi0: RealField,
    pub u0: RealField,
    pub zeta0: RealField,
    pub phi0: RealField,
    pub phi_slope: f64,
}

impl CoupledInitialData {
    pub fn kdv(&self) -> KdVState {
        KdVState::new(self.eta0.clone())
    }

    pub fn peregrine(&self) -> PeregrineState {
        PeregrineState::new(self.xi0.clone(), self.u0.clone())
    }

    pub fn waterwave(&self) -> WaterWaveState {
        WaterWaveState::new(self.zeta0.clone(), self.phi0.clone(), self.phi_slope)
    }
}

pub fn build_coupled_initial_data(
    profile: &InitialProfile,
    solver: &WaterWaveSolver,
) -> Result<CoupledInitialData> {
    let p: ModelParams = *solver.params();
    let surface = profile.sample(solver.grid(), &p)?;
    let v0 = kdv::v_kdv(&surface, &p);
    let (phi0, phi_slope) = solver.invert_averaged_velocity(&surface, &v0)?;
    let pf = solver.solve_potential(&surface, &phi0, phi_slope)?;
    let u0 = averaged_velocity(&pf);
    Ok(CoupledInitialData {
        eta0: surface.clone(),
        xi0: surface.clone(),
        u0,
        zeta0: surface,
        phi0,
        phi_slope,
    })
}
