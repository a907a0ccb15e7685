//! Frame loop coupling the gas and solid phases.

use crate::charring::{char_update, heat_step, CharParams, CharState};
use crate::fire::{fire_step, ignite, temperature_from_y, FireError, FireState, IgnitionReport, SimParams, StepDiagnostics};
use crate::grid::ScalarField;
use crate::material::SolidProps;

/// Per-frame diagnostics of a [`Simulation`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrameDiagnostics {
    pub frame: usize,
    pub gas: StepDiagnostics,
    pub heat_substeps: usize,
    pub max_t_m: f32,
    /// Combustible cells with any char.
    pub charred_cells: usize,
    /// Combustible cells at or above their ignition temperature.
    pub burning_cells: usize,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub fire: FireState,
    pub char_state: CharState,
    pub solids: SolidProps,
    pub sim: SimParams,
    pub char_params: CharParams,
    frame: usize,
}

impl Simulation {
    pub fn new(solids: SolidProps, sim: SimParams, char_params: CharParams) -> Result<Self, FireError> {
        sim.validate()?;
        char_params.validate().map_err(FireError::Param)?;
        let spec = *solids.occupancy.spec();
        Ok(Self {
            fire: FireState::new(spec),
            char_state: CharState::new(spec, &char_params),
            solids,
            sim,
            char_params,
            frame: 0,
        })
    }

    pub fn ignite(&mut self, voxels: &[[i64; 3]]) -> Result<IgnitionReport, FireError> {
        ignite(&mut self.fire, &mut self.char_state, &self.solids, voxels, &self.char_params)
    }

    /// Frames advanced so far.
    pub fn frame(&self) -> usize {
        self.frame
    }

    /// Advances one frame: gas step, then solid conduction, then charring.
    pub fn step(&mut self) -> FrameDiagnostics {
        let dt = self.sim.dt;
        let gas = fire_step(&mut self.fire, &self.char_state, &self.solids, &self.sim);
        let heat_substeps = heat_step(&mut self.char_state, &self.solids, &self.char_params, dt);
        char_update(&mut self.char_state, &self.solids, dt);
        self.frame += 1;

        let occ = &self.solids.occupancy;
        let (tm, mc) = (self.char_state.t_m.values(), self.char_state.m_c.values());
        let mut diag = FrameDiagnostics { frame: self.frame, gas, heat_substeps, ..Default::default() };
        diag.max_t_m = tm.iter().copied().fold(f32::MIN, f32::max);
        for idx in 0..tm.len() {
            if occ.is_combustible(idx) {
                diag.charred_cells += (mc[idx] > 0.0) as usize;
                diag.burning_cells += (tm[idx] >= self.solids.t_ign[idx]) as usize;
            }
        }
        diag
    }

    /// Gas temperature implied by the current reaction coordinate.
    pub fn gas_temperature(&self) -> ScalarField {
        temperature_from_y(&self.fire.y, &self.sim)
    }
}
