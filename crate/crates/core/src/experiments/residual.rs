//! Finite-difference residuals of reconstructed solutions on canonical
//! instances, one per geometry.

use crate::data::DataSpec;
use crate::domain::Geometry;
use crate::error::Result;
use crate::operators::ProblemData;
use crate::picard::{residual_check, solve, ResidualProbes, ResidualReport, SolverConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualInstance {
    pub geometry: Geometry,
    pub data: DataSpec,
    pub phi_b: f64,
    pub eps: f64,
    pub horizon: f64,
    pub probes: ResidualProbes,
}

impl ResidualInstance {
    /// `χ_{x>1}`, `φ_b = 0`, `ε = 2⁻⁶`, `T = 0.2`.
    pub fn halfline() -> Self {
        ResidualInstance {
            geometry: Geometry::half_line(),
            data: DataSpec::Indicator { b: 1.0 },
            phi_b: 0.0,
            eps: 2f64.powi(-6),
            horizon: 0.2,
            probes: ResidualProbes::new((0.1, 2.5), (0.02, 0.19)),
        }
    }

    /// `(1/r)χ_{r>2}`, `φ_b = 1`, `ε = 2⁻⁶`, `T = 0.2`.
    pub fn ball() -> Self {
        ResidualInstance {
            geometry: Geometry::exterior_ball(),
            data: DataSpec::ScaledIndicator { b: 2.0 },
            phi_b: 1.0,
            probes: ResidualProbes::new((1.1, 3.5), (0.02, 0.19)),
            ..ResidualInstance::halfline()
        }
    }

    pub fn for_geometry(geometry: Geometry) -> Self {
        if geometry.is_ball() {
            ResidualInstance::ball()
        } else {
            ResidualInstance::halfline()
        }
    }

    pub fn run(&self) -> Result<ResidualReport> {
        let r_max = self.data.feature_location().max(self.probes.x_range.1) + 10.0;
        let phi = self.data.materialize(self.geometry, r_max)?;
        let problem = ProblemData::new(self.geometry, self.eps, phi, self.phi_b)?;
        let pair = solve(&problem, &SolverConfig { energy_records: 0, ..SolverConfig::new(self.horizon) })?;
        residual_check(&pair, &self.probes)
    }
}

impl ResidualReport {
    pub fn worst(&self) -> f64 {
        self.pde.max(self.boundary).max(self.harmonic)
    }
}
