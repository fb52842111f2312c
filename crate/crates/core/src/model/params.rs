use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::Species;

/// Physical parameters of the model, in natural units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Mass of species 1.
    pub m1: f64,
    /// Mass of species 4; must exceed `m1`.
    pub m4: f64,
    /// Coupling constant.
    pub g: f64,
    /// Ultraviolet cutoff used by kernel presets.
    pub lambda_uv: f64,
    /// Infrared cutoff on the neutrino momenta.
    pub sigma: f64,
    /// Splitting parameter of the relative-bound estimates.
    pub eta: f64,
}

impl PhysicalParams {
    pub fn new(m1: f64, m4: f64) -> Result<Self> {
        let p = PhysicalParams { m1, m4, g: 0.0, lambda_uv: 1.0, sigma: 0.0, eta: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.m1, self.m4, self.g, self.lambda_uv, self.sigma, self.eta]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Config("physical parameters must be finite".into()));
        }
        if !(self.m1 > 0.0 && self.m4 > 0.0) {
            return Err(Error::Config(format!("masses must be positive (m1 = {}, m4 = {})", self.m1, self.m4)));
        }
        if self.m1 >= self.m4 {
            return Err(Error::Config(format!("need m1 < m4, got m1 = {} and m4 = {}", self.m1, self.m4)));
        }
        if self.lambda_uv <= 0.0 {
            return Err(Error::Config(format!("lambda_uv must be positive, got {}", self.lambda_uv)));
        }
        if self.sigma < 0.0 {
            return Err(Error::Config(format!("sigma must be nonnegative, got {}", self.sigma)));
        }
        if self.eta <= 0.0 {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        Ok(())
    }

    /// Mass of a species; the neutrinos are massless.
    pub fn mass(&self, species: Species) -> f64 {
        match species.number() {
            1 => self.m1,
            4 => self.m4,
            _ => 0.0,
        }
    }
}

pub fn norm3(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Free one-particle energy: `sqrt(|p|² + m²)` for species 1 and 4, `|p|` for 2 and 3.
pub fn dispersion(species: Species, p: [f64; 3], params: &PhysicalParams) -> f64 {
    let k = norm3(p);
    let m = params.mass(species);
    if m == 0.0 {
        k
    } else {
        k.hypot(m)
    }
}
