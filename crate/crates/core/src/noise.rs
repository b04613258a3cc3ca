//! Quasi-static noise: one field configuration per shot, constant for the
//! whole sequence.
//!
//! Charge noise multiplies each axis' exchange by `1 + sigma_j_rel * N(0,1)`.
//! Hyperfine noise adds an independent Gaussian Larmor offset per dot.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::GridSpec;
use crate::spin_sim::{FieldSpec, NoiseSample};

/// Smallest exchange factor kept after sampling; J must stay positive.
const MIN_J_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuasiStaticNoise {
    pub sigma_j_rel: f64,
    pub sigma_bz_hz: f64,
    pub b_uniform_hz: f64,
    /// Per-axis overrides of `sigma_j_rel`, keyed by axis label.
    #[serde(default)]
    pub sigma_j_rel_axis: BTreeMap<String, f64>,
    /// Per-dot overrides of `sigma_bz_hz`, keyed by plunger name.
    #[serde(default)]
    pub sigma_bz_hz_dot: BTreeMap<String, f64>,
}

impl QuasiStaticNoise {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let scalars = [self.sigma_j_rel, self.sigma_bz_hz, self.b_uniform_hz];
        let overrides = self.sigma_j_rel_axis.values().chain(self.sigma_bz_hz_dot.values());
        if scalars.iter().chain(overrides).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("noise magnitudes must be finite and >= 0".into()));
        }
        if let Some(l) = self.sigma_j_rel_axis.keys().find(|l| grid.axis_by_label(l).is_none()) {
            return Err(Error::InvalidArgument(format!("noise override for unknown axis {l}")));
        }
        if let Some(d) = self.sigma_bz_hz_dot.keys().find(|d| grid.dot_by_name(d).is_none()) {
            return Err(Error::InvalidArgument(format!("noise override for unknown dot {d}")));
        }
        Ok(())
    }

    /// True when sampling always yields unit exchange and zero offsets.
    pub fn is_static(&self) -> bool {
        self.sigma_j_rel == 0.0
            && self.sigma_bz_hz == 0.0
            && self.sigma_j_rel_axis.values().all(|v| *v == 0.0)
            && self.sigma_bz_hz_dot.values().all(|v| *v == 0.0)
    }

    fn sigma_j(&self, label: &str) -> f64 {
        self.sigma_j_rel_axis.get(label).copied().unwrap_or(self.sigma_j_rel)
    }

    fn sigma_bz(&self, name: &str) -> f64 {
        self.sigma_bz_hz_dot.get(name).copied().unwrap_or(self.sigma_bz_hz)
    }

    /// One shot's fields. Draw order is fixed: axes in label order, then
    /// dots row-major.
    pub fn sample<R: Rng + ?Sized>(&self, grid: &GridSpec, rng: &mut R) -> FieldSpec {
        let j_scale = grid
            .axes()
            .iter()
            .map(|a| {
                let z: f64 = StandardNormal.sample(rng);
                (1.0 + self.sigma_j(&a.label) * z).max(MIN_J_SCALE)
            })
            .collect();
        let delta_bz_hz = grid
            .dots()
            .map(|d| {
                let z: f64 = StandardNormal.sample(rng);
                self.sigma_bz(&grid.dot_name(d)) * z
            })
            .collect();
        FieldSpec {
            b_uniform_hz: self.b_uniform_hz,
            noise: NoiseSample { delta_bz_hz, j_scale },
        }
    }

    pub fn static_fields(&self) -> FieldSpec {
        FieldSpec {
            b_uniform_hz: self.b_uniform_hz,
            noise: NoiseSample::none(),
        }
    }
}
