use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::GridSpec;
use crate::spin_sim::{ActiveExchange, FieldSpec, PureState};

/// One rectangular exchange pulse followed by an idle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub axis: String,
    pub theta: f64,
    pub t_pulse_s: f64,
    pub t_idle_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseSeq {
    pub pulses: Vec<Pulse>,
}

impl PulseSeq {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn push(&mut self, p: Pulse) {
        self.pulses.push(p);
    }

    pub fn extend(&mut self, other: &PulseSeq) {
        self.pulses.extend(other.pulses.iter().cloned());
    }

    /// Pulses in reverse order with negated angles (mod 2 pi). For a
    /// sequence of swaps this is the same swaps reversed.
    pub fn reversed(&self) -> PulseSeq {
        PulseSeq {
            pulses: self
                .pulses
                .iter()
                .rev()
                .map(|p| Pulse {
                    theta: wrap_angle(-p.theta),
                    ..p.clone()
                })
                .collect(),
        }
    }

    pub fn with_timing(mut self, t_pulse_s: f64, t_idle_s: f64) -> PulseSeq {
        for p in &mut self.pulses {
            p.t_pulse_s = t_pulse_s;
            p.t_idle_s = t_idle_s;
        }
        self
    }

    pub fn total_duration_s(&self) -> f64 {
        self.pulses.iter().map(|p| p.t_pulse_s + p.t_idle_s).sum()
    }
}

/// Maps into `[0, 2 pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let w = theta.rem_euclid(tau);
    if w >= tau {
        0.0
    } else {
        w
    }
}

/// Resolved pulse: spin pair, axis index and angle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ResolvedPulse {
    pub pair: (usize, usize),
    pub axis: usize,
    pub theta: f64,
    pub t_pulse_s: f64,
    pub t_idle_s: f64,
}

pub(crate) fn resolve(grid: &GridSpec, seq: &PulseSeq) -> Result<Vec<ResolvedPulse>> {
    let axes = grid.axes();
    seq.pulses
        .iter()
        .map(|p| {
            let (idx, ax) = axes
                .iter()
                .enumerate()
                .find(|(_, a)| a.label == p.axis)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown axis {}", p.axis)))?;
            if !grid.is_axis_live(ax) {
                return Err(Error::InvalidArgument(format!("axis {} is not live", p.axis)));
            }
            Ok(ResolvedPulse {
                pair: (grid.dot_index(ax.a), grid.dot_index(ax.b)),
                axis: idx,
                theta: p.theta,
                t_pulse_s: p.t_pulse_s,
                t_idle_s: p.t_idle_s,
            })
        })
        .collect()
}

/// Instantaneous, noiseless application of every pulse angle.
pub fn apply_ideal(state: &mut PureState, grid: &GridSpec, seq: &PulseSeq) -> Result<()> {
    for p in resolve(grid, seq)? {
        state.apply_exchange(p.pair, p.theta)?;
    }
    Ok(())
}

pub(crate) fn run_resolved(
    state: &mut PureState,
    pulses: &[ResolvedPulse],
    fields: &FieldSpec,
) -> Result<()> {
    for p in pulses {
        if p.t_pulse_s > 0.0 {
            let j_hz = p.theta / (std::f64::consts::TAU * p.t_pulse_s);
            let ex = ActiveExchange {
                pair: p.pair,
                j_hz,
                axis: Some(p.axis),
            };
            state.evolve_segment(&[ex], p.t_pulse_s, fields)?;
        } else {
            state.apply_exchange(p.pair, p.theta)?;
        }
        state.evolve_segment(&[], p.t_idle_s, fields)?;
    }
    Ok(())
}

/// Timed execution: each pulse runs with `J = theta / (2 pi t_pulse)` so the
/// noiseless angle is `theta`, then idles. Pulses with zero duration are
/// applied as ideal exchange.
pub fn run_timed(
    state: &mut PureState,
    grid: &GridSpec,
    seq: &PulseSeq,
    fields: &FieldSpec,
) -> Result<()> {
    let resolved = resolve(grid, seq)?;
    run_resolved(state, &resolved, fields)
}
