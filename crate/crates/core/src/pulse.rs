//! Voltage-to-exchange model, pulse calibration, exchange fingerprints and
//! N_osc extraction.
//!
//! The exchange model is phenomenological:
//! `J = j0 * exp(barrier / v_b0) * (1 + (detuning / eps0)^2)`. It is
//! monotone in the barrier and even in detuning, with the symmetric point at
//! zero detuning.

use std::f64::consts::{PI, SQRT_2, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::route_to_axis;
use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LmOptions};
use crate::lattice::{DotId, GridSpec};
use crate::noise::QuasiStaticNoise;
use crate::pulse_seq::{resolve, run_resolved, wrap_angle, Pulse, PulseSeq, ResolvedPulse};
use crate::rng::{stream, substream};
use crate::spin_sim::{prepare_state, ActiveExchange, FieldSpec, PureState, SpectatorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeModel {
    pub j0_hz: f64,
    pub v_b0: f64,
    pub eps0: f64,
    /// Calibration only chooses barriers inside this range.
    pub barrier_min_v: f64,
    pub barrier_max_v: f64,
}

impl ExchangeModel {
    /// Model with a `[-1, 1]` V barrier range.
    pub fn new(j0_hz: f64, v_b0: f64, eps0: f64) -> Result<Self> {
        let m = Self {
            j0_hz,
            v_b0,
            eps0,
            barrier_min_v: -1.0,
            barrier_max_v: 1.0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_barrier_range(mut self, min_v: f64, max_v: f64) -> Result<Self> {
        self.barrier_min_v = min_v;
        self.barrier_max_v = max_v;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.j0_hz, self.v_b0, self.eps0];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument(
                "exchange model needs finite j0, v_b0, eps0 > 0".into(),
            ));
        }
        if !(self.barrier_min_v.is_finite()
            && self.barrier_max_v.is_finite()
            && self.barrier_min_v < self.barrier_max_v)
        {
            return Err(Error::InvalidArgument(format!(
                "barrier range [{}, {}] is empty",
                self.barrier_min_v, self.barrier_max_v
            )));
        }
        Ok(())
    }

    pub fn j_of_v(&self, barrier_v: f64, detuning_v: f64) -> f64 {
        j_of_v(self, barrier_v, detuning_v)
    }
}

pub fn j_of_v(model: &ExchangeModel, barrier_v: f64, detuning_v: f64) -> f64 {
    let d = detuning_v / model.eps0;
    model.j0_hz * (barrier_v / model.v_b0).exp() * (1.0 + d * d)
}

/// A rectangular pulse at the symmetric point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub axis: String,
    pub theta_target: f64,
    pub t_pulse_s: f64,
    pub barrier_v: f64,
    pub detuning_v: f64,
}

impl PulseSpec {
    pub fn j_hz(&self, model: &ExchangeModel) -> f64 {
        model.j_of_v(self.barrier_v, self.detuning_v)
    }

    /// Noiseless rotation angle produced under `model`.
    pub fn realized_theta(&self, model: &ExchangeModel) -> f64 {
        TAU * self.j_hz(model) * self.t_pulse_s
    }

    pub fn to_pulse(&self, t_idle_s: f64) -> Pulse {
        Pulse {
            axis: self.axis.clone(),
            theta: wrap_angle(self.theta_target),
            t_pulse_s: self.t_pulse_s,
            t_idle_s,
        }
    }
}

/// Barrier voltage giving `2 pi J t_pulse = theta_target` at zero detuning.
pub fn calibrate_pulse(
    model: &ExchangeModel,
    axis: &str,
    theta_target: f64,
    t_pulse_s: f64,
) -> Result<PulseSpec> {
    model.validate()?;
    if !(theta_target > 0.0 && theta_target <= TAU) {
        return Err(Error::InvalidArgument(format!(
            "theta_target {theta_target} outside (0, 2 pi]"
        )));
    }
    if !(t_pulse_s > 0.0 && t_pulse_s.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_pulse {t_pulse_s} must be > 0")));
    }
    let required_hz = theta_target / (TAU * t_pulse_s);
    let barrier_v = model.v_b0 * (required_hz / model.j0_hz).ln();
    if !(model.barrier_min_v..=model.barrier_max_v).contains(&barrier_v) {
        return Err(Error::UnreachableExchange {
            required_hz,
            barrier_v,
            min_v: model.barrier_min_v,
            max_v: model.barrier_max_v,
        });
    }
    Ok(PulseSpec {
        axis: axis.to_string(),
        theta_target,
        t_pulse_s,
        barrier_v,
        detuning_v: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutMode {
    /// Exact singlet probability, averaged over noise draws.
    #[default]
    Probability,
    /// One projective outcome per shot.
    Sampled,
}

/// Exchange experiment on one axis, observed at the SPAM pair: prepare a
/// singlet, route one member next to the axis, pulse, route back, read out.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeProbe {
    pub spam_pair: (DotId, DotId),
    pub target_axis: String,
    /// Swap route; the shortest one is computed when `None`.
    pub route: Option<PulseSeq>,
    pub noise: QuasiStaticNoise,
    pub mode: ReadoutMode,
    /// Noise draws (and outcomes in sampled mode) per point.
    pub shots: usize,
    pub seed: u64,
}

struct PreparedProbe {
    spam: (usize, usize),
    target_pair: (usize, usize),
    target_index: usize,
    route: Vec<ResolvedPulse>,
    back: Vec<ResolvedPulse>,
    initial: PureState,
}

/// Follows the singlet members through a route of swaps.
fn track_swaps(grid: &GridSpec, start: (DotId, DotId), route: &PulseSeq) -> Result<(DotId, DotId)> {
    let (mut u, mut v) = start;
    for p in &route.pulses {
        let axis = grid
            .axis_by_label(&p.axis)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown route axis {}", p.axis)))?;
        if (wrap_angle(p.theta) - PI).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "route pulse on {} is not a swap (theta {})",
                p.axis, p.theta
            )));
        }
        let swap = |d: DotId| {
            if d == axis.a {
                axis.b
            } else if d == axis.b {
                axis.a
            } else {
                d
            }
        };
        u = swap(u);
        v = swap(v);
    }
    Ok((u, v))
}

impl ExchangeProbe {
    fn prepare(&self, grid: &GridSpec) -> Result<PreparedProbe> {
        grid.validate()?;
        self.noise.validate(grid)?;
        if self.shots == 0 {
            return Err(Error::InvalidArgument("shots must be >= 1".into()));
        }
        let axes = grid.axes();
        let target_index = axes
            .iter()
            .position(|a| a.label == self.target_axis)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown axis {}", self.target_axis)))?;
        let axis = &axes[target_index];
        if !grid.is_axis_live(axis) {
            return Err(Error::InvalidArgument(format!("axis {} is not live", axis.label)));
        }
        let route = match &self.route {
            Some(r) => r.clone(),
            None => route_to_axis(grid, self.spam_pair, axis)?,
        };
        let (u, v) = track_swaps(grid, self.spam_pair, &route)?;
        if axis.touches(u) == axis.touches(v) {
            return Err(Error::InvalidArgument(format!(
                "route must leave exactly one singlet member on {}",
                axis.label
            )));
        }
        let spam = (grid.dot_index(self.spam_pair.0), grid.dot_index(self.spam_pair.1));
        let initial = prepare_state(grid.n_dots(), Some(spam), &SpectatorSpec::AllUp)?;
        Ok(PreparedProbe {
            spam,
            target_pair: (grid.dot_index(axis.a), grid.dot_index(axis.b)),
            target_index,
            route: resolve(grid, &route)?,
            back: resolve(grid, &route.reversed())?,
            initial,
        })
    }

    fn effective_shots(&self) -> usize {
        if self.mode == ReadoutMode::Probability && self.noise.is_static() {
            1
        } else {
            self.shots
        }
    }
}

impl PreparedProbe {
    fn routed(&self, fields: &FieldSpec) -> Result<PureState> {
        let mut s = self.initial.clone();
        run_resolved(&mut s, &self.route, fields)?;
        Ok(s)
    }

    fn finish(&self, mut s: PureState, j_hz: f64, t_s: f64, fields: &FieldSpec) -> Result<f64> {
        let ex = ActiveExchange {
            pair: self.target_pair,
            j_hz,
            axis: Some(self.target_index),
        };
        s.evolve_segment(&[ex], t_s, fields)?;
        run_resolved(&mut s, &self.back, fields)?;
        s.singlet_probability(self.spam)
    }
}

fn outcome<R: Rng>(p: f64, mode: ReadoutMode, rng: &mut R) -> f64 {
    match mode {
        ReadoutMode::Probability => p,
        ReadoutMode::Sampled => {
            if rng.random::<f64>() < p {
                1.0
            } else {
                0.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintMap {
    pub axis: String,
    pub v1_barrier_v: Vec<f64>,
    pub v2_detuning_v: Vec<f64>,
    /// `p_singlet[i][j]` at `(v1[i], v2[j])`.
    pub p_singlet: Vec<Vec<f64>>,
}

/// Singlet return over a barrier/detuning grid with the exchange on for
/// `t_evolve_s`.
pub fn simulate_fingerprint(
    grid: &GridSpec,
    probe: &ExchangeProbe,
    model: &ExchangeModel,
    v1_barrier_v: &[f64],
    v2_detuning_v: &[f64],
    t_evolve_s: f64,
) -> Result<FingerprintMap> {
    model.validate()?;
    if !(t_evolve_s >= 0.0) {
        return Err(Error::InvalidArgument(format!("t_evolve {t_evolve_s} < 0")));
    }
    let prep = probe.prepare(grid)?;
    let shots = probe.effective_shots();
    let n2 = v2_detuning_v.len();
    let cells: Vec<f64> = (0..v1_barrier_v.len() * n2)
        .into_par_iter()
        .map(|cell| -> Result<f64> {
            let j = model.j_of_v(v1_barrier_v[cell / n2], v2_detuning_v[cell % n2]);
            let mut acc = 0.0;
            for shot in 0..shots {
                let mut rng = substream(probe.seed, &[stream::FINGERPRINT, cell as u64, shot as u64]);
                let fields = probe.noise.sample(grid, &mut rng);
                let p = prep.finish(prep.routed(&fields)?, j, t_evolve_s, &fields)?;
                acc += outcome(p, probe.mode, &mut rng);
            }
            Ok((acc / shots as f64).clamp(0.0, 1.0))
        })
        .collect::<Result<_>>()?;
    Ok(FingerprintMap {
        axis: probe.target_axis.clone(),
        v1_barrier_v: v1_barrier_v.to_vec(),
        v2_detuning_v: v2_detuning_v.to_vec(),
        p_singlet: cells.chunks(n2.max(1)).map(<[f64]>::to_vec).collect(),
    })
}

/// Singlet return versus exchange duration at fixed `j_hz`. Each shot draws
/// one quasi-static noise sample shared by every time point.
pub fn simulate_exchange_trace(
    grid: &GridSpec,
    probe: &ExchangeProbe,
    j_hz: f64,
    times_s: &[f64],
) -> Result<Vec<f64>> {
    let prep = probe.prepare(grid)?;
    let shots = probe.effective_shots();
    let per_shot: Vec<Vec<f64>> = (0..shots)
        .into_par_iter()
        .map(|shot| -> Result<Vec<f64>> {
            let mut rng = substream(probe.seed, &[stream::NOSC, shot as u64]);
            let fields = probe.noise.sample(grid, &mut rng);
            let routed = prep.routed(&fields)?;
            times_s
                .iter()
                .map(|&t| {
                    let p = prep.finish(routed.clone(), j_hz, t, &fields)?;
                    Ok(outcome(p, probe.mode, &mut rng))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut mean = vec![0.0; times_s.len()];
    for trace in &per_shot {
        for (m, v) in mean.iter_mut().zip(trace) {
            *m += v;
        }
    }
    Ok(mean.into_iter().map(|m| m / shots as f64).collect())
}

/// `N_osc = J / (sqrt 2 pi sigma_J)` for Gaussian quasi-static exchange noise.
pub fn gaussian_n_osc(sigma_j_rel: f64) -> f64 {
    1.0 / (SQRT_2 * PI * sigma_j_rel)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopePower {
    Exponential,
    #[default]
    Gaussian,
}

impl EnvelopePower {
    pub fn exponent(self) -> f64 {
        match self {
            EnvelopePower::Exponential => 1.0,
            EnvelopePower::Gaussian => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoscEstimate {
    /// `frequency * tau`; `None` when the decay is unresolved.
    pub n_osc: Option<f64>,
    pub unbounded: bool,
    pub frequency_hz: f64,
    pub tau_s: f64,
    pub power: EnvelopePower,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub rss: f64,
    pub iterations: usize,
}

/// Decay times beyond this multiple of the trace duration count as unbounded.
const UNBOUNDED_FACTOR: f64 = 10.0;

/// Lowest frequency, in cycles per record, taken as the exchange oscillation.
const MIN_CYCLES: f64 = 4.0;

fn spectral_peak(t: &[f64], y: &[f64], duration: f64) -> f64 {
    let n = t.len();
    let dt = duration / (n - 1) as f64;
    let pad = 8.0;
    let df = 1.0 / (pad * duration);
    let n_freq = ((0.5 / dt) / df).floor() as usize;
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (&tk, &yk) in t.iter().zip(y) {
            let (s, c) = (TAU * f * tk).sin_cos();
            re += yk * c;
            im -= yk * s;
        }
        re * re + im * im
    };
    let spectrum: Vec<f64> = (0..=n_freq).map(|k| power(k as f64 * df)).collect();
    // Ignore anything slower than a few cycles per record: offset leakage
    // and slow drifts such as hyperfine singlet-triplet mixing.
    let lo = ((MIN_CYCLES * pad) as usize).min(n_freq);
    let k = (lo..=n_freq)
        .max_by(|&a, &b| spectrum[a].total_cmp(&spectrum[b]))
        .unwrap_or(lo);
    if k == 0 || k >= n_freq {
        return k as f64 * df;
    }
    let (a, b, c) = (spectrum[k - 1], spectrum[k], spectrum[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    (k as f64 + shift.clamp(-0.5, 0.5)) * df
}

/// Least-squares fit of `A cos(2 pi f t + phi) exp(-(t/tau)^p) + c`.
///
/// Time is normalized by the trace duration internally, so rescaling time and
/// frequency together leaves `n_osc` unchanged.
pub fn extract_n_osc(times_s: &[f64], values: &[f64], power: EnvelopePower) -> Result<NoscEstimate> {
    if times_s.len() != values.len() || times_s.len() < 64 {
        return Err(Error::InvalidArgument(
            "trace needs matching times and values with at least 64 points".into(),
        ));
    }
    if times_s.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("trace times must be increasing".into()));
    }
    let t0 = times_s[0];
    let duration = times_s[times_s.len() - 1] - t0;
    let t: Vec<f64> = times_s.iter().map(|&ti| (ti - t0) / duration).collect();
    let n = t.len() as f64;
    let c0 = values.iter().sum::<f64>() / n;
    let centered: Vec<f64> = values.iter().map(|v| v - c0).collect();

    let f0 = spectral_peak(&t, &centered, 1.0);
    let points_per_period = n / f0.max(f64::MIN_POSITIVE);
    if f0 < 7.5 || points_per_period < 7.5 {
        return Err(Error::InvalidArgument(format!(
            "trace covers {f0:.2} periods at {points_per_period:.1} points per period; need about 8 and 8"
        )));
    }

    // Envelope from per-period maxima, then log-linear regression in t^p.
    let p = power.exponent();
    let win = points_per_period.round().max(2.0) as usize;
    let windows: Vec<(f64, f64)> = t
        .chunks(win)
        .zip(centered.chunks(win))
        .filter(|(tc, _)| tc.len() == win)
        .map(|(tc, yc)| {
            let mid = 0.5 * (tc[0] + tc[tc.len() - 1]);
            let amp = yc.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            (mid, amp)
        })
        .collect();
    let peak = windows.iter().fold(0.0_f64, |m, w| m.max(w.1));
    let pts: Vec<(f64, f64)> = windows
        .iter()
        .filter(|w| w.1 > 0.1 * peak)
        .map(|&(tm, a)| (tm.powf(p), a.ln()))
        .collect();
    let (slope, intercept) = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|q| q.0).sum::<f64>() / m;
        let my = pts.iter().map(|q| q.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let s = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        (s, my - s * mx)
    } else {
        (0.0, peak.max(f64::MIN_POSITIVE).ln())
    };
    let lambda0 = if slope < 0.0 { (-slope).powf(1.0 / p) } else { 0.01 };
    let a0 = intercept.exp();

    let (mut re, mut im) = (0.0, 0.0);
    for (&tk, &yk) in t.iter().zip(&centered) {
        let env = (-(lambda0 * tk).powf(p)).exp();
        let (s, c) = (TAU * f0 * tk).sin_cos();
        re += yk * c * env;
        im += yk * s * env;
    }
    let phi0 = (-im).atan2(re);

    let model = move |tk: f64, q: &[f64]| {
        q[0] * (TAU * q[1] * tk + q[2]).cos() * (-(q[3].abs() * tk).powf(p)).exp() + q[4]
    };
    let fit = levenberg_marquardt(
        model,
        &t,
        values,
        None,
        &[a0, f0, phi0, lambda0, c0],
        LmOptions::default(),
    )?;
    let q = &fit.params;
    let (mut amplitude, frequency, mut phase) = (q[0], q[1], q[2]);
    if amplitude < 0.0 {
        amplitude = -amplitude;
        phase += PI;
    }
    let lambda = q[3].abs();
    let tau_norm = if lambda > 0.0 { 1.0 / lambda } else { f64::INFINITY };
    let unbounded = tau_norm > UNBOUNDED_FACTOR;
    let n_osc = (!unbounded).then(|| frequency.abs() * tau_norm);
    Ok(NoscEstimate {
        n_osc,
        unbounded,
        frequency_hz: frequency.abs() / duration,
        tau_s: tau_norm * duration,
        power,
        amplitude,
        phase: wrap_angle(phase),
        offset: q[4],
        rss: fit.rss,
        iterations: fit.iterations,
    })
}

/// Sample times covering `periods` oscillations at `j_hz`.
pub fn trace_times(j_hz: f64, periods: f64, points_per_period: usize) -> Vec<f64> {
    let n = (periods * points_per_period as f64).ceil() as usize + 1;
    let dt = 1.0 / (j_hz * points_per_period as f64);
    (0..n).map(|k| k as f64 * dt).collect()
}
