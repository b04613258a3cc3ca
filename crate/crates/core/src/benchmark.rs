//! Randomized benchmarking with leakage tracking on any qubit assignment.
//!
//! Each sequence is `L` uniformly random Cliffords plus the recovery Clifford
//! that inverts their product. The singlet is prepared at the SPAM pair,
//! routed into the qubit with timed swaps, driven, routed back and read out.
//! Survival is the singlet probability at the SPAM pair. Leakage is the
//! quadruplet population of the qubit just before the return route.
//!
//! Survival is fitted to `A alpha^L + B` with `epsilon = (1 - alpha) / 2`.
//! Leakage is fitted to `C (1 - beta^L)`; the reported `gamma = C (1 - beta)`
//! is the per-Clifford leakage rate at small `L` (the initial slope).
//!
//! Weights come from the spread between sequences at each length. Those
//! spreads are themselves noisy, which makes covariance errors optimistic,
//! so reported standard errors are a stratified bootstrap over sequences.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{clifford_group, compile_sequence};
use crate::encoding::{logical_bloch, route_singlet, EncodedFrame};
use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LmFit, LmOptions};
use crate::lattice::{DotId, GridSpec};
use crate::noise::QuasiStaticNoise;
use crate::pulse::ReadoutMode;
use crate::pulse_seq::{resolve, run_resolved, ResolvedPulse};
use crate::rng::{stream, substream};
use crate::spin_sim::{prepare_state, SpectatorSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RBConfig {
    pub frame: EncodedFrame,
    pub spam_pair: (DotId, DotId),
    pub lengths: Vec<usize>,
    pub n_sequences: usize,
    pub shots: usize,
    pub t_pulse_s: f64,
    pub t_idle_s: f64,
    pub noise: QuasiStaticNoise,
    pub readout_error: f64,
    /// Logical depolarizing probability per Clifford, applied as a random
    /// Pauli with this probability.
    pub injected_depolarizing: Option<f64>,
    pub mode: ReadoutMode,
    pub seed: u64,
}

impl RBConfig {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::InvalidArgument("lengths is empty".into()));
        }
        if self.lengths[0] == 0 || self.lengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "lengths must be >= 1 and strictly increasing".into(),
            ));
        }
        if self.n_sequences == 0 || self.shots == 0 {
            return Err(Error::InvalidArgument("n_sequences and shots must be >= 1".into()));
        }
        if !(self.t_pulse_s > 0.0 && self.t_idle_s > 0.0) {
            return Err(Error::InvalidArgument("t_pulse and t_idle must be > 0".into()));
        }
        let probs = [self.readout_error, self.injected_depolarizing.unwrap_or(0.0)];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("probabilities must lie in [0, 1]".into()));
        }
        self.noise.validate(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RBRecord {
    pub length: usize,
    pub sequence: usize,
    pub survival: f64,
    /// Present in probability mode only.
    pub leakage: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RBRawData {
    pub records: Vec<RBRecord>,
}

struct Compiled {
    cliffords: Vec<Vec<ResolvedPulse>>,
    /// Ideal X, Y, Z for the Pauli twirl.
    paulis: [Vec<ResolvedPulse>; 3],
    route: Vec<ResolvedPulse>,
    back: Vec<ResolvedPulse>,
}

fn compile(grid: &GridSpec, cfg: &RBConfig) -> Result<Compiled> {
    let table = clifford_group();
    let cliffords = (0..table.len())
        .map(|c| resolve(grid, &compile_sequence(grid, &cfg.frame, &[c], cfg.t_pulse_s, cfg.t_idle_s)?))
        .collect::<Result<Vec<_>>>()?;
    let pauli = |name: &str| -> Result<Vec<ResolvedPulse>> {
        let idx = table.by_name(name).expect("pauli in table");
        let seq = compile_sequence(grid, &cfg.frame, &[idx], cfg.t_pulse_s, cfg.t_idle_s)?.with_timing(0.0, 0.0);
        resolve(grid, &seq)
    };
    let route = route_singlet(grid, cfg.spam_pair, &cfg.frame)?.with_timing(cfg.t_pulse_s, cfg.t_idle_s);
    Ok(Compiled {
        cliffords,
        paulis: [pauli("X")?, pauli("Y")?, pauli("Z")?],
        back: resolve(grid, &route.reversed())?,
        route: resolve(grid, &route)?,
    })
}

/// Random Cliffords followed by the recovery element.
pub fn draw_sequence<R: Rng>(length: usize, rng: &mut R) -> Vec<usize> {
    let table = clifford_group();
    let mut seq: Vec<usize> = (0..length).map(|_| rng.random_range(0..table.len())).collect();
    let total = seq.iter().fold(0, |acc, &c| table.compose(c, acc));
    seq.push(table.inverse(total));
    seq
}

pub fn run_rb(grid: &GridSpec, cfg: &RBConfig) -> Result<RBRawData> {
    grid.validate()?;
    cfg.validate(grid)?;
    let compiled = compile(grid, cfg)?;
    let spam = (grid.dot_index(cfg.spam_pair.0), grid.dot_index(cfg.spam_pair.1));
    let initial = prepare_state(grid.n_dots(), Some(spam), &SpectatorSpec::AllUp)?;
    let p_dep = cfg.injected_depolarizing.unwrap_or(0.0);
    let r = cfg.readout_error;

    let tasks: Vec<(usize, usize)> = (0..cfg.lengths.len())
        .flat_map(|li| (0..cfg.n_sequences).map(move |si| (li, si)))
        .collect();
    let records = tasks
        .into_par_iter()
        .map(|(li, si)| -> Result<RBRecord> {
            let length = cfg.lengths[li];
            let mut seq_rng = substream(cfg.seed, &[stream::RB_SEQUENCE, li as u64, si as u64]);
            let sequence = draw_sequence(length, &mut seq_rng);
            let (mut surv, mut leak) = (0.0, 0.0);
            for shot in 0..cfg.shots {
                let mut rng = substream(cfg.seed, &[stream::RB_SHOT, li as u64, si as u64, shot as u64]);
                let fields = cfg.noise.sample(grid, &mut rng);
                let mut state = initial.clone();
                run_resolved(&mut state, &compiled.route, &fields)?;
                for &c in &sequence {
                    run_resolved(&mut state, &compiled.cliffords[c], &fields)?;
                    if p_dep > 0.0 && rng.random::<f64>() < p_dep {
                        let k = rng.random_range(0..4usize);
                        if k > 0 {
                            run_resolved(&mut state, &compiled.paulis[k - 1], &fields)?;
                        }
                    }
                }
                leak += logical_bloch(&state, &cfg.frame)?.p_leak;
                run_resolved(&mut state, &compiled.back, &fields)?;
                let p = state.singlet_probability(spam)?;
                surv += match cfg.mode {
                    ReadoutMode::Probability => p * (1.0 - 2.0 * r) + r,
                    ReadoutMode::Sampled => {
                        let singlet = rng.random::<f64>() < p;
                        let flip = rng.random::<f64>() < r;
                        f64::from(u8::from(singlet != flip))
                    }
                };
            }
            let n = cfg.shots as f64;
            Ok(RBRecord {
                length,
                sequence: si,
                survival: (surv / n).clamp(0.0, 1.0),
                leakage: (cfg.mode == ReadoutMode::Probability).then(|| (leak / n).clamp(0.0, 1.0)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RBRawData { records })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalFit {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub a_se: f64,
    pub alpha_se: f64,
    pub b_se: f64,
    pub reduced_chi2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageFit {
    pub c: f64,
    pub beta: f64,
    pub c_se: f64,
    pub beta_se: f64,
    pub reduced_chi2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RBResult {
    /// `(1 - alpha) / 2`, floored at zero.
    pub epsilon: f64,
    /// Bootstrap over sequences when every length has at least two;
    /// otherwise the covariance estimate.
    pub epsilon_se: f64,
    /// Unfloored `(1 - alpha) / 2`, for statistical comparisons.
    pub epsilon_raw: f64,
    /// From the chi-square-scaled fit covariance.
    pub epsilon_se_covariance: f64,
    pub gamma: f64,
    pub gamma_se: f64,
    pub gamma_se_covariance: f64,
    pub survival_fit: Option<SurvivalFit>,
    pub leakage_fit: Option<LeakageFit>,
    /// Survival was constant, so `epsilon = 0` with zero uncertainty.
    pub survival_degenerate: bool,
    /// Leakage was identically zero (or absent), so `gamma = 0`.
    pub leakage_degenerate: bool,
    pub gamma_definition: String,
}

pub const GAMMA_DEFINITION: &str =
    "per-Clifford initial-slope leakage rate C*(1-beta) from leakage(L) = C*(1-beta^L)";

/// Per-point weights from the spread between sequences at each length.
fn length_weights(points: &[(usize, f64)]) -> Vec<f64> {
    let mut by_len: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(l, y) in points {
        by_len.entry(l).or_default().push(y);
    }
    let var: BTreeMap<usize, f64> = by_len
        .iter()
        .map(|(&l, ys)| {
            let n = ys.len() as f64;
            let m = ys.iter().sum::<f64>() / n;
            let v = if ys.len() > 1 {
                ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            (l, v)
        })
        .collect();
    let max_var = var.values().copied().fold(0.0, f64::max);
    if max_var == 0.0 {
        return vec![1.0; points.len()];
    }
    let floor = 1e-3 * max_var;
    points.iter().map(|(l, _)| 1.0 / var[l].max(floor)).collect()
}

fn fit_survival(points: &[(usize, f64)], start: Option<&[f64]>) -> Result<LmFit> {
    let x: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let w = length_weights(points);
    let mean_at = |l: usize| {
        let v: Vec<f64> = points.iter().filter(|p| p.0 == l).map(|p| p.1).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (l0, l1) = (points.iter().map(|p| p.0).min().unwrap(), points.iter().map(|p| p.0).max().unwrap());
    let (y0, y1) = (mean_at(l0), mean_at(l1));
    let b0 = 0.5;
    let a0 = (y0 - b0).max(1e-3);
    let ratio = ((y1 - b0).max(1e-6) / a0).min(1.0);
    let alpha0 = ratio.powf(1.0 / (l1 - l0).max(1) as f64).clamp(0.5, 1.0 - 1e-9);
    let a0 = a0 / alpha0.powf(l0 as f64);
    levenberg_marquardt(
        |l, p| p[0] * p[1].powf(l) + p[2],
        &x,
        &y,
        Some(&w),
        start.unwrap_or(&[a0, alpha0, b0]),
        LmOptions::default(),
    )
}

/// `(1 - (1 - kappa)^L) / kappa`, continuous at `kappa = 0`.
fn saturating(l: f64, kappa: f64) -> f64 {
    if kappa.abs() < 1e-12 {
        l
    } else {
        -(l * (-kappa).ln_1p()).exp_m1() / kappa
    }
}

fn fit_leakage(points: &[(usize, f64)], start: Option<&[f64]>) -> Result<LmFit> {
    let x: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let w = length_weights(points);
    let l0 = points.iter().map(|p| p.0).min().unwrap();
    let m0: Vec<f64> = points.iter().filter(|p| p.0 == l0).map(|p| p.1).collect();
    let gamma0 = (m0.iter().sum::<f64>() / m0.len() as f64 / l0 as f64).max(1e-9);
    levenberg_marquardt(
        |l, p| p[0] * saturating(l, p[1]),
        &x,
        &y,
        Some(&w),
        start.unwrap_or(&[gamma0, 1e-3]),
        LmOptions::default(),
    )
}

/// Bootstrap resamples used for the reported standard errors.
pub const BOOTSTRAP_RESAMPLES: usize = 200;
const BOOTSTRAP_SEED: u64 = 0x5eed_b007;

/// Standard error of parameter `index` from refits on data resampled with
/// replacement within each length. `None` if any length has a single
/// sequence or too few refits succeed.
fn bootstrap_se<F>(points: &[(usize, f64)], index: usize, refit: F) -> Option<f64>
where
    F: Fn(&[(usize, f64)]) -> Result<LmFit>,
{
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(l, y) in points {
        groups.entry(l).or_default().push(y);
    }
    if groups.values().any(|g| g.len() < 2) {
        return None;
    }
    let mut rng = substream(BOOTSTRAP_SEED, &[points.len() as u64, index as u64]);
    let mut draws = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let sample: Vec<(usize, f64)> = groups
            .iter()
            .flat_map(|(&l, ys)| {
                (0..ys.len())
                    .map(|_| (l, ys[rng.random_range(0..ys.len())]))
                    .collect::<Vec<_>>()
            })
            .collect();
        if let Ok(fit) = refit(&sample) {
            if fit.params[index].is_finite() {
                draws.push(fit.params[index]);
            }
        }
    }
    if draws.len() < BOOTSTRAP_RESAMPLES / 2 {
        return None;
    }
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    Some((draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

pub fn fit_rb(data: &RBRawData) -> Result<RBResult> {
    let mut lengths: Vec<usize> = data.records.iter().map(|r| r.length).collect();
    lengths.sort_unstable();
    lengths.dedup();
    if lengths.len() < 3 {
        return Err(Error::DegenerateData(format!(
            "need >= 3 distinct lengths, got {}",
            lengths.len()
        )));
    }
    let surv: Vec<(usize, f64)> = data.records.iter().map(|r| (r.length, r.survival)).collect();
    let spread = surv.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
        - surv.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);

    let mut result = RBResult {
        epsilon: 0.0,
        epsilon_se: 0.0,
        epsilon_raw: 0.0,
        epsilon_se_covariance: 0.0,
        gamma: 0.0,
        gamma_se: 0.0,
        gamma_se_covariance: 0.0,
        survival_fit: None,
        leakage_fit: None,
        survival_degenerate: spread < 1e-12,
        leakage_degenerate: true,
        gamma_definition: GAMMA_DEFINITION.to_string(),
    };

    if !result.survival_degenerate {
        let fit = fit_survival(&surv, None)?;
        let (a, alpha, b) = (fit.params[0], fit.params[1], fit.params[2]);
        result.epsilon_raw = (1.0 - alpha) / 2.0;
        result.epsilon = result.epsilon_raw.clamp(0.0, 1.0);
        result.epsilon_se_covariance = fit.std_error(1) / 2.0;
        result.epsilon_se = bootstrap_se(&surv, 1, |d| fit_survival(d, Some(&fit.params)))
            .map_or(result.epsilon_se_covariance, |se| se / 2.0);
        result.survival_fit = Some(SurvivalFit {
            a,
            alpha,
            b,
            a_se: fit.std_error(0),
            alpha_se: fit.std_error(1),
            b_se: fit.std_error(2),
            reduced_chi2: fit.reduced_chi2(),
        });
    }

    let leak: Option<Vec<(usize, f64)>> = data
        .records
        .iter()
        .map(|r| r.leakage.map(|v| (r.length, v)))
        .collect();
    if let Some(leak) = leak {
        let any = leak.iter().any(|p| p.1 > 1e-14);
        if any {
            let fit = fit_leakage(&leak, None)?;
            let (gamma, kappa) = (fit.params[0], fit.params[1]);
            result.leakage_degenerate = false;
            result.gamma = gamma.clamp(0.0, 1.0);
            result.gamma_se_covariance = fit.std_error(0);
            result.gamma_se = bootstrap_se(&leak, 0, |d| fit_leakage(d, Some(&fit.params)))
                .unwrap_or(result.gamma_se_covariance);
            let c = if kappa.abs() > 1e-12 { gamma / kappa } else { f64::INFINITY };
            let c_se = fit.covariance.as_ref().map_or(f64::NAN, |cov| {
                // Delta method for C = gamma / kappa.
                let (dg, dk) = (1.0 / kappa, -gamma / (kappa * kappa));
                (dg * dg * cov[(0, 0)] + 2.0 * dg * dk * cov[(0, 1)] + dk * dk * cov[(1, 1)])
                    .max(0.0)
                    .sqrt()
            });
            result.leakage_fit = Some(LeakageFit {
                c,
                beta: 1.0 - kappa,
                c_se,
                beta_se: fit.std_error(1),
                reduced_chi2: fit.reduced_chi2(),
            });
        }
    }
    Ok(result)
}

/// Inverse-variance weighted mean of `(value, standard error)` pairs.
pub fn pool_inverse_variance(estimates: &[(f64, f64)]) -> Result<(f64, f64)> {
    if estimates.is_empty() || estimates.iter().any(|e| !(e.1 > 0.0)) {
        return Err(Error::InvalidArgument(
            "pooling needs at least one estimate, all with positive standard error".into(),
        ));
    }
    let wsum: f64 = estimates.iter().map(|e| 1.0 / (e.1 * e.1)).sum();
    let mean = estimates.iter().map(|e| e.0 / (e.1 * e.1)).sum::<f64>() / wsum;
    Ok((mean, wsum.sqrt().recip()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub lengths: Vec<usize>,
    pub n_sequences: usize,
    pub shots: usize,
    pub seed: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            lengths: (1..=8).map(|k| 1usize << k).collect(),
            n_sequences: 20,
            shots: 1000,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub p: f64,
    pub expected_epsilon: f64,
    pub epsilon: f64,
    pub epsilon_se: f64,
    /// `|epsilon - p/2| / se`; zero when both sides agree exactly.
    pub z_score: f64,
    pub passed: bool,
    pub result: RBResult,
}

/// End-to-end self-test: physical noise off, a logical depolarizing channel
/// of strength `p` injected, and the fitted error compared with `p / 2`.
pub fn validate_rb_oracle(
    grid: &GridSpec,
    frame: &EncodedFrame,
    spam_pair: (DotId, DotId),
    p: f64,
    budget: &OracleBudget,
) -> Result<OracleReport> {
    if !(0.0..=0.05).contains(&p) {
        return Err(Error::InvalidArgument(format!("oracle p = {p} outside [0, 0.05]")));
    }
    let cfg = RBConfig {
        frame: frame.clone(),
        spam_pair,
        lengths: budget.lengths.clone(),
        n_sequences: budget.n_sequences,
        shots: budget.shots,
        t_pulse_s: 5e-9,
        t_idle_s: 10e-9,
        noise: QuasiStaticNoise::none(),
        readout_error: 0.0,
        injected_depolarizing: Some(p),
        mode: ReadoutMode::Probability,
        seed: budget.seed,
    };
    let result = fit_rb(&run_rb(grid, &cfg)?)?;
    let expected = p / 2.0;
    let diff = (result.epsilon_raw - expected).abs();
    let z_score = if diff == 0.0 { 0.0 } else { diff / result.epsilon_se };
    Ok(OracleReport {
        p,
        expected_epsilon: expected,
        epsilon: result.epsilon_raw,
        epsilon_se: result.epsilon_se,
        z_score,
        passed: diff <= 3.0 * result.epsilon_se + 1e-12,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn setup() -> (GridSpec, EncodedFrame, (DotId, DotId)) {
        let g = GridSpec::new(2, 3).unwrap();
        let f = EncodedFrame::by_name(&g, "X4Y5").unwrap();
        (g, f, (DotId::new(0, 1), DotId::new(0, 2)))
    }

    fn config(frame: EncodedFrame, spam: (DotId, DotId)) -> RBConfig {
        RBConfig {
            frame,
            spam_pair: spam,
            lengths: vec![1, 4, 16],
            n_sequences: 4,
            shots: 2,
            t_pulse_s: 5e-9,
            t_idle_s: 10e-9,
            noise: QuasiStaticNoise::none(),
            readout_error: 0.0,
            injected_depolarizing: None,
            mode: ReadoutMode::Probability,
            seed: 11,
        }
    }

    #[test]
    fn recovery_inverts_sequence() {
        let table = clifford_group();
        let mut rng = substream(5, &[]);
        for len in [1, 2, 7, 30] {
            let seq = draw_sequence(len, &mut rng);
            assert_eq!(seq.len(), len + 1);
            assert_eq!(seq.iter().fold(0, |acc, &c| table.compose(c, acc)), 0);
        }
    }

    #[test]
    fn noiseless_survival_is_one_with_no_leakage() {
        let (g, f, spam) = setup();
        let data = run_rb(&g, &config(f, spam)).unwrap();
        assert_eq!(data.records.len(), 12);
        for r in &data.records {
            assert!((r.survival - 1.0).abs() < 1e-10);
            assert!(r.leakage.unwrap() < 1e-10);
        }
        let res = fit_rb(&data).unwrap();
        assert!(res.survival_degenerate && res.leakage_degenerate);
        assert_eq!((res.epsilon, res.epsilon_se, res.gamma), (0.0, 0.0, 0.0));
    }

    #[test]
    fn uniform_field_leaves_survival_unchanged() {
        let (g, f, spam) = setup();
        let mut cfg = config(f, spam);
        cfg.noise.sigma_j_rel = 0.03;
        let base = run_rb(&g, &cfg).unwrap();
        cfg.noise.b_uniform_hz = 28e6;
        let with_b = run_rb(&g, &cfg).unwrap();
        for (a, b) in base.records.iter().zip(&with_b.records) {
            assert!((a.survival - b.survival).abs() < 1e-9);
        }
    }

    #[test]
    fn readout_error_maps_survival() {
        let (g, f, spam) = setup();
        let mut cfg = config(f, spam);
        cfg.readout_error = 0.1;
        for r in run_rb(&g, &cfg).unwrap().records {
            assert!((r.survival - 0.9).abs() < 1e-10);
        }
    }

    #[test]
    fn sampled_mode_omits_leakage() {
        let (g, f, spam) = setup();
        let mut cfg = config(f, spam);
        cfg.mode = ReadoutMode::Sampled;
        let data = run_rb(&g, &cfg).unwrap();
        assert!(data.records.iter().all(|r| r.leakage.is_none() && r.survival == 1.0));
    }

    #[test]
    fn invalid_configs_rejected() {
        let (g, f, spam) = setup();
        let mut cfg = config(f.clone(), spam);
        cfg.lengths = vec![];
        assert!(run_rb(&g, &cfg).is_err());
        cfg.lengths = vec![4, 2];
        assert!(run_rb(&g, &cfg).is_err());
        let mut cfg = config(f, spam);
        cfg.readout_error = 1.5;
        assert!(run_rb(&g, &cfg).is_err());
    }

    fn synthetic(f: impl Fn(f64) -> (f64, Option<f64>)) -> RBRawData {
        RBRawData {
            records: (1..=9)
                .map(|k| {
                    let l = 1usize << k;
                    let (s, leak) = f(l as f64);
                    RBRecord {
                        length: l,
                        sequence: 0,
                        survival: s,
                        leakage: leak,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn exact_synthetic_survival() {
        let d = synthetic(|l| (0.5 + 0.5 * 0.997f64.powf(l), None));
        let r = fit_rb(&d).unwrap();
        assert!((r.epsilon / 1.5e-3 - 1.0).abs() < 0.01);
        assert!(r.leakage_degenerate);
    }

    #[test]
    fn exact_synthetic_leakage() {
        let d = synthetic(|l| (0.5 + 0.5 * 0.999f64.powf(l), Some(0.5 * (1.0 - 0.9997f64.powf(l)))));
        let r = fit_rb(&d).unwrap();
        let expect = 0.5 * (1.0 - 0.9997);
        assert!((r.gamma / expect - 1.0).abs() < 0.05, "gamma {}", r.gamma);
        let lf = r.leakage_fit.unwrap();
        assert!((lf.beta - 0.9997).abs() < 1e-6);
        assert!((lf.c - 0.5).abs() < 1e-3);
    }

    #[test]
    fn constant_survival_is_degenerate() {
        let d = synthetic(|_| (1.0, Some(0.0)));
        let r = fit_rb(&d).unwrap();
        assert!(r.survival_degenerate);
        assert_eq!((r.epsilon, r.gamma), (0.0, 0.0));
    }

    #[test]
    fn too_few_lengths() {
        let mut d = synthetic(|l| (0.5 + 0.5 * 0.99f64.powf(l), None));
        d.records.truncate(2);
        assert!(matches!(fit_rb(&d), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn pooling() {
        let (m, se) = pool_inverse_variance(&[(1.0, 1.0), (3.0, 1.0)]).unwrap();
        assert!((m - 2.0).abs() < 1e-15 && (se - 0.5f64.sqrt()).abs() < 1e-15);
        let (m, _) = pool_inverse_variance(&[(1.0, 0.1), (3.0, 1.0)]).unwrap();
        assert!((m - (100.0 + 3.0) / 101.0).abs() < 1e-12);
        assert!(pool_inverse_variance(&[(1.0, 0.0)]).is_err());
    }

    #[test]
    fn oracle_zero_p() {
        let (g, f, spam) = setup();
        let budget = OracleBudget {
            lengths: vec![2, 4, 8],
            n_sequences: 3,
            shots: 2,
            seed: 1,
        };
        let rep = validate_rb_oracle(&g, &f, spam, 0.0, &budget).unwrap();
        assert!(rep.passed && rep.epsilon == 0.0);
        assert!(validate_rb_oracle(&g, &f, spam, 0.2, &budget).is_err());
    }
}
