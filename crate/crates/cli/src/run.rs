//! Experiment drivers and their on-disk outputs.
//!
//! Every JSON file is an envelope carrying the tool version, the seed and the
//! effective configuration next to the result. Nothing time-dependent is
//! written, so identical inputs give byte-identical outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use eoq_core::benchmark::{fit_rb, run_rb, validate_rb_oracle, OracleBudget, RBConfig, RBRawData};
use eoq_core::encoding::{route_singlet, route_to_axis, EncodedFrame};
use eoq_core::lattice::{
    disjoint_tqd_pairs, enumerate_qubit_assignments, enumerate_tqds, pack_qubits, tqd_count_formula, GridSpec,
};
use eoq_core::pulse::{
    extract_n_osc, gaussian_n_osc, simulate_exchange_trace, simulate_fingerprint, trace_times, ExchangeProbe,
    NoscEstimate,
};
use eoq_core::pulse_seq::PulseSeq;
use serde::Serialize;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig, NoiseConfig};
use crate::error::CliError;

pub const TOOL: &str = "eoq";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What a run produced, for the one-line summary on stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub message: String,
}

pub struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(
        &mut self,
        name: &str,
        experiment: Experiment,
        cfg: &ExperimentConfig,
        result: &T,
    ) -> Result<(), CliError> {
        // The output location is not part of the experiment.
        let mut config = serde_json::to_value(cfg).map_err(std::io::Error::other)?;
        if let Some(obj) = config.as_object_mut() {
            obj.remove("output_dir");
        }
        let envelope = json!({
            "tool": TOOL,
            "version": VERSION,
            "experiment": experiment.name(),
            "seed": cfg.seed,
            "config": config,
            "result": result,
        });
        let mut text = serde_json::to_string_pretty(&envelope).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn finish(self, message: String) -> RunSummary {
        RunSummary {
            files: self.files,
            message,
        }
    }
}

/// Runs `experiment` and writes its files into `out_dir`.
pub fn run(experiment: Experiment, cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    cfg.validate(experiment)?;
    let grid = cfg.grid()?;
    let mut out = Outputs::create(out_dir)?;
    match experiment {
        Experiment::Enumerate => enumerate(&grid, cfg, &mut out).map(|m| out.finish(m)),
        Experiment::Place => place(&grid, cfg, &mut out).map(|m| out.finish(m)),
        Experiment::Fingerprint => fingerprint(&grid, cfg, &mut out).map(|m| out.finish(m)),
        Experiment::Nosc => nosc(&grid, cfg, &mut out).map(|m| out.finish(m)),
        Experiment::Rb => rb(&grid, cfg, &mut out).map(|m| out.finish(m)),
        Experiment::Route => route(&grid, cfg, &mut out).map(|m| out.finish(m)),
        Experiment::Validate => validate(&grid, cfg, &mut out).map(|m| out.finish(m)),
    }
}

fn enumerate(grid: &GridSpec, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<String, CliError> {
    let tqds = enumerate_tqds(grid);
    let assignments = enumerate_qubit_assignments(grid);
    let pairs = disjoint_tqd_pairs(grid);

    let mut csv = String::from("index,d1,d2,d3,center,shape\n");
    for (i, t) in tqds.iter().enumerate() {
        let [d1, d2, d3] = t.dots.map(|d| grid.dot_name(d));
        let shape = serde_json::to_value(t.shape).map_err(std::io::Error::other)?;
        writeln!(csv, "{i},{d1},{d2},{d3},{d2},{}", shape.as_str().unwrap_or_default()).unwrap();
    }
    out.write("tqds.csv", &csv)?;

    let mut csv = String::from("index,name,tqd_index,permutation,a,b,c\n");
    for (i, q) in assignments.iter().enumerate() {
        let tqd_index = tqds.iter().position(|t| *t == q.tqd).unwrap_or(usize::MAX);
        let [a, b, c] = q.spin_map().map(|d| grid.dot_name(d));
        writeln!(csv, "{i},{},{tqd_index},\"{}\",{a},{b},{c}", q.name(grid), q.permutation).unwrap();
    }
    out.write("assignments.csv", &csv)?;

    let defect_free = grid.dead_dots.is_empty() && grid.dead_axes.is_empty();
    let formula = if defect_free {
        tqd_count_formula(grid.n_rows, grid.n_cols).ok()
    } else {
        None
    };
    let result = json!({
        "n_tqds": tqds.len(),
        "n_tqds_formula": formula,
        "n_assignments": assignments.len(),
        "disjoint_pairs_unordered": pairs.len(),
        "disjoint_pairs_ordered": 2 * pairs.len(),
        "disjoint_pairs": pairs,
    });
    out.json("enumerate.json", Experiment::Enumerate, cfg, &result)?;
    Ok(format!(
        "{} TQDs, {} qubit assignments, {} disjoint TQD pairs",
        tqds.len(),
        assignments.len(),
        pairs.len()
    ))
}

fn place(grid: &GridSpec, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<String, CliError> {
    let pc = cfg.place.clone().unwrap_or_default();
    let placement = pack_qubits(grid, pc.objective, pc.solver);
    let qubits: Vec<_> = placement
        .qubits
        .iter()
        .map(|q| {
            json!({
                "name": q.name(grid),
                "dots": q.spin_map().map(|d| grid.dot_name(d)),
                "permutation": q.permutation,
                "shape": q.tqd.shape,
            })
        })
        .collect();
    let result = json!({
        "n_qubits": placement.qubits.len(),
        "adjacency_count": placement.adjacency_count,
        "qubits": qubits,
    });
    out.json("placement.json", Experiment::Place, cfg, &result)?;
    let names: Vec<String> = placement.qubits.iter().map(|q| q.name(grid)).collect();
    Ok(format!("{} qubits placed: {}", names.len(), names.join(" ")))
}

fn selected_axes(grid: &GridSpec, requested: &[String]) -> Result<Vec<String>, CliError> {
    if requested.is_empty() {
        return Ok(grid.live_axes().into_iter().map(|a| a.label).collect());
    }
    for label in requested {
        match grid.axis_by_label(label) {
            Some(a) if grid.is_axis_live(&a) => {}
            Some(_) => return Err(CliError::Config(format!("axis {label} is dead"))),
            None => return Err(CliError::Config(format!("unknown axis {label}"))),
        }
    }
    Ok(requested.to_vec())
}

fn fingerprint(grid: &GridSpec, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<String, CliError> {
    let fc = cfg.fingerprint.as_ref().expect("validated");
    let spam = cfg.spam_pair(grid)?;
    let barrier_mv = fc.barrier_mv.values();
    let detuning_mv = fc.detuning_mv.values();
    let barrier_v: Vec<f64> = barrier_mv.iter().map(|v| v * 1e-3).collect();
    let detuning_v: Vec<f64> = detuning_mv.iter().map(|v| v * 1e-3).collect();
    let mut maps = Vec::new();
    for label in selected_axes(grid, &fc.axes)? {
        let probe = ExchangeProbe {
            spam_pair: spam,
            target_axis: label.clone(),
            route: None,
            noise: cfg.noise.quasi_static(),
            mode: fc.mode,
            shots: fc.shots,
            seed: cfg.seed,
        };
        let model = cfg.exchange.model_for(&label)?;
        let map = simulate_fingerprint(grid, &probe, &model, &barrier_v, &detuning_v, fc.t_evolve_ns * 1e-9)?;
        let mut csv = String::from("v1_barrier_mv,v2_detuning_mv,p_singlet\n");
        for (i, b) in barrier_mv.iter().enumerate() {
            for (k, d) in detuning_mv.iter().enumerate() {
                writeln!(csv, "{b},{d},{}", map.p_singlet[i][k]).unwrap();
            }
        }
        out.write(&format!("fingerprint_{label}.csv"), &csv)?;
        let route = route_to_axis(grid, spam, &grid.axis_by_label(&label).expect("checked"))?;
        maps.push(json!({
            "axis": label,
            "file": format!("fingerprint_{label}.csv"),
            "route": route_labels(&route),
            "model": model,
        }));
    }
    let n = maps.len();
    out.json("fingerprint.json", Experiment::Fingerprint, cfg, &json!({ "axes": maps }))?;
    Ok(format!("{n} fingerprint maps of {}x{} points", barrier_mv.len(), detuning_mv.len()))
}

fn nosc(grid: &GridSpec, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<String, CliError> {
    let nc = cfg.nosc.as_ref().expect("validated");
    let spam = cfg.spam_pair(grid)?;
    let noise = cfg.noise.quasi_static();
    let j_hz = nc.j_mhz * 1e6;
    let times = trace_times(j_hz, nc.periods, nc.points_per_period);
    let mut csv = String::from("axis,t_ns,p_singlet\n");
    let mut estimates = Vec::new();
    let mut lines = Vec::new();
    for label in selected_axes(grid, &nc.axes)? {
        let probe = ExchangeProbe {
            spam_pair: spam,
            target_axis: label.clone(),
            route: None,
            noise: noise.clone(),
            mode: nc.mode,
            shots: nc.shots,
            seed: cfg.seed,
        };
        let trace = simulate_exchange_trace(grid, &probe, j_hz, &times)?;
        for (t, p) in times.iter().zip(&trace) {
            writeln!(csv, "{label},{},{p}", t * 1e9).unwrap();
        }
        let est: NoscEstimate = extract_n_osc(&times, &trace, nc.envelope_power)?;
        let sigma = noise.sigma_j_rel_axis.get(&label).copied().unwrap_or(noise.sigma_j_rel);
        let expected = (sigma > 0.0).then(|| gaussian_n_osc(sigma));
        lines.push(match est.n_osc {
            Some(n) => format!("{label}: N_osc {n:.2}"),
            None => format!("{label}: N_osc unbounded"),
        });
        estimates.push(json!({
            "axis": label,
            "estimate": est,
            "n_osc_charge_noise_only": expected,
        }));
    }
    out.write("nosc.csv", &csv)?;
    out.json("nosc.json", Experiment::Nosc, cfg, &json!({ "axes": estimates }))?;
    Ok(lines.join(", "))
}

fn rb_config(grid: &GridSpec, cfg: &ExperimentConfig) -> Result<RBConfig, CliError> {
    let rc = cfg.rb.as_ref().expect("validated");
    Ok(RBConfig {
        frame: EncodedFrame::by_name(grid, &rc.qubit)?,
        spam_pair: cfg.spam_pair(grid)?,
        lengths: rc.lengths.clone(),
        n_sequences: rc.n_sequences,
        shots: rc.shots,
        t_pulse_s: rc.t_pulse_ns * 1e-9,
        t_idle_s: rc.t_idle_ns * 1e-9,
        noise: cfg.noise.quasi_static(),
        readout_error: rc.readout_error,
        injected_depolarizing: rc.injected_depolarizing,
        mode: rc.mode,
        seed: cfg.seed,
    })
}

pub fn rb_raw_csv(data: &RBRawData) -> String {
    let mut csv = String::from("length,sequence_id,survival,leakage\n");
    for r in &data.records {
        let leak = r.leakage.map(|l| l.to_string()).unwrap_or_default();
        writeln!(csv, "{},{},{},{leak}", r.length, r.sequence, r.survival).unwrap();
    }
    csv
}

fn rb(grid: &GridSpec, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<String, CliError> {
    let rbc = rb_config(grid, cfg)?;
    let data = run_rb(grid, &rbc)?;
    // Raw data is kept even when the fit fails.
    out.write("rb_raw.csv", &rb_raw_csv(&data))?;
    let result = fit_rb(&data)?;
    let mut record = serde_json::to_value(&result).map_err(std::io::Error::other)?;
    record["calibration_band"] = calibration_band(cfg, result.epsilon);
    out.json("rb_result.json", Experiment::Rb, cfg, &record)?;
    Ok(format!(
        "{}: epsilon {:.4e} +- {:.1e}, gamma {:.3e} +- {:.1e}",
        rbc.frame.name(),
        result.epsilon,
        result.epsilon_se,
        result.gamma,
        result.gamma_se
    ))
}

/// Plausibility window for the per-Clifford error of present-day devices.
pub const CALIBRATION_BAND: (f64, f64) = (5e-4, 5e-3);

/// Whether `epsilon` lands in the plausibility window. Only meaningful with
/// the default noise model; it checks scale, not a specific device.
fn calibration_band(cfg: &ExperimentConfig, epsilon: f64) -> serde_json::Value {
    let (low, high) = CALIBRATION_BAND;
    json!({
        "kind": "calibration-band check, not a reproduction of a measured device",
        "low": low,
        "high": high,
        "epsilon_in_band": (low..=high).contains(&epsilon),
        "default_noise": cfg.noise == NoiseConfig::default(),
    })
}

fn route_labels(seq: &PulseSeq) -> Vec<String> {
    seq.pulses.iter().map(|p| p.axis.clone()).collect()
}

fn route(grid: &GridSpec, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<String, CliError> {
    let rc = cfg.route.as_ref().expect("validated");
    let spam = cfg.spam_pair(grid)?;
    let (target, seq) = match (&rc.qubit, &rc.axis) {
        (Some(q), _) => {
            let frame = EncodedFrame::by_name(grid, q)?;
            (q.clone(), route_singlet(grid, spam, &frame)?)
        }
        (None, Some(a)) => {
            let axis = grid
                .axis_by_label(a)
                .ok_or_else(|| CliError::Config(format!("unknown axis {a}")))?;
            (a.clone(), route_to_axis(grid, spam, &axis)?)
        }
        (None, None) => unreachable!("validated"),
    };
    let swaps = route_labels(&seq);
    let result = json!({
        "from": [grid.dot_name(spam.0), grid.dot_name(spam.1)],
        "to": target,
        "swaps": swaps,
        "pulses": seq.pulses,
    });
    out.json("route.json", Experiment::Route, cfg, &result)?;
    Ok(if swaps.is_empty() {
        format!("{target}: no swaps needed")
    } else {
        format!("{target}: swap {}", swaps.join(" "))
    })
}

fn validate(grid: &GridSpec, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<String, CliError> {
    let vc = cfg.validate.clone().unwrap_or_default();
    let frame = EncodedFrame::by_name(grid, &vc.rb_oracle_qubit)?;
    let budget = OracleBudget {
        lengths: vc.rb_oracle_lengths,
        n_sequences: vc.rb_oracle_sequences,
        shots: vc.rb_oracle_shots,
        seed: cfg.seed,
    };
    let report = validate_rb_oracle(grid, &frame, cfg.spam_pair(grid)?, vc.rb_oracle_p, &budget)?;
    out.json("validate.json", Experiment::Validate, cfg, &report)?;
    let line = format!(
        "RB oracle p = {}: epsilon {:.4e} +- {:.1e} vs {:.4e} (z = {:.2})",
        report.p, report.epsilon, report.epsilon_se, report.expected_epsilon, report.z_score
    );
    if report.passed {
        Ok(format!("PASS {line}"))
    } else {
        Err(CliError::Validation(line))
    }
}
