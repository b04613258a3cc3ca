//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run alone with `cargo test -p eoq-cli --test acceptance`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use eoq_cli::config::ExperimentConfig;
use eoq_cli::{run, Experiment};
use eoq_core::benchmark::{fit_rb, run_rb, validate_rb_oracle, OracleBudget, RBConfig};
use eoq_core::encoding::{effective_qubit_hamiltonian, route_singlet, sigma_n, EncodedFrame};
use eoq_core::lattice::{
    disjoint_tqd_pairs, enumerate_qubit_assignments, enumerate_tqds, pack_qubits, tqd_count_formula, DotId,
    GridSpec, PackObjective, PackSolver,
};
use eoq_core::noise::QuasiStaticNoise;
use eoq_core::pulse::{
    extract_n_osc, gaussian_n_osc, simulate_exchange_trace, trace_times, EnvelopePower, ExchangeProbe, ReadoutMode,
};
use eoq_core::pulse_seq::{apply_ideal, run_timed};
use eoq_core::spin_sim::{prepare_state, FieldSpec, PureState, SpectatorSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn grid23() -> GridSpec {
    GridSpec::new(2, 3).unwrap()
}

fn spam(grid: &GridSpec) -> (DotId, DotId) {
    (grid.dot_by_name("P2").unwrap(), grid.dot_by_name("P3").unwrap())
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn combinatorics() -> Outcome {
    let t = Instant::now();
    let g = grid23();
    let tqds = enumerate_tqds(&g).len();
    let assignments = enumerate_qubit_assignments(&g).len();
    let unordered = disjoint_tqd_pairs(&g).len();
    let mut formula_ok = true;
    for n in 2..=6 {
        for m in 2..=6 {
            let enumerated = enumerate_tqds(&GridSpec::new(n, m).unwrap()).len();
            formula_ok &= tqd_count_formula(n, m) == Ok(enumerated) && enumerated == 6 * (n - 1) * (m - 1) - 2;
        }
    }
    let el = t.elapsed();
    check(
        tqds == 10 && assignments == 20 && 2 * unordered == 6 && formula_ok && within(el, 1.0),
        format!(
            "2x3: {tqds} TQDs, {assignments} assignments, {} ordered ({unordered} unordered) disjoint pairs; \
             6(n-1)(m-1)-2 for 2..6 x 2..6: {formula_ok}; {:.3} s (limit 1 s)",
            2 * unordered,
            el.as_secs_f64()
        ),
    )
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Singlet projector on spins `i`, `j` of an `n`-spin register (bit k = spin k, 0 = up).
fn dense_singlet_projector(n: usize, i: usize, j: usize) -> DMatrix<Complex64> {
    let dim = 1 << n;
    let mut p = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        if ((x >> i) & 1) != ((x >> j) & 1) {
            p[(x, x)] = c(0.5);
            p[(x ^ (1 << i) ^ (1 << j), x)] = c(-0.5);
        }
    }
    p
}

fn three_spin_law() -> Outcome {
    let t = Instant::now();
    // Singlet on (0, 1), spin 2 up; exchange on (1, 2).
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi0 = vec![c(0.0); 8];
    psi0[0b010] = c(s);
    psi0[0b001] = c(-s);
    let p_s01 = dense_singlet_projector(3, 0, 1);
    let p_s12 = dense_singlet_projector(3, 1, 2);
    let v0 = nalgebra::DVector::from_vec(psi0.clone());
    let mut err_dense: f64 = 0.0;
    let mut err_law: f64 = 0.0;
    for k in 0..=400 {
        let theta = 4.0 * PI * k as f64 / 400.0;
        let u = (&p_s12 * Complex64::new(0.0, theta)).exp();
        let v = &u * &v0;
        let oracle = (v.adjoint() * &p_s01 * &v)[(0, 0)].re;
        let mut st = PureState::from_amplitudes(psi0.clone()).unwrap();
        st.apply_exchange((1, 2), theta).unwrap();
        let sim = st.singlet_probability((0, 1)).unwrap();
        let law = 1.0 - 0.75 * (theta / 2.0).sin().powi(2);
        err_dense = err_dense.max((sim - oracle).abs());
        err_law = err_law.max((sim - law).abs());
    }
    let el = t.elapsed();
    check(
        err_dense < 1e-10 && err_law < 1e-10 && within(el, 1.0),
        format!(
            "max |sim - dense expm| = {err_dense:.1e}, max |sim - 1 - 3/4 sin^2(theta/2)| = {err_law:.1e} \
             over 401 angles in [0, 4pi] (tol 1e-10); {:.3} s (limit 1 s)",
            el.as_secs_f64()
        ),
    )
}

fn effective_hamiltonian() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sz = [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]];
    let sn = sigma_n();
    let mut err_form: f64 = 0.0;
    let mut err_gap: f64 = 0.0;
    let p_ab = dense_singlet_projector(3, 0, 1);
    let p_bc = dense_singlet_projector(3, 1, 2);
    for _ in 0..100 {
        let ji = rng.random_range(0.1..20.0);
        let jj = rng.random_range(0.1..20.0);
        let h = effective_qubit_hamiltonian(ji, jj);
        // Energies are splittings in Hz, so each axis carries J/2.
        for r in 0..2 {
            for k in 0..2 {
                let want = sz[r][k] * (ji / 2.0) + sn[r][k] * (jj / 2.0);
                err_form = err_form.max((h[r][k] - want).norm());
            }
        }
        // Independent check: the doublet splitting of the full three-spin
        // Hamiltonian from dense diagonalization.
        let full = (&p_ab * c(-ji) + &p_bc * c(-jj)).map(|z| z.re);
        let mut e: Vec<f64> = full.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        let gap_dense = e[2] - e[0];
        let det = (h[0][0] * h[1][1] - h[0][1] * h[1][0]).re;
        let gap_2x2 = 2.0 * (-det).sqrt();
        err_gap = err_gap.max((gap_dense - gap_2x2).abs());
    }
    let el = t.elapsed();
    check(
        err_form < 1e-10 && err_gap < 1e-10 && within(el, 1.0),
        format!(
            "100 random pairs: max |H - (J_i sz + J_j sn)/2| = {err_form:.1e}, doublet gap vs dense 8x8 = {err_gap:.1e} \
             (tol 1e-10); {:.3} s (limit 1 s)",
            el.as_secs_f64()
        ),
    )
}

fn routing() -> Outcome {
    let t = Instant::now();
    let g = grid23();
    let (p2, p3) = spam(&g);
    let pair = (g.dot_index(p2), g.dot_index(p3));
    let mut worst: f64 = 1.0;
    let mut delivered = true;
    let mut n = 0;
    for (i, q) in enumerate_qubit_assignments(&g).into_iter().enumerate() {
        let frame = EncodedFrame::new(&g, q).unwrap();
        let route = route_singlet(&g, (p2, p3), &frame).unwrap();
        let initial = prepare_state(g.n_dots(), Some(pair), &SpectatorSpec::SampledRandomProduct(i as u64)).unwrap();
        for timed in [false, true] {
            let mut s = initial.clone();
            let (fwd, back) = if timed {
                (route.clone().with_timing(5e-9, 10e-9), route.reversed().with_timing(5e-9, 10e-9))
            } else {
                (route.clone(), route.reversed())
            };
            let exec = |s: &mut PureState, seq| {
                if timed {
                    run_timed(s, &g, seq, &FieldSpec::zero()).unwrap()
                } else {
                    apply_ideal(s, &g, seq).unwrap()
                }
            };
            exec(&mut s, &fwd);
            delivered &= (s.singlet_probability(frame.singlet_spins()).unwrap() - 1.0).abs() < 1e-10;
            exec(&mut s, &back);
            worst = worst.min(s.fidelity(&initial));
            n += 1;
        }
    }
    let el = t.elapsed();
    check(
        worst >= 1.0 - 1e-10 && delivered && within(el, 10.0),
        format!(
            "{n} round trips from (P2,P3) (20 assignments, ideal and timed): min fidelity 1 - {:.1e} \
             (tol 1e-10), singlet delivered: {delivered}; {:.3} s (limit 10 s)",
            1.0 - worst,
            el.as_secs_f64()
        ),
    )
}

fn rb_oracle() -> Outcome {
    let t = Instant::now();
    let g = grid23();
    let frame = EncodedFrame::by_name(&g, "X4Y5").unwrap();
    let budget = OracleBudget::default();
    let r = validate_rb_oracle(&g, &frame, spam(&g), 2e-3, &budget).unwrap();
    let el = t.elapsed();
    check(
        r.passed && budget.n_sequences >= 20 && within(el, 300.0),
        format!(
            "p = 2e-3, lengths {:?}, {} sequences x {} shots: epsilon = {:.3e} +- {:.1e}, target 1.0e-3, \
             |z| = {:.2} (limit 3); {:.1} s (limit 300 s)",
            budget.lengths,
            budget.n_sequences,
            budget.shots,
            r.epsilon,
            r.epsilon_se,
            r.z_score,
            el.as_secs_f64()
        ),
    )
}

fn rb_settings(g: &GridSpec, noise: QuasiStaticNoise, t_pulse_s: f64, t_idle_s: f64) -> RBConfig {
    RBConfig {
        frame: EncodedFrame::by_name(g, "X4Y5").unwrap(),
        spam_pair: spam(g),
        lengths: (0..=9).map(|k| 1 << k).collect(),
        n_sequences: 20,
        shots: 50,
        t_pulse_s,
        t_idle_s,
        noise,
        readout_error: 0.0,
        injected_depolarizing: None,
        mode: ReadoutMode::Probability,
        seed: 2024,
    }
}

fn hyperfine_trend() -> Outcome {
    let t = Instant::now();
    let g = grid23();
    let noise = QuasiStaticNoise {
        sigma_bz_hz: 3e5,
        b_uniform_hz: 27.99e6,
        ..QuasiStaticNoise::none()
    };
    let fast = fit_rb(&run_rb(&g, &rb_settings(&g, noise.clone(), 5e-9, 10e-9)).unwrap()).unwrap();
    let slow = fit_rb(&run_rb(&g, &rb_settings(&g, noise, 10e-9, 15e-9)).unwrap()).unwrap();
    let sep = (slow.epsilon_raw - fast.epsilon_raw) / fast.epsilon_se.hypot(slow.epsilon_se);
    let el = t.elapsed();
    check(
        sep >= 3.0 && within(el, 600.0),
        format!(
            "sigma_Bz = 300 kHz only: epsilon(5/10 ns) = {:.3e} +- {:.1e} vs epsilon(10/15 ns) = {:.3e} +- {:.1e}, \
             separation {sep:.1} sigma (need >= 3); {:.1} s (limit 600 s)",
            fast.epsilon_raw,
            fast.epsilon_se,
            slow.epsilon_raw,
            slow.epsilon_se,
            el.as_secs_f64()
        ),
    )
}

fn n_osc() -> Outcome {
    let t = Instant::now();
    let g = grid23();
    let j_hz = 10e6;
    let shots = 2000;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, sigma) in [0.005, 0.02, 0.05].into_iter().enumerate() {
        let expected = gaussian_n_osc(sigma);
        let probe = ExchangeProbe {
            spam_pair: spam(&g),
            target_axis: "X1".into(),
            route: None,
            noise: QuasiStaticNoise {
                sigma_j_rel: sigma,
                ..QuasiStaticNoise::none()
            },
            mode: ReadoutMode::Probability,
            shots,
            seed: 100 + k as u64,
        };
        let times = trace_times(j_hz, (3.0 * expected).max(12.0), 16);
        let trace = simulate_exchange_trace(&g, &probe, j_hz, &times).unwrap();
        let est = extract_n_osc(&times, &trace, EnvelopePower::Gaussian).unwrap();
        let got = est.n_osc.unwrap_or(f64::INFINITY);
        let rel = (got - expected).abs() / expected;
        worst = worst.max(rel);
        parts.push(format!("sigma {sigma}: {got:.2} vs {expected:.2}"));
    }
    let el = t.elapsed();
    check(
        worst < 0.05 && within(el, 60.0),
        format!(
            "{} ({shots} samples each); worst relative error {:.1}% (tol 5%); {:.1} s (limit 60 s)",
            parts.join(", "),
            100.0 * worst,
            el.as_secs_f64()
        ),
    )
}

fn packing() -> Outcome {
    let t = Instant::now();
    let mut patterns = 0;
    let mut mismatches = 0;
    for n in 1..=3 {
        for m in 1..=4 {
            let Ok(base) = GridSpec::new(n, m) else { continue };
            let dots: Vec<DotId> = base.dots().collect();
            let mut dead_sets: Vec<Vec<DotId>> = vec![vec![]];
            for i in 0..dots.len() {
                dead_sets.push(vec![dots[i]]);
                for j in i + 1..dots.len() {
                    dead_sets.push(vec![dots[i], dots[j]]);
                }
            }
            for dead in dead_sets {
                let mut g = base.clone();
                for d in dead {
                    g = g.with_dead_dot(d).unwrap();
                }
                for objective in [PackObjective::MaxCount, PackObjective::MaxCountThenAdjacency] {
                    let exact = pack_qubits(&g, objective, PackSolver::Exact);
                    let oracle = pack_qubits(&g, objective, PackSolver::BruteForceOracle);
                    let score = |p: &eoq_core::lattice::Placement| match objective {
                        PackObjective::MaxCount => (p.qubits.len(), 0),
                        PackObjective::MaxCountThenAdjacency => (p.qubits.len(), p.adjacency_count),
                    };
                    if score(&exact) != score(&oracle) || !exact.is_disjoint() {
                        mismatches += 1;
                    }
                    patterns += 1;
                }
            }
        }
    }
    let el = t.elapsed();
    check(
        mismatches == 0 && within(el, 60.0),
        format!(
            "{patterns} (grid, <= 2 dead dots, objective) cases up to 3x4: {mismatches} objective mismatches \
             against exhaustive search; {:.2} s (limit 60 s)",
            el.as_secs_f64()
        ),
    )
}

const DETERMINISM_CONFIG: &str = r#"{
    "grid": {"n_rows": 2, "n_cols": 3},
    "seed": 99,
    "rb": {"qubit": "X4Y5", "n_sequences": 6, "shots": 12, "mode": "sampled"},
    "fingerprint": {"axes": ["X1", "Y6"], "barrier_mv": {"start": -200, "stop": 200, "steps": 7},
                    "detuning_mv": {"start": -60, "stop": 60, "steps": 5}, "t_evolve_ns": 150, "shots": 16},
    "nosc": {"axes": ["X2"], "j_mhz": 10, "periods": 30, "shots": 64}
}"#;

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, DETERMINISM_CONFIG).unwrap();
    let mut outputs = Vec::new();
    let mut failures = Vec::new();
    for threads in ["1", "3", "8"] {
        let out = dir.path().join(format!("t{threads}"));
        for sub in ["rb", "fingerprint", "nosc"] {
            let o = Command::new(env!("CARGO_BIN_EXE_eoq"))
                .args([sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
                .args(["--threads", threads])
                .output()
                .unwrap();
            if !o.status.success() {
                failures.push(format!("{sub} with {threads} threads exited {:?}", o.status.code()));
            }
        }
        outputs.push(files_in(&out));
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    let n_files = outputs[0].len();
    let el = t.elapsed();
    check(
        identical && failures.is_empty() && n_files >= 7,
        format!(
            "rb, fingerprint and nosc through the binary with 1, 3 and 8 threads: {n_files} JSON/CSV files, \
             byte-identical: {identical}{}; {:.1} s",
            if failures.is_empty() {
                String::new()
            } else {
                format!(" ({})", failures.join("; "))
            },
            el.as_secs_f64()
        ),
    )
}

fn calibration_band() -> Outcome {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    // Documented defaults throughout; only the qubit is chosen.
    let cfg = ExperimentConfig::parse(r#"{"grid": {"n_rows": 2, "n_cols": 3}, "rb": {"qubit": "X4Y5"}}"#).unwrap();
    let summary = run(Experiment::Rb, &cfg, dir.path());
    let el = t.elapsed();
    let Ok(_) = summary else {
        return check(false, format!("default-noise RB run failed: {:?}", summary.err()));
    };
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rb_result.json")).unwrap()).unwrap();
    let r = &v["result"];
    let band = &r["calibration_band"];
    let eps = r["epsilon"].as_f64().unwrap();
    let in_band = band["epsilon_in_band"].as_bool().unwrap() && band["default_noise"].as_bool().unwrap();
    check(
        in_band && (5e-4..=5e-3).contains(&eps),
        format!(
            "default noise (sigma_J/J 0.02, sigma_Bz 100 kHz, 1 mT): epsilon = {eps:.3e} +- {:.1e}, \
             Gamma = {:.2e} +- {:.1e}; band [5e-4, 5e-3] recorded in rb_result.json as a calibration-band check; {:.1} s",
            r["epsilon_se"].as_f64().unwrap_or(f64::NAN),
            r["gamma"].as_f64().unwrap_or(f64::NAN),
            r["gamma_se"].as_f64().unwrap_or(f64::NAN),
            el.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("combinatorics", combinatorics),
        ("three-spin exchange law", three_spin_law),
        ("effective Hamiltonian", effective_hamiltonian),
        ("routing round trip", routing),
        ("RB depolarizing oracle", rb_oracle),
        ("hyperfine gate-time trend", hyperfine_trend),
        ("N_osc Monte Carlo", n_osc),
        ("packing optimality", packing),
        ("determinism across threads", determinism),
        ("default-noise calibration band", calibration_band),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.passed {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
