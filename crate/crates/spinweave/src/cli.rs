//! Batch experiment runner: builds networks, runs protocol and gate
//! experiments, and writes plot-ready CSV records plus a JSON summary.
//!
//! Outputs are deterministic functions of (config, seed) and independent of
//! the worker count; the `SPINWEAVE_THREADS` environment variable caps the
//! rayon pool used for sweep fan-out. Exit codes: 0 success, 2 invalid
//! config or input file, 3 numerical failure (leakage or ambiguity flags).

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::dynamics::{assemble, propagate, StateVector};
use crate::gates::{
    ab_phase_gate, adiabatic_holonomy, blocking_fidelity, cnot_flip_probability_closed,
    cnot_flip_width, exchange_cphase_gate, hadamard_gate, hadamard_matrix,
    holonomy_closed_form, holonomy_hadamard_params, holonomy_p, phase_diag, simulate_cnot,
    HolonomyParams, LogicalUnitary,
};
use crate::network::{
    build_flux_ring, build_hadamard_unit, build_linked_chains, build_pst_chain,
    build_single_qubit_network, build_y_junction, NetworkSpec,
};
use crate::protocols::{
    calibrate_offset, estimate_length_bits, fringe_scan, frequency_scan, geometric_loop,
    kappa_for_omega, phase_slope, predicted_phase, ErrorModel, ExperimentRecord,
};
use crate::{wrap_angle, Error, Result};

/// Schema tag stamped into every JSON summary.
pub const SUMMARY_SCHEMA: &str = "spinweave.summary/1";

#[derive(Debug, Parser)]
#[command(name = "spinweave", about = "Spin-network simulator and metrology toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write CSV records plus a JSON summary.
    Run(RunArgs),
    /// Build a network and write its JSON description.
    EmitNetwork(EmitArgs),
    /// Load and validate a network JSON file.
    CheckNetwork {
        /// Path to a network JSON file.
        file: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// End-to-end perfect state transfer.
    Transfer,
    /// Geometric-loop phase vs solid angle sweep.
    Geoloop,
    /// Semiclassical bit extraction of the chain length.
    Bits,
    /// Interference fringe scan over the analysis phase χ.
    Fringe,
    /// Frequency scan estimating N from the fringe period.
    Freqscan,
    /// Field-offset calibration via the identity loop.
    Offset,
    /// Dual-rail Hadamard unit.
    GateHadamard,
    /// Aharonov-Bohm flux phase gate.
    GateAb,
    /// Chain-mediated CNOT flip.
    GateCnot,
    /// Two-excitation exchange controlled-phase.
    GateCphase,
    /// Adiabatic non-abelian holonomy on linked chains.
    Holonomy,
    /// Zeeman blocking fidelity sweep.
    Block,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Transfer => "transfer",
            Experiment::Geoloop => "geoloop",
            Experiment::Bits => "bits",
            Experiment::Fringe => "fringe",
            Experiment::Freqscan => "freqscan",
            Experiment::Offset => "offset",
            Experiment::GateHadamard => "gate-hadamard",
            Experiment::GateAb => "gate-ab",
            Experiment::GateCnot => "gate-cnot",
            Experiment::GateCphase => "gate-cphase",
            Experiment::Holonomy => "holonomy",
            Experiment::Block => "block",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RunArgs {
    /// Which experiment to run.
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Chain length (number of sites per rail where applicable).
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Chain coupling strength λ.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Gradient strength κ (geoloop/fringe/offset).
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Sweep grid size.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Maximum bits for length estimation.
    #[arg(long, default_value_t = 4)]
    pub max_bits: usize,
    /// Flux / holonomy loop angle φ.
    #[arg(long, default_value_t = PI / 3.0)]
    pub phi: f64,
    /// Linked-chain mixing angle θ (holonomy; default: Hadamard solution).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Linked-chain crossing position R (holonomy).
    #[arg(long, default_value_t = 2)]
    pub link: usize,
    /// Adiabatic total time T (holonomy).
    #[arg(long, default_value_t = 200.0)]
    pub total_time: f64,
    /// Adiabatic integration steps (holonomy).
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Uniform field offset b on the gradient segment (offset experiment).
    #[arg(long, default_value_t = 0.1)]
    pub field_offset: f64,
    /// Blocked site index (block experiment).
    #[arg(long, default_value_t = 3)]
    pub site: usize,
    /// Blocking strength sweep lower bound, in units of λ (block).
    #[arg(long, default_value_t = 10.0)]
    pub g_min: f64,
    /// Blocking strength sweep upper bound, in units of λ (block).
    #[arg(long, default_value_t = 100.0)]
    pub g_max: f64,
    /// Fractional timing jitter per segment.
    #[arg(long, default_value_t = 0.0)]
    pub timing_jitter: f64,
    /// Fractional coupling disorder, frozen per network.
    #[arg(long, default_value_t = 0.0)]
    pub coupling_disorder: f64,
    /// RNG seed for the error model.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for <experiment>.csv and <experiment>_summary.json.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// A validated run configuration; the CLI arguments deserialize into this
/// directly, so a config can also be built in code or loaded from JSON.
pub type RunConfig = RunArgs;

impl RunArgs {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be >= 2, got {}", self.n)));
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidConfig(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if self.grid == 0 {
            return Err(Error::InvalidConfig("grid must be non-empty".into()));
        }
        if self.g_min <= 0.0 || self.g_max < self.g_min {
            return Err(Error::InvalidConfig(format!(
                "blocking sweep needs 0 < g_min <= g_max, got [{}, {}]",
                self.g_min, self.g_max
            )));
        }
        if self.total_time <= 0.0 || self.steps == 0 {
            return Err(Error::InvalidConfig("holonomy needs total_time > 0 and steps > 0".into()));
        }
        let em = self.error_model();
        em.validate()?;
        Ok(())
    }

    fn error_model(&self) -> ErrorModel {
        ErrorModel {
            timing_jitter_frac: self.timing_jitter,
            coupling_disorder_frac: self.coupling_disorder,
            field_offset: 0.0,
            seed: self.seed,
        }
    }

    /// The error model to thread through protocol runs, or `None` when all
    /// error channels are off (keeps the error-free path exactly RNG-free).
    fn errors(&self) -> Option<ErrorModel> {
        let em = self.error_model();
        (em.timing_jitter_frac != 0.0 || em.coupling_disorder_frac != 0.0).then_some(em)
    }
}

/// JSON summary: a schema tag, the experiment name, and experiment-specific
/// values, all recomputable from the emitted CSV rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub experiment: String,
    #[serde(flatten)]
    pub values: Map<String, Value>,
}

fn summary(experiment: Experiment, values: Value) -> Summary {
    let Value::Object(values) = values else { unreachable!("summaries are json objects") };
    Summary { schema: SUMMARY_SCHEMA.into(), experiment: experiment.name().into(), values }
}

fn record(theta_or_chi: f64, kappa: f64, arrival: f64, phase: f64, seed: u64) -> ExperimentRecord {
    ExperimentRecord {
        theta_or_chi,
        kappa,
        arrival_prob: arrival,
        phase,
        nu: None,
        chi0: None,
        seed,
    }
}

fn gate_values(gate: &LogicalUnitary, fidelity: f64) -> Value {
    let m = &gate.matrix;
    json!({
        "matrix": [
            [m[(0, 0)].re, m[(0, 0)].im], [m[(0, 1)].re, m[(0, 1)].im],
            [m[(1, 0)].re, m[(1, 0)].im], [m[(1, 1)].re, m[(1, 1)].im],
        ],
        "arrival": gate.arrival_probability,
        "fidelity_to_target": fidelity,
        "leakage": 1.0 - gate.arrival_probability,
    })
}

/// Install the rayon pool honouring `SPINWEAVE_THREADS`, once per process.
pub fn init_thread_pool() {
    if let Ok(v) = std::env::var("SPINWEAVE_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            // Ignore the error: the global pool may already exist (tests).
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
        }
    }
}

/// Run one experiment: writes `<out>/<experiment>.csv` and
/// `<out>/<experiment>_summary.json`, and returns the summary.
///
/// Numerical-failure conditions (bit-extraction ambiguity, non-adiabatic
/// holonomy) still write their outputs before returning the error, so the
/// partial results remain inspectable.
pub fn run(config: &RunConfig) -> Result<Summary> {
    config.validate()?;
    let errors = config.errors();
    let seed = config.seed;
    let (n, lambda) = (config.n, config.lambda);

    let mut failure: Option<Error> = None;
    let (rows, values) = match config.experiment {
        Experiment::Transfer => {
            let t0 = PI / lambda;
            let h = assemble(&build_pst_chain(n, lambda)?, 1)?;
            let out = propagate(&h, t0, &StateVector::basis_state(n, 1))?;
            let arrival = out.arrival_probability(&[n]);
            let phase = wrap_angle(out.amps[n - 1].arg());
            (
                vec![record(t0, 0.0, arrival, phase, seed)],
                json!({ "arrival": arrival, "time": t0, "phase": phase }),
            )
        }
        Experiment::Geoloop => {
            let m = config.grid;
            let omegas: Vec<f64> = (0..m).map(|k| PI * (k as f64 + 0.5) / m as f64).collect();
            let rows = omegas
                .par_iter()
                .enumerate()
                .map(|(k, &omega)| {
                    let kappa = kappa_for_omega(lambda, omega);
                    let out = geometric_loop(n, lambda, kappa, errors.as_ref(), k as u64)?;
                    Ok(record(omega, kappa, out.return_probability, out.phase, seed))
                })
                .collect::<Result<Vec<_>>>()?;
            let slope = phase_slope(n, lambda, &omegas)?;
            let mean_return =
                rows.iter().map(|r| r.arrival_prob).sum::<f64>() / rows.len() as f64;
            (rows, json!({ "slope": slope, "mean_return_probability": mean_return }))
        }
        Experiment::Bits => {
            let est = estimate_length_bits(n, lambda, config.max_bits, errors.as_ref())?;
            let rows = est
                .bit_probabilities
                .iter()
                .enumerate()
                .map(|(r, &p)| record(r as f64, 0.0, p, 0.0, seed))
                .collect();
            if est.low_confidence {
                failure = Some(Error::Numerical(
                    "bit extraction ambiguous: a round probability fell near 1/2".into(),
                ));
            }
            (
                rows,
                json!({
                    "estimated_N": est.n_est,
                    "low_confidence": est.low_confidence,
                    "bit_probabilities": est.bit_probabilities,
                }),
            )
        }
        Experiment::Fringe => {
            let m = config.grid;
            let chis: Vec<f64> = (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
            let (fit, rows) = fringe_scan(n, lambda, config.kappa, &chis, errors.as_ref())?;
            let omega = crate::protocols::solid_angle(lambda, config.kappa)?;
            (
                rows,
                json!({
                    "nu": fit.nu,
                    "chi0": fit.chi0,
                    "predicted_phase": predicted_phase(n, omega),
                }),
            )
        }
        Experiment::Freqscan => {
            let (est, rows) = frequency_scan(n, lambda, config.grid, errors.as_ref())?;
            (rows, json!({ "estimated_N": est.n_est, "j_est": est.j_est }))
        }
        Experiment::Offset => {
            let recovered = calibrate_offset(n, lambda, config.kappa, config.field_offset)?;
            let predicted =
                wrap_angle(2.0 * PI * config.field_offset / lambda.hypot(config.kappa));
            (
                vec![record(0.0, config.kappa, 1.0, recovered, seed)],
                json!({ "recovered_phase": recovered, "predicted_phase": predicted }),
            )
        }
        Experiment::GateHadamard => {
            let (gate, _) = hadamard_gate(lambda)?;
            let fidelity = gate.fidelity_to(&hadamard_matrix());
            (
                vec![record(0.0, 0.0, gate.arrival_probability, 0.0, seed)],
                gate_values(&gate, fidelity),
            )
        }
        Experiment::GateAb => {
            let (gate, _) = ab_phase_gate(n, lambda, config.phi)?;
            let fidelity = gate.fidelity_to(&phase_diag(config.phi));
            (
                vec![record(config.phi, 0.0, gate.arrival_probability, config.phi, seed)],
                gate_values(&gate, fidelity),
            )
        }
        Experiment::GateCnot => {
            let t_flip = PI;
            let (p_flip, _) = simulate_cnot(n, t_flip)?;
            let m = config.grid;
            let rows: Vec<ExperimentRecord> = (0..m)
                .map(|k| {
                    let t = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    record(t, 0.0, cnot_flip_probability_closed(n, t), 0.0, seed)
                })
                .collect();
            (
                rows,
                json!({
                    "p_flip": p_flip,
                    "flip_time": t_flip,
                    "rise_width": cnot_flip_width(n, 4000),
                }),
            )
        }
        Experiment::GateCphase => {
            let diag = exchange_cphase_gate(n, lambda)?;
            let invariant = crate::gates::cphase_invariant(&diag);
            let rows = diag
                .iter()
                .enumerate()
                .map(|(i, d)| record(i as f64, 0.0, d.norm_sqr(), wrap_angle(d.arg()), seed))
                .collect();
            (
                rows,
                json!({
                    "diag_phases": diag.iter().map(|d| wrap_angle(d.arg())).collect::<Vec<_>>(),
                    "invariant": [invariant.re, invariant.im],
                }),
            )
        }
        Experiment::Holonomy => {
            let p = holonomy_p(n, config.link);
            let (theta, phi) = match config.theta {
                Some(theta) => (theta, config.phi),
                None => holonomy_hadamard_params(p)?,
            };
            let run = adiabatic_holonomy(
                n,
                config.link,
                theta,
                phi,
                lambda,
                config.total_time / lambda,
                config.steps,
            )?;
            let params = HolonomyParams::new(n, config.link, theta, phi)?;
            let closed = holonomy_closed_form(&params);
            let gate = LogicalUnitary {
                matrix: run.matrix,
                arrival_probability: 1.0 - run.leakage,
            };
            let fidelity = gate.fidelity_to(&closed);
            if run.non_adiabatic {
                failure = Some(Error::Numerical(format!(
                    "holonomy leakage {:.3} exceeds the adiabatic threshold 0.1",
                    run.leakage
                )));
            }
            let mut values = gate_values(&gate, fidelity);
            let obj = values.as_object_mut().expect("gate_values is an object");
            obj.insert("theta".into(), json!(theta));
            obj.insert("phi".into(), json!(phi));
            obj.insert("p".into(), json!(p));
            obj.insert("non_adiabatic".into(), json!(run.non_adiabatic));
            (vec![record(theta, 0.0, 1.0 - run.leakage, phi, seed)], values)
        }
        Experiment::Block => {
            let m = config.grid;
            let gs: Vec<f64> = (0..m)
                .map(|k| {
                    let f = if m == 1 { 0.0 } else { k as f64 / (m - 1) as f64 };
                    lambda * config.g_min * (config.g_max / config.g_min).powf(f)
                })
                .collect();
            let rows = gs
                .par_iter()
                .map(|&g| {
                    let f = blocking_fidelity(n, lambda, config.site, g, 400)?;
                    Ok(record(g, 0.0, f, 0.0, seed))
                })
                .collect::<Result<Vec<ExperimentRecord>>>()?;
            let slope = log_log_slope(
                &rows.iter().map(|r| r.theta_or_chi).collect::<Vec<_>>(),
                &rows.iter().map(|r| 1.0 - r.arrival_prob).collect::<Vec<_>>(),
            )?;
            (rows, json!({ "slope": slope }))
        }
    };

    let out = summary(config.experiment, values);
    write_outputs(&config.out, config.experiment.name(), &rows, &out)?;
    match failure {
        Some(err) => Err(err),
        None => Ok(out),
    }
}

/// Least-squares slope of ln y vs ln x; errors if any point is non-positive.
fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            if x <= 0.0 || y <= 0.0 {
                Err(Error::Numerical(format!("log-log fit needs positive data, got ({x}, {y})")))
            } else {
                Ok((x.ln(), y.ln()))
            }
        })
        .collect::<Result<_>>()?;
    let m = pts.len() as f64;
    if pts.len() < 2 {
        return Err(Error::Numerical("log-log fit needs at least 2 points".into()));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

fn write_outputs(
    dir: &Path,
    name: &str,
    rows: &[ExperimentRecord],
    summary: &Summary,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut writer = csv::Writer::from_path(dir.join(format!("{name}.csv")))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    let json = serde_json::to_string_pretty(summary)?;
    fs::write(dir.join(format!("{name}_summary.json")), json + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builder {
    /// Perfect state transfer chain.
    Pst,
    /// Three-chain Y junction.
    YJunction,
    /// Uniform-flux ring.
    FluxRing,
    /// 4-site Hadamard unit.
    HadamardUnit,
    /// 12-site arbitrary single-qubit rotation network.
    SingleQubit,
    /// Two perfect chains linked at position R.
    LinkedChains,
}

#[derive(Debug, Args)]
pub struct EmitArgs {
    /// Which builder to run.
    #[arg(value_enum)]
    pub builder: Builder,
    /// Chain length per rail / arm.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Coupling strength λ (or unit scale for the Hadamard unit).
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Flux φ (flux ring) or crossing phase φ (linked chains).
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    /// Linked-chain mixing angle θ.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Link position R (linked chains).
    #[arg(long, default_value_t = 2)]
    pub link: usize,
    /// Segment phases β, γ, δ for the single-qubit network.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Output path for the network JSON.
    #[arg(long, default_value = "network.json")]
    pub out: PathBuf,
}

/// Build the requested network, verify it round-trips through the JSON
/// loader, and write it to the output path.
pub fn emit_network(args: &EmitArgs) -> Result<NetworkSpec> {
    let spec = match args.builder {
        Builder::Pst => build_pst_chain(args.n, args.lambda)?,
        Builder::YJunction => build_y_junction(args.n, args.lambda)?,
        Builder::FluxRing => build_flux_ring(args.n, args.lambda, args.phi)?,
        Builder::HadamardUnit => build_hadamard_unit(args.lambda)?,
        Builder::SingleQubit => {
            build_single_qubit_network(args.beta, args.gamma, args.delta, args.lambda)?
        }
        Builder::LinkedChains => {
            build_linked_chains(args.n, args.link, args.theta, args.phi, args.lambda)?
        }
    };
    let json = spec.to_json()?;
    let back = NetworkSpec::from_json(&json)?;
    back.validate()?;
    fs::write(&args.out, json + "\n")?;
    Ok(spec)
}

/// Load and validate a network JSON file.
pub fn check_network(file: &Path) -> Result<NetworkSpec> {
    let json = fs::read_to_string(file)?;
    let spec = NetworkSpec::from_json(&json)?;
    spec.validate()?;
    Ok(spec)
}

/// Map an error to the documented process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numerical(_) | Error::NoRoot(_) | Error::VanishingVacuum => 3,
        _ => 2,
    }
}

/// Top-level dispatch used by the binary; returns the exit code.
pub fn dispatch(cli: &Cli) -> Result<()> {
    init_thread_pool();
    match &cli.command {
        Command::Run(args) => {
            let summary = run(args)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::EmitNetwork(args) => {
            let spec = emit_network(args)?;
            eprintln!("wrote {} ({} sites)", args.out.display(), spec.n_sites);
        }
        Command::CheckNetwork { file } => {
            let spec = check_network(file)?;
            eprintln!("ok: {} sites, {} edges", spec.n_sites, spec.edges.len());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn base_config(experiment: Experiment) -> RunConfig {
        RunArgs {
            experiment,
            n: 6,
            lambda: 1.0,
            kappa: 1.0,
            grid: 32,
            max_bits: 4,
            phi: PI / 3.0,
            theta: None,
            link: 2,
            total_time: 40.0,
            steps: 400,
            field_offset: 0.1,
            site: 3,
            g_min: 10.0,
            g_max: 100.0,
            timing_jitter: 0.0,
            coupling_disorder: 0.0,
            seed: 0,
            out: PathBuf::from("out"),
        }
    }

    #[test]
    fn transfer_summary_values() {
        let dir = tempdir().unwrap();
        let mut config = base_config(Experiment::Transfer);
        config.out = dir.path().to_path_buf();
        let summary = run(&config).unwrap();
        assert_eq!(summary.schema, SUMMARY_SCHEMA);
        assert_eq!(summary.experiment, "transfer");
        let arrival = summary.values["arrival"].as_f64().unwrap();
        assert!(arrival > 1.0 - 1e-10);
        assert!((summary.values["time"].as_f64().unwrap() - PI).abs() < 1e-12);
        assert!(dir.path().join("transfer.csv").exists());
        assert!(dir.path().join("transfer_summary.json").exists());
    }

    #[test]
    fn freqscan_recovers_n() {
        let dir = tempdir().unwrap();
        let mut config = base_config(Experiment::Freqscan);
        config.n = 8;
        config.grid = 64;
        config.out = dir.path().to_path_buf();
        let summary = run(&config).unwrap();
        assert_eq!(summary.values["estimated_N"].as_u64(), Some(8));
        let csv = fs::read_to_string(dir.path().join("freqscan.csv")).unwrap();
        assert_eq!(csv.lines().count(), 65); // header + grid rows
    }

    #[test]
    fn identical_seeds_identical_outputs() {
        let (da, db) = (tempdir().unwrap(), tempdir().unwrap());
        let mut config = base_config(Experiment::Geoloop);
        config.coupling_disorder = 0.3;
        config.timing_jitter = 0.2;
        config.seed = 42;
        config.grid = 16;
        config.out = da.path().to_path_buf();
        run(&config).unwrap();
        config.out = db.path().to_path_buf();
        run(&config).unwrap();
        let a = fs::read(da.path().join("geoloop.csv")).unwrap();
        let b = fs::read(db.path().join("geoloop.csv")).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut config = base_config(Experiment::Transfer);
        config.n = 1;
        assert!(matches!(run(&config), Err(Error::InvalidConfig(_))));
        let mut config = base_config(Experiment::Block);
        config.g_min = -1.0;
        assert!(matches!(run(&config), Err(Error::InvalidConfig(_))));
        let mut config = base_config(Experiment::Geoloop);
        config.coupling_disorder = 2.0;
        assert!(matches!(run(&config), Err(Error::InvalidErrorModel(_))));
    }

    #[test]
    fn exit_codes_partition_errors() {
        assert_eq!(exit_code(&Error::InvalidConfig("x".into())), 2);
        assert_eq!(exit_code(&Error::Json(serde_json::from_str::<Value>("{").unwrap_err())), 2);
        assert_eq!(exit_code(&Error::Numerical("x".into())), 3);
        assert_eq!(exit_code(&Error::NoRoot(0.5)), 3);
    }

    #[test]
    fn emit_and_check_round_trip() {
        let dir = tempdir().unwrap();
        let out = dir.path().join("net.json");
        let args = EmitArgs {
            builder: Builder::SingleQubit,
            n: 6,
            lambda: 1.0,
            phi: 0.0,
            theta: 0.0,
            link: 2,
            beta: 1.0,
            gamma: 2.0,
            delta: 3.0,
            out: out.clone(),
        };
        let spec = emit_network(&args).unwrap();
        let loaded = check_network(&out).unwrap();
        assert_eq!(spec.n_sites, loaded.n_sites);
        assert_eq!(spec.edges.len(), loaded.edges.len());
    }

    #[test]
    fn check_network_rejects_malformed() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, "{ not json").unwrap();
        let err = check_network(&path).unwrap_err();
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn block_summary_slope_near_minus_two() {
        let dir = tempdir().unwrap();
        let mut config = base_config(Experiment::Block);
        config.grid = 8;
        config.out = dir.path().to_path_buf();
        let summary = run(&config).unwrap();
        let slope = summary.values["slope"].as_f64().unwrap();
        assert!((slope + 2.0).abs() < 0.2, "slope {slope}");
    }
}
