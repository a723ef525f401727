//! `hyshadow`: command-line driver for hybrid-circuit classical shadows.
//!
//! Every table starts with `#` lines that carry the full run configuration,
//! so a file can be regenerated from its own header.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hyshadow::appendix::{statmech_curve, tfim_ground_state, toy_monte_carlo, BlockToySpec, TFIM_TILT};
use hyshadow::dense::{check_record_identities, verify_measurement_channel};
use hyshadow::estimation::{ghz_demo, median_of_means, mean_report, single_shot_values, ObservableSpec, WeightProvider, DEFAULT_BATCHES};
use hyshadow::scaling::{parse_grid, steady_mps, sweep_and_minimize, DepthParams};
use hyshadow::shadow_io::{read_shadows, record_to_line};
use hyshadow::weights_exact::evolve_exact_steady;
use hyshadow::{evolve_exact, evolve_mps, Error, InitialStateSpec, MpsParams, PauliString, ShadowSampler, WeightSchedule};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Largest register handled by the dense weight engine.
const MAX_EXACT: usize = 20;

mod exit {
    pub const RUNTIME: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const INCOMPLETE: u8 = 3;
    pub const CONTRADICTION: u8 = 4;
    pub const VERIFY_FAILED: u8 = 5;
}

#[derive(Parser)]
#[command(name = "hyshadow", version, about = "Classical shadows from hybrid random Clifford circuits")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true, env = "HYSHADOW_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
enum Command {
    /// Sample shadow records (one JSON object per line).
    Sample(SampleArgs),
    /// Estimate observables from a record file.
    Estimate(EstimateArgs),
    /// Markov Pauli weights of consecutive strings.
    Weights(WeightsArgs),
    /// β(p) sweep with fitted β and Δ.
    Scaling(ScalingArgs),
    /// Block toy models: closed forms and Monte-Carlo checks.
    Toy(ToyArgs),
    /// Pauli weights from the transverse-field Ising ground state.
    Statmech(StatmechArgs),
    /// GHZ benchmark table of ⟨Z^k⟩.
    DemoGhz(DemoGhzArgs),
    /// Dense-oracle cross-checks for up to four qubits.
    Verify(VerifyArgs),
}

#[derive(Args, Serialize)]
struct Output {
    /// Output file (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// First shot index (shots are indexed, so files can be extended).
    #[arg(long, default_value_t = 0)]
    first_shot: u64,
    /// ghz, zero, plus, mixed or stabilizers:+XX,+ZZ
    #[arg(long, default_value = "zero")]
    init: String,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Engine {
    Auto,
    Exact,
    Mps,
}

#[derive(Args, Serialize)]
struct MpsArgs {
    /// Bond-dimension cap of the MPS engine.
    #[arg(long = "chi", default_value_t = MpsParams::default().chi_max)]
    chi_max: usize,
    /// Relative discarded-weight tolerance of the MPS engine.
    #[arg(long, default_value_t = MpsParams::default().trunc_tol)]
    trunc_tol: f64,
}

impl MpsArgs {
    fn params(&self) -> MpsParams {
        MpsParams { chi_max: self.chi_max, trunc_tol: self.trunc_tol }
    }
}

#[derive(Args, Serialize)]
struct EstimateArgs {
    /// Record file written by `sample`.
    #[arg(long)]
    input: PathBuf,
    /// Observable: a Pauli string or `c*P,c*P,...`. Repeatable.
    #[arg(long = "obs", required = true)]
    observables: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_BATCHES)]
    batches: usize,
    #[arg(long, value_enum, default_value_t = Engine::Auto)]
    engine: Engine,
    #[command(flatten)]
    #[serde(flatten)]
    mps: MpsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Serialize)]
struct WeightsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Unitary layers of the circuit; omit for the steady state.
    #[arg(long)]
    layers: Option<usize>,
    /// Longest string reported (default: n).
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, value_enum, default_value_t = Engine::Auto)]
    engine: Engine,
    #[command(flatten)]
    #[serde(flatten)]
    mps: MpsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    depth: DepthArgs,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Serialize)]
struct DepthArgs {
    /// Steady-state tolerance on ln w per double period.
    #[arg(long, default_value_t = DepthParams::default().tol)]
    tol: f64,
    /// Steady-state depth cap in unitary layers (default: 4n).
    #[arg(long)]
    max_depth: Option<usize>,
}

impl DepthArgs {
    fn params(&self) -> DepthParams {
        DepthParams { tol: self.tol, max_depth: self.max_depth }
    }
}

#[derive(Args, Serialize)]
struct ScalingArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "0.05:0.95:0.05")]
    p_grid: String,
    #[arg(long, default_value_t = 8)]
    kmin: usize,
    #[arg(long, default_value_t = 48)]
    kmax: usize,
    #[command(flatten)]
    #[serde(flatten)]
    mps: MpsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    depth: DepthArgs,
    /// Also write every ln‖P‖² curve to this file.
    #[arg(long)]
    curves: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Phase {
    Area,
    Volume,
}

#[derive(Args, Serialize)]
struct ToyArgs {
    #[arg(long, value_enum)]
    phase: Phase,
    /// Qubits per block.
    #[arg(long)]
    block: usize,
    /// Largest number of covered blocks.
    #[arg(long, default_value_t = 3)]
    m_max: usize,
    /// Total qubits (volume phase only).
    #[arg(long)]
    total: Option<usize>,
    /// Monte-Carlo shots per row; 0 skips the simulation.
    #[arg(long, default_value_t = 0)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Serialize)]
struct StatmechArgs {
    #[arg(long)]
    n: usize,
    /// Transverse field in units of the coupling.
    #[arg(long)]
    h: f64,
    #[arg(long)]
    kmax: Option<usize>,
    /// Longitudinal field that selects one symmetry-broken branch.
    #[arg(long, default_value_t = TFIM_TILT)]
    tilt: f64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Serialize)]
struct DemoGhzArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    /// One rate or a grid (`0.1,0.3` or `start:stop:step`).
    #[arg(long, default_value = "0.1,0.3,0.5,0.7,0.9")]
    p: String,
    /// String lengths, comma separated.
    #[arg(long, default_value = "1,2,4,6")]
    ks: String,
    #[arg(long, default_value_t = 50_000)]
    shots: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BATCHES)]
    batches: usize,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// Records per register size for the exact identities.
    #[arg(long, default_value_t = 200)]
    records: usize,
    /// Prior shots per register size for the channel check.
    #[arg(long, default_value_t = 20_000)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

impl Command {
    fn output(&self) -> &Output {
        match self {
            Command::Sample(a) => &a.output,
            Command::Estimate(a) => &a.output,
            Command::Weights(a) => &a.output,
            Command::Scaling(a) => &a.output,
            Command::Toy(a) => &a.output,
            Command::Statmech(a) => &a.output,
            Command::DemoGhz(a) => &a.output,
            Command::Verify(a) => &a.output,
        }
    }
}

/// Config problems found before any work starts.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn check_rate(p: f64) -> anyhow::Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(config(format!("measurement rate {p} outside [0, 1]")));
    }
    Ok(())
}

fn validate(cmd: &Command) -> anyhow::Result<()> {
    match cmd {
        Command::Sample(a) => {
            check_rate(a.p)?;
            if a.n < 2 {
                return Err(config("--n must be at least 2"));
            }
            a.init.parse::<InitialStateSpec>().map_err(|e| config(e.to_string()))?;
        }
        Command::Estimate(a) => {
            if a.batches == 0 {
                return Err(config("--batches must be positive"));
            }
            a.mps.params().validate().map_err(|e| config(e.to_string()))?;
        }
        Command::Weights(a) => {
            check_rate(a.p)?;
            if a.n < 2 || a.kmax.is_some_and(|k| k == 0 || k > a.n) {
                return Err(config("need n ≥ 2 and 1 ≤ kmax ≤ n"));
            }
            a.mps.params().validate().map_err(|e| config(e.to_string()))?;
        }
        Command::Scaling(a) => {
            parse_grid(&a.p_grid).map_err(|e| config(e.to_string()))?;
            if a.kmin < 1 || a.kmin >= a.kmax || a.kmax > a.n {
                return Err(config("need 1 ≤ kmin < kmax ≤ n"));
            }
            a.mps.params().validate().map_err(|e| config(e.to_string()))?;
        }
        Command::Toy(a) => {
            if a.block == 0 || a.m_max == 0 {
                return Err(config("--block and --m-max must be positive"));
            }
            if matches!(a.phase, Phase::Volume) && a.total.is_none() {
                return Err(config("--total is required for the volume phase"));
            }
        }
        Command::Statmech(a) => {
            if a.kmax.is_some_and(|k| k == 0 || k > a.n) {
                return Err(config("need 1 ≤ kmax ≤ n"));
            }
        }
        Command::DemoGhz(a) => {
            for p in parse_grid(&a.p).map_err(|e| config(e.to_string()))? {
                check_rate(p)?;
            }
            parse_list(&a.ks)?;
            if a.batches == 0 {
                return Err(config("--batches must be positive"));
            }
        }
        Command::Verify(a) => {
            if a.records == 0 || a.shots < 2 {
                return Err(config("need at least one record and two shots"));
            }
        }
    }
    Ok(())
}

fn parse_list(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',').map(|t| t.trim().parse().map_err(|_| config(format!("bad integer list {s:?}")))).collect()
}

/// `ZZI` or `0.5*ZZI,-1*XXI`.
fn parse_observable(s: &str) -> anyhow::Result<ObservableSpec> {
    let terms = s
        .split(',')
        .map(|t| {
            let (c, p) = match t.split_once('*') {
                Some((c, p)) => (c.trim().parse::<f64>().map_err(|_| config(format!("bad coefficient in {t:?}")))?, p),
                None => (1.0, t),
            };
            let p: PauliString = p.trim().parse().map_err(|e: Error| config(e.to_string()))?;
            Ok((c, p))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    ObservableSpec::new(terms).map_err(|e| config(e.to_string()))
}

fn header(out: &mut dyn Write, cmd: &Command) -> anyhow::Result<()> {
    writeln!(out, "# hyshadow {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# config {}", serde_json::to_string(cmd)?)?;
    Ok(())
}

fn weights_for(n: usize, schedule: &WeightSchedule, engine: Engine, params: MpsParams) -> anyhow::Result<Box<dyn WeightProvider>> {
    let exact = match engine {
        Engine::Auto => n <= MAX_EXACT,
        Engine::Exact => true,
        Engine::Mps => false,
    };
    Ok(if exact { Box::new(evolve_exact(n, schedule)?) } else { Box::new(evolve_mps(n, schedule, params)?) })
}

fn run_sample(a: &SampleArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let sampler = ShadowSampler::new(a.n, a.layers, a.p, a.init.parse()?)?;
    const CHUNK: u64 = 4096;
    let mut first = a.first_shot;
    let end = a.first_shot + a.shots;
    while first < end {
        let count = CHUNK.min(end - first);
        for r in sampler.shots(a.seed, first, count)? {
            writeln!(out, "{}", record_to_line(&r)?)?;
        }
        first += count;
    }
    Ok(())
}

fn run_estimate(a: &EstimateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let records = read_shadows(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let Some(first) = records.first() else { bail!(config("record file is empty")) };
    let layers = |r: &hyshadow::ShadowRecord| r.layers.iter().filter(|l| !l.is_measurement()).count();
    let (n, p, n_layers) = (first.n_qubits, first.p, layers(first));
    if let Some(r) = records.iter().find(|r| r.n_qubits != n || r.p != p || layers(r) != n_layers) {
        bail!(config(format!("record {} has a different circuit shape than the first record", r.shot_index)));
    }
    let observables = a.observables.iter().map(|s| parse_observable(s)).collect::<anyhow::Result<Vec<_>>>()?;
    if let Some(o) = observables.iter().find(|o| o.n_qubits() != n) {
        bail!(config(format!("observable {} does not act on {n} qubits", o.label())));
    }
    let weights = weights_for(n, &WeightSchedule::for_circuit(n_layers, p)?, a.engine, a.mps.params())?;
    let values = single_shot_values(&records, &observables, weights.as_ref())?;
    writeln!(out, "# records={} n_qubits={n} layers={n_layers} p={p}", records.len())?;
    writeln!(out, "observable,value,std_error,n_samples,n_batches,method")?;
    for (o, v) in observables.iter().zip(&values) {
        let r = if a.batches == 1 { mean_report(v)? } else { median_of_means(v, a.batches)? };
        let method = serde_json::to_value(r.method)?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            o.label(),
            r.value,
            r.std_error,
            r.n_samples,
            r.n_batches,
            method.as_str().unwrap_or_default()
        )?;
    }
    Ok(())
}

fn run_weights(a: &WeightsArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let n = a.n;
    let kmax = a.kmax.unwrap_or(n);
    let exact = match a.engine {
        Engine::Auto => n <= MAX_EXACT,
        Engine::Exact => true,
        Engine::Mps => false,
    };
    let depth = a.depth.params();
    let query: Box<dyn Fn(usize, usize) -> hyshadow::Result<f64>> = match (a.layers, exact) {
        (Some(l), true) => {
            let v = evolve_exact(n, &WeightSchedule::for_circuit(l, a.p)?)?;
            writeln!(out, "# engine=exact depth={l}")?;
            Box::new(move |s, k| v.consecutive_weight(s, k))
        }
        (Some(l), false) => {
            let m = evolve_mps(n, &WeightSchedule::for_circuit(l, a.p)?, a.mps.params())?;
            writeln!(out, "# engine=mps depth={l} max_bond={} discarded_max={:e}", m.max_bond_dim(), m.discarded_max())?;
            Box::new(move |s, k| m.query_consecutive_weight(s, k))
        }
        (None, true) => {
            let st = evolve_exact_steady(n, a.p, depth.tol, depth.max_depth.unwrap_or(4 * n))?;
            writeln!(out, "# engine=exact steady depth={} converged={}", st.depth, st.converged)?;
            let v = st.weights;
            Box::new(move |s, k| v.consecutive_weight(s, k))
        }
        (None, false) => {
            let (m, d, conv) = steady_mps(n, a.p, kmax, a.mps.params(), depth)?;
            writeln!(out, "# engine=mps steady depth={d} converged={conv} max_bond={}", m.max_bond_dim())?;
            Box::new(move |s, k| m.query_consecutive_weight(s, k))
        }
    };
    writeln!(out, "k,start,weight")?;
    for k in 1..=kmax {
        for s in 0..=n - k {
            writeln!(out, "{k},{s},{:e}", query(s, k)?)?;
        }
    }
    Ok(())
}

fn run_scaling(a: &ScalingArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let grid = parse_grid(&a.p_grid)?;
    let rep = sweep_and_minimize(&grid, a.n, (a.kmin, a.kmax), a.mps.params(), a.depth.params())?;
    writeln!(out, "p,beta,beta_std,delta,delta_std,rms,depth,converged,discarded_max")?;
    for r in &rep.rows {
        writeln!(
            out,
            "{},{},{},{},{},{:e},{},{},{:e}",
            r.p,
            r.fit.beta,
            r.fit.beta_std(),
            r.fit.delta,
            r.fit.delta_std(),
            r.fit.rms,
            r.curve.depth,
            r.curve.converged,
            r.curve.discarded_max
        )?;
    }
    writeln!(out, "# p_star={} beta_min={} delta={} delta_std={}", rep.p_star, rep.beta_min, rep.fit_at_min.delta, rep.fit_at_min.delta_std())?;
    for w in &rep.warnings {
        writeln!(out, "# warning: {w}")?;
    }
    if let Some(path) = &a.curves {
        let mut f = BufWriter::new(File::create(path)?);
        writeln!(f, "# curves for the sweep below")?;
        writeln!(f, "# config {}", serde_json::to_string(a)?)?;
        writeln!(f, "p,k,ln_norm_sq")?;
        for r in &rep.rows {
            for (k, v) in &r.curve.points {
                writeln!(f, "{},{k},{v}", r.p)?;
            }
        }
        f.flush()?;
    }
    Ok(())
}

fn run_toy(a: &ToyArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let (model, params) = match a.phase {
        Phase::Area => ("toy-area", format!("n={}", a.block)),
        Phase::Volume => ("toy-volume", format!("n={};N={}", a.block, a.total.unwrap_or_default())),
    };
    writeln!(out, "model,params,k_or_m,analytic,monte_carlo,std_error,beta")?;
    for m in 1..=a.m_max {
        let spec = match a.phase {
            Phase::Area => BlockToySpec::area(a.block, m),
            Phase::Volume => BlockToySpec::volume(a.block, m, a.total.unwrap_or_default()),
        };
        let v = spec.closed_form()?;
        let (mc, se) = if a.shots > 0 {
            let (mc, se) = toy_monte_carlo(&spec, a.shots, a.seed.wrapping_add(m as u64))?;
            (mc.to_string(), se.to_string())
        } else {
            (String::new(), String::new())
        };
        writeln!(out, "{model},{params},{m},{:e},{mc},{se},{}", v.weight, v.beta)?;
    }
    Ok(())
}

fn run_statmech(a: &StatmechArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let psi = tfim_ground_state(a.n, a.h, a.tilt)?;
    let params = format!("n={};h/J={};tilt={}", a.n, a.h, a.tilt);
    writeln!(out, "model,params,k_or_m,analytic,monte_carlo,std_error")?;
    for (k, w) in statmech_curve(&psi, a.kmax.unwrap_or(a.n))? {
        writeln!(out, "tfim,{params},{k},{w:e},,")?;
    }
    Ok(())
}

fn run_demo_ghz(a: &DemoGhzArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let ks = parse_list(&a.ks)?;
    writeln!(out, "p,k,weight,expected,value,std_error,n_samples")?;
    for p in parse_grid(&a.p)? {
        for r in ghz_demo(a.n, a.layers, p, &ks, a.shots, a.seed, a.batches)? {
            writeln!(
                out,
                "{},{},{:e},{},{},{},{}",
                r.p, r.k, r.weight, r.expected, r.estimate.value, r.estimate.std_error, r.estimate.n_samples
            )?;
        }
    }
    Ok(())
}

/// Returns whether every check passed.
fn run_verify(a: &VerifyArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    const TOL: f64 = 1e-12;
    let normal = Normal::standard();
    // The two-sided 4σ false-alarm rate of one entry, shared over every
    // entry tested.
    let alpha = 2.0 * normal.sf(4.0);
    let mut ok = true;
    writeln!(out, "check,n_qubits,value,threshold,pass")?;
    for n in 1..=4 {
        let r = check_record_identities(n, 2, 0.5, a.records, a.seed.wrapping_add(n as u64))?;
        for (name, v) in [("snapshot", r.snapshot), ("bayes", r.bayes), ("prior", r.prior), ("completeness", r.completeness)] {
            let pass = v < TOL;
            ok &= pass;
            writeln!(out, "{name},{n},{v:e},{TOL:e},{pass}")?;
        }
    }
    for n in 2..=4 {
        let r = verify_measurement_channel(n, 2, 0.5, a.shots, a.seed.wrapping_add(100 + n as u64))?;
        let z_star = normal.inverse_cdf(1.0 - alpha / (2.0 * r.offdiag_tested.max(1) as f64));
        let pass = r.rigid_offdiag == 0 && r.max_offdiag_z <= z_star;
        ok &= pass;
        writeln!(out, "offdiagonal_z,{n},{},{z_star},{pass}", r.max_offdiag_z)?;
        writeln!(out, "# n={n}: rigid off-diagonal entries {}, Markov diagonal deviation {:e} (reported only)", r.rigid_offdiag, r.max_diag_dev)?;
    }
    Ok(ok)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    validate(&cli.command)?;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let mut out: Box<dyn Write> = match &cli.command.output().out {
        Some(path) => Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    header(out.as_mut(), &cli.command)?;
    let ok = match &cli.command {
        Command::Sample(a) => run_sample(a, out.as_mut()).map(|_| true),
        Command::Estimate(a) => run_estimate(a, out.as_mut()).map(|_| true),
        Command::Weights(a) => run_weights(a, out.as_mut()).map(|_| true),
        Command::Scaling(a) => run_scaling(a, out.as_mut()).map(|_| true),
        Command::Toy(a) => run_toy(a, out.as_mut()).map(|_| true),
        Command::Statmech(a) => run_statmech(a, out.as_mut()).map(|_| true),
        Command::DemoGhz(a) => run_demo_ghz(a, out.as_mut()).map(|_| true),
        Command::Verify(a) => run_verify(a, out.as_mut()),
    }?;
    out.flush()?;
    Ok(ok)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return exit::CONFIG;
    }
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Incomplete { .. }) => exit::INCOMPLETE,
        Some(Error::Contradiction { .. }) => exit::CONTRADICTION,
        Some(
            Error::InvalidParameter(_)
            | Error::LengthMismatch { .. }
            | Error::InvalidQubit { .. }
            | Error::InvalidBond(..)
            | Error::TooLarge { .. }
            | Error::Parse { .. },
        ) => exit::CONFIG,
        _ => exit::RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("hyshadow: verification failed");
            ExitCode::from(exit::VERIFY_FAILED)
        }
        Err(e) => {
            eprintln!("hyshadow: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
