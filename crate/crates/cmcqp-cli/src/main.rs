//! Command-line interface for the constant-modulus quadratic program
//! solvers and their applications.
//!
//! Subcommands: `solve` (one instance from an ensemble or a matrix file),
//! `bench` (multi-trial comparisons), `wf` (multi-waveform design), and
//! `detect` (detection-SNR code optimization). Exits 0 on success, 2 on bad
//! arguments, 3 on numeric failure (singular covariance, invalid matrix
//! file, failed validation).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cmcqp::wisl::{solve_wisl, wisl_objective, WaveformSet};
use cmcqp::{
    detection, io, solve_case1, solve_case2, CaseTag, Direction, IterationTrace, PhaseVector,
    ProblemInstance, SolverConfig,
};
use cmcqp_cli::{
    ensemble::{Ensemble, EnsembleKind},
    summary::{format_table, write_summary_csv, TrialSummary},
    tracefile::save_trace_csv,
    trials::{run_trials, SolverKind},
};

#[derive(Parser)]
#[command(
    name = "cmcqp",
    version,
    about = "Constant-modulus quadratic program solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance from a random ensemble or a matrix file.
    Solve(SolveArgs),
    /// Run multi-trial benchmarks over random ensembles.
    Bench(BenchArgs),
    /// Design a set of unimodular waveforms by weighted ISL minimization.
    Wf(WfArgs),
    /// Optimize detection SNR codes against an exponentially correlated
    /// disturbance.
    Detect(DetectArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Matrix case: a1 (arbitrary) or a2 (Hermitian PSD).
    #[arg(long, value_parser = parse_case)]
    case: CaseTag,
    /// Optimization direction: min or max.
    #[arg(long, value_parser = parse_dir)]
    dir: Direction,
    /// Problem size for a random ensemble instance (ignored with --matrix).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Enable SQUAREM acceleration.
    #[arg(long)]
    accelerate: bool,
    /// Load the matrix from a complex-matrix text file instead.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Print the per-iteration matrix-vector product count.
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Ensemble: a1-gaussian or a2-wishart.
    #[arg(long, value_parser = parse_ensemble, default_value = "a2-wishart")]
    ensemble: EnsembleKind,
    /// Comma-separated problem sizes.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Comma-separated solvers: cmcqp, pml, bls, els, fixed:<rho>.
    #[arg(long, value_delimiter = ',', default_value = "cmcqp")]
    solvers: Vec<String>,
    #[arg(long, value_parser = parse_dir, default_value = "min")]
    dir: Direction,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long)]
    accelerate: bool,
    /// Report dB values normalized by the objective at initialization.
    #[arg(long)]
    normalize: bool,
    /// Directory for summary.csv, summary.txt, and (optionally) traces.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also persist every per-trial trace CSV under --out-dir.
    #[arg(long)]
    save_traces: bool,
}

#[derive(Args)]
struct WfArgs {
    /// Number of waveforms M.
    #[arg(long)]
    waveforms: usize,
    /// Code length P.
    #[arg(long)]
    length: usize,
    /// Weighted lags: gamma_p = 1 for 0 < |p| <= lags.
    #[arg(long)]
    lags: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long)]
    accelerate: bool,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Export the designed waveform matrix in the complex-matrix format.
    #[arg(long)]
    waveform_out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Code length N.
    #[arg(long)]
    n: usize,
    /// Normalized Doppler frequency of the target.
    #[arg(long)]
    doppler: f64,
    /// One-lag correlation coefficient of the disturbance.
    #[arg(long)]
    corr: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Independent restarts; the best final SNR is reported.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

fn parse_case(s: &str) -> Result<CaseTag, String> {
    match s {
        "a1" => Ok(CaseTag::A1),
        "a2" => Ok(CaseTag::A2),
        _ => Err("expected a1 or a2".into()),
    }
}

fn parse_dir(s: &str) -> Result<Direction, String> {
    match s {
        "min" => Ok(Direction::Min),
        "max" => Ok(Direction::Max),
        _ => Err("expected min or max".into()),
    }
}

fn parse_ensemble(s: &str) -> Result<EnsembleKind, String> {
    EnsembleKind::parse(s).ok_or_else(|| "expected a1-gaussian or a2-wishart".into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Wf(a) => cmd_wf(a),
        Command::Detect(a) => cmd_detect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn write_trace_if_requested(path: &Option<PathBuf>, trace: &IterationTrace) -> anyhow::Result<()> {
    if let Some(p) = path {
        save_trace_csv(p, trace)?;
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> anyhow::Result<()> {
    let cfg = SolverConfig {
        direction: a.dir,
        tol: a.tol,
        max_iters: a.max_iters,
        accelerate: a.accelerate,
        seed: a.seed,
        jitter: 1e-8,
    };
    let inst = match (&a.matrix, a.n) {
        (Some(path), _) => ProblemInstance::new(io::load_complex_matrix(path)?, a.case, a.dir)?,
        (None, Some(n)) => {
            let kind = match a.case {
                CaseTag::A1 => EnsembleKind::CaseA1Gaussian,
                CaseTag::A2 => EnsembleKind::CaseA2Wishart,
            };
            cmcqp_cli::gen_instance(
                &Ensemble {
                    kind,
                    n,
                    seed: a.seed,
                },
                a.dir,
            )?
        }
        (None, None) => anyhow::bail!("either --matrix or --n is required"),
    };
    let theta0 = PhaseVector::random(inst.dim(), a.seed);
    inst.reset_matvec_count();
    let (_, _, trace) = match a.case {
        CaseTag::A1 => solve_case1(&inst, &theta0, &cfg)?,
        CaseTag::A2 => solve_case2(&inst, &theta0, &cfg)?,
    };
    println!("case {:?}", a.case);
    println!("n {}", inst.dim());
    println!("status {:?}", trace.status);
    println!("iterations {}", trace.iterations());
    let obj = trace.final_objective();
    println!("objective {obj}");
    println!("objective_db {}", 10.0 * obj.max(f64::MIN_POSITIVE).log10());
    if a.audit && trace.iterations() > 0 {
        let per_iter = inst.matvec_count() as f64 / trace.iterations() as f64;
        println!("matvecs_per_iter {per_iter:.3}");
    }
    eprintln!("elapsed_s {}", trace.elapsed_ns() as f64 / 1e9);
    write_trace_if_requested(&a.trace_out, &trace)?;
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> anyhow::Result<()> {
    let solvers: Vec<SolverKind> = a
        .solvers
        .iter()
        .map(|s| SolverKind::parse(s).ok_or_else(|| anyhow::anyhow!("unknown solver `{s}`")))
        .collect::<anyhow::Result<_>>()?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let cfg = SolverConfig {
        direction: a.dir,
        tol: a.tol,
        max_iters: a.max_iters,
        accelerate: a.accelerate,
        seed: a.seed,
        jitter: 1e-8,
    };
    let mut summaries: Vec<TrialSummary> = Vec::new();
    for &n in &a.n_list {
        for &solver in &solvers {
            let e = Ensemble {
                kind: a.ensemble,
                n,
                seed: a.seed,
            };
            let (summary, traces) = run_trials(&e, &cfg, solver, a.trials, a.normalize)?;
            if a.save_traces {
                if let Some(dir) = &a.out_dir {
                    for (t, trace) in traces.iter().enumerate() {
                        let name = format!("trace_{}_n{}_t{}.csv", summary.solver, n, t);
                        save_trace_csv(dir.join(name), trace)?;
                    }
                }
            }
            summaries.push(summary);
        }
    }
    let table = format_table(&summaries);
    print!("{table}");
    if let Some(dir) = &a.out_dir {
        std::fs::write(dir.join("summary.txt"), &table)?;
        let mut f = std::fs::File::create(dir.join("summary.csv"))?;
        write_summary_csv(&mut f, &summaries)?;
    }
    Ok(())
}

fn cmd_wf(a: WfArgs) -> anyhow::Result<()> {
    let weights = WaveformSet::lag_window_weights(a.length, a.lags)?;
    let ws0 = WaveformSet::random(a.length, a.waveforms, weights, a.seed)?;
    let cfg = SolverConfig {
        direction: Direction::Min,
        tol: a.tol,
        max_iters: a.max_iters,
        accelerate: a.accelerate,
        seed: a.seed,
        jitter: 1e-8,
    };
    let initial = wisl_objective(&ws0);
    let (designed, trace) = solve_wisl(&ws0, &cfg)?;
    let final_wisl = trace.final_objective();
    println!("waveforms {}", a.waveforms);
    println!("length {}", a.length);
    println!("lags {}", a.lags);
    println!("status {:?}", trace.status);
    println!("iterations {}", trace.iterations());
    println!("initial_wisl {initial}");
    println!("final_wisl {final_wisl}");
    println!(
        "reduction_db {}",
        10.0 * (initial / final_wisl.max(f64::MIN_POSITIVE)).log10()
    );
    eprintln!("elapsed_s {}", trace.elapsed_ns() as f64 / 1e9);
    write_trace_if_requested(&a.trace_out, &trace)?;
    if let Some(p) = &a.waveform_out {
        io::save_complex_matrix(p, designed.matrix())?;
    }
    Ok(())
}

fn cmd_detect(a: DetectArgs) -> anyhow::Result<()> {
    if a.restarts == 0 {
        anyhow::bail!("--restarts must be >= 1");
    }
    let scn = detection::build_detection_scenario(a.n, a.doppler, a.corr)?;
    let mut best: Option<cmcqp::detection::DetectionResult> = None;
    for r in 0..a.restarts {
        let cfg = SolverConfig {
            direction: Direction::Max,
            tol: a.tol,
            max_iters: a.max_iters,
            accelerate: true,
            seed: a.seed.wrapping_add(r as u64),
            jitter: 1e-8,
        };
        let res = detection::solve_detection(&scn, &cfg)?;
        if best.as_ref().is_none_or(|b| res.snr_db > b.snr_db) {
            best = Some(res);
        }
    }
    let best = best.expect("at least one restart ran");
    println!("n {}", a.n);
    println!("doppler {}", a.doppler);
    println!("corr {}", a.corr);
    println!("iterations {}", best.trace.iterations());
    println!("snr_db {}", best.snr_db);
    eprintln!("elapsed_s {}", best.trace.elapsed_ns() as f64 / 1e9);
    write_trace_if_requested(&a.trace_out, &best.trace)?;
    Ok(())
}
