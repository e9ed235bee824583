use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nhqc::entanglement::{es_csv, es_vs_energy_scan, Subsystem};
use nhqc::model::{build_hamiltonian, ModelSpec};
use nhqc::spectrum::{decompose_with, spectrum_csv, write_eigenvectors, DecomposeOptions};
use nhqc::sweep::{self, Diagnostic, RunOptions, SweepPlan};
use nhqc::topology::{winding_trace, BaseEnergies, WindingOptions};
use nhqc::validate::{run_oracle_suite, OracleOptions};
use nhqc::Error;

#[derive(Parser)]
#[command(name = "nhqc", version, about = "Spectra, localization, winding and entanglement of non-Abelian non-Hermitian quasicrystals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Model keys as KEY=VALUE (kind, J, V, phi, beta, gamma, alpha_p, alpha_q, L, boundary, flux, flux_divisor).
    #[arg(value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// File of KEY = VALUE lines; command-line pairs override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec, Error> {
        let mut text = match &self.config {
            Some(p) => read(p)?,
            None => String::new(),
        };
        for kv in &self.set {
            if !kv.contains('=') {
                return Err(Error::invalid(kv.clone(), "expected KEY=VALUE"));
            }
            text.push('\n');
            text.push_str(kv);
        }
        ModelSpec::from_kv(&text)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of one model as CSV.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write right and left eigenvectors to FILE.right / FILE.left.
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Retry a failed bi-normalization with a tiny random diagonal shift.
        #[arg(long)]
        perturb_retry: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Every diagnostic of one model.
    Diagnose {
        #[command(flatten)]
        model: ModelArgs,
        /// Base energies for the windings, `E` or `E1,E2`.
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value_t = 256)]
        n_theta: usize,
        #[arg(long)]
        tol_imag: Option<f64>,
        #[arg(long)]
        ipr_threshold: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run a plan file.
    Sweep {
        plan: PathBuf,
        /// Plan keys as KEY=VALUE, overriding the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Checkpoint file, resumed from if present.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Entanglement spectra against the filling level.
    EsScan {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 50)]
        cutoffs: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Accumulated determinant phase around one base energy.
    WindingTrace {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        base: f64,
        #[arg(long, default_value_t = 256)]
        n_theta: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run the small-lattice self-checks.
    Validate {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Random models per randomized check.
        #[arg(long, default_value_t = 100)]
        random: usize,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Error> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io { path: p.to_path_buf(), source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_bases(s: &str) -> Result<BaseEnergies, Error> {
    let nums: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::invalid("base", format!("`{x}` is not a number"))))
        .collect::<Result<_, _>>()?;
    match nums[..] {
        [e] => Ok(BaseEnergies { e1: e, e2: e }),
        [e1, e2] => Ok(BaseEnergies { e1, e2 }),
        _ => Err(Error::invalid("base", "expected E or E1,E2")),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Spectrum { model, output, vectors, perturb_retry, seed } => {
            let spec = model.spec()?;
            let dec = decompose_with(&build_hamiltonian(&spec)?, &DecomposeOptions { perturb_retry, seed, fast_paths: true })?;
            emit(&spectrum_csv(&dec), output.as_deref())?;
            if let Some(v) = vectors {
                write_eigenvectors(&dec.right, &v.with_extension("right"))?;
                write_eigenvectors(&dec.left, &v.with_extension("left"))?;
            }
        }
        Command::Diagnose { model, base, n_theta, tol_imag, ipr_threshold, seed, json } => {
            let spec = model.spec()?;
            let bases = base.as_deref().map(parse_bases).transpose()?;
            let mut plan = SweepPlan::new(spec.clone(), sweep::Axis::new("J", vec![spec.j]));
            plan.diagnostics = Diagnostic::ALL.into_iter().filter(|d| *d != Diagnostic::Winding || spec.is_periodic()).collect();
            plan.n_theta = n_theta;
            plan.tol_imag = tol_imag;
            plan.ipr_threshold = ipr_threshold;
            plan.seed = seed;
            let (row, used) = sweep::diagnose(&plan, &spec, bases)?;
            if json {
                let doc = serde_json::json!({ "model": spec, "base_energies": used, "diagnostics": row });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!("{}", serde_json::to_string(&row)?);
            }
        }
        Command::Sweep { plan, set, output, checkpoint, threads, seed } => {
            let mut text = read(&plan)?;
            for kv in set {
                text.push('\n');
                text.push_str(&kv);
            }
            let mut plan = SweepPlan::parse(&text)?;
            if output.is_some() {
                plan.output = output;
            }
            if threads.is_some() {
                plan.threads = threads;
            }
            if let Some(s) = seed {
                plan.seed = s;
            }
            let res = sweep::run_sweep_with(&plan, &RunOptions { checkpoint, stop_after: None })?;
            match &plan.output {
                Some(p) => sweep::write_outputs(&res, p)?,
                None => print!("{}", sweep::to_csv(&res)),
            }
            let errors = res.n_errors();
            if errors > 0 {
                eprintln!("{errors} of {} points recorded errors", res.rows.len());
                return Ok(ExitCode::from(3));
            }
        }
        Command::EsScan { model, cutoffs, output } => {
            let spec = model.spec()?;
            let dec = decompose_with(&build_hamiltonian(&spec)?, &DecomposeOptions::default())?;
            let sub = Subsystem::half(dec.sites());
            let scan = es_vs_energy_scan(&dec, &sub, cutoffs)?;
            if let Some(warn) = scan.iter().find(|c| c.spectrum.complex_warning()) {
                eprintln!("warning: complex entanglement spectrum at cutoff {} (|Im zeta| up to {:.2e})", warn.cutoff, warn.spectrum.max_imag);
            }
            emit(&es_csv(&scan, &sub, dec.sites()), output.as_deref())?;
        }
        Command::WindingTrace { model, base, n_theta, output } => {
            let spec = model.spec()?;
            let trace = winding_trace(&spec, base, &WindingOptions { n_theta, ..Default::default() })?;
            emit(&trace.to_csv(), output.as_deref())?;
            eprintln!("winding {:.6} (max step {:.3} rad)", trace.total(), trace.max_step_phase);
        }
        Command::Validate { seed, random } => {
            let report = run_oracle_suite(&OracleOptions { seed, n_random: random });
            print!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidValue { .. } | Error::UnknownKey(_) | Error::InvalidSpec(_) | Error::InvalidPlan(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
