//! `fidelion` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fidelion::classifiers::{
    sweep, sweep_csv, threshold, witness_minimum, CertifyOptions, ChannelClass, ChannelFamily,
};
use fidelion::entropy::{
    conditional_min_entropy, conditional_renyi, conditional_tsallis, conditional_tsallis2_closed_form,
    conditional_von_neumann, min_entropy, renyi, tsallis, von_neumann,
};
use fidelion::fidelity::{fidelity, OptimizerConfig, MAX_OPTIMIZE_DIM};
use fidelion::io::{csv_line, fmt_num, parse_channel, parse_state};
use fidelion::states::{decompose, DensityMatrix};
use fidelion::theorems::{report_csv, run_suite, Suite, SuiteConfig};

#[derive(Parser, Debug)]
#[command(name = "fidelion", version, about = "Fidelity of entanglement, entropies and channel-class certification")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Random seed (falls back to FIDELION_SEED, then 42).
    #[arg(long, global = true, env = "FIDELION_SEED", default_value_t = 42)]
    seed: u64,
    /// Schmidt grid size used when searching for worst-case inputs (≥ 101).
    #[arg(long, global = true, default_value_t = 101)]
    grid: usize,
    /// Optimizer restarts for fidelities without a closed form.
    #[arg(long, global = true, default_value_t = 20)]
    restarts: usize,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fidelity, entropies and Bloch summary of a state file.
    Analyze {
        state: PathBuf,
    },
    /// Certify a channel class across a range of channel parameters.
    Sweep {
        #[arg(long)]
        class: String,
        /// qubit-depol, qutrit-depol, or custom (with --channel).
        #[arg(long, default_value = "qubit-depol")]
        family: String,
        /// Channel file for the custom family.
        #[arg(long)]
        channel: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        #[arg(long, default_value_t = 1.0)]
        p_max: f64,
        /// Number of parameter values, endpoints included.
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
    /// Locate the parameter where the class verdict flips.
    Threshold {
        #[arg(long)]
        class: String,
        #[arg(long, default_value = "qubit-depol")]
        family: String,
    },
    /// Run a theorem suite on random states; exits 1 on any failure.
    Verify {
        /// lemma1, renyi, tsallis, minentropy, weyl, relent or all.
        #[arg(default_value = "all")]
        suite: String,
        /// Samples per check. The relative-entropy checks use this count
        /// when run alone and a tenth of it within `all`.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Minimum teleportation-witness value after two-local depolarizing noise.
    Witness {
        /// Local dimension (2–4).
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 21)]
        steps: usize,
    },
}

enum Failure {
    Input(String),
    Verification(String),
}

impl From<fidelion::Error> for Failure {
    fn from(e: fidelion::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn optimizer(cfg: &RunConfig) -> OptimizerConfig {
    OptimizerConfig {
        restarts: cfg.restarts,
        ..Default::default()
    }
}

fn certify_options(cfg: &RunConfig) -> CertifyOptions {
    CertifyOptions {
        grid: cfg.grid,
        optimizer: optimizer(cfg),
        seed: cfg.seed,
    }
}

fn family(name: &str, channel: Option<&Path>) -> Result<ChannelFamily, Failure> {
    match (name, channel) {
        ("custom", Some(path)) => Ok(ChannelFamily::Custom(parse_channel(&read(path)?)?)),
        ("custom", None) => Err(Failure::Input("the custom family needs --channel".into())),
        (other, _) => Ok(other.parse()?),
    }
}

fn analyze(rho: &DensityMatrix, cfg: &RunConfig) -> Result<String, Failure> {
    let mut rows: Vec<(&str, String)> = Vec::new();
    let (da, db) = rho.dims();
    rows.push(("dims", format!("{da}x{db}")));
    let lambda_max = rho.spectrum()?.max();
    if da == db && da <= MAX_OPTIMIZE_DIM {
        let f = fidelity(rho, &optimizer(cfg), cfg.seed)?;
        let (lo, hi) = f.bracket();
        rows.push(("fidelity", fmt_num(f.value)));
        rows.push(("fidelity_lower", fmt_num(lo)));
        rows.push(("fidelity_upper", fmt_num(hi)));
        rows.push(("fidelity_method", f.method.as_str().into()));
    }
    rows.push(("lambda_max", fmt_num(lambda_max)));
    rows.push(("von_neumann", fmt_num(von_neumann(rho)?)));
    rows.push(("conditional_von_neumann", fmt_num(conditional_von_neumann(rho)?)));
    rows.push(("renyi2", fmt_num(renyi(rho, 2.0)?)));
    rows.push(("conditional_renyi2", fmt_num(conditional_renyi(rho, 2.0)?)));
    rows.push(("min_entropy", fmt_num(min_entropy(rho)?)));
    rows.push(("conditional_min_entropy", fmt_num(conditional_min_entropy(rho)?)));
    rows.push(("tsallis2", fmt_num(tsallis(rho, 2.0)?)));
    rows.push(("conditional_tsallis2_quotient", fmt_num(conditional_tsallis(rho, 2.0)?)));
    let bf = decompose(rho)?;
    if rho.dims() == (2, 2) {
        rows.push(("conditional_tsallis2", fmt_num(conditional_tsallis2_closed_form(&bf)?)));
    }
    rows.push(("bloch_a_norm", fmt_num(bf.a_norm_sq().sqrt())));
    rows.push(("bloch_b_norm", fmt_num(bf.b_norm_sq().sqrt())));
    rows.push(("correlation_trace_norm", fmt_num(bf.t_singular_values()?.iter().sum())));
    rows.push(("correlation_frobenius", fmt_num(bf.t_frobenius_sq().sqrt())));

    let mut out = String::from("quantity,value\n");
    for (k, v) in rows {
        out.push_str(&csv_line(&[k.to_string(), v]));
    }
    Ok(out)
}

fn parameter_grid(p_min: f64, p_max: f64, steps: usize) -> Result<Vec<f64>, Failure> {
    if !(0.0..=1.0).contains(&p_min) || !(0.0..=1.0).contains(&p_max) || p_min > p_max || steps == 0 {
        return Err(Failure::Input(format!(
            "need 0 ≤ p-min ≤ p-max ≤ 1 and at least one step, got [{p_min}, {p_max}] with {steps}"
        )));
    }
    if steps == 1 {
        return Ok(vec![p_min]);
    }
    Ok((0..steps)
        .map(|k| p_min + (p_max - p_min) * k as f64 / (steps - 1) as f64)
        .collect())
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Analyze { state } => analyze(&parse_state(&read(state)?)?, cfg),
        Command::Sweep {
            class,
            family: fam,
            channel,
            p_min,
            p_max,
            steps,
        } => {
            let class: ChannelClass = class.parse()?;
            let fam = family(fam, channel.as_deref())?;
            let ps = parameter_grid(*p_min, *p_max, *steps)?;
            Ok(sweep_csv(&sweep(class, &fam, &ps, &certify_options(cfg))?))
        }
        Command::Threshold { class, family: fam } => {
            let class: ChannelClass = class.parse()?;
            let fam = family(fam, None)?;
            let t = threshold(class, &fam, &certify_options(cfg))?;
            let mut out = String::from("class,family,p_star,lo,hi,iterations\n");
            out.push_str(&csv_line(&[
                class.to_string(),
                fam.name().to_string(),
                fmt_num(t.p_star),
                fmt_num(t.bracket.0),
                fmt_num(t.bracket.1),
                t.iterations.to_string(),
            ]));
            Ok(out)
        }
        Command::Verify { suite, samples } => {
            let suite: Suite = suite.parse()?;
            let relent_samples = if suite == Suite::All { samples / 10 } else { *samples };
            let scfg = SuiteConfig {
                samples: *samples,
                relent_samples: relent_samples.max(1),
                seed: cfg.seed,
                optimizer: optimizer(cfg),
            };
            let checks = run_suite(suite, &scfg)?;
            let csv = report_csv(&checks);
            if checks.iter().all(|c| c.passed()) {
                Ok(csv)
            } else {
                Err(Failure::Verification(csv))
            }
        }
        Command::Witness { dim, steps } => {
            let ps = parameter_grid(0.0, 1.0, *steps)?;
            let mut header: Vec<String> = vec!["p".into(), "witness_min".into()];
            header.extend((0..*dim).map(|j| format!("q{j}")));
            let mut out = csv_line(&header);
            for p in ps {
                let ch = fidelion::channels::depolarizing(*dim, p)?;
                let (q, v) = witness_minimum(&ch, cfg.grid)?;
                let mut row = vec![fmt_num(p), fmt_num(v)];
                row.extend(q.q().iter().map(|&x| fmt_num(x)));
                out.push_str(&csv_line(&row));
            }
            Ok(out)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let out = cli.config.out.as_deref();
    match run(&cli) {
        Ok(text) => match emit(&text, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(Failure::Input(msg) | Failure::Verification(msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
        Err(Failure::Verification(report)) => {
            let _ = emit(&report, out);
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
