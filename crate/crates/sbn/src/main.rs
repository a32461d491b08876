//! Batch front door for the sigmoid belief network library: network
//! generation, sampling, exact likelihoods, mean-field fits, the bound
//! experiments, training, and classification.
//!
//! Exit codes: 0 success, 1 usage, 2 data/parse, 3 numeric guard.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sbn::error::Error;
use sbn::learning::{classify, normalized_score, train, TrainOptions};
use sbn::mean_field::{minimize_on_unit_interval, solve, SolveOptions};
use sbn::network::Evidence;
use sbn::rng::Rng64;
use sbn::{exact, io, BitmapDataset, SigmoidBeliefNetwork};

#[derive(Parser)]
#[command(
    name = "sbn",
    version,
    about = "Sigmoid belief networks: exact and mean-field inference, learning, and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SolveFlags {
    /// Convergence threshold on max |change in mu| per sweep.
    #[arg(long, default_value_t = 1e-8)]
    tol_mu: f64,
    /// Convergence threshold on |change in bound| per sweep.
    #[arg(long, default_value_t = 1e-10)]
    tol_bound: f64,
    /// Maximum alternating sweeps per solve.
    #[arg(long, default_value_t = 1000)]
    max_sweeps: usize,
    /// Interval tolerance of each golden-section xi minimization.
    #[arg(long, default_value_t = 1e-10)]
    xi_tol: f64,
}

impl SolveFlags {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            init_mu: 0.5,
            tol_mu: self.tol_mu,
            tol_bound: self.tol_bound,
            max_sweeps: self.max_sweeps,
            xi_tol: self.xi_tol,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random layered network (full bipartite connectivity
    /// between adjacent layers, parameters i.i.d. uniform).
    GenNet {
        /// Layer sizes, top first, e.g. 2,4,6.
        #[arg(long)]
        layers: String,
        /// Uniform range for weights and biases, e.g. -1,1.
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        weight_range: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output network file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw bitmap patterns from a network by ancestral sampling. The
    /// bitmap is read off the last rows*cols nodes, row-major.
    Sample {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output dataset file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact log-likelihood of an evidence file (enumerates hidden states).
    Loglik {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        evidence: PathBuf,
    },
    /// Mean-field fit of an evidence file; prints the bound breakdown.
    Mf {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        evidence: PathBuf,
        #[command(flatten)]
        solve_flags: SolveFlags,
    },
    /// Bound-accuracy experiment over random 2x4x6 networks with the bottom
    /// layer clamped to zero. Writes one CSV row per network with columns
    /// index,exact,bound,e_mf,e_unif where e_mf = bound/exact - 1 and
    /// e_unif = ln(2^-6)/exact - 1; prints mean e_mf and RMS e_unif.
    Fig5 {
        #[arg(long, default_value_t = 10000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// One-dimensional check of the xi bound against a standard Gaussian
    /// input; prints the minimizer, the minimum, and the xi = 0 value.
    GaussCheck,
    /// Train a network on a bitmap dataset by gradient ascent on the bound.
    /// The bitmap occupies the last rows*cols nodes, row-major.
    Train {
        /// Initial network file.
        #[arg(long)]
        net: PathBuf,
        /// Training dataset.
        #[arg(long)]
        data: PathBuf,
        /// Learning rate.
        #[arg(long, default_value_t = 0.05)]
        rate: f64,
        /// Passes through the training set.
        #[arg(long, default_value_t = 5)]
        sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Visit patterns in file order instead of reshuffling each sweep.
        #[arg(long)]
        no_shuffle: bool,
        /// Output (trained) network file.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solve_flags: SolveFlags,
    },
    /// Classify each pattern by the model with the highest bound. Models
    /// are read from <models>/class-<k>.sbn; the k-th data file's patterns
    /// are scored with true class k. Optionally writes a CSV with columns
    /// file,pattern,predicted.
    Classify {
        /// Directory holding class-<k>.sbn model files.
        #[arg(long)]
        models: PathBuf,
        /// Dataset file(s); repeat the flag for one file per class.
        #[arg(long, required = true)]
        data: Vec<PathBuf>,
        /// Optional CSV of per-pattern predictions.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solve_flags: SolveFlags,
    },
}

enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::HiddenSetTooLarge { .. } | Error::TooManyParents { .. } => {
                CliError::Numeric(err.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    std::fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<SigmoidBeliefNetwork, CliError> {
    io::parse_network(&read_file(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> Result<BitmapDataset, CliError> {
    io::parse_dataset(&read_file(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_layers(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad layer size `{t}` in --layers")))
        })
        .collect()
}

fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "--weight-range expects `<lo>,<hi>`, got `{text}`"
        )));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad range bound `{}`", parts[0])))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad range bound `{}`", parts[1])))?;
    Ok((lo, hi))
}

/// The last rows*cols node indices, row-major: the default mapping of a
/// bitmap onto a layered network's bottom layer.
fn bottom_visible_map(n_nodes: usize, width: usize) -> Result<Vec<usize>, CliError> {
    if width > n_nodes {
        return Err(CliError::Data(format!(
            "bitmap needs {width} visible nodes but the network has only {n_nodes}"
        )));
    }
    Ok((n_nodes - width..n_nodes).collect())
}

fn run(command: Command) -> CliResult {
    match command {
        Command::GenNet {
            layers,
            weight_range,
            seed,
            out,
        } => {
            let layers = parse_layers(&layers)?;
            let range = parse_range(&weight_range)?;
            let net = io::gen_random_layered(&layers, range, seed)?;
            write_file(&out, &io::emit_network(&net))?;
            println!(
                "wrote {} ({} nodes, {} edges)",
                out.display(),
                net.n_nodes(),
                net.n_edges()
            );
            Ok(())
        }
        Command::Sample {
            net,
            count,
            rows,
            cols,
            seed,
            out,
        } => {
            if count == 0 {
                return Err(CliError::Usage("--count must be at least 1".into()));
            }
            let net = load_network(&net)?;
            let map = bottom_visible_map(net.n_nodes(), rows * cols)?;
            let mut rng = Rng64::new(seed);
            let patterns: Vec<Vec<u8>> = (0..count)
                .map(|_| {
                    let config = net.sample(&mut rng);
                    map.iter().map(|&i| config.bit(i)).collect()
                })
                .collect();
            let dataset = BitmapDataset::new(rows, cols, patterns)?;
            write_file(&out, &io::emit_dataset(&dataset))?;
            println!("wrote {} ({count} patterns)", out.display());
            Ok(())
        }
        Command::Loglik { net, evidence } => {
            let net = load_network(&net)?;
            let evidence = parse_evidence_file(&evidence)?;
            let ll = exact::log_likelihood(&net, &evidence)?;
            println!("loglik {ll}");
            Ok(())
        }
        Command::Mf {
            net,
            evidence,
            solve_flags,
        } => {
            let net = load_network(&net)?;
            let evidence = parse_evidence_file(&evidence)?;
            let solution = solve(&net, &evidence, &solve_flags.options())?;
            println!("converged {}", solution.converged);
            println!("sweeps {}", solution.sweeps);
            println!("quadratic {}", solution.bound.quadratic);
            println!("bias {}", solution.bound.bias);
            println!("xi_linear {}", solution.bound.xi_linear);
            println!("log_moment {}", solution.bound.log_moment);
            println!("entropy {}", solution.bound.entropy);
            println!("bound {}", solution.bound.total);
            Ok(())
        }
        Command::Fig5 { count, seed, out } => {
            if count == 0 {
                return Err(CliError::Usage("--count must be at least 1".into()));
            }
            let report = run_fig5(count, seed)?;
            write_file(&out, &report.csv)?;
            println!("networks {count}");
            println!("mean_e_mf {}", report.mean_e_mf);
            println!("rms_e_unif {}", report.rms_e_unif);
            Ok(())
        }
        Command::GaussCheck => {
            let f = |xi: f64| ((xi * xi / 2.0).exp() + ((1.0 - xi) * (1.0 - xi) / 2.0).exp()).ln();
            let (argmin, min) = minimize_on_unit_interval(f, 1e-10);
            println!("xi_argmin {argmin}");
            println!("bound_min {min}");
            println!("bound_at_zero {}", f(0.0));
            println!("exact_reference 0.806");
            Ok(())
        }
        Command::Train {
            net,
            data,
            rate,
            sweeps,
            seed,
            no_shuffle,
            out,
            solve_flags,
        } => {
            let net = load_network(&net)?;
            let dataset = load_dataset(&data)?;
            let map = bottom_visible_map(net.n_nodes(), dataset.width())?;
            let options = TrainOptions {
                rate,
                sweeps,
                seed,
                shuffle: !no_shuffle,
                solve: solve_flags.options(),
            };
            let result = train(net, &dataset, &map, &options)?;
            for (epoch, mean) in result.trace.iter().enumerate() {
                println!("epoch {epoch} mean_bound {mean}");
            }
            if let Some(last) = result.trace.last() {
                let score = normalized_score(
                    last * dataset.n_patterns() as f64,
                    dataset.n_patterns(),
                    dataset.width(),
                )?;
                println!("normalized_score {score}");
            }
            println!("non_converged {}", result.non_converged);
            write_file(&out, &io::emit_network(&result.net))?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Classify {
            models,
            data,
            out,
            solve_flags,
        } => {
            let nets = load_model_directory(&models)?;
            if data.len() > nets.len() {
                return Err(CliError::Usage(format!(
                    "{} data files but only {} models",
                    data.len(),
                    nets.len()
                )));
            }
            let options = solve_flags.options();
            let mut csv = String::from("file,pattern,predicted\n");
            let mut correct = 0usize;
            let mut total = 0usize;
            for (class, path) in data.iter().enumerate() {
                let dataset = load_dataset(path)?;
                let map = bottom_visible_map(nets[0].n_nodes(), dataset.width())?;
                let mut file_correct = 0usize;
                for (k, pattern) in dataset.patterns().enumerate() {
                    let predicted = classify(&nets, pattern, &map, &options)?;
                    let _ = writeln!(csv, "{class},{k},{predicted}");
                    if predicted == class {
                        file_correct += 1;
                    }
                }
                println!(
                    "class {class} accuracy {}",
                    file_correct as f64 / dataset.n_patterns().max(1) as f64
                );
                correct += file_correct;
                total += dataset.n_patterns();
            }
            println!("overall_accuracy {}", correct as f64 / total.max(1) as f64);
            if let Some(path) = out {
                write_file(&path, &csv)?;
            }
            Ok(())
        }
    }
}

fn parse_evidence_file(path: &Path) -> Result<Evidence, CliError> {
    io::parse_evidence(&read_file(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_model_directory(dir: &Path) -> Result<Vec<SigmoidBeliefNetwork>, CliError> {
    let mut nets = Vec::new();
    loop {
        let path = dir.join(format!("class-{}.sbn", nets.len()));
        if !path.exists() {
            break;
        }
        nets.push(load_network(&path)?);
    }
    if nets.len() < 2 {
        return Err(CliError::Data(format!(
            "{}: found {} model file(s) class-<k>.sbn, need at least 2",
            dir.display(),
            nets.len()
        )));
    }
    if nets.iter().any(|n| n.n_nodes() != nets[0].n_nodes()) {
        return Err(CliError::Data(format!(
            "{}: model files disagree on node count",
            dir.display()
        )));
    }
    Ok(nets)
}

struct Fig5Report {
    csv: String,
    mean_e_mf: f64,
    rms_e_unif: f64,
}

/// Per network k: generate a 2x4x6 net from the k-th derived stream, clamp
/// the bottom layer to zero, and compare the solved bound to the exact
/// log-likelihood. Rows are emitted in index order.
fn run_fig5(count: usize, seed: u64) -> Result<Fig5Report, CliError> {
    let uniform_loglik = -6.0 * std::f64::consts::LN_2;
    let options = SolveOptions::default();
    let evidence = Evidence::from_pairs((6..12).map(|i| (i, 0))).map_err(CliError::from)?;
    let mut csv = String::from("index,exact,bound,e_mf,e_unif\n");
    let mut sum_e_mf = 0.0;
    let mut sum_sq_e_unif = 0.0;
    for k in 0..count {
        let net_seed = Rng64::derive_stream(seed, k as u64).next_u64();
        let net = io::gen_random_layered(&[2, 4, 6], (-1.0, 1.0), net_seed)?;
        let exact_ll = exact::log_likelihood(&net, &evidence)?;
        let solution = solve(&net, &evidence, &options)?;
        let e_mf = solution.bound.total / exact_ll - 1.0;
        let e_unif = uniform_loglik / exact_ll - 1.0;
        let _ = writeln!(
            csv,
            "{k},{exact_ll},{},{e_mf},{e_unif}",
            solution.bound.total
        );
        sum_e_mf += e_mf;
        sum_sq_e_unif += e_unif * e_unif;
    }
    Ok(Fig5Report {
        csv,
        mean_e_mf: sum_e_mf / count as f64,
        rms_e_unif: (sum_sq_e_unif / count as f64).sqrt(),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
