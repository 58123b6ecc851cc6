use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcluster::data::CirclesSpec;
use qcluster_cli::{bench, execute, max_qubits_from_env, write_bench, Algorithm, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "cluster", version, about = "Distance-encoded quantum clustering on a simulated register")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label clusters by the high bits of each encoded distance
    Qhca(RunArgs),
    /// Cluster by successive Gaussian unsharp measurements
    Unsharp(RunArgs),
    /// Classical bottom-up baseline
    Agglomerative(RunArgs),
    /// Classical top-down bisecting baseline
    Divisive(RunArgs),
    /// Time every algorithm on concentric circles of several sizes
    Bench(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat JSON config; flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Generate concentric circles, e.g. n=400,factor=0.5,noise=0.1,seed=7
    #[arg(long, value_name = "SPEC")]
    circles: Option<String>,
    /// TSPLIB EUC_2D instance
    #[arg(long, value_name = "FILE")]
    tsplib: Option<PathBuf>,
    /// Wisconsin breast cancer CSV
    #[arg(long, value_name = "FILE")]
    wbc: Option<PathBuf>,
    /// Rows with missing attributes: drop or impute-mode
    #[arg(long)]
    missing: Option<String>,
    /// Project onto the first two principal components
    #[arg(long)]
    pca: bool,
    /// Skip standardizing features before PCA
    #[arg(long)]
    no_standardize: bool,
    /// Number of clusters
    #[arg(long)]
    k: Option<usize>,
    /// Ancilla qubits (qhca)
    #[arg(long)]
    ancillae: Option<u32>,
    /// Widest allowed cluster in raw distance units; sets the ancilla count (qhca)
    #[arg(long)]
    d_min: Option<f64>,
    /// Gaussian window width in code units (unsharp)
    #[arg(long)]
    delta: Option<f64>,
    /// Membership radius in units of delta (unsharp)
    #[arg(long)]
    kappa: Option<f64>,
    /// Distance scale factor, or auto:W to fit codes into W qubits
    #[arg(long)]
    scale: Option<String>,
    /// Qubit cap for the simulated register (overrides CLUSTER_MAX_QUBITS)
    #[arg(long)]
    max_qubits: Option<u32>,
    /// farthest-endpoint, farthest-other, index:I or fixed:X,Y
    #[arg(long)]
    origin: Option<String>,
    /// uniform-distinct or multiplicity
    #[arg(long)]
    weighting: Option<String>,
    /// Window placement: lowest-unassigned or highest-amplitude (unsharp)
    #[arg(long)]
    center: Option<String>,
    /// single or complete (agglomerative)
    #[arg(long)]
    linkage: Option<String>,
    /// Read out with this many sampled shots instead of exact probabilities (qhca)
    #[arg(long)]
    shots: Option<usize>,
    /// Seed for shot sampling
    #[arg(long)]
    seed: Option<u64>,
    /// Write per-point assignments here, with a JSON sidecar next to it
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Write a scatter plot of 2-D data
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
    /// Write the metrics record as JSON
    #[arg(long, value_name = "FILE")]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated dataset sizes
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
    sizes: Vec<usize>,
    /// Circles options other than the size
    #[arg(long, default_value = "factor=0.5,noise=0.1,seed=7")]
    circles: String,
    /// Output CSV
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self, algorithm: Algorithm) -> Result<RunConfig, CliError> {
        let flags = RunConfig {
            algorithm: Some(algorithm),
            circles: self.circles,
            tsplib: self.tsplib,
            wbc: self.wbc,
            missing: self.missing,
            pca: self.pca.then_some(true),
            standardize: self.no_standardize.then_some(false),
            k: self.k,
            m: self.ancillae,
            d_min: self.d_min,
            delta: self.delta,
            kappa: self.kappa,
            scale: self.scale,
            max_qubits: self.max_qubits,
            origin: self.origin,
            weighting: self.weighting,
            center: self.center,
            linkage: self.linkage,
            shots: self.shots,
            seed: self.seed,
            csv: self.csv,
            svg: self.svg,
            metrics: self.metrics,
        };
        let mut config = match &self.config {
            Some(path) => flags.over(RunConfig::from_file(path)?),
            None => flags,
        };
        config.algorithm = Some(algorithm);
        if config.max_qubits.is_none() && matches!(algorithm, Algorithm::Qhca | Algorithm::Unsharp) {
            config.max_qubits = max_qubits_from_env()?;
        }
        Ok(config)
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let (algorithm, args) = match command {
        Command::Qhca(a) => (Algorithm::Qhca, a),
        Command::Unsharp(a) => (Algorithm::Unsharp, a),
        Command::Agglomerative(a) => (Algorithm::Agglomerative, a),
        Command::Divisive(a) => (Algorithm::Divisive, a),
        Command::Bench(b) => {
            let base: CirclesSpec = b
                .circles
                .parse()
                .map_err(|e| CliError::Usage(format!("--circles: {e}")))?;
            let rows = bench(&base, &b.sizes)?;
            match &b.out {
                Some(path) => write_bench(&rows, path)?,
                None => print!("{}", qcluster_cli::bench_csv(&rows)),
            }
            return Ok(());
        }
    };
    let report = execute(&args.into_config(algorithm)?)?;
    println!("{}", report.summary());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
