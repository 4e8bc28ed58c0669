use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcbecker_cli::commands;
use qcbecker_cli::config::{Overrides, RunConfig};
use qcbecker_cli::CliError;

#[derive(Parser)]
#[command(name = "qcbecker", version, about = "Quasiconformal extensions from corrected Loewner chains")]
struct Cli {
    /// Worker threads; 1 makes every output reproducible byte for byte.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every bound constant at q.
    Bounds {
        #[arg(long)]
        q: f64,
    },
    /// Run the construction and write report.json, kprofile.csv, curves.svg and dilatation.csv.
    Construct(RunArgs),
    /// Run the property suite and print one line per check.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
        /// Perturb one constant before the golden-number comparison.
        #[arg(long, hide = true)]
        corrupt_constant: Option<String>,
    },
    /// Evaluate the final extension at points given as `re,im`.
    Extend {
        #[command(flatten)]
        run: RunArgs,
        /// A point `re,im`; repeatable.
        #[arg(long = "point", value_parser = commands::parse_point, allow_hyphen_values = true)]
        points: Vec<num_complex::Complex64>,
        /// File of `re,im` lines.
        #[arg(long)]
        points_file: Option<PathBuf>,
    },
    /// Draw kprofile.svg and dilatation.svg from a report.json.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, env = "QCBECKER_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// identity, mobius, quadratic, cubic or koebe.
    #[arg(long)]
    family: Option<String>,
    /// Family parameter c (real part).
    #[arg(long, allow_hyphen_values = true)]
    param: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    param_im: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    tspan: Option<f64>,
    /// Boundary nodes of every exterior map.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "QCBECKER_OUT")]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        base.apply(&Overrides {
            family: self.family.clone(),
            param: self.param,
            param_im: self.param_im,
            q: self.q,
            tspan: self.tspan,
            n: self.n,
            output_dir: self.out.clone(),
            seed: self.seed,
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Bounds { q } => print!("{}", commands::bounds(q)?),
        Command::Construct(args) => {
            let config = args.config()?;
            let result = commands::construct(&config);
            if matches!(result, Ok(_) | Err(CliError::ChecksFailed(_))) {
                println!("artifacts in {}", config.output_dir().display());
            }
            let report = result?;
            println!("accepted: k0 = {:.6}", report.k0);
        }
        Command::Verify { run, json, corrupt_constant } => {
            let summary = commands::verify(&run.config()?, corrupt_constant.as_deref())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?);
            } else {
                print!("{}", summary.table());
            }
            if !summary.passed {
                let failed: Vec<&str> = summary.items.iter().filter(|i| !i.passed).map(|i| i.name.as_str()).collect();
                return Err(CliError::ChecksFailed(format!("failed: {}", failed.join(", "))));
            }
        }
        Command::Extend { run, mut points, points_file } => {
            if let Some(p) = points_file {
                let text = std::fs::read_to_string(&p).map_err(|e| CliError::Usage(format!("reading {}: {e}", p.display())))?;
                points.extend(commands::parse_points(&text)?);
            }
            if points.is_empty() {
                return Err(CliError::Usage("no points given; use --point re,im or --points-file".into()));
            }
            let values = commands::extend(&run.config()?, &points)?;
            println!("z_re,z_im,f_re,f_im");
            for (z, w) in points.iter().zip(values) {
                println!("{:.17e},{:.17e},{:.17e},{:.17e}", z.re, z.im, w.re, w.im);
            }
        }
        Command::Plot { report, out } => {
            let dir = out.unwrap_or_else(|| PathBuf::from("qcbecker-out"));
            for f in commands::plot_report(&report, &dir)? {
                println!("{}", dir.join(f).display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
