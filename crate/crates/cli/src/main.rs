use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use homeo_energy::analysis::{self, AnalysisConfig, Suite, VerifyOptions};
use homeo_energy::chordarc::{self, PairSampler};
use homeo_energy::circle_map::MapSpec;
use homeo_energy::energy::ConditionTag;
use homeo_energy::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_SUITE: u8 = 3;

#[derive(Parser)]
#[command(name = "homeo-energy", version, about = "Energy analysis of circle homeomorphisms")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "HOMEO_ENERGY_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run conditions (i)-(v) and write an equivalence report.
    Analyze {
        #[command(flatten)]
        run: RunArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run an invariant suite.
    Verify {
        suite: String,
        /// Boundary nodes for the Poisson suite.
        #[arg(long)]
        nb: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// One CSV row per (lambda, J).
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Output CSV file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chord-arc vs internal chord-arc on the inward cusp polygon.
    CuspDemo {
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for the polygon and the sampled ratios.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Map specification file.
    #[arg(long, conflicts_with = "config")]
    map: Option<PathBuf>,
    /// Full analysis configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated lambda values.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Truncation level for the dyadic conditions.
    #[arg(long)]
    levels: Option<u32>,
    /// Truncation level for the disk conditions.
    #[arg(long)]
    disk_levels: Option<u32>,
    /// Comma-separated subset of i, ii, iii_direct, iii_dyadic, iv, v.
    #[arg(long)]
    conditions: Option<String>,
    /// Boundary quadrature nodes.
    #[arg(long)]
    nb: Option<usize>,
}

impl RunArgs {
    fn config(&self, default_conditions: Option<Vec<ConditionTag>>) -> Result<AnalysisConfig, Error> {
        let mut cfg = match (&self.config, &self.map) {
            (Some(path), _) => AnalysisConfig::from_file(path)?,
            (None, Some(path)) => {
                let mut cfg = AnalysisConfig::new(MapSpec::from_json(&std::fs::read_to_string(path)?)?);
                if let Some(c) = default_conditions {
                    cfg.conditions = c;
                }
                cfg
            }
            (None, None) => return Err(Error::Config("one of --map or --config is required".into())),
        };
        if let Some(l) = &self.lambda {
            cfg.lambdas = parse_list(l, |s| {
                s.parse::<f64>().map_err(|_| Error::Config(format!("bad lambda '{s}'")))
            })?;
        }
        if let Some(j) = self.levels {
            cfg.dyadic_levels = j;
            if self.disk_levels.is_none() {
                cfg.disk_levels = cfg.disk_levels.min(j);
            }
        }
        if let Some(j) = self.disk_levels {
            cfg.disk_levels = j;
        }
        if let Some(c) = &self.conditions {
            cfg.conditions = parse_list(c, str::parse::<ConditionTag>)?;
        }
        if let Some(n) = self.nb {
            cfg.boundary_nodes = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T, Error>) -> Result<Vec<T>, Error> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(f).collect()
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL })
}

fn analyze(run: &RunArgs, out: &Path) -> Result<ExitCode, Error> {
    let cfg = run.config(None)?;
    let report = analysis::analyze(&cfg)?;
    let path = report.write_to(out)?;
    analysis::validate_report_file(&path)?;
    for cell in &report.cells {
        for o in &cell.conditions {
            match (&o.report, &o.error) {
                (Some(r), _) => println!(
                    "lambda={} {}: S_J={:.6e} class={}",
                    cell.lambda,
                    o.condition,
                    r.total,
                    r.classification.map(|c| format!("{c:?}").to_lowercase()).unwrap_or_else(|| "-".into())
                ),
                (None, Some(e)) => println!("lambda={} {}: failed ({e})", cell.lambda, o.condition),
                (None, None) => {}
            }
        }
        println!("lambda={} verdict: {:?}", cell.lambda, cell.verdict);
    }
    println!("report written to {}", path.display());
    Ok(if report.any_failed() { ExitCode::from(EXIT_NUMERICAL) } else { ExitCode::SUCCESS })
}

fn verify(suite: &str, nb: Option<usize>, seed: u64) -> Result<ExitCode, Error> {
    let suite: Suite = suite.parse()?;
    let mut opts = VerifyOptions { seed, ..VerifyOptions::default() };
    if let Some(n) = nb {
        if n < 16 {
            return Err(Error::Config(format!("--nb {n} below 16")));
        }
        opts.boundary_nodes = n;
    }
    let results = analysis::run_suite(suite, &opts);
    let failed = results.iter().filter(|r| !r.passed).count();
    for r in &results {
        println!("{r}");
    }
    println!("{} checks, {} failed", results.len(), failed);
    Ok(if failed > 0 { ExitCode::from(EXIT_SUITE) } else { ExitCode::SUCCESS })
}

fn sweep(run: &RunArgs, out: Option<&Path>) -> Result<ExitCode, Error> {
    let cfg = run.config(Some(vec![ConditionTag::IiiDyadic, ConditionTag::Iv, ConditionTag::V]))?;
    let csv = analysis::sweep(&cfg, &cfg.lambdas)?;
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, &csv)?;
            println!("sweep written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(if csv.contains(",failed") { ExitCode::from(EXIT_NUMERICAL) } else { ExitCode::SUCCESS })
}

fn cusp_demo(resolution: usize, seed: u64, out: Option<&Path>) -> Result<ExitCode, Error> {
    let p = chordarc::cusp_domain(resolution)?;
    let sampler = PairSampler::new(seed);
    let pairs = sampler.sample(&p)?;
    let chord = chordarc::chordarc_constant(&p, &sampler)?;
    let internal = chordarc::internal_chordarc_constant(&p, &sampler)?;
    println!("vertices: {}", p.len());
    println!("perimeter: {:.12}", p.perimeter());
    println!("pairs: {}", pairs.len());
    println!("chord-arc (sampled): {chord:.6}");
    println!("internal chord-arc (sampled): {internal:.6}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("cusp_polygon.txt"), p.to_text())?;
        let mut csv = String::from("x1,y1,x2,y2,arc,chord,internal\n");
        for (a, b) in &pairs {
            csv.push_str(&format!(
                "{},{},{},{},{:e},{:e},{:e}\n",
                a.point.re,
                a.point.im,
                b.point.re,
                b.point.im,
                p.boundary_arc_length(a, b),
                (a.point - b.point).norm(),
                p.internal_distance(a, b)
            ));
        }
        std::fs::write(dir.join("cusp_pairs.csv"), csv)?;
        println!("data written to {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(&Error::Config("thread count must be positive".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&Error::Config(format!("thread pool: {e}")));
        }
    }
    let result = match &cli.command {
        Command::Analyze { run, out } => analyze(run, out),
        Command::Verify { suite, nb, seed } => verify(suite, *nb, *seed),
        Command::Sweep { run, out } => sweep(run, out.as_deref()),
        Command::CuspDemo { resolution, seed, out } => cusp_demo(*resolution, *seed, out.as_deref()),
    };
    result.unwrap_or_else(|e| fail(&e))
}
