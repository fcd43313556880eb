use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use maxhaf::error::{Error, Result};
use maxhaf::experiment::{
    emit_figure1, emit_figure2, emit_figure3, emit_figure4, run_experiment, ExperimentConfig, FigureDataset,
};
use maxhaf::gbs::{gbs_advantage_diagnostics, ConditionalGBSDistribution};
use maxhaf::hafnian::hafnian;
use maxhaf::linalg::{coe_matrix, ComplexMatrix, SqueezingSpec};
use maxhaf::optimize::max_clique_via_maxhaf;
use maxhaf::RandomStream;

#[derive(Parser)]
#[command(name = "maxhaf", version, about = "Max-Haf optimization with GBS-style proportional sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Hafnian of a matrix file.
    Haf { matrix: PathBuf },
    /// Tabulate the conditional k-photon distribution of a matrix.
    Dist {
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: f64,
        /// CSV destination; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw patterns from a distribution CSV, or from a matrix file with --k and --r.
    Sample {
        source: PathBuf,
        #[arg(long)]
        draws: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment config and write its dataset and runs.
    Optimize {
        config: PathBuf,
        #[arg(long, env = "MAXHAF_OUTPUT_DIR")]
        output_dir: Option<PathBuf>,
        /// Allow instances with more than a million candidate patterns.
        #[arg(long)]
        long: bool,
    },
    /// Regenerate figure data.
    Figures {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        figure: u8,
        #[arg(long, env = "MAXHAF_OUTPUT_DIR")]
        output_dir: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 100)]
        kappa_max: u32,
        #[arg(long, default_value_t = 20)]
        k_max: usize,
        /// Figure 4 base config (JSON); desk-scale defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Figure 4 at n = 30, k = 10, 1000 queries, 400 repetitions.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long)]
        long: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repetitions: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Largest even clique of a 0/1 adjacency matrix, via Max-Haf.
    Clique { matrix: PathBuf },
    /// Draw a COE matrix tanh(r)·UUᵗ.
    GenMatrix {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-derive the content hashes of emitted datasets.
    Verify {
        dir: PathBuf,
        /// Dataset id; every `<id>.json` with a matching CSV if absent.
        #[arg(long)]
        id: Option<String>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 2,
        Error::ResourceLimit(_) => 3,
        Error::DegenerateDistribution(_) => 4,
        _ => 1,
    }
}

fn report(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message, "exit_code": code }));
    ExitCode::from(code)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn output_sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn resolve_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("maxhaf-out"))
}

fn require_long(cfg: &ExperimentConfig, long: bool) -> Result<()> {
    if cfg.requires_long_mode() && !long {
        return Err(Error::ResourceLimit(format!(
            "C({}, {}) = {} candidate patterns; pass --long to run anyway",
            cfg.n,
            cfg.k,
            cfg.pattern_count()
        )));
    }
    Ok(())
}

fn write_runs<'a>(path: &Path, runs: impl IntoIterator<Item = &'a maxhaf::optimize::OptimizerRun>) -> Result<()> {
    let mut w = create(path)?;
    for run in runs {
        serde_json::to_writer(&mut w, run)?;
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Haf { matrix } => {
            println!("{}", hafnian(&ComplexMatrix::load(&matrix)?)?);
        }
        Command::Dist { matrix, k, r, out } => {
            let dist = ConditionalGBSDistribution::build(&ComplexMatrix::load(&matrix)?, k, r)?;
            let mut sink = output_sink(&out)?;
            dist.write_csv(&mut sink)?;
            sink.flush().map_err(|e| Error::io("<output>", e))?;
            if out.is_some() {
                let diag = gbs_advantage_diagnostics(&dist);
                println!(
                    "{}",
                    json!({
                        "patterns": dist.len(),
                        "total_weight": dist.total_weight(),
                        "normalization": dist.normalization(),
                        "advantage": diag,
                    })
                );
            }
        }
        Command::Sample { source, draws, seed, k, r, out } => {
            let dist = if source.extension().is_some_and(|e| e == "csv") {
                let f = File::open(&source).map_err(|e| Error::io(&source, e))?;
                ConditionalGBSDistribution::read_csv(f)?
            } else {
                let (Some(k), Some(r)) = (k, r) else {
                    return Err(Error::InvalidArgument("sampling from a matrix needs --k and --r".into()));
                };
                ConditionalGBSDistribution::build(&ComplexMatrix::load(&source)?, k, r)?
            };
            let mut rng = RandomStream::new(seed);
            let mut sink = output_sink(&out)?;
            for _ in 0..draws {
                writeln!(sink, "{}", dist.pattern(dist.sample_index(&mut rng))).map_err(|e| Error::io("<output>", e))?;
            }
            sink.flush().map_err(|e| Error::io("<output>", e))?;
        }
        Command::Optimize { config, output_dir, long } => {
            let cfg = ExperimentConfig::load(&config)?;
            require_long(&cfg, long)?;
            let dir = resolve_dir(output_dir, &cfg);
            let out = run_experiment(&cfg)?;
            let (csv, meta) = out.dataset.write(&dir)?;
            let runs_path = dir.join(format!("{}.runs.jsonl", out.dataset.id));
            write_runs(&runs_path, &out.runs)?;
            println!(
                "{}",
                json!({
                    "csv": csv,
                    "metadata": meta,
                    "runs": runs_path,
                    "final_mean": out.dataset.metadata["final_mean"],
                    "optimum": out.dataset.metadata["optimum"],
                })
            );
        }
        Command::Figures {
            figure,
            output_dir,
            lambdas,
            grid,
            kappa_max,
            k_max,
            config,
            paper_scale,
            long,
            seed,
            repetitions,
            budget,
            matrix,
        } => {
            let mut cfg = match (&config, paper_scale) {
                (Some(p), _) => ExperimentConfig::load(p)?,
                (None, true) => ExperimentConfig::paper_scale(),
                (None, false) => ExperimentConfig::default(),
            };
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.repetitions = repetitions.unwrap_or(cfg.repetitions);
            cfg.budget = budget.unwrap_or(cfg.budget);
            cfg.matrix_path = matrix.or(cfg.matrix_path);
            let dir = resolve_dir(output_dir, &cfg);
            let ds = match figure {
                1 => emit_figure1(&lambdas, grid)?,
                2 => emit_figure2(&lambdas, kappa_max)?,
                3 => emit_figure3(k_max)?,
                _ => {
                    cfg.validate()?;
                    require_long(&cfg, long)?;
                    let out = emit_figure4(&cfg)?;
                    write_runs(&dir.join("figure4.runs.jsonl"), out.runs.iter().flat_map(|(_, _, r)| r))?;
                    out.dataset
                }
            };
            let (csv, meta) = ds.write(&dir)?;
            println!("{}", json!({ "csv": csv, "metadata": meta }));
        }
        Command::Clique { matrix } => {
            println!("{}", max_clique_via_maxhaf(&ComplexMatrix::load(&matrix)?)?);
        }
        Command::GenMatrix { n, r, seed, out } => {
            let b = coe_matrix(SqueezingSpec::new(r, n)?, &mut RandomStream::new(seed))?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            b.save(&out)?;
        }
        Command::Verify { dir, id } => {
            let ids = match id {
                Some(id) => vec![id],
                None => {
                    let mut ids = Vec::new();
                    for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                        let p = entry.map_err(|e| Error::io(&dir, e))?.path();
                        if p.extension().is_some_and(|e| e == "json") && p.with_extension("csv").exists() {
                            ids.push(p.file_stem().unwrap().to_string_lossy().into_owned());
                        }
                    }
                    ids.sort();
                    ids
                }
            };
            let mut bad = Vec::new();
            for id in &ids {
                let ok = FigureDataset::verify(&dir, id)?;
                println!("{}", json!({ "id": id, "ok": ok }));
                if !ok {
                    bad.push(id.clone());
                }
            }
            if !bad.is_empty() {
                return Err(Error::InvalidArgument(format!("content hash mismatch: {}", bad.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return report("invalid-argument", first, 2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e.kind(), &e.to_string(), exit_code(&e)),
    }
}
