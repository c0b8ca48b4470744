use anyhow::Result;
use clap::{Parser, Subcommand};
use hdqf_bench::experiments::{codebook, image_decode, noise, non_unique, prob_vs_iter, scaling, table1};
use hdqf_bench::output::Artifacts;
use hdqf_bench::settings::Settings;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "hdqf", version, about = "Hypervector factorization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// circuit | implicit
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    shots: Option<usize>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings (repeatable); override the config file.
    #[arg(long = "set", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    ProbVsIter,
    Scaling,
    Noise,
    ImageDecode,
    NonUnique,
    Table1,
    GenCodebook,
}

fn settings(cli: &Cli) -> Result<Settings> {
    let file = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::new(),
    };
    let mut flags = Settings::new();
    flags.set_pairs(cli.set.iter().map(String::as_str))?;
    if let Some(s) = cli.seed {
        flags.set("seed", s);
    }
    if let Some(m) = &cli.mode {
        flags.set("mode", m);
    }
    if let Some(s) = cli.shots {
        flags.set("shots", s);
    }
    if let Some(r) = cli.runs {
        flags.set("runs", r);
    }
    Ok(Settings::new().overlay(&file).overlay(&flags))
}

fn run(cmd: Command, s: &Settings) -> Result<Artifacts> {
    Ok(match cmd {
        Command::ProbVsIter => {
            let r = prob_vs_iter::run(&prob_vs_iter::Params::from_settings(s)?)?;
            for c in &r.cells {
                if let Some(n) = &c.notice {
                    eprintln!("notice: {n}");
                }
            }
            r.artifacts()
        }
        Command::Scaling => {
            let r = scaling::run(&scaling::Params::from_settings(s)?)?;
            for sl in &r.slopes {
                eprintln!("F={}: quantum slope {:.3}, classical slope {:.3}", sl.factors, sl.quantum, sl.classical);
            }
            r.artifacts()
        }
        Command::Noise => {
            let r = noise::run(&noise::Params::from_settings(s)?)?;
            for c in &r.curves {
                eprintln!(
                    "N={}: spearman(tv, T1) = {:.3} (p = {:.2e}), spearman(tv, k) = {:.3} (p = {:.2e})",
                    c.size, c.t1_spearman.0, c.t1_spearman.1, c.iteration_spearman.0, c.iteration_spearman.1
                );
            }
            r.artifacts()
        }
        Command::ImageDecode => {
            let r = image_decode::run(&image_decode::Params::from_settings(s)?)?;
            eprintln!("{:?}", r.verdict);
            r.artifacts()
        }
        Command::NonUnique => {
            let r = non_unique::run(&non_unique::Params::from_settings(s)?)?;
            for t in &r.targets {
                eprintln!(
                    "t={}: peak {} (optimal {}), median first correct {:?}",
                    t.t,
                    t.peak,
                    t.optimal,
                    t.median_first_correct()
                );
            }
            r.artifacts()
        }
        Command::Table1 => table1::run(&table1::Params::from_settings(s)?)?.artifacts(),
        Command::GenCodebook => codebook::artifacts(&codebook::Params::from_settings(s)?)?,
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let s = settings(&cli)?;
    let artifacts = run(cli.command, &s)?;
    let mut artifacts = artifacts;
    // record the effective settings as given
    if let Some(m) = artifacts.files.iter_mut().find(|a| a.name == "manifest.txt") {
        for (k, v) in s.iter() {
            m.bytes.extend(format!("setting.{k} = {v}\n").bytes());
        }
    }
    artifacts.write_all(&cli.out_dir)?;
    for name in artifacts.names() {
        println!("{}", cli.out_dir.join(name).display());
    }
    Ok(())
}
