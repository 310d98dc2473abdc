use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use mpcs::bench::{write_track, Track};
use mpcs::metrics::GATE_THRESHOLD;
use mpcs::pareto::write_table;
use mpcs::pareto::{compare_published, efficiency_analysis, frontier, read_table, render_table, ParetoReport, Status};
use mpcs::runner::{self, aggregate_table, load_failures, load_results, run_matrix, Preset, RunSettings};

#[derive(Parser)]
#[command(name = "mpcs", version, about = "Continual-learning ablation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Write benchmark datasets as columnar text files.
    Gen {
        #[arg(long, default_value = "all")]
        tracks: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the configuration x seed x track matrix, skipping finished cells.
    Run {
        /// A configuration name or `all`.
        #[arg(long, default_value = "all")]
        config: String,
        /// Number of seeds; seeds 0..N are used.
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, default_value = "all")]
        tracks: String,
        #[arg(long, value_enum, default_value = "desk")]
        preset: PresetArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Reduce a results directory to one CSV row per configuration.
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gate filtering, frontier and NES over an aggregate table.
    Pareto {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = GATE_THRESHOLD)]
        gate: f64,
    },
    /// Print a saved Pareto report as a table.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn parse_tracks(s: &str) -> Result<Vec<Track>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Track::ALL.to_vec());
    }
    s.split(',')
        .map(|t| t.trim().parse::<Track>().map_err(Into::into))
        .collect()
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { tracks, seed, out } => {
            for track in parse_tracks(&tracks)? {
                let files = write_track(&out, track, seed)?;
                println!("{track}: {} files", files.len());
            }
        }
        Command::Run {
            config,
            seeds,
            tracks,
            preset,
            out,
            workers,
        } => {
            let configs = if config == "all" {
                runner::registry()
            } else {
                config
                    .split(',')
                    .map(|c| runner::config(c.trim()))
                    .collect::<mpcs::Result<Vec<_>>>()?
            };
            let preset = match preset {
                PresetArg::Desk => Preset::Desk,
                PresetArg::Full => Preset::Full,
            };
            let seeds: Vec<u64> = (0..seeds).collect();
            let summary = run_matrix(
                &configs,
                &seeds,
                &parse_tracks(&tracks)?,
                &RunSettings::preset(preset),
                &out,
                workers,
            )?;
            println!(
                "completed {}, skipped {}, failed {}",
                summary.completed.len(),
                summary.skipped.len(),
                summary.failed.len()
            );
            for (cell, err) in &summary.failed {
                eprintln!("failed {}: {err}", cell.file_name());
            }
        }
        Command::Aggregate { input, out } => {
            let results = load_results(&input)?;
            if results.is_empty() {
                bail!("no results in {}", input.display());
            }
            for f in load_failures(&input)? {
                eprintln!("failed cell {} {} s{}: {}", f.config, f.track, f.seed, f.error);
            }
            let rows = aggregate_table(&results);
            write_table(&out, &rows)?;
            println!("{} configurations from {} results", rows.len(), results.len());
        }
        Command::Pareto { input, report, gate } => {
            let rows = read_table(&input).with_context(|| format!("reading {}", input.display()))?;
            let mut points = Vec::new();
            let mut published = BTreeMap::new();
            for row in &rows {
                let status = row.parsed_status()?;
                if status == Some(Status::Partial) {
                    eprintln!("skipping partial configuration {}", row.config);
                    continue;
                }
                if let Some(s) = status {
                    published.insert(row.config.clone(), s);
                }
                points.push(row.point());
            }
            let mut analysis: ParetoReport = frontier(&points, gate);
            compare_published(&mut analysis, &published);
            let flags: BTreeMap<String, _> = analysis
                .included
                .iter()
                .filter_map(|n| runner::flags_for(n).ok().map(|f| (n.clone(), f)))
                .collect();
            if flags.contains_key("full_mpcs") {
                analysis.recommendation = Some(efficiency_analysis(&analysis, &flags, "full_mpcs")?);
            }
            fs::write(&report, analysis.to_json()?)?;
            print!("{}", render_table(&analysis));
        }
        Command::Report { input } => {
            let analysis = ParetoReport::from_json(&fs::read_to_string(&input)?)?;
            print!("{}", render_table(&analysis));
        }
    }
    Ok(())
}
