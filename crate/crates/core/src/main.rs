//! Command-line front end: dataset generation, mining stages, planning, and
//! the full evaluation pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use consolidator::config::PipelineConfig;
use consolidator::datagen::{generate, GenConfig};
use consolidator::error::Result;
use consolidator::eval::render_table;
use consolidator::io;
use consolidator::mining::MinSupport;
use consolidator::pipeline::{run_pipeline, train};
use consolidator::solver::CapacityScope;

#[derive(Parser)]
#[command(
    name = "consolidator",
    version,
    about = "Mine recurring freight consolidation opportunities and compute cost-optimal consolidation plans"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded synthetic dataset directory.
    Generate {
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Horizon in days (day 0 is a Monday).
        #[arg(long, default_value_t = 60)]
        days: u32,
    },
    /// Cluster the training history and write clusters.jsonl.
    Cluster {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Mine candidate sets from the training history and write
    /// transactions.jsonl, candidates.jsonl, and cps.json.
    Mine {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the full pipeline and write per-day paths and plans.
    Plan {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the full pipeline and print the comparison report.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run everything end-to-end: validate, mine, plan, evaluate.
    Pipeline {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    /// Capacity constraints on every last-leg origin.
    All,
    /// Capacity constraints only on mined consolidation points.
    Paper,
}

#[derive(Args)]
struct CommonArgs {
    /// Dataset directory (terminals.csv, sorts.csv, loads.jsonl).
    #[arg(long)]
    data: PathBuf,
    /// Artifact output directory.
    #[arg(long)]
    out: PathBuf,
    /// JSON config file; explicit flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Clustering radius over route bearings, radians.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    min_pts: Option<usize>,
    /// Minimum support as an absolute transaction count.
    #[arg(long)]
    min_support: Option<u32>,
    /// Minimum support as a fraction of a group's transactions
    /// (overrides --min-support).
    #[arg(long)]
    min_support_frac: Option<f64>,
    /// Keep only maximal mined itemsets.
    #[arg(long)]
    maximal: bool,
    /// Holdout horizon in weeks.
    #[arg(long)]
    test_weeks: Option<u32>,
    #[arg(long)]
    speed_mph: Option<f64>,
    #[arg(long)]
    dwell_minutes: Option<f64>,
    /// Utilization below this fraction marks a load as partial.
    #[arg(long)]
    partial_threshold: Option<f64>,
    #[arg(long, value_enum)]
    capacity_scope: Option<ScopeArg>,
    /// Worker threads (0 = auto).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    budget_nodes: Option<u64>,
    #[arg(long)]
    budget_secs: Option<f64>,
    /// Require load and hub load to co-occur in one mined candidate.
    #[arg(long)]
    require_comembership: bool,
}

impl CommonArgs {
    fn to_config(&self) -> Result<PipelineConfig> {
        let mut c: PipelineConfig = match &self.config {
            Some(path) => io::read_json(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.eps {
            c.eps = v;
        }
        if let Some(v) = self.min_pts {
            c.min_pts = v;
        }
        if let Some(v) = self.min_support {
            c.min_support = MinSupport::Count(v);
        }
        if let Some(v) = self.min_support_frac {
            c.min_support = MinSupport::Fraction(v);
        }
        if self.maximal {
            c.maximal_only = true;
        }
        if let Some(v) = self.test_weeks {
            c.test_weeks = v;
        }
        if let Some(v) = self.speed_mph {
            c.speed_mph = v;
        }
        if let Some(v) = self.dwell_minutes {
            c.dwell_minutes = v;
        }
        if let Some(v) = self.partial_threshold {
            c.partial_threshold = v;
        }
        if let Some(v) = self.capacity_scope {
            c.capacity_scope = match v {
                ScopeArg::All => CapacityScope::All,
                ScopeArg::Paper => CapacityScope::MinedHubs,
            };
        }
        if let Some(v) = self.jobs {
            c.jobs = v;
        }
        if let Some(v) = self.budget_nodes {
            c.budget.max_nodes = v;
        }
        if let Some(v) = self.budget_secs {
            c.budget.max_secs = v;
        }
        if self.require_comembership {
            c.require_comembership = true;
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Generate { out, seed, days } => {
            let dataset = generate(&GenConfig {
                seed,
                days,
                ..GenConfig::default()
            });
            io::write_dataset(&out, &dataset)?;
            println!(
                "wrote {} terminals, {} loads to {}",
                dataset.network.terminals.len(),
                dataset.network.loads.len(),
                out.display()
            );
        }
        Cmd::Cluster { common } | Cmd::Mine { common } => {
            let config = common.to_config()?;
            let (network, _tiers) = io::read_dataset(&common.data)?;
            let (train_loads, _) =
                consolidator::datagen::split_train_test(&network, config.test_weeks);
            let model = train(&network, &train_loads, &config)?;
            std::fs::create_dir_all(&common.out)?;
            // Going through the full pipeline would also re-plan every day;
            // write just the mining artifacts directly instead.
            write_mining_artifacts(&common.out, &model)?;
            println!(
                "mined {} destination groups ({} clustered destinations) into {}",
                model.groups.len(),
                model.clustering.len(),
                common.out.display()
            );
        }
        Cmd::Plan { common } | Cmd::Evaluate { common } | Cmd::Pipeline { common } => {
            let config = common.to_config()?;
            let (network, tiers) = io::read_dataset(&common.data)?;
            let outcome = run_pipeline(&network, &tiers, &config, Some(&common.out))?;
            println!("{}", render_table(&outcome.report));
        }
    }
    Ok(())
}

fn write_mining_artifacts(
    out: &std::path::Path,
    model: &consolidator::pipeline::TrainedModel,
) -> Result<()> {
    use serde::Serialize;

    #[derive(Serialize)]
    struct ClusterRow<'a> {
        destination: &'a consolidator::model::Node,
        result: &'a consolidator::cluster::ClusteringResult,
    }
    let clusters: Vec<ClusterRow<'_>> = model
        .clustering
        .iter()
        .map(|(destination, result)| ClusterRow {
            destination,
            result,
        })
        .collect();
    io::write_jsonl(&out.join("clusters.jsonl"), &clusters)?;

    #[derive(Serialize)]
    struct GroupRow<'a> {
        destination: &'a consolidator::model::Node,
        due_dow: u8,
        group: &'a consolidator::pipeline::MinedGroupData,
    }
    let groups: Vec<GroupRow<'_>> = model
        .groups
        .iter()
        .map(|(k, group)| GroupRow {
            destination: &k.destination,
            due_dow: k.due_dow,
            group,
        })
        .collect();
    io::write_jsonl(&out.join("candidates.jsonl"), &groups)?;

    #[derive(Serialize)]
    struct CpRow<'a> {
        destination: &'a consolidator::model::Node,
        due_dow: u8,
        hubs: &'a std::collections::BTreeSet<consolidator::model::Node>,
    }
    let cps: Vec<CpRow<'_>> = model
        .groups
        .iter()
        .map(|(k, g)| CpRow {
            destination: &k.destination,
            due_dow: k.due_dow,
            hubs: &g.hubs,
        })
        .collect();
    io::write_json_pretty(&out.join("cps.json"), &cps)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
