//! `persys` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use persys_core::consistency::KinematicLimits;
use persys_core::diagnosability::max_diagnosability;
use persys_core::format::{parse_graph, parse_syndrome, write_graph, write_syndrome};
use persys_core::harness::campaign::write_csv;
use persys_core::harness::monitor::Monitor;
use persys_core::harness::synth::{
    object_detection_config, synth_localization, synth_object_detection, LocalizationScenario, ObjectScenario,
};
use persys_core::harness::{derive_seed, gen_random_diagnosable_graph, run_campaign, write_trace, CampaignSpec};
use persys_core::harness::{MonitorConfig, Pipeline};
use persys_core::identification::{identify_escalating, identify_faults};
use persys_core::{generate_syndrome, DiagnosticGraph, FaultSet, FaultyTesterPolicy};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "persys", version, about = "Fault diagnosis for modular perception pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML config file for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Zero wall-clock fields so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Report κ, minimum in-degree and a witness for a graph file.
    Analyze {
        graph: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Identify faulty nodes from a syndrome file.
    Identify {
        graph: PathBuf,
        syndrome: PathBuf,
        #[arg(long)]
        kappa: usize,
        /// Widen the bound until a consistent set exists.
        #[arg(long)]
        escalate: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a random κ-diagnosable graph, optionally with a faulty syndrome.
    Gen {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        kappa: usize,
        /// Inject this many random faults and write the resulting syndrome.
        #[arg(long)]
        faults: Option<usize>,
        #[arg(long, default_value = "random-uniform")]
        policy: String,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo fault-injection campaign; prints CSV.
    Montecarlo {
        /// Node counts, e.g. `15`, `11-25` or `11,15,20`.
        #[arg(long)]
        nodes: Option<String>,
        #[arg(long)]
        kappa: Option<usize>,
        /// Fault counts, same syntax as `--nodes`.
        #[arg(long)]
        faults: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// Random graphs per node count.
        #[arg(long)]
        graphs: Option<usize>,
        #[arg(long)]
        policy: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Replay a trace through the streaming monitor.
    Monitor {
        trace: PathBuf,
        #[arg(long, value_enum)]
        pipeline: Option<PipelineArg>,
        #[arg(long)]
        slots: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Synthesize a fault-injection trace and a matching monitor config.
    Synth {
        #[arg(long, value_enum, default_value = "localization")]
        scenario: PipelineArg,
        /// Window length of the emitted monitor config.
        #[arg(long, default_value_t = 1)]
        slots: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PipelineArg {
    Localization,
    ObjectDetection,
}

impl From<PipelineArg> for Pipeline {
    fn from(p: PipelineArg) -> Self {
        match p {
            PipelineArg::Localization => Pipeline::Localization,
            PipelineArg::ObjectDetection => Pipeline::ObjectDetection,
        }
    }
}

/// Localization scenario fields at top level, limits in `[limits]`.
#[derive(Deserialize, Default)]
#[serde(default)]
struct LocalizationSynthConfig {
    #[serde(flatten)]
    scenario: LocalizationScenario,
    limits: KinematicLimits,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { graph, common } => analyze(&graph, &common),
        Command::Identify {
            graph,
            syndrome,
            kappa,
            escalate,
            common,
        } => identify(&graph, &syndrome, kappa, escalate, &common),
        Command::Gen {
            nodes,
            kappa,
            faults,
            policy,
            common,
        } => gen(nodes, kappa, faults, &policy, &common),
        Command::Montecarlo {
            nodes,
            kappa,
            faults,
            trials,
            graphs,
            policy,
            common,
        } => montecarlo(nodes, kappa, faults, trials, graphs, policy, &common),
        Command::Monitor {
            trace,
            pipeline,
            slots,
            common,
        } => monitor(&trace, pipeline, slots, &common),
        Command::Synth { scenario, slots, common } => synth(scenario, slots, &common),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn label_pairs(graph: &DiagnosticGraph, set: &FaultSet) -> Value {
    set.iter()
        .map(|i| {
            let l = &graph.nodes()[i];
            json!([l.module_id, l.timestamp])
        })
        .collect()
}

fn node_names(graph: &DiagnosticGraph, nodes: impl IntoIterator<Item = usize>) -> Vec<String> {
    nodes.into_iter().map(|i| graph.nodes()[i].to_string()).collect()
}

fn analyze(path: &Path, common: &Common) -> Result<()> {
    let graph = parse_graph(&read(path)?)?;
    let report = max_diagnosability(&graph)?;
    println!("nodes: {}", report.node_count);
    println!("edges: {}", report.edge_count);
    println!("min in-degree: {}", report.min_in_degree);
    println!("kappa: {}", report.kappa);
    if let Some(c) = report.violated_condition {
        println!("kappa + 1 fails: {}", serde_json::to_value(c)?.as_str().unwrap_or_default());
    }
    let witness = report.witness.as_ref().map(|w| {
        println!(
            "witness: p = {}, X = {{{}}}, Γ(X) = {{{}}}",
            w.p,
            node_names(&graph, w.subset.iter().copied()).join(", "),
            node_names(&graph, w.gamma.iter().copied()).join(", ")
        );
        json!({
            "p": w.p,
            "subset": node_names(&graph, w.subset.iter().copied()),
            "gamma": node_names(&graph, w.gamma.iter().copied()),
        })
    });
    let record = json!({
        "kappa": report.kappa,
        "min_in_degree": report.min_in_degree,
        "node_count": report.node_count,
        "edge_count": report.edge_count,
        "violated_condition": report.violated_condition,
        "witness": witness,
    });
    println!("{record}");
    if let Some(dir) = &common.out {
        write(dir, "analysis.json", &pretty(&record))?;
    }
    Ok(())
}

fn identify(graph: &Path, syndrome: &Path, kappa: usize, escalate: bool, common: &Common) -> Result<()> {
    let graph = parse_graph(&read(graph)?)?;
    let sigma = parse_syndrome(&graph, &read(syndrome)?)?;
    let result = if escalate {
        identify_escalating(&graph, &sigma, kappa)?
    } else {
        identify_faults(&graph, &sigma, kappa)?
    };
    let record = json!({
        "status": result.status,
        "faults": result.fault_set.as_ref().map(|f| label_pairs(&graph, f)).unwrap_or(json!([])),
        "candidates": result.candidates.iter().map(|f| label_pairs(&graph, f)).collect::<Vec<_>>(),
        "candidates_count": result.candidate_count,
        "bound": result.bound,
        "elapsed_us": if common.no_timing { 0.0 } else { result.elapsed_us },
    });
    println!("{record}");
    if let Some(dir) = &common.out {
        write(dir, "identify.json", &pretty(&record))?;
    }
    Ok(())
}

fn gen(nodes: usize, kappa: usize, faults: Option<usize>, policy: &str, common: &Common) -> Result<()> {
    let seed = common.seed.unwrap_or(0);
    let policy: FaultyTesterPolicy = policy.parse()?;
    let graph = gen_random_diagnosable_graph(nodes, kappa, derive_seed(seed, &[0]))?;
    let graph_text = write_graph(&graph);
    let injected = match faults {
        Some(f) if f > nodes => bail!("cannot inject {f} faults into {nodes} nodes"),
        Some(f) => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1]));
            let set: FaultSet = sample(&mut rng, nodes, f).into_iter().collect();
            let sigma = generate_syndrome(&graph, &set, &policy, derive_seed(seed, &[2]))?;
            Some((set, sigma))
        }
        None => None,
    };
    match &common.out {
        Some(dir) => {
            write(dir, "graph.txt", &graph_text)?;
            if let Some((set, sigma)) = &injected {
                write(dir, "syndrome.txt", &write_syndrome(&graph, sigma))?;
                write(dir, "faults.json", &pretty(&label_pairs(&graph, set)))?;
            }
            println!("wrote {}", dir.display());
        }
        None => {
            print!("{graph_text}");
            if let Some((set, sigma)) = &injected {
                println!("# injected {}", label_pairs(&graph, set));
                print!("{}", write_syndrome(&graph, sigma));
            }
        }
    }
    Ok(())
}

/// `7`, `11-25`, `0,2,5-8`.
fn parse_counts(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("empty range `{part}`");
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("invalid count `{part}`"))?),
        }
    }
    if out.is_empty() {
        bail!("no counts in `{text}`");
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn montecarlo(
    nodes: Option<String>,
    kappa: Option<usize>,
    faults: Option<String>,
    trials: Option<usize>,
    graphs: Option<usize>,
    policy: Option<String>,
    common: &Common,
) -> Result<()> {
    let mut spec = match &common.config {
        Some(path) => toml::from_str::<CampaignSpec>(&read(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => CampaignSpec {
            n_nodes: 15,
            target_kappa: 5,
            fault_counts: (0..=8).collect(),
            trials_per_point: 100,
            seed: 0,
            faulty_policy: "random-uniform".into(),
            graphs: 100,
        },
    };
    if let Some(k) = kappa {
        spec.target_kappa = k;
    }
    if let Some(f) = faults {
        spec.fault_counts = parse_counts(&f)?;
    }
    if let Some(t) = trials {
        spec.trials_per_point = t;
    }
    if let Some(g) = graphs {
        spec.graphs = g;
    }
    if let Some(p) = policy {
        spec.faulty_policy = p;
    }
    if let Some(s) = common.seed {
        spec.seed = s;
    }
    let node_counts = match nodes {
        Some(n) => parse_counts(&n)?,
        None => vec![spec.n_nodes],
    };

    let mut rows = Vec::new();
    for n in node_counts {
        let mut table = run_campaign(&CampaignSpec { n_nodes: n, ..spec.clone() })?;
        if common.no_timing {
            table = table.without_timing();
        }
        rows.extend(table.rows);
    }
    let csv = write_csv(&rows);
    print!("{csv}");
    if let Some(dir) = &common.out {
        write(dir, "results.csv", &csv)?;
        write(dir, "campaign.toml", &toml::to_string(&spec)?)?;
        write(dir, "summary.json", &pretty(&rows))?;
    }
    Ok(())
}

fn monitor(trace: &Path, pipeline: Option<PipelineArg>, slots: Option<usize>, common: &Common) -> Result<()> {
    let mut config = match (&common.config, pipeline) {
        (Some(path), _) => MonitorConfig::from_toml(&read(path)?)?,
        (None, Some(p)) => MonitorConfig::new(p.into(), 1),
        (None, None) => bail!("monitor needs --config or --pipeline"),
    };
    if let Some(p) = pipeline {
        config.pipeline = p.into();
    }
    if let Some(s) = slots {
        config.slots = s;
    }
    let monitor = Monitor::new(config)?;
    let mut run = monitor.run_text(&read(trace)?)?;
    if common.no_timing {
        run.zero_timing();
    }
    let detected = run.reports.iter().filter(|r| r.detected).count();
    match &common.out {
        Some(dir) => {
            monitor.write_run_dir(dir, &run)?;
            println!("{}", serde_json::to_string(&run.stats)?);
            println!("{} windows, {} detected; reports in {}", run.reports.len(), detected, dir.display());
        }
        None => print!("{}", run.reports_jsonl()),
    }
    Ok(())
}

fn synth(scenario: PipelineArg, slots: usize, common: &Common) -> Result<()> {
    let seed = common.seed.unwrap_or(0);
    let text = common.config.as_deref().map(read).transpose()?.unwrap_or_default();
    let (records, config) = match scenario {
        PipelineArg::Localization => {
            let cfg: LocalizationSynthConfig = toml::from_str(&text).context("parsing scenario config")?;
            let records = synth_localization(&cfg.scenario, &cfg.limits, seed)?;
            let config = MonitorConfig {
                limits: cfg.limits,
                ..MonitorConfig::new(Pipeline::Localization, slots)
            };
            (records, config)
        }
        PipelineArg::ObjectDetection => {
            let params: ObjectScenario = toml::from_str(&text).context("parsing scenario config")?;
            (synth_object_detection(&params, seed)?, object_detection_config(slots))
        }
    };
    let trace = write_trace(&records);
    match &common.out {
        Some(dir) => {
            write(dir, "trace.jsonl", &trace)?;
            write(dir, "config.toml", &config.to_toml()?)?;
            println!("wrote {} records to {}", records.len(), dir.display());
        }
        None => print!("{trace}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_syntax() {
        assert_eq!(parse_counts("7").unwrap(), vec![7]);
        assert_eq!(parse_counts("11-13").unwrap(), vec![11, 12, 13]);
        assert_eq!(parse_counts("0, 2,5-6").unwrap(), vec![0, 2, 5, 6]);
        assert!(parse_counts("5-3").is_err());
        assert!(parse_counts("").is_err());
        assert!(parse_counts("x").is_err());
    }

    #[test]
    fn cli_definition_is_valid() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
