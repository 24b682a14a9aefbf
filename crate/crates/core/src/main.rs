use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ssl_cc::data::{load_dataset, prepare, write_dataset, PrepOptions};
use ssl_cc::eval::{run_experiment, ExperimentConfig, TrialResult};
use ssl_cc::synth::{generate_raw, SyntheticParams};
use ssl_cc::Error;

#[derive(Parser)]
#[command(name = "sslcc", version, about = "Semi-supervised collective classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all configured trials and write trials.csv, summary.csv and report.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Parse a dataset and print basic statistics.
    Validate {
        #[arg(long)]
        nodes: PathBuf,
        #[arg(long)]
        edges: PathBuf,
    },
    /// Write a synthetic homophilous dataset as nodes.tsv and edges.tsv.
    GenSynthetic {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        homophily: f64,
        #[arg(long)]
        attr_noise: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        attrs: usize,
        #[arg(long, default_value_t = 2)]
        links_per_node: usize,
        /// Comma-separated relative class frequencies.
        #[arg(long, value_delimiter = ',')]
        class_weights: Option<Vec<f64>>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Usage(_) => 1,
        _ => 2,
    }
}

fn run_status(results: &[TrialResult]) -> u8 {
    let failed = results.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} trials failed", results.len());
    }
    if failed == results.len() {
        3
    } else {
        0
    }
}

fn run(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let results = run_experiment(&cfg)?;
            let code = run_status(&results);
            if code == 3 {
                eprintln!("all trials failed; see {}", cfg.out_dir.join("trials.csv").display());
            } else {
                println!("wrote reports to {}", cfg.out_dir.display());
            }
            return Ok(code);
        }
        Command::Validate { nodes, edges } => {
            let raw = load_dataset(&nodes, &edges)?;
            let ds = prepare(&raw, PrepOptions::default())?;
            let mut counts = vec![0usize; ds.graph.num_classes()];
            for &c in &ds.truth {
                counts[c] += 1;
            }
            println!("nodes: {} ({} isolated removed)", ds.graph.node_count(), raw.ids.len() - ds.graph.node_count());
            println!("edges: {}", ds.graph.edge_count());
            println!("attribute columns: {} raw, {} after binarization", raw.schema.len(), ds.graph.attribute_dim());
            for (name, n) in ds.graph.label_domain().iter().zip(counts) {
                println!("class {name}: {n}");
            }
        }
        Command::GenSynthetic { nodes, classes, homophily, attr_noise, seed, out, attrs, links_per_node, class_weights } => {
            let p = SyntheticParams { nodes, classes, homophily, attr_noise, attrs, links_per_node, class_weights, seed };
            let raw = generate_raw(&p)?;
            std::fs::create_dir_all(&out)?;
            write_dataset(&raw, &out.join("nodes.tsv"), &out.join("edges.tsv"))?;
            println!("wrote {} nodes and {} edges to {}", raw.ids.len(), raw.edges.len(), out.display());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
