use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dynbp::fuzz::{self, FuzzConfig};
use dynbp::script::{self, Session};
use dynbp::stats;
use dynbp::{parse_bp, DynamicTree, Query, TreeConfig, QUERY_NAMES};

#[derive(Parser)]
#[command(name = "dynbp", version, about = "Dynamic succinct trees in balanced-parentheses form")]
struct Cli {
    #[command(flatten)]
    tree: TreeFlags,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Stop a script at its first failing line.
    #[arg(long, global = true)]
    abort_on_error: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TreeFlags {
    /// Node capacity; fixes the heavy-degree threshold D = ceil(log2 capacity)^2.
    #[arg(long, global = true, default_value_t = 1 << 32)]
    capacity: u64,

    /// Bits per leaf block (a multiple of 8).
    #[arg(long, global = true, default_value_t = 512)]
    leaf_bits: usize,

    /// Internal-node fan-out bounds as MIN:MAX.
    #[arg(long, global = true, default_value = "4:16", value_parser = parse_arity)]
    arity: (usize, usize),
}

impl TreeFlags {
    fn config(&self) -> TreeConfig {
        TreeConfig { capacity: self.capacity, leaf_bits: self.leaf_bits, min_arity: self.arity.0, max_arity: self.arity.1 }
    }
}

fn parse_arity(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected MIN:MAX")?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad arity '{t}'"));
    Ok((num(a)?, num(b)?))
}

#[derive(Subcommand)]
enum Command {
    /// Parse a parentheses string and report its node count.
    Build {
        /// The string over `()` or `10`; `-` reads standard input.
        bp: String,
    },
    /// Run an operation script, printing one line per query.
    Exec {
        /// Script file; standard input if omitted or `-`.
        script: Option<PathBuf>,
        /// Initial tree, as if the script began with `build`.
        #[arg(long)]
        tree: Option<String>,
    },
    /// Random insert/delete workload checked against the reference tree.
    Fuzz {
        #[arg(long, default_value_t = 5000)]
        ops: usize,
        /// Compare every query on every node after this many edits.
        #[arg(long, default_value_t = 50)]
        check_every: usize,
        /// Only delete once the tree has this many nodes.
        #[arg(long, default_value_t = 2000)]
        max_nodes: usize,
    },
    /// Space breakdown and per-query work histograms.
    Stats {
        #[command(flatten)]
        input: TreeInput,
        /// Random queries sampled per kind for the histograms.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Rough wall-clock cost of each query kind.
    Bench {
        #[command(flatten)]
        input: TreeInput,
        #[arg(long, default_value_t = 100_000)]
        queries: usize,
    },
}

#[derive(Args)]
struct TreeInput {
    /// Use this parentheses string.
    #[arg(long, conflicts_with = "random")]
    bp: Option<String>,
    /// Use a random tree with this many nodes.
    #[arg(long, default_value_t = 100_000)]
    random: usize,
}

impl TreeInput {
    fn build(&self, cfg: TreeConfig, rng: &mut StdRng) -> Result<DynamicTree, String> {
        let bits = match &self.bp {
            Some(text) => parse_bp(&read_arg(text)?).map_err(|e| e.to_string())?,
            None => fuzz::random_bp(self.random, rng),
        };
        DynamicTree::from_bp(&bits, cfg).map_err(|e| e.to_string())
    }
}

fn read_arg(text: &str) -> Result<String, String> {
    if text == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| e.to_string())?;
        Ok(s)
    } else {
        Ok(text.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    let cfg = cli.tree.config();
    cfg.minmax().validate().map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(cli.seed);
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let io_err = |e: io::Error| e.to_string();

    match &cli.command {
        Command::Build { bp } => {
            let bits = parse_bp(&read_arg(bp)?).map_err(|e| e.to_string())?;
            let tree = DynamicTree::from_bp(&bits, cfg).map_err(|e| e.to_string())?;
            writeln!(out, "nodes = {}", tree.node_count()).map_err(io_err)?;
        }
        Command::Exec { script: path, tree } => {
            let text = match path.as_deref().filter(|p| p.as_os_str() != "-") {
                Some(p) => std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
                None => read_arg("-")?,
            };
            let mut session = match tree {
                Some(bp) => {
                    let bits = parse_bp(bp).map_err(|e| e.to_string())?;
                    Session::with_tree(DynamicTree::from_bp(&bits, cfg).map_err(|e| e.to_string())?)
                }
                None => Session::new(cfg).map_err(|e| e.to_string())?,
            };
            let transcript = script::run(&mut session, &text, cli.abort_on_error);
            for line in &transcript.output {
                writeln!(out, "{line}").map_err(io_err)?;
            }
            out.flush().map_err(io_err)?;
            for e in &transcript.errors {
                eprintln!("error: {e}");
            }
            if transcript.aborted {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Fuzz { ops, check_every, max_nodes } => {
            let fc = FuzzConfig { seed: cli.seed, ops: *ops, check_every: (*check_every).max(1), max_nodes: *max_nodes, grow: 0.65, tree: cfg };
            let report = fuzz::run(&fc);
            writeln!(
                out,
                "seed {}  ops {}  queries checked {}  largest tree {}",
                fc.seed, report.ops, report.queries, report.max_nodes_seen
            )
            .map_err(io_err)?;
            if let Some((reason, repro)) = report.failure {
                writeln!(out, "MISMATCH: {reason}\n# reproduction script\n{repro}").map_err(io_err)?;
                return Ok(ExitCode::FAILURE);
            }
            writeln!(out, "no mismatches").map_err(io_err)?;
        }
        Command::Stats { input, samples } => {
            let tree = input.build(cfg, &mut rng)?;
            write!(out, "{}", stats::space_table(&tree)).map_err(io_err)?;
            writeln!(out, "descent work (internal nodes visited per query):").map_err(io_err)?;
            let hist = stats::probe_histograms(&tree, *samples, &mut rng);
            write!(out, "{}", stats::render_histograms(&hist)).map_err(io_err)?;
        }
        Command::Bench { input, queries } => {
            let tree = input.build(cfg, &mut rng)?;
            if tree.is_empty() {
                return Err("cannot benchmark an empty tree".into());
            }
            writeln!(out, "{} nodes, {} queries per kind", tree.node_count(), queries).map_err(io_err)?;
            for (k, name) in QUERY_NAMES.iter().enumerate() {
                let batch: Vec<Query> = (0..*queries)
                    .map(|_| {
                        let x = stats::random_node(&tree, &mut rng);
                        let y = stats::random_node(&tree, &mut rng);
                        Query::all_for(x, y, rng.gen_range(1..=3))[k]
                    })
                    .collect();
                let start = Instant::now();
                let mut sink = 0usize;
                for q in &batch {
                    sink = sink.wrapping_add(tree.query(q).is_ok() as usize);
                }
                let ns = start.elapsed().as_nanos() as f64 / batch.len().max(1) as f64;
                writeln!(out, "{name:>16} {ns:>10.0} ns/query  ({sink} ok)").map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)?;
    Ok(ExitCode::SUCCESS)
}
