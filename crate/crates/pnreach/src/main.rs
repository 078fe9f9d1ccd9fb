use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pnreach::automata::{dfa_to_dot, DotOptions};
use pnreach::decompose::{decompose, CutKind};
use pnreach::generators;
use pnreach::io::{read_json, write_json, DecompositionFile, NetFile, StatsFile};
use pnreach::net::MarkedNet;
use pnreach::oracle::oracle_reach;
use pnreach::automata::is_accepting_verdict;
use pnreach::wiring::{evaluate_with_observer, expr_widths, EvalOptions, MemoTable};

/// Compositional reachability checking for 1-bounded Petri nets.
#[derive(Parser)]
#[command(name = "pnreach", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether the target marking of a net is reachable.
    Check {
        /// Net file (JSON) with initial marking and per-place targets.
        #[arg(long)]
        net: PathBuf,
        /// Use this decomposition instead of decomposing automatically.
        #[arg(long)]
        decomposition: Option<PathBuf>,
        /// Stop decomposing once a component has at most this many places.
        #[arg(long, default_value_t = 2)]
        leaf_budget: usize,
        /// Abort if any component needs more than this many boundary bits.
        #[arg(long, default_value_t = 16)]
        max_width: usize,
        /// Write per-node statistics as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Write every evaluated automaton as GraphViz into this directory.
        #[arg(long)]
        emit_dot: Option<PathBuf>,
        /// Include the error state in GraphViz output.
        #[arg(long)]
        emit_sink: bool,
        /// Disable memoisation (for comparison runs).
        #[arg(long)]
        no_memo: bool,
    },
    /// Generate a benchmark family instance.
    Gen {
        family: Family,
        /// Family size (cells, tree depth, philosophers, clique places).
        #[arg(short)]
        n: usize,
        /// Output form; decomposition shapes are only meaningful per family.
        #[arg(long)]
        shape: Option<Shape>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Decompose a flat net into a wiring decomposition file.
    Decompose {
        #[arg(long)]
        net: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Print the per-step cut report.
        #[arg(long)]
        explain: bool,
        #[arg(long, default_value_t = 2)]
        leaf_budget: usize,
    },
    /// Explicit-state reference check of a flat net.
    Oracle {
        #[arg(long)]
        net: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Buffer,
    Tree,
    Philosophers,
    Clique,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shape {
    /// Flat net file.
    Flat,
    /// Fully right-associated buffer decomposition.
    Right,
    /// Fully left-associated buffer decomposition.
    Left,
    /// Balanced buffer decomposition.
    Balanced,
    /// The hand decomposition of the family.
    Hand,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Check {
            net,
            decomposition,
            leaf_budget,
            max_width,
            stats,
            emit_dot,
            emit_sink,
            no_memo,
        } => {
            let marked = load_net(&net)?;
            let (expr, asg) = match decomposition {
                Some(path) => {
                    let file: DecompositionFile = read_json(&path).map_err(|e| e.to_string())?;
                    file.to_wiring().map_err(|e| e.to_string())?
                }
                None => {
                    let d = decompose(&marked.net, &marked.initial, &marked.targets, leaf_budget)
                        .map_err(|e| e.to_string())?;
                    (d.expr, d.assign)
                }
            };
            let (k, l) = expr_widths(&expr, &asg).map_err(|e| e.to_string())?;
            if k != 0 || l != 0 {
                return Err(format!("decomposition denotes an open net ({k} -> {l})"));
            }
            let opts = EvalOptions {
                max_width,
                use_memo: !no_memo,
            };
            if let Some(dir) = &emit_dot {
                std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
            }
            let mut memo = MemoTable::new();
            let mut dot_error: Option<String> = None;
            let (dfa, eval_stats) = evaluate_with_observer(
                &expr,
                &asg,
                &mut memo,
                &opts,
                &mut |path, dfa| {
                    if let Some(dir) = &emit_dot {
                        let name = format!("{}.dot", path.replace('.', "_"));
                        let text = dfa_to_dot(dfa, DotOptions { emit_sink, state_names: false });
                        if let Err(e) = std::fs::write(dir.join(name), text) {
                            dot_error = Some(e.to_string());
                        }
                    }
                },
            )
            .map_err(|e| e.to_string())?;
            if let Some(e) = dot_error {
                return Err(e);
            }
            let reachable = is_accepting_verdict(&dfa).map_err(|e| e.to_string())?;
            let verdict = if reachable { "REACHABLE" } else { "UNREACHABLE" };
            if let Some(path) = stats {
                write_json(&path, &StatsFile::new(verdict, &eval_stats)).map_err(|e| e.to_string())?;
            }
            println!("{verdict}");
            Ok(ExitCode::from(if reachable { 0 } else { 1 }))
        }
        Cmd::Gen { family, n, shape, output } => {
            gen_family(family, n, shape, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Decompose {
            net,
            output,
            explain,
            leaf_budget,
        } => {
            let marked = load_net(&net)?;
            let d = decompose(&marked.net, &marked.initial, &marked.targets, leaf_budget)
                .map_err(|e| e.to_string())?;
            let file =
                DecompositionFile::from_wiring(&d.expr, &d.assign).map_err(|e| e.to_string())?;
            write_json(&output, &file).map_err(|e| e.to_string())?;
            if explain {
                for step in &d.report.steps {
                    let what = match &step.kind {
                        CutKind::TransitionCut { id } => format!("transition cut at '{id}'"),
                        CutKind::PlaceCut { id } => format!("place cut at '{id}'"),
                        CutKind::ForcedRemoval { id } => format!("forced removal of '{id}'"),
                        CutKind::DisjointSplit => "split of disconnected parts".to_string(),
                        CutKind::Leaf { var } => format!("leaf '{var}'"),
                    };
                    let balance = step
                        .balance
                        .map(|b| format!(", balance {b}"))
                        .unwrap_or_default();
                    println!(
                        "{}: {what} ({} places, middle width {}{balance}, {} candidates probed)",
                        step.path, step.piece_places, step.middle_width, step.candidates_probed
                    );
                }
                for w in &d.report.warnings {
                    println!("warning: {w}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Oracle { net } => {
            let marked = load_net(&net)?;
            let result = oracle_reach(&marked.net, &[marked.initial.clone()], &marked.targets)
                .map_err(|e| e.to_string())?;
            let verdict = if result.reachable { "REACHABLE" } else { "UNREACHABLE" };
            println!("{verdict}");
            println!("explored: {}", result.explored);
            if let Some(len) = result.shortest_length {
                println!("shortest firing sequence: {len}");
            }
            if let Some(witness) = &result.witness {
                let steps: Vec<String> = witness
                    .iter()
                    .map(|set| format!("{{{}}}", set.join(",")))
                    .collect();
                println!("witness: {}", steps.join(" "));
            }
            Ok(ExitCode::from(if result.reachable { 0 } else { 1 }))
        }
    }
}

fn load_net(path: &Path) -> Result<MarkedNet, String> {
    let file: NetFile = read_json(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (net, initial, targets) = file.to_net().map_err(|e| e.to_string())?;
    Ok(MarkedNet { net, initial, targets })
}

fn gen_family(family: Family, n: usize, shape: Option<Shape>, output: &Path) -> Result<(), String> {
    use generators::BufferShape;
    let write_flat = |flat: MarkedNet| -> Result<(), String> {
        let nf = NetFile::from_net(&flat.net, &flat.initial, &flat.targets);
        write_json(output, &nf).map_err(|e| e.to_string())
    };
    let write_decomp = |d: generators::Decomposed| -> Result<(), String> {
        let file = DecompositionFile::from_wiring(&d.expr, &d.assign).map_err(|e| e.to_string())?;
        write_json(output, &file).map_err(|e| e.to_string())
    };
    match family {
        Family::Buffer => {
            let shape = shape.unwrap_or(Shape::Flat);
            match shape {
                Shape::Flat => write_flat(generators::buffer_flat(n)),
                Shape::Right => write_decomp(generators::buffer_decomposition(n, BufferShape::Right)),
                Shape::Left => write_decomp(generators::buffer_decomposition(n, BufferShape::Left)),
                Shape::Balanced => {
                    write_decomp(generators::buffer_decomposition(n, BufferShape::Balanced))
                }
                Shape::Hand => Err("buffer shapes are flat|right|left|balanced".to_string()),
            }
        }
        Family::Tree => match shape.unwrap_or(Shape::Hand) {
            Shape::Flat => write_flat(generators::tree_flat(n)),
            Shape::Hand => write_decomp(generators::tree_decomposition(n)),
            _ => Err("tree shapes are flat|hand".to_string()),
        },
        Family::Philosophers => match shape.unwrap_or(Shape::Hand) {
            Shape::Flat => write_flat(generators::philosophers_flat(n)),
            Shape::Hand => write_decomp(generators::philosophers_decomposition(n)),
            _ => Err("philosopher shapes are flat|hand".to_string()),
        },
        Family::Clique => match shape.unwrap_or(Shape::Flat) {
            Shape::Flat => write_flat(generators::clique(n)),
            _ => Err("cliques are only generated flat".to_string()),
        },
    }
}
