//! Command line front end: check relations, dump zone graphs, play games,
//! synthesize distinguishing formulas and audit the relation hierarchy.
//!
//! Exit codes: 0 related / defender wins / success, 1 not related /
//! challenger wins, 2 usage or input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use timedrel::formula::{
    evaluate, render_formula, synthesize_distinguishing, FormulaError,
};
use timedrel::game::{self, render_trace, GameConfig};
use timedrel::oracle::{grid_timed_bisim, region_bisim, RegionFlavor};
use timedrel::relations::{self, HalfMove, Verdict};
use timedrel::{
    Alpha, Beta, Budget, GameOutcome, Instance, Rat, RelationKind, TimedAutomaton, TimedState,
    Winner, ZoneGraph,
};

#[derive(Parser)]
#[command(
    name = "timedrel",
    version,
    about = "Decide timed and time-abstracted behavioural relations between timed automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a behavioural relation between two designated states.
    Check(CheckArgs),
    /// Build and print the pre-stable zone graph of one automaton.
    Zonegraph(ZonegraphArgs),
    /// Play a challenger/defender game with explicit budgets.
    Game(GameArgs),
    /// Synthesize a formula telling two non-bisimilar states apart.
    Formula(FormulaArgs),
    /// Run every relation on one pair and audit the containment chain.
    Hierarchy(HierarchyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum FastSide {
    Left,
    Right,
}

fn parse_relation(s: &str) -> Result<RelationKind, String> {
    RelationKind::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = RelationKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown relation, expected one of: {}", names.join(", "))
    })
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    Alpha::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Alpha::ALL.iter().map(|a| a.name()).collect();
        format!("unknown move shape, expected one of: {}", names.join(", "))
    })
}

fn parse_beta(s: &str) -> Result<Beta, String> {
    Beta::from_name(s).ok_or_else(|| "expected \"left\" or \"right\"".to_string())
}

fn parse_budget(s: &str) -> Result<Budget, String> {
    s.parse()
}

#[derive(Args)]
struct CheckArgs {
    /// Relation to decide.
    #[arg(long, value_parser = parse_relation)]
    relation: RelationKind,
    /// Which side claims to be at least as fast (prebisim only).
    #[arg(long, value_enum, default_value = "left")]
    fast_side: FastSide,
    /// Designated state of the first automaton, as LOCATION[:clock=value,...].
    #[arg(long)]
    state_a: Option<String>,
    /// Designated state of the second automaton.
    #[arg(long)]
    state_b: Option<String>,
    /// On a negative timed-bisim verdict, also synthesize the
    /// distinguishing formula (initial states only).
    #[arg(long)]
    emit_formula: bool,
    /// Print the refutation trace on a negative verdict.
    #[arg(long)]
    emit_trace: bool,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    /// Cross-check the verdict against the brute-force oracles.
    #[arg(long)]
    oracle: bool,
    automaton_a: PathBuf,
    automaton_b: PathBuf,
}

#[derive(Args)]
struct ZonegraphArgs {
    /// Designated root state, as LOCATION[:clock=value,...].
    #[arg(long)]
    state_a: Option<String>,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    automaton: PathBuf,
}

#[derive(Args)]
struct GameArgs {
    /// Move shape of the game.
    #[arg(long, value_parser = parse_alpha)]
    alpha: Alpha,
    /// Round budget: a number, "unbounded" or "inf".
    #[arg(long, value_parser = parse_budget, default_value = "unbounded")]
    rounds: Budget,
    /// Challenger graph-switch budget: a number, "unbounded" or "inf".
    #[arg(long, value_parser = parse_budget, default_value = "unbounded")]
    alternations: Budget,
    /// Which side must not outwait the other (free-delay games).
    #[arg(long, value_parser = parse_beta)]
    beta: Option<Beta>,
    #[arg(long)]
    state_a: Option<String>,
    #[arg(long)]
    state_b: Option<String>,
    /// Print the winning play (or a survival sample).
    #[arg(long)]
    emit_trace: bool,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    automaton_a: PathBuf,
    automaton_b: PathBuf,
}

#[derive(Args)]
struct FormulaArgs {
    #[arg(long)]
    state_a: Option<String>,
    #[arg(long)]
    state_b: Option<String>,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    automaton_a: PathBuf,
    automaton_b: PathBuf,
}

#[derive(Args)]
struct HierarchyArgs {
    #[arg(long)]
    state_a: Option<String>,
    #[arg(long)]
    state_b: Option<String>,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    automaton_a: PathBuf,
    automaton_b: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check(args) => run_check(&args),
        Command::Zonegraph(args) => run_zonegraph(&args),
        Command::Game(args) => run_game(&args),
        Command::Formula(args) => run_formula(&args),
        Command::Hierarchy(args) => run_hierarchy(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn load_automaton(path: &Path) -> Result<TimedAutomaton> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    TimedAutomaton::parse(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn designated(a: &TimedAutomaton, designator: Option<&str>, path: &Path) -> Result<TimedState> {
    match designator {
        None => Ok(a.initial_state()),
        Some(d) => a
            .parse_state(d)
            .with_context(|| format!("bad state designator for {}", path.display())),
    }
}

struct Loaded {
    automaton_a: TimedAutomaton,
    automaton_b: TimedAutomaton,
    state_a: TimedState,
    state_b: TimedState,
    left: Instance,
    right: Instance,
}

fn load_pair(
    path_a: &Path,
    path_b: &Path,
    state_a: Option<&str>,
    state_b: Option<&str>,
) -> Result<Loaded> {
    let automaton_a = load_automaton(path_a)?;
    let automaton_b = load_automaton(path_b)?;
    let state_a = designated(&automaton_a, state_a, path_a)?;
    let state_b = designated(&automaton_b, state_b, path_b)?;
    // The two graphs are independent, so build them side by side.
    let (left, right) = std::thread::scope(|s| {
        let ta = s.spawn(|| Instance::new(&automaton_a, &state_a));
        let tb = s.spawn(|| Instance::new(&automaton_b, &state_b));
        (ta.join().expect("builder panicked"), tb.join().expect("builder panicked"))
    });
    let left = left.with_context(|| format!("cannot cover {}", path_a.display()))?;
    let right = right.with_context(|| format!("cannot cover {}", path_b.display()))?;
    Ok(Loaded {
        automaton_a,
        automaton_b,
        state_a,
        state_b,
        left,
        right,
    })
}

fn is_initial(a: &TimedAutomaton, s: &TimedState) -> bool {
    s.location == a.initial && s.valuation.iter().all(|v| *v == Rat::from_integer(0))
}

fn halfmove_line(m: &HalfMove) -> String {
    match m.kind.as_str() {
        "eps" => format!("eps on {} ({} -> {})", m.side, m.from, m.to),
        kind => format!("{kind} {} on {} ({} -> {})", m.label, m.side, m.from, m.to),
    }
}

fn print_refutation(verdict: &Verdict) {
    if let Some(steps) = &verdict.refutation {
        for step in steps {
            println!("  challenge: {}", halfmove_line(&step.challenge));
            match &step.response {
                Some(r) => println!("  response:  {}", halfmove_line(r)),
                None => println!("  response:  none, the defender is stuck"),
            }
        }
    }
}

fn run_check(args: &CheckArgs) -> Result<u8> {
    let loaded = load_pair(
        &args.automaton_a,
        &args.automaton_b,
        args.state_a.as_deref(),
        args.state_b.as_deref(),
    )?;
    let (l, r) = match (args.relation, args.fast_side) {
        (RelationKind::Prebisim, FastSide::Right) => (&loaded.right, &loaded.left),
        _ => (&loaded.left, &loaded.right),
    };
    let verdict = relations::check(args.relation, l, r);

    let oracle_report = if args.oracle {
        Some(oracle_line(args.relation, &loaded, verdict.related))
    } else {
        None
    };

    let formula_report = if args.emit_formula {
        Some(formula_for_check(args.relation, &loaded, &verdict))
    } else {
        None
    };

    match args.format {
        Format::Structured => {
            let doc = json!({
                "command": "check",
                "relation": args.relation.name(),
                "fast_side": match args.fast_side {
                    FastSide::Left => "left",
                    FastSide::Right => "right",
                },
                "related": verdict.related,
                "verdict": verdict,
                "oracle": oracle_report,
                "formula": formula_report,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Human => {
            let what = args.relation.name();
            if verdict.related {
                let pairs = verdict.witness.as_ref().map_or(0, |w| w.len());
                println!("related: {what} holds ({pairs} pairs in the computed relation)");
            } else {
                println!("not related: {what} fails");
                if args.emit_trace {
                    print_refutation(&verdict);
                }
            }
            if let Some(o) = &oracle_report {
                println!("oracle: {o}");
            }
            if let Some(f) = &formula_report {
                println!("formula: {f}");
            }
        }
    }
    Ok(u8::from(!verdict.related))
}

/// The oracle cross-check line for a verdict; never changes the exit code.
fn oracle_line(kind: RelationKind, loaded: &Loaded, related: bool) -> String {
    let flavor = match kind {
        RelationKind::TaBisim => Some(RegionFlavor::Strong),
        RelationKind::TaDelayBisim => Some(RegionFlavor::Delay),
        RelationKind::TaObsBisim => Some(RegionFlavor::Observational),
        _ => None,
    };
    if let Some(flavor) = flavor {
        let oracle = region_bisim(
            &loaded.automaton_a,
            &loaded.state_a,
            &loaded.automaton_b,
            &loaded.state_b,
            flavor,
        );
        let agree = if oracle == related { "agrees" } else { "DISAGREES" };
        return format!("region construction says {oracle}, {agree}");
    }
    if kind == RelationKind::TimedBisim {
        let grid = grid_timed_bisim(
            &loaded.automaton_a,
            &loaded.state_a,
            &loaded.automaton_b,
            &loaded.state_b,
            Rat::new(1, 2),
            12,
        );
        return if grid {
            let note = if related { "agrees" } else { "the grid is too coarse to refute" };
            format!("half-step grid finds no refutation, {note}")
        } else if related {
            "half-step grid refutes, DISAGREES".to_string()
        } else {
            "half-step grid refutes too, agrees".to_string()
        };
    }
    "no independent oracle for this relation".to_string()
}

fn formula_for_check(kind: RelationKind, loaded: &Loaded, verdict: &Verdict) -> String {
    if kind != RelationKind::TimedBisim {
        return "only timed-bisim refutations have distinguishing formulas".to_string();
    }
    if verdict.related {
        return "none, the states are timed bisimilar".to_string();
    }
    if !is_initial(&loaded.automaton_a, &loaded.state_a)
        || !is_initial(&loaded.automaton_b, &loaded.state_b)
    {
        return "synthesis is only defined for the initial states".to_string();
    }
    match synthesize_distinguishing(&loaded.left, &loaded.right) {
        Ok(f) => render_formula(&f),
        Err(err) => format!("synthesis failed: {err}"),
    }
}

fn run_zonegraph(args: &ZonegraphArgs) -> Result<u8> {
    let automaton = load_automaton(&args.automaton)?;
    let state = designated(&automaton, args.state_a.as_deref(), &args.automaton)?;
    let graph = ZoneGraph::build(&automaton, &state)
        .with_context(|| format!("cannot cover {}", args.automaton.display()))?;

    // Delay chains: start from the nodes nothing delays into.
    let mut is_target = vec![false; graph.node_count()];
    for (id, _) in graph.nodes() {
        if let Some(next) = graph.delay_next(id) {
            is_target[next.0] = true;
        }
    }
    let mut chains: Vec<Vec<usize>> = Vec::new();
    for (id, _) in graph.nodes() {
        if is_target[id.0] {
            continue;
        }
        let mut chain = vec![id.0];
        let mut cur = id;
        while let Some(next) = graph.delay_next(cur) {
            chain.push(next.0);
            cur = next;
        }
        chains.push(chain);
    }

    match args.format {
        Format::Structured => {
            let nodes: Vec<_> = graph
                .nodes()
                .map(|(id, n)| {
                    json!({
                        "id": id.0,
                        "location": automaton.locations[n.location],
                        "zone": n.zone.render(&automaton.clocks),
                    })
                })
                .collect();
            let mut edges = Vec::new();
            for (id, _) in graph.nodes() {
                for &(edge, target) in graph.action_successors(id) {
                    edges.push(json!({
                        "from": id.0,
                        "edge": edge,
                        "action": automaton.actions[automaton.edges[edge].action],
                        "to": target.0,
                    }));
                }
            }
            let doc = json!({
                "command": "zonegraph",
                "root": graph.initial_node().0,
                "scale": graph.scale(),
                "node_count": graph.node_count(),
                "nodes": nodes,
                "delay_chains": chains,
                "action_edges": edges,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Human => {
            println!(
                "{} nodes, root {}, scale {}",
                graph.node_count(),
                graph.initial_node().0,
                graph.scale()
            );
            for (id, n) in graph.nodes() {
                println!(
                    "node {}: {} | {}",
                    id.0,
                    automaton.locations[n.location],
                    n.zone.render(&automaton.clocks)
                );
                if let Some(next) = graph.delay_next(id) {
                    println!("  delay -> node {}", next.0);
                }
                for &(edge, target) in graph.action_successors(id) {
                    println!(
                        "  {} -> node {}",
                        automaton.actions[automaton.edges[edge].action],
                        target.0
                    );
                }
            }
        }
    }
    Ok(0)
}

fn run_game(args: &GameArgs) -> Result<u8> {
    let loaded = load_pair(
        &args.automaton_a,
        &args.automaton_b,
        args.state_a.as_deref(),
        args.state_b.as_deref(),
    )?;
    let mut cfg = GameConfig::unbounded(args.alpha)
        .with_alternations(args.alternations)
        .with_rounds(args.rounds);
    if let Some(beta) = args.beta {
        cfg = cfg.with_beta(beta);
    }
    cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    let outcome = game::play(&cfg, &loaded.left, &loaded.right)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    match args.format {
        Format::Structured => {
            let doc = json!({
                "command": "game",
                "config": {
                    "alpha": args.alpha.name(),
                    "beta": args.beta.map(Beta::name),
                    "rounds": args.rounds.to_string(),
                    "alternations": args.alternations.to_string(),
                },
                "outcome": outcome,
                "trace_rendered": render_trace(&outcome.trace),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Human => {
            describe_game(&outcome, args.emit_trace);
        }
    }
    Ok(match outcome.winner {
        Winner::Defender => 0,
        Winner::Challenger => 1,
    })
}

fn describe_game(outcome: &GameOutcome, emit_trace: bool) {
    match outcome.winner {
        Winner::Defender => {
            print!("defender wins");
            if let Some(member) = outcome.winning_disjunct {
                print!(" (disjunct {member})");
            }
            println!();
        }
        Winner::Challenger => {
            println!("challenger wins in {} rounds", outcome.trace.len());
        }
    }
    if emit_trace {
        println!("{}", render_trace(&outcome.trace));
    }
}

fn run_formula(args: &FormulaArgs) -> Result<u8> {
    let loaded = load_pair(
        &args.automaton_a,
        &args.automaton_b,
        args.state_a.as_deref(),
        args.state_b.as_deref(),
    )?;
    match synthesize_distinguishing(&loaded.left, &loaded.right) {
        Ok(formula) => {
            let text = render_formula(&formula);
            let holds_left = evaluate(&formula, &loaded.left.graph, &loaded.left.start)?;
            let holds_right = evaluate(&formula, &loaded.right.graph, &loaded.right.start)?;
            match args.format {
                Format::Structured => {
                    let doc = json!({
                        "command": "formula",
                        "bisimilar": false,
                        "formula": text,
                        "holds_left": holds_left,
                        "holds_right": holds_right,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc)?);
                }
                Format::Human => println!("{text}"),
            }
            Ok(1)
        }
        Err(FormulaError::Bisimilar) => {
            match args.format {
                Format::Structured => {
                    let doc = json!({
                        "command": "formula",
                        "bisimilar": true,
                        "formula": null,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc)?);
                }
                Format::Human => {
                    println!("the designated states are timed bisimilar, nothing to tell apart");
                }
            }
            Ok(0)
        }
        Err(FormulaError::NotInitial) => {
            bail!("formula synthesis is only defined for the initial states")
        }
        Err(err) => bail!("synthesis failed: {err}"),
    }
}

fn run_hierarchy(args: &HierarchyArgs) -> Result<u8> {
    let loaded = load_pair(
        &args.automaton_a,
        &args.automaton_b,
        args.state_a.as_deref(),
        args.state_b.as_deref(),
    )?;
    let report = relations::check_hierarchy(&loaded.left, &loaded.right);
    match args.format {
        Format::Structured => {
            let doc = json!({
                "command": "hierarchy",
                "report": report,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Human => {
            for (name, related) in &report.verdicts {
                println!(
                    "{name}: {}",
                    if *related { "related" } else { "not related" }
                );
            }
            if report.violations.is_empty() {
                println!("containment chain: consistent");
            } else {
                for v in &report.violations {
                    println!("VIOLATION: {v}");
                }
            }
        }
    }
    Ok(u8::from(!report.violations.is_empty()))
}
