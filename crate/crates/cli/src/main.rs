use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use permgrowth::perm::{parse_gens, split_gen_list};
use permgrowth::pipeline::{jukuju_run, molop_iterate, verify_report};
use permgrowth::structure::{
    alt_worst_pair_diameter, chain_diameter_bound, finbo_bound, molop_bound, schreier_bound_expr,
    structure_tree, tree_level_analysis, DiamBoundExpr,
};
use permgrowth::support::{
    commutator_witness, double_transposition_decomposition, supconj_witness, three_cycle_decomposition,
    COMMUTATOR_CAP,
};
use permgrowth::walks::{directed_diameter_pair, empirical_tv, mixing_bound, schreier_graph};
use permgrowth::{Error, GenSet, GrowthParams, Mode, Permutation};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "permgrowth", version, about = "Growth, diameter and mixing experiments in Sym(n) and Alt(n)")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, default_value = "desk")]
    mode: Mode,

    /// Element cap for exact set arithmetic and BFS.
    #[arg(long, global = true, env = "PERMGROWTH_CAP", default_value_t = permgrowth::DEFAULT_CAP)]
    cap: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Input {
    /// Comma-separated generators in cycle or image notation.
    #[arg(long)]
    gens: Option<String>,

    /// File with one generator per line; `#` starts a comment.
    #[arg(long = "in")]
    input: Option<PathBuf>,

    /// Degree, when it cannot be read off the generators.
    #[arg(long)]
    degree: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Cayley-graph diameters by BFS.
    Diam(Input),
    /// Empirical TV distance of the lazy walk on k-tuples, with the bound.
    Mixing {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Walk length; defaults to the mixing bound.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 4000)]
        trials: usize,
    },
    /// One growth-versus-descent run on A = S^radius (symmetrized).
    Growth {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        radius: usize,
        /// Independent runs with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        runs: u64,
    },
    /// Iterate the growth driver down to an instance diameter bound.
    Descend {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        runs: u64,
    },
    /// Structure tree and per-level analysis of a transitive group.
    Tree(Input),
    /// Commutator and cycle decompositions of one permutation.
    Decompose {
        #[arg(long)]
        perm: String,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Evaluate diameter and mixing bounds.
    Bounds {
        #[command(subcommand)]
        which: BoundCmd,
    },
}

#[derive(Subcommand)]
enum BoundCmd {
    Molop {
        #[arg(long)]
        n: usize,
        #[arg(long = "K", default_value_t = 1.0)]
        k: f64,
    },
    Finbo {
        #[arg(long)]
        n: usize,
        /// Degrees m_i of the alternating factors (5 or 6 are tabulated).
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
    },
    Schreier {
        #[arg(long)]
        quotient: u64,
        #[arg(long)]
        normal: u64,
    },
    Chain {
        #[arg(long, value_delimiter = ',')]
        diams: Vec<u64>,
    },
    Mixing {
        #[arg(long)]
        vertices: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
}

fn read_gens(input: &Input) -> anyhow::Result<GenSet> {
    let text = match (&input.gens, &input.input) {
        (Some(g), None) => g.clone(),
        (None, Some(path)) => {
            let raw = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            raw.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(",")
        }
        _ => return Err(Error::Parse("give exactly one of --gens or --in".into()).into()),
    };
    let items = split_gen_list(&text);
    if items.is_empty() {
        return Err(Error::Parse("empty generator list".into()).into());
    }
    let gens = parse_gens(&items, input.degree)?;
    Ok(GenSet::new(gens[0].degree(), gens)?)
}

fn bound_record(e: &DiamBoundExpr) -> Value {
    json!({
        "value": e.exact.as_ref().map(|v| v.to_string()),
        "ln_value": e.ln_value,
        "approx": e.as_f64(),
        "expr": e,
    })
}

fn run(cli: &Cli) -> anyhow::Result<Vec<Value>> {
    let params = |seed: u64| GrowthParams {
        seed,
        mode: cli.mode,
        cap: cli.cap,
        ..GrowthParams::default()
    };
    Ok(match &cli.command {
        Command::Diam(input) => {
            let a = read_gens(input)?;
            let d = directed_diameter_pair(&a, cli.cap)?;
            vec![json!({
                "degree": a.degree(),
                "generators": a.len(),
                "order": d.order,
                "diameter": d.undirected,
                "directed_diameter": d.directed,
            })]
        }
        Command::Mixing {
            input,
            k,
            eps,
            steps,
            trials,
        } => {
            let a = read_gens(input)?.symmetrize();
            let g = schreier_graph(&a, *k, cli.cap)?;
            if !g.is_connected() {
                return Err(Error::hypothesis_msg("the Schreier graph is not connected"));
            }
            let bound = mixing_bound(g.vertex_count(), g.valency(), *eps)?;
            let t = steps.unwrap_or(bound as usize);
            let rep = empirical_tv(&a, *k, t, *trials, cli.seed, cli.cap)?;
            let mut v = serde_json::to_value(&rep)?;
            v["bound"] = json!(bound);
            v["eps"] = json!(eps);
            vec![v]
        }
        Command::Growth { input, radius, runs } => {
            let s = read_gens(input)?.symmetrize();
            let ball = permgrowth::perm::power_set(&s, *radius, cli.cap)?;
            let a = GenSet::from_set(s.degree(), ball.iter(), 1)?;
            let out = parallel_runs(cli.seed, *runs, |seed| {
                let rep = jukuju_run(&a, &params(seed))?;
                let ver = verify_report(&rep, cli.cap)?;
                let mut v = serde_json::to_value(&rep)?;
                v["outcome"] = json!(rep.branch.name());
                v["verified"] = json!(ver.ok());
                Ok(v)
            })?;
            out
        }
        Command::Descend { input, runs } => {
            let s = read_gens(input)?;
            parallel_runs(cli.seed, *runs, |seed| {
                let rep = molop_iterate(&s, &params(seed))?;
                let mut v = serde_json::to_value(&rep)?;
                v["bound_holds"] = json!(rep.bound_holds());
                Ok(v)
            })?
        }
        Command::Tree(input) => {
            let a = read_gens(input)?;
            let t = structure_tree(&a)?;
            let an = tree_level_analysis(&a, &t)?;
            vec![json!({
                "degree": t.degree,
                "height": t.height(),
                "branching": t.branching(),
                "verified": t.verify(&a.non_identity()),
                "levels": t.levels.iter().map(|l| l.iter().map(|b| b.iter().map(|x| x + 1).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "analysis": an,
            })]
        }
        Command::Decompose { perm, degree } => {
            let g = Permutation::parse(perm, *degree)?;
            vec![decompose(&g)]
        }
        Command::Bounds { which } => {
            let v = match which {
                BoundCmd::Molop { n, k } => bound_record(&molop_bound(*n, *k)?),
                BoundCmd::Finbo { n, m, c } => bound_record(&finbo_bound(*n, m, &alt_worst_pair_diameter, *c)?),
                BoundCmd::Schreier { quotient, normal } => bound_record(&schreier_bound_expr(
                    DiamBoundExpr::value(*quotient, "quotient"),
                    DiamBoundExpr::value(*normal, "normal"),
                )),
                BoundCmd::Chain { diams } => bound_record(&chain_diameter_bound(diams)),
                BoundCmd::Mixing { vertices, d, eps } => json!({ "value": mixing_bound(*vertices, *d, *eps)? }),
            };
            vec![v]
        }
    })
}

fn cycles_string(ps: &[Permutation]) -> Vec<String> {
    ps.iter().map(Permutation::to_cycle_string).collect()
}

fn decompose(g: &Permutation) -> Value {
    let err = |e: Error| json!({ "error": e.to_string() });
    let supconj = supconj_witness(g).map_or_else(err, |h| {
        let c = permgrowth::perm::commutator(g, &h);
        json!({ "h": h.to_cycle_string(), "commutator": c.to_cycle_string(), "cycle_type": c.cycle_type() })
    });
    let three = three_cycle_decomposition(g)
        .map_or_else(err, |f| json!({ "count": f.len(), "factors": cycles_string(&f) }));
    let double = double_transposition_decomposition(g)
        .map_or_else(err, |f| json!({ "count": f.len(), "factors": cycles_string(&f) }));
    let comm = if g.degree() <= COMMUTATOR_CAP {
        commutator_witness(g).map_or_else(err, |(x, y)| json!({ "x": x.to_cycle_string(), "y": y.to_cycle_string() }))
    } else {
        json!({ "error": format!("commutator search is limited to degree <= {COMMUTATOR_CAP}") })
    };
    json!({
        "perm": g.to_cycle_string(),
        "degree": g.degree(),
        "cycle_type": g.cycle_type(),
        "even": g.is_even(),
        "supconj": supconj,
        "three_cycles": three,
        "double_transpositions": double,
        "commutator": comm,
    })
}

/// Independent seeds on separate threads; output order follows the seeds.
fn parallel_runs(
    seed: u64,
    runs: u64,
    f: impl Fn(u64) -> anyhow::Result<Value> + Sync,
) -> anyhow::Result<Vec<Value>> {
    if runs == 0 {
        return Err(anyhow!(Error::Domain("--runs must be positive".into())));
    }
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..runs).map(|i| scope.spawn(move || f(seed + i))).collect();
        handles.into_iter().map(|h| h.join().expect("run panicked")).collect()
    })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn emit(records: &[Value], format: Format) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            if let [one] = records {
                serde_json::to_writer_pretty(&mut out, one)?;
            } else {
                serde_json::to_writer_pretty(&mut out, records)?;
            }
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            // Nested fields (sets, traces, checks) only make sense in JSON.
            let keys: Vec<String> = match records.first() {
                Some(Value::Object(m)) => m
                    .iter()
                    .filter(|(_, v)| !v.is_object() && !v.is_array())
                    .map(|(k, _)| k.clone())
                    .collect(),
                _ => vec!["value".into()],
            };
            w.write_record(&keys)?;
            for r in records {
                let row: Vec<String> = keys.iter().map(|k| scalar(r.get(k).unwrap_or(&Value::Null))).collect();
                w.write_record(&row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Parse(_)) => 4,
        Some(err) if err.is_resource_limit() => 3,
        Some(_) => 2,
        None if e.downcast_ref::<std::io::Error>().is_some() => 4,
        None => 1,
    }
}

trait HypothesisMsg {
    fn hypothesis_msg(msg: &str) -> anyhow::Error;
}

impl HypothesisMsg for Error {
    fn hypothesis_msg(msg: &str) -> anyhow::Error {
        Error::Hypothesis(msg.into()).into()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli).and_then(|records| emit(&records, cli.format)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
