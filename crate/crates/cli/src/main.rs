use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clab_core::special::{
    is_difference_term, is_kiss_term, lipparini, search_difference_term, verify_maltsev_tree,
    MaltsevTree, TermFamily, TermVerdict,
};
use clab_core::suite::{parse_congruence, read_file, run_suite, RunOptions, SuiteConfig};
use clab_core::{Context, Error, FiniteAlgebra, Limits, Term};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "clab",
    version,
    about = "Commutators, two-dimensional relations and special terms of finite algebras"
)]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Largest power A^k any computation may build.
    #[arg(long, global = true, env = "CLAB_MAX_POWER")]
    max_power: Option<u128>,

    /// Seed for sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PairArgs {
    /// Algebra file.
    algebra: PathBuf,
    /// Congruence as blocks ("0,2|1,3") or a lattice index.
    alpha: String,
    beta: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum TermKind {
    Difference,
    Kiss,
    MaltsevTree,
}

#[derive(Subcommand)]
enum Command {
    /// List the congruence lattice.
    Con { algebra: PathBuf },
    /// Compute [α,β] with the δ iteration.
    Commutator {
        #[command(flatten)]
        pair: PairArgs,
        /// Also compute the hypercommutator.
        #[arg(long)]
        hyper: bool,
    },
    /// Compute M*(α,β).
    Mstar {
        #[command(flatten)]
        pair: PairArgs,
        /// Print the size of every gluing stage.
        #[arg(long)]
        stages: bool,
    },
    /// Verify a difference term, Kiss term or Maltsev-tree term family.
    CheckTerm {
        kind: TermKind,
        algebra: PathBuf,
        /// Term file or inline JSON term; for maltsev-tree, the tree file.
        term: String,
        /// Term family file, required for maltsev-tree.
        family: Option<PathBuf>,
        /// Also check quotients and subalgebras.
        #[arg(long)]
        variety_level: bool,
    },
    /// Build the Kiss term q(x,y,z,w) = p(p(x,z,z), p(y,w,z), z) from p.
    Lipparini {
        /// Term file or inline JSON term.
        term: String,
        /// Verify p and q on this algebra.
        #[arg(long)]
        check: Option<PathBuf>,
    },
    /// Search for a difference term by increasing depth.
    SearchTerm {
        algebra: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
    },
    /// Run a suite config.
    Verify {
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Record wall time per check.
        #[arg(long)]
        timing: bool,
    },
}

/// What a command produced: the same content as JSON and as text.
struct Output {
    value: Value,
    text: String,
    code: u8,
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::SizeBoundExceeded { .. } => 3,
        _ => 2,
    }
}

fn load_algebra(path: &Path) -> Result<FiniteAlgebra, Error> {
    FiniteAlgebra::from_json(&read_file(path)?)
}

fn load_term(arg: &str) -> Result<Term, Error> {
    if arg.trim_start().starts_with('[') {
        Term::parse_json(arg)
    } else {
        Term::parse_json(&read_file(Path::new(arg))?)
    }
}

fn cmd_con(ctx: &Context) -> Result<Output, Error> {
    let lat = ctx.lattice()?;
    let covers = lat.covers();
    let mut text = format!("{}: {} congruences\n", ctx.algebra().name(), lat.len());
    for (i, c) in lat.congruences.iter().enumerate() {
        let up: Vec<String> = covers
            .iter()
            .filter(|(a, _)| *a == i)
            .map(|(_, b)| b.to_string())
            .collect();
        let _ = writeln!(
            text,
            "{i:>3}  {c:<24} covered by: {}",
            if up.is_empty() {
                "-".into()
            } else {
                up.join(" ")
            }
        );
    }
    let value = json!({
        "algebra": ctx.algebra().name(),
        "congruences": lat.congruences,
        "covers": covers,
    });
    Ok(Output {
        value,
        text,
        code: 0,
    })
}

fn cmd_commutator(ctx: &Context, alpha: &str, beta: &str, hyper: bool) -> Result<Output, Error> {
    let a = parse_congruence(ctx, alpha)?;
    let b = parse_congruence(ctx, beta)?;
    let trace = ctx.trace(&a, &b)?;
    let mut text = format!("α = {a}\nβ = {b}\n");
    for (i, s) in trace.stages.iter().enumerate() {
        let xs: Vec<String> = s.x.iter().map(|(p, q)| format!("({p},{q})")).collect();
        let _ = writeln!(text, "X{} = {{{}}}", i + 1, xs.join(" "));
        let _ = writeln!(text, "δ{} = {}", i + 1, s.delta);
    }
    let _ = writeln!(text, "[α,β] = {}", trace.result);
    let mut value = serde_json::to_value(&*trace).expect("trace serializes");
    if hyper {
        let h = ctx.hypercommutator(&a, &b)?;
        let _ = writeln!(text, "[α,β]_H = {h}");
        value["hypercommutator"] = serde_json::to_value(&h).expect("congruence serializes");
    }
    Ok(Output {
        value,
        text,
        code: 0,
    })
}

fn cmd_mstar(ctx: &Context, alpha: &str, beta: &str, stages: bool) -> Result<Output, Error> {
    let a = parse_congruence(ctx, alpha)?;
    let b = parse_congruence(ctx, beta)?;
    let st = ctx.mstar_stages(&a, &b)?;
    let r = ctx.r(&a, &b);
    let equals_r = st.fixpoint == r;
    let mut text = format!(
        "M*({a}, {b}): {} tuples, |R| = {}, equalsR={equals_r}\n",
        st.fixpoint.len(),
        r.len()
    );
    let mut value = json!({
        "alpha": a,
        "beta": b,
        "size": st.fixpoint.len(),
        "r_size": r.len(),
        "equalsR": equals_r,
        "tuples": st.fixpoint.to_json(),
    });
    if stages {
        let sizes = st.stage_sizes();
        let _ = writeln!(
            text,
            "stages: {}",
            sizes
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" -> ")
        );
        value["stages"] = json!(sizes);
    }
    for m in st.fixpoint.iter() {
        let _ = writeln!(text, "{m}");
    }
    Ok(Output {
        value,
        text,
        code: 0,
    })
}

fn verdict_output(what: &str, v: &TermVerdict) -> Output {
    let mut text = format!(
        "{what} {}: {} (checked on {})\n",
        v.term,
        if v.holds { "holds" } else { "FAILS" },
        v.checked_on.join(", ")
    );
    for f in &v.failures {
        let _ = writeln!(
            text,
            "  {}",
            serde_json::to_string(f).expect("failure serializes")
        );
    }
    Output {
        value: serde_json::to_value(v).expect("verdict serializes"),
        text,
        code: if v.holds { 0 } else { 1 },
    }
}

fn cmd_check_term(
    alg: &FiniteAlgebra,
    limits: &Limits,
    kind: TermKind,
    term: &str,
    family: Option<&Path>,
) -> Result<Output, Error> {
    match kind {
        TermKind::Difference => Ok(verdict_output(
            "difference term",
            &is_difference_term(alg, &load_term(term)?, limits)?,
        )),
        TermKind::Kiss => Ok(verdict_output(
            "Kiss term",
            &is_kiss_term(alg, &load_term(term)?, limits)?,
        )),
        TermKind::MaltsevTree => {
            let tree = MaltsevTree::from_json(&read_file(Path::new(term))?)?;
            let family = family
                .ok_or_else(|| Error::Config("maltsev-tree needs a term family file".into()))?;
            let fam = TermFamily::from_json(&read_file(family)?)?;
            let v = verify_maltsev_tree(alg, &tree, &fam)?;
            let mut text = format!(
                "Maltsev tree on {}: {} ({} identity instances)\n",
                alg.name(),
                if v.holds { "holds" } else { "FAILS" },
                v.checked
            );
            for f in &v.failures {
                let _ = writeln!(
                    text,
                    "  {}",
                    serde_json::to_string(f).expect("failure serializes")
                );
            }
            Ok(Output {
                value: serde_json::to_value(&v).expect("verdict serializes"),
                text,
                code: if v.holds { 0 } else { 1 },
            })
        }
    }
}

fn cmd_lipparini(term: &str, check: Option<&Path>, limits: &Limits) -> Result<Output, Error> {
    let p = load_term(term)?;
    let q = lipparini(&p)?;
    let mut text = format!("{q}\n");
    let mut value = json!({ "p": p, "q": q });
    let mut code = 0;
    if let Some(path) = check {
        let alg = load_algebra(path)?;
        let pv = is_difference_term(&alg, &p, limits)?;
        let qv = is_kiss_term(&alg, &q, limits)?;
        let _ = writeln!(
            text,
            "p is a difference term on {}: {}",
            alg.name(),
            pv.holds
        );
        let _ = writeln!(text, "q is a Kiss term on {}: {}", alg.name(), qv.holds);
        if pv.holds && !qv.holds {
            code = 1;
        }
        value["p_verdict"] = serde_json::to_value(&pv).expect("verdict serializes");
        value["q_verdict"] = serde_json::to_value(&qv).expect("verdict serializes");
    }
    Ok(Output { value, text, code })
}

fn cmd_search(ctx: &Context, max_depth: usize) -> Result<Output, Error> {
    let r = search_difference_term(ctx, max_depth)?;
    let text = match &r.term {
        Some(t) => format!(
            "found {t} at depth {} ({} distinct functions)\n",
            r.depth, r.distinct
        ),
        None => format!(
            "no difference term up to depth {} ({} distinct functions)\n",
            r.depth, r.distinct
        ),
    };
    let code = if r.term.is_some() { 0 } else { 1 };
    Ok(Output {
        value: serde_json::to_value(&r).expect("result serializes"),
        text,
        code,
    })
}

fn cmd_verify(config: &Path, limits: &Limits, options: &RunOptions) -> Result<Output, Error> {
    let config = SuiteConfig::load(config)?;
    let out = run_suite(&config, limits, options);
    let mut text = out.summary_table();
    for r in out.reports.iter().filter(|r| r.failed()) {
        let _ = writeln!(
            text,
            "FAIL {} on {} ({}, {}){}",
            r.check,
            r.algebra,
            r.alpha,
            r.beta,
            r.reason
                .as_ref()
                .map(|s| format!(": {s}"))
                .unwrap_or_default()
        );
        for w in &r.witnesses {
            let _ = writeln!(text, "  witness: {}", w.note);
            for f in &w.facts {
                let _ = writeln!(
                    text,
                    "    {}",
                    serde_json::to_string(f).expect("fact serializes")
                );
            }
        }
    }
    let code = out.exit_code() as u8;
    Ok(Output {
        value: serde_json::to_value(&out).expect("outcome serializes"),
        text,
        code,
    })
}

fn run(cli: &Cli) -> Result<Output, Error> {
    let mut limits = Limits::default();
    if let Some(p) = cli.max_power {
        limits.max_power = p;
    }
    if let Some(s) = cli.seed {
        limits.seed = s;
    }
    let context = |path: &Path| -> Result<Context, Error> {
        Ok(Context::new(load_algebra(path)?, limits.clone()))
    };
    match &cli.command {
        Command::Con { algebra } => cmd_con(&context(algebra)?),
        Command::Commutator { pair, hyper } => {
            cmd_commutator(&context(&pair.algebra)?, &pair.alpha, &pair.beta, *hyper)
        }
        Command::Mstar { pair, stages } => {
            cmd_mstar(&context(&pair.algebra)?, &pair.alpha, &pair.beta, *stages)
        }
        Command::CheckTerm {
            kind,
            algebra,
            term,
            family,
            variety_level,
        } => {
            let mut limits = limits.clone();
            limits.variety_level = *variety_level;
            cmd_check_term(
                &load_algebra(algebra)?,
                &limits,
                *kind,
                term,
                family.as_deref(),
            )
        }
        Command::Lipparini { term, check } => cmd_lipparini(term, check.as_deref(), &limits),
        Command::SearchTerm { algebra, max_depth } => cmd_search(&context(algebra)?, *max_depth),
        Command::Verify {
            config,
            jobs,
            timing,
        } => cmd_verify(
            config,
            &limits,
            &RunOptions {
                jobs: *jobs,
                timing: *timing,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&out.value).expect("value serializes")
                );
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "error": e.to_string() }));
            }
            eprintln!("clab: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
