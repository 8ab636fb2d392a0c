//! `jtlab`: certificate-printing front end for the jtlab library.
//!
//! Exit codes: 0 success, 2 bad input, 3 internal invariant violated,
//! 4 tolerance not reached (the bracket or report is still printed).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use jtlab::completion::complete;
use jtlab::dual::{dual_norm, DualBracket, DualOptions};
use jtlab::norm::{norm_bruteforce_capped, DEFAULT_FAMILY_CAP};
use jtlab::probe::{
    check_oracle, default_lambdas, flat_segment_witness, kadec_pattern_witness, rho,
    CanonicalOracle, NormOracle, PerturbedOracle,
};
use jtlab::scalar::{format_ratio, parse_rational};
use jtlab::sigma_q::{kurepa_descent, named_labeling, parse_support, reduce_and_norm};
use jtlab::tree::{enumerate_segments, mirsky_cover, parse_tree_text, TreeJson};
use jtlab::{
    norm_dp, Error, NodeId, RatCertificate, RatFunctional, RatVector, SegmentFamily, Tree,
};

const BRUTEFORCE_LIMIT: usize = 10;
const DEFAULT_DESCENT_BUDGET: usize = 64;
const ORACLE_SANITY_SAMPLES: usize = 4;

#[derive(Parser)]
#[command(
    name = "jtlab",
    version,
    about = "Norms and dual norms on James tree spaces over finite trees"
)]
struct Cli {
    /// Bracket width / overlap tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Iteration budget (dual solves for dualnorm and probe, sampled
    /// extensions per step for the σ′Q descent).
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for sampled checks; JTLAB_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProbeKind {
    Flat,
    Kadec,
    Rho,
}

#[derive(Subcommand)]
enum Command {
    /// Exact norm of a vector, with a maximizing segment family.
    Norm { tree: PathBuf, vector: PathBuf },
    /// Certified bracket for the dual norm of a functional.
    Dualnorm { tree: PathBuf, functional: PathBuf },
    /// Flat-segment, unit-distance and ρ probes.
    Probe {
        tree: PathBuf,
        /// Node `t`; for rho the initial segment is `[0,t]`, or `∅` if omitted.
        #[arg(long)]
        node: Option<usize>,
        #[arg(long, value_enum)]
        kind: ProbeKind,
        /// `canonical` or `perturbed:ε`.
        #[arg(long, default_value = "canonical")]
        oracle: String,
        /// Number of successors used by the kadec probe (default: all).
        #[arg(long)]
        k: Option<usize>,
    },
    /// Height, level antichain cover, segment count and completion size.
    Analyze { tree: PathBuf },
    /// The completed tree of initial segments.
    Complete { tree: PathBuf },
    /// Norms on σ′Q supports, or the bounded descent.
    Sigmaq {
        /// Support file of `seq value` lines.
        #[arg(long, conflicts_with = "descent")]
        support: Option<PathBuf>,
        #[arg(long)]
        descent: bool,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// `length`, `denominator` or `height`.
        #[arg(long, default_value = "length")]
        labeling: String,
        #[arg(long, default_value = "0")]
        lo: String,
        #[arg(long, default_value = "1")]
        hi: String,
    },
}

/// A failed run, carrying its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            msg: msg.into(),
        }
    }

    fn invariant(msg: impl Into<String>) -> Self {
        Failure {
            code: 3,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) | Error::Certificate(_) => Failure::invariant(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

type Outcome = Result<(String, u8), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_tree(path: &Path) -> Result<Tree, Failure> {
    parse_tree_text(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_coefficients(path: &Path, tree: &Tree) -> Result<RatVector, Failure> {
    let v = RatVector::parse_text(&read(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    v.validate(tree)?;
    Ok(v)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn family_text(family: &SegmentFamily) -> String {
    serde_json::to_string(family).expect("serializable")
}

fn coefficients_text(pairs: impl Iterator<Item = (NodeId, String)>) -> String {
    let parts: Vec<String> = pairs.map(|(t, v)| format!("{t}:{v}")).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" ")
    }
}

fn budget_or(cli: &Cli, default: usize) -> Result<usize, Failure> {
    match cli.budget {
        Some(0) => Err(Failure::input("--budget must be positive")),
        Some(b) => Ok(b),
        None => Ok(default),
    }
}

fn dual_options(cli: &Cli) -> Result<DualOptions, Failure> {
    Ok(DualOptions {
        tol: cli.tol,
        max_iter: budget_or(cli, DualOptions::default().max_iter)?,
    })
}

fn seed(cli: &Cli) -> Result<u64, Failure> {
    match std::env::var("JTLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::input(format!("JTLAB_SEED={s} is not an integer"))),
        Err(_) => Ok(cli.seed),
    }
}

fn cmd_norm(cli: &Cli, tree: &Path, vector: &Path) -> Outcome {
    let tree = read_tree(tree)?;
    let f = read_coefficients(vector, &tree)?;
    let cert: RatCertificate = norm_dp(&tree, &f)?;
    if !cert.self_check(&tree, &f)? {
        return Err(Failure::invariant(
            "DP family does not attain the reported value",
        ));
    }
    let cross_checked = tree.len() <= BRUTEFORCE_LIMIT;
    if cross_checked {
        let brute = norm_bruteforce_capped(&tree, &f, DEFAULT_FAMILY_CAP)?;
        if brute.norm_sq != cert.norm_sq {
            return Err(Failure::invariant(format!(
                "DP gives {} but enumeration gives {}",
                format_ratio(&cert.norm_sq),
                format_ratio(&brute.norm_sq)
            )));
        }
    }
    let out = match cli.format {
        Format::Json => to_json(&json!({ "certificate": cert, "crossChecked": cross_checked })),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "normSq {}", cert.norm_sq);
            let _ = writeln!(s, "norm {}", cert.norm());
            let _ = writeln!(s, "family {}", family_text(&cert.family));
            let _ = writeln!(
                s,
                "crossCheck {}",
                if cross_checked {
                    "bruteforce ok"
                } else {
                    "skipped"
                }
            );
            s
        }
    };
    Ok((out, 0))
}

fn bracket_text(b: &DualBracket) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "bracket [{}, {}]", b.lower, b.upper);
    let _ = writeln!(s, "lowerExact {}", format_ratio(&b.lower_exact));
    let _ = writeln!(s, "upperExact {}", format_ratio(&b.upper_exact));
    let _ = writeln!(
        s,
        "tolerance {}",
        if b.tolerance_met { "met" } else { "unmet" }
    );
    let _ = writeln!(s, "iterations {}", b.iterations);
    let _ = writeln!(s, "families {}", b.families_used);
    let _ = writeln!(
        s,
        "witness {}",
        coefficients_text(b.witness.iter().map(|(t, v)| (t, format_ratio(v))))
    );
    let _ = writeln!(s, "terms {}", b.decomposition.len());
    for term in &b.decomposition {
        let weights: Vec<String> = term.weights.iter().map(format_ratio).collect();
        let _ = writeln!(
            s,
            "term {} weights {} bound {}",
            family_text(&term.family),
            weights.join(","),
            format_ratio(&term.weight_norm_bound)
        );
    }
    let _ = writeln!(
        s,
        "residual {}",
        coefficients_text(b.residual.iter().map(|(t, v)| (t, format_ratio(v))))
    );
    s
}

fn cmd_dualnorm(cli: &Cli, tree: &Path, functional: &Path) -> Outcome {
    let opts = dual_options(cli)?;
    let tree = read_tree(tree)?;
    let c: RatFunctional = read_coefficients(functional, &tree)?.as_functional();
    let b = dual_norm(&tree, &c, &opts)?;
    b.verify(&tree, &c)
        .map_err(|e| Failure::invariant(format!("certificate rejected: {e}")))?;
    let out = match cli.format {
        Format::Json => to_json(&b),
        Format::Text => bracket_text(&b),
    };
    Ok((out, if b.tolerance_met { 0 } else { 4 }))
}

fn parse_oracle(name: &str, opts: DualOptions) -> Result<Box<dyn NormOracle>, Failure> {
    if name == "canonical" {
        return Ok(Box::new(CanonicalOracle { opts }));
    }
    let eps = name
        .strip_prefix("perturbed:")
        .and_then(|e| e.parse::<f64>().ok())
        .ok_or_else(|| Failure::input(format!("unknown oracle {name}")))?;
    Ok(Box::new(PerturbedOracle::new(eps, opts)?))
}

fn cmd_probe(
    cli: &Cli,
    tree: &Path,
    node: Option<usize>,
    kind: ProbeKind,
    oracle: &str,
    k: Option<usize>,
) -> Outcome {
    let opts = dual_options(cli)?;
    let tree = read_tree(tree)?;
    let oracle = parse_oracle(oracle, opts)?;
    let node = match node {
        Some(id) => {
            let t = NodeId(id);
            tree.check(t)?;
            Some(t)
        }
        None => None,
    };
    let need_node = || node.ok_or_else(|| Failure::input("--node is required for this probe"));

    let sanity = check_oracle(
        oracle.as_ref(),
        &tree,
        ORACLE_SANITY_SAMPLES,
        seed(cli)?,
        cli.tol,
    )?;
    if !sanity.passed() {
        return Err(Failure::invariant(format!(
            "oracle {} failed sanity sampling: {sanity:?}",
            oracle.description()
        )));
    }

    let (report, summary, code) = match kind {
        ProbeKind::Flat => {
            let r = flat_segment_witness(&tree, need_node()?, oracle.as_ref(), cli.tol)?;
            let w = &r.witness;
            let mut s = String::new();
            let _ = writeln!(
                s,
                "verdict {}",
                if r.gap <= r.tol {
                    "FLAT"
                } else {
                    "INCONCLUSIVE"
                }
            );
            let _ = writeln!(s, "oracle {}", r.oracle);
            let _ = writeln!(s, "successors {} {}", w.t1, w.t2);
            let _ = writeln!(s, "normT1 [{}, {}]", w.norm_t1.lo, w.norm_t1.hi);
            let _ = writeln!(s, "normT2 [{}, {}]", w.norm_t2.lo, w.norm_t2.hi);
            let _ = writeln!(
                s,
                "normMidpoint [{}, {}]",
                w.norm_midpoint.lo, w.norm_midpoint.hi
            );
            let _ = writeln!(s, "gap {}", r.gap);
            (serde_json::to_value(&r), s, 0)
        }
        ProbeKind::Kadec => {
            let t = need_node()?;
            let k = k.unwrap_or(tree.children(t).len());
            let r = kadec_pattern_witness(&tree, t, k, &default_lambdas(k), cli.tol)?;
            let mut s = String::new();
            let _ = writeln!(s, "{}", r.summary);
            for c in &r.isometry {
                let lambda: Vec<String> = c.lambda.iter().map(format_ratio).collect();
                let _ = writeln!(
                    s,
                    "isometry lambda {} expected {} norm [{}, {}]",
                    lambda.join(","),
                    c.expected,
                    c.norm.lo,
                    c.norm.hi
                );
            }
            for d in &r.distances {
                let _ = writeln!(s, "distance {} [{}, {}]", d.successor, d.norm.lo, d.norm.hi);
            }
            let _ = writeln!(s, "maxError {}", r.max_error);
            let code = if r.certified { 0 } else { 4 };
            (serde_json::to_value(&r), s, code)
        }
        ProbeKind::Rho => {
            let s_set: BTreeSet<NodeId> = node.map_or_else(BTreeSet::new, |t| {
                tree.path_from_root(t).into_iter().collect()
            });
            let r = rho(&tree, &s_set, oracle.as_ref())?;
            let mut s = String::new();
            let _ = writeln!(s, "rho [{}, {}]", r.value.lo, r.value.hi);
            let _ = writeln!(s, "oracle {}", r.oracle);
            let _ = writeln!(s, "candidates {}", r.candidates);
            let _ = writeln!(s, "argmin [{},{}]", r.argmin.bottom, r.argmin.top);
            (serde_json::to_value(&r), s, 0)
        }
    };
    let out = match cli.format {
        Format::Json => to_json(&report.expect("serializable")),
        Format::Text => summary,
    };
    Ok((out, code))
}

fn cmd_analyze(cli: &Cli, tree: &Path) -> Outcome {
    let tree = read_tree(tree)?;
    let cover = mirsky_cover(&tree);
    cover
        .verify(&tree)
        .map_err(|e| Failure::invariant(format!("level cover invalid: {e}")))?;
    let segments = enumerate_segments(&tree).len();
    let completion = complete(&tree).len();
    let out = match cli.format {
        Format::Json => to_json(&json!({
            "nodes": tree.len(),
            "roots": tree.roots(),
            "height": tree.height(),
            "antichains": cover.classes,
            "segments": segments,
            "completionSize": completion,
        })),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "nodes {}", tree.len());
            let _ = writeln!(s, "roots {}", tree.roots().len());
            let _ = writeln!(s, "height {}", tree.height());
            let _ = writeln!(s, "antichains {}", cover.classes.len());
            for (i, class) in cover.classes.iter().enumerate() {
                let ids: Vec<String> = class.iter().map(|t| t.to_string()).collect();
                let _ = writeln!(s, "antichain {i} {}", ids.join(","));
            }
            let _ = writeln!(s, "segments {segments}");
            let _ = writeln!(s, "completionSize {completion}");
            s
        }
    };
    Ok((out, 0))
}

fn cmd_complete(cli: &Cli, tree: &Path) -> Outcome {
    let completed = complete(&read_tree(tree)?);
    let out = match cli.format {
        Format::Text => completed.to_text(),
        Format::Json => to_json(&json!({
            "baseNodes": completed.base.len(),
            "segments": completed.segments,
            "tree": TreeJson::from(&completed.tree),
        })),
    };
    Ok((out, 0))
}

fn cmd_sigmaq(
    cli: &Cli,
    support: Option<&Path>,
    descent: bool,
    depth: usize,
    labeling: &str,
    lo: &str,
    hi: &str,
) -> Outcome {
    if let Some(path) = support {
        let support = parse_support(&read(path)?)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let r = reduce_and_norm(&support)?;
        let out = match cli.format {
            Format::Json => to_json(&json!({
                "certificate": r.certificate,
                "segments": r.segments,
                "reducedNodes": r.reduced.node_map,
                "reducedParents": r.reduced.tree.parents(),
            })),
            Format::Text => {
                let mut s = String::new();
                let _ = writeln!(s, "normSq {}", r.certificate.norm_sq);
                let _ = writeln!(s, "norm {}", r.certificate.norm());
                for seg in &r.segments {
                    let _ = writeln!(s, "segment {} .. {}", seg.bottom, seg.top);
                }
                let _ = writeln!(s, "reducedNodes {}", r.reduced.tree.len());
                for (i, (seq, p)) in r
                    .reduced
                    .node_map
                    .iter()
                    .zip(r.reduced.tree.parents())
                    .enumerate()
                {
                    let parent = p.map_or("-".to_string(), |p| p.to_string());
                    let _ = writeln!(s, "node {i} {parent} {seq}");
                }
                s
            }
        };
        return Ok((out, 0));
    }
    if !descent {
        return Err(Failure::input("sigmaq needs --support FILE or --descent"));
    }
    let label = named_labeling(labeling)?;
    let lo = parse_rational(lo)?;
    let hi = parse_rational(hi)?;
    let budget = budget_or(cli, DEFAULT_DESCENT_BUDGET)?;
    let r = kurepa_descent(&label, depth, (&lo, &hi), budget)?;
    r.verify()
        .map_err(|e| Failure::invariant(format!("descent chain invalid: {e}")))?;
    let out = match cli.format {
        Format::Json => to_json(&r),
        Format::Text => {
            let mut s = String::new();
            let labels: Vec<String> = r.labels.iter().map(|l| l.to_string()).collect();
            let _ = writeln!(s, "labels {}", labels.join(","));
            for (i, (t, q)) in r.chain.iter().zip(&r.bounds).enumerate() {
                let _ = writeln!(s, "step {} t {} q {}", i + 1, t, format_ratio(q));
            }
            let _ = writeln!(s, "semantics {}", r.semantics);
            s
        }
    };
    Ok((out, 0))
}

fn run(cli: &Cli) -> Outcome {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure::input("--tol must be positive"));
    }
    match &cli.command {
        Command::Norm { tree, vector } => cmd_norm(cli, tree, vector),
        Command::Dualnorm { tree, functional } => cmd_dualnorm(cli, tree, functional),
        Command::Probe {
            tree,
            node,
            kind,
            oracle,
            k,
        } => cmd_probe(cli, tree, *node, *kind, oracle, *k),
        Command::Analyze { tree } => cmd_analyze(cli, tree),
        Command::Complete { tree } => cmd_complete(cli, tree),
        Command::Sigmaq {
            support,
            descent,
            depth,
            labeling,
            lo,
            hi,
        } => cmd_sigmaq(cli, support.as_deref(), *descent, *depth, labeling, lo, hi),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("jtlab: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
