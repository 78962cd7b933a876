//! Command-line front end. `run` parses arguments, dispatches and returns
//! the process exit code.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand};
use num_bigint::BigUint;
use serde::Serialize;

use crate::antichain::{check_klym_with, min_chain_partition_with, width_with, EngineOptions};
use crate::certificate::{
    certificate_search, certified_width, gk_partition, theorem_bound, zigzag_certificate, CertificateStatus,
    CertificateVerdict,
};
use crate::combinatorics::{build_table, layer_profile, Family, GroundParams};
use crate::error::Error;
use crate::poset::{build_family, load_custom_poset, quotient_dag, PosetInstance, DEFAULT_ELEMENT_BUDGET};
use crate::report::{aligned, decimal, to_json, Format, TableReport};
use crate::sweep::{records_csv, records_json, records_text, run_sweep, SweepOptions, SweepPlan, SweepRange};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COUNTEREXAMPLE: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "ballwidth", version, about = "Exact widths of Hamming balls around a set in the Boolean lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sublayer sizes and heights (default format: csv)
    Table {
        #[command(flatten)]
        params: ParamArgs,
        /// Tabulate the sphere of this radius instead of the ball
        #[arg(long)]
        sphere: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact width with a maximum antichain
    Width(InstanceArgs),
    /// Check the LYM inequality for every antichain
    Klym(InstanceArgs),
    /// Certify that the largest layer is a maximum antichain
    Certify {
        #[command(flatten)]
        params: ParamArgs,
        /// Use the explicit zigzag construction instead of a flow search
        #[arg(long)]
        zigzag: bool,
        /// Require strict coverage off the largest layer (uniqueness)
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check every ball in a range of parameters
    Sweep(SweepArgs),
    /// Symmetric chains of the power set of [n], or a minimum chain partition of a ball
    Chains {
        /// Size of the ground set for the bracketing partition
        #[arg(short = 'n')]
        n: Option<u32>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        budgets: BudgetArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sphere-sum upper bound on the width, compared with the exact width
    Theorem {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        budgets: BudgetArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct ParamArgs {
    /// Size of the center set [p]
    #[arg(short = 'p')]
    p: Option<u32>,
    /// Number of far-side elements
    #[arg(short = 'q')]
    q: Option<u32>,
    /// Radius
    #[arg(short = 'r')]
    r: Option<u32>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
struct BudgetArgs {
    /// Largest poset handled by matching
    #[arg(long, default_value_t = crate::antichain::DEFAULT_MATCHING_BUDGET, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    budget: usize,
    /// Largest poset handled by min-flow
    #[arg(long, default_value_t = crate::antichain::DEFAULT_FLOW_BUDGET, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    flow_budget: usize,
    /// Largest poset that will be materialized
    #[arg(long, default_value_t = DEFAULT_ELEMENT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    element_budget: u64,
}

impl BudgetArgs {
    fn engine(&self) -> EngineOptions {
        EngineOptions {
            matching_budget: self.budget,
            flow_budget: self.flow_budget,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct InstanceArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Use the sphere of this radius instead of the ball
    #[arg(long)]
    sphere: Option<u32>,
    /// Read an explicit poset from a JSON file
    #[arg(long, conflicts_with_all = ["p", "q", "r", "sphere"])]
    custom_poset: Option<PathBuf>,
    #[command(flatten)]
    budgets: BudgetArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    #[arg(long)]
    p_max: Option<u32>,
    #[arg(long)]
    q_max: Option<u32>,
    #[arg(long)]
    r_max: Option<u32>,
    /// Only tuples with p + q at most this
    #[arg(long)]
    n_max: Option<u32>,
    /// Also sweep r > min(p, q), with longest-path heights and no certificates
    #[arg(long)]
    general: bool,
    /// Skip tuples already recorded in --out
    #[arg(long, requires = "out")]
    resume: bool,
    /// Worker threads (0: one per core)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Record elapsed_ms as 0 so reruns are byte-identical
    #[arg(long)]
    no_timing: bool,
    /// Do not test whether the largest layer is the only maximum antichain
    #[arg(long)]
    skip_uniqueness: bool,
    #[command(flatten)]
    budgets: BudgetArgs,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Record file, one JSON object per line
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure of a command, mapped to an exit code.
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(String, i32), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl ParamArgs {
    fn require(&self) -> Result<GroundParams, Failure> {
        match (self.p, self.q, self.r) {
            (Some(p), Some(q), Some(r)) => Ok(GroundParams::new(p, q, r)?),
            _ => Err(usage("-p, -q and -r are required")),
        }
    }

    /// Like `require`, but `-r` may be omitted when a sphere radius is given.
    fn with_sphere(&self, sphere: Option<u32>) -> Result<(GroundParams, Family), Failure> {
        match (sphere, self.p, self.q) {
            (Some(m), Some(p), Some(q)) => Ok((GroundParams::new(p, q, self.r.unwrap_or(m))?, Family::Sphere(m))),
            (Some(_), _, _) => Err(usage("-p and -q are required")),
            (None, _, _) => Ok((self.require()?, Family::Ball)),
        }
    }
}

fn pick(format: Option<Format>, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(usage(format!("format {} is not available for this command", f.name())))
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stdout, "{}", e.render());
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_USAGE
                    } else {
                        EXIT_OK
                    }
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
            return code;
        }
    };
    let out_path = match &cli.command {
        Command::Table { output, .. }
        | Command::Certify { output, .. }
        | Command::Chains { output, .. }
        | Command::Theorem { output, .. } => output.out.clone(),
        Command::Width(a) | Command::Klym(a) => a.output.out.clone(),
        Command::Sweep(_) => None,
    };
    match dispatch(cli.command, stderr) {
        Ok((report, code)) => {
            let written = match out_path {
                Some(path) => fs::write(&path, &report).map_err(|e| format!("{}: {e}", path.display())),
                None => stdout.write_all(report.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: cannot write report: {e}");
                return EXIT_USAGE;
            }
            code
        }
        Err(Failure::Usage(msg)) => {
            let e = Cli::command().error(ErrorKind::ValueValidation, msg);
            let _ = write!(stderr, "{}", e.render());
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Consistency(_) => EXIT_INTERNAL,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn dispatch(command: Command, stderr: &mut dyn Write) -> Outcome {
    match command {
        Command::Table { params, sphere, output } => {
            let (g, family) = params.with_sphere(sphere)?;
            let format = pick(output.format, Format::Csv, &[Format::Csv, Format::Json, Format::Tikz, Format::Text])?;
            Ok((TableReport::build(&g, family)?.render(format), EXIT_OK))
        }
        Command::Width(args) => width_command(&args),
        Command::Klym(args) => klym_command(&args),
        Command::Certify {
            params,
            zigzag,
            strict,
            output,
        } => certify_command(&params.require()?, zigzag, strict, &output),
        Command::Sweep(args) => sweep_command(&args, stderr),
        Command::Chains {
            n,
            params,
            budgets,
            output,
        } => chains_command(n, &params, &budgets, &output),
        Command::Theorem { params, budgets, output } => theorem_command(&params.require()?, &budgets, &output),
    }
}

struct Loaded {
    name: String,
    instance: PosetInstance,
}

fn load_instance(args: &InstanceArgs) -> Result<Loaded, Failure> {
    if let Some(path) = &args.custom_poset {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let instance = load_custom_poset(&text)?;
        return Ok(Loaded {
            name: path.display().to_string(),
            instance,
        });
    }
    let (g, family) = args.params.with_sphere(args.sphere)?;
    let name = match family {
        Family::Sphere(m) => format!("S_{m}[{},{}]", g.p, g.q),
        _ => g.to_string(),
    };
    let instance = build_family(&g, family, args.budgets.element_budget)?;
    Ok(Loaded { name, instance })
}

/// `{1,2,7}` for sets of a ball or sphere, the id for custom posets.
fn element_label(instance: &PosetInstance, a: usize) -> String {
    match (instance.element(a), instance.params()) {
        (Some(x), Some(g)) => set_label(&x.to_subset(g.p)),
        _ => a.to_string(),
    }
}

fn set_label(members: &[u32]) -> String {
    let parts: Vec<String> = members.iter().map(u32::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

#[derive(Serialize)]
struct WidthReport {
    instance: String,
    elements: usize,
    width: String,
    largest_layer_size: String,
    largest_layer_heights: Vec<u32>,
    antichain: Vec<String>,
}

fn width_command(args: &InstanceArgs) -> Outcome {
    let format = pick(args.output.format, Format::Text, &[Format::Csv, Format::Json, Format::Text])?;
    let loaded = load_instance(args)?;
    let inst = &loaded.instance;
    let (w, witness) = width_with(inst, &args.budgets.engine())?;
    let layers = inst.layers();
    let largest = layers.values().map(Vec::len).max().unwrap_or(0);
    let report = WidthReport {
        instance: loaded.name,
        elements: inst.len(),
        width: w.to_string(),
        largest_layer_size: largest.to_string(),
        largest_layer_heights: layers.iter().filter(|(_, v)| v.len() == largest).map(|(h, _)| *h).collect(),
        antichain: witness.elements.iter().map(|&a| element_label(inst, a)).collect(),
    };
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv => format!(
            "instance,elements,width,largest_layer_size\n{},{},{},{}\n",
            report.instance, report.elements, report.width, report.largest_layer_size
        ),
        _ => format!(
            "{}: {} elements, width {}, largest layer {} at height(s) {:?}\nmaximum antichain: {}\n",
            report.instance,
            report.elements,
            report.width,
            report.largest_layer_size,
            report.largest_layer_heights,
            report.antichain.join(" ")
        ),
    };
    Ok((text, EXIT_OK))
}

#[derive(Serialize)]
struct KlymReportDoc {
    instance: String,
    holds: bool,
    max_lym_sum: String,
    #[serde(serialize_with = "decimal")]
    scale: BigUint,
    witness: Vec<String>,
}

fn klym_command(args: &InstanceArgs) -> Outcome {
    let format = pick(args.output.format, Format::Text, &[Format::Json, Format::Text])?;
    let loaded = load_instance(args)?;
    let k = check_klym_with(&loaded.instance, &args.budgets.engine())?;
    let doc = KlymReportDoc {
        instance: loaded.name,
        holds: k.holds,
        max_lym_sum: k.max_lym_sum.to_string(),
        scale: k.scale,
        witness: k.witness.elements.iter().map(|&a| element_label(&loaded.instance, a)).collect(),
    };
    let text = match format {
        Format::Json => to_json(&doc),
        _ => format!(
            "{}: LYM inequality {}; largest LYM sum {} attained by {}\n",
            doc.instance,
            if doc.holds { "holds" } else { "fails" },
            doc.max_lym_sum,
            doc.witness.join(" ")
        ),
    };
    Ok((text, EXIT_OK))
}

#[derive(Serialize)]
struct CertifyDoc<'a> {
    p: u32,
    q: u32,
    r: u32,
    method: &'static str,
    #[serde(serialize_with = "decimal")]
    layer_size: BigUint,
    #[serde(flatten)]
    verdict: &'a CertificateVerdict,
}

fn certify_command(g: &GroundParams, zigzag: bool, strict: bool, output: &OutputArgs) -> Outcome {
    let format = pick(output.format, Format::Text, &[Format::Json, Format::Text])?;
    let (verdict, size, method) = if zigzag {
        let v = zigzag_certificate(g)?;
        let (_, size) = certified_width(g)?;
        (v, size, "zigzag")
    } else if strict {
        let (plain, size) = certified_width(g)?;
        if plain.status == CertificateStatus::NotApplicable {
            (plain, size, "flow-strict")
        } else {
            let table = build_table(g, Family::Ball);
            let dag = quotient_dag(g, &Family::Ball)?;
            let h = layer_profile(&table)?.largest_height();
            (certificate_search(&dag, &table, h, true)?, size, "flow-strict")
        }
    } else {
        let (v, size) = certified_width(g)?;
        (v, size, "flow")
    };
    let code = if verdict.status == CertificateStatus::Infeasible {
        EXIT_INFEASIBLE
    } else {
        EXIT_OK
    };
    let text = match format {
        Format::Json => to_json(&CertifyDoc {
            p: g.p,
            q: g.q,
            r: g.r,
            method,
            layer_size: size,
            verdict: &verdict,
        }),
        _ => {
            let mut s = format!("{g}: {} (largest layer {size})\n{}\n", verdict.status, verdict.diagnostics);
            if let Some(cert) = &verdict.certificate {
                let _ = writeln!(s, "target height {}", cert.target_height);
                for wp in &cert.profiles {
                    let path: Vec<String> = wp.profile.path.iter().map(|c| c.to_string()).collect();
                    let _ = writeln!(s, "{} x {}", wp.multiplicity, path.join(" -> "));
                }
            }
            s
        }
    };
    Ok((text, code))
}

fn sweep_command(args: &SweepArgs, stderr: &mut dyn Write) -> Outcome {
    let format = pick(args.format, Format::Text, &[Format::Csv, Format::Json, Format::Text])?;
    let fallback = args.n_max.map(|n| n.saturating_sub(1));
    let (Some(p_max), Some(q_max)) = (args.p_max.or(fallback), args.q_max.or(fallback)) else {
        return Err(usage("--p-max and --q-max (or --n-max) are required"));
    };
    let range = SweepRange {
        p_max,
        q_max,
        r_max: args.r_max,
        n_max: args.n_max,
        general: args.general,
    };
    let plan = SweepPlan {
        tuples: range.tuples()?,
        options: SweepOptions {
            engine: args.budgets.engine(),
            element_budget: args.budgets.element_budget,
            uniqueness: !args.skip_uniqueness,
            timing: !args.no_timing,
        },
        out: args.out.clone(),
        resume: args.resume,
        jobs: args.jobs,
    };
    let outcome = run_sweep(&plan)?;
    if format != Format::Text {
        let _ = writeln!(stderr, "{}", outcome.summary_line());
    }
    let text = match format {
        Format::Csv => records_csv(&outcome.records),
        Format::Json => records_json(&outcome),
        _ => records_text(&outcome),
    };
    let code = if outcome.has_counterexample() {
        EXIT_COUNTEREXAMPLE
    } else {
        EXIT_OK
    };
    Ok((text, code))
}

#[derive(Serialize)]
struct ChainsDoc {
    instance: String,
    count: usize,
    chains: Vec<Vec<String>>,
}

fn chains_command(n: Option<u32>, params: &ParamArgs, budgets: &BudgetArgs, output: &OutputArgs) -> Outcome {
    let format = pick(output.format, Format::Text, &[Format::Json, Format::Text])?;
    let doc = match n {
        Some(_) if params.p.is_some() || params.q.is_some() || params.r.is_some() => {
            return Err(usage("-n cannot be combined with -p, -q or -r"))
        }
        Some(n) => {
            let partition = gk_partition(n)?;
            let label = |mask: usize| set_label(&(1..=n).filter(|k| mask >> (k - 1) & 1 == 1).collect::<Vec<_>>());
            ChainsDoc {
                instance: format!("subsets of [{n}]"),
                count: partition.len(),
                chains: partition
                    .chains
                    .iter()
                    .map(|c| c.iter().map(|&m| label(m)).collect())
                    .collect(),
            }
        }
        None => {
            let g = params.require()?;
            let inst = build_family(&g, Family::Ball, budgets.element_budget)?;
            let partition = min_chain_partition_with(&inst, &budgets.engine())?;
            ChainsDoc {
                instance: g.to_string(),
                count: partition.len(),
                chains: partition
                    .chains
                    .iter()
                    .map(|c| c.iter().map(|&a| element_label(&inst, a)).collect())
                    .collect(),
            }
        }
    };
    let text = match format {
        Format::Json => to_json(&doc),
        _ => {
            let mut s = format!("{}: {} chains\n", doc.instance, doc.count);
            for chain in &doc.chains {
                s.push_str(&chain.join(" < "));
                s.push('\n');
            }
            s
        }
    };
    Ok((text, EXIT_OK))
}

#[derive(Serialize)]
struct TheoremDoc {
    p: u32,
    q: u32,
    r: u32,
    #[serde(serialize_with = "decimal")]
    bound: BigUint,
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    holds: Option<bool>,
}

fn theorem_command(g: &GroundParams, budgets: &BudgetArgs, output: &OutputArgs) -> Outcome {
    let format = pick(output.format, Format::Text, &[Format::Csv, Format::Json, Format::Text])?;
    let bound = theorem_bound(g)?;
    let total = build_table(g, Family::Ball).total();
    let width = if total <= BigUint::from(budgets.budget.min(budgets.element_budget as usize)) {
        let inst = build_family(g, Family::Ball, budgets.element_budget)?;
        Some(BigUint::from(width_with(&inst, &budgets.engine())?.0))
    } else {
        None
    };
    let doc = TheoremDoc {
        p: g.p,
        q: g.q,
        r: g.r,
        holds: width.as_ref().map(|w| *w <= bound),
        width: width.map(|w| w.to_string()),
        bound,
    };
    let text = match format {
        Format::Json => to_json(&doc),
        Format::Csv => format!(
            "p,q,r,bound,width,holds\n{},{},{},{},{},{}\n",
            doc.p,
            doc.q,
            doc.r,
            doc.bound,
            doc.width.clone().unwrap_or_default(),
            doc.holds.map(|h| h.to_string()).unwrap_or_default()
        ),
        _ => {
            let rows = vec![
                vec!["sphere-sum bound".to_string(), doc.bound.to_string()],
                vec![
                    "exact width".to_string(),
                    doc.width.clone().unwrap_or_else(|| "over budget".into()),
                ],
            ];
            format!("{g}\n{}", aligned(&rows))
        }
    };
    Ok((text, EXIT_OK))
}
