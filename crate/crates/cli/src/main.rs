//! jetkernel: command line surface over the kernel library. Commands read
//! and write the JSON documents from the json module; domain failures exit
//! with code 1 and a machine-readable error object on stderr, usage errors
//! exit with 2. Output files are written through a temp-and-rename so a
//! failing command never leaves a partial file behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use jetkernel_core::error::{KernelError, Result};
use jetkernel_core::factor::{
    decide_equivalence, embed_factorization, lift_plot, witness_d1, witness_general,
};
use jetkernel_core::formal::{
    classify_embedding, compose, is_formal_embedding, is_rectified, EmbeddingKind, FormalMorphism,
};
use jetkernel_core::hadamard::hadamard_expand;
use jetkernel_core::jets::{lift_jet_plot, project, prolong, JetSpace};
use jetkernel_core::json::{
    parse_rational, DecisionDoc, HadamardDoc, JetPointDoc, MorphismDoc, PairDoc, PolyDoc,
    ProPlotDoc, SpaceDoc, StepDoc, WeilDoc, WitnessDoc, WorkspaceDoc,
};
use jetkernel_core::selftest::{self, Fault};
use jetkernel_core::weil::{WeilAlgebra, DEFAULT_K_MAX};

#[derive(Parser)]
#[command(name = "jetkernel", version, about = "Exact kernel for Weil algebras, formal spaces, jets and plot factorizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weil algebra construction and inspection
    Weil {
        #[command(subcommand)]
        command: WeilCommand,
    },
    /// Formal morphism composition and classification
    Morphism {
        #[command(subcommand)]
        command: MorphismCommand,
    },
    /// Parameterized Hadamard expansion of a polynomial
    Hadamard(HadamardArgs),
    /// Jet spaces, prolongation, projection and plot lifting
    Jet {
        #[command(subcommand)]
        command: JetCommand,
    },
    /// Factorization pairs: lifting, embedding, witnesses, equivalence
    Factor {
        #[command(subcommand)]
        command: FactorCommand,
    },
    /// Run the seeded randomized suites over every component
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Write the result document to this file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the result document as JSON on stdout
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum WeilCommand {
    /// Build an algebra from a disk shape or an explicit presentation
    New {
        /// Number of variables; without --gens this is the disk dimension
        #[arg(long)]
        d: Option<usize>,
        /// Disk order for the generator-free form (default 1)
        #[arg(long)]
        k: Option<u32>,
        /// Generator expressions, semicolon separated or repeated
        #[arg(long, value_delimiter = ';')]
        gens: Vec<String>,
        /// Algebra name recorded in the document
        #[arg(long)]
        name: Option<String>,
        /// Bound for the nilpotency-order scan
        #[arg(long = "k-max")]
        k_max: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Load an algebra document and report its computed shape
    Info {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum MorphismCommand {
    /// Compose two morphisms from a document {"g": ..., "f": ...}
    Compose {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Validate a morphism document and classify it
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct HadamardArgs {
    /// Polynomial to expand
    #[arg(long)]
    f: String,
    /// Active variables, comma separated
    #[arg(long, value_delimiter = ',')]
    x: Vec<String>,
    /// Passive variables, comma separated
    #[arg(long, value_delimiter = ',')]
    y: Vec<String>,
    /// Expansion order
    #[arg(long)]
    order: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand)]
enum JetCommand {
    /// Prolong sections to a jet point: input {"sections", "x", "base", "k"?}
    Prolong {
        #[arg(long = "in")]
        input: PathBuf,
        /// Prolongation order; overrides the "k" field of the input
        #[arg(long)]
        level: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Drop a jet point one order
    Project {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Report jet space dimensions
    Dim {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Lift a compatible jet-system pro-plot through U x R^d
    Lift {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum FactorCommand {
    /// Factor a plot through its tautological Cartesian middle
    Lift {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Enlarge a pair's middle to a proper embedding, with the relating step
    Embed {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the witness span for the two pairs of a workspace document
    Witness {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Decide zig-zag equivalence of the two pairs of a workspace document
    Decide {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct SelftestArgs {
    /// Seed for the deterministic random suites
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Inject a defect to confirm the harness catches it
    #[arg(long, hide = true)]
    fault: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let obj = serde_json::json!({
                "error": { "code": e.code(), "message": e.to_string() }
            });
            eprintln!("{obj}");
            ExitCode::from(1)
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> KernelError {
    KernelError::invalid(format!("{}: {e}", path.display()))
}

fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let data = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&data).map_err(|e| io_error(path, std::io::Error::other(e)))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let stem = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{stem}.tmp"));
    fs::write(&tmp, contents).map_err(|e| io_error(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

/// Prints to stdout, treating a broken pipe as a normal early exit.
fn print_out(s: &str) {
    use std::io::Write;
    let mut out = std::io::stdout();
    if out.write_all(s.as_bytes()).is_err() || out.flush().is_err() {
        std::process::exit(0);
    }
}

/// Serializes the document, writes it out if requested, and prints either
/// the JSON or the text summary.
fn emit<T: Serialize>(doc: &T, text: String, output: &OutputArgs) -> Result<()> {
    let json = serde_json::to_string_pretty(doc)
        .map_err(|e| KernelError::invalid(format!("serialization: {e}")))?;
    if let Some(path) = &output.out {
        write_atomic(path, &format!("{json}\n"))?;
    }
    if output.json {
        print_out(&format!("{json}\n"));
    } else {
        print_out(&text);
    }
    Ok(())
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Weil { command } => run_weil(command)?,
        Command::Morphism { command } => run_morphism(command)?,
        Command::Hadamard(args) => run_hadamard(args)?,
        Command::Jet { command } => run_jet(command)?,
        Command::Factor { command } => run_factor(command)?,
        Command::Selftest(args) => return run_selftest(args),
    }
    Ok(ExitCode::SUCCESS)
}

fn algebra_report(a: &WeilAlgebra) -> String {
    let gens: Vec<String> = a.generators().iter().map(|g| g.to_string()).collect();
    let basis: Vec<String> = a.basis().iter().map(|m| m.to_string()).collect();
    format!(
        "algebra {}\nvars: {}\ngenerators: {}\nk: {}\ndim: {}\nbasis: {}\n",
        a.name(),
        a.vars().join(", "),
        gens.join(", "),
        a.k(),
        a.dim(),
        basis.join(", ")
    )
}

fn run_weil(command: WeilCommand) -> Result<()> {
    match command {
        WeilCommand::New { d, k, gens, name, k_max, output } => {
            let algebra = if gens.is_empty() {
                let d = d.ok_or_else(|| {
                    KernelError::invalid("give --d for a disk or --gens for a presentation")
                })?;
                let disk = WeilAlgebra::disk(d, k.unwrap_or(1));
                match name {
                    Some(n) => disk.with_name(n),
                    None => disk,
                }
            } else {
                if k.is_some() {
                    return Err(KernelError::invalid(
                        "--k sets the disk order; with --gens the order is computed",
                    ));
                }
                let doc = WeilDoc {
                    name,
                    d,
                    vars: None,
                    generators: gens.iter().map(|g| PolyDoc::Text(g.clone())).collect(),
                    k_max,
                    k: None,
                    dim: None,
                    basis: None,
                };
                doc.to_algebra(DEFAULT_K_MAX)?
            };
            emit(&WeilDoc::from_algebra(&algebra), algebra_report(&algebra), &output)
        }
        WeilCommand::Info { input, output } => {
            let doc: WeilDoc = read_doc(&input)?;
            let algebra = doc.to_algebra(DEFAULT_K_MAX)?;
            emit(&WeilDoc::from_algebra(&algebra), algebra_report(&algebra), &output)
        }
    }
}

#[derive(Deserialize)]
struct ComposeInput {
    g: MorphismDoc,
    f: MorphismDoc,
}

#[derive(Serialize)]
struct CheckDoc {
    morphism: MorphismDoc,
    rectified: bool,
    kind: String,
    embedding: String,
}

fn morphism_line(m: &FormalMorphism) -> String {
    format!("{} : {} -> {}", m, m.source(), m.target())
}

fn run_morphism(command: MorphismCommand) -> Result<()> {
    match command {
        MorphismCommand::Compose { input, output } => {
            let doc: ComposeInput = read_doc(&input)?;
            let g = doc.g.to_morphism(DEFAULT_K_MAX)?;
            let f = doc.f.to_morphism(DEFAULT_K_MAX)?;
            let composed = compose(&g, &f)?;
            let text = format!("composite {}\n", morphism_line(&composed));
            emit(&MorphismDoc::from_morphism(&composed), text, &output)
        }
        MorphismCommand::Check { input, output } => {
            let doc: MorphismDoc = read_doc(&input)?;
            let m = doc.to_morphism(DEFAULT_K_MAX)?;
            let kind = match classify_embedding(&m).kind {
                EmbeddingKind::General => "general",
                EmbeddingKind::MonoAtPoint => "mono_at_point",
                EmbeddingKind::Rectified => "rectified",
            };
            let embedding = match is_formal_embedding(&m) {
                Ok(b) => b.to_string(),
                Err(e) => format!("undecided: {e}"),
            };
            let text = format!(
                "morphism {}\nrectified: {}\nkind: {}\nembedding: {}\n",
                morphism_line(&m),
                is_rectified(&m),
                kind,
                embedding
            );
            let check = CheckDoc {
                morphism: MorphismDoc::from_morphism(&m),
                rectified: is_rectified(&m),
                kind: kind.to_string(),
                embedding,
            };
            emit(&check, text, &output)
        }
    }
}

fn run_hadamard(args: HadamardArgs) -> Result<()> {
    let f = PolyDoc::Text(args.f.clone()).to_polynomial()?;
    let expansion = hadamard_expand(&f, &args.x, &args.y, args.order)?;
    let doc = HadamardDoc::from_expansion(&expansion);
    let mut text = format!("f: {}\norder: {}\n", f, args.order);
    for (sigma, term) in &doc.taylor {
        let _ = writeln!(text, "taylor{sigma}: {term}");
    }
    for (sigma, rem) in &doc.remainders {
        let _ = writeln!(text, "remainder{sigma}: {rem}");
    }
    emit(&doc, text, &args.output)
}

#[derive(Deserialize)]
struct ProlongInput {
    sections: Vec<PolyDoc>,
    x: Vec<String>,
    base: Vec<String>,
    #[serde(default)]
    k: Option<u32>,
}

#[derive(Serialize)]
struct JetDimDoc {
    n: usize,
    m: usize,
    k: u32,
    fiber_count: usize,
    total_coordinates: usize,
}

#[derive(Serialize)]
struct JetLiftDoc {
    space: SpaceDoc,
    iota: MorphismDoc,
    through: MorphismDoc,
}

fn jet_point_report(doc: &JetPointDoc) -> String {
    let mut text = format!(
        "jet point: n={} m={} k={} base=({})\n",
        doc.n,
        doc.m,
        doc.k,
        doc.base.join(", ")
    );
    for (key, value) in &doc.values {
        let _ = writeln!(text, "{key} = {value}");
    }
    text
}

fn run_jet(command: JetCommand) -> Result<()> {
    match command {
        JetCommand::Prolong { input, level, output } => {
            let doc: ProlongInput = read_doc(&input)?;
            let k = level.or(doc.k).ok_or_else(|| {
                KernelError::invalid("give --level or a \"k\" field for the prolongation order")
            })?;
            let sections = doc
                .sections
                .iter()
                .map(|s| s.to_polynomial())
                .collect::<Result<Vec<_>>>()?;
            let base = doc
                .base
                .iter()
                .map(|b| parse_rational(b))
                .collect::<Result<Vec<_>>>()?;
            let jet = prolong(&sections, &doc.x, k, &base)?;
            let out = JetPointDoc::from_jet(&jet);
            emit(&out, jet_point_report(&out), &output)
        }
        JetCommand::Project { input, output } => {
            let doc: JetPointDoc = read_doc(&input)?;
            let jet = doc.to_jet()?;
            let dropped = project(&jet)?;
            let out = JetPointDoc::from_jet(&dropped);
            emit(&out, jet_point_report(&out), &output)
        }
        JetCommand::Dim { n, m, k, output } => {
            let space = JetSpace { n, m, k };
            let doc = JetDimDoc {
                n,
                m,
                k,
                fiber_count: space.fiber_count(),
                total_coordinates: n + space.fiber_count(),
            };
            let text = format!(
                "jet space J^{k} of a trivial fibration: n={n}, m={m}\nfiber coordinates: {}\ntotal coordinates: {}\n",
                doc.fiber_count, doc.total_coordinates
            );
            emit(&doc, text, &output)
        }
        JetCommand::Lift { input, output } => {
            let doc: ProPlotDoc = read_doc(&input)?;
            let plot = doc.to_plot(DEFAULT_K_MAX)?;
            let lift = lift_jet_plot(&plot)?;
            let out = JetLiftDoc {
                space: SpaceDoc::from_space(&lift.space),
                iota: MorphismDoc::from_morphism(&lift.iota),
                through: MorphismDoc::from_morphism(&lift.through),
            };
            let text = format!(
                "lift through {}\niota {}\nthrough {}\n",
                lift.space,
                morphism_line(&lift.iota),
                morphism_line(&lift.through)
            );
            emit(&out, text, &output)
        }
    }
}

#[derive(Serialize)]
struct EmbedDoc {
    pair: PairDoc,
    step: StepDoc,
}

/// Reads a workspace document and constructs its two factorization pairs in
/// array order.
fn two_pairs(path: &Path) -> Result<(jetkernel_core::factor::FactorizationPair, jetkernel_core::factor::FactorizationPair, u32)> {
    let doc: WorkspaceDoc = read_doc(path)?;
    if doc.pairs.len() != 2 {
        return Err(KernelError::invalid(format!(
            "expected exactly two pairs in the workspace, found {}",
            doc.pairs.len()
        )));
    }
    let k_max = doc.config.k_max();
    let p = doc.pairs[0].to_pair(k_max)?;
    let q = doc.pairs[1].to_pair(k_max)?;
    Ok((p, q, k_max))
}

fn run_factor(command: FactorCommand) -> Result<()> {
    match command {
        FactorCommand::Lift { input, output } => {
            let doc: MorphismDoc = read_doc(&input)?;
            let plot = doc.to_morphism(DEFAULT_K_MAX)?;
            let pair = lift_plot(&plot)?;
            let text = format!(
                "iota {}\nf {}\n",
                morphism_line(pair.iota()),
                morphism_line(pair.f())
            );
            emit(&PairDoc::from_pair(&pair), text, &output)
        }
        FactorCommand::Embed { input, output } => {
            let doc: PairDoc = read_doc(&input)?;
            let pair = doc.to_pair(DEFAULT_K_MAX)?;
            let (hat, step) = embed_factorization(&pair)?;
            let text = format!(
                "iota {}\nf {}\nconnecting {}\n",
                morphism_line(hat.iota()),
                morphism_line(hat.f()),
                morphism_line(&step.connecting)
            );
            let out = EmbedDoc {
                pair: PairDoc::from_pair(&hat),
                step: StepDoc::from_step(&step),
            };
            emit(&out, text, &output)
        }
        FactorCommand::Witness { input, output } => {
            let (p, q, _) = two_pairs(&input)?;
            let span = if is_rectified(p.iota()) && is_rectified(q.iota()) {
                witness_general(p.iota(), p.f(), q.iota(), q.f())?
            } else {
                let source = p.source();
                if source.params().is_empty()
                    && source.eps().len() == 1
                    && source.thickening().k() == 1
                {
                    witness_d1(p.iota(), p.f(), q.iota(), q.f())?
                } else {
                    return Err(KernelError::NotRectified {
                        detail: "witness needs rectified iotas or a first-order one-variable disk"
                            .into(),
                    });
                }
            };
            let doc = WitnessDoc::from_span(&span);
            let mut text = format!(
                "span over {}\nalpha {}\nalpha' {}\nphi {}\n",
                span.w,
                morphism_line(&span.alpha),
                morphism_line(&span.alpha_prime),
                morphism_line(&span.phi)
            );
            for (k, d) in span.delta.iter().enumerate() {
                let _ = writeln!(text, "delta[{k}]: {d}");
            }
            for entry in &doc.verification {
                let _ = writeln!(text, "{}: {}", entry.identity, entry.status);
            }
            emit(&doc, text, &output)
        }
        FactorCommand::Decide { input, output } => {
            let (p, q, _) = two_pairs(&input)?;
            let decision = decide_equivalence(&p, &q)?;
            let doc = DecisionDoc::from_decision(&decision);
            let text = match &decision {
                jetkernel_core::factor::Decision::Equivalent(chain) => {
                    format!("equivalent: true\nsteps: {}\n", chain.steps.len())
                }
                jetkernel_core::factor::Decision::NotEquivalent { component } => {
                    format!("equivalent: false\ncomponent: {component}\n")
                }
            };
            emit(&doc, text, &output)
        }
    }
}

fn run_selftest(args: SelftestArgs) -> Result<ExitCode> {
    let fault = match args.fault.as_deref() {
        None => None,
        Some("perturb-phi") => Some(Fault::PerturbPhi),
        Some(other) => {
            return Err(KernelError::invalid(format!("unknown fault {other}")));
        }
    };
    let report = selftest::run_with_fault(args.seed, fault);
    emit(&report, report.render_text(), &args.output)?;
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        let failed = report.suites.iter().filter(|s| !s.passed()).count();
        let obj = serde_json::json!({
            "error": {
                "code": "selftest_failed",
                "message": format!("{failed} of {} suites failed", report.suites.len()),
            }
        });
        eprintln!("{obj}");
        Ok(ExitCode::from(1))
    }
}
