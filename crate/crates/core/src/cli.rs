//! Command-line front end. `run` parses arguments, dispatches to the library
//! and writes a report; the exit code encodes the error class.

use std::ffi::OsString;
use std::io::Write;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::classify::{classify, reproduce_examples, ClassifyOptions};
use crate::conformal::CylinderMeasure;
use crate::eigen::{solve_family, solve_finite, verify, FamilySolveOptions, VertexPotential};
use crate::error::{Error, ErrorClass, Result};
use crate::graph::document::family_from_params;
use crate::graph::{load_graph, FiniteGraph, FinitePath, GraphFamily, VertexId};
use crate::periods::{factor_type, periods, PeriodOptions};
use crate::report::Report;
use crate::spectral::{beta0, Beta0Options, DEFAULT_TOL};
use crate::structure::{non_wandering, recode};

/// Finite graphs accept a `--beta` this close to `β₀` and use `β₀`.
pub const BETA_SNAP: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(
    name = "kms-graph-lab",
    version,
    about = "KMS weights and states of gauge-type actions on graph algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct Input {
    /// Graph document (JSON).
    #[arg(long, conflicts_with = "family")]
    graph: Option<std::path::PathBuf>,
    /// Built-in family: arms, ladder, rose, lattice-walk.
    #[arg(long)]
    family: Option<String>,
    /// Family parameters as k=v (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    params: Vec<String>,
    /// Lattice step distribution as JSON, e.g. '[{"w":[1],"count":1}]'.
    #[arg(long)]
    mu: Option<String>,
    #[arg(long, default_value_t = 50)]
    depth: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Output::Json)]
    output: Output,
}

#[derive(Args, Debug)]
struct Potential {
    /// Vertex potential document {"default": .., "overrides": {..}}.
    #[arg(long)]
    f0: Option<std::path::PathBuf>,
    /// Vertex normalized to 1.
    #[arg(long)]
    base: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Non-wandering part, cofinality and β₀.
    Analyze {
        #[command(flatten)]
        input: Input,
    },
    /// Critical inverse temperature with its truncation certificate.
    Beta0 {
        #[command(flatten)]
        input: Input,
    },
    /// Nonnegative eigenvector(s) at β.
    Eigvec {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        potential: Potential,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
    },
    /// Measure of a cylinder set with additivity and Ruelle checks.
    Measure {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        potential: Potential,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        /// Edge ids of the cylinder path, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        cylinder: Vec<String>,
    },
    /// d_G, d'_G, the Γ sandwich and (with --beta) the factor type.
    Periods {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long, default_value_t = crate::periods::DEFAULT_M_MAX)]
        m_max: usize,
        #[arg(long, default_value_t = crate::periods::DEFAULT_L_MAX)]
        l_max: usize,
    },
    /// Full invariant report.
    Classify {
        #[command(flatten)]
        input: Input,
        /// β samples, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Higher-block recoding by paths of length k.
    Recode {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Moment generating function analysis of a lattice walk.
    Lattice {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
    },
    /// Golden table for the worked examples; exit 3 on mismatch.
    Reproduce {
        #[arg(long, value_enum, default_value_t = Output::Json)]
        output: Output,
    },
}

fn parse_value(v: &str) -> Value {
    serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.into()))
}

fn load_family(input: &Input) -> Result<GraphFamily> {
    if let Some(path) = &input.graph {
        if !input.params.is_empty() || input.mu.is_some() {
            return Err(Error::InvalidArgument(
                "--params and --mu apply to --family only".into(),
            ));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        return load_graph(&text);
    }
    let name = input
        .family
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("one of --graph or --family is required".into()))?;
    let mut params = Map::new();
    for kv in &input.params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("--params entry {kv} is not k=v")))?;
        params.insert(k.trim().into(), parse_value(v.trim()));
    }
    if let Some(mu) = &input.mu {
        let v = serde_json::from_str(mu).map_err(|e| Error::Parse(format!("--mu: {e}")))?;
        params.insert("mu".into(), v);
    }
    if name == "lattice-walk" && !params.contains_key("mu") {
        if params.get("d").and_then(Value::as_u64).unwrap_or(1) != 1 {
            return Err(Error::InvalidArgument("lattice-walk with d > 1 needs --mu".into()));
        }
        params.insert("mu".into(), json!([{"w": [1], "count": 1}, {"w": [-1], "count": 1}]));
    }
    family_from_params(name, &params)
}

fn load_potential(p: &Potential) -> Result<VertexPotential> {
    match &p.f0 {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            VertexPotential::from_json(&text)
        }
        None => Ok(VertexPotential::gauge()),
    }
}

fn check_input(input: &Input) -> Result<()> {
    if input.depth == 0 {
        return Err(Error::InvalidArgument("--depth must be at least 1".into()));
    }
    if !(input.tol > 0.0 && input.tol < 1.0) {
        return Err(Error::InvalidArgument("--tol must lie in (0, 1)".into()));
    }
    Ok(())
}

fn beta0_options(input: &Input) -> Beta0Options {
    Beta0Options {
        tol: input.tol,
        ..Beta0Options::with_depth(input.depth)
    }
}

fn graph_document(g: &FiniteGraph) -> Value {
    json!({
        "vertices": g.vertices(),
        "edges": g.edges().iter().map(|e| json!({
            "id": e.id,
            "src": g.vertex(e.src),
            "dst": g.vertex(e.dst),
        })).collect::<Vec<_>>(),
        "frontier": g.frontier().map(|v| g.vertex(v)).collect::<Vec<_>>(),
    })
}

/// Solutions at β; for finite graphs β is optional and snapped to `β₀`.
fn solutions(
    family: &GraphFamily,
    beta: Option<f64>,
    f0: &VertexPotential,
    base: Option<&String>,
    depth: usize,
) -> Result<crate::eigen::FamilySolutions> {
    let base: Option<VertexId> = base.map(VertexId::from);
    if let Some(g) = family.finite_graph() {
        let s = solve_finite(&g, f0, base.as_ref())?;
        if let Some(b) = beta {
            if (b - s.beta).abs() > BETA_SNAP {
                return Err(Error::Infeasible {
                    beta: b,
                    reason: format!("a finite strongly connected graph only admits β = {}", s.beta),
                });
            }
        }
        return Ok(crate::eigen::FamilySolutions {
            beta: s.beta,
            kind: crate::eigen::RayKind::Unique,
            rays: vec![s],
            notes: vec![],
        });
    }
    let beta = beta.ok_or_else(|| Error::InvalidArgument("--beta is required for infinite families".into()))?;
    solve_family(
        family,
        beta,
        f0,
        &FamilySolveOptions {
            depth,
            base,
            ..Default::default()
        },
    )
}

fn execute(cmd: Command) -> Result<(Report, Output)> {
    match cmd {
        Command::Analyze { input } => {
            check_input(&input)?;
            let family = load_family(&input)?;
            let mut r = Report::new("analyze", family.describe());
            r.insert("structure", non_wandering(&family, input.depth)?)?;
            match beta0(&family, &beta0_options(&input)) {
                Ok(b) => r.insert("beta0", b)?,
                Err(Error::NoLoops) => r.insert("beta0", Value::Null)?,
                Err(e) => return Err(e),
            };
            Ok((r, input.output))
        }
        Command::Beta0 { input } => {
            check_input(&input)?;
            let family = load_family(&input)?;
            let mut r = Report::new("beta0", family.describe());
            r.insert("beta0", beta0(&family, &beta0_options(&input))?)?;
            Ok((r, input.output))
        }
        Command::Eigvec { input, potential, beta } => {
            check_input(&input)?;
            let family = load_family(&input)?;
            let f0 = load_potential(&potential)?;
            let sols = solutions(&family, beta, &f0, potential.base.as_ref(), input.depth)?;
            let mut r = Report::new("eigvec", family.describe());
            let first = &sols.rays[0];
            r.insert("eigensolution", first.report())?;
            r.insert("verification", verify(&first.graph, first.beta, &f0, &first.xi)?)?;
            r.insert("ray_kind", sols.kind)?;
            if sols.rays.len() > 1 {
                r.insert("rays", sols.rays.iter().map(|s| s.report()).collect::<Vec<_>>())?;
            }
            if !sols.notes.is_empty() {
                r.insert("notes", &sols.notes)?;
            }
            Ok((r, input.output))
        }
        Command::Measure {
            input,
            potential,
            beta,
            cylinder,
        } => {
            check_input(&input)?;
            let family = load_family(&input)?;
            let f0 = load_potential(&potential)?;
            let sols = solutions(&family, beta, &f0, potential.base.as_ref(), input.depth)?;
            let m = CylinderMeasure::new(sols.rays[0].clone());
            let mu = FinitePath::from_edge_ids(m.graph(), &cylinder)?;
            let mut r = Report::new("measure", family.describe());
            r.insert(
                "measure",
                json!({
                    "beta": m.solution().beta,
                    "cylinder": cylinder,
                    "value": m.measure_of(&mu)?,
                    "additivity": m.check_additivity(&mu, 1)?,
                    "ruelle": m.ruelle_dual_check(&mu)?,
                }),
            )?;
            Ok((r, input.output))
        }
        Command::Periods {
            input,
            beta,
            m_max,
            l_max,
        } => {
            check_input(&input)?;
            let family = load_family(&input)?;
            let p = periods(
                &family,
                &PeriodOptions {
                    m_max,
                    l_max,
                    ..Default::default()
                },
            )?;
            let mut r = Report::new("periods", family.describe());
            if let Some(b) = beta {
                r.insert("factor_type", factor_type(&p, b))?;
            }
            r.insert("periods", p)?;
            Ok((r, input.output))
        }
        Command::Classify { input, beta, jobs } => {
            check_input(&input)?;
            let family = load_family(&input)?;
            let report = classify(
                &family,
                &ClassifyOptions {
                    depth: input.depth,
                    tol: input.tol,
                    betas: (!beta.is_empty()).then_some(beta),
                    jobs: jobs.max(1),
                },
            )?;
            let mut r = Report::new("classify", family.describe());
            r.insert("classification", report)?;
            Ok((r, input.output))
        }
        Command::Recode { input, k } => {
            check_input(&input)?;
            let family = load_family(&input)?;
            let g = match family.finite_graph() {
                Some(g) => g,
                None => family.truncation(input.depth)?,
            };
            let h = recode(&g, k)?;
            let mut r = Report::new("recode", family.describe());
            let mut section = json!({
                "k": k,
                "vertices": h.vertex_count(),
                "edges": h.edge_count(),
                "graph": graph_document(&h),
            });
            if family.is_finite() {
                let opts = beta0_options(&input);
                let before = beta0(&family, &opts)?.value;
                let after = beta0(&GraphFamily::Explicit(Arc::new(h)), &opts)?.value;
                section["beta0_original"] = json!(before);
                section["beta0_recoded"] = json!(after);
            }
            r.insert("recode", section)?;
            Ok((r, input.output))
        }
        Command::Lattice { input, beta } => {
            check_input(&input)?;
            let family = load_family(&input)?;
            let GraphFamily::LatticeWalk(walk) = &family else {
                return Err(Error::InvalidArgument("lattice needs --family lattice-walk".into()));
            };
            let sol = walk.minimize_mgf(input.tol)?;
            let rays = walk.ray_structure(beta.unwrap_or(sol.beta0), input.tol)?;
            let mut r = Report::new("lattice", family.describe());
            r.insert(
                "lattice",
                json!({
                    "c_min": sol.c_min,
                    "beta0": sol.beta0,
                    "drift": sol.drift,
                    "solution": sol,
                    "semigroup": walk.semigroup_check(2 * walk.dim() + 2),
                    "ray_structure": rays,
                }),
            )?;
            Ok((r, input.output))
        }
        Command::Reproduce { output } => {
            let golden = reproduce_examples()?;
            let mut r = Report::new(
                "reproduce",
                json!({"examples": ["arms(3)", "ladder", "lattice-walk d=1"]}),
            );
            r.insert("golden", &golden)?;
            Ok((r, output))
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Validation => 1,
        ErrorClass::Computation => 2,
        ErrorClass::Golden => 3,
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command) {
        Ok((report, output)) => {
            let text = match output {
                Output::Json => report.to_json(),
                Output::Text => report.to_text(),
            };
            let _ = out.write_all(text.as_bytes());
            // The golden table is printed before a mismatch is reported.
            if let Some(g) = report.section("golden") {
                if g.get("pass") == Some(&Value::Bool(false)) {
                    let rows: crate::classify::GoldenReport =
                        serde_json::from_value(g.clone()).expect("golden section round-trips");
                    if let Err(e) = rows.ensure_pass() {
                        let _ = writeln!(err, "error: {e}");
                        return exit_code(&e);
                    }
                }
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
