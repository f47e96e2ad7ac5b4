use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tameds::decomp::moduli_report;
use tameds::hodge::{weight_report, WeightMode};
use tameds::kostov::{generate, generic_parameters, kappa_check};
use tameds::oracle::{search, Binding, SearchConfig};
use tameds::problem::{parse_problem, parse_theta_map, theta_vector, user_key, ProblemFile};
use tameds::sigma::{classify, ds_verdict, Kind, Reason};
use tameds::spectral::DsProblem;
use tameds::{AffineDiagram, Error};

const EXIT_UNSOLVABLE: u8 = 3;
const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;

#[derive(Parser)]
#[command(name = "tameds", version, about = "Decide the multiplicative Deligne-Simpson problem for tame classes")]
struct Cli {
    /// Stability weight as a JSON object keyed by vertex; replaces any in the problem file.
    #[arg(long, global = true, value_name = "FILE")]
    theta: Option<PathBuf>,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether an irreducible solution exists (exit 3 if not).
    Analyze { input: String },
    /// Classify the dimension vector within the trichotomy.
    Classify { input: String },
    /// Minimal decomposition and moduli-space structure.
    Decompose { input: String },
    /// Positive roots below `bound` times the dimension vector.
    Roots {
        input: String,
        #[arg(long)]
        bound: Option<i64>,
    },
    /// Emit a semisimple family whose dimension vector is m times the null root.
    Kostov {
        #[arg(long)]
        diagram: String,
        #[arg(long)]
        m: i64,
        /// Order of q^δ; must divide m.
        #[arg(long, default_value_t = 1)]
        l: u64,
    },
    /// Dolbeault data, wall count and a certified weight.
    Weights {
        input: String,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Numerical search for a solution and an irreducibility check.
    Search {
        input: String,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Generic,
    AlmostGeneric,
}

enum Failure {
    Usage(String),
    Invalid(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

struct Output {
    text: String,
    json: Value,
    code: u8,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("serializable report"));
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Invalid(e)) => {
            if cli.json {
                let (location, message) = match &e {
                    Error::Validation { location, message } => (location.clone(), message.clone()),
                    other => (String::new(), other.to_string()),
                };
                println!("{}", json!({ "error": { "location": location, "message": message } }));
            }
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::Usage(format!("reading standard input: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {path}: {e}")))?;
    }
    Ok(text)
}

fn load(cli: &Cli, input: &str) -> Result<(ProblemFile, DsProblem), Failure> {
    let mut file = parse_problem(&read_input(input)?)?;
    if let Some(path) = &cli.theta {
        let text = read_input(&path.to_string_lossy())?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Error::validation("", format!("invalid JSON in {}: {e}", path.display())))?;
        file.theta = parse_theta_map(&v, "")?;
    }
    let mut problem = file.problem()?;
    problem.theta = theta_vector(&problem, &file.theta, "/theta")?;
    Ok((file, problem))
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Analyze { input } => analyze(cli, input),
        Command::Classify { input } => {
            let (_, p) = load(cli, input)?;
            let c = classify(&p.graph, &p.d, &p.q, &p.theta)?;
            let mut text = String::new();
            header(&mut text, &p);
            writeln!(text, "classification: {}", describe(&p, &c.kind)).unwrap();
            if !c.reflection_trail.is_empty() {
                let names: Vec<String> = c.reflection_trail.iter().map(|&v| user_key(&p, v)).collect();
                writeln!(text, "reflections: {}", names.join(" ")).unwrap();
            }
            writeln!(text, "sigma member: {}", c.certificate.member).unwrap();
            Ok(Output {
                text,
                json: json!({ "classification": c, "vertices": vertex_keys(&p) }),
                code: 0,
            })
        }
        Command::Decompose { input } => {
            let (_, p) = load(cli, input)?;
            let r = moduli_report(&p.graph, &p.d, &p.q, &p.theta)?;
            let mut text = String::new();
            header(&mut text, &p);
            for (part, m) in &r.parts {
                writeln!(text, "part {} × {m}", p.graph.format(part)).unwrap();
            }
            writeln!(text, "minimal parts all in Σ: {}", r.is_minimal).unwrap();
            writeln!(text, "moduli dimension: {}", r.moduli_dimension).unwrap();
            writeln!(text, "factorization: {}", r.factorization.join(" × ")).unwrap();
            for f in &r.notes {
                writeln!(text, "[{}] {}", f.tag, f.statement).unwrap();
            }
            Ok(Output {
                text,
                json: json!({ "report": r, "vertices": vertex_keys(&p) }),
                code: 0,
            })
        }
        Command::Roots { input, bound } => {
            let (file, p) = load(cli, input)?;
            let scale = bound.or(file.options.bound).unwrap_or(1);
            if scale < 0 {
                return Err(Failure::Usage("--bound must be nonnegative".into()));
            }
            let top: Vec<i64> = p
                .d
                .iter()
                .map(|x| x.checked_mul(scale).ok_or(Error::Overflow("root bound")))
                .collect::<Result<_, _>>()?;
            let roots = p.graph.positive_roots_below(&top)?;
            let mut text = String::new();
            header(&mut text, &p);
            writeln!(text, "{} positive roots below {}", roots.len(), p.graph.format(&top)).unwrap();
            for (r, c) in &roots {
                writeln!(text, "{} {:?} p = {}", p.graph.format(r), c.kind, p.graph.p_value(r)?).unwrap();
            }
            let list: Vec<Value> = roots
                .iter()
                .map(|(r, c)| json!({ "root": r, "kind": c.kind, "p": p.graph.p_value(r).unwrap_or(0) }))
                .collect();
            Ok(Output {
                text,
                json: json!({ "bound": top, "roots": list, "vertices": vertex_keys(&p) }),
                code: 0,
            })
        }
        Command::Kostov { diagram, m, l } => {
            let dg = AffineDiagram::from_name(diagram)
                .ok_or_else(|| Failure::Usage(format!("unknown diagram {diagram}; expected D4t, E6t, E7t or E8t")))?;
            let q = generic_parameters(dg, *m, *l)?;
            let family = generate(dg, *m, &q)?;
            if !kappa_check(&family) {
                return Err(Error::Internal("generated family fails the balance check".into()).into());
            }
            let file = ProblemFile::new(family.classes);
            let v = file.to_value();
            Ok(Output {
                text: format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")),
                json: v,
                code: 0,
            })
        }
        Command::Weights { input, mode, seed } => {
            let (file, p) = load(cli, input)?;
            let mode = match mode {
                Some(Mode::Generic) => WeightMode::Generic,
                Some(Mode::AlmostGeneric) => WeightMode::AlmostGeneric,
                None => match file.options.mode.as_deref() {
                    Some("generic") => WeightMode::Generic,
                    _ => WeightMode::AlmostGeneric,
                },
            };
            let r = weight_report(&p, mode, seed.or(file.options.seed).unwrap_or(0))?;
            let mut text = String::new();
            header(&mut text, &p);
            writeln!(text, "degree e = {}", r.e).unwrap();
            writeln!(text, "rank vector c = {:?}", r.c).unwrap();
            writeln!(text, "walls: {}", r.wall_count).unwrap();
            writeln!(text, "anchor weight: {}", render_weight(&r.anchor)).unwrap();
            writeln!(text, "certified weight: {}", render_weight(&r.alpha)).unwrap();
            Ok(Output {
                text,
                json: serde_json::to_value(&r).expect("serializable"),
                code: 0,
            })
        }
        Command::Search {
            input,
            restarts,
            tol,
            seed,
        } => {
            let (file, p) = load(cli, input)?;
            let defaults = SearchConfig::default();
            let config = SearchConfig {
                restarts: restarts.or(file.options.restarts).unwrap_or(defaults.restarts),
                tol: tol.or(file.options.tol).unwrap_or(defaults.tol),
                seed: seed.or(file.options.seed).unwrap_or(defaults.seed),
                ..defaults
            };
            if !(config.tol > 0.0) {
                return Err(Failure::Usage("--tol must be positive".into()));
            }
            let binding = Binding::random(&p.classes, config.seed);
            let found = search(&p.classes, &binding, &config)?;
            let mut text = String::new();
            header(&mut text, &p);
            match &found {
                Some(w) => {
                    writeln!(text, "witness from restart {} with residual {:.3e}", w.restart, w.residual).unwrap();
                    writeln!(text, "burnside dimension {} of {}", w.burnside_dim, p.n() * p.n()).unwrap();
                    writeln!(text, "irreducible: {}", w.irreducible).unwrap();
                }
                None => writeln!(
                    text,
                    "no witness within {} restarts (this does not show that none exists)",
                    config.restarts
                )
                .unwrap(),
            }
            Ok(Output {
                text,
                json: json!({ "config": config, "witness": found }),
                code: 0,
            })
        }
    }
}

fn analyze(cli: &Cli, input: &str) -> Result<Output, Failure> {
    let (_, p) = load(cli, input)?;
    let theta = p.theta.clone();
    let v = ds_verdict(&p.classes, Some(theta))?;
    let mut text = String::new();
    header(&mut text, &v.problem);
    writeln!(text, "verdict: {}", if v.solvable { "SOLVABLE" } else { "UNSOLVABLE" }).unwrap();
    writeln!(text, "classification: {}", describe(&v.problem, &v.classification.kind)).unwrap();
    writeln!(text, "{}", v.statement).unwrap();
    for f in &v.facts {
        writeln!(text, "[{}] {}", f.tag, f.statement).unwrap();
    }
    let json = json!({
        "verdict": if v.solvable { "SOLVABLE" } else { "UNSOLVABLE" },
        "classification": v.classification,
        "statement": v.statement,
        "facts": v.facts,
        "graph": { "legs": v.problem.graph.legs(), "leg_order": v.problem.graph.leg_order() },
        "d": v.problem.d,
        "q": v.problem.q,
        "vertices": vertex_keys(&v.problem),
    });
    Ok(Output {
        text,
        json,
        code: if v.solvable { 0 } else { EXIT_UNSOLVABLE },
    })
}

/// User vertex keys in canonical vertex order, for reading the vectors in JSON output.
fn vertex_keys(p: &DsProblem) -> Vec<String> {
    (0..p.graph.num_vertices()).map(|v| user_key(p, v)).collect()
}

fn header(text: &mut String, p: &DsProblem) {
    writeln!(text, "n = {}, legs {:?}", p.n(), p.graph.legs()).unwrap();
    writeln!(text, "d = {}", p.graph.format(&p.d)).unwrap();
    let q: Vec<String> = p.q.iter().map(|x| x.to_string()).collect();
    writeln!(text, "q = ({})", q.join(", ")).unwrap();
}

fn describe(p: &DsProblem, kind: &Kind) -> String {
    match kind {
        Kind::Sigma => "Sigma".into(),
        Kind::Aff { m, l, diagram, .. } => format!("Aff(m = {m}, l = {l}) on {}", diagram.name()),
        Kind::AffInf { m, diagram, .. } => format!("AffInf(m = {m}) on {}", diagram.name()),
        Kind::NotInCriterion { reason } => match reason {
            Reason::NotRoot => "not a root".into(),
            Reason::CharacterNotTrivial { value } => format!("q^d = {value} ≠ 1"),
            Reason::ThetaNonzero { value } => format!("θ·d = {value} ≠ 0"),
            Reason::Decomposable { parts } => {
                let ps: Vec<String> = parts.iter().map(|x| p.graph.format(x)).collect();
                format!("decomposable into {}", ps.join(" + "))
            }
        },
    }
}

fn render_weight(w: &[Vec<num_rational::BigRational>]) -> String {
    let legs: Vec<String> = w
        .iter()
        .map(|l| l.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    format!("[{}]", legs.join(" | "))
}
