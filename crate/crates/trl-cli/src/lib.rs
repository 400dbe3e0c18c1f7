//! Driver behind the `trl` binary: load a program and its refinements, analyze
//! one entry function and compare the inferred grammars with expectations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use trl::ast::{Name, Program, Schema};
use trl::interp::{Analyzer, Budget};
use trl::kind::ResKind;
use trl::parser::{parse_program_named, parse_refinement_named, ParseError};
use trl::property::{check_property, Property, PropertyError, Verdict};
use trl::shape::{rel_complement, shapes_from_refinements, Grammar, Shape, ShapeEnv};
use trl::state::ResultSet;

#[derive(Debug, Parser)]
#[command(name = "trl", about = "Infer refinement grammars for tree-transformation programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze one function and check the inferred result shapes.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pretty,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct AnalyzeArgs {
    /// Program source (`.trl`).
    pub program: PathBuf,
    /// Function to analyze.
    #[arg(long)]
    pub entry: String,
    /// Refinement declarations (`.shape`) that parameters and expectations may name.
    #[arg(long)]
    pub shapes: Option<PathBuf>,
    /// Input shape of a parameter, `name=SHAPE`. Every parameter must be bound.
    #[arg(long = "param", value_name = "NAME=SHAPE")]
    pub params: Vec<String>,
    /// Expected bound on a result, `success<=SHAPE` (also `fail`, `error`).
    #[arg(long = "expect", value_name = "KIND<=SHAPE")]
    pub expects: Vec<String>,
    /// Constructor that must not occur in the success value.
    #[arg(long = "forbid", value_name = "CTOR")]
    pub forbids: Vec<String>,
    /// Bound on every argument of a constructor in the success value, `ctor=SHAPE`.
    #[arg(long = "restrict", value_name = "CTOR=SHAPE")]
    pub restricts: Vec<String>,
    #[arg(long, value_enum, default_value = "pretty")]
    pub format: Format,
    /// Rounds allowed for each fixed-point loop.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Evaluation steps allowed over the whole analysis.
    #[arg(long)]
    pub max_steps: Option<u64>,
}

/// Problems with the inputs rather than with the analyzed program.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("no function `{0}` in the program")]
    UnknownEntry(String),
    #[error("parameter `{0}` of the entry function is not bound; use --param {0}=SHAPE")]
    UnboundParam(Name),
    #[error("`{0}` is not a parameter of the entry function")]
    UnknownParam(String),
    #[error("malformed {flag} `{text}`: expected {expected}")]
    Malformed { flag: &'static str, text: String, expected: &'static str },
    #[error("{0}")]
    Property(#[from] PropertyError),
}

/// One parsed `--expect`.
#[derive(Clone, Debug)]
pub struct Expectation {
    pub kind: ResKind,
    pub text: String,
    pub bound: Shape,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalReport {
    pub maybe_unassigned: bool,
    pub grammar: Grammar,
}

/// Inferred shape of one result kind. Error results carry no value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindReport {
    pub grammar: Option<Grammar>,
    pub globals: BTreeMap<String, GlobalReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub check: String,
    pub holds: bool,
    /// Part of the inferred shape outside the bound.
    pub witness: Option<Grammar>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub entry: String,
    pub results: BTreeMap<ResKind, KindReport>,
    pub verdicts: Vec<VerdictReport>,
    pub millis: u64,
    pub steps: u64,
    pub rounds: u64,
    /// Set when the analysis gave up; results are then empty.
    pub analysis_error: Option<String>,
}

impl AnalysisReport {
    pub fn exit_code(&self) -> i32 {
        if self.analysis_error.is_none() && self.verdicts.iter().all(|v| v.holds) {
            0
        } else {
            1
        }
    }

    pub fn pretty(&self) -> String {
        let mut out = format!("entry {}\n", self.entry);
        if let Some(e) = &self.analysis_error {
            let _ = writeln!(out, "analysis error: {e}");
        }
        for (kind, r) in &self.results {
            match &r.grammar {
                Some(g) => {
                    let _ = writeln!(out, "{kind}: {}", g.start);
                    for line in g.declarations().lines() {
                        let _ = writeln!(out, "  {line}");
                    }
                }
                None => {
                    let _ = writeln!(out, "{kind}");
                }
            }
            for (name, g) in &r.globals {
                let maybe = if g.maybe_unassigned { " (maybe unassigned)" } else { "" };
                let _ = writeln!(out, "  global {name}{maybe}: {}", g.grammar);
            }
        }
        for v in &self.verdicts {
            let status = if v.holds { "holds" } else { "VIOLATED" };
            let _ = write!(out, "check {}: {status}", v.check);
            if let Some(w) = &v.witness {
                let _ = write!(out, ", e.g. {w}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "{} ms, {} steps, {} rounds", self.millis, self.steps, self.rounds);
        out
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn split_binding<'a>(text: &'a str, sep: &str, flag: &'static str, expected: &'static str) -> Result<(&'a str, &'a str), ConfigError> {
    text.split_once(sep)
        .map(|(a, b)| (a.trim(), b.trim()))
        .filter(|(a, b)| !a.is_empty() && !b.is_empty())
        .ok_or_else(|| ConfigError::Malformed {
            flag,
            text: text.to_string(),
            expected,
        })
}

/// Everything loaded and resolved before the analysis starts.
struct Loaded {
    program: Program,
    schema: Schema,
    env: ShapeEnv,
}

impl Loaded {
    fn open(args: &AnalyzeArgs) -> Result<Self, ConfigError> {
        let src = read(&args.program)?;
        let program = parse_program_named(&src, &args.program.display().to_string())?;
        let schema = trl::ast::check_program(&program).expect("parser already checked the program");
        let decls = match &args.shapes {
            Some(path) => parse_refinement_named(&read(path)?, &path.display().to_string(), &schema)?,
            None => Vec::new(),
        };
        let env = shapes_from_refinements(&decls, &schema);
        Ok(Loaded { program, schema, env })
    }

    fn shape(&self, text: &str) -> Result<Shape, ConfigError> {
        Ok(self.env.resolve_text(text, &self.schema)?)
    }
}

fn parse_expectation(l: &Loaded, text: &str) -> Result<Expectation, ConfigError> {
    let sep = if text.contains("<=") { "<=" } else { "⊑" };
    let (kind, bound) = split_binding(text, sep, "--expect", "KIND<=SHAPE")?;
    let kind = kind.parse::<ResKind>().map_err(|_| ConfigError::Malformed {
        flag: "--expect",
        text: text.to_string(),
        expected: "a kind of success, fail or error",
    })?;
    Ok(Expectation {
        kind,
        text: format!("{kind} <= {bound}"),
        bound: l.shape(bound)?,
    })
}

fn kind_report(results: &ResultSet, schema: &Schema) -> BTreeMap<ResKind, KindReport> {
    results
        .iter()
        .map(|(kind, entry)| {
            let globals = entry
                .store
                .iter()
                .map(|(name, slot)| {
                    let g = GlobalReport {
                        maybe_unassigned: slot.maybe_unassigned,
                        grammar: Grammar::of(&slot.shape, schema),
                    };
                    (name.to_string(), g)
                })
                .collect();
            let grammar = entry.value.as_ref().filter(|_| kind != ResKind::Error).map(|v| Grammar::of(v, schema));
            (kind, KindReport { grammar, globals })
        })
        .collect()
}

/// Run the analysis described by `args`. Errors are configuration problems;
/// analysis failures and violated checks end up in the report.
pub fn run(args: &AnalyzeArgs) -> Result<AnalysisReport, ConfigError> {
    let l = Loaded::open(args)?;
    let entry: Name = args.entry.as_str().into();
    let f = l
        .program
        .function(&entry)
        .ok_or_else(|| ConfigError::UnknownEntry(args.entry.clone()))?;

    let mut bound: BTreeMap<Name, Shape> = BTreeMap::new();
    for text in &args.params {
        let (name, term) = split_binding(text, "=", "--param", "NAME=SHAPE")?;
        if !f.params.iter().any(|p| p.name.to_string() == name) {
            return Err(ConfigError::UnknownParam(name.to_string()));
        }
        bound.insert(name.into(), l.shape(term)?);
    }
    let inputs = f
        .params
        .iter()
        .map(|p| bound.remove(&p.name).ok_or_else(|| ConfigError::UnboundParam(p.name.clone())))
        .collect::<Result<Vec<_>, _>>()?;

    let expectations = args
        .expects
        .iter()
        .map(|t| parse_expectation(&l, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut properties = args.forbids.iter().map(|k| Property::Unreachable(k.as_str().into())).collect::<Vec<_>>();
    for text in &args.restricts {
        let (ctor, term) = split_binding(text, "=", "--restrict", "CTOR=SHAPE")?;
        properties.push(Property::ArgsWithin {
            ctor: ctor.into(),
            bound: l.shape(term)?,
        });
    }
    // Unknown constructors are configuration errors even if the analysis fails later.
    for p in &properties {
        check_property(&Shape::bottom(), p, &l.schema)?;
    }

    let mut budget = Budget::default();
    if let Some(r) = args.budget {
        budget.max_rounds = r;
    }
    if let Some(s) = args.max_steps {
        budget.max_steps = s;
    }
    let started = Instant::now();
    let mut analyzer = Analyzer::new(&l.program, &l.schema).with_budget(budget);
    let outcome = analyzer.analyze_function(&entry, &inputs, None);
    let millis = started.elapsed().as_millis() as u64;
    let stats = analyzer.stats();

    let mut report = AnalysisReport {
        entry: args.entry.clone(),
        results: BTreeMap::new(),
        verdicts: Vec::new(),
        millis,
        steps: stats.steps,
        rounds: stats.rounds,
        analysis_error: None,
    };
    let results = match outcome {
        Ok(r) => r,
        Err(e) => {
            report.analysis_error = Some(e.to_string());
            return Ok(report);
        }
    };
    report.results = kind_report(&results, &l.schema);

    for e in &expectations {
        let inferred = results.value(e.kind).cloned().unwrap_or_else(Shape::bottom);
        // An error result has no value; only its presence can break a bound of bottom.
        let holds = match e.kind {
            ResKind::Error => results.get(ResKind::Error).is_none() || !e.bound.is_bottom(),
            _ => inferred.leq(&e.bound),
        };
        let witness = (!holds && e.kind != ResKind::Error).then(|| Grammar::of(&rel_complement(&inferred, &e.bound), &l.schema));
        report.verdicts.push(VerdictReport {
            check: e.text.clone(),
            holds,
            witness,
        });
    }
    let success = results.value(ResKind::Success).cloned().unwrap_or_else(Shape::bottom);
    for p in &properties {
        let verdict = check_property(&success, p, &l.schema)?;
        report.verdicts.push(VerdictReport {
            check: p.to_string(),
            holds: verdict.holds(),
            witness: match verdict {
                Verdict::Holds => None,
                Verdict::Violated { witness } => Some(Grammar::of(&witness, &l.schema)),
            },
        });
    }
    Ok(report)
}
