//! Shared support for the integration suites: corpus loading, the concrete
//! soundness oracle and a generator of random well-scoped programs.
#![allow(dead_code)]

pub mod gen;
pub mod laws;
pub mod shapes;

use std::path::PathBuf;

use trl::ast::{check_program, Name, Program, Schema, TypeExpr};
use trl::concrete::{ConcreteStore, ConcreteValue, Interpreter};
use trl::interp::{AnalysisError, Analyzer};
use trl::kind::ResKind;
use trl::parser::{parse_program, parse_refinement};
use trl::shape::{concretize_bounded, contains, shapes_from_refinements, Bounds, Shape};
use trl::state::{AbstractStore, ResultSet};

/// Programs of the bundled corpus with their entry functions.
pub const CORPUS: [(&str, &str); 7] = [
    ("simplify", "simplify"),
    ("nnf", "nnf"),
    ("peano", "unit"),
    ("boolean", "fold"),
    ("bag", "prune"),
    ("tally", "tally"),
    ("env", "clean"),
];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub struct Loaded {
    pub program: Program,
    pub schema: Schema,
    /// Refinement declarations of the matching `.shape` file.
    pub shapes: String,
}

pub fn load(name: &str) -> Loaded {
    let dir = corpus_dir();
    let src = std::fs::read_to_string(dir.join(format!("{name}.trl"))).expect("corpus program");
    let shapes = std::fs::read_to_string(dir.join(format!("{name}.shape"))).unwrap_or_default();
    let program = parse_program(&src).expect("corpus parses");
    let schema = check_program(&program).expect("corpus checks");
    Loaded { program, schema, shapes }
}

impl Loaded {
    /// Resolve a shape term against this program's refinements.
    pub fn shape(&self, text: &str) -> Shape {
        let decls = parse_refinement(&self.shapes, &self.schema).expect("shape file parses");
        shapes_from_refinements(&decls, &self.schema)
            .resolve_text(text, &self.schema)
            .expect("shape resolves")
    }

    pub fn of_type(&self, adt: &str) -> Shape {
        Shape::of_type(&TypeExpr::Adt(adt.into()), &self.schema)
    }
}

/// Input enumeration bounds of the soundness suite.
pub const SOUNDNESS_BOUNDS: Bounds = Bounds { depth: 4, width: 3 };
/// Generated programs checked by the soundness suite, and the seed producing them.
pub const GENERATED: usize = 200;
pub const GENERATOR_SEED: u64 = 0x5eed;
/// Cap on enumerated argument tuples per program.
pub const MAX_INPUTS: usize = 20_000;

/// Concrete step budget per run. Generated programs may loop forever, and
/// their values can grow with every step, so runs are cut off early.
pub const CONCRETE_STEPS: u64 = 20_000;
const CONCRETE_STACK: usize = 1 << 30;

/// Outcome of comparing concrete runs against one abstract analysis.
#[derive(Debug, Default)]
pub struct Soundness {
    pub inputs: usize,
    /// Concrete runs cut off by the step or call-depth budget.
    pub diverged: usize,
    pub violations: Vec<String>,
    /// The abstract analysis itself gave up.
    pub analysis_error: Option<AnalysisError>,
}

impl Soundness {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.analysis_error.is_none()
    }
}

/// Every global a concrete run ends with must lie in the abstract store,
/// and an unassigned one needs the maybe-unassigned flag.
fn store_covered(abs: &AbstractStore, conc: &ConcreteStore, globals: &[Name]) -> bool {
    globals.iter().all(|g| {
        let slot = abs.get(g);
        match conc.get(g) {
            None => slot.maybe_unassigned,
            Some(v) => contains(&slot.shape, v),
        }
    })
}

fn covered(result: &ResultSet, kind: ResKind, value: Option<&ConcreteValue>, store: &ConcreteStore, globals: &[Name]) -> bool {
    let Some(entry) = result.get(kind) else { return false };
    let value_ok = match (kind, value) {
        (ResKind::Error, _) => true,
        (_, Some(v)) => entry.value.as_ref().is_some_and(|s| contains(s, v)),
        (_, None) => false,
    };
    value_ok && store_covered(&entry.store, store, globals)
}

/// Initial global stores for concrete runs: all unassigned, then small values per global.
fn global_stores(program: &Program, schema: &Schema) -> Vec<ConcreteStore> {
    let mut stores = vec![ConcreteStore::new()];
    for g in &program.globals {
        let samples: Vec<ConcreteValue> = concretize_bounded(&Shape::of_type(&g.ty, schema), schema, Bounds::new(2, 2))
            .into_iter()
            .take(3)
            .collect();
        let mut next = stores.clone();
        for st in &stores {
            for v in &samples {
                let mut st = st.clone();
                st.insert(g.name.clone(), v.clone());
                next.push(st);
            }
        }
        stores = next;
    }
    stores
}

/// Run `entry` on every input of its parameter types up to `bounds` and check
/// each concrete outcome against the abstract result for the whole types.
pub fn check_soundness(program: &Program, schema: &Schema, entry: &Name, bounds: Bounds, max_inputs: usize) -> Soundness {
    let mut report = Soundness::default();
    let f = program.function(entry).expect("entry exists");
    let params: Vec<Shape> = f.params.iter().map(|p| Shape::of_type(&p.ty, schema)).collect();
    let mut analyzer = Analyzer::new(program, schema);
    let result = match analyzer.analyze_function(entry, &params, None) {
        Ok(r) => r,
        Err(e) => {
            report.analysis_error = Some(e);
            return report;
        }
    };
    let domains: Vec<Vec<ConcreteValue>> = params
        .iter()
        .map(|p| concretize_bounded(p, schema, bounds).into_iter().collect())
        .collect();
    let starts = global_stores(program, schema);
    // Diverging runs can build very deep values before the budget stops them,
    // and the concrete interpreter recurses over value depth.
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(CONCRETE_STACK)
            .spawn_scoped(scope, || run_concrete(program, schema, entry, &result, &domains, &starts, max_inputs, report))
            .expect("spawn concrete runner")
            .join()
            .expect("concrete runner")
    })
}

#[allow(clippy::too_many_arguments)]
fn run_concrete(
    program: &Program,
    schema: &Schema,
    entry: &Name,
    result: &ResultSet,
    domains: &[Vec<ConcreteValue>],
    starts: &[ConcreteStore],
    max_inputs: usize,
    mut report: Soundness,
) -> Soundness {
    let globals: Vec<Name> = program.globals.iter().map(|g| g.name.clone()).collect();
    for args in product(domains).into_iter().take(max_inputs) {
        for start in starts {
            report.inputs += 1;
            let mut interp = Interpreter::new(program, schema).with_budget(CONCRETE_STEPS);
            match interp.run_function(entry, args.clone(), start.clone()) {
                Err(_) => report.diverged += 1,
                Ok(out) => {
                    if !covered(result, out.kind, out.value.as_ref(), &out.store, &globals) {
                        report.violations.push(format!(
                            "{entry}({args:?}) with globals {start:?} gave {:?} {:?} {:?}, abstract {result}",
                            out.kind, out.value, out.store
                        ));
                    }
                }
            }
        }
    }
    report
}

fn product(domains: &[Vec<ConcreteValue>]) -> Vec<Vec<ConcreteValue>> {
    domains.iter().fold(vec![Vec::new()], |acc, d| {
        acc.iter()
            .flat_map(|prefix| {
                d.iter().map(move |v| {
                    let mut t = prefix.clone();
                    t.push(v.clone());
                    t
                })
            })
            .collect()
    })
}
