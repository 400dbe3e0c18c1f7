//! Inferred grammars for the bundled programs. Hand-written expectations are
//! first checked against concrete runs, so a wrong expectation fails loudly.

mod common;

use trl::ast::Name;
use trl::concrete::{ConcreteStore, Interpreter};
use trl::interp::Analyzer;
use trl::kind::ResKind;
use trl::shape::{concretize_bounded, contains, Bounds, Shape};
use trl::state::{AbstractStore, Slot};

use common::{load, Loaded};

const BOUNDS: Bounds = Bounds { depth: 4, width: 3 };

fn analyze(l: &Loaded, entry: &str, args: &[Shape], globals: Option<&AbstractStore>) -> trl::state::ResultSet {
    Analyzer::new(&l.program, &l.schema)
        .analyze_function(&entry.into(), args, globals)
        .expect("analysis within budget")
}

/// Every concrete success on inputs from `input` lies in `expected`.
fn expectation_holds_concretely(l: &Loaded, entry: &str, input: &Shape, globals: &ConcreteStore, expected: &Shape) {
    for v in concretize_bounded(input, &l.schema, BOUNDS) {
        let out = Interpreter::new(&l.program, &l.schema)
            .run_function(&entry.into(), vec![v.clone()], globals.clone())
            .expect("terminates");
        if out.kind == ResKind::Success {
            let r = out.value.expect("success value");
            assert!(contains(expected, &r), "{entry}({v}) = {r} is outside the expectation");
        }
    }
}

fn success_of(l: &Loaded, entry: &str, input: &str) -> Shape {
    let r = analyze(l, entry, &[l.of_type(input)], None);
    assert_eq!(r.kinds().collect::<Vec<_>>(), vec![ResKind::Success], "{r}");
    r.value(ResKind::Success).unwrap().clone()
}

#[test]
fn simplify_removes_multiplication_by_zero() {
    let l = load("simplify");
    let expected = l.shape("Simplified");
    expectation_holds_concretely(&l, "simplify", &l.of_type("Expr"), &ConcreteStore::new(), &expected);
    assert!(success_of(&l, "simplify", "Expr").equiv(&expected));
}

#[test]
fn nnf_output_is_in_normal_form() {
    let l = load("nnf");
    let expected = l.shape("FOut");
    expectation_holds_concretely(&l, "nnf", &l.of_type("Formula"), &ConcreteStore::new(), &expected);
    assert!(success_of(&l, "nnf", "Formula").equiv(&expected));
}

#[test]
fn peano_drops_zero_operands() {
    let l = load("peano");
    let expected = l.shape("Unit");
    expectation_holds_concretely(&l, "unit", &l.of_type("Sum"), &ConcreteStore::new(), &expected);
    assert!(success_of(&l, "unit", "Sum").equiv(&expected));
}

#[test]
fn boolean_folding_leaves_no_constant_operands() {
    let l = load("boolean");
    let expected = l.shape("Folded");
    expectation_holds_concretely(&l, "fold", &l.of_type("Bool"), &ConcreteStore::new(), &expected);
    assert!(success_of(&l, "fold", "Bool").equiv(&expected));
}

#[test]
fn bag_pruning_removes_empty_items() {
    let l = load("bag");
    let expected = l.shape("Pruned");
    expectation_holds_concretely(&l, "prune", &l.of_type("Bag"), &ConcreteStore::new(), &expected);
    assert!(success_of(&l, "prune", "Bag").equiv(&expected));
}

#[test]
fn env_cleaning_drops_zero_bindings() {
    let l = load("env");
    let expected = l.shape("Clean");
    expectation_holds_concretely(&l, "clean", &l.of_type("Env"), &ConcreteStore::new(), &expected);
    assert!(success_of(&l, "clean", "Env").equiv(&expected));
}

#[test]
fn tally_counts_into_an_assigned_global() {
    let l = load("tally");
    let seen: Name = "seen".into();
    let globals = AbstractStore::new().with(&seen, Slot::assigned(l.of_type("Nat")));
    let r = analyze(&l, "tally", &[l.of_type("Tree")], Some(&globals));
    assert_eq!(r.kinds().collect::<Vec<_>>(), vec![ResKind::Success], "{r}");
    let entry = r.get(ResKind::Success).unwrap();
    assert!(entry.value.as_ref().unwrap().equiv(&l.of_type("Tree")));
    // A tree has at least one leaf, so the counter moved at least once.
    let counted = entry.store.get(&seen);
    assert!(!counted.maybe_unassigned);
    assert!(counted.shape.equiv(&l.shape("Positive")), "{}", counted.shape);
    for start in concretize_bounded(&l.of_type("Nat"), &l.schema, Bounds::new(3, 1)) {
        let globals: ConcreteStore = [(seen.clone(), start)].into_iter().collect();
        for t in concretize_bounded(&l.of_type("Tree"), &l.schema, BOUNDS) {
            let out = Interpreter::new(&l.program, &l.schema)
                .run_function(&"tally".into(), vec![t], globals.clone())
                .unwrap();
            assert!(contains(&counted.shape, &out.store[&seen]));
        }
    }
}

#[test]
fn tally_may_read_an_unassigned_global() {
    let l = load("tally");
    let r = analyze(&l, "tally", &[l.of_type("Tree")], None);
    assert!(r.get(ResKind::Error).is_some());
    assert!(r.get(ResKind::Success).is_some());
}

#[test]
fn narrower_inputs_give_narrower_outputs() {
    let l = load("simplify");
    let input = l.shape("NoZeroMult");
    let r = analyze(&l, "simplify", &[input.clone()], None);
    // Nothing to rewrite: the visit leaves the value alone.
    assert!(r.value(ResKind::Success).unwrap().equiv(&input), "{r}");
}
