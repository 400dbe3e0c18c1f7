//! Reference interpreter: the concrete semantics used as a test oracle.

mod matching;
mod value;

use std::collections::BTreeMap;

use thiserror::Error;

pub use matching::match_pattern;
pub use value::{BindingEnv, ConcreteStore, ConcreteValue};

use crate::ast::{Case, Expr, FunDecl, Name, Program, Schema, TypeExpr};
use crate::kind::ResKind;

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;
/// Nested calls beyond this depth are treated like an exhausted budget.
pub const MAX_CALL_DEPTH: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("evaluation exceeded the step budget of {0}")]
    Budget(u64),
    #[error("call nesting exceeded {0}")]
    CallDepth(usize),
    #[error("unknown function `{0}`")]
    UnknownFunction(Name),
    #[error("`{name}` expects {expected} arguments but got {found}")]
    Arity { name: Name, expected: usize, found: usize },
}

/// Result of evaluating an expression: a kind, a value on success, and the final store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub kind: ResKind,
    pub value: Option<ConcreteValue>,
    pub store: ConcreteStore,
}

impl Outcome {
    fn success(v: ConcreteValue, store: ConcreteStore) -> Self {
        Outcome {
            kind: ResKind::Success,
            value: Some(v),
            store,
        }
    }

    fn stop(kind: ResKind, store: ConcreteStore) -> Self {
        Outcome { kind, value: None, store }
    }
}

/// Traversal outcomes have the same form; a fail carries the unchanged value.
pub type VisitOutcome = Outcome;

pub struct Interpreter<'p> {
    program: &'p Program,
    schema: &'p Schema,
    budget: u64,
    steps: u64,
    depth: usize,
    /// Declared types of variables in the function being evaluated.
    declared: BTreeMap<Name, TypeExpr>,
}

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p Program, schema: &'p Schema) -> Self {
        let declared = program.globals.iter().map(|g| (g.name.clone(), g.ty.clone())).collect();
        Interpreter {
            program,
            schema,
            budget: DEFAULT_STEP_BUDGET,
            steps: 0,
            depth: 0,
            declared,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        self.charge(1)
    }

    fn charge(&mut self, cost: u64) -> Result<(), EvalError> {
        self.steps = self.steps.saturating_add(cost);
        if self.steps > self.budget {
            Err(EvalError::Budget(self.budget))
        } else {
            Ok(())
        }
    }

    fn declared_type(&self, x: &Name) -> TypeExpr {
        self.declared.get(x).cloned().unwrap_or(TypeExpr::Value)
    }

    /// Run a function on argument values with the given global values.
    pub fn run_function(
        &mut self,
        name: &Name,
        args: Vec<ConcreteValue>,
        globals: ConcreteStore,
    ) -> Result<Outcome, EvalError> {
        let f = self
            .program
            .function(name)
            .ok_or_else(|| EvalError::UnknownFunction(name.clone()))?;
        if f.params.len() != args.len() {
            return Err(EvalError::Arity {
                name: name.clone(),
                expected: f.params.len(),
                found: args.len(),
            });
        }
        self.invoke(f, args, globals)
    }

    /// Evaluate `f`'s body in a store of its parameters and the globals; the
    /// returned store holds the globals after the call.
    fn invoke(&mut self, f: &FunDecl, args: Vec<ConcreteValue>, globals: ConcreteStore) -> Result<Outcome, EvalError> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(EvalError::CallDepth(MAX_CALL_DEPTH));
        }
        if !args.iter().zip(&f.params).all(|(a, p)| a.has_type(&p.ty, self.schema)) {
            return Ok(Outcome::stop(ResKind::Error, globals));
        }
        let mut store = globals;
        for (a, p) in args.into_iter().zip(&f.params) {
            store.insert(p.name.clone(), a);
        }
        let mut declared: BTreeMap<Name, TypeExpr> =
            self.program.globals.iter().map(|g| (g.name.clone(), g.ty.clone())).collect();
        for p in &f.params {
            declared.insert(p.name.clone(), p.ty.clone());
        }
        let saved = std::mem::replace(&mut self.declared, declared);
        self.depth += 1;
        let out = self.eval(&f.body, store);
        self.depth -= 1;
        self.declared = saved;
        let mut out = out?;
        out.store = self.globals_of(&out.store);
        if out.kind == ResKind::Success && !out.value.as_ref().is_some_and(|v| v.has_type(&f.ret, self.schema)) {
            out.kind = ResKind::Error;
            out.value = None;
        }
        Ok(out)
    }

    fn globals_of(&self, store: &ConcreteStore) -> ConcreteStore {
        self.program
            .globals
            .iter()
            .filter_map(|g| store.get(&g.name).map(|v| (g.name.clone(), v.clone())))
            .collect()
    }

    /// Evaluate a list of expressions left to right; stops at the first non-success.
    fn eval_all(&mut self, es: &[Expr], store: ConcreteStore) -> Result<Result<(Vec<ConcreteValue>, ConcreteStore), Outcome>, EvalError> {
        let mut vals = Vec::with_capacity(es.len());
        let mut store = store;
        for e in es {
            let out = self.eval(e, store)?;
            match (out.kind, out.value) {
                (ResKind::Success, Some(v)) => {
                    vals.push(v);
                    store = out.store;
                }
                (kind, _) => return Ok(Err(Outcome::stop(kind, out.store))),
            }
        }
        Ok(Ok((vals, store)))
    }

    pub fn eval(&mut self, e: &Expr, store: ConcreteStore) -> Result<Outcome, EvalError> {
        self.tick()?;
        match e {
            Expr::Var(x) => match store.get(x).cloned() {
                Some(v) => {
                    // Reading copies the value, so large values cost accordingly.
                    self.charge(v.size() as u64)?;
                    Ok(Outcome::success(v, store))
                }
                None => Ok(Outcome::stop(ResKind::Error, store)),
            },
            Expr::Assign(x, rhs) => {
                let out = self.eval(rhs, store)?;
                let Some(v) = out.value.filter(|_| out.kind == ResKind::Success) else {
                    return Ok(Outcome::stop(out.kind, out.store));
                };
                if !v.has_type(&self.declared_type(x), self.schema) {
                    return Ok(Outcome::stop(ResKind::Error, out.store));
                }
                let mut store = out.store;
                store.insert(x.clone(), v.clone());
                Ok(Outcome::success(v, store))
            }
            Expr::Seq(a, b) => {
                let out = self.eval(a, store)?;
                if out.kind != ResKind::Success {
                    return Ok(out);
                }
                self.eval(b, out.store)
            }
            Expr::Cons(k, args) => {
                let (vals, store) = match self.eval_all(args, store)? {
                    Ok(done) => done,
                    Err(stop) => return Ok(stop),
                };
                let sig = self.schema.ctor(k).expect("checked constructor");
                if vals.iter().zip(&sig.params).all(|(v, t)| v.has_type(t, self.schema)) {
                    Ok(Outcome::success(ConcreteValue::Cons(k.clone(), vals), store))
                } else {
                    Ok(Outcome::stop(ResKind::Error, store))
                }
            }
            Expr::SetLit(args) => Ok(match self.eval_all(args, store)? {
                Ok((vals, store)) => Outcome::success(ConcreteValue::set(vals), store),
                Err(stop) => stop,
            }),
            Expr::Fail => Ok(Outcome::stop(ResKind::Fail, store)),
            Expr::Visit { subject, cases, .. } => {
                let out = self.eval(subject, store)?;
                let Some(v) = out.value.filter(|_| out.kind == ResKind::Success) else {
                    return Ok(Outcome::stop(out.kind, out.store));
                };
                let r = self.visit_bottom_up(cases, v, out.store)?;
                Ok(match (r.kind, r.value) {
                    (ResKind::Error, _) | (_, None) => Outcome::stop(ResKind::Error, r.store),
                    (_, Some(v)) => Outcome::success(v, r.store),
                })
            }
            Expr::Solve(xs, body) => {
                let mut store = store;
                loop {
                    self.tick()?;
                    let before: Vec<Option<ConcreteValue>> = xs.iter().map(|x| store.get(x).cloned()).collect();
                    let out = self.eval(body, store)?;
                    if out.kind != ResKind::Success {
                        return Ok(out);
                    }
                    let after: Vec<Option<ConcreteValue>> = xs.iter().map(|x| out.store.get(x).cloned()).collect();
                    if before == after {
                        return Ok(out);
                    }
                    store = out.store;
                }
            }
            Expr::Call(name, args) => {
                let (vals, store) = match self.eval_all(args, store)? {
                    Ok(done) => done,
                    Err(stop) => return Ok(stop),
                };
                let f = self.program.function(name).expect("checked function");
                let globals = self.globals_of(&store);
                let out = self.invoke(f, vals, globals)?;
                let mut store = store;
                store.extend(out.store);
                Ok(Outcome {
                    kind: out.kind,
                    value: out.value,
                    store,
                })
            }
        }
    }

    /// Rewrite `v` bottom-up: children first, then the rebuilt node.
    ///
    /// The kind is success when any case fired anywhere, fail when none did
    /// (the value is then unchanged), and error when a case body or a
    /// reconstruction went wrong.
    pub fn visit_bottom_up(&mut self, cases: &[Case], v: ConcreteValue, store: ConcreteStore) -> Result<VisitOutcome, EvalError> {
        self.tick()?;
        let mut store = store;
        let mut changed = false;
        let rebuilt = match v {
            ConcreteValue::Cons(k, args) => {
                let mut new_args = Vec::with_capacity(args.len());
                for a in args {
                    let r = self.visit_bottom_up(cases, a, store)?;
                    store = r.store;
                    match (r.kind, r.value) {
                        (ResKind::Error, _) | (_, None) => return Ok(visit_error(store)),
                        (kind, Some(nv)) => {
                            changed |= kind == ResKind::Success;
                            new_args.push(nv);
                        }
                    }
                }
                let sig = self.schema.ctor(&k).expect("well-typed value");
                if !new_args.iter().zip(&sig.params).all(|(a, t)| a.has_type(t, self.schema)) {
                    return Ok(visit_error(store));
                }
                ConcreteValue::Cons(k, new_args)
            }
            ConcreteValue::Set(items) => {
                let mut new_items = Vec::with_capacity(items.len());
                for a in items {
                    let r = self.visit_bottom_up(cases, a, store)?;
                    store = r.store;
                    match (r.kind, r.value) {
                        (ResKind::Error, _) | (_, None) => return Ok(visit_error(store)),
                        (kind, Some(nv)) => {
                            changed |= kind == ResKind::Success;
                            new_items.push(nv);
                        }
                    }
                }
                ConcreteValue::set(new_items)
            }
            leaf => leaf,
        };
        let r = self.run_cases(cases, rebuilt, store)?;
        Ok(match r.kind {
            ResKind::Fail if changed => VisitOutcome {
                kind: ResKind::Success,
                ..r
            },
            _ => r,
        })
    }

    /// Try each case and each binding in order until a body does not fail.
    fn run_cases(&mut self, cases: &[Case], v: ConcreteValue, store: ConcreteStore) -> Result<VisitOutcome, EvalError> {
        for case in cases {
            for rho in match_pattern(&case.pattern, &v, &store) {
                self.tick()?;
                let mut inner = store.clone();
                inner.extend(rho.iter().map(|(k, x)| (k.clone(), x.clone())));
                let out = self.eval(&case.body, inner)?;
                match out.kind {
                    ResKind::Fail => continue,
                    ResKind::Error => return Ok(visit_error(restore(out.store, &rho, &store))),
                    ResKind::Success => {
                        return Ok(VisitOutcome {
                            kind: ResKind::Success,
                            value: out.value,
                            store: restore(out.store, &rho, &store),
                        })
                    }
                }
            }
        }
        Ok(VisitOutcome {
            kind: ResKind::Fail,
            value: Some(v),
            store,
        })
    }
}

fn visit_error(store: ConcreteStore) -> VisitOutcome {
    VisitOutcome {
        kind: ResKind::Error,
        value: None,
        store,
    }
}

/// Drop pattern-bound variables, restoring whatever they held before the case.
fn restore(mut store: ConcreteStore, rho: &BindingEnv, before: &ConcreteStore) -> ConcreteStore {
    for x in rho.keys() {
        match before.get(x) {
            Some(old) => store.insert(x.clone(), old.clone()),
            None => store.remove(x),
        };
    }
    store
}
