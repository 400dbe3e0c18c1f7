//! Abstract interpreter: evaluates programs over shapes and stores, producing
//! result sets that cover every concrete run.

mod memo;
mod visit;

use std::collections::BTreeMap;

use thiserror::Error;

pub use memo::{partition_key, PartitionKey, Tables, KEY_DEPTH};

use crate::ast::{abstract_not_subtype_unchecked, abstract_subtype_unchecked, Case, Expr, FunDecl, Name, Program, Schema, SiteId, TypeExpr};
use crate::kind::ResKind;
use crate::shape::{Card, Shape};
use crate::state::{AbstractStore, Lattice, ResultSet, Results, Slot};
use memo::{lookup, Lookup, Table};

pub const DEFAULT_MAX_ROUNDS: usize = 1000;
pub const DEFAULT_MAX_STEPS: u64 = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("fixed-point iteration did not stabilize within {0} rounds")]
    RoundBudget(usize),
    #[error("analysis exceeded {0} evaluation steps")]
    StepBudget(u64),
    #[error("unknown function `{0}`")]
    UnknownFunction(Name),
    #[error("`{name}` expects {expected} arguments but got {found}")]
    Arity { name: Name, expected: usize, found: usize },
}

/// Iteration limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Rounds of a single fixed-point loop.
    pub max_rounds: usize,
    /// Expression evaluations over the whole analysis.
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_rounds: DEFAULT_MAX_ROUNDS,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

/// Counters reported with an analysis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub steps: u64,
    /// Fixed-point rounds over all memo entries.
    pub rounds: u64,
}

pub struct Analyzer<'p> {
    program: &'p Program,
    schema: &'p Schema,
    budget: Budget,
    stats: Stats,
    tables: Tables,
    /// Declared types of the variables of the function being analyzed.
    declared: BTreeMap<Name, TypeExpr>,
}

impl<'p> Analyzer<'p> {
    pub fn new(program: &'p Program, schema: &'p Schema) -> Self {
        Analyzer {
            program,
            schema,
            budget: Budget::default(),
            stats: Stats::default(),
            tables: Tables::default(),
            declared: globals_declared(program),
        }
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn tables(&self) -> &Tables {
        &self.tables
    }

    /// Store at function entry: parameters definitely assigned, globals as given or
    /// possibly unassigned with any value of their type.
    pub fn entry_store(&self, f: &FunDecl, args: &[Shape], globals: Option<&AbstractStore>) -> AbstractStore {
        let mut store = AbstractStore::new();
        for g in &self.program.globals {
            let slot = match globals {
                Some(given) => given.get(&g.name),
                None => Slot::maybe(Shape::of_type(&g.ty, self.schema)),
            };
            store.set(&g.name, slot);
        }
        for (p, a) in f.params.iter().zip(args) {
            store.set(&p.name, Slot::assigned(a.meet(&Shape::of_type(&p.ty, self.schema))));
        }
        store
    }

    /// Analyze `name` on argument shapes; result stores hold the globals afterwards.
    pub fn analyze_function(
        &mut self,
        name: &Name,
        args: &[Shape],
        globals: Option<&AbstractStore>,
    ) -> Result<ResultSet, AnalysisError> {
        let f = self.lookup_function(name, args.len())?;
        let store = self.entry_store(f, args, globals);
        if args.iter().any(Shape::is_bottom) {
            return Ok(ResultSet::empty());
        }
        self.call(f, store)
    }

    /// Bottom-up traversal of `vs` with the given cases, as a visit expression at `site` would run it.
    ///
    /// Unlike a visit expression, the fail entry (no case fired anywhere) is kept apart.
    pub fn traverse(
        &mut self,
        site: SiteId,
        cases: &[Case],
        vs: &Shape,
        store: &AbstractStore,
    ) -> Result<ResultSet, AnalysisError> {
        self.avisit(site, cases, vs, store)
    }

    /// Run `f` on the body of a function with its declared variable types in scope.
    pub fn in_function<T>(&mut self, f: &FunDecl, run: impl FnOnce(&mut Self) -> T) -> T {
        let mut declared = globals_declared(self.program);
        for p in &f.params {
            declared.insert(p.name.clone(), p.ty.clone());
        }
        let saved = std::mem::replace(&mut self.declared, declared);
        let out = run(self);
        self.declared = saved;
        out
    }

    fn lookup_function(&self, name: &Name, arity: usize) -> Result<&'p FunDecl, AnalysisError> {
        let f = self
            .program
            .function(name)
            .ok_or_else(|| AnalysisError::UnknownFunction(name.clone()))?;
        if f.params.len() != arity {
            return Err(AnalysisError::Arity {
                name: name.clone(),
                expected: f.params.len(),
                found: arity,
            });
        }
        Ok(f)
    }

    fn tick(&mut self) -> Result<(), AnalysisError> {
        self.stats.steps += 1;
        if self.stats.steps > self.budget.max_steps {
            Err(AnalysisError::StepBudget(self.budget.max_steps))
        } else {
            Ok(())
        }
    }

    fn declared_type(&self, x: &Name) -> TypeExpr {
        self.declared.get(x).cloned().unwrap_or(TypeExpr::Value)
    }

    fn ty(&self, t: &TypeExpr) -> Shape {
        Shape::of_type(t, self.schema)
    }

    /// Memoized fixed point of `body` at `key`.
    fn fixpoint<K, I, O>(
        &mut self,
        table: fn(&mut Tables) -> &mut Table<K, I, O>,
        key: K,
        input: I,
        body: &mut dyn FnMut(&mut Self, &I) -> Result<O, AnalysisError>,
    ) -> Result<O, AnalysisError>
    where
        K: Ord + Clone,
        I: Lattice,
        O: Lattice + Default,
    {
        let mut i = match lookup(table(&mut self.tables), &key, input) {
            Lookup::Hit(o) => return Ok(o),
            Lookup::Iterate(i) => i,
        };
        let mut o_prev = O::default();
        let snapshot = self.tables.clone();
        for _ in 0..self.budget.max_rounds {
            self.stats.rounds += 1;
            table(&mut self.tables).insert(key.clone(), (i.clone(), o_prev.clone()));
            let o = body(self, &i)?;
            let (stored_in, stored_out) = table(&mut self.tables).get(&key).cloned().expect("entry inserted above");
            if !stored_in.leq(&i) {
                // A nested query widened the input of this entry; continue from there.
                i = stored_in;
                o_prev = stored_out;
                self.tables = snapshot.clone();
                continue;
            }
            if o.leq(&o_prev) {
                table(&mut self.tables).insert(key, (i, o_prev.clone()));
                return Ok(o_prev);
            }
            o_prev = o_prev.widen(&o);
            self.tables = snapshot.clone();
        }
        Err(AnalysisError::RoundBudget(self.budget.max_rounds))
    }

    pub fn aeval(&mut self, e: &Expr, store: &AbstractStore) -> Result<ResultSet, AnalysisError> {
        self.tick()?;
        match e {
            Expr::Var(x) => {
                let slot = store.get(x);
                let mut r = ResultSet::empty();
                if !slot.shape.is_bottom() {
                    r.add(ResKind::Success, Some(slot.shape.clone()), store.clone());
                }
                if slot.maybe_unassigned {
                    r.add(ResKind::Error, None, store.clone());
                }
                Ok(r)
            }
            Expr::Assign(x, rhs) => {
                let r = self.aeval(rhs, store)?;
                let t = self.declared_type(x);
                let tshape = self.ty(&t);
                let mut out = ResultSet::empty();
                for (kind, entry) in r.iter() {
                    let (ResKind::Success, Some(v)) = (kind, &entry.value) else {
                        out.add(kind, None, entry.store.clone());
                        continue;
                    };
                    let vt = v.type_of();
                    if abstract_subtype_unchecked(&vt, &t) {
                        let typed = v.meet(&tshape);
                        if !typed.is_bottom() {
                            let st = entry.store.clone().with(x, Slot::assigned(typed.clone()));
                            out.add(ResKind::Success, Some(typed), st);
                        }
                    }
                    if abstract_not_subtype_unchecked(&vt, &t) {
                        out.add(ResKind::Error, None, entry.store.clone());
                    }
                }
                Ok(out)
            }
            Expr::Seq(a, b) => {
                let r = self.aeval(a, store)?;
                let mut out = ResultSet::empty();
                for (kind, entry) in r.iter() {
                    if kind == ResKind::Success {
                        out.absorb(self.aeval(b, &entry.store)?);
                    } else {
                        out.add(kind, None, entry.store.clone());
                    }
                }
                Ok(out)
            }
            Expr::Cons(k, args) => {
                let r = self.aeval_seq(args, store)?;
                let sig = self.schema.ctor(k).expect("checked constructor").clone();
                let mut out = ResultSet::empty();
                for (kind, entry) in r.iter() {
                    let (ResKind::Success, Some(vs)) = (kind, &entry.value) else {
                        out.add(kind, None, entry.store.clone());
                        continue;
                    };
                    let (typed, may_err) = self.typed_args(vs, &sig.params);
                    if let Some(typed) = typed {
                        out.add(ResKind::Success, Some(Shape::cons(self.schema, k, typed)), entry.store.clone());
                    }
                    if may_err {
                        out.add(ResKind::Error, None, entry.store.clone());
                    }
                }
                Ok(out)
            }
            Expr::SetLit(args) => {
                let r = self.aeval_seq(args, store)?;
                let n = args.len() as u64;
                Ok(r.map(|kind, v| match kind {
                    ResKind::Success => v.map(|vs| {
                        let elem = vs.iter().fold(Shape::bottom(), |a, b| a.join(b));
                        Shape::set(&elem, Card { lo: 0, hi: Some(n) })
                    }),
                    _ => None,
                }))
            }
            Expr::Fail => Ok(ResultSet::single(ResKind::Fail, None, store.clone())),
            Expr::Visit { site, subject, cases } => {
                let r = self.aeval(subject, store)?;
                let mut out = ResultSet::empty();
                for (kind, entry) in r.iter() {
                    let (ResKind::Success, Some(v)) = (kind, &entry.value) else {
                        out.add(kind, None, entry.store.clone());
                        continue;
                    };
                    let vr = self.avisit(*site, cases, v, &entry.store)?;
                    for (vk, ve) in vr.iter() {
                        let kind = if vk == ResKind::Error { ResKind::Error } else { ResKind::Success };
                        out.add(kind, ve.value.clone(), ve.store.clone());
                    }
                }
                Ok(out)
            }
            Expr::Solve(_, body) => self.solve(body, store),
            Expr::Call(name, args) => {
                let f = self.lookup_function(name, args.len())?;
                let r = self.aeval_seq(args, store)?;
                let params: Vec<TypeExpr> = f.params.iter().map(|p| p.ty.clone()).collect();
                let mut out = ResultSet::empty();
                for (kind, entry) in r.iter() {
                    let (ResKind::Success, Some(vs)) = (kind, &entry.value) else {
                        out.add(kind, None, entry.store.clone());
                        continue;
                    };
                    let (typed, may_err) = self.typed_args(vs, &params);
                    if may_err {
                        out.add(ResKind::Error, None, entry.store.clone());
                    }
                    let Some(typed) = typed else { continue };
                    let globals = entry.store.restrict(|x| self.is_global(x));
                    let callee = self.entry_store(f, &typed, Some(&globals));
                    let res = self.call(f, callee)?;
                    for (ck, ce) in res.iter() {
                        let mut st = entry.store.clone();
                        for g in &self.program.globals {
                            st.set(&g.name, ce.store.get(&g.name));
                        }
                        out.add(ck, ce.value.clone(), st);
                    }
                }
                Ok(out)
            }
        }
    }

    fn is_global(&self, x: &Name) -> bool {
        self.program.globals.iter().any(|g| &g.name == x)
    }

    /// Refine argument shapes to parameter types; `None` when some argument cannot be well-typed.
    fn typed_args(&self, vs: &[Shape], params: &[TypeExpr]) -> (Option<Vec<Shape>>, bool) {
        let mut may_err = false;
        let mut typed = Some(Vec::with_capacity(vs.len()));
        for (v, t) in vs.iter().zip(params) {
            let vt = v.type_of();
            may_err |= abstract_not_subtype_unchecked(&vt, t);
            let m = v.meet(&self.ty(t));
            if !abstract_subtype_unchecked(&vt, t) || m.is_bottom() {
                typed = None;
            } else if let Some(ts) = typed.as_mut() {
                ts.push(m);
            }
        }
        (typed, may_err)
    }

    /// Evaluate expressions left to right, threading the store.
    fn aeval_seq(&mut self, es: &[Expr], store: &AbstractStore) -> Result<Results<Vec<Shape>>, AnalysisError> {
        let mut acc = Results::success(Vec::new(), store.clone());
        for e in es {
            let mut next = Results::empty();
            for (kind, entry) in acc.iter() {
                let (ResKind::Success, Some(prefix)) = (kind, &entry.value) else {
                    next.add(kind, None, entry.store.clone());
                    continue;
                };
                for (k2, e2) in self.aeval(e, &entry.store)?.iter() {
                    let value = e2.value.as_ref().filter(|_| k2 == ResKind::Success).map(|v| {
                        let mut vs = prefix.clone();
                        vs.push(v.clone());
                        vs
                    });
                    next.add(k2, value, e2.store.clone());
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    /// Iterate the body over a widened store until the store is stable.
    ///
    /// Any iteration may be the last, so the results of all iterations are collected.
    fn solve(&mut self, body: &Expr, store: &AbstractStore) -> Result<ResultSet, AnalysisError> {
        let mut current = store.clone();
        let mut out = ResultSet::empty();
        for _ in 0..self.budget.max_rounds {
            self.stats.rounds += 1;
            let r = self.aeval(body, &current)?;
            let next = r
                .get(ResKind::Success)
                .map_or_else(|| current.clone(), |e| current.join(&e.store));
            out.absorb(r);
            let widened = current.widen(&next);
            if widened.leq(&current) {
                return Ok(out);
            }
            current = widened;
        }
        Err(AnalysisError::RoundBudget(self.budget.max_rounds))
    }

    /// Analyze a call from the callee's entry store, memoized per function and argument types.
    fn call(&mut self, f: &'p FunDecl, callee: AbstractStore) -> Result<ResultSet, AnalysisError> {
        let key = (
            f.name.clone(),
            f.params.iter().map(|p| partition_key(&callee.get(&p.name).shape)).collect(),
        );
        self.fixpoint(|t| &mut t.call, key, callee, &mut |me, input| {
            let r = me.in_function(f, |me| me.aeval(&f.body, input))?;
            let ret = me.ty(&f.ret);
            let mut out = ResultSet::empty();
            for (kind, entry) in r.iter() {
                let globals = entry.store.restrict(|x| me.is_global(x));
                match (kind, &entry.value) {
                    (ResKind::Success, Some(v)) => {
                        let vt = v.type_of();
                        if abstract_subtype_unchecked(&vt, &f.ret) {
                            out.add(ResKind::Success, Some(v.meet(&ret)), globals.clone());
                        }
                        if abstract_not_subtype_unchecked(&vt, &f.ret) {
                            out.add(ResKind::Error, None, globals);
                        }
                    }
                    _ => out.add(kind, None, globals),
                }
            }
            Ok(out)
        })
    }
}

fn globals_declared(program: &Program) -> BTreeMap<Name, TypeExpr> {
    program.globals.iter().map(|g| (g.name.clone(), g.ty.clone())).collect()
}
