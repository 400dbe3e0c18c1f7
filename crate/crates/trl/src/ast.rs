//! Abstract syntax of TRL programs, the type language and static checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Interned-ish identifier. Cheap to clone and totally ordered.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl std::borrow::Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeExpr {
    Void,
    Value,
    Int,
    Str,
    Set(Box<TypeExpr>),
    Adt(Name),
}

impl TypeExpr {
    pub fn set_of(elem: TypeExpr) -> Self {
        TypeExpr::Set(Box::new(elem))
    }

    /// Truncate set nesting below `depth` levels, replacing the cut part by `Value`.
    pub fn truncate(&self, depth: usize) -> TypeExpr {
        match self {
            TypeExpr::Set(_) if depth == 0 => TypeExpr::Value,
            TypeExpr::Set(inner) => TypeExpr::set_of(inner.truncate(depth - 1)),
            other => other.clone(),
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Void => f.write_str("void"),
            TypeExpr::Value => f.write_str("value"),
            TypeExpr::Int => f.write_str("int"),
            TypeExpr::Str => f.write_str("str"),
            TypeExpr::Set(t) => write!(f, "set<{t}>"),
            TypeExpr::Adt(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub ty: TypeExpr,
    pub name: Name,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDecl {
    pub name: Name,
    pub params: Vec<Param>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataDecl {
    pub name: Name,
    pub ctors: Vec<CtorDecl>,
}

/// Identifies a `visit` expression; used to key memo tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SiteId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var(Name),
    Assign(Name, Box<Expr>),
    Seq(Box<Expr>, Box<Expr>),
    Cons(Name, Vec<Expr>),
    SetLit(Vec<Expr>),
    Fail,
    Visit {
        site: SiteId,
        subject: Box<Expr>,
        cases: Vec<Case>,
    },
    Solve(Vec<Name>, Box<Expr>),
    Call(Name, Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub pattern: Pattern,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(Name),
    Cons(Name, Vec<Pattern>),
    Set(Vec<StarPattern>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StarPattern {
    Plain(Pattern),
    Star(Name),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDecl {
    pub name: Name,
    pub ret: TypeExpr,
    pub params: Vec<Param>,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    pub datas: Vec<DataDecl>,
    pub globals: Vec<Param>,
    pub funs: Vec<FunDecl>,
}

impl Program {
    pub fn function(&self, name: &Name) -> Option<&FunDecl> {
        self.funs.iter().find(|f| &f.name == name)
    }

    /// Renumber visit sites in declaration order. Parsing calls this, so two
    /// structurally equal programs end up with equal site ids.
    pub fn number_sites(&mut self) {
        let mut next = 0u32;
        for f in &mut self.funs {
            number_expr(&mut f.body, &mut next);
        }
    }
}

fn number_expr(e: &mut Expr, next: &mut u32) {
    match e {
        Expr::Var(_) | Expr::Fail => {}
        Expr::Assign(_, inner) | Expr::Solve(_, inner) => number_expr(inner, next),
        Expr::Seq(a, b) => {
            number_expr(a, next);
            number_expr(b, next);
        }
        Expr::Cons(_, args) | Expr::SetLit(args) | Expr::Call(_, args) => {
            for a in args {
                number_expr(a, next);
            }
        }
        Expr::Visit {
            site,
            subject,
            cases,
        } => {
            *site = SiteId(*next);
            *next += 1;
            number_expr(subject, next);
            for c in cases {
                number_expr(&mut c.body, next);
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StaticError {
    #[error("unknown data type `{0}`")]
    UnknownAdt(Name),
    #[error("data type `{0}` declared more than once")]
    DuplicateAdt(Name),
    #[error("constructor `{0}` declared more than once")]
    DuplicateCtor(Name),
    #[error("function `{0}` declared more than once")]
    DuplicateFunction(Name),
    #[error("unknown constructor `{0}`")]
    UnknownCtor(Name),
    #[error("unknown function `{0}`")]
    UnknownFunction(Name),
    #[error("`{name}` expects {expected} arguments but got {found}")]
    Arity {
        name: Name,
        expected: usize,
        found: usize,
    },
    #[error("visit without cases")]
    EmptyVisit,
    #[error("`{0}` is both a constructor and a function")]
    Ambiguous(Name),
}

/// Constructor signature as seen from the rest of the analyzer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorSig {
    pub adt: Name,
    pub params: Vec<TypeExpr>,
}

/// Lookup tables derived from the data declarations of a program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    adts: BTreeMap<Name, Vec<Name>>,
    ctors: BTreeMap<Name, CtorSig>,
}

impl Schema {
    pub fn new(datas: &[DataDecl]) -> Result<Self, StaticError> {
        let mut schema = Schema::default();
        for d in datas {
            if schema.adts.contains_key(&d.name) {
                return Err(StaticError::DuplicateAdt(d.name.clone()));
            }
            schema
                .adts
                .insert(d.name.clone(), d.ctors.iter().map(|c| c.name.clone()).collect());
        }
        for d in datas {
            for c in &d.ctors {
                for p in &c.params {
                    schema.check_type(&p.ty)?;
                }
                let sig = CtorSig {
                    adt: d.name.clone(),
                    params: c.params.iter().map(|p| p.ty.clone()).collect(),
                };
                if schema.ctors.insert(c.name.clone(), sig).is_some() {
                    return Err(StaticError::DuplicateCtor(c.name.clone()));
                }
            }
        }
        Ok(schema)
    }

    pub fn adt_names(&self) -> impl Iterator<Item = &Name> {
        self.adts.keys()
    }

    pub fn ctors_of(&self, adt: &Name) -> &[Name] {
        self.adts.get(adt).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn ctor(&self, k: &Name) -> Option<&CtorSig> {
        self.ctors.get(k)
    }

    pub fn has_adt(&self, adt: &Name) -> bool {
        self.adts.contains_key(adt)
    }

    pub fn check_type(&self, t: &TypeExpr) -> Result<(), StaticError> {
        match t {
            TypeExpr::Adt(n) if !self.adts.contains_key(n) => Err(StaticError::UnknownAdt(n.clone())),
            TypeExpr::Set(inner) => self.check_type(inner),
            _ => Ok(()),
        }
    }

    /// Subtyping with `void` at the bottom and `value` at the top.
    pub fn subtype(&self, t1: &TypeExpr, t2: &TypeExpr) -> Result<bool, StaticError> {
        self.check_type(t1)?;
        self.check_type(t2)?;
        Ok(subtype_unchecked(t1, t2))
    }

    /// Holds when some non-void type is a subtype of both arguments.
    pub fn abstract_subtype(&self, t1: &TypeExpr, t2: &TypeExpr) -> Result<bool, StaticError> {
        self.check_type(t1)?;
        self.check_type(t2)?;
        Ok(abstract_subtype_unchecked(t1, t2))
    }

    /// Holds when some non-void subtype of `t1` is not a subtype of `t2`.
    pub fn abstract_not_subtype(&self, t1: &TypeExpr, t2: &TypeExpr) -> Result<bool, StaticError> {
        self.check_type(t1)?;
        self.check_type(t2)?;
        Ok(abstract_not_subtype_unchecked(t1, t2))
    }
}

pub(crate) fn subtype_unchecked(t1: &TypeExpr, t2: &TypeExpr) -> bool {
    match (t1, t2) {
        (TypeExpr::Void, _) | (_, TypeExpr::Value) => true,
        (TypeExpr::Set(a), TypeExpr::Set(b)) => subtype_unchecked(a, b),
        (a, b) => a == b,
    }
}

/// Greatest common subtype.
pub(crate) fn type_meet(t1: &TypeExpr, t2: &TypeExpr) -> TypeExpr {
    match (t1, t2) {
        (TypeExpr::Value, t) | (t, TypeExpr::Value) => t.clone(),
        (TypeExpr::Set(a), TypeExpr::Set(b)) => TypeExpr::set_of(type_meet(a, b)),
        (a, b) if a == b => a.clone(),
        _ => TypeExpr::Void,
    }
}

pub(crate) fn abstract_subtype_unchecked(t1: &TypeExpr, t2: &TypeExpr) -> bool {
    type_meet(t1, t2) != TypeExpr::Void
}

pub(crate) fn abstract_not_subtype_unchecked(t1: &TypeExpr, t2: &TypeExpr) -> bool {
    // t1 itself is the witness whenever it is not below t2.
    *t1 != TypeExpr::Void && !subtype_unchecked(t1, t2)
}

impl Pattern {
    /// All variables occurring in the pattern, star variables included.
    pub fn vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Pattern::Var(x) => {
                out.insert(x.clone());
            }
            Pattern::Cons(_, ps) => ps.iter().for_each(|p| p.collect_vars(out)),
            Pattern::Set(sps) => {
                for sp in sps {
                    match sp {
                        StarPattern::Plain(p) => p.collect_vars(out),
                        StarPattern::Star(x) => {
                            out.insert(x.clone());
                        }
                    }
                }
            }
        }
    }
}

/// Static well-formedness: declarations, arities and name resolution.
pub fn check_program(program: &Program) -> Result<Schema, StaticError> {
    let schema = Schema::new(&program.datas)?;
    for g in &program.globals {
        schema.check_type(&g.ty)?;
    }
    let mut seen = BTreeSet::new();
    for f in &program.funs {
        if !seen.insert(f.name.clone()) {
            return Err(StaticError::DuplicateFunction(f.name.clone()));
        }
    }
    for f in &program.funs {
        check_function(f, &schema, program)?;
    }
    Ok(schema)
}

/// Checks of a single function against the rest of the program.
pub fn check_function(f: &FunDecl, schema: &Schema, program: &Program) -> Result<(), StaticError> {
    if schema.ctor(&f.name).is_some() {
        return Err(StaticError::Ambiguous(f.name.clone()));
    }
    schema.check_type(&f.ret)?;
    for p in &f.params {
        schema.check_type(&p.ty)?;
    }
    check_expr(&f.body, schema, program)
}

fn check_expr(e: &Expr, schema: &Schema, program: &Program) -> Result<(), StaticError> {
    match e {
        Expr::Var(_) | Expr::Fail => Ok(()),
        Expr::Assign(_, inner) | Expr::Solve(_, inner) => check_expr(inner, schema, program),
        Expr::Seq(a, b) => {
            check_expr(a, schema, program)?;
            check_expr(b, schema, program)
        }
        Expr::Cons(k, args) => {
            let sig = schema.ctor(k).ok_or_else(|| StaticError::UnknownCtor(k.clone()))?;
            check_arity(k, sig.params.len(), args.len())?;
            args.iter().try_for_each(|a| check_expr(a, schema, program))
        }
        Expr::SetLit(args) => args.iter().try_for_each(|a| check_expr(a, schema, program)),
        Expr::Call(name, args) => {
            let f = program
                .function(name)
                .ok_or_else(|| StaticError::UnknownFunction(name.clone()))?;
            check_arity(name, f.params.len(), args.len())?;
            args.iter().try_for_each(|a| check_expr(a, schema, program))
        }
        Expr::Visit { subject, cases, .. } => {
            if cases.is_empty() {
                return Err(StaticError::EmptyVisit);
            }
            check_expr(subject, schema, program)?;
            for c in cases {
                check_pattern(&c.pattern, schema)?;
                check_expr(&c.body, schema, program)?;
            }
            Ok(())
        }
    }
}

fn check_pattern(p: &Pattern, schema: &Schema) -> Result<(), StaticError> {
    match p {
        Pattern::Var(_) => Ok(()),
        Pattern::Cons(k, ps) => {
            let sig = schema.ctor(k).ok_or_else(|| StaticError::UnknownCtor(k.clone()))?;
            check_arity(k, sig.params.len(), ps.len())?;
            ps.iter().try_for_each(|q| check_pattern(q, schema))
        }
        Pattern::Set(sps) => sps.iter().try_for_each(|sp| match sp {
            StarPattern::Plain(q) => check_pattern(q, schema),
            StarPattern::Star(_) => Ok(()),
        }),
    }
}

fn check_arity(name: &Name, expected: usize, found: usize) -> Result<(), StaticError> {
    if expected == found {
        Ok(())
    } else {
        Err(StaticError::Arity {
            name: name.clone(),
            expected,
            found,
        })
    }
}
