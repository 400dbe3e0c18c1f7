//! Surface syntax for programs (`.trl`) and refinement blocks (`.shape`).

mod lexer;
mod pretty;
mod refine;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ast::*;
use lexer::{lex, Tok, Token};

pub use pretty::{pretty_expr, pretty_pattern, pretty_program};
pub use refine::{parse_refinement, parse_refinement_named, parse_shape_term, RefinementDecl, ShapeTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub start: Pos,
    pub end: Pos,
}

impl SourceSpan {
    pub fn new(file: &str, start: Pos, end: Pos) -> Self {
        SourceSpan {
            file: Arc::from(file),
            start,
            end: end.max(start),
        }
    }

    fn to(&self, other: &SourceSpan) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            start: self.start,
            end: other.end.max(self.start),
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start.line, self.start.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("{span}: {error}")]
    Static { span: SourceSpan, error: StaticError },
    #[error("{span}: {message}")]
    Refinement { span: SourceSpan, message: String },
}

impl ParseError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::Static { span, .. }
            | ParseError::Refinement { span, .. } => span,
        }
    }
}

const KEYWORDS: &[&str] = &[
    "data", "fun", "global", "refine", "of", "visit", "case", "solve", "fail", "set", "int", "str",
    "value", "void", "inf",
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str, file: &str) -> Result<Self, ParseError> {
        Ok(Cursor {
            toks: lex(text, file)?,
            pos: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub(crate) fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    pub(crate) fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span.clone()
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            span: self.span(),
            message: message.into(),
        })
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!(
                "expected {} but found {}",
                tok.describe(),
                self.peek().describe()
            ))
        }
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub(crate) fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{kw}` but found {}", self.peek().describe()))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Name::new(&s))
            }
            other => self.error(format!("expected identifier but found {}", other.describe())),
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }
}

fn parse_type(c: &mut Cursor) -> Result<TypeExpr, ParseError> {
    let t = match c.peek().clone() {
        Tok::Ident(s) => match s.as_str() {
            "int" => TypeExpr::Int,
            "str" => TypeExpr::Str,
            "value" => TypeExpr::Value,
            "void" => TypeExpr::Void,
            "set" => {
                c.bump();
                c.expect(Tok::Lt)?;
                let inner = parse_type(c)?;
                c.expect(Tok::Gt)?;
                return Ok(TypeExpr::set_of(inner));
            }
            _ => return Ok(TypeExpr::Adt(c.ident()?)),
        },
        other => return c.error(format!("expected a type but found {}", other.describe())),
    };
    c.bump();
    Ok(t)
}

fn parse_params(c: &mut Cursor) -> Result<Vec<Param>, ParseError> {
    c.expect(Tok::LParen)?;
    let mut params = Vec::new();
    if !c.eat(&Tok::RParen) {
        loop {
            let ty = parse_type(c)?;
            let name = c.ident()?;
            params.push(Param { ty, name });
            if c.eat(&Tok::RParen) {
                break;
            }
            c.expect(Tok::Comma)?;
        }
    }
    Ok(params)
}

/// A top-level declaration together with its source extent.
enum Item {
    Data(DataDecl, SourceSpan),
    Global(Param),
    Fun(FunDecl, SourceSpan),
}

fn parse_expr(c: &mut Cursor) -> Result<Expr, ParseError> {
    if let Tok::Ident(s) = c.peek().clone() {
        if !is_keyword(&s) && *c.peek_at(1) == Tok::Eq {
            let x = c.ident()?;
            c.bump();
            let rhs = parse_expr(c)?;
            return Ok(Expr::Assign(x, Box::new(rhs)));
        }
        if s == "solve" {
            c.bump();
            c.expect(Tok::LParen)?;
            let mut vars = vec![c.ident()?];
            while c.eat(&Tok::Comma) {
                vars.push(c.ident()?);
            }
            c.expect(Tok::RParen)?;
            let body = parse_expr(c)?;
            return Ok(Expr::Solve(vars, Box::new(body)));
        }
    }
    if *c.peek() == Tok::BottomUp {
        c.bump();
        c.expect_kw("visit")?;
        c.expect(Tok::LParen)?;
        let subject = parse_expr(c)?;
        c.expect(Tok::RParen)?;
        c.expect(Tok::LBrace)?;
        let mut cases = Vec::new();
        while c.is_kw("case") {
            c.bump();
            let pattern = parse_pattern(c)?;
            c.expect(Tok::Arrow)?;
            let body = parse_expr(c)?;
            cases.push(Case { pattern, body });
        }
        if cases.is_empty() {
            return c.error("a visit needs at least one case");
        }
        c.expect(Tok::RBrace)?;
        return Ok(Expr::Visit {
            site: SiteId::default(),
            subject: Box::new(subject),
            cases,
        });
    }
    parse_primary(c)
}

fn parse_args(c: &mut Cursor, close: Tok) -> Result<Vec<Expr>, ParseError> {
    let mut args = Vec::new();
    if c.eat(&close) {
        return Ok(args);
    }
    loop {
        args.push(parse_expr(c)?);
        if c.eat(&close) {
            return Ok(args);
        }
        c.expect(Tok::Comma)?;
    }
}

fn parse_primary(c: &mut Cursor) -> Result<Expr, ParseError> {
    match c.peek().clone() {
        Tok::Ident(s) if s == "fail" => {
            c.bump();
            Ok(Expr::Fail)
        }
        Tok::Ident(_) => {
            let name = c.ident()?;
            if c.eat(&Tok::LParen) {
                let args = parse_args(c, Tok::RParen)?;
                // Constructor vs call is decided once all declarations are known.
                Ok(Expr::Call(name, args))
            } else {
                Ok(Expr::Var(name))
            }
        }
        Tok::LBrace => {
            c.bump();
            Ok(Expr::SetLit(parse_args(c, Tok::RBrace)?))
        }
        Tok::LParen => {
            c.bump();
            let mut items = vec![parse_expr(c)?];
            while c.eat(&Tok::Semi) {
                items.push(parse_expr(c)?);
            }
            c.expect(Tok::RParen)?;
            let mut it = items.into_iter().rev();
            let mut acc = it.next().expect("at least one expression");
            for e in it {
                acc = Expr::Seq(Box::new(e), Box::new(acc));
            }
            Ok(acc)
        }
        other => c.error(format!("expected an expression but found {}", other.describe())),
    }
}

fn parse_pattern(c: &mut Cursor) -> Result<Pattern, ParseError> {
    match c.peek().clone() {
        Tok::LBrace => {
            c.bump();
            let mut elems = Vec::new();
            if !c.eat(&Tok::RBrace) {
                loop {
                    if c.eat(&Tok::Star) {
                        elems.push(StarPattern::Star(c.ident()?));
                    } else {
                        elems.push(StarPattern::Plain(parse_pattern(c)?));
                    }
                    if c.eat(&Tok::RBrace) {
                        break;
                    }
                    c.expect(Tok::Comma)?;
                }
            }
            Ok(Pattern::Set(elems))
        }
        Tok::Ident(_) => {
            let name = c.ident()?;
            if c.eat(&Tok::LParen) {
                let mut ps = Vec::new();
                if !c.eat(&Tok::RParen) {
                    loop {
                        ps.push(parse_pattern(c)?);
                        if c.eat(&Tok::RParen) {
                            break;
                        }
                        c.expect(Tok::Comma)?;
                    }
                }
                Ok(Pattern::Cons(name, ps))
            } else {
                Ok(Pattern::Var(name))
            }
        }
        other => c.error(format!("expected a pattern but found {}", other.describe())),
    }
}

fn parse_item(c: &mut Cursor) -> Result<Item, ParseError> {
    let start = c.span();
    if c.is_kw("data") {
        c.bump();
        let name = c.ident()?;
        c.expect(Tok::Eq)?;
        let mut ctors = Vec::new();
        loop {
            let cname = c.ident()?;
            let params = parse_params(c)?;
            ctors.push(CtorDecl {
                name: cname,
                params,
            });
            if !c.eat(&Tok::Bar) {
                break;
            }
        }
        c.expect(Tok::Semi)?;
        let span = start.to(&c.prev_span());
        Ok(Item::Data(DataDecl { name, ctors }, span))
    } else if c.is_kw("global") {
        c.bump();
        let ty = parse_type(c)?;
        let name = c.ident()?;
        c.expect(Tok::Semi)?;
        Ok(Item::Global(Param { ty, name }))
    } else if c.is_kw("fun") {
        c.bump();
        let ret = parse_type(c)?;
        let name = c.ident()?;
        let params = parse_params(c)?;
        c.expect(Tok::Eq)?;
        let body = parse_expr(c)?;
        c.expect(Tok::Semi)?;
        let span = start.to(&c.prev_span());
        Ok(Item::Fun(
            FunDecl {
                name,
                ret,
                params,
                body,
            },
            span,
        ))
    } else {
        c.error(format!(
            "expected `data`, `global` or `fun` but found {}",
            c.peek().describe()
        ))
    }
}

fn resolve_calls(e: &mut Expr, ctors: &BTreeSet<Name>) {
    match e {
        Expr::Var(_) | Expr::Fail => {}
        Expr::Assign(_, inner) | Expr::Solve(_, inner) => resolve_calls(inner, ctors),
        Expr::Seq(a, b) => {
            resolve_calls(a, ctors);
            resolve_calls(b, ctors);
        }
        Expr::Cons(_, args) | Expr::SetLit(args) => args.iter_mut().for_each(|a| resolve_calls(a, ctors)),
        Expr::Call(name, args) => {
            args.iter_mut().for_each(|a| resolve_calls(a, ctors));
            if ctors.contains(name) {
                *e = Expr::Cons(name.clone(), std::mem::take(args));
            }
        }
        Expr::Visit { subject, cases, .. } => {
            resolve_calls(subject, ctors);
            for case in cases {
                resolve_calls(&mut case.body, ctors);
            }
        }
    }
}

/// Parse and statically check a program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_named(text, "<input>")
}

pub fn parse_program_named(text: &str, file: &str) -> Result<Program, ParseError> {
    let mut c = Cursor::new(text, file)?;
    let mut program = Program::default();
    let mut data_spans = Vec::new();
    let mut fun_spans = Vec::new();
    while !c.at_eof() {
        match parse_item(&mut c)? {
            Item::Data(d, span) => {
                data_spans.push(span);
                program.datas.push(d);
            }
            Item::Global(g) => program.globals.push(g),
            Item::Fun(f, span) => {
                fun_spans.push(span);
                program.funs.push(f);
            }
        }
    }
    let whole = SourceSpan::new(file, Pos { line: 1, col: 1 }, c.span().end);
    let ctors: BTreeSet<Name> = program
        .datas
        .iter()
        .flat_map(|d| d.ctors.iter().map(|k| k.name.clone()))
        .collect();
    for f in &mut program.funs {
        resolve_calls(&mut f.body, &ctors);
    }
    program.number_sites();

    if let Err(error) = Schema::new(&program.datas) {
        let span = data_error_span(&program, &data_spans, &error).unwrap_or(whole);
        return Err(ParseError::Static { span, error });
    }
    if let Err(error) = check_program(&program) {
        let span = fun_error_span(&program, &fun_spans, &error).unwrap_or(whole);
        return Err(ParseError::Static { span, error });
    }
    Ok(program)
}

fn data_error_span(program: &Program, spans: &[SourceSpan], error: &StaticError) -> Option<SourceSpan> {
    let hit = |d: &DataDecl| match error {
        StaticError::DuplicateAdt(n) => &d.name == n,
        StaticError::DuplicateCtor(n) => d.ctors.iter().any(|k| &k.name == n),
        StaticError::UnknownAdt(n) => d
            .ctors
            .iter()
            .any(|k| k.params.iter().any(|p| mentions(&p.ty, n))),
        _ => false,
    };
    // Report the last matching declaration: for duplicates that is the offending one.
    program
        .datas
        .iter()
        .zip(spans)
        .filter(|(d, _)| hit(d))
        .map(|(_, s)| s.clone())
        .last()
}

fn mentions(t: &TypeExpr, n: &Name) -> bool {
    match t {
        TypeExpr::Adt(m) => m == n,
        TypeExpr::Set(inner) => mentions(inner, n),
        _ => false,
    }
}

fn fun_error_span(program: &Program, spans: &[SourceSpan], error: &StaticError) -> Option<SourceSpan> {
    let schema = Schema::new(&program.datas).ok()?;
    let mut seen = BTreeSet::new();
    for (f, span) in program.funs.iter().zip(spans) {
        let dup = !seen.insert(f.name.clone());
        if let StaticError::DuplicateFunction(n) = error {
            if dup && &f.name == n {
                return Some(span.clone());
            }
        } else if check_function(f, &schema, program).as_ref().err() == Some(error) {
            return Some(span.clone());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIMPLIFY: &str = "
        data Nat = zero() | suc(Nat pred);
        data Expr = var(str nm) | cst(Nat vl) | mult(Expr el, Expr er);
        fun Expr simplify(Expr e) = bottom-up visit(e) {
            case mult(cst(zero()), y) => cst(zero())
            case mult(x, cst(zero())) => cst(zero())
        };
    ";

    #[test]
    fn nat_declaration() {
        let p = parse_program("data Nat = zero() | suc(Nat pred);").unwrap();
        assert_eq!(p.datas.len(), 1);
        let arities: Vec<_> = p.datas[0]
            .ctors
            .iter()
            .map(|k| (k.name.to_string(), k.params.len()))
            .collect();
        assert_eq!(arities, vec![("zero".to_string(), 0), ("suc".to_string(), 1)]);
    }

    #[test]
    fn simplify_has_two_cases() {
        let p = parse_program(SIMPLIFY).unwrap();
        assert_eq!(p.funs.len(), 1);
        match &p.funs[0].body {
            Expr::Visit { cases, .. } => {
                assert_eq!(cases.len(), 2);
                assert!(matches!(&cases[0].body, Expr::Cons(k, _) if k.as_str() == "cst"));
            }
            other => panic!("expected a visit, got {other:?}"),
        }
    }

    #[test]
    fn empty_program() {
        assert_eq!(parse_program("").unwrap(), Program::default());
        assert_eq!(parse_program("  // only a comment\n").unwrap(), Program::default());
    }

    #[test]
    fn sequences_nest_to_the_right() {
        let p = parse_program("fun value f(value x) = (x = x; x; fail);").unwrap();
        match &p.funs[0].body {
            Expr::Seq(a, b) => {
                assert!(matches!(**a, Expr::Assign(..)));
                assert!(matches!(**b, Expr::Seq(..)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn calls_and_constructors_resolved() {
        let src = "data N = z(); fun N g(N a) = a; fun N f(N a) = g(z());";
        let p = parse_program(src).unwrap();
        match &p.funs[1].body {
            Expr::Call(g, args) => {
                assert_eq!(g.as_str(), "g");
                assert!(matches!(&args[0], Expr::Cons(k, _) if k.as_str() == "z"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn arity_errors_have_spans() {
        let src = "data N = z();\nfun N f(N a) = z(a);";
        let err = parse_program(src).unwrap_err();
        assert!(matches!(err, ParseError::Static { .. }));
        assert_eq!(err.span().start.line, 2);
    }

    #[test]
    fn syntax_errors_have_spans() {
        let err = parse_program("data N = z() | ;").unwrap_err();
        assert_eq!(err.span().start, Pos { line: 1, col: 16 });
    }

    #[test]
    fn star_patterns_and_solve() {
        let src = "data N = z() | s(N p);
            fun set<N> f(set<N> xs) = solve(xs) xs = bottom-up visit(xs) { case {s(x), *rest} => {x} };";
        let p = parse_program(src).unwrap();
        let Expr::Solve(vars, body) = &p.funs[0].body else {
            panic!()
        };
        assert_eq!(vars.len(), 1);
        let Expr::Assign(_, v) = &**body else { panic!() };
        let Expr::Visit { cases, .. } = &**v else { panic!() };
        assert!(matches!(&cases[0].pattern, Pattern::Set(sps) if sps.len() == 2));
    }

    #[test]
    fn unknown_function_rejected() {
        let err = parse_program("data N = z(); fun N f(N a) = h(a);").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Static {
                error: StaticError::UnknownFunction(_),
                ..
            }
        ));
    }

    #[test]
    fn visit_sites_are_numbered() {
        let src = "data N = z();
            fun N f(N a) = bottom-up visit(bottom-up visit(a) { case x => x }) { case y => y };";
        let p = parse_program(src).unwrap();
        let Expr::Visit { site, subject, .. } = &p.funs[0].body else {
            panic!()
        };
        let Expr::Visit { site: inner, .. } = &**subject else {
            panic!()
        };
        assert_eq!((site.0, inner.0), (0, 1));
    }
}
