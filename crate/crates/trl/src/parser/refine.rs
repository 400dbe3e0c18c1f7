//! Refinement blocks: `refine Name of Adt = alt | alt;`.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::Tok;
use super::{Cursor, ParseError, SourceSpan};
use crate::ast::{subtype_unchecked, Name, Schema, TypeExpr};

/// A shape literal as written in a refinement block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShapeTerm {
    /// A nonterminal of the same block, or a data type standing for all its values.
    Named(Name),
    Ctor(Name, Vec<ShapeTerm>),
    /// `None` bounds are infinite.
    Int(Option<i64>, Option<i64>),
    /// `None` is any string.
    Str(Option<BTreeSet<String>>),
    Set(Box<ShapeTerm>, u64, Option<u64>),
    Value,
    Void,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementDecl {
    pub name: Name,
    pub base: Name,
    pub alternatives: Vec<(Name, Vec<ShapeTerm>)>,
    pub span: SourceSpan,
}

fn parse_bound(c: &mut Cursor) -> Result<Option<i64>, ParseError> {
    let negative = c.eat(&Tok::Minus);
    match c.bump() {
        Tok::Ident(s) if s == "inf" => Ok(None),
        Tok::Int(n) => Ok(Some(if negative { -n } else { n })),
        other => Err(ParseError::Syntax {
            span: c.prev_span(),
            message: format!("expected a bound but found {}", other.describe()),
        }),
    }
}

fn parse_card(c: &mut Cursor) -> Result<(u64, Option<u64>), ParseError> {
    let span = c.span();
    c.expect(Tok::LBracket)?;
    let lo = parse_bound(c)?;
    c.expect(Tok::Semi)?;
    let hi = parse_bound(c)?;
    c.expect(Tok::RBracket)?;
    let bad = |message: &str| ParseError::Syntax {
        span: span.clone(),
        message: message.into(),
    };
    let lo = match lo {
        Some(l) if l >= 0 => l as u64,
        _ => return Err(bad("cardinality lower bound must be a non-negative integer")),
    };
    let hi = match hi {
        None => None,
        Some(h) if h >= 0 && h as u64 >= lo => Some(h as u64),
        _ => return Err(bad("cardinality upper bound below lower bound")),
    };
    Ok((lo, hi))
}

fn parse_term(c: &mut Cursor) -> Result<ShapeTerm, ParseError> {
    match c.peek().clone() {
        Tok::LBrace => {
            c.bump();
            let elem = parse_term(c)?;
            c.expect(Tok::RBrace)?;
            let (lo, hi) = if *c.peek() == Tok::LBracket {
                parse_card(c)?
            } else {
                (0, None)
            };
            Ok(ShapeTerm::Set(Box::new(elem), lo, hi))
        }
        Tok::Ident(s) => match s.as_str() {
            "value" => {
                c.bump();
                Ok(ShapeTerm::Value)
            }
            "void" => {
                c.bump();
                Ok(ShapeTerm::Void)
            }
            "int" => {
                c.bump();
                if *c.peek() != Tok::LBracket {
                    return Ok(ShapeTerm::Int(None, None));
                }
                let span = c.span();
                c.bump();
                let lo = parse_bound(c)?;
                c.expect(Tok::Semi)?;
                let hi = parse_bound(c)?;
                c.expect(Tok::RBracket)?;
                if let (Some(l), Some(h)) = (lo, hi) {
                    if l > h {
                        return Err(ParseError::Syntax {
                            span,
                            message: "empty integer interval".into(),
                        });
                    }
                }
                Ok(ShapeTerm::Int(lo, hi))
            }
            "str" => {
                c.bump();
                if !c.eat(&Tok::LBrace) {
                    return Ok(ShapeTerm::Str(None));
                }
                let mut set = BTreeSet::new();
                loop {
                    match c.bump() {
                        Tok::Str(s) => {
                            set.insert(s);
                        }
                        other => {
                            return Err(ParseError::Syntax {
                                span: c.prev_span(),
                                message: format!("expected a string but found {}", other.describe()),
                            })
                        }
                    }
                    if c.eat(&Tok::RBrace) {
                        break;
                    }
                    c.expect(Tok::Comma)?;
                }
                Ok(ShapeTerm::Str(Some(set)))
            }
            _ => {
                let name = c.ident()?;
                if c.eat(&Tok::LParen) {
                    Ok(ShapeTerm::Ctor(name, parse_term_list(c)?))
                } else {
                    Ok(ShapeTerm::Named(name))
                }
            }
        },
        other => c.error(format!("expected a shape but found {}", other.describe())),
    }
}

/// Arguments after an opening parenthesis, including the closing one.
fn parse_term_list(c: &mut Cursor) -> Result<Vec<ShapeTerm>, ParseError> {
    let mut args = Vec::new();
    if c.eat(&Tok::RParen) {
        return Ok(args);
    }
    loop {
        args.push(parse_term(c)?);
        if c.eat(&Tok::RParen) {
            return Ok(args);
        }
        c.expect(Tok::Comma)?;
    }
}

/// Parse a standalone shape term such as `neg(atom(str))` or `{int[0;3]}[1;2]`.
/// Names may refer to data types or to nonterminals of `decls`.
pub fn parse_shape_term(
    text: &str,
    schema: &Schema,
    decls: &[RefinementDecl],
) -> Result<ShapeTerm, ParseError> {
    let mut c = Cursor::new(text, "<shape>")?;
    let span = c.span();
    let t = parse_term(&mut c)?;
    if !c.at_eof() {
        return c.error(format!("unexpected {} after shape", c.peek().describe()));
    }
    let bases = decls.iter().map(|d| (d.name.clone(), d.base.clone())).collect();
    check_term(&t, schema, &bases, &span)?;
    Ok(t)
}

/// Parse and validate refinement blocks against the data declarations.
pub fn parse_refinement(text: &str, schema: &Schema) -> Result<Vec<RefinementDecl>, ParseError> {
    parse_refinement_named(text, "<shapes>", schema)
}

pub fn parse_refinement_named(
    text: &str,
    file: &str,
    schema: &Schema,
) -> Result<Vec<RefinementDecl>, ParseError> {
    let mut c = Cursor::new(text, file)?;
    let mut decls = Vec::new();
    while !c.at_eof() {
        let start = c.span();
        c.expect_kw("refine")?;
        let name = c.ident()?;
        c.expect_kw("of")?;
        let base = c.ident()?;
        c.expect(Tok::Eq)?;
        let mut alternatives = Vec::new();
        loop {
            let k = c.ident()?;
            c.expect(Tok::LParen)?;
            alternatives.push((k, parse_term_list(&mut c)?));
            if !c.eat(&Tok::Bar) {
                break;
            }
        }
        c.expect(Tok::Semi)?;
        decls.push(RefinementDecl {
            name,
            base,
            alternatives,
            span: start.to(&c.prev_span()),
        });
    }

    let mut bases = BTreeMap::new();
    for d in &decls {
        let invalid = |message: String| ParseError::Refinement {
            span: d.span.clone(),
            message,
        };
        if !schema.has_adt(&d.base) {
            return Err(invalid(format!("unknown data type `{}`", d.base)));
        }
        if schema.has_adt(&d.name) {
            return Err(invalid(format!("`{}` already names a data type", d.name)));
        }
        if bases.insert(d.name.clone(), d.base.clone()).is_some() {
            return Err(invalid(format!("refinement `{}` declared more than once", d.name)));
        }
    }
    for d in &decls {
        let mut seen = BTreeSet::new();
        for (k, args) in &d.alternatives {
            if !seen.insert(k) {
                return Err(ParseError::Refinement {
                    span: d.span.clone(),
                    message: format!("constructor `{k}` listed twice in `{}`", d.name),
                });
            }
            if !schema.ctor(k).is_some_and(|sig| sig.adt == d.base) {
                return Err(ParseError::Refinement {
                    span: d.span.clone(),
                    message: format!("`{k}` is not a constructor of `{}`", d.base),
                });
            }
            check_term(&ShapeTerm::Ctor(k.clone(), args.clone()), schema, &bases, &d.span)?;
        }
    }
    Ok(decls)
}

/// The type whose values the term describes.
fn term_type(t: &ShapeTerm, schema: &Schema, bases: &BTreeMap<Name, Name>) -> TypeExpr {
    match t {
        ShapeTerm::Named(n) => TypeExpr::Adt(bases.get(n).cloned().unwrap_or_else(|| n.clone())),
        ShapeTerm::Ctor(k, _) => schema
            .ctor(k)
            .map(|sig| TypeExpr::Adt(sig.adt.clone()))
            .unwrap_or(TypeExpr::Value),
        ShapeTerm::Int(..) => TypeExpr::Int,
        ShapeTerm::Str(_) => TypeExpr::Str,
        ShapeTerm::Set(e, ..) => TypeExpr::set_of(term_type(e, schema, bases)),
        // `value` denotes whatever the position is declared to hold, so it fits anywhere.
        ShapeTerm::Value | ShapeTerm::Void => TypeExpr::Void,
    }
}

fn check_term(
    t: &ShapeTerm,
    schema: &Schema,
    bases: &BTreeMap<Name, Name>,
    span: &SourceSpan,
) -> Result<(), ParseError> {
    let invalid = |message: String| ParseError::Refinement {
        span: span.clone(),
        message,
    };
    match t {
        ShapeTerm::Named(n) => {
            if bases.contains_key(n) || schema.has_adt(n) {
                Ok(())
            } else {
                Err(invalid(format!("undeclared nonterminal `{n}`")))
            }
        }
        ShapeTerm::Ctor(k, args) => {
            let sig = schema
                .ctor(k)
                .ok_or_else(|| invalid(format!("unknown constructor `{k}`")))?;
            if sig.params.len() != args.len() {
                return Err(invalid(format!(
                    "`{k}` expects {} arguments but got {}",
                    sig.params.len(),
                    args.len()
                )));
            }
            for (arg, ty) in args.iter().zip(&sig.params) {
                check_term(arg, schema, bases, span)?;
                let found = term_type(arg, schema, bases);
                if !subtype_unchecked(&found, ty) {
                    return Err(invalid(format!(
                        "argument of `{k}` has type {found} but {ty} is expected"
                    )));
                }
            }
            Ok(())
        }
        ShapeTerm::Set(e, ..) => check_term(e, schema, bases, span),
        ShapeTerm::Int(..) | ShapeTerm::Str(_) | ShapeTerm::Value | ShapeTerm::Void => Ok(()),
    }
}
