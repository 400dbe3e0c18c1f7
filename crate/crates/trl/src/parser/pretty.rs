//! Printer producing text that parses back to the same syntax tree.

use std::fmt::Write;

use crate::ast::*;

pub fn pretty_program(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.datas {
        let ctors: Vec<String> = d
            .ctors
            .iter()
            .map(|k| format!("{}({})", k.name, params(&k.params)))
            .collect();
        let _ = writeln!(out, "data {} = {};", d.name, ctors.join(" | "));
    }
    for g in &p.globals {
        let _ = writeln!(out, "global {} {};", g.ty, g.name);
    }
    for f in &p.funs {
        let _ = writeln!(
            out,
            "fun {} {}({}) =\n  {};",
            f.ret,
            f.name,
            params(&f.params),
            pretty_expr(&f.body)
        );
    }
    out
}

fn params(ps: &[Param]) -> String {
    ps.iter()
        .map(|p| format!("{} {}", p.ty, p.name))
        .collect::<Vec<_>>()
        .join(", ")
}

fn list(es: &[Expr]) -> String {
    es.iter().map(pretty_expr).collect::<Vec<_>>().join(", ")
}

pub fn pretty_expr(e: &Expr) -> String {
    match e {
        Expr::Var(x) => x.to_string(),
        Expr::Assign(x, rhs) => format!("{x} = {}", pretty_expr(rhs)),
        Expr::Seq(..) => {
            let mut items = Vec::new();
            let mut cur = e;
            while let Expr::Seq(a, b) = cur {
                items.push(pretty_operand(a));
                cur = b;
            }
            items.push(pretty_operand(cur));
            format!("({})", items.join("; "))
        }
        Expr::Cons(k, args) | Expr::Call(k, args) => format!("{k}({})", list(args)),
        Expr::SetLit(args) => format!("{{{}}}", list(args)),
        Expr::Fail => "fail".into(),
        Expr::Visit { subject, cases, .. } => {
            let cases: Vec<String> = cases
                .iter()
                .map(|c| format!("case {} => {}", pretty_pattern(&c.pattern), pretty_expr(&c.body)))
                .collect();
            format!("bottom-up visit({}) {{ {} }}", pretty_expr(subject), cases.join(" "))
        }
        Expr::Solve(vars, body) => {
            let vars: Vec<String> = vars.iter().map(Name::to_string).collect();
            format!("solve({}) {}", vars.join(", "), pretty_expr(body))
        }
    }
}

/// Left operands of a sequence that are themselves sequences need their own parentheses.
fn pretty_operand(e: &Expr) -> String {
    match e {
        Expr::Seq(..) => format!("({})", pretty_expr(e)),
        _ => pretty_expr(e),
    }
}

pub fn pretty_pattern(p: &Pattern) -> String {
    match p {
        Pattern::Var(x) => x.to_string(),
        Pattern::Cons(k, ps) => {
            let ps: Vec<String> = ps.iter().map(pretty_pattern).collect();
            format!("{k}({})", ps.join(", "))
        }
        Pattern::Set(sps) => {
            let sps: Vec<String> = sps
                .iter()
                .map(|sp| match sp {
                    StarPattern::Plain(q) => pretty_pattern(q),
                    StarPattern::Star(x) => format!("*{x}"),
                })
                .collect();
            format!("{{{}}}", sps.join(", "))
        }
    }
}
