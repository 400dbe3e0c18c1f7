//! Random programs over a few fixed data declarations. Programs are scoped
//! correctly but not necessarily well typed, so error paths get exercised too.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    Str,
    Adt(&'static str),
    Set(Box<Ty>),
}

struct Ctor {
    name: &'static str,
    adt: &'static str,
    args: Vec<Ty>,
}

struct Universe {
    decls: &'static str,
    ctors: Vec<Ctor>,
    entry: &'static str,
    global: Option<&'static str>,
}

fn universes() -> Vec<Universe> {
    use Ty::*;
    let nat = || Adt("Nat");
    let c = |name, adt, args| Ctor { name, adt, args };
    vec![
        Universe {
            decls: "data Nat = zero() | suc(Nat pred);\ndata Expr = var(str nm) | cst(Nat vl) | mult(Expr el, Expr er);",
            ctors: vec![
                c("zero", "Nat", vec![]),
                c("suc", "Nat", vec![nat()]),
                c("var", "Expr", vec![Str]),
                c("cst", "Expr", vec![nat()]),
                c("mult", "Expr", vec![Adt("Expr"), Adt("Expr")]),
            ],
            entry: "Expr",
            global: Some("Nat"),
        },
        Universe {
            decls: "data T = leaf(str s) | one(T a) | two(T a, T b);",
            ctors: vec![
                c("leaf", "T", vec![Str]),
                c("one", "T", vec![Adt("T")]),
                c("two", "T", vec![Adt("T"), Adt("T")]),
            ],
            entry: "T",
            global: Some("T"),
        },
        Universe {
            decls: "data Nat = zero() | suc(Nat pred);\ndata Item = item(str k, Nat n);\ndata Box = box(set<Item> xs) | pair(Box a, Box b);",
            ctors: vec![
                c("zero", "Nat", vec![]),
                c("suc", "Nat", vec![nat()]),
                c("item", "Item", vec![Str, nat()]),
                c("box", "Box", vec![Set(Box::new(Adt("Item")))]),
                c("pair", "Box", vec![Adt("Box"), Adt("Box")]),
            ],
            entry: "Box",
            global: Some("Nat"),
        },
    ]
}

struct Gen<'u, R> {
    rng: R,
    u: &'u Universe,
    /// Declared global, if this program has one.
    global: Option<&'static str>,
    fresh: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn name(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn ctors_of(&self, adt: &str) -> Vec<(&'static str, Vec<Ty>)> {
        self.u.ctors.iter().filter(|c| c.adt == adt).map(|c| (c.name, c.args.clone())).collect()
    }

    fn pattern(&mut self, t: &Ty, depth: usize, vars: &mut Vec<(String, Ty)>) -> String {
        let reuse: Vec<String> = vars.iter().filter(|(_, vt)| vt == t).map(|(n, _)| n.clone()).collect();
        if !reuse.is_empty() && self.rng.gen_bool(0.12) {
            return reuse.choose(&mut self.rng).expect("non-empty").clone();
        }
        match t {
            Ty::Adt(adt) if depth > 0 && self.rng.gen_bool(0.6) => {
                let options = self.ctors_of(adt);
                let (name, args) = options.choose(&mut self.rng).expect("constructors").clone();
                let ps: Vec<String> = args.iter().map(|a| self.pattern(a, depth - 1, vars)).collect();
                format!("{name}({})", ps.join(", "))
            }
            Ty::Set(elem) if depth > 0 && self.rng.gen_bool(0.7) => {
                let mut parts = Vec::new();
                for _ in 0..self.rng.gen_range(0..=2) {
                    parts.push(self.pattern(elem, depth - 1, vars));
                }
                if self.rng.gen_bool(0.7) {
                    let r = self.name("r");
                    vars.push((r.clone(), t.clone()));
                    parts.push(format!("*{r}"));
                }
                format!("{{{}}}", parts.join(", "))
            }
            _ => {
                let v = self.name("v");
                vars.push((v.clone(), t.clone()));
                v
            }
        }
    }

    fn expr(&mut self, t: &Ty, depth: usize, vars: &[(String, Ty)]) -> String {
        let typed: Vec<&String> = vars.iter().filter(|(_, vt)| vt == t).map(|(n, _)| n).collect();
        let roll: f64 = self.rng.gen();
        if roll < 0.06 {
            return "fail".into();
        }
        if roll < 0.12 {
            // Possibly ill-typed on purpose.
            return vars.choose(&mut self.rng).map_or("fail".into(), |(n, _)| n.clone());
        }
        if !typed.is_empty() && (depth == 0 || roll < 0.5) {
            return (*typed.choose(&mut self.rng).expect("non-empty")).clone();
        }
        match t {
            Ty::Adt(adt) => {
                let mut options = self.ctors_of(adt);
                if depth == 0 {
                    let leaves: Vec<_> = options.iter().filter(|(_, args)| args.is_empty()).cloned().collect();
                    if !leaves.is_empty() {
                        options = leaves;
                    }
                }
                let (name, args) = options.choose(&mut self.rng).expect("constructors").clone();
                let es: Vec<String> = args.iter().map(|a| self.expr(a, depth.saturating_sub(1), vars)).collect();
                format!("{name}({})", es.join(", "))
            }
            Ty::Set(elem) => {
                let n = self.rng.gen_range(0..=2);
                let es: Vec<String> = (0..n).map(|_| self.expr(elem, depth.saturating_sub(1), vars)).collect();
                format!("{{{}}}", es.join(", "))
            }
            Ty::Str => vars.choose(&mut self.rng).map_or("fail".into(), |(n, _)| n.clone()),
        }
    }

    /// `vars[0]` is the visited subject; recursing on it would not terminate.
    fn body(&mut self, t: &Ty, vars: &[(String, Ty)], fun: &str) -> String {
        let e = self.expr(t, 2, vars);
        let recursive: Vec<&String> = vars.iter().skip(1).filter(|(_, vt)| vt == t).map(|(n, _)| n).collect();
        let roll: f64 = self.rng.gen();
        match self.global {
            Some(g) if roll < 0.15 => {
                let mut with_g = vars.to_vec();
                with_g.push(("g".into(), Ty::Adt(g)));
                let rhs = self.expr(&Ty::Adt(g), 1, &with_g);
                format!("(g = {rhs}; {e})")
            }
            _ if roll < 0.25 && !recursive.is_empty() => {
                let v = recursive.choose(&mut self.rng).expect("non-empty");
                format!("{fun}({v})")
            }
            _ => e,
        }
    }

    fn visit(&mut self, subject: &str, fun: &str) -> String {
        let t = Ty::Adt(self.u.entry);
        let mut cases = Vec::new();
        for _ in 0..self.rng.gen_range(1..=3) {
            // Case patterns match nodes of any data type inside the subject.
            let adts: Vec<&'static str> = self.u.ctors.iter().map(|c| c.adt).collect();
            let target = Ty::Adt(adts.choose(&mut self.rng).expect("types"));
            let mut vars = vec![(subject.to_string(), t.clone())];
            let p = self.pattern(&target, 2, &mut vars);
            let b = self.body(&target, &vars, fun);
            cases.push(format!("    case {p} => {b}"));
        }
        format!("bottom-up visit({subject}) {{\n{}\n}}", cases.join("\n"))
    }

    fn program(&mut self) -> String {
        let t = self.u.entry;
        let mut out = String::from(self.u.decls);
        out.push('\n');
        if let Some(g) = self.u.global {
            if self.rng.gen_bool(0.3) {
                out.push_str(&format!("global {g} g;\n"));
                self.global = Some(g);
            }
        }
        match self.rng.gen_range(0..3) {
            0 => out.push_str(&format!("fun {t} f({t} x) = {};\n", self.visit("x", "f"))),
            1 => out.push_str(&format!("fun {t} f({t} x) = (solve(x) x = {}; x);\n", self.visit("x", "f"))),
            _ => {
                out.push_str(&format!("fun {t} f({t} x) = h(x);\n"));
                out.push_str(&format!("fun {t} h({t} y) = {};\n", self.visit("y", "h")));
            }
        }
        out
    }
}

/// Source text of a random program whose entry function is `f`.
pub fn random_program(rng: &mut impl Rng) -> String {
    let all = universes();
    let u = all.choose(rng).expect("universes");
    let seed: u64 = rng.gen();
    let mut g = Gen {
        rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
        u,
        global: None,
        fresh: 0,
    };
    g.program()
}

