//! Shape analysis for a small tree-transformation language.
//!
//! Programs are parsed into [`ast::Program`], run concretely by [`concrete`] and
//! abstractly by [`interp`], which infers regular tree grammars ([`shape::Shape`])
//! describing the success, fail and error outputs.

pub mod ast;
pub mod concrete;
pub mod interp;
pub mod kind;
pub mod matching;
pub mod parser;
pub mod property;
pub mod shape;
pub mod state;
