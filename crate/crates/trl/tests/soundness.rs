//! Concrete runs must stay inside the abstract results: bundled corpus plus
//! seeded random programs, exhaustively over small inputs.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trl::ast::check_program;
use trl::parser::parse_program;

use common::{check_soundness, gen::random_program, load, CORPUS, GENERATED, GENERATOR_SEED, MAX_INPUTS, SOUNDNESS_BOUNDS as BOUNDS};

#[test]
fn corpus_is_sound() {
    for (name, entry) in CORPUS {
        let l = load(name);
        let r = check_soundness(&l.program, &l.schema, &entry.into(), BOUNDS, MAX_INPUTS);
        assert!(r.analysis_error.is_none(), "{name}: {:?}", r.analysis_error);
        assert!(r.violations.is_empty(), "{name}: {}", r.violations.join("\n"));
        assert!(r.inputs > 0, "{name} had no inputs");
    }
}

#[test]
fn generated_programs_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(GENERATOR_SEED);
    let mut inputs = 0;
    for i in 0..GENERATED {
        let src = random_program(&mut rng);
        let program = parse_program(&src).unwrap_or_else(|e| panic!("program {i} does not parse: {e}\n{src}"));
        let schema = check_program(&program).unwrap_or_else(|e| panic!("program {i} rejected: {e}\n{src}"));
        let r = check_soundness(&program, &schema, &"f".into(), BOUNDS, MAX_INPUTS);
        assert!(r.analysis_error.is_none(), "program {i}: {:?}\n{src}", r.analysis_error);
        assert!(r.violations.is_empty(), "program {i}:\n{src}\n{}", r.violations[..r.violations.len().min(3)].join("\n"));
        inputs += r.inputs;
    }
    assert!(inputs > 0);
}
