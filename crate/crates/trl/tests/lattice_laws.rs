//! Lattice laws of the shape domain on random shapes.

mod common;

use common::laws;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn order_is_reflexive_and_antisymmetric(seed: u64) {
        if let Err(e) = laws::order_is_reflexive_and_antisymmetric(seed) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn order_is_transitive(seed: u64) {
        if let Err(e) = laws::order_is_transitive(seed) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn join_is_an_upper_bound(seed: u64) {
        if let Err(e) = laws::join_is_an_upper_bound(seed) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn meet_is_a_lower_bound(seed: u64) {
        if let Err(e) = laws::meet_is_a_lower_bound(seed) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn order_agrees_with_concretization(seed: u64) {
        if let Err(e) = laws::order_agrees_with_concretization(seed) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn widening_is_an_upper_bound(seed: u64) {
        if let Err(e) = laws::widening_is_an_upper_bound(seed) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn widening_stabilizes_growing_chains(seed: u64) {
        if let Err(e) = laws::widening_stabilizes_growing_chains(seed) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn interval_and_card_chains_stabilize(seed: u64) {
        if let Err(e) = laws::interval_and_card_chains_stabilize(seed) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn unfold_covers_every_value(seed: u64) {
        if let Err(e) = laws::unfold_covers_every_value(seed) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn exclusion_keeps_other_constructors(seed: u64) {
        if let Err(e) = laws::exclusion_keeps_other_constructors(seed) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn complement_keeps_the_difference(seed: u64) {
        if let Err(e) = laws::complement_keeps_the_difference(seed) {
            return Err(TestCaseError::fail(e));
        }
    }
}
