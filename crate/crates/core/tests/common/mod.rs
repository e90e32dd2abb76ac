#![allow(dead_code)]

use proptest::prelude::*;
use sdrdu_core::{Distribution, Domain};

pub fn sym() -> Domain {
    Domain::new(-1.0, 1.0).unwrap()
}

/// Up to `max_atoms` atoms on `[-1, 1]` with weights bounded away from zero.
pub fn distribution(max_atoms: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec((-1.0f64..=1.0, 0.05f64..1.0), 1..=max_atoms).prop_map(|atoms| {
        let (xs, ws): (Vec<f64>, Vec<f64>) = atoms.into_iter().unzip();
        Distribution::new(sym(), xs, ws).unwrap()
    })
}
