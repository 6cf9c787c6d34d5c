#![allow(dead_code)]

use faultcover::benchmark::{generate_instance, InstanceKind, InstanceSpec};
use faultcover::InfluenceMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random matrix with size and density drawn from the seed.
pub fn seeded_matrix(seed: u64, max_n: usize, max_m: usize) -> InfluenceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let density = rng.gen_range(0.05..0.7);
    generate_instance(&InstanceSpec {
        id: None,
        seed,
        kind: InstanceKind::RandomMatrix { n, m, density },
    })
    .unwrap()
}

pub fn matrix_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = InfluenceMatrix> {
    (0..=max_n, 0..=max_m).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), m), n)
            .prop_map(move |rows| InfluenceMatrix::from_bool_rows(&rows, m))
    })
}

pub fn ln(x: usize) -> f64 {
    (x as f64).ln()
}
