#![allow(dead_code)]

use carbonflow_core::model::{Coefficients, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Instance with value ranges of the benchmark generator.
pub fn random_instance(seed: u64, n: usize, m: usize, f: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = (0..n).map(|_| (0..m).map(|_| rng.gen_range(10..=50)).collect()).collect();
    let pp = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(500..=1000) as f64 / 100.0).collect())
        .collect();
    let aux = (0..m).map(|_| rng.gen_range(50..=100) as f64 / 1000.0).collect();
    let mut c = Coefficients::standard(m, 0.0);
    c.aux_coeff = aux;
    Instance::new(format!("r{seed}"), f, p, pp, c).unwrap()
}
