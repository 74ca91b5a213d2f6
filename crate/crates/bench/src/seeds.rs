//! Run seed derivation. Seeds are keyed on (instance id, algorithm,
//! replicate) so a run's randomness never depends on scheduling order.

/// One splitmix64 output step.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed for generating one instance.
pub fn instance_seed(master: u64, instance: &str) -> u64 {
    splitmix64(splitmix64(master) ^ fnv1a(instance.as_bytes()))
}

/// Seed of replicate `replicate` of `algorithm` on `instance`.
pub fn run_seed(master: u64, instance: &str, algorithm: &str, replicate: u64) -> u64 {
    let h = instance_seed(master, instance);
    let h = splitmix64(h ^ fnv1a(algorithm.as_bytes()));
    splitmix64(h ^ replicate)
}
