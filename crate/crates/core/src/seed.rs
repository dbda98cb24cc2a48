//! Deterministic seed derivation.
//!
//! All randomness in the crate flows from explicit 64-bit seeds. Components
//! that need independent streams (scenario sampling, GA, policy rollouts,
//! perturbations, per-job streams inside a parallel fan-out) derive their own
//! seed from a master seed through the helpers here, so parallel and serial
//! execution order cannot change any result.

/// SplitMix64 finalizer; full-period bijective mixing of a 64-bit word.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// FNV-1a over a byte string.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Derives a named sub-stream seed from a master seed.
///
/// Distinct labels give statistically independent streams; the same
/// (master, label) pair always gives the same seed.
pub fn labeled_seed(master: u64, label: &str) -> u64 {
    mix(master ^ fnv1a(label.as_bytes()))
}

/// Derives a per-job seed from a base seed and up to two indices.
///
/// Used for per-(COA, agent) policy streams and per-offspring GA streams.
pub fn indexed_seed(base: u64, a: u64, b: u64) -> u64 {
    mix(mix(base ^ mix(a)) ^ mix(b.wrapping_add(0x51ed2701)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_separate_streams() {
        let m = 42;
        assert_ne!(labeled_seed(m, "scenario"), labeled_seed(m, "ga"));
        assert_ne!(labeled_seed(m, "ga"), labeled_seed(m, "policy"));
        assert_eq!(labeled_seed(m, "ga"), labeled_seed(m, "ga"));
    }

    #[test]
    fn indices_separate_streams() {
        let base = labeled_seed(7, "policy");
        assert_ne!(indexed_seed(base, 0, 0), indexed_seed(base, 0, 1));
        assert_ne!(indexed_seed(base, 0, 1), indexed_seed(base, 1, 0));
        assert_eq!(indexed_seed(base, 3, 5), indexed_seed(base, 3, 5));
    }
}
