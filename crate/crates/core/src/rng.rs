//! Keyed random streams.
//!
//! Every random draw in the crate comes from a stream identified by
//! `(master seed, replica, domain, key words)`. A stream is a ChaCha8
//! generator whose 256-bit key is derived from that tuple, so the values a
//! replica sees never depend on thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bumped whenever the mapping from keys to draws changes.
pub const RNG_CONTRACT_VERSION: u32 = 1;

/// What a stream is used for. The discriminant is part of the key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    Field = 1,
    EdgeOpen = 2,
    LoopLength = 3,
    Holding = 4,
    PointLoop = 5,
    Glue = 6,
    Sign = 7,
    Bridge = 8,
    ExploreLoops = 9,
    Bootstrap = 10,
    Instance = 11,
    HeatBath = 12,
}

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Hash a key tuple down to a 64-bit digest.
pub fn digest(seed: u64, replica: u64, domain: Domain, words: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ 0x6361_626C_652D_6C61);
    h = splitmix64(h ^ replica);
    h = splitmix64(h ^ (domain as u64));
    for &w in words {
        h = splitmix64(h ^ w);
    }
    h
}

/// The stream for one key. Cheap enough to create per vertex or per edge.
pub fn stream(seed: u64, replica: u64, domain: Domain, words: &[u64]) -> ChaCha8Rng {
    let h = digest(seed, replica, domain, words);
    let mut key = [0u8; 32];
    let mut s = h;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Key word for a lattice point, independent of any box indexing.
#[inline]
pub fn coord_key(coords: &[i64]) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for &c in coords {
        h = splitmix64(h ^ c as u64);
    }
    h
}

/// A uniform in [0,1) that is a pure function of its key.
pub fn keyed_uniform(seed: u64, replica: u64, domain: Domain, words: &[u64]) -> f64 {
    let h = splitmix64(digest(seed, replica, domain, words));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_pure_functions_of_the_key() {
        let a: Vec<u64> = (0..4).map(|_| 0).collect();
        let mut s1 = stream(7, 3, Domain::Field, &[1, 2]);
        let mut s2 = stream(7, 3, Domain::Field, &[1, 2]);
        let x: Vec<u64> = a.iter().map(|_| s1.random()).collect();
        let y: Vec<u64> = a.iter().map(|_| s2.random()).collect();
        assert_eq!(x, y);
    }

    #[test]
    fn different_keys_give_different_streams() {
        let mut s1 = stream(7, 3, Domain::Field, &[1, 2]);
        let mut s2 = stream(7, 3, Domain::Field, &[2, 1]);
        let mut s3 = stream(7, 4, Domain::Field, &[1, 2]);
        let mut s4 = stream(7, 3, Domain::Glue, &[1, 2]);
        let x: u64 = s1.random();
        assert_ne!(x, s2.random::<u64>());
        assert_ne!(x, s3.random::<u64>());
        assert_ne!(x, s4.random::<u64>());
    }

    #[test]
    fn keyed_uniform_in_unit_interval() {
        let mut sum = 0.0;
        for i in 0..10_000u64 {
            let u = keyed_uniform(1, 0, Domain::Glue, &[i]);
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }
}
