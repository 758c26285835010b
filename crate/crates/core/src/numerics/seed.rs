//! Deterministic derivation of per-task RNG seeds from a root seed.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the task named by `label` and `parts`, independent of the order
/// in which tasks are run.
pub fn derive_seed(root: u64, label: &str, parts: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    let bytes = label.bytes().chain(parts.iter().flat_map(|p| p.to_le_bytes()));
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(root ^ h)
}
