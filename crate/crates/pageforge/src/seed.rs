//! Stable seed derivation.
//!
//! Document and retry seeds are derived with a fixed FNV-1a/splitmix64
//! combination rather than `std`'s hasher, which is allowed to change between
//! releases. These functions are part of the reproducibility contract: the
//! same base seed must map to the same per-document seeds on every platform
//! and in every future version.

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    let mut h = state;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Seed for document `index` of a category within a dataset run.
pub fn document_seed(base_seed: u64, category_tag: &str, index: u64) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &base_seed.to_le_bytes());
    h = fnv1a(h, category_tag.as_bytes());
    h = fnv1a(h, &index.to_le_bytes());
    splitmix64(h)
}

/// Seed for placement retry `attempt` of one document.
pub fn retry_seed(document_seed: u64, attempt: u32) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &document_seed.to_le_bytes());
    h = fnv1a(h, b"attempt");
    h = fnv1a(h, &attempt.to_le_bytes());
    splitmix64(h)
}
