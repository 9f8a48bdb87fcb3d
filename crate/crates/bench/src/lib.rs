//! Fixed-seed problem instances shared by the benchmarks.

use bcinv_core::random::{Instance, Sampler};

/// `(label, n, m, r)` for each benchmarked problem size.
pub const SIZES: [(&str, usize, usize, usize); 4] = [
    ("8x8r4", 8, 8, 4),
    ("16x24r8", 16, 24, 8),
    ("32x32r16", 32, 32, 16),
    ("64x48r24", 64, 48, 24),
];

pub fn instance(n: usize, m: usize, r: usize) -> Instance {
    Sampler::seeded((n * 1000 + m * 10 + r) as u64).existing_instance(n, m, r, 1e3)
}
