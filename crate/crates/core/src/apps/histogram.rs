use std::fmt::Write as _;

use serde::Serialize;

/// `[0, 1)`, then `[2^(k-1), 2^k)` for k = 1..=15, then `[2^15, inf)`.
pub const BUCKETS: usize = 17;

/// Bucket holding latency `x`.
pub fn bucket_of(x: f64) -> usize {
    if x.is_nan() || x < 1.0 {
        return 0;
    }
    let mut k = 1;
    while k < BUCKETS - 1 && x >= (1u64 << k) as f64 {
        k += 1;
    }
    k
}

/// Latency counts over fixed geometric buckets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LatencyHistogram {
    pub counts: [u64; BUCKETS],
}

impl LatencyHistogram {
    pub fn from_counts(counts: [u64; BUCKETS]) -> Self {
        Self { counts }
    }

    pub fn add(&mut self, latency: f64) {
        self.counts[bucket_of(latency)] += 1;
    }

    pub fn merge(&mut self, other: &LatencyHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Lower and upper edge of bucket `i`.
    pub fn bounds(i: usize) -> (f64, f64) {
        match i {
            0 => (0.0, 1.0),
            i if i + 1 == BUCKETS => ((1u64 << (i - 1)) as f64, f64::INFINITY),
            i => ((1u64 << (i - 1)) as f64, (1u64 << i) as f64),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bucket,lower,upper,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let (lo, hi) = Self::bounds(i);
            let _ = writeln!(s, "{i},{lo},{hi},{c}");
        }
        s
    }
}
