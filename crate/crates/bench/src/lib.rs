//! Fixed instance sets shared by the benchmarks.

use liftcut::generate::{seeded_instance, InstanceKind};
use liftcut::Instance;

/// `count` instances of one kind, seeds `0..count`.
pub fn instances(kind: InstanceKind, d: usize, m: usize, count: usize) -> Vec<Instance> {
    (0..count as u64).map(|s| seeded_instance(s, kind, d, m)).collect()
}
