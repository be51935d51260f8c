//! Shared instance builders for the criterion benchmarks.

use mesp_core::model::Instance;
use mesp_core::seeded::{random_binary, random_subset, InstanceRecipe};

pub fn binary_instance(n: usize, seed: u64) -> Instance {
    Instance::Binary(random_binary(&InstanceRecipe::new(seed, n, 3)))
}

pub fn subset_instance(n: usize, k: usize, seed: u64) -> Instance {
    Instance::Subset(random_subset(&InstanceRecipe::new(seed, n, 3), k))
}
