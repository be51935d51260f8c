//! Deterministic seeded generation of random instances.
//!
//! Used by the benchmark suites and by tests as a shared fixture corpus.
//! Generation is reproducible across platforms: ChaCha12 with explicit
//! 64-bit seeding, integer draws only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::model::{
    BinaryInstance, Instance, SubsetInstance, TailDistribution, ValueGrid,
};
use crate::rational::{rat_int, Rational};

/// Parameters for one random instance draw.
#[derive(Debug, Clone)]
pub struct InstanceRecipe {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    /// Tail probabilities are a/b with 1 <= b <= this bound.
    pub denominator_bound: u64,
    /// Force l_0 >= 0 (the approximation scheme requires it).
    pub nonnegative_grid: bool,
    /// Permit q = 0 tails; geometric solvers prefer strictly positive ones.
    pub allow_zero_tails: bool,
}

impl InstanceRecipe {
    pub fn new(seed: u64, n: usize, d: usize) -> Self {
        InstanceRecipe {
            seed,
            n,
            d,
            denominator_bound: 24,
            nonnegative_grid: true,
            allow_zero_tails: false,
        }
    }
}

fn random_grid(rng: &mut ChaCha12Rng, recipe: &InstanceRecipe) -> ValueGrid {
    loop {
        let mut values: Vec<Rational> = (0..recipe.d)
            .map(|_| {
                let den = rng.gen_range(1..=6i64);
                let num_lo = if recipe.nonnegative_grid { 0 } else { -48 };
                let num = rng.gen_range(num_lo..=48i64);
                Rational::new(num.into(), den.into())
            })
            .collect();
        values.sort();
        values.dedup();
        if values.len() == recipe.d {
            return ValueGrid::new(values).expect("sorted distinct values form a grid");
        }
    }
}

fn random_tails(rng: &mut ChaCha12Rng, recipe: &InstanceRecipe) -> TailDistribution {
    let mut tails: Vec<Rational> = (0..recipe.d - 1)
        .map(|_| {
            let den = rng.gen_range(1..=recipe.denominator_bound) as i64;
            let num_lo = if recipe.allow_zero_tails { 0 } else { 1 };
            let num = rng.gen_range(num_lo..=den);
            Rational::new(num.into(), den.into())
        })
        .collect();
    tails.sort_by(|a, b| b.cmp(a));
    TailDistribution::new(tails, recipe.d).expect("sorted draws in [0,1] are valid tails")
}

pub fn random_binary(recipe: &InstanceRecipe) -> BinaryInstance {
    let mut rng = ChaCha12Rng::seed_from_u64(recipe.seed);
    let grid = random_grid(&mut rng, recipe);
    let pairs = (0..recipe.n)
        .map(|_| {
            [
                random_tails(&mut rng, recipe),
                random_tails(&mut rng, recipe),
            ]
        })
        .collect();
    BinaryInstance::new(grid, pairs).expect("generated pairs match the grid")
}

pub fn random_subset(recipe: &InstanceRecipe, k: usize) -> SubsetInstance {
    let mut rng = ChaCha12Rng::seed_from_u64(recipe.seed);
    let grid = random_grid(&mut rng, recipe);
    let items = (0..recipe.n)
        .map(|_| random_tails(&mut rng, recipe))
        .collect();
    SubsetInstance::new(grid, items, k).expect("generated items match the grid")
}

/// Small binary fixture: 3 pairs, d = 3. Shared across the test corpus.
pub fn fixture_i1() -> Instance {
    Instance::Binary(random_binary(&InstanceRecipe::new(0x1157_0001, 3, 3)))
}

/// Medium binary fixture: 8 pairs, d = 3, nonnegative grid.
pub fn fixture_i2() -> Instance {
    Instance::Binary(random_binary(&InstanceRecipe::new(0x1157_0002, 8, 3)))
}

/// Subset fixture: n = 6, k = 3, d = 3.
pub fn fixture_s1() -> Instance {
    Instance::Subset(random_subset(&InstanceRecipe::new(0x1157_0003, 6, 3), 3))
}

/// Subset fixture: n = 10, k = 4, d = 3.
pub fn fixture_s2() -> Instance {
    Instance::Subset(random_subset(&InstanceRecipe::new(0x1157_0004, 10, 3), 4))
}

/// Deterministic instance whose grid is exactly [0, 1, 3]; handy where a
/// test wants hand-checkable values instead of a seeded draw.
pub fn tiny_example() -> Instance {
    let grid = ValueGrid::new(vec![rat_int(0), rat_int(1), rat_int(3)]).unwrap();
    let a = TailDistribution::new(
        vec![Rational::new(1.into(), 2.into()), Rational::new(1.into(), 4.into())],
        3,
    )
    .unwrap();
    let b = TailDistribution::new(
        vec![Rational::new(2.into(), 3.into()), Rational::new(1.into(), 5.into())],
        3,
    )
    .unwrap();
    let c = TailDistribution::new(
        vec![Rational::new(1.into(), 3.into()), Rational::new(1.into(), 7.into())],
        3,
    )
    .unwrap();
    Instance::Binary(
        BinaryInstance::new(grid, vec![[a.clone(), b.clone()], [b, c.clone()], [c, a]]).unwrap(),
    )
}
