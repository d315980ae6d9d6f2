//! Monte Carlo fiberwise random walks.
//!
//! Samples are drawn in blocks of [`BLOCK`]; block `b` uses ChaCha8 seeded
//! with the run seed on stream `b`, so counts do not depend on how blocks are
//! scheduled across threads.

use num::{BigInt, BigRational, BigUint, Integer, One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupoid::UnitSet;
use crate::kernel::Kernel;
use crate::scalar::Scalar;

/// Identifier of the generator and stream layout, echoed in output metadata.
pub const RNG_ALGORITHM: &str = "chacha8-rand_chacha-0.3;seed_from_u64(seed);stream=block;block=4096";
/// Samples per RNG stream.
pub const BLOCK: usize = 4096;

/// Per-unit step laws: for each unit `y`, positions in `G^y` with their
/// cumulative probabilities.
#[derive(Debug, Clone)]
pub struct StepTable {
    steps: Vec<Vec<(usize, f64)>>,
    unit_arrows: Vec<usize>,
    tgt: Vec<usize>,
    src: Vec<usize>,
    compose: Vec<Vec<usize>>,
}

impl StepTable {
    pub fn new<S: Scalar>(kernel: &Kernel<S>) -> Result<Self> {
        kernel.check_probability_field()?;
        let g = kernel.groupoid();
        let steps = (0..g.unit_count())
            .map(|y| {
                let mut acc = 0.0;
                let mut out = Vec::new();
                for (i, &h) in g.target_fiber(y).iter().enumerate() {
                    let p = kernel.get(h).re_f64();
                    if p > 0.0 {
                        acc += p;
                        out.push((i, acc));
                    }
                }
                out
            })
            .collect();
        // compose[a][i] = a * (i-th arrow of G^{s(a)})
        let compose = (0..g.arrow_count())
            .map(|a| g.target_fiber(g.src(a)).iter().map(|&h| g.compose(a, h).expect("composable")).collect())
            .collect();
        Ok(StepTable {
            steps,
            unit_arrows: (0..g.unit_count()).map(|x| g.unit_arrow(x)).collect(),
            tgt: (0..g.arrow_count()).map(|a| g.tgt(a)).collect(),
            src: (0..g.arrow_count()).map(|a| g.src(a)).collect(),
            compose,
        })
    }

    /// `n` steps from `id_x`: at each step `g <- g h` with `h ~ pi` on `G^{s(g)}`.
    pub fn walk<R: Rng + ?Sized>(&self, x: usize, n: usize, rng: &mut R) -> usize {
        let mut g = self.unit_arrows[x];
        for _ in 0..n {
            let law = &self.steps[self.src[g]];
            let u: f64 = rng.gen::<f64>() * law.last().map_or(1.0, |l| l.1);
            let i = law.partition_point(|&(_, c)| c <= u).min(law.len() - 1);
            g = self.compose[g][law[i].0];
        }
        g
    }

    pub fn is_unit_arrow(&self, g: usize) -> bool {
        self.unit_arrows[self.tgt[g]] == g
    }
}

/// The product of an `n`-step walk started at `id_x`.
pub fn sample_walk<S: Scalar>(kernel: &Kernel<S>, x: usize, n: usize, seed: u64) -> Result<usize> {
    let table = StepTable::new(kernel)?;
    if x >= kernel.groupoid().unit_count() {
        return Err(Error::UnitOutOfRange(x));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(table.walk(x, n, &mut rng))
}

/// Exact sampler of units of `E` with probability `mu(x) / mu(E)`.
#[derive(Debug, Clone)]
struct StartSampler {
    units: Vec<usize>,
    /// Integer cumulative numerators over the common denominator `total`.
    cumulative: Vec<BigUint>,
    total: BigUint,
}

impl StartSampler {
    fn new<S: Scalar>(kernel: &Kernel<S>, set: &UnitSet) -> Result<Self> {
        let g = kernel.groupoid();
        set.check_range(g)?;
        let mass = set.mass(g);
        if set.is_empty() || !mass.is_positive() {
            return Err(Error::NullSet);
        }
        let shares: Vec<BigRational> = set.members().iter().map(|&x| g.weight(x) / &mass).collect();
        let denom = shares.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let mut acc = BigInt::zero();
        let cumulative = shares
            .iter()
            .map(|r| {
                acc += r.numer() * (&denom / r.denom());
                acc.to_biguint().expect("nonnegative")
            })
            .collect();
        Ok(StartSampler { units: set.members().to_vec(), cumulative, total: denom.to_biguint().expect("positive") })
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        if self.units.len() == 1 {
            return self.units[0];
        }
        let u = uniform_below(rng, &self.total);
        let i = self.cumulative.partition_point(|c| c <= &u);
        self.units[i]
    }
}

/// Uniform integer in `[0, bound)` by rejection on whole 64-bit limbs.
fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    if let Some(b) = bound.to_u64() {
        return BigUint::from(rng.gen_range(0..b));
    }
    let bits = bound.bits();
    let limbs = bits.div_ceil(64) as usize;
    let top_bits = bits - 64 * (limbs as u64 - 1);
    loop {
        let mut digits: Vec<u64> = (0..limbs).map(|_| rng.next_u64()).collect();
        if top_bits < 64 {
            digits[limbs - 1] &= (1u64 << top_bits) - 1;
        }
        let mut bytes = Vec::with_capacity(limbs * 8);
        for d in &digits {
            bytes.extend_from_slice(&d.to_le_bytes());
        }
        let candidate = BigUint::from_bytes_le(&bytes);
        if &candidate < bound {
            return candidate;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnEstimate {
    pub steps: usize,
    pub samples: usize,
    pub returns: u64,
    pub p_hat: f64,
    pub std_error: f64,
    pub seed: u64,
    pub rng: &'static str,
}

impl ReturnEstimate {
    /// `(p_hat - exact) / std_error`; infinite when the error is zero but the values differ.
    pub fn z_score(&self, exact: f64) -> f64 {
        let d = self.p_hat - exact;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d.abs() < 1e-15 {
            0.0
        } else {
            f64::INFINITY.copysign(d)
        }
    }
}

fn blocks(samples: usize) -> impl IndexedParallelIterator<Item = (u64, usize)> {
    let count = samples.div_ceil(BLOCK);
    (0..count).into_par_iter().map(move |b| (b as u64, BLOCK.min(samples - b * BLOCK)))
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Fraction of walks from `mu_E`-random start units whose product is a unit
/// arrow, that is, which are back at their start unit after `n` steps.
pub fn estimate_return<S: Scalar>(
    kernel: &Kernel<S>,
    set: &UnitSet,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ReturnEstimate> {
    if samples == 0 {
        return Err(Error::BadParameters("sample count must be at least 1".into()));
    }
    let start = StartSampler::new(kernel, set)?;
    let table = StepTable::new(kernel)?;
    let returns: u64 = blocks(samples)
        .map(|(b, len)| {
            let mut rng = block_rng(seed, b);
            (0..len).filter(|_| table.is_unit_arrow(table.walk(start.sample(&mut rng), n, &mut rng))).count() as u64
        })
        .sum();
    let p_hat = returns as f64 / samples as f64;
    Ok(ReturnEstimate {
        steps: n,
        samples,
        returns,
        p_hat,
        std_error: (p_hat * (1.0 - p_hat) / samples as f64).sqrt(),
        seed,
        rng: RNG_ALGORITHM,
    })
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::BadParameters(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Empirical law of the `n`-step product from `id_x`, indexed by arrow.
pub fn empirical_distribution<S: Scalar>(
    kernel: &Kernel<S>,
    x: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let g = kernel.groupoid();
    if x >= g.unit_count() {
        return Err(Error::UnitOutOfRange(x));
    }
    let table = StepTable::new(kernel)?;
    let arrows = g.arrow_count();
    let counts = blocks(samples)
        .map(|(b, len)| {
            let mut rng = block_rng(seed, b);
            let mut counts = vec![0u64; arrows];
            for _ in 0..len {
                counts[table.walk(x, n, &mut rng)] += 1;
            }
            counts
        })
        .reduce(|| vec![0u64; arrows], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    Ok(counts.into_iter().map(|c| c as f64 / samples as f64).collect())
}

/// `sum |p - q| / 2`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::finite::{cyclic_preset, full_relation_preset};
    use crate::groupoid::{build_pair_groupoid, GroupoidRef};
    use crate::scalar::rational;
    use std::sync::Arc;

    #[test]
    fn zero_steps_stay_at_unit() {
        let p = full_relation_preset(3);
        for x in 0..3 {
            assert_eq!(sample_walk(&p.kernel, x, 0, 7).unwrap(), p.groupoid.unit_arrow(x));
        }
        let est = estimate_return(&p.kernel, &p.groupoid.all_units(), 0, 1000, 1).unwrap();
        assert_eq!(est.p_hat, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn walk_stays_in_target_fiber() {
        let p = full_relation_preset(4);
        for seed in 0..50 {
            let a = sample_walk(&p.kernel, 2, 5, seed).unwrap();
            assert_eq!(p.groupoid.tgt(a), 2);
        }
    }

    #[test]
    fn z2_single_step_chi_square() {
        let p = cyclic_preset(2);
        let n = 20_000;
        let dist = empirical_distribution(&p.kernel, 0, 1, n, 11).unwrap();
        let chi: f64 = dist.iter().map(|&f| (f * n as f64 - n as f64 / 2.0).powi(2) / (n as f64 / 2.0)).sum();
        // 1 degree of freedom, 99.9% quantile
        assert!(chi < 10.83, "chi-square {chi}");
    }

    #[test]
    fn s3_two_steps_uniform() {
        let p = full_relation_preset(3);
        let dist = empirical_distribution(&p.kernel, 0, 2, 60_000, 5).unwrap();
        let exact = p.kernel.convolution_power(2).to_f64();
        let want: Vec<f64> = (0..p.groupoid.arrow_count())
            .map(|a| if p.groupoid.tgt(a) == 0 { exact.get(a) } else { 0.0 })
            .collect();
        assert!(total_variation(&dist, &want) < 0.01);
    }

    #[test]
    fn deterministic_across_threads() {
        let p = full_relation_preset(4);
        let set = p.groupoid.all_units();
        let one = with_threads(1, || estimate_return(&p.kernel, &set, 2, 30_000, 42)).unwrap().unwrap();
        let four = with_threads(4, || estimate_return(&p.kernel, &set, 2, 30_000, 42)).unwrap().unwrap();
        assert_eq!(one.returns, four.returns);
        assert!(one.z_score(0.25).abs() < 4.0);
    }

    #[test]
    fn start_sampler_follows_weights() {
        let classes = vec![vec![("a".to_string(), rational(1, 4))], vec![("b".to_string(), rational(3, 4))]];
        let g: GroupoidRef = Arc::new(build_pair_groupoid(&classes).unwrap());
        let k = Kernel::<BigRational>::unit_indicator(g.clone());
        let sampler = StartSampler::new(&k, &g.all_units()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hits = (0..40_000).filter(|_| sampler.sample(&mut rng) == 1).count() as f64 / 40_000.0;
        assert!((hits - 0.75).abs() < 0.01);
        let big = BigUint::from(u64::MAX) * BigUint::from(3u32);
        for _ in 0..100 {
            assert!(uniform_below(&mut rng, &big) < big);
        }
        assert!(matches!(estimate_return(&k, &UnitSet::new(vec![]), 1, 10, 0), Err(Error::NullSet)));
    }
}
