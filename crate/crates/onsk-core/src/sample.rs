//! Deterministic sampling of evaluation points.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{make_params, rat, Params, Rational, Scalar};

const PRIMES: [i64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// `a/b` with distinct primes `a < b` from `[2, 50]`, so `0 < a/b < 1`.
    pub fn ratio(&mut self) -> Rational {
        let pick: Vec<i64> = PRIMES.choose_multiple(&mut self.rng, 2).copied().collect();
        rat(pick[0].min(pick[1]), pick[0].max(pick[1]))
    }

    pub fn scalar(&mut self) -> Scalar {
        Scalar::real(self.ratio())
    }

    pub fn sign(&mut self) -> i8 {
        if self.rng.gen_bool(0.5) {
            1
        } else {
            -1
        }
    }

    pub fn index(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }

    /// `t` and `z` in `(0, 1)`, independent signs `ε, μ`. Keeps `|q| < 1`, `|z| < 1`.
    pub fn params(&mut self) -> Params {
        loop {
            let t = self.ratio();
            let z = self.scalar();
            let (eps, mu) = (self.sign(), self.sign());
            // z = t² would put the pole 1 + z q^{-1} on the sample
            if z.re == t.clone() * &t {
                continue;
            }
            return make_params(t, z, eps, mu).expect("sampled t is generic");
        }
    }
}

pub fn sample_params(seed: u64) -> Params {
    Sampler::new(seed).params()
}
