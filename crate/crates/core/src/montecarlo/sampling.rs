//! Seeded i.i.d. sampling by inverse-CDF transform.
//!
//! Uniforms come from ChaCha8, a counter-based stream cipher generator, so a
//! seed fixes the stream on every platform. A replicate's seed is
//! `base_seed ^ replicate_index`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::DensityModel;
use crate::error::Result;

pub fn replicate_seed(base_seed: u64, replicate: usize) -> u64 {
    base_seed ^ replicate as u64
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
pub fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub fn sample_iid(model: &DensityModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| model.quantile(open_uniform(&mut rng))).collect()
}

/// One-sample Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sample() {
        assert!(sample_iid(&DensityModel::logistic(), 0, 7).unwrap().is_empty());
    }

    #[test]
    fn deterministic() {
        let m = DensityModel::logistic();
        let a = sample_iid(&m, 100, 42).unwrap();
        let b = sample_iid(&m, 100, 42).unwrap();
        assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert_ne!(a, sample_iid(&m, 100, 43).unwrap());
    }

    #[test]
    fn prefix_property() {
        let m = DensityModel::normal();
        let long = sample_iid(&m, 50, 9).unwrap();
        assert_eq!(&long[..20], &sample_iid(&m, 20, 9).unwrap()[..]);
    }

    #[test]
    fn logistic_draws_pass_ks() {
        let m = DensityModel::logistic();
        // aggregate 200 seeded samples of size 100
        let draws: Vec<f64> = (0..200).flat_map(|r| sample_iid(&m, 100, replicate_seed(2024, r)).unwrap()).collect();
        let d = ks_statistic(&draws, |x| m.cdf(x));
        // 0.001 critical value ≈ 1.949/√M
        assert!(d < 1.949 / (draws.len() as f64).sqrt(), "D = {d}");
    }

    #[test]
    fn uniforms_stay_open() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10000 {
            let u = open_uniform(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
