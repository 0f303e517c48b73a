//! Seeded randomness and scalar-domain samplers.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// The generator used everywhere a seed is accepted.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a parent seed and a label.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Set of scalars `mu` over which the defect inequality is required.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarDomain {
    /// The unit circle `|mu| = 1`.
    UnitCircle,
    /// Exactly `{1, i}`.
    OneAndI,
    /// All complex numbers (sampled from a disc of radius 3).
    AllComplex,
}

impl ScalarDomain {
    /// `count` scalars from the domain. `OneAndI` alternates `1, i, 1, ...`.
    pub fn sample<T: Real>(&self, count: usize, seed: u64) -> Vec<Complex<T>> {
        let mut rng = rng_from_seed(seed);
        (0..count).map(|k| self.draw(&mut rng, k)).collect()
    }

    pub(crate) fn draw<T: Real>(&self, rng: &mut SeededRng, k: usize) -> Complex<T> {
        match self {
            ScalarDomain::UnitCircle => {
                let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                Complex::from_polar(T::one(), T::of(theta))
            }
            ScalarDomain::OneAndI => {
                if k.is_multiple_of(2) {
                    Complex::new(T::one(), T::zero())
                } else {
                    Complex::new(T::zero(), T::one())
                }
            }
            ScalarDomain::AllComplex => {
                let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                let rho: f64 = 3.0 * rng.random::<f64>().sqrt();
                Complex::from_polar(T::of(rho), T::of(theta))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarDomain::UnitCircle => "unit_circle",
            ScalarDomain::OneAndI => "one_and_i",
            ScalarDomain::AllComplex => "all_complex",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_samples_have_modulus_one() {
        for z in ScalarDomain::UnitCircle.sample::<f64>(500, 1) {
            assert!((z.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn one_and_i_is_exact() {
        let v = ScalarDomain::OneAndI.sample::<f64>(5, 0);
        assert_eq!(v[0], Complex::new(1.0, 0.0));
        assert_eq!(v[1], Complex::new(0.0, 1.0));
        assert!(v
            .iter()
            .all(|z| *z == Complex::new(1.0, 0.0) || *z == Complex::new(0.0, 1.0)));
    }

    #[test]
    fn samplers_are_deterministic() {
        assert_eq!(
            ScalarDomain::AllComplex.sample::<f64>(10, 77),
            ScalarDomain::AllComplex.sample::<f64>(10, 77)
        );
        assert_ne!(derive_seed(1, 2), derive_seed(1, 3));
    }
}
