//! Deterministic perturbation fields used to build approximate
//! homomorphisms with known ground truth.
//!
//! Hash-based fields depend on the input only through its entries rounded
//! to the grid `2^-20`, so the perturbed map is a genuine function.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::sampling::{rng_from_seed, splitmix64};
use crate::scalar::Real;
use crate::ternary::{gaussian_matrix, RingElement, Shape};

/// Quantisation grid for hashing inputs.
pub const HASH_GRID: f64 = (1u64 << 20) as f64;

/// Hash of an element's quantised entries.
pub fn hash_element<T: Real>(x: &RingElement<T>, seed: u64) -> u64 {
    let mut h = splitmix64(seed);
    for z in x.entries() {
        for v in [z.re, z.im] {
            let mut k = (v.as_f64() * HASH_GRID).round();
            if k == 0.0 {
                k = 0.0; // fold -0.0
            }
            h = splitmix64(h ^ k.to_bits());
        }
    }
    h
}

/// How the magnitude of a hash-noise sample is capped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum NoiseProfile {
    /// `||eta(x)|| <= amplitude`
    Ball { amplitude: f64 },
    /// `||eta(x)|| <= eps min(||x||^p, 1)`
    CappedPower { eps: f64, p: f64 },
    /// `||eta(x)|| <= amplitude` on `inner <= ||x|| <= outer`, zero elsewhere.
    Annulus { amplitude: f64, inner: f64, outer: f64 },
}

impl NoiseProfile {
    /// Magnitude cap at an input of norm `n`.
    pub fn cap(&self, n: f64) -> f64 {
        if n == 0.0 {
            return 0.0;
        }
        match *self {
            NoiseProfile::Ball { amplitude } => amplitude,
            NoiseProfile::CappedPower { eps, p } => eps * n.powf(p).min(1.0),
            NoiseProfile::Annulus {
                amplitude,
                inner,
                outer,
            } => {
                if (inner..=outer).contains(&n) {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }
}

/// Pseudo-random field `x -> L N(x) R` where `N(x)` is Gaussian seeded by the
/// hash of `x`, `L`, `R` are fixed projections (or identities) and the result
/// is rescaled to spectral norm `cap(||x||) * s(x)`, `s` uniform on `[0, 1)`.
#[derive(Debug, Clone)]
pub struct HashNoise<T: Real> {
    pub profile: NoiseProfile,
    pub seed: u64,
    pub codomain: Shape,
    pub left: Option<RingElement<T>>,
    pub right: Option<RingElement<T>>,
}

impl<T: Real> HashNoise<T> {
    pub fn sample(&self, x: &RingElement<T>) -> RingElement<T> {
        let cap = self.profile.cap(x.norm().as_f64());
        if cap == 0.0 {
            return RingElement::zeros(self.codomain);
        }
        let mut rng = rng_from_seed(hash_element(x, self.seed));
        let s: f64 = rng.random();
        let mut n = gaussian_matrix::<T>(&mut rng, self.codomain);
        if let Some(l) = &self.left {
            n = l.matmul_unchecked(&n);
        }
        if let Some(r) = &self.right {
            n = n.matmul_unchecked(r);
        }
        let nn = n.norm();
        if nn.is_zero() {
            return RingElement::zeros(self.codomain);
        }
        n.scale_real(T::of(cap * s) / nn)
    }
}

/// Continuous bounded field `x -> amplitude L M(x) R / sqrt(2 m n)` with
/// `M(x)_ab = sin(Re <G_ab, x>) + i sin(Re <H_ab, x>)`; vanishes at zero.
#[derive(Debug, Clone)]
pub struct SmoothNoise<T: Real> {
    pub amplitude: f64,
    pub codomain: Shape,
    probes: Vec<(RingElement<T>, RingElement<T>)>,
    pub left: Option<RingElement<T>>,
    pub right: Option<RingElement<T>>,
}

impl<T: Real> SmoothNoise<T> {
    pub fn new(
        amplitude: f64,
        domain: Shape,
        codomain: Shape,
        seed: u64,
        left: Option<RingElement<T>>,
        right: Option<RingElement<T>>,
    ) -> Self {
        let mut rng = rng_from_seed(seed);
        let probes = (0..codomain.len())
            .map(|_| {
                (
                    gaussian_matrix::<T>(&mut rng, domain),
                    gaussian_matrix::<T>(&mut rng, domain),
                )
            })
            .collect();
        SmoothNoise {
            amplitude,
            codomain,
            probes,
            left,
            right,
        }
    }

    pub fn sample(&self, x: &RingElement<T>) -> RingElement<T> {
        let pair = |g: &RingElement<T>| -> T {
            g.entries()
                .iter()
                .zip(x.entries())
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<T>()
        };
        let entries: Vec<Complex<T>> = self
            .probes
            .iter()
            .map(|(g, h)| Complex::new(pair(g).sin(), pair(h).sin()))
            .collect();
        let mut m = RingElement::from_vec_unchecked(self.codomain, entries);
        if let Some(l) = &self.left {
            m = l.matmul_unchecked(&m);
        }
        if let Some(r) = &self.right {
            m = m.matmul_unchecked(r);
        }
        let norm = T::of(self.amplitude / (2.0 * self.codomain.len() as f64).sqrt());
        m.scale_real(norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ternary::random_element;

    #[test]
    fn hash_is_deterministic_seeded_and_ignores_sign_of_zero() {
        let s = Shape::new(2, 2).unwrap();
        let x = random_element::<f64>(s, 1.0, 1);
        assert_eq!(hash_element(&x, 3), hash_element(&x.clone(), 3));
        let z = RingElement::<f64>::zeros(s);
        assert_eq!(hash_element(&z, 3), hash_element(&z.scale_real(-1.0), 3));
        assert_ne!(hash_element(&x, 3), hash_element(&x, 4));
    }

    #[test]
    fn ball_noise_is_bounded_and_deterministic() {
        let s = Shape::new(2, 2).unwrap();
        let field = HashNoise::<f64> {
            profile: NoiseProfile::Ball { amplitude: 0.3 },
            seed: 5,
            codomain: s,
            left: None,
            right: None,
        };
        for k in 0..200 {
            let x = random_element::<f64>(s, 10.0, k);
            let e = field.sample(&x);
            assert!(e.norm() <= 0.3 + 1e-15);
            assert_eq!(e, field.sample(&x));
        }
        assert!(field.sample(&RingElement::zeros(s)).is_zero());
    }

    #[test]
    fn annulus_profile() {
        let p = NoiseProfile::Annulus {
            amplitude: 1.0,
            inner: 0.25,
            outer: 0.75,
        };
        assert_eq!(p.cap(0.1), 0.0);
        assert_eq!(p.cap(0.5), 1.0);
        assert_eq!(p.cap(1.0), 0.0);
    }

    #[test]
    fn smooth_noise_is_bounded_and_vanishes_at_zero() {
        let s = Shape::new(2, 2).unwrap();
        let c = Shape::new(3, 3).unwrap();
        let field = SmoothNoise::<f64>::new(0.2, s, c, 1, None, None);
        assert!(field.sample(&RingElement::zeros(s)).is_zero());
        for k in 0..100 {
            let x = random_element::<f64>(s, 50.0, k);
            assert!(field.sample(&x).norm() <= 0.2 + 1e-15);
        }
    }
}
