//! Monte-Carlo verification of the C*-ternary ring axioms.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::rng_from_seed;
use crate::scalar::{unit_floor, Real};
use crate::ternary::{random_element_from, RingElement, Shape};

/// Radius of the ball the axiom samples are drawn from.
const SAMPLE_RADIUS: f64 = 2.0;

/// Worst relative residuals observed by [`axiom_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingAxiomReport {
    pub shape: Shape,
    /// `max ||[xy[zts]] - [x[tzy]s]||` and `||[xy[zts]] - [[xyz]ts]||`,
    /// relative to `max(1, ||x|| ||y|| ||z|| ||t|| ||s||)`.
    pub max_assoc_residual: f64,
    /// `max (||[xyz]|| - ||x|| ||y|| ||z||)_+`, relative.
    pub max_norm_ineq_violation: f64,
    /// `max | ||[xxx]|| - ||x||^3 |`, relative.
    pub max_cube_identity_residual: f64,
    /// `max ||[x (a y) z] - conj(a) [xyz]||`, relative.
    pub max_middle_conj_residual: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub passed: bool,
}

/// Checks associativity, norm submultiplicativity, the cube identity and
/// middle-slot conjugate linearity of `[xyz] = x y* z` on random tuples.
pub fn axiom_suite<T: Real>(shape: Shape, samples: usize, seed: u64, tol: f64) -> Result<RingAxiomReport> {
    axiom_suite_with::<T, _>(shape, samples, seed, tol, |x, y, z| x.tprod_unchecked(y, z))
}

/// [`axiom_suite`] for an arbitrary candidate product.
pub fn axiom_suite_with<T, P>(
    shape: Shape,
    samples: usize,
    seed: u64,
    tol: f64,
    product: P,
) -> Result<RingAxiomReport>
where
    T: Real,
    P: Fn(&RingElement<T>, &RingElement<T>, &RingElement<T>) -> RingElement<T>,
{
    let shape = Shape::new(shape.rows, shape.cols)?;
    if samples == 0 {
        return Err(Error::InvalidInput(
            "axiom suite needs at least one sample".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let radius = T::of(SAMPLE_RADIUS);
    let mut assoc = T::zero();
    let mut ineq = T::zero();
    let mut cube = T::zero();
    let mut conj = T::zero();
    for _ in 0..samples {
        let mut draw = || random_element_from(&mut rng, shape, radius);
        let (x, y, z, t, s) = (draw(), draw(), draw(), draw(), draw());
        let (nx, ny, nz, nt, ns) = (x.norm(), y.norm(), z.norm(), t.norm(), s.norm());

        let reference = unit_floor(nx * ny * nz * nt * ns);
        let right = product(&x, &y, &product(&z, &t, &s));
        let middle = product(&x, &product(&t, &z, &y), &s);
        let left = product(&product(&x, &y, &z), &t, &s);
        let r1 = (&right - &middle).norm() / reference;
        let r2 = (&right - &left).norm() / reference;
        assoc = assoc.max(r1).max(r2);

        let bound = nx * ny * nz;
        let excess = (product(&x, &y, &z).norm() - bound).max(T::zero());
        ineq = ineq.max(excess / unit_floor(bound));

        let n3 = nx * nx * nx;
        let c = (product(&x, &x, &x).norm() - n3).abs() / unit_floor(n3);
        cube = cube.max(c);

        let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let rho: f64 = 0.5 + 1.5 * rng.random::<f64>();
        let alpha = Complex::from_polar(T::of(rho), T::of(theta));
        let lhs = product(&x, &y.scale(alpha), &z);
        let rhs = product(&x, &y, &z).scale(alpha.conj());
        let cj = (&lhs - &rhs).norm() / unit_floor(T::of(rho) * bound);
        conj = conj.max(cj);
    }
    let report = RingAxiomReport {
        shape,
        max_assoc_residual: assoc.as_f64(),
        max_norm_ineq_violation: ineq.as_f64(),
        max_cube_identity_residual: cube.as_f64(),
        max_middle_conj_residual: conj.as_f64(),
        samples,
        seed,
        tol,
        passed: false,
    };
    let passed = [
        report.max_assoc_residual,
        report.max_norm_ineq_violation,
        report.max_cube_identity_residual,
        report.max_middle_conj_residual,
    ]
    .iter()
    .all(|r| *r <= tol);
    Ok(RingAxiomReport { passed, ..report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_tro_satisfies_axioms() {
        let r = axiom_suite::<f64>(Shape::new(2, 2).unwrap(), 100, 1, 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_assoc_residual < 1e-10);
        assert!(r.max_cube_identity_residual < 1e-10);
    }

    #[test]
    fn scalar_ring_is_exact() {
        let r = axiom_suite::<f64>(Shape::new(1, 1).unwrap(), 200, 4, 1e-9).unwrap();
        assert!(r.passed);
        assert!(r.max_norm_ineq_violation < 1e-15);
        assert!(r.max_cube_identity_residual < 1e-15);
    }

    #[test]
    fn unconjugated_product_breaks_axioms() {
        // x y z without conjugating the middle factor
        let wrong = |x: &RingElement<f64>, y: &RingElement<f64>, z: &RingElement<f64>| {
            x.matmul(y).unwrap().matmul(z).unwrap()
        };
        let r = axiom_suite_with(Shape::new(2, 2).unwrap(), 50, 2, 1e-9, wrong).unwrap();
        assert!(r.max_cube_identity_residual > 1e-3, "{r:?}");
        assert!(!r.passed);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(axiom_suite::<f64>(Shape::new(2, 2).unwrap(), 0, 1, 1e-9).is_err());
    }

    #[test]
    fn deterministic() {
        let s = Shape::new(3, 2).unwrap();
        assert_eq!(
            axiom_suite::<f64>(s, 20, 7, 1e-9).unwrap(),
            axiom_suite::<f64>(s, 20, 7, 1e-9).unwrap()
        );
    }
}
