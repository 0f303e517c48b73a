//! Evaluable maps between matrix ternary rings.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::scalar::Real;
use crate::ternary::{RingElement, Shape};

/// A pure, deterministic map `A -> B` between two matrix TROs.
///
/// `apply` may assume its argument has the domain shape; callers validate
/// shapes through [`TernaryMap::eval`].
pub trait TernaryMap<T: Real>: Send + Sync {
    fn domain(&self) -> Shape;
    fn codomain(&self) -> Shape;
    fn apply(&self, x: &RingElement<T>) -> RingElement<T>;

    fn eval(&self, x: &RingElement<T>) -> Result<RingElement<T>> {
        self.domain().expect(x.shape())?;
        Ok(self.apply(x))
    }
}

impl<T: Real, M: TernaryMap<T> + ?Sized> TernaryMap<T> for &M {
    fn domain(&self) -> Shape {
        (**self).domain()
    }
    fn codomain(&self) -> Shape {
        (**self).codomain()
    }
    fn apply(&self, x: &RingElement<T>) -> RingElement<T> {
        (**self).apply(x)
    }
}

impl<T: Real, M: TernaryMap<T> + ?Sized> TernaryMap<T> for Arc<M> {
    fn domain(&self) -> Shape {
        (**self).domain()
    }
    fn codomain(&self) -> Shape {
        (**self).codomain()
    }
    fn apply(&self, x: &RingElement<T>) -> RingElement<T> {
        (**self).apply(x)
    }
}

type Evaluator<T> = dyn Fn(&RingElement<T>) -> RingElement<T> + Send + Sync;

/// A map backed by a closure.
#[derive(Clone)]
pub struct FnMap<T: Real> {
    domain: Shape,
    codomain: Shape,
    f: Arc<Evaluator<T>>,
}

impl<T: Real> FnMap<T> {
    pub fn new(
        domain: Shape,
        codomain: Shape,
        f: impl Fn(&RingElement<T>) -> RingElement<T> + Send + Sync + 'static,
    ) -> Self {
        FnMap {
            domain,
            codomain,
            f: Arc::new(f),
        }
    }

    /// Endomorphism of a single shape.
    pub fn endo(shape: Shape, f: impl Fn(&RingElement<T>) -> RingElement<T> + Send + Sync + 'static) -> Self {
        Self::new(shape, shape, f)
    }
}

impl<T: Real> fmt::Debug for FnMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnMap")
            .field("domain", &self.domain)
            .field("codomain", &self.codomain)
            .finish_non_exhaustive()
    }
}

impl<T: Real> TernaryMap<T> for FnMap<T> {
    fn domain(&self) -> Shape {
        self.domain
    }
    fn codomain(&self) -> Shape {
        self.codomain
    }
    fn apply(&self, x: &RingElement<T>) -> RingElement<T> {
        (self.f)(x)
    }
}
