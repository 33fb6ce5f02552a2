//! Compensated (Neumaier) summation.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct Compensated<F> {
    sum: F,
    comp: F,
}

impl<F: Scalar> Default for Compensated<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> Compensated<F> {
    pub fn new() -> Self {
        Compensated { sum: F::zero(), comp: F::zero() }
    }

    #[inline]
    pub fn add(&mut self, v: F) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> F {
        self.sum + self.comp
    }
}

impl<F: Scalar> std::iter::FromIterator<F> for Compensated<F> {
    fn from_iter<I: IntoIterator<Item = F>>(iter: I) -> Self {
        let mut c = Compensated::new();
        for v in iter {
            c.add(v);
        }
        c
    }
}

/// Compensated sum of an iterator.
pub fn sum<F: Scalar, I: IntoIterator<Item = F>>(iter: I) -> F {
    iter.into_iter().collect::<Compensated<F>>().value()
}
