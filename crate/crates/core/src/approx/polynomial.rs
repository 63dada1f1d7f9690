//! Dense univariate polynomials over `f64` or exact rationals.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::numeric::NeumaierSum;

/// Coefficient field for [`Poly`].
pub trait Coefficient:
    Clone
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;

    /// `sum_i a_i b_i`.
    fn dot(pairs: impl Iterator<Item = (Self, Self)>) -> Self {
        pairs.fold(Self::zero(), |acc, (a, b)| acc + a * b)
    }
}

impl Coefficient for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn dot(pairs: impl Iterator<Item = (Self, Self)>) -> Self {
        pairs.map(|(a, b)| a * b).collect::<NeumaierSum>().value()
    }
}

impl Coefficient for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

/// Coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Coefficient> Poly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Length of the coefficient vector minus one.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let coeffs = (0..len)
            .map(|k| {
                let lo = k.saturating_sub(other.coeffs.len() - 1);
                let hi = k.min(self.coeffs.len() - 1);
                T::dot((lo..=hi).map(|i| (self.coeffs[i].clone(), other.coeffs[k - i].clone())))
            })
            .collect();
        Self { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self { coeffs: (0..len).map(|i| self.coeff(i) + other.coeff(i)).collect() }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    /// `sum_{l=0}^{order} p^l / l!`.
    pub fn exp_truncated(&self, order: usize) -> Self {
        let mut total = Self::constant(T::one());
        let mut term = Self::constant(T::one());
        for l in 1..=order {
            term = term.mul(self).scale(&(T::one() / T::from_i64(l as i64)));
            total = total.add(&term);
        }
        total
    }

    pub fn evaluate(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_binomials() {
        let p = Poly::new(vec![1.0, 1.0]);
        let sq = p.mul(&p);
        assert_eq!(sq.coeffs(), &[1.0, 2.0, 1.0]);
        assert_eq!(sq.evaluate(2.0), 9.0);
    }

    #[test]
    fn truncated_exponential_of_monomial() {
        let w = Poly::new(vec![BigRational::zero(), BigRational::one()]);
        let e = w.exp_truncated(4);
        let expected: Vec<BigRational> = [1, 1, 2, 6, 24]
            .iter()
            .map(|&f| BigRational::new(BigInt::from(1), BigInt::from(f)))
            .collect();
        assert_eq!(e.coeffs(), expected.as_slice());
    }
}
