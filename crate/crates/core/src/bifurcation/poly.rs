//! Exact integer-coefficient polynomials in one variable.

use std::ops::{Add, Mul, Neg, Sub};

/// `coeffs[i]` multiplies `Y^i`; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<i128>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<i128>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn constant(c: i128) -> Self {
        Self::new(vec![c])
    }

    pub fn identity() -> Self {
        Self::new(vec![0, 1])
    }

    pub fn coeff(&self, i: usize) -> i128 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::constant(1), |acc, _| &acc * self)
    }

    /// `self ∘ inner`, by Horner's scheme.
    pub fn compose(&self, inner: &Poly) -> Poly {
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::default(), |acc, &c| &(&acc * inner) + &Poly::constant(c))
    }

    pub fn iterate(&self, n: u32) -> Poly {
        (0..n).fold(Poly::identity(), |acc, _| self.compose(&acc))
    }

    /// `M2 - (M1 - Y²)² + M3 Y` with integer parameters.
    pub fn shrimp3(m1: i128, m2: i128, m3: i128) -> Poly {
        let inner = &Poly::constant(m1) - &Poly::identity().pow(2);
        &(&Poly::constant(m2) - &inner.pow(2)) + &Poly::new(vec![0, m3])
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &-rhs
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Poly::default();
        }
        let mut out = vec![0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}
