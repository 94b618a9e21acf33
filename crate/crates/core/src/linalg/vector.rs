use std::ops::{Deref, DerefMut};

use super::{axpy, dotc, norm2, C64};
use crate::error::{Error, Result};

/// Fixed-length complex vector.
///
/// The length is fixed at construction; mutable access goes through a slice
/// so entries can change but the length cannot.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<C64>,
}

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Self {
            data: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn from_vec(data: Vec<C64>) -> Self {
        Self { data }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self {
            data: values.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    /// Unit vector `e_i` of length `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.data[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// `selfᴴ other`, panicking on length mismatch.
    pub fn dot(&self, other: &[C64]) -> C64 {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        dotc(&self.data, other)
    }

    pub fn scaled(&self, alpha: C64) -> Self {
        Self {
            data: self.data.iter().map(|z| alpha * z).collect(),
        }
    }

    pub fn add(&self, other: &[C64]) -> Self {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        Self {
            data: self.data.iter().zip(other).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &[C64]) -> Self {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        Self {
            data: self.data.iter().zip(other).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: C64, x: &[C64]) {
        assert_eq!(self.len(), x.len(), "vector length mismatch");
        axpy(alpha, x, &mut self.data);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Deref for Vector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.data
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
}

impl From<Vec<C64>> for Vector {
    fn from(data: Vec<C64>) -> Self {
        Self { data }
    }
}

impl FromIterator<C64> for Vector {
    fn from_iter<I: IntoIterator<Item = C64>>(iter: I) -> Self {
        Self {
            data: iter.into_iter().collect(),
        }
    }
}

/// `xᴴy`, conjugating the first argument.
pub fn hermitian_inner_product(x: &[C64], y: &[C64]) -> Result<C64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(dotc(x, y))
}
