use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of the open upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexUHP(Complex64);

impl ComplexUHP {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() {
            return Err(Error::NonFinite { index: 0, value: re });
        }
        if !(im > 0.0) || !im.is_finite() {
            return Err(Error::NotUpperHalfPlane(im));
        }
        Ok(Self(Complex64::new(re, im)))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

impl From<ComplexUHP> for Complex64 {
    fn from(z: ComplexUHP) -> Self {
        z.0
    }
}

impl std::fmt::Display for ComplexUHP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}+{}i", self.0.re, self.0.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_closed_lower_half_plane() {
        assert!(ComplexUHP::new(0.0, 0.0).is_err());
        assert!(ComplexUHP::new(1.0, -1.0).is_err());
        assert!(ComplexUHP::new(1.0, f64::NAN).is_err());
        assert!(ComplexUHP::new(f64::INFINITY, 1.0).is_err());
        let z = ComplexUHP::new(1.0, 1e-300).unwrap();
        assert_eq!(z.im(), 1e-300);
    }
}
