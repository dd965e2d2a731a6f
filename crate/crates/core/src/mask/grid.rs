use crate::error::{Error, Result};
use crate::num::Real;

/// Per-pixel weight map in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> SoftMask<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::SizeMismatch(format!(
                "mask {width}x{height} needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("mask value at index {i}")));
        }
        if let Some(i) = data.iter().position(|&v| v < T::zero() || v > T::one()) {
            return Err(Error::Invalid(format!("mask value at index {i} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("fill value in [0, 1]")
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == T::zero())
    }
}

/// Foreground/background map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }
}

/// Foreground exactly where the logit is strictly positive.
pub fn binarize_logits<T: Real>(logits: &[T], width: usize, height: usize) -> Result<BinaryMask> {
    if logits.len() != width * height {
        return Err(Error::SizeMismatch(format!(
            "{} logits for a {width}x{height} grid",
            logits.len()
        )));
    }
    if let Some(i) = logits.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("logit at index {i}")));
    }
    Ok(BinaryMask { width, height, data: logits.iter().map(|&v| v > T::zero()).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_logit_is_background() {
        let m = binarize_logits(&[-1.0, 0.0, 0.5], 3, 1).unwrap();
        assert_eq!(m.as_slice(), &[false, false, true]);
    }

    #[test]
    fn all_negative_and_all_positive() {
        assert!(binarize_logits(&[-3.0f32; 6], 3, 2).unwrap().is_empty());
        assert_eq!(binarize_logits(&[2.0f64; 6], 2, 3).unwrap().count(), 6);
    }

    #[test]
    fn non_finite_logit_rejected() {
        assert!(matches!(binarize_logits(&[0.0, f64::INFINITY], 2, 1), Err(Error::NonFinite(_))));
        assert!(matches!(binarize_logits(&[0.0, f64::NAN], 2, 1), Err(Error::NonFinite(_))));
    }

    #[test]
    fn soft_mask_rejects_out_of_range() {
        assert!(SoftMask::new(1, 2, vec![0.2, 1.2]).is_err());
        assert!(SoftMask::new(1, 2, vec![0.2]).is_err());
    }
}
