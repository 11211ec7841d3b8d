//! One-dimensional grey-scale morphology with flat structuring elements.
//!
//! Windows that run past either end of the signal see the edge sample
//! repeated.

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MorphologyError {
    #[error("structuring element length must be odd and at least 1, got {0}")]
    BadLength(usize),
}

/// Centered structuring element. Only flat elements (all heights zero) are
/// constructed today.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuringElement {
    heights: Vec<f64>,
}

impl StructuringElement {
    pub fn flat(len: usize) -> Result<Self, MorphologyError> {
        if len == 0 || len.is_multiple_of(2) {
            return Err(MorphologyError::BadLength(len));
        }
        Ok(Self {
            heights: vec![0.0; len],
        })
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn origin(&self) -> usize {
        self.heights.len() / 2
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    fn offsets(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let o = self.origin() as isize;
        self.heights
            .iter()
            .enumerate()
            .map(move |(i, &h)| (i as isize - o, h))
    }
}

fn sample(x: &[f64], k: isize) -> f64 {
    x[k.clamp(0, x.len() as isize - 1) as usize]
}

/// `(x ⊕ g)(k) = max_s x(k+s) + g(s)`.
pub fn dilate(x: &[f64], g: &StructuringElement) -> Vec<f64> {
    (0..x.len() as isize)
        .map(|k| {
            g.offsets()
                .map(|(s, h)| sample(x, k + s) + h)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// `(x ⊖ g)(k) = min_s x(k+s) − g(s)`.
pub fn erode(x: &[f64], g: &StructuringElement) -> Vec<f64> {
    (0..x.len() as isize)
        .map(|k| {
            g.offsets()
                .map(|(s, h)| sample(x, k + s) - h)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Average of dilation and erosion.
pub fn mmf(x: &[f64], g: &StructuringElement) -> Vec<f64> {
    dilate(x, g)
        .into_iter()
        .zip(erode(x, g))
        .map(|(d, e)| 0.5 * (d + e))
        .collect()
}
