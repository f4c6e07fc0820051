use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Baseband waveform samples. Always non-empty with finite components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<C64>", into = "Vec<C64>")]
pub struct ComplexSequence {
    samples: Vec<C64>,
}

impl ComplexSequence {
    pub fn new(samples: Vec<C64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("sequence must hold at least one sample"));
        }
        if let Some(i) = samples
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self { samples })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![C64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    /// Squared Euclidean norm.
    pub fn energy(&self) -> f64 {
        energy(&self.samples)
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            samples: self.samples.iter().map(|z| z * s).collect(),
        }
    }

    /// Energy of each consecutive block of `block_len` samples (last block may be short).
    pub fn block_energies(&self, block_len: usize) -> Vec<f64> {
        self.samples.chunks(block_len.max(1)).map(energy).collect()
    }
}

pub(crate) fn energy(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

impl Index<usize> for ComplexSequence {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.samples[i]
    }
}

impl AsRef<[C64]> for ComplexSequence {
    fn as_ref(&self) -> &[C64] {
        &self.samples
    }
}

impl TryFrom<Vec<C64>> for ComplexSequence {
    type Error = Error;
    fn try_from(v: Vec<C64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ComplexSequence> for Vec<C64> {
    fn from(s: ComplexSequence) -> Self {
        s.samples
    }
}
