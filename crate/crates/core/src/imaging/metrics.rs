use serde::{Deserialize, Serialize};

use super::IsarImage;
use crate::error::{Error, Result};
use crate::CMatrix;

/// Whether comparisons use the complex images or their magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricMode {
    #[default]
    Complex,
    Magnitude,
}

fn prepared(i: &IsarImage, mode: MetricMode) -> CMatrix {
    match mode {
        MetricMode::Complex => i.values().clone(),
        MetricMode::Magnitude => i.values().map(|z| crate::C64::new(z.norm(), 0.0)),
    }
}

fn same_shape(a: &IsarImage, b: &IsarImage) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::mismatch(
            format!("{:?}", b.shape()),
            format!("{:?}", a.shape()),
        ));
    }
    Ok(())
}

/// `IC = sqrt(mean((|I| − mean|I|)²)) / mean|I|`.
pub fn image_contrast(i: &IsarImage) -> Result<f64> {
    let n = i.values().len() as f64;
    let mags: Vec<f64> = i.values().iter().map(|z| z.norm()).collect();
    let mean = mags.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::ZeroNorm("image"));
    }
    let var = mags.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}

/// `COH = |Σ I_R ⊙ I*| / (‖I‖_F ‖I_R‖_F)`.
pub fn coherence(i: &IsarImage, reference: &IsarImage, mode: MetricMode) -> Result<f64> {
    same_shape(i, reference)?;
    let a = prepared(i, mode);
    let b = prepared(reference, mode);
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm("image"));
    }
    let inner: crate::C64 = b.iter().zip(a.iter()).map(|(r, x)| r * x.conj()).sum();
    Ok((inner.norm() / (na * nb)).min(1.0))
}

/// `NMSE = ‖I − I_R‖_F / ‖I_R‖_F`.
pub fn nmse(i: &IsarImage, reference: &IsarImage, mode: MetricMode) -> Result<f64> {
    same_shape(i, reference)?;
    let a = prepared(i, mode);
    let b = prepared(reference, mode);
    let nb = b.norm();
    if nb == 0.0 {
        return Err(Error::ZeroNorm("reference image"));
    }
    Ok((a - &b).norm() / nb)
}

/// The image-quality triple of one reconstruction against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub ic: f64,
    pub coh: f64,
    pub nmse: f64,
}

pub fn evaluate(i: &IsarImage, reference: &IsarImage, mode: MetricMode) -> Result<ImageMetrics> {
    Ok(ImageMetrics {
        ic: image_contrast(i)?,
        coh: coherence(i, reference, mode)?,
        nmse: nmse(i, reference, mode)?,
    })
}
