use crate::fft::{fftshift2, ifftshift2, transform_columns, transform_rows, Direction};
use crate::scene::DataMatrix;
use crate::CMatrix;

/// Range-Doppler image: rows are cross-range (Doppler) bins, columns are
/// range bins, with the zero bins shifted to the centre.
#[derive(Debug, Clone, PartialEq)]
pub struct IsarImage {
    values: CMatrix,
    /// Metres per range bin, when known.
    pub range_bin_m: Option<f64>,
}

impl IsarImage {
    pub fn new(values: CMatrix) -> Self {
        Self {
            values,
            range_bin_m: None,
        }
    }

    /// Wraps an image in the unshifted `S = F_M I F_N†` coordinates.
    pub fn from_unshifted(values: &CMatrix) -> Self {
        Self::new(fftshift2(values))
    }

    /// The image in the coordinates used by the recovery operators.
    pub fn unshifted(&self) -> CMatrix {
        ifftshift2(&self.values)
    }

    pub fn with_range_bin(mut self, metres: f64) -> Self {
        self.range_bin_m = Some(metres);
        self
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    pub fn into_values(self) -> CMatrix {
        self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// `I = F_M† S F_N`, centred. Slow-time is inverse transformed down each
/// column and frequency forward transformed along each row; both unitary.
pub fn rd_image(s: &DataMatrix) -> IsarImage {
    IsarImage::from_unshifted(&rd_unshifted(s.values()))
}

pub(crate) fn rd_unshifted(s: &CMatrix) -> CMatrix {
    let mut m = s.clone();
    transform_columns(&mut m, Direction::Inverse);
    transform_rows(&mut m, Direction::Forward);
    m
}

pub(crate) fn data_from_unshifted(i: &CMatrix) -> CMatrix {
    let mut m = i.clone();
    transform_columns(&mut m, Direction::Forward);
    transform_rows(&mut m, Direction::Inverse);
    m
}

/// `Ŝ = F_M I F_N†` with complete dictionaries; inverse of [`rd_image`].
pub fn reconstruct_data(image: &IsarImage) -> DataMatrix {
    DataMatrix::new(data_from_unshifted(&image.unshifted()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::FourierMatrix;
    use crate::C64;

    fn random(r: usize, c: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(r, c, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn matches_dense_dictionaries() {
        let s = random(6, 5, 1);
        let fx = FourierMatrix::new(6).unwrap().into_entries();
        let fy = FourierMatrix::new(5).unwrap().into_entries();
        let want = fx.adjoint() * &s * &fy;
        let got = rd_unshifted(&s);
        assert!((got - want).camax() < 1e-12);
    }

    #[test]
    fn round_trip_and_parseval() {
        for (r, c) in [(1, 1), (4, 7), (32, 17)] {
            let s = random(r, c, r as u64 + c as u64);
            let img = rd_image(&DataMatrix::new(s.clone()));
            assert!((img.values().norm() - s.norm()).abs() < 1e-10);
            let back = reconstruct_data(&img);
            assert!((back.values() - &s).camax() < 1e-10);
            let again = rd_image(&back);
            assert!((again.values() - img.values()).camax() < 1e-10);
        }
    }

    #[test]
    fn constant_data_focuses_at_centre() {
        let s = CMatrix::from_element(8, 6, C64::new(1.0, 0.0));
        let img = rd_image(&DataMatrix::new(s));
        let (i, j) = img.values().icamax_full();
        assert_eq!((i, j), (4, 3));
        assert!((img.values()[(4, 3)].norm() - 48f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_in_zero_out() {
        let img = rd_image(&DataMatrix::new(CMatrix::zeros(3, 4)));
        assert_eq!(img.values().camax(), 0.0);
    }
}
