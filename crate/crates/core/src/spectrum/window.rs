use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Tapers available to the PSD estimator. All use the periodic convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    /// 4-term minimum-sidelobe Blackman-Harris: 0.35875, 0.48829, 0.14128, 0.01168.
    #[default]
    BlackmanHarris,
    Hamming,
    Rectangular,
}

const BH4: [f64; 4] = [0.35875, 0.48829, 0.14128, 0.01168];

impl Window {
    pub fn id(&self) -> &'static str {
        match self {
            Window::BlackmanHarris => "blackman-harris",
            Window::Hamming => "hamming",
            Window::Rectangular => "rectangular",
        }
    }

    pub fn coefficients(&self, len: usize) -> Vec<f64> {
        let step = 2.0 * PI / len as f64;
        (0..len)
            .map(|n| {
                let x = step * n as f64;
                match self {
                    Window::BlackmanHarris => {
                        BH4[0] - BH4[1] * x.cos() + BH4[2] * (2.0 * x).cos() - BH4[3] * (3.0 * x).cos()
                    }
                    Window::Hamming => 0.54 - 0.46 * x.cos(),
                    Window::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Window {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "blackman-harris" | "blackmanharris" => Ok(Window::BlackmanHarris),
            "hamming" => Ok(Window::Hamming),
            "rectangular" | "boxcar" => Ok(Window::Rectangular),
            other => Err(crate::Error::invalid(format!("unknown window `{other}`"))),
        }
    }
}
