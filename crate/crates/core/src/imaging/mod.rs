//! Range-Doppler imaging and image-quality metrics.

mod heatmap;
mod image;
mod metrics;

pub use heatmap::{heatmap, write_heatmap, DEFAULT_FLOOR_DB};
pub(crate) use image::{data_from_unshifted, rd_unshifted};
pub use image::{rd_image, reconstruct_data, IsarImage};
pub use metrics::{coherence, evaluate, image_contrast, nmse, ImageMetrics, MetricMode};
