use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("histogram sums to {histogram} but the image has {pixels} pixels")]
    HistogramMismatch { histogram: u64, pixels: u64 },

    #[error("histogram has {histogram} levels but the image uses {image}")]
    LevelMismatch { histogram: usize, image: usize },

    #[error("cannot rescale an all-zero histogram")]
    EmptyHistogram,

    #[error("images differ in size: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    ImageTooSmall { width: usize, height: usize, window: usize },

    #[error("invalid window: size {size}, sigma {sigma}")]
    InvalidWindow { size: usize, sigma: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite SSIM gradient at iteration {0}")]
    NonFiniteGradient(usize),

    #[error("step-size model invalid: {0}")]
    StepModel(String),

    #[error("watermark: {0}")]
    Watermark(String),

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
