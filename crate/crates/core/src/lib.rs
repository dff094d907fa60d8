//! Exact histogram specification optimized for structural similarity.
//!
//! Exact histogram specification (EHS) gives an image a prescribed
//! histogram bin for bin. This crate provides the classic and the
//! strict-ordering variants, and an optimizer that starts from the EHS
//! result and climbs the SSIM gradient toward the original image, staying
//! on the set of images with the target histogram.
//!
//! ```
//! use ssimehs::image::{generate_target, histogram_of, TargetKind};
//! use ssimehs::optimizer::{ascend, AscentConfig};
//! use ssimehs::pattern::test_pattern;
//!
//! let img = test_pattern(48, 48, 256);
//! let flat = generate_target(TargetKind::Uniform, 256, img.len() as u64).unwrap();
//! let run = ascend(&img, &flat, &AscentConfig::new(67.0).iterations(10)).unwrap();
//! assert_eq!(histogram_of(&run.image), flat);
//! assert!(run.trace.best_ssim >= run.trace.records[0].ssim);
//! ```

pub mod cli;
pub mod ehs;
pub mod error;
pub mod image;
pub mod io;
pub mod optimizer;
pub mod pattern;
pub mod ssim;
pub mod watermark;

pub use ehs::{classic_ehs, strict_ordering_ehs, EhsReport, EhsVariant};
pub use error::{Error, Result};
pub use image::{GrayImage, Histogram, RealImage};
pub use optimizer::{ascend, AscentConfig, AscentTrace};
pub use ssim::{ssim_gradient, ssim_index, ssim_with_gradient, SsimEvaluator, SsimParams};
