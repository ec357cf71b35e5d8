//! Foveated vision primitives.
//!
//! This crate holds the allocation-only algorithmic core: a space-variant
//! [`retina`] that samples images into compact imagevectors, the complex-log
//! [`cortex`] mapping that renders them as cortical images, [`gaze`] fixation
//! processing (homographies, k-means, convex hulls, crop placement and
//! dataset splits) and a small convolutional classifier in [`dcnn`].
//!
//! Everything here is `no_std` + `alloc`. File formats, PNG IO and the
//! command line live in the `foveate-cli` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cortex;
pub mod dcnn;
pub mod error;
pub mod gaze;
pub mod image;
pub mod retina;
pub mod spatial;

pub use error::{Error, Result};
pub use image::Image;
