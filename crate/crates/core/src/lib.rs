//! Core algorithms for skeleton-based action recognition via action images.
//!
//! A skeleton video is reordered into five body-part chains, merged across
//! actors, and encoded as an RGB image whose rows are joints, columns are
//! frames, and channels are the quantized (x, y, z) coordinates. The
//! per-sequence normalization makes the encoding invariant to global
//! translation and (up to quantization) to uniform scale. A small multi-scale
//! convolutional network with shared weights classifies the encoded images.
//!
//! The crate is `no_std` (with `alloc`); file formats, PNG export, and the
//! command-line front end live in the companion `skelimg` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod augment;
pub mod mapping;
pub mod net;
pub mod rng;
pub mod skeleton;
pub mod synth;

pub use mapping::{ActionImage, FloatImage, GlobalStats, MappingMode};
pub use skeleton::{
    Actor, BodyPartLayout, ChannelMask, Joint3D, SkeletonFrame, SkeletonSequence,
};
