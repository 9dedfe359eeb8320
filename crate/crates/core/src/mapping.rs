//! Encoding skeleton sequences as color action images.
//!
//! Row `i`, column `n` of an action image holds the quantized coordinates of
//! joint `i` at frame `n`, with channels (R, G, B) taken from (x, y, z). Two
//! quantizations are provided:
//!
//! * the per-sequence mapping, which subtracts each channel's own minimum and
//!   divides all three channels by the single largest per-channel range, so
//!   the image is unchanged by global translation and (up to quantization)
//!   uniform scaling of the input;
//! * the dataset baseline, which normalizes every sequence by one global
//!   min/max pair computed over a training set and is therefore sensitive to
//!   translation and scale.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::skeleton::SkeletonSequence;

/// Ranges narrower than this count as motionless; such sequences encode as
/// an all-zero image flagged degenerate rather than dividing by ~0.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// Quantized H x W x 3 action image, 8 bits per channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionImage {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
    degenerate: bool,
}

impl ActionImage {
    /// Wrap raw interleaved RGB rows; `pixels.len()` must be `3 * h * w`.
    pub fn from_raw(height: usize, width: usize, pixels: Vec<u8>, degenerate: bool) -> Self {
        assert_eq!(pixels.len(), 3 * height * width, "pixel buffer size");
        ActionImage {
            height,
            width,
            pixels,
            degenerate,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Interleaved RGB bytes, row-major.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// True when the source sequence had no usable dynamic range.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        let base = 3 * (row * self.width + col);
        [self.pixels[base], self.pixels[base + 1], self.pixels[base + 2]]
    }

    /// Count of pixel positions whose RGB triple differs between two images
    /// of identical dimensions.
    pub fn count_differing_pixels(&self, other: &ActionImage) -> usize {
        assert_eq!(self.height, other.height);
        assert_eq!(self.width, other.width);
        self.pixels
            .chunks_exact(3)
            .zip(other.pixels.chunks_exact(3))
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Largest per-channel absolute difference between two images.
    pub fn max_channel_difference(&self, other: &ActionImage) -> u8 {
        self.pixels
            .iter()
            .zip(other.pixels.iter())
            .map(|(&a, &b)| a.abs_diff(b))
            .max()
            .unwrap_or(0)
    }

    /// Convert to a real-valued image in [0, 1].
    pub fn to_float<T: Float>(&self) -> FloatImage<T> {
        let scale = T::from(255.0).unwrap();
        FloatImage {
            height: self.height,
            width: self.width,
            data: self
                .pixels
                .iter()
                .map(|&p| T::from(p).unwrap() / scale)
                .collect(),
        }
    }
}

/// Dataset-wide coordinate extremes, computed over a training split.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GlobalStats {
    pub c_min: f64,
    pub c_max: f64,
}

/// Which quantization to apply when encoding.
#[derive(Clone, Debug, PartialEq)]
pub enum MappingMode {
    /// Per-sequence translation-scale invariant mapping.
    Proposed,
    /// Global min/max baseline; requires training-set stats.
    Baseline(GlobalStats),
}

/// Encode with the mode's quantization.
pub fn encode(seq: &SkeletonSequence, mode: &MappingMode) -> Result<ActionImage, MappingError> {
    match mode {
        MappingMode::Proposed => encode_proposed(seq),
        MappingMode::Baseline(stats) => encode_baseline(seq, *stats),
    }
}

fn require_merged(seq: &SkeletonSequence) -> Result<(), MappingError> {
    if seq.actor_count() != 1 {
        return Err(MappingError::UnmergedActors {
            actor_count: seq.actor_count(),
        });
    }
    Ok(())
}

/// Per-channel minima and the shared denominator for one sequence.
fn sequence_extent(seq: &SkeletonSequence) -> ([f64; 3], f64) {
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for joint in seq.iter_joints() {
        for (k, c) in joint.coords().into_iter().enumerate() {
            if c < min[k] {
                min[k] = c;
            }
            if c > max[k] {
                max[k] = c;
            }
        }
    }
    let d = (0..3).map(|k| max[k] - min[k]).fold(f64::NEG_INFINITY, f64::max);
    (min, d)
}

/// Quantize a normalized coordinate to a pixel level.
///
/// The ratio is formed before multiplying by 255 so that a coordinate
/// attaining the extent maps to floor(255 * 1.0) = 255 exactly; the product
/// order would double-round at the boundary.
fn quantize(numerator: f64, denominator: f64) -> u8 {
    libm::floor(255.0 * (numerator / denominator)).clamp(0.0, 255.0) as u8
}

/// Translation-scale invariant encoding.
///
/// Each channel subtracts its own per-sequence minimum; all three channels
/// share the largest per-channel range as denominator, so relative scale
/// between axes is preserved. The sequence must already be merged to a
/// single actor stream and reordered into layout order.
pub fn encode_proposed(seq: &SkeletonSequence) -> Result<ActionImage, MappingError> {
    require_merged(seq)?;
    let height = seq.joint_count();
    let width = seq.frame_count();
    let (min, d) = sequence_extent(seq);

    if d < DEGENERACY_THRESHOLD {
        return Ok(ActionImage {
            height,
            width,
            pixels: vec![0; 3 * height * width],
            degenerate: true,
        });
    }

    let mut pixels = vec![0u8; 3 * height * width];
    for (n, frame) in seq.frames().iter().enumerate() {
        for (i, joint) in frame.actors[0].joints.iter().enumerate() {
            let base = 3 * (i * width + n);
            for (k, c) in joint.coords().into_iter().enumerate() {
                pixels[base + k] = quantize(c - min[k], d);
            }
        }
    }
    Ok(ActionImage {
        height,
        width,
        pixels,
        degenerate: false,
    })
}

/// Dataset-dependent baseline encoding.
///
/// Quantizes with the single global (min, max) pair for all channels and all
/// sequences; coordinates outside the training range are clamped first.
pub fn encode_baseline(
    seq: &SkeletonSequence,
    stats: GlobalStats,
) -> Result<ActionImage, MappingError> {
    require_merged(seq)?;
    let range = stats.c_max - stats.c_min;
    if !(range > 0.0) || !range.is_finite() {
        return Err(MappingError::DegenerateStats {
            c_min: stats.c_min,
            c_max: stats.c_max,
        });
    }
    let height = seq.joint_count();
    let width = seq.frame_count();
    let mut pixels = vec![0u8; 3 * height * width];
    for (n, frame) in seq.frames().iter().enumerate() {
        for (i, joint) in frame.actors[0].joints.iter().enumerate() {
            let base = 3 * (i * width + n);
            for (k, c) in joint.coords().into_iter().enumerate() {
                let c = c.clamp(stats.c_min, stats.c_max);
                pixels[base + k] = quantize(c - stats.c_min, range);
            }
        }
    }
    Ok(ActionImage {
        height,
        width,
        pixels,
        degenerate: false,
    })
}

/// Exact min/max over every coordinate of every training sequence.
pub fn compute_global_stats(
    training: &[SkeletonSequence],
) -> Result<GlobalStats, MappingError> {
    if training.is_empty() {
        return Err(MappingError::EmptyTrainingSet);
    }
    let mut c_min = f64::INFINITY;
    let mut c_max = f64::NEG_INFINITY;
    for seq in training {
        for joint in seq.iter_joints() {
            for c in joint.coords() {
                if c < c_min {
                    c_min = c;
                }
                if c > c_max {
                    c_max = c;
                }
            }
        }
    }
    Ok(GlobalStats { c_min, c_max })
}

/// Real-valued H x W x 3 image with values in [0, 1], row-major HWC.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatImage<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Float> FloatImage<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), 3 * height * width, "float image buffer size");
        FloatImage {
            height,
            width,
            data,
        }
    }

    pub fn constant(height: usize, width: usize, value: T) -> Self {
        FloatImage {
            height,
            width,
            data: vec![value; 3 * height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> T {
        self.data[3 * (row * self.width + col) + channel]
    }

    /// Bilinear resample with corner-aligned sampling.
    ///
    /// Output pixel (i, j) reads source position
    /// `(i * (H-1) / (H'-1), j * (W-1) / (W'-1))`; a single output row or
    /// column reads source position 0.
    pub fn resize(&self, height: usize, width: usize) -> FloatImage<T> {
        assert!(height >= 1 && width >= 1, "resize target must be nonempty");
        if height == self.height && width == self.width {
            return self.clone();
        }
        let src_pos = |i: usize, out_len: usize, in_len: usize| -> (usize, usize, f64) {
            if out_len <= 1 || in_len <= 1 {
                return (0, 0, 0.0);
            }
            let s = i as f64 * (in_len - 1) as f64 / (out_len - 1) as f64;
            let lo = libm::floor(s) as usize;
            let lo = lo.min(in_len - 1);
            let hi = (lo + 1).min(in_len - 1);
            (lo, hi, s - lo as f64)
        };

        let mut data = Vec::with_capacity(3 * height * width);
        for oy in 0..height {
            let (y0, y1, fy) = src_pos(oy, height, self.height);
            let fy = T::from(fy).unwrap();
            for ox in 0..width {
                let (x0, x1, fx) = src_pos(ox, width, self.width);
                let fx = T::from(fx).unwrap();
                for c in 0..3 {
                    let p00 = self.get(y0, x0, c);
                    let p01 = self.get(y0, x1, c);
                    let p10 = self.get(y1, x0, c);
                    let p11 = self.get(y1, x1, c);
                    let top = p00 + (p01 - p00) * fx;
                    let bottom = p10 + (p11 - p10) * fx;
                    data.push(top + (bottom - top) * fy);
                }
            }
        }
        FloatImage {
            height,
            width,
            data,
        }
    }
}

/// Resize a quantized action image to a real-valued image in [0, 1].
pub fn resize<T: Float>(img: &ActionImage, height: usize, width: usize) -> FloatImage<T> {
    img.to_float::<T>().resize(height, width)
}

#[derive(Clone, Debug, PartialEq)]
pub enum MappingError {
    /// Encoding expects a single merged actor stream.
    UnmergedActors { actor_count: usize },
    /// Baseline stats span no range.
    DegenerateStats { c_min: f64, c_max: f64 },
    EmptyTrainingSet,
}

impl fmt::Display for MappingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingError::UnmergedActors { actor_count } => write!(
                f,
                "encoding expects a single actor stream, got {actor_count} actors; run merge first"
            ),
            MappingError::DegenerateStats { c_min, c_max } => write!(
                f,
                "global stats have no range (min {c_min}, max {c_max})"
            ),
            MappingError::EmptyTrainingSet => {
                write!(f, "global stats need at least one training sequence")
            }
        }
    }
}

impl core::error::Error for MappingError {}
