//! Training-set augmentation on raw skeleton sequences: random 3D rotation,
//! additive Gaussian noise, and temporal cropping, applied before encoding.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::rng;
use crate::skeleton::{Joint3D, SkeletonSequence};
use crate::synth::Split;

/// Hard limit on per-axis rotation angles, in degrees.
pub const ROTATION_LIMIT_DEG: f64 = 30.0;

/// Parameters for one expansion pass over a training split.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AugmentationSpec {
    /// Per-axis rotation range in degrees, within [-30, 30].
    pub rotation_range_deg: (f64, f64),
    pub noise_mean: f64,
    /// Noise standard deviation in raw coordinate units.
    pub noise_sigma: f64,
    /// Fraction of frames kept by the temporal crop, within (0, 1].
    pub crop_ratio_range: (f64, f64),
    /// Augmented copies emitted per input sequence.
    pub multiplicity: usize,
    pub seed: u64,
}

impl AugmentationSpec {
    /// Defaults matching the usual training recipe: rotations in [-30, 30]
    /// degrees, noise sigma 0.01, crops keeping 70-100% of frames, two
    /// copies per sequence.
    pub fn defaults(seed: u64) -> Self {
        AugmentationSpec {
            rotation_range_deg: (-ROTATION_LIMIT_DEG, ROTATION_LIMIT_DEG),
            noise_mean: 0.0,
            noise_sigma: 0.01,
            crop_ratio_range: (0.7, 1.0),
            multiplicity: 2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        let (rlo, rhi) = self.rotation_range_deg;
        if !(rlo <= rhi) || rlo < -ROTATION_LIMIT_DEG || rhi > ROTATION_LIMIT_DEG {
            return Err(AugmentError::BadRotationRange { lo: rlo, hi: rhi });
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(AugmentError::BadSigma(self.noise_sigma));
        }
        if !self.noise_mean.is_finite() {
            return Err(AugmentError::BadSigma(self.noise_mean));
        }
        let (clo, chi) = self.crop_ratio_range;
        if !(clo <= chi) || !(clo > 0.0) || chi > 1.0 {
            return Err(AugmentError::BadCropRange { lo: clo, hi: chi });
        }
        Ok(())
    }
}

type Mat3 = [[f64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn rotation_matrix(ax_deg: f64, ay_deg: f64, az_deg: f64) -> Mat3 {
    let rad = |d: f64| d * core::f64::consts::PI / 180.0;
    let (sx, cx) = (libm::sin(rad(ax_deg)), libm::cos(rad(ax_deg)));
    let (sy, cy) = (libm::sin(rad(ay_deg)), libm::cos(rad(ay_deg)));
    let (sz, cz) = (libm::sin(rad(az_deg)), libm::cos(rad(az_deg)));
    let rx: Mat3 = [[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]];
    let ry: Mat3 = [[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]];
    let rz: Mat3 = [[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]];
    mat_mul(&rz, &mat_mul(&ry, &rx))
}

/// Mean of all joint positions over all actors and frames.
pub fn centroid(seq: &SkeletonSequence) -> Joint3D {
    let mut sum = [0.0f64; 3];
    let mut count = 0usize;
    for joint in seq.iter_joints() {
        sum[0] += joint.x;
        sum[1] += joint.y;
        sum[2] += joint.z;
        count += 1;
    }
    let n = count as f64;
    Joint3D::new(sum[0] / n, sum[1] / n, sum[2] / n)
}

/// Rotate every joint about the sequence centroid.
///
/// The rotation is `Rz(az) * Ry(ay) * Rx(ax)` applied to column vectors in a
/// right-handed frame; each angle must lie in [-30, 30] degrees.
pub fn rotate(
    seq: &SkeletonSequence,
    angles_deg: (f64, f64, f64),
) -> Result<SkeletonSequence, AugmentError> {
    let (ax, ay, az) = angles_deg;
    for a in [ax, ay, az] {
        if !a.is_finite() || a.abs() > ROTATION_LIMIT_DEG {
            return Err(AugmentError::AngleOutOfRange(a));
        }
    }
    if ax == 0.0 && ay == 0.0 && az == 0.0 {
        return Ok(seq.clone());
    }
    let r = rotation_matrix(ax, ay, az);
    let c = centroid(seq);
    let rotated = seq.map_joints(|j| {
        let v = [j.x - c.x, j.y - c.y, j.z - c.z];
        Joint3D::new(
            r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2] + c.x,
            r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2] + c.y,
            r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2] + c.z,
        )
    });
    rotated.map_err(AugmentError::InvalidResult)
}

/// Add i.i.d. Gaussian noise to every coordinate, deterministically for a
/// fixed seed.
pub fn add_noise(
    seq: &SkeletonSequence,
    mean: f64,
    sigma: f64,
    seed: u64,
) -> Result<SkeletonSequence, AugmentError> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(AugmentError::BadSigma(sigma));
    }
    if sigma == 0.0 && mean == 0.0 {
        return Ok(seq.clone());
    }
    let mut rng = rng::stream(seed, &[]);
    let normal = Normal::new(mean, sigma).expect("validated sigma");
    let noisy = seq.map_joints(|j| {
        Joint3D::new(
            j.x + normal.sample(&mut rng),
            j.y + normal.sample(&mut rng),
            j.z + normal.sample(&mut rng),
        )
    });
    noisy.map_err(AugmentError::InvalidResult)
}

/// Keep a contiguous frame window of `max(1, round(ratio * N))` frames
/// starting at `floor(start_frac * (N - window))`.
pub fn temporal_crop(seq: &SkeletonSequence, ratio: f64, start_frac: f64) -> SkeletonSequence {
    let n = seq.frame_count();
    let ratio = if ratio.is_finite() { ratio.clamp(0.0, 1.0) } else { 1.0 };
    let start_frac = if start_frac.is_finite() {
        start_frac.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let window = (libm::round(ratio * n as f64) as usize).clamp(1, n);
    let start = libm::floor(start_frac * (n - window) as f64) as usize;
    let start = start.min(n - window);
    seq.slice_frames(start, window)
        .expect("window is nonempty and in range")
}

/// Emit the original and `multiplicity` augmented copies of every sequence.
///
/// Each copy applies rotation, noise, and crop with parameters drawn from a
/// stream derived from (seed, sequence index, copy index), so expansion is
/// deterministic and order-independent. Only training data may be expanded.
pub fn expand(
    sequences: &[SkeletonSequence],
    split: Split,
    spec: &AugmentationSpec,
) -> Result<Vec<SkeletonSequence>, AugmentError> {
    if split != Split::Train {
        return Err(AugmentError::TestSplitRefused);
    }
    spec.validate()?;
    let mut out = Vec::with_capacity(sequences.len() * (1 + spec.multiplicity));
    for (i, seq) in sequences.iter().enumerate() {
        out.push(seq.clone());
        for copy in 0..spec.multiplicity {
            let mut rng = rng::stream(spec.seed, &[i as u64, copy as u64]);
            let (rlo, rhi) = spec.rotation_range_deg;
            let angle = |rng: &mut rand_chacha::ChaCha8Rng| {
                if rlo == rhi {
                    rlo
                } else {
                    rng.gen_range(rlo..=rhi)
                }
            };
            let angles = (angle(&mut rng), angle(&mut rng), angle(&mut rng));
            let noise_seed = rng.gen::<u64>();
            let (clo, chi) = spec.crop_ratio_range;
            let ratio = if clo == chi { clo } else { rng.gen_range(clo..=chi) };
            let start_frac: f64 = rng.gen_range(0.0..=1.0);

            let aug = rotate(seq, angles)?;
            let aug = add_noise(&aug, spec.noise_mean, spec.noise_sigma, noise_seed)?;
            let aug = temporal_crop(&aug, ratio, start_frac);
            out.push(aug.with_source_id(format!("{}#aug{}", seq.source_id(), copy)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum AugmentError {
    AngleOutOfRange(f64),
    BadRotationRange { lo: f64, hi: f64 },
    BadSigma(f64),
    BadCropRange { lo: f64, hi: f64 },
    TestSplitRefused,
    /// An augmentation produced an invalid sequence (non-finite values).
    InvalidResult(crate::skeleton::SkeletonError),
}

impl fmt::Display for AugmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AugmentError::AngleOutOfRange(a) => write!(
                f,
                "rotation angle {a} deg outside [-{ROTATION_LIMIT_DEG}, {ROTATION_LIMIT_DEG}]"
            ),
            AugmentError::BadRotationRange { lo, hi } => write!(
                f,
                "rotation range [{lo}, {hi}] invalid or outside +/-{ROTATION_LIMIT_DEG} deg"
            ),
            AugmentError::BadSigma(s) => write!(f, "noise parameter {s} must be finite and >= 0"),
            AugmentError::BadCropRange { lo, hi } => {
                write!(f, "crop ratio range [{lo}, {hi}] must lie in (0, 1]")
            }
            AugmentError::TestSplitRefused => {
                write!(f, "refusing to augment a test split")
            }
            AugmentError::InvalidResult(e) => write!(f, "augmentation produced invalid data: {e}"),
        }
    }
}

impl core::error::Error for AugmentError {}
