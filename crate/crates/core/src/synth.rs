//! Labeled synthetic skeleton datasets for desk-scale experiments.
//!
//! Each class is a family of sinusoidal joint trajectories with a
//! class-specific base frequency, per-part harmonic multipliers, and phase
//! patterns; amplitude decays with joint depth along each chain so nearby
//! rows move coherently. Every emitted sequence additionally carries a random
//! global translation and a random global scale in [0.5, 2.0], which the
//! per-sequence image mapping is expected to cancel.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::rng;
use crate::skeleton::{Actor, Joint3D, SkeletonFrame, SkeletonSequence};

/// Dataset split membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Train => f.write_str("train"),
            Split::Test => f.write_str("test"),
        }
    }
}

/// Parameters of a synthetic dataset; generation is a pure function of this
/// value.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthSpec {
    pub class_count: usize,
    pub sequences_per_class: usize,
    pub joint_count: usize,
    /// Inclusive frame-count range [N_min, N_max]; N_min must be >= 8.
    pub frame_range: (usize, usize),
    /// Sigma of the observation noise added to clean trajectories.
    pub base_noise: f64,
    /// Fraction of each class assigned to the test split.
    pub test_fraction: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Desk-scale defaults: 5 classes, 90 sequences each (60 train + 30
    /// test), 25 joints, 40-80 frames.
    pub fn desk_default(seed: u64) -> Self {
        SynthSpec {
            class_count: 5,
            sequences_per_class: 90,
            joint_count: 25,
            frame_range: (40, 80),
            base_noise: 0.01,
            test_fraction: 1.0 / 3.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.class_count < 2 {
            return Err(SynthError::TooFewClasses(self.class_count));
        }
        if self.sequences_per_class == 0 {
            return Err(SynthError::NoSequences);
        }
        if self.joint_count == 0 {
            return Err(SynthError::NoJoints);
        }
        let (lo, hi) = self.frame_range;
        if lo < 8 || lo > hi {
            return Err(SynthError::BadFrameRange { lo, hi });
        }
        if !(self.base_noise >= 0.0) || !self.base_noise.is_finite() {
            return Err(SynthError::BadNoise(self.base_noise));
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(SynthError::BadTestFraction(self.test_fraction));
        }
        Ok(())
    }
}

/// One generated sequence with its split assignment; the label and source id
/// live on the sequence itself.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthItem {
    pub sequence: SkeletonSequence,
    pub split: Split,
}

const TAG_POSE: u64 = 0;
const TAG_CLASS: u64 = 1;
const TAG_MOTION: u64 = 2;
const TAG_NOISE: u64 = 3;
const TAG_NUISANCE: u64 = 4;
const TAG_SPLIT: u64 = 5;

/// Harmonic structure shared by all joints: fundamental plus two overtones.
const HARMONICS: [(f64, f64); 3] = [(1.0, 1.0), (0.35, 2.0), (0.15, 3.0)];
const AMPLITUDE: f64 = 0.5;
const DEPTH_DECAY: f64 = 0.85;
const PSEUDO_PARTS: usize = 5;

struct ClassMotion {
    base_freq: f64,
    part_mult: Vec<f64>,
    /// Per (joint, channel): amplitude and per-harmonic phases.
    joint_amp: Vec<[f64; 3]>,
    joint_phase: Vec<[[f64; 3]; 3]>,
}

fn part_of(joint: usize, joint_count: usize) -> (usize, usize) {
    let size = joint_count.div_ceil(PSEUDO_PARTS);
    let part = (joint / size).min(PSEUDO_PARTS - 1);
    (part, joint - part * size)
}

fn class_motion(spec: &SynthSpec, class: usize) -> ClassMotion {
    let mut rng = rng::stream(spec.seed, &[TAG_CLASS, class as u64]);
    let tau = 2.0 * core::f64::consts::PI;
    // Distinct stripe frequencies per class are the primary class signal.
    let base_freq = 1.0 + 1.5 * class as f64;
    let part_mult: Vec<f64> = (0..PSEUDO_PARTS)
        .map(|_| *[1.0, 2.0, 3.0].choose(&mut rng).unwrap())
        .collect();
    let part_phase: Vec<f64> = (0..PSEUDO_PARTS).map(|_| rng.gen_range(0.0..tau)).collect();
    let mut joint_amp = Vec::with_capacity(spec.joint_count);
    let mut joint_phase = Vec::with_capacity(spec.joint_count);
    for j in 0..spec.joint_count {
        let (part, depth) = part_of(j, spec.joint_count);
        let mut amps = [0.0; 3];
        let mut phases = [[0.0; 3]; 3];
        for k in 0..3 {
            let scale = AMPLITUDE * libm::pow(DEPTH_DECAY, depth as f64);
            amps[k] = scale * rng.gen_range(0.6..1.0);
            for h in 0..HARMONICS.len() {
                phases[k][h] = part_phase[part] + rng.gen_range(0.0..0.6 * tau);
            }
        }
        joint_amp.push(amps);
        joint_phase.push(phases);
    }
    ClassMotion {
        base_freq,
        part_mult,
        joint_amp,
        joint_phase,
    }
}

/// Rest pose shared by every class, so classes differ only in motion.
fn rest_pose(spec: &SynthSpec) -> Vec<[f64; 3]> {
    let mut rng = rng::stream(spec.seed, &[TAG_POSE]);
    (0..spec.joint_count)
        .map(|_| {
            [
                rng.gen_range(-0.6..0.6),
                rng.gen_range(-0.6..0.6),
                rng.gen_range(-0.6..0.6),
            ]
        })
        .collect()
}

/// The clean motion of sequence `index` of `class`, including observation
/// noise but before the global translation/scale nuisance is injected.
pub fn motion_sequence(
    spec: &SynthSpec,
    class: usize,
    index: usize,
) -> Result<SkeletonSequence, SynthError> {
    spec.validate()?;
    if class >= spec.class_count {
        return Err(SynthError::ClassOutOfRange {
            class,
            class_count: spec.class_count,
        });
    }
    let motion = class_motion(spec, class);
    let rest = rest_pose(spec);
    let tau = 2.0 * core::f64::consts::PI;

    let mut motion_rng = rng::stream(spec.seed, &[TAG_MOTION, class as u64, index as u64]);
    let (n_min, n_max) = spec.frame_range;
    let frames_n = motion_rng.gen_range(n_min..=n_max);
    let t0: f64 = motion_rng.gen_range(0.0..1.0);
    let amp_jitter: f64 = motion_rng.gen_range(0.85..1.15);

    let mut noise_rng = rng::stream(spec.seed, &[TAG_NOISE, class as u64, index as u64]);
    let noise = Normal::new(0.0, spec.base_noise).expect("validated noise sigma");
    let sample_noise = |rng: &mut ChaCha8Rng| -> f64 {
        if spec.base_noise == 0.0 {
            0.0
        } else {
            noise.sample(rng)
        }
    };

    let mut frames = Vec::with_capacity(frames_n);
    for n in 0..frames_n {
        let t = n as f64 / (frames_n - 1) as f64;
        let mut joints = Vec::with_capacity(spec.joint_count);
        for j in 0..spec.joint_count {
            let (part, _) = part_of(j, spec.joint_count);
            let freq = motion.base_freq * motion.part_mult[part];
            let mut coords = [0.0f64; 3];
            for (k, coord) in coords.iter_mut().enumerate() {
                let mut v = rest[j][k];
                for (h, &(h_amp, h_mult)) in HARMONICS.iter().enumerate() {
                    v += amp_jitter
                        * motion.joint_amp[j][k]
                        * h_amp
                        * libm::sin(tau * freq * h_mult * (t + t0) + motion.joint_phase[j][k][h]);
                }
                *coord = v + sample_noise(&mut noise_rng);
            }
            joints.push(Joint3D::new(coords[0], coords[1], coords[2]));
        }
        frames.push(SkeletonFrame {
            actors: alloc::vec![Actor {
                actor_id: 0,
                joints,
            }],
        });
    }
    SkeletonSequence::new(
        frames,
        Some(class),
        format!("synth_c{class}_s{index:03}"),
    )
    .map_err(SynthError::InvalidSequence)
}

/// Generate the full labeled dataset with stratified train/test assignment.
pub fn generate(spec: &SynthSpec) -> Result<Vec<SynthItem>, SynthError> {
    spec.validate()?;
    let per_class = spec.sequences_per_class;
    let test_count = libm::round(spec.test_fraction * per_class as f64) as usize;
    let mut items = Vec::with_capacity(spec.class_count * per_class);
    for class in 0..spec.class_count {
        let mut order: Vec<usize> = (0..per_class).collect();
        order.shuffle(&mut rng::stream(spec.seed, &[TAG_SPLIT, class as u64]));
        let mut split_of = alloc::vec![Split::Train; per_class];
        for &i in order.iter().take(test_count) {
            split_of[i] = Split::Test;
        }
        for index in 0..per_class {
            let clean = motion_sequence(spec, class, index)?;
            let mut nuisance =
                rng::stream(spec.seed, &[TAG_NUISANCE, class as u64, index as u64]);
            let scale: f64 = nuisance.gen_range(0.5..2.0);
            let t = [
                nuisance.gen_range(-10.0..10.0),
                nuisance.gen_range(-10.0..10.0),
                nuisance.gen_range(-10.0..10.0),
            ];
            let sequence = clean
                .map_joints(|j| {
                    Joint3D::new(
                        scale * j.x + t[0],
                        scale * j.y + t[1],
                        scale * j.z + t[2],
                    )
                })
                .map_err(SynthError::InvalidSequence)?;
            items.push(SynthItem {
                sequence,
                split: split_of[index],
            });
        }
    }
    Ok(items)
}

/// Default class names ("class0", "class1", ...) for manifests and reports.
pub fn class_names(class_count: usize) -> Vec<String> {
    (0..class_count).map(|c| format!("class{c}")).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum SynthError {
    TooFewClasses(usize),
    NoSequences,
    NoJoints,
    BadFrameRange { lo: usize, hi: usize },
    BadNoise(f64),
    BadTestFraction(f64),
    ClassOutOfRange { class: usize, class_count: usize },
    InvalidSequence(crate::skeleton::SkeletonError),
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::TooFewClasses(m) => write!(f, "need at least 2 classes, got {m}"),
            SynthError::NoSequences => write!(f, "sequences_per_class must be positive"),
            SynthError::NoJoints => write!(f, "joint_count must be positive"),
            SynthError::BadFrameRange { lo, hi } => {
                write!(f, "frame range [{lo}, {hi}] needs 8 <= lo <= hi")
            }
            SynthError::BadNoise(s) => write!(f, "base noise {s} must be finite and >= 0"),
            SynthError::BadTestFraction(t) => {
                write!(f, "test fraction {t} must lie in [0, 1)")
            }
            SynthError::ClassOutOfRange { class, class_count } => {
                write!(f, "class {class} out of range for {class_count} classes")
            }
            SynthError::InvalidSequence(e) => write!(f, "generated sequence invalid: {e}"),
        }
    }
}

impl core::error::Error for SynthError {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::encode_proposed;

    fn small_spec(seed: u64) -> SynthSpec {
        SynthSpec {
            class_count: 3,
            sequences_per_class: 8,
            joint_count: 10,
            frame_range: (10, 14),
            base_noise: 0.01,
            test_fraction: 0.25,
            seed,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = small_spec(42);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_ne!(
            generate(&spec).unwrap(),
            generate(&small_spec(43)).unwrap()
        );
    }

    #[test]
    fn counts_and_labels_are_balanced() {
        let spec = SynthSpec {
            class_count: 5,
            sequences_per_class: 60,
            ..small_spec(7)
        };
        let items = generate(&spec).unwrap();
        assert_eq!(items.len(), 300);
        for class in 0..5 {
            let total = items
                .iter()
                .filter(|i| i.sequence.label() == Some(class))
                .count();
            assert_eq!(total, 60);
            let test = items
                .iter()
                .filter(|i| i.sequence.label() == Some(class) && i.split == Split::Test)
                .count();
            assert_eq!(test, 15); // round(0.25 * 60)
        }
    }

    #[test]
    fn source_ids_are_unique() {
        let items = generate(&small_spec(11)).unwrap();
        let mut ids: Vec<&str> = items.iter().map(|i| i.sequence.source_id()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), items.len());
    }

    #[test]
    fn scale_injection_leaves_encoding_nearly_identical() {
        // Same motion instance under two different global scales encodes to
        // the same image up to one quantization level.
        let spec = SynthSpec {
            base_noise: 0.0,
            ..small_spec(13)
        };
        let clean = motion_sequence(&spec, 1, 4).unwrap();
        let a = clean
            .map_joints(|j| Joint3D::new(0.6 * j.x, 0.6 * j.y, 0.6 * j.z))
            .unwrap();
        let b = clean
            .map_joints(|j| Joint3D::new(1.8 * j.x + 3.0, 1.8 * j.y - 2.0, 1.8 * j.z + 0.5))
            .unwrap();
        let img_a = encode_proposed(&a).unwrap();
        let img_b = encode_proposed(&b).unwrap();
        assert!(img_a.max_channel_difference(&img_b) <= 1);
        let total = img_a.pixels().len() / 3;
        let exact = total - img_a.count_differing_pixels(&img_b);
        assert!(exact as f64 >= 0.99 * total as f64);
    }

    #[test]
    fn frame_counts_stay_in_range() {
        let items = generate(&small_spec(17)).unwrap();
        for item in &items {
            let n = item.sequence.frame_count();
            assert!((10..=14).contains(&n));
            assert_eq!(item.sequence.joint_count(), 10);
            assert_eq!(item.sequence.actor_count(), 1);
        }
    }

    #[test]
    fn spec_validation_rejects_bad_fields() {
        let mut spec = small_spec(0);
        spec.class_count = 1;
        assert!(matches!(generate(&spec), Err(SynthError::TooFewClasses(1))));
        let mut spec = small_spec(0);
        spec.frame_range = (4, 10);
        assert!(matches!(
            generate(&spec),
            Err(SynthError::BadFrameRange { lo: 4, hi: 10 })
        ));
        let mut spec = small_spec(0);
        spec.test_fraction = 1.0;
        assert!(generate(&spec).is_err());
    }
}
