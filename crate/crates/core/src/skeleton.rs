//! Skeleton sequence types, body-part reordering, actor merging, and
//! coordinate-channel masking.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

/// A single 3D joint position in sensor units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Joint3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Joint3D {
    pub const ZERO: Joint3D = Joint3D {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Joint3D { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Coordinates in channel order (x, y, z).
    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// One tracked person in a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Actor {
    pub actor_id: u64,
    pub joints: Vec<Joint3D>,
}

/// All actors observed at one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonFrame {
    pub actors: Vec<Actor>,
}

/// An ordered skeleton video with uniform actor and joint counts.
///
/// Construction validates the invariants (at least one frame, identical
/// actor/joint structure in every frame, stable actor ids, finite
/// coordinates); all operations on sequences are pure and return new values.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonSequence {
    frames: Vec<SkeletonFrame>,
    label: Option<usize>,
    source_id: String,
    joint_count: usize,
    actor_count: usize,
}

impl SkeletonSequence {
    pub fn new(
        frames: Vec<SkeletonFrame>,
        label: Option<usize>,
        source_id: impl Into<String>,
    ) -> Result<Self, SkeletonError> {
        let source_id = source_id.into();
        let first = frames.first().ok_or(SkeletonError::EmptySequence)?;
        let actor_count = first.actors.len();
        if actor_count == 0 {
            return Err(SkeletonError::NoActors);
        }
        let joint_count = first.actors[0].joints.len();
        if joint_count == 0 {
            return Err(SkeletonError::NoJoints);
        }
        let ids: Vec<u64> = first.actors.iter().map(|a| a.actor_id).collect();
        for (f, frame) in frames.iter().enumerate() {
            if frame.actors.len() != actor_count {
                return Err(SkeletonError::ActorCountMismatch {
                    frame: f,
                    expected: actor_count,
                    actual: frame.actors.len(),
                });
            }
            for (a, actor) in frame.actors.iter().enumerate() {
                if actor.actor_id != ids[a] {
                    return Err(SkeletonError::UnstableActorOrder { frame: f, slot: a });
                }
                if actor.joints.len() != joint_count {
                    return Err(SkeletonError::JointCountMismatch {
                        frame: f,
                        expected: joint_count,
                        actual: actor.joints.len(),
                    });
                }
                for (j, joint) in actor.joints.iter().enumerate() {
                    if !joint.is_finite() {
                        return Err(SkeletonError::NonFiniteCoordinate {
                            frame: f,
                            actor: a,
                            joint: j,
                        });
                    }
                }
            }
        }
        Ok(SkeletonSequence {
            frames,
            label,
            source_id,
            joint_count,
            actor_count,
        })
    }

    pub fn frames(&self) -> &[SkeletonFrame] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn joint_count(&self) -> usize {
        self.joint_count
    }

    pub fn actor_count(&self) -> usize {
        self.actor_count
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn with_label(mut self, label: Option<usize>) -> Self {
        self.label = label;
        self
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    /// New sequence with every joint transformed by `f`; metadata preserved.
    ///
    /// `f` must produce finite coordinates.
    pub fn map_joints(
        &self,
        mut f: impl FnMut(Joint3D) -> Joint3D,
    ) -> Result<Self, SkeletonError> {
        let frames = self
            .frames
            .iter()
            .map(|frame| SkeletonFrame {
                actors: frame
                    .actors
                    .iter()
                    .map(|actor| Actor {
                        actor_id: actor.actor_id,
                        joints: actor.joints.iter().map(|&j| f(j)).collect(),
                    })
                    .collect(),
            })
            .collect();
        SkeletonSequence::new(frames, self.label, self.source_id.clone())
    }

    /// New sequence keeping only the frames in `range`.
    pub fn slice_frames(&self, start: usize, len: usize) -> Result<Self, SkeletonError> {
        let end = start.saturating_add(len).min(self.frames.len());
        SkeletonSequence::new(
            self.frames[start..end].to_vec(),
            self.label,
            self.source_id.clone(),
        )
    }

    /// Iterate over all joints of all actors of all frames.
    pub fn iter_joints(&self) -> impl Iterator<Item = &Joint3D> {
        self.frames
            .iter()
            .flat_map(|f| f.actors.iter())
            .flat_map(|a| a.joints.iter())
    }
}

/// A named group of joints forming one chain of the skeleton.
#[derive(Clone, Debug, PartialEq)]
pub struct BodyPart {
    pub name: String,
    /// Raw joint indices, 0-based, in chain order.
    pub joints: Vec<usize>,
}

/// Permutation of raw joint indices into the concatenated body-part order.
///
/// Row `r` of an encoded action image holds raw joint `permutation()[r]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BodyPartLayout {
    parts: Vec<BodyPart>,
    permutation: Vec<usize>,
}

impl BodyPartLayout {
    /// Build a layout from 0-based parts; the concatenated indices must be a
    /// bijection on `0..J`.
    pub fn new(parts: Vec<BodyPart>) -> Result<Self, SkeletonError> {
        let permutation: Vec<usize> = parts.iter().flat_map(|p| p.joints.iter().copied()).collect();
        let joint_count = permutation.len();
        if joint_count == 0 {
            return Err(SkeletonError::EmptyLayout);
        }
        let mut seen = vec![false; joint_count];
        for &idx in &permutation {
            if idx >= joint_count {
                return Err(SkeletonError::LayoutIndexOutOfRange { idx, joint_count });
            }
            if seen[idx] {
                return Err(SkeletonError::LayoutDuplicateIndex { idx });
            }
            seen[idx] = true;
        }
        Ok(BodyPartLayout { parts, permutation })
    }

    /// Build a layout from 1-based joint indices, as used by layout files.
    pub fn from_one_based(parts: Vec<(String, Vec<usize>)>) -> Result<Self, SkeletonError> {
        let parts = parts
            .into_iter()
            .map(|(name, joints)| {
                let joints = joints
                    .into_iter()
                    .map(|j| j.checked_sub(1).ok_or(SkeletonError::LayoutIndexZero))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(BodyPart { name, joints })
            })
            .collect::<Result<Vec<_>, SkeletonError>>()?;
        BodyPartLayout::new(parts)
    }

    /// Identity layout for a skeleton with `joint_count` joints.
    pub fn identity(joint_count: usize) -> Self {
        BodyPartLayout::new(vec![BodyPart {
            name: String::from("all"),
            joints: (0..joint_count).collect(),
        }])
        .expect("identity layout is always valid")
    }

    /// Five-part layout for the 25-joint Kinect-v2 skeleton.
    ///
    /// Joints are concatenated along physical chains: shoulder, elbow, wrist,
    /// hand, hand tip, thumb for each arm; head down to spine base for the
    /// trunk; hip to foot for each leg.
    pub fn kinect25() -> Self {
        let parts = vec![
            ("left_arm", vec![5, 6, 7, 8, 22, 23]),
            ("right_arm", vec![9, 10, 11, 12, 24, 25]),
            ("trunk", vec![4, 3, 21, 2, 1]),
            ("left_leg", vec![13, 14, 15, 16]),
            ("right_leg", vec![17, 18, 19, 20]),
        ];
        BodyPartLayout::from_one_based(
            parts
                .into_iter()
                .map(|(n, j)| (String::from(n), j))
                .collect(),
        )
        .expect("built-in 25-joint layout is valid")
    }

    /// Five-part layout for the 20-joint Kinect-v1 skeleton (UTD-MHAD style).
    pub fn kinect20() -> Self {
        let parts = vec![
            ("left_arm", vec![5, 6, 7, 8]),
            ("right_arm", vec![9, 10, 11, 12]),
            ("trunk", vec![1, 2, 3, 4]),
            ("left_leg", vec![13, 14, 15, 16]),
            ("right_leg", vec![17, 18, 19, 20]),
        ];
        BodyPartLayout::from_one_based(
            parts
                .into_iter()
                .map(|(n, j)| (String::from(n), j))
                .collect(),
        )
        .expect("built-in 20-joint layout is valid")
    }

    /// Built-in layout for the given joint count, if one exists.
    pub fn builtin(joint_count: usize) -> Option<Self> {
        match joint_count {
            25 => Some(Self::kinect25()),
            20 => Some(Self::kinect20()),
            _ => None,
        }
    }

    /// Layout whose application undoes this one.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0usize; self.permutation.len()];
        for (row, &raw) in self.permutation.iter().enumerate() {
            inv[raw] = row;
        }
        BodyPartLayout::new(vec![BodyPart {
            name: String::from("inverse"),
            joints: inv,
        }])
        .expect("inverse of a bijection is a bijection")
    }

    pub fn parts(&self) -> &[BodyPart] {
        &self.parts
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn joint_count(&self) -> usize {
        self.permutation.len()
    }
}

/// Which coordinate channels to keep; masked channels read as exactly 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelMask {
    keep_x: bool,
    keep_y: bool,
    keep_z: bool,
}

impl ChannelMask {
    pub const ALL: ChannelMask = ChannelMask {
        keep_x: true,
        keep_y: true,
        keep_z: true,
    };

    pub fn new(keep_x: bool, keep_y: bool, keep_z: bool) -> Result<Self, SkeletonError> {
        if !(keep_x || keep_y || keep_z) {
            return Err(SkeletonError::EmptyChannelMask);
        }
        Ok(ChannelMask {
            keep_x,
            keep_y,
            keep_z,
        })
    }

    /// Parse an axis string such as `"xyz"`, `"xy"`, or `"z"`.
    pub fn from_axes(axes: &str) -> Result<Self, SkeletonError> {
        let (mut x, mut y, mut z) = (false, false, false);
        for c in axes.chars() {
            match c {
                'x' | 'X' => x = true,
                'y' | 'Y' => y = true,
                'z' | 'Z' => z = true,
                other => return Err(SkeletonError::BadAxis(other)),
            }
        }
        ChannelMask::new(x, y, z)
    }

    pub fn keep_x(&self) -> bool {
        self.keep_x
    }

    pub fn keep_y(&self) -> bool {
        self.keep_y
    }

    pub fn keep_z(&self) -> bool {
        self.keep_z
    }

    pub fn is_full(&self) -> bool {
        self.keep_x && self.keep_y && self.keep_z
    }
}

impl fmt::Display for ChannelMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.keep_x {
            f.write_str("x")?;
        }
        if self.keep_y {
            f.write_str("y")?;
        }
        if self.keep_z {
            f.write_str("z")?;
        }
        Ok(())
    }
}

/// Permute every frame's joints into the layout's body-part order.
pub fn reorder_joints(
    seq: &SkeletonSequence,
    layout: &BodyPartLayout,
) -> Result<SkeletonSequence, SkeletonError> {
    if layout.joint_count() != seq.joint_count() {
        return Err(SkeletonError::LayoutJointCountMismatch {
            layout: layout.joint_count(),
            sequence: seq.joint_count(),
        });
    }
    let frames = seq
        .frames()
        .iter()
        .map(|frame| SkeletonFrame {
            actors: frame
                .actors
                .iter()
                .map(|actor| Actor {
                    actor_id: actor.actor_id,
                    joints: layout
                        .permutation()
                        .iter()
                        .map(|&raw| actor.joints[raw])
                        .collect(),
                })
                .collect(),
        })
        .collect();
    SkeletonSequence::new(frames, seq.label(), seq.source_id())
}

/// Concatenate a two-actor sequence into a single actor stream.
///
/// Actor 0's joints precede actor 1's in every frame, so the encoded image
/// stacks the two skeletons vertically. Single-actor input passes through
/// unchanged.
pub fn merge_actors(seq: &SkeletonSequence) -> Result<SkeletonSequence, SkeletonError> {
    match seq.actor_count() {
        1 => Ok(seq.clone()),
        2 => {
            let frames = seq
                .frames()
                .iter()
                .map(|frame| {
                    let mut joints =
                        Vec::with_capacity(seq.joint_count() * seq.actor_count());
                    for actor in &frame.actors {
                        joints.extend_from_slice(&actor.joints);
                    }
                    SkeletonFrame {
                        actors: vec![Actor {
                            actor_id: 0,
                            joints,
                        }],
                    }
                })
                .collect();
            SkeletonSequence::new(frames, seq.label(), seq.source_id())
        }
        n => Err(SkeletonError::TooManyActors { count: n }),
    }
}

/// Zero the masked coordinate channels in every joint.
pub fn mask_channels(
    seq: &SkeletonSequence,
    mask: ChannelMask,
) -> Result<SkeletonSequence, SkeletonError> {
    if mask.is_full() {
        return Ok(seq.clone());
    }
    seq.map_joints(|j| Joint3D {
        x: if mask.keep_x() { j.x } else { 0.0 },
        y: if mask.keep_y() { j.y } else { 0.0 },
        z: if mask.keep_z() { j.z } else { 0.0 },
    })
}

/// Validation and structural errors for skeleton data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SkeletonError {
    EmptySequence,
    NoActors,
    NoJoints,
    ActorCountMismatch {
        frame: usize,
        expected: usize,
        actual: usize,
    },
    JointCountMismatch {
        frame: usize,
        expected: usize,
        actual: usize,
    },
    UnstableActorOrder {
        frame: usize,
        slot: usize,
    },
    NonFiniteCoordinate {
        frame: usize,
        actor: usize,
        joint: usize,
    },
    EmptyLayout,
    LayoutIndexZero,
    LayoutIndexOutOfRange {
        idx: usize,
        joint_count: usize,
    },
    LayoutDuplicateIndex {
        idx: usize,
    },
    LayoutJointCountMismatch {
        layout: usize,
        sequence: usize,
    },
    TooManyActors {
        count: usize,
    },
    EmptyChannelMask,
    BadAxis(char),
}

impl fmt::Display for SkeletonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkeletonError::EmptySequence => write!(f, "sequence has no frames"),
            SkeletonError::NoActors => write!(f, "frame has no actors"),
            SkeletonError::NoJoints => write!(f, "actor has no joints"),
            SkeletonError::ActorCountMismatch {
                frame,
                expected,
                actual,
            } => write!(
                f,
                "frame {frame}: expected {expected} actors, found {actual}"
            ),
            SkeletonError::JointCountMismatch {
                frame,
                expected,
                actual,
            } => write!(
                f,
                "frame {frame}: expected {expected} joints, found {actual}"
            ),
            SkeletonError::UnstableActorOrder { frame, slot } => write!(
                f,
                "frame {frame}: actor id at slot {slot} differs from frame 0"
            ),
            SkeletonError::NonFiniteCoordinate {
                frame,
                actor,
                joint,
            } => write!(
                f,
                "frame {frame}, actor {actor}, joint {joint}: coordinate is not finite"
            ),
            SkeletonError::EmptyLayout => write!(f, "layout has no joints"),
            SkeletonError::LayoutIndexZero => {
                write!(f, "layout uses 1-based joint indices; found 0")
            }
            SkeletonError::LayoutIndexOutOfRange { idx, joint_count } => write!(
                f,
                "layout joint index {idx} out of range for {joint_count} joints"
            ),
            SkeletonError::LayoutDuplicateIndex { idx } => {
                write!(f, "layout joint index {idx} appears more than once")
            }
            SkeletonError::LayoutJointCountMismatch { layout, sequence } => write!(
                f,
                "layout covers {layout} joints but sequence has {sequence}"
            ),
            SkeletonError::TooManyActors { count } => {
                write!(f, "sequences with {count} actors are unsupported (at most 2)")
            }
            SkeletonError::EmptyChannelMask => {
                write!(f, "channel mask must keep at least one of x, y, z")
            }
            SkeletonError::BadAxis(c) => write!(f, "unknown axis {c:?} (expected x, y, or z)"),
        }
    }
}

impl core::error::Error for SkeletonError {}

/// Format a layout as informal text, for logs and error context.
pub fn describe_layout(layout: &BodyPartLayout) -> String {
    let parts: Vec<String> = layout
        .parts()
        .iter()
        .map(|p| format!("{}({})", p.name, p.joints.len()))
        .collect();
    parts.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn joint(v: f64) -> Joint3D {
        Joint3D::new(v, v + 0.5, v - 0.25)
    }

    fn single_actor_seq(frames: usize, joints: usize) -> SkeletonSequence {
        let frames = (0..frames)
            .map(|f| SkeletonFrame {
                actors: vec![Actor {
                    actor_id: 7,
                    joints: (0..joints).map(|j| joint((f * joints + j) as f64)).collect(),
                }],
            })
            .collect();
        SkeletonSequence::new(frames, Some(3), "unit").unwrap()
    }

    #[test]
    fn sequence_rejects_empty_and_inconsistent_input() {
        assert_eq!(
            SkeletonSequence::new(Vec::new(), None, "x").unwrap_err(),
            SkeletonError::EmptySequence
        );

        let good = SkeletonFrame {
            actors: vec![Actor {
                actor_id: 1,
                joints: vec![joint(0.0), joint(1.0)],
            }],
        };
        let short = SkeletonFrame {
            actors: vec![Actor {
                actor_id: 1,
                joints: vec![joint(0.0)],
            }],
        };
        let err = SkeletonSequence::new(vec![good.clone(), short], None, "x").unwrap_err();
        assert_eq!(
            err,
            SkeletonError::JointCountMismatch {
                frame: 1,
                expected: 2,
                actual: 1
            }
        );

        let mut bad = good.clone();
        bad.actors[0].joints[1].y = f64::NAN;
        assert!(matches!(
            SkeletonSequence::new(vec![bad], None, "x").unwrap_err(),
            SkeletonError::NonFiniteCoordinate { .. }
        ));

        let renamed = SkeletonFrame {
            actors: vec![Actor {
                actor_id: 2,
                joints: vec![joint(0.0), joint(1.0)],
            }],
        };
        assert!(matches!(
            SkeletonSequence::new(vec![good, renamed], None, "x").unwrap_err(),
            SkeletonError::UnstableActorOrder { frame: 1, slot: 0 }
        ));
    }

    #[test]
    fn reorder_identity_is_noop() {
        let seq = single_actor_seq(3, 4);
        let out = reorder_joints(&seq, &BodyPartLayout::identity(4)).unwrap();
        assert_eq!(out, seq);
    }

    #[test]
    fn reorder_permutes_by_hand_derived_example() {
        // J=4, parts [[2,3],[0,1]] on joints [a,b,c,d] must yield [c,d,a,b].
        let seq = single_actor_seq(1, 4);
        let layout = BodyPartLayout::new(vec![
            BodyPart {
                name: "p0".into(),
                joints: vec![2, 3],
            },
            BodyPart {
                name: "p1".into(),
                joints: vec![0, 1],
            },
        ])
        .unwrap();
        let out = reorder_joints(&seq, &layout).unwrap();
        let orig = &seq.frames()[0].actors[0].joints;
        let got = &out.frames()[0].actors[0].joints;
        assert_eq!(got, &vec![orig[2], orig[3], orig[0], orig[1]]);
    }

    #[test]
    fn kinect25_inverse_restores_order() {
        let seq = single_actor_seq(2, 25);
        let layout = BodyPartLayout::kinect25();
        let reordered = reorder_joints(&seq, &layout).unwrap();
        let restored = reorder_joints(&reordered, &layout.inverse()).unwrap();
        assert_eq!(restored, seq);
    }

    #[test]
    fn builtin_layouts_are_five_part_bijections() {
        for layout in [BodyPartLayout::kinect25(), BodyPartLayout::kinect20()] {
            assert_eq!(layout.parts().len(), 5);
            let mut hit = vec![false; layout.joint_count()];
            for &i in layout.permutation() {
                assert!(!hit[i]);
                hit[i] = true;
            }
            assert!(hit.iter().all(|&h| h));
        }
        assert_eq!(BodyPartLayout::kinect25().joint_count(), 25);
        assert_eq!(BodyPartLayout::kinect20().joint_count(), 20);
    }

    #[test]
    fn reorder_rejects_mismatched_layout() {
        let seq = single_actor_seq(1, 4);
        let err = reorder_joints(&seq, &BodyPartLayout::kinect25()).unwrap_err();
        assert_eq!(
            err,
            SkeletonError::LayoutJointCountMismatch {
                layout: 25,
                sequence: 4
            }
        );
    }

    #[test]
    fn layout_rejects_non_bijections() {
        let dup = BodyPartLayout::new(vec![BodyPart {
            name: "p".into(),
            joints: vec![0, 0],
        }]);
        assert_eq!(dup.unwrap_err(), SkeletonError::LayoutDuplicateIndex { idx: 0 });

        let gap = BodyPartLayout::new(vec![BodyPart {
            name: "p".into(),
            joints: vec![0, 2],
        }]);
        assert_eq!(
            gap.unwrap_err(),
            SkeletonError::LayoutIndexOutOfRange {
                idx: 2,
                joint_count: 2
            }
        );
    }

    fn two_actor_seq(frames: usize, joints: usize) -> SkeletonSequence {
        let frames = (0..frames)
            .map(|f| SkeletonFrame {
                actors: vec![
                    Actor {
                        actor_id: 10,
                        joints: (0..joints).map(|j| joint((f + j) as f64)).collect(),
                    },
                    Actor {
                        actor_id: 20,
                        joints: (0..joints).map(|j| joint(100.0 + (f * j) as f64)).collect(),
                    },
                ],
            })
            .collect();
        SkeletonSequence::new(frames, Some(1), "pair").unwrap()
    }

    #[test]
    fn merge_single_actor_passes_through() {
        let seq = single_actor_seq(4, 5);
        assert_eq!(merge_actors(&seq).unwrap(), seq);
    }

    #[test]
    fn merge_stacks_actor_zero_before_actor_one() {
        let seq = two_actor_seq(3, 25);
        let merged = merge_actors(&seq).unwrap();
        assert_eq!(merged.actor_count(), 1);
        assert_eq!(merged.joint_count(), 50);
        for (frame, merged_frame) in seq.frames().iter().zip(merged.frames()) {
            let joints = &merged_frame.actors[0].joints;
            assert_eq!(&joints[..25], &frame.actors[0].joints[..]);
            assert_eq!(&joints[25..], &frame.actors[1].joints[..]);
        }
    }

    #[test]
    fn merge_then_split_restores_two_actor_sequence() {
        let seq = two_actor_seq(4, 6);
        let merged = merge_actors(&seq).unwrap();
        // Inverse bookkeeping: split rows back into the original actors.
        let frames: Vec<SkeletonFrame> = merged
            .frames()
            .iter()
            .map(|frame| {
                let joints = &frame.actors[0].joints;
                SkeletonFrame {
                    actors: vec![
                        Actor {
                            actor_id: 10,
                            joints: joints[..6].to_vec(),
                        },
                        Actor {
                            actor_id: 20,
                            joints: joints[6..].to_vec(),
                        },
                    ],
                }
            })
            .collect();
        let split = SkeletonSequence::new(frames, merged.label(), merged.source_id()).unwrap();
        assert_eq!(split, seq);
    }

    #[test]
    fn merge_rejects_more_than_two_actors() {
        let frame = SkeletonFrame {
            actors: (0..3)
                .map(|a| Actor {
                    actor_id: a,
                    joints: vec![joint(a as f64)],
                })
                .collect(),
        };
        let seq = SkeletonSequence::new(vec![frame], None, "trio").unwrap();
        assert_eq!(
            merge_actors(&seq).unwrap_err(),
            SkeletonError::TooManyActors { count: 3 }
        );
    }

    #[test]
    fn mask_keep_all_is_identity() {
        let seq = single_actor_seq(3, 4);
        assert_eq!(mask_channels(&seq, ChannelMask::ALL).unwrap(), seq);
    }

    #[test]
    fn mask_zeroes_dropped_channels_only() {
        let frame = SkeletonFrame {
            actors: vec![Actor {
                actor_id: 0,
                joints: vec![Joint3D::new(1.0, 2.0, 3.0)],
            }],
        };
        let seq = SkeletonSequence::new(vec![frame], None, "m").unwrap();
        let xy = ChannelMask::from_axes("xy").unwrap();
        let out = mask_channels(&seq, xy).unwrap();
        assert_eq!(out.frames()[0].actors[0].joints[0], Joint3D::new(1.0, 2.0, 0.0));
    }

    #[test]
    fn mask_is_idempotent() {
        let seq = single_actor_seq(5, 3);
        let mask = ChannelMask::from_axes("z").unwrap();
        let once = mask_channels(&seq, mask).unwrap();
        let twice = mask_channels(&once, mask).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn empty_mask_is_rejected() {
        assert_eq!(
            ChannelMask::new(false, false, false).unwrap_err(),
            SkeletonError::EmptyChannelMask
        );
        assert!(ChannelMask::from_axes("").is_err());
        assert!(ChannelMask::from_axes("q").is_err());
    }
}
