//! Dataset ingest: the NTU-style skeleton text format, the JSON-lines
//! sequence format, dataset manifests, and body-part layout files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use skelimg_core::skeleton::{Actor, BodyPartLayout, Joint3D, SkeletonFrame, SkeletonSequence};
use skelimg_core::synth::Split;

use crate::{Result, ToolError};

/// Joint count expected by the NTU capture format.
pub const NTU_JOINTS: usize = 25;
/// Values per body-metadata line (body id first).
const NTU_BODY_FIELDS: usize = 10;
/// Values per joint line; only the first three (x, y, z) are consumed.
const NTU_JOINT_FIELDS: usize = 12;

/// A parsed sequence plus any recoverable oddities found along the way.
#[derive(Debug, Clone)]
pub struct ParsedSkeleton {
    pub sequence: SkeletonSequence,
    pub warnings: Vec<String>,
}

struct LineReader<'p, R> {
    inner: R,
    path: &'p Path,
    line: usize,
}

impl<'p, R: BufRead> LineReader<'p, R> {
    fn new(inner: R, path: &'p Path) -> Self {
        LineReader {
            inner,
            path,
            line: 0,
        }
    }

    /// Next non-empty line, or a truncation error mentioning what was
    /// expected.
    fn next_line(&mut self, expected: &str) -> Result<String> {
        loop {
            let mut buf = String::new();
            let n = self
                .inner
                .read_line(&mut buf)
                .map_err(|e| ToolError::io(self.path, e))?;
            if n == 0 {
                return Err(ToolError::parse(
                    self.path,
                    self.line + 1,
                    format!("file truncated; expected {expected}"),
                ));
            }
            self.line += 1;
            if !buf.trim().is_empty() {
                return Ok(buf.trim().to_string());
            }
        }
    }

    fn error(&self, message: impl Into<String>) -> ToolError {
        ToolError::parse(self.path, self.line, message)
    }
}

fn parse_count(reader: &LineReader<'_, impl BufRead>, text: &str, what: &str) -> Result<usize> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| reader.error(format!("expected {what}, found {text:?}")))
}

/// Parse the NTU-style text format:
///
/// ```text
/// frame count F
/// per frame:  body count B
///   per body: 10 metadata values (body id first)
///             joint count (must be 25)
///             25 lines of 12 values: x y z depthX depthY colorX colorY
///             orientW orientX orientY orientZ trackingState
/// ```
///
/// Only the x, y, z fields are retained. Frames missing one actor of a
/// two-actor sequence are filled with zero joints; if more than two bodies
/// appear, the two with the largest motion energy are kept.
pub fn parse_ntu_skeleton<R: Read>(input: R, path: &Path, source_id: &str) -> Result<ParsedSkeleton> {
    let mut reader = LineReader::new(BufReader::new(input), path);
    let mut warnings = Vec::new();

    let frame_count_text = reader.next_line("frame count")?;
    let frame_count = parse_count(&reader, &frame_count_text, "frame count")?;
    if frame_count == 0 {
        return Err(reader.error("frame count must be at least 1"));
    }

    // (body id -> joints) per frame, in file order.
    let mut raw_frames: Vec<Vec<(u64, Vec<Joint3D>)>> = Vec::with_capacity(frame_count);
    for frame_index in 0..frame_count {
        let body_count_text = reader.next_line(&format!("body count of frame {frame_index}"))?;
        let body_count = parse_count(&reader, &body_count_text, "body count")?;
        let mut bodies = Vec::with_capacity(body_count);
        for body_index in 0..body_count {
            let meta = reader.next_line("body metadata")?;
            let fields: Vec<&str> = meta.split_whitespace().collect();
            if fields.len() != NTU_BODY_FIELDS {
                return Err(reader.error(format!(
                    "body metadata needs {NTU_BODY_FIELDS} values, found {}",
                    fields.len()
                )));
            }
            let body_id = fields[0]
                .parse::<u64>()
                .map_err(|_| reader.error(format!("body id must be an integer, found {:?}", fields[0])))?;
            for f in &fields[1..] {
                f.parse::<f64>()
                    .map_err(|_| reader.error(format!("non-numeric metadata token {f:?}")))?;
            }

            let joints_text = reader.next_line("joint count")?;
            let joint_count = parse_count(&reader, &joints_text, "joint count")?;
            if joint_count != NTU_JOINTS {
                return Err(reader.error(format!(
                    "joint count must be {NTU_JOINTS}, found {joint_count}"
                )));
            }
            let mut joints = Vec::with_capacity(NTU_JOINTS);
            for joint_index in 0..NTU_JOINTS {
                let line = reader.next_line(&format!(
                    "joint {joint_index} of body {body_index}, frame {frame_index}"
                ))?;
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != NTU_JOINT_FIELDS {
                    return Err(reader.error(format!(
                        "joint line needs {NTU_JOINT_FIELDS} values, found {}",
                        fields.len()
                    )));
                }
                let mut parsed = [0.0f64; NTU_JOINT_FIELDS];
                for (k, f) in fields.iter().enumerate() {
                    parsed[k] = f
                        .parse::<f64>()
                        .map_err(|_| reader.error(format!("non-numeric token {f:?}")))?;
                }
                let joint = Joint3D::new(parsed[0], parsed[1], parsed[2]);
                if !joint.is_finite() {
                    return Err(reader.error("joint coordinate is not finite"));
                }
                joints.push(joint);
            }
            bodies.push((body_id, joints));
        }
        raw_frames.push(bodies);
    }

    // Anything after the declared frames is a frame-count mismatch.
    {
        let mut rest = String::new();
        let mut buf = String::new();
        while reader
            .inner
            .read_line(&mut buf)
            .map_err(|e| ToolError::io(path, e))? > 0
        {
            reader.line += 1;
            rest.push_str(buf.trim());
            buf.clear();
        }
        if !rest.is_empty() {
            return Err(reader.error(format!(
                "file declares {frame_count} frames but more data follows"
            )));
        }
    }

    // Stable actor ordering by first appearance.
    let mut body_order: Vec<u64> = Vec::new();
    for bodies in &raw_frames {
        for (id, _) in bodies {
            if !body_order.contains(id) {
                body_order.push(*id);
            }
        }
    }
    if body_order.is_empty() {
        return Err(reader.error("no bodies in any frame"));
    }

    // More than two bodies: keep the two with the largest motion energy.
    let kept: Vec<u64> = if body_order.len() > 2 {
        let mut energy: HashMap<u64, f64> = HashMap::new();
        let mut last_pos: HashMap<u64, Vec<Joint3D>> = HashMap::new();
        for bodies in &raw_frames {
            for (id, joints) in bodies {
                if let Some(prev) = last_pos.get(id) {
                    let e: f64 = prev
                        .iter()
                        .zip(joints)
                        .map(|(a, b)| {
                            (a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)
                        })
                        .sum();
                    *energy.entry(*id).or_insert(0.0) += e;
                }
                last_pos.insert(*id, joints.clone());
            }
        }
        let mut ranked = body_order.clone();
        ranked.sort_by(|a, b| {
            let ea = energy.get(a).copied().unwrap_or(0.0);
            let eb = energy.get(b).copied().unwrap_or(0.0);
            eb.partial_cmp(&ea).unwrap()
        });
        let keep: Vec<u64> = body_order
            .iter()
            .copied()
            .filter(|id| ranked[..2].contains(id))
            .collect();
        warnings.push(format!(
            "{} bodies found; keeping the two with the largest motion energy ({:?})",
            body_order.len(),
            keep
        ));
        keep
    } else {
        body_order
    };

    // Assemble frames, zero-filling actors missing from individual frames.
    let mut fill_counts: HashMap<u64, usize> = HashMap::new();
    let frames: Vec<SkeletonFrame> = raw_frames
        .into_iter()
        .map(|bodies| {
            let actors = kept
                .iter()
                .map(|&id| {
                    match bodies.iter().find(|(bid, _)| *bid == id) {
                        Some((_, joints)) => Actor {
                            actor_id: id,
                            joints: joints.clone(),
                        },
                        None => {
                            *fill_counts.entry(id).or_insert(0) += 1;
                            Actor {
                                actor_id: id,
                                joints: vec![Joint3D::ZERO; NTU_JOINTS],
                            }
                        }
                    }
                })
                .collect();
            SkeletonFrame { actors }
        })
        .collect();
    for (id, count) in fill_counts {
        warnings.push(format!(
            "body {id} missing in {count} frame(s); filled with zero joints"
        ));
    }

    let sequence = SkeletonSequence::new(frames, None, source_id)
        .map_err(|e| ToolError::parse(path, 0, e.to_string()))?;
    Ok(ParsedSkeleton { sequence, warnings })
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlHeader {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
    joints: usize,
    actors: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlFrame {
    actors: Vec<Vec<[f64; 3]>>,
}

/// Parse the JSON-lines sequence format: a header object followed by one
/// object per frame.
pub fn parse_jsonl<R: Read>(input: R, path: &Path, source_id: &str) -> Result<SkeletonSequence> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines().enumerate();

    let (_, header_line) = lines
        .next()
        .ok_or_else(|| ToolError::parse(path, 1, "empty file; expected header line"))?;
    let header_line = header_line.map_err(|e| ToolError::io(path, e))?;
    let header: JsonlHeader = serde_json::from_str(&header_line)
        .map_err(|e| ToolError::parse(path, 1, format!("bad header: {e}")))?;
    if header.joints == 0 || header.actors == 0 {
        return Err(ToolError::parse(path, 1, "joints and actors must be positive"));
    }

    let mut frames = Vec::new();
    for (index, line) in lines {
        let line = line.map_err(|e| ToolError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = index + 1;
        let frame: JsonlFrame = serde_json::from_str(&line)
            .map_err(|e| ToolError::parse(path, lineno, format!("bad frame: {e}")))?;
        if frame.actors.len() != header.actors {
            return Err(ToolError::parse(
                path,
                lineno,
                format!("expected {} actors, found {}", header.actors, frame.actors.len()),
            ));
        }
        let actors = frame
            .actors
            .into_iter()
            .enumerate()
            .map(|(a, joints)| {
                if joints.len() != header.joints {
                    return Err(ToolError::parse(
                        path,
                        lineno,
                        format!("expected {} joints, found {}", header.joints, joints.len()),
                    ));
                }
                Ok(Actor {
                    actor_id: a as u64,
                    joints: joints
                        .into_iter()
                        .map(|[x, y, z]| Joint3D::new(x, y, z))
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        frames.push(SkeletonFrame { actors });
    }
    if frames.is_empty() {
        return Err(ToolError::parse(path, 2, "no frame lines after header"));
    }

    SkeletonSequence::new(frames, header.label, source_id)
        .map_err(|e| ToolError::parse(path, 0, e.to_string()))
}

/// Write a sequence in the JSON-lines format; `parse_jsonl` reproduces it
/// exactly (coordinates round-trip through shortest-representation floats).
pub fn write_jsonl<W: Write>(seq: &SkeletonSequence, mut out: W) -> std::io::Result<()> {
    let header = JsonlHeader {
        label: seq.label(),
        joints: seq.joint_count(),
        actors: seq.actor_count(),
    };
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes"))?;
    for frame in seq.frames() {
        let frame = JsonlFrame {
            actors: frame
                .actors
                .iter()
                .map(|a| a.joints.iter().map(|j| [j.x, j.y, j.z]).collect())
                .collect(),
        };
        writeln!(out, "{}", serde_json::to_string(&frame).expect("frame serializes"))?;
    }
    Ok(())
}

/// One dataset entry: a sequence file, its label, and its split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: usize,
    pub split: Split,
}

/// Dataset manifest: entries plus the ordered class names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub class_names: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        if self.class_names.is_empty() {
            return Err(ToolError::Config("manifest has no classes".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for entry in &self.entries {
            if entry.label >= self.class_names.len() {
                return Err(ToolError::Config(format!(
                    "manifest entry {} has label {} but only {} classes are declared",
                    entry.path,
                    entry.label,
                    self.class_names.len()
                )));
            }
            if !seen.insert(&entry.path) {
                return Err(ToolError::Config(format!(
                    "manifest path {} appears more than once",
                    entry.path
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| ToolError::io(path, e))?;
        let manifest: DatasetManifest = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| ToolError::parse(path, 0, format!("bad manifest: {e}")))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| ToolError::io(path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), self)
            .map_err(|e| ToolError::Data(format!("writing manifest: {e}")))?;
        Ok(())
    }

    pub fn entries_for(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }
}

/// Load one sequence file, dispatching on the extension (`.jsonl` or the
/// NTU `.skeleton` format); the manifest's label wins over any stored label.
pub fn load_sequence(base: &Path, entry: &ManifestEntry) -> Result<ParsedSkeleton> {
    let path: PathBuf = base.join(&entry.path);
    let file = File::open(&path).map_err(|e| ToolError::io(&path, e))?;
    let source_id = Path::new(&entry.path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| entry.path.clone());
    let parsed = match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => ParsedSkeleton {
            sequence: parse_jsonl(file, &path, &source_id)?,
            warnings: Vec::new(),
        },
        Some("skeleton") | Some("txt") => parse_ntu_skeleton(file, &path, &source_id)?,
        other => {
            return Err(ToolError::Data(format!(
                "{}: unknown sequence extension {:?}",
                path.display(),
                other
            )))
        }
    };
    Ok(ParsedSkeleton {
        sequence: parsed.sequence.with_label(Some(entry.label)),
        warnings: parsed.warnings,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct LayoutFilePart {
    name: String,
    /// 1-based raw joint indices in chain order.
    joints: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayoutFile {
    parts: Vec<LayoutFilePart>,
}

/// Load a body-part layout from its JSON file ({"parts": [{"name", "joints"}]},
/// joints 1-based).
pub fn load_layout(path: &Path) -> Result<BodyPartLayout> {
    let file = File::open(path).map_err(|e| ToolError::io(path, e))?;
    let spec: LayoutFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| ToolError::parse(path, 0, format!("bad layout file: {e}")))?;
    BodyPartLayout::from_one_based(spec.parts.into_iter().map(|p| (p.name, p.joints)).collect())
        .map_err(|e| ToolError::Config(format!("{}: {e}", path.display())))
}

/// Serializable form of a layout, embedded in checkpoints.
pub fn layout_to_parts(layout: &BodyPartLayout) -> Vec<(String, Vec<usize>)> {
    layout
        .parts()
        .iter()
        .map(|p| (p.name.clone(), p.joints.iter().map(|j| j + 1).collect()))
        .collect()
}

pub fn layout_from_parts(parts: &[(String, Vec<usize>)]) -> Result<BodyPartLayout> {
    BodyPartLayout::from_one_based(parts.to_vec())
        .map_err(|e| ToolError::Config(format!("embedded layout invalid: {e}")))
}
