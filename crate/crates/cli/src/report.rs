//! Evaluation reports: accuracy, per-class accuracy, confusion matrix, and
//! its CSV/PNG renderings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::{Result, ToolError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub class_names: Vec<String>,
    pub total: usize,
    pub accuracy: f64,
    pub per_class_accuracy: Vec<f64>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<usize>>,
    pub metadata: EvalMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EvalMetadata {
    pub checkpoint: String,
    pub dataset: String,
    pub split: String,
}

impl EvalReport {
    /// Build from (true, predicted) label pairs.
    pub fn from_predictions(
        pairs: &[(usize, usize)],
        class_names: Vec<String>,
        metadata: EvalMetadata,
    ) -> Result<Self> {
        let m = class_names.len();
        if pairs.is_empty() {
            return Err(ToolError::Data("no predictions to evaluate".into()));
        }
        let mut confusion = vec![vec![0usize; m]; m];
        for &(truth, pred) in pairs {
            if truth >= m || pred >= m {
                return Err(ToolError::Data(format!(
                    "label pair ({truth}, {pred}) out of range for {m} classes"
                )));
            }
            confusion[truth][pred] += 1;
        }
        let trace: usize = (0..m).map(|i| confusion[i][i]).sum();
        // Diagonal over row sum, NaN for unseen classes.
        let per_class_accuracy: Vec<f64> = confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let total: usize = row.iter().sum();
                if total == 0 {
                    f64::NAN
                } else {
                    confusion[i][i] as f64 / total as f64
                }
            })
            .collect();
        Ok(EvalReport {
            class_names,
            total: pairs.len(),
            accuracy: trace as f64 / pairs.len() as f64,
            per_class_accuracy,
            confusion,
            metadata,
        })
    }

    /// Row sums of the confusion matrix (per-class test counts).
    pub fn row_sums(&self) -> Vec<usize> {
        self.confusion.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| ToolError::io(path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), self)
            .map_err(|e| ToolError::Data(format!("writing report: {e}")))
    }

    /// Confusion matrix as CSV with a header row/column of class names.
    pub fn write_confusion_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| ToolError::io(path, e))?;
        let mut out = BufWriter::new(file);
        let header: Vec<&str> = self.class_names.iter().map(|s| s.as_str()).collect();
        writeln!(out, "true\\pred,{}", header.join(","))
            .map_err(|e| ToolError::io(path, e))?;
        for (name, row) in self.class_names.iter().zip(&self.confusion) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{},{}", name, cells.join(","))
                .map_err(|e| ToolError::io(path, e))?;
        }
        Ok(())
    }

    /// Render the confusion matrix as a heatmap PNG (rows = true classes).
    pub fn render_heatmap(&self, path: &Path) -> Result<()> {
        const CELL: u32 = 32;
        const GAP: u32 = 1;
        let m = self.class_names.len() as u32;
        let side = m * (CELL + GAP) + GAP;
        let mut img = RgbImage::from_pixel(side, side, Rgb([24, 24, 24]));
        let max = self
            .confusion
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or(1)
            .max(1) as f64;
        for (i, row) in self.confusion.iter().enumerate() {
            for (j, &count) in row.iter().enumerate() {
                let t = count as f64 / max;
                let color = heat_color(t);
                let x0 = GAP + j as u32 * (CELL + GAP);
                let y0 = GAP + i as u32 * (CELL + GAP);
                for dy in 0..CELL {
                    for dx in 0..CELL {
                        img.put_pixel(x0 + dx, y0 + dy, color);
                    }
                }
            }
        }
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| ToolError::Data(format!("{}: writing heatmap: {e}", path.display())))
    }
}

/// Black -> red -> yellow -> white ramp.
fn heat_color(t: f64) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * (3.0 * t).min(1.0)) as u8;
    let g = (255.0 * ((3.0 * t - 1.0).clamp(0.0, 1.0))) as u8;
    let b = (255.0 * ((3.0 * t - 2.0).clamp(0.0, 1.0))) as u8;
    Rgb([r, g, b])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn accuracy_is_trace_over_total_and_rows_sum_to_counts() {
        let pairs = [(0, 0), (0, 1), (1, 1), (1, 1), (2, 0), (2, 2)];
        let report =
            EvalReport::from_predictions(&pairs, names(3), EvalMetadata::default()).unwrap();
        assert_eq!(report.total, 6);
        assert!((report.accuracy - 4.0 / 6.0).abs() < 1e-12);
        assert_eq!(report.row_sums(), vec![2, 2, 2]);
        assert_eq!(report.confusion[0], vec![1, 1, 0]);
        assert!((report.per_class_accuracy[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_correct_sample_gives_identity_like_matrix() {
        let report =
            EvalReport::from_predictions(&[(1, 1)], names(3), EvalMetadata::default()).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.confusion[1][1], 1);
        let total: usize = report.confusion.iter().flatten().sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn csv_and_heatmap_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let pairs = [(0, 0), (1, 0), (1, 1)];
        let report =
            EvalReport::from_predictions(&pairs, names(2), EvalMetadata::default()).unwrap();
        let csv = dir.path().join("confusion.csv");
        report.write_confusion_csv(&csv).unwrap();
        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text.contains("c0,1,0"));
        assert!(text.contains("c1,1,1"));

        let png = dir.path().join("confusion.png");
        report.render_heatmap(&png).unwrap();
        assert!(png.exists());
        let json = dir.path().join("report.json");
        report.write_json(&json).unwrap();
        let loaded: EvalReport =
            serde_json::from_reader(File::open(&json).unwrap()).unwrap();
        assert_eq!(loaded, report);
    }

    #[test]
    fn out_of_range_labels_are_rejected() {
        let err = EvalReport::from_predictions(&[(0, 5)], names(2), EvalMetadata::default())
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
