//! Lossless PNG export/import of action images (8-bit RGB, no alpha).

use std::path::Path;

use image::{ImageFormat, RgbImage};

use skelimg_core::mapping::ActionImage;

use crate::{Result, ToolError};

/// Write an action image as an 8-bit RGB PNG. The encoder is deterministic,
/// so identical images produce byte-identical files.
pub fn export_png(img: &ActionImage, path: &Path) -> Result<()> {
    let buffer = RgbImage::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.pixels().to_vec(),
    )
    .expect("pixel buffer matches dimensions");
    buffer
        .save_with_format(path, ImageFormat::Png)
        .map_err(|e| ToolError::Data(format!("{}: writing PNG: {e}", path.display())))
}

/// Read an 8-bit RGB PNG back into an action image.
///
/// The degenerate flag is not stored in the PNG; an all-zero image reads
/// back as degenerate, which matches how degenerate sequences are encoded.
/// The authoritative flag lives in the encode index file.
pub fn import_png(path: &Path) -> Result<ActionImage> {
    let img = image::open(path)
        .map_err(|e| ToolError::Data(format!("{}: reading PNG: {e}", path.display())))?;
    let rgb = img.into_rgb8();
    let (width, height) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb.into_raw();
    let degenerate = pixels.iter().all(|&p| p == 0);
    Ok(ActionImage::from_raw(height, width, pixels, degenerate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn png_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = skelimg_core::rng::stream(99, &[]);
        let pixels: Vec<u8> = (0..3 * 50 * 30).map(|_| rng.gen()).collect();
        let img = ActionImage::from_raw(50, 30, pixels, false);

        let path = dir.path().join("roundtrip.png");
        export_png(&img, &path).unwrap();
        let back = import_png(&path).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn one_pixel_image_survives() {
        let dir = tempfile::tempdir().unwrap();
        let img = ActionImage::from_raw(1, 1, vec![255, 0, 0], false);
        let path = dir.path().join("one.png");
        export_png(&img, &path).unwrap();
        assert_eq!(import_png(&path).unwrap(), img);
    }

    #[test]
    fn export_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let img = ActionImage::from_raw(4, 7, (0..84).map(|v| (v * 3) as u8).collect(), false);
        let a = dir.path().join("a.png");
        let b = dir.path().join("b.png");
        export_png(&img, &a).unwrap();
        export_png(&img, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn missing_file_reports_path() {
        let err = import_png(Path::new("/nonexistent/missing.png")).unwrap_err();
        assert!(err.to_string().contains("missing.png"));
    }
}
