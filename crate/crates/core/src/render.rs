//! Exports: shape-parameter tracks as CSV/JSON and landmark frames as SVG.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use crate::regression::ShapeTrack;
use crate::shape::LandmarkShape;
use crate::{Error, Result};

/// Landmark groups of the 36-point lower-face layout and whether each is closed.
pub const FACE_PARTS: [(&str, Range<usize>, bool); 4] = [
    ("jaw", 0..11, false),
    ("nose", 11..16, false),
    ("outer-lip", 16..28, true),
    ("inner-lip", 28..36, true),
];

pub fn write_track_csv(path: &Path, track: &ShapeTrack) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let d = track.frames.first().map_or(0, |f| f.coeffs.len());
    let mut header = vec!["frame".to_string()];
    header.extend((1..=d).map(|k| format!("p{k}")));
    w.write_record(&header)?;
    for (j, f) in track.frames.iter().enumerate() {
        let mut row = vec![j.to_string()];
        row.extend(f.coeffs.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_track_json(path: &Path, track: &ShapeTrack) -> Result<()> {
    let text = serde_json::to_string(track)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Bounding box (min x, min y, max x, max y) over a set of frames.
pub fn bounds<'a>(frames: impl IntoIterator<Item = &'a LandmarkShape>) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for s in frames {
        for p in &s.points {
            b[0] = b[0].min(p[0]);
            b[1] = b[1].min(p[1]);
            b[2] = b[2].max(p[0]);
            b[3] = b[3].max(p[1]);
        }
    }
    b
}

/// Draw one frame as connected polylines, scaled into a `size` x `size` canvas
/// using the shared bounding box `bbox` so frames of a sequence line up.
pub fn frame_svg(shape: &LandmarkShape, bbox: [f64; 4], size: f64) -> String {
    let span = (bbox[2] - bbox[0]).max(bbox[3] - bbox[1]).max(1e-12);
    let margin = 0.08 * size;
    let scale = (size - 2.0 * margin) / span;
    let map = |p: &[f64; 2]| {
        (
            margin + (p[0] - bbox[0]) * scale,
            margin + (p[1] - bbox[1]) * scale,
        )
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#fdfcf8"/>"##);
    for (name, range, closed) in FACE_PARTS {
        let pts: Vec<String> = shape.points[range]
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            svg,
            r##"<{tag} class="{name}" points="{}" fill="none" stroke="#b03a2e" stroke-width="2"/>"##,
            pts.join(" ")
        );
    }
    for p in &shape.points {
        let (x, y) = map(p);
        let _ = writeln!(svg, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="#1f4e79"/>"##);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write `frame_00000.svg`, ... into `dir`.
pub fn write_svg_frames(dir: &Path, frames: &[LandmarkShape], size: f64) -> Result<usize> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let bbox = bounds(frames);
    for (j, s) in frames.iter().enumerate() {
        let path = dir.join(format!("frame_{j:05}.svg"));
        std::fs::write(&path, frame_svg(s, bbox, size)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(frames.len())
}
