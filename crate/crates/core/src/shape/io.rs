use std::path::Path;

use super::LandmarkShape;
use crate::{Error, Result, LANDMARKS};

/// Read `frame_index, x1, y1, ..., x36, y36` rows. A header row is optional.
pub fn read_landmark_csv(path: &Path) -> Result<Vec<LandmarkShape>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut shapes = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if row == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if record.len() != 1 + 2 * LANDMARKS {
            return Err(Error::invalid(format!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                row + 1,
                record.len(),
                1 + 2 * LANDMARKS
            )));
        }
        let values: Vec<f64> = record
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::invalid(format!("{}: row {}: bad number {f:?}", path.display(), row + 1))
                })
            })
            .collect::<Result<_>>()?;
        let points = values.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        shapes.push(LandmarkShape::new(points)?);
    }
    Ok(shapes)
}

pub fn write_landmark_csv(path: &Path, shapes: &[LandmarkShape]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header = vec!["frame".to_string()];
    for i in 1..=LANDMARKS {
        header.push(format!("x{i}"));
        header.push(format!("y{i}"));
    }
    w.write_record(&header)?;
    for (j, s) in shapes.iter().enumerate() {
        let mut row = vec![j.to_string()];
        for p in &s.points {
            row.push(p[0].to_string());
            row.push(p[1].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
