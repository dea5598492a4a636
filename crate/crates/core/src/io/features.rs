//! Feature matrices as CSV: a header of `s{i}_{field}` names, one row
//! per ETRep, comma-separated, LF line endings.

use std::path::Path;

use csv::{ReaderBuilder, Terminator, WriterBuilder};

use crate::error::{Error, Result};
use crate::stats::FeatureMatrix;

fn csv_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn write_feature_csv(matrix: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(&matrix.columns).map_err(|e| csv_err(path, e))?;
    for row in &matrix.rows {
        if row.len() != matrix.columns.len() {
            return Err(Error::LengthMismatch(matrix.columns.len(), row.len()));
        }
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let mut r = ReaderBuilder::new().from_path(path).map_err(|e| csv_err(path, e))?;
    let columns: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .filter(|c| !c.is_empty())
        .collect();
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        if record.len() != columns.len() {
            return Err(Error::Schema {
                pointer: format!("row {}", line + 1),
                message: format!("expected {} fields, found {}", columns.len(), record.len()),
            });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(k, f)| {
                f.parse::<f64>().map_err(|_| Error::Schema {
                    pointer: format!("row {}, column {}", line + 1, columns[k]),
                    message: format!("not a number: {f:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(FeatureMatrix { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::feature_names;

    #[test]
    fn header_names_and_count() {
        let names = feature_names(53);
        assert_eq!(names.len(), 318);
        assert_eq!(
            &names[..7],
            &["s0_cu1", "s0_cu2", "s0_psi", "s0_x", "s0_a", "s0_b", "s1_cu1"]
        );
    }

    #[test]
    fn empty_matrix_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let m = FeatureMatrix {
            columns: feature_names(2),
            rows: vec![],
        };
        write_feature_csv(&m, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert_eq!(read_feature_csv(&path).unwrap(), m);
    }

    #[test]
    fn ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(&path, "a,b\n1,2\n3\n").unwrap();
        assert!(read_feature_csv(&path).is_err());
    }
}
