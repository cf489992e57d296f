use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use parcelingam::stats::{center_in_place, DataMatrix};

use crate::CliError;

/// A centered data matrix with the column names it was read with.
#[derive(Debug, Clone)]
pub struct InputData {
    pub names: Vec<String>,
    pub matrix: DataMatrix,
    pub warnings: Vec<String>,
}

/// Reads a CSV with a header row and one sample per row. With `transpose`,
/// every row is a variable instead: its name followed by its samples, no
/// header. Columns are centered on the way in.
pub fn read_data(path: &Path, transpose: bool) -> Result<InputData, CliError> {
    let shown = path.display().to_string();
    let parse_err = |line: u64, column: usize, message: String| CliError::Parse {
        path: shown.clone(),
        line,
        column,
        message,
    };
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(!transpose)
        .trim(csv::Trim::All)
        .from_reader(file);

    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        let message = match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                format!("expected {expected_len} fields, found {len}")
            }
            _ => e.to_string(),
        };
        parse_err(line, 1, message)
    };

    let mut names: Vec<String> = if transpose {
        Vec::new()
    } else {
        reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect()
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let skip = usize::from(transpose);
        if transpose {
            names.push(record.get(0).unwrap_or_default().to_string());
        }
        let mut values = Vec::with_capacity(record.len());
        for (k, field) in record.iter().enumerate().skip(skip) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, k + 1, format!("`{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, k + 1, format!("`{field}` is not finite")));
            }
            values.push(v);
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(parse_err(1, 1, "no data rows".into()));
    }

    let columns: Vec<Vec<f64>> = if transpose {
        rows
    } else {
        (0..names.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
    };
    let mut warnings = Vec::new();
    let mut centered = columns;
    for (name, col) in names.iter().zip(centered.iter_mut()) {
        center_in_place(col);
        if col.iter().all(|&v| v.abs() < 1e-12) {
            let msg = format!("variable `{name}` is constant");
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let matrix = DataMatrix::with_default_ids(centered).map_err(|e| CliError::Invalid(format!("{shown}: {e}")))?;
    Ok(InputData { names, matrix, warnings })
}

/// Writes samples as rows under a header of variable names.
pub fn write_data_csv(path: &Path, names: &[String], x: &DataMatrix) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| CliError::io(path, e);
    writeln!(w, "{}", names.join(",")).map_err(io)?;
    for s in 0..x.n_samples() {
        let line: Vec<String> = x.rows().iter().map(|r| format!("{}", r[s])).collect();
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_and_centers() {
        let f = file("a,b\n1,10\n2,20\n3,30\n");
        let d = read_data(f.path(), false).unwrap();
        assert_eq!(d.names, ["a", "b"]);
        assert_eq!(d.matrix.row(0), [-1.0, 0.0, 1.0]);
        assert_eq!(d.matrix.row(1), [-10.0, 0.0, 10.0]);
    }

    #[test]
    fn transposed_input() {
        let f = file("a,1,2,3\nb,3,2,4\n");
        let d = read_data(f.path(), true).unwrap();
        assert_eq!(d.names, ["a", "b"]);
        assert_eq!(d.matrix.n_samples(), 3);
    }

    #[test]
    fn bad_cell_reports_position() {
        let f = file("a,b\n1,2\n3,x\n4,5\n");
        match read_data(f.path(), false) {
            Err(CliError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_and_empty() {
        let f = file("a,b\n1,2\n3\n4,5\n");
        assert!(matches!(read_data(f.path(), false), Err(CliError::Parse { line: 3, .. })));
        let f = file("a,b\n");
        let err = read_data(f.path(), false).unwrap_err();
        assert!(err.to_string().contains("no data rows"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn constant_column_warns() {
        let f = file("a,b\n1,5\n2,5\n3,5\n");
        let d = read_data(f.path(), false).unwrap();
        assert_eq!(d.warnings.len(), 1);
    }

    #[test]
    fn round_trip() {
        let x = DataMatrix::with_default_ids(vec![vec![-0.5, 0.0, 0.5], vec![1.25, -2.5, 1.25]]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_data_csv(f.path(), &["p".into(), "q".into()], &x).unwrap();
        let back = read_data(f.path(), false).unwrap();
        assert_eq!(back.matrix.rows(), x.rows());
    }
}
