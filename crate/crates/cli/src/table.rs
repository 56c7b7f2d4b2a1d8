//! Trajectory CSV files: header `t,<component names>`, one row per node.

use std::io::Write;
use std::path::Path;

use gml_bvp::Trajectory;

use crate::CliError;

/// Columns of a trajectory file, `t` first.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_trajectory(traj: &Trajectory, names: &[String]) -> Self {
        let grid = traj.grid();
        let mut header = vec!["t".to_owned()];
        header.extend(names.iter().cloned());
        let rows = traj
            .rows()
            .enumerate()
            .map(|(k, row)| {
                let mut r = Vec::with_capacity(row.len() + 1);
                r.push(grid.time(k));
                r.extend_from_slice(row);
                r
            })
            .collect();
        Self { header, rows }
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[c])
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))
                .map_err(csv_error)?;
        }
        w.flush().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn write_path(&self, path: &Path) -> Result<(), CliError> {
        let file = std::fs::File::create(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        self.write(std::io::BufWriter::new(file))
    }

    pub fn read_path(path: &Path) -> Result<Self, CliError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| CliError::Table(format!("{}: {e}", path.display())))?;
        let header: Vec<String> = r
            .headers()
            .map_err(|e| CliError::Table(format!("{}: {e}", path.display())))?
            .iter()
            .map(str::to_owned)
            .collect();
        if header.first().map(String::as_str) != Some("t") {
            return Err(CliError::Table(format!(
                "{}: first column must be `t`",
                path.display()
            )));
        }
        let mut rows = Vec::new();
        for (i, record) in r.records().enumerate() {
            let record = record.map_err(|e| CliError::Table(format!("{}: {e}", path.display())))?;
            let row = record
                .iter()
                .map(|field| field.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| {
                    CliError::Table(format!("{}: data row {}: {e}", path.display(), i + 1))
                })?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Table(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gml_bvp::Grid;

    #[test]
    fn round_trip_is_exact() {
        let grid = Grid::new(3, 0.3).unwrap();
        let rows = vec![
            vec![0.1, -2.0],
            vec![1.0 / 3.0, 1e-300],
            vec![std::f64::consts::PI, 7.0],
            vec![-0.0, 123456.789],
        ];
        let traj = Trajectory::from_rows(grid, &rows).unwrap();
        let table = Table::from_trajectory(&traj, &["a".into(), "b".into()]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        table.write_path(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,a,b\n"));
        assert!(!text.contains('\r'));
        assert_eq!(Table::read_path(&path).unwrap(), table);
    }
}
