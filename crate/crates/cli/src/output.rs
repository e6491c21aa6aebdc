//! CSV artifacts and the `report.json` that indexes them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;
use truncfrac::Field;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("cannot serialize the report: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

/// One emitted CSV with the units of its columns.
#[derive(Clone, Debug, Serialize)]
pub struct FileMeta {
    pub file: String,
    pub description: &'static str,
    pub columns: Vec<Column>,
}

pub const LENGTH: &str = "domain length";
pub const TIME: &str = "time";
pub const VALUE: &str = "solution value";
pub const RATE: &str = "1/time";
pub const NONE: &str = "dimensionless";

pub fn column(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

/// Writes CSV files into one directory and records their metadata.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileMeta>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, OutputError> {
        fs::create_dir_all(dir).map_err(|source| OutputError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileMeta] {
        &self.files
    }

    /// Rows of equal length under a header; `columns` supplies both the
    /// header and the units.
    pub fn table(&mut self, file: &str, description: &'static str, columns: Vec<Column>, rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), OutputError> {
        let path = self.dir.join(file);
        let csv_err = |source| OutputError::Csv { path: path.clone(), source };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(columns.iter().map(|c| c.name)).map_err(csv_err)?;
        for row in rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        w.flush().map_err(|source| OutputError::Io { path: path.clone(), source })?;
        self.files.push(FileMeta {
            file: file.to_string(),
            description,
            columns,
        });
        Ok(())
    }

    /// Every grid node as `x,y,value`; nodes outside the domain carry the
    /// exterior data.
    pub fn grid(&mut self, file: &str, description: &'static str, u: &Field) -> Result<(), OutputError> {
        let grid = u.grid().clone();
        let rows = (0..grid.len()).map(|i| {
            let p = grid.node(i);
            vec![p.x, p.y, u.value_at(i)]
        });
        self.table(file, description, vec![column("x", LENGTH), column("y", LENGTH), column("value", VALUE)], rows)
    }

    /// `t,sup_norm` rows.
    pub fn trace(&mut self, file: &str, description: &'static str, times: &[f64], norms: &[f64]) -> Result<(), OutputError> {
        let rows = times.iter().zip(norms).map(|(t, v)| vec![*t, *v]);
        self.table(file, description, vec![column("t", TIME), column("sup_norm", VALUE)], rows)
    }

    pub fn write_json<T: Serialize>(&self, file: &str, value: &T) -> Result<(), OutputError> {
        let path = self.dir.join(file);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(|source| OutputError::Io { path, source })
    }
}
