use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    x.to_string()
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: String,
    pub command: &'a str,
    pub status: &'a str,
    pub result_file: String,
    pub config_path: String,
    pub mesh: String,
    pub closure: String,
    pub threads: usize,
    pub wall_time_s: f64,
    pub summary: BTreeMap<String, String>,
    pub config: &'a ExperimentConfig,
}

impl Manifest<'_> {
    pub fn write(&self, path: &Path) -> Result<()> {
        let body = toml::to_string(self).context("serializing manifest")?;
        std::fs::write(path, format!("# dirac-hardy run manifest\n{body}"))
            .with_context(|| format!("writing {}", path.display()))
    }
}

pub fn result_paths(dir: &Path, command: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{command}.csv")), dir.join(format!("{command}.manifest.txt")))
}
