//! CSV tables and JSON summaries.
//!
//! Floats are written with Rust's `Display`, the shortest decimal string
//! that parses back to the same bits, so identical runs give identical
//! files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;

pub const TOOL: &str = "csa-pcs";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

/// Cell formatting for the CSV writers.
pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        format!("{self}")
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
int_cell!(usize, u64, i8, i64);

impl Cell for &str {
    fn cell(&self) -> String {
        self.to_string()
    }
}

impl Cell for String {
    fn cell(&self) -> String {
        self.clone()
    }
}

impl<T: Cell> Cell for Option<T> {
    fn cell(&self) -> String {
        self.as_ref().map(Cell::cell).unwrap_or_default()
    }
}

/// Builds a row from heterogeneous cells.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => {
        vec![$($crate::output::Cell::cell(&$x)),*]
    };
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    experiment: &'a str,
    seed: u64,
    config: &'a RunConfig,
    results: T,
}

/// Writes `<out>/<experiment>.csv` and `<out>/<experiment>.json`; returns
/// both paths.
pub fn write_outputs<T: Serialize>(
    cfg: &RunConfig,
    experiment: &str,
    table: &Table,
    results: T,
) -> std::io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(&cfg.out)?;
    let csv_path = cfg.out.join(format!("{experiment}.csv"));
    let json_path = cfg.out.join(format!("{experiment}.json"));
    table.write(&csv_path)?;
    let summary = Summary {
        tool: TOOL,
        version: VERSION,
        experiment,
        seed: cfg.seed,
        config: cfg,
        results,
    };
    let mut text = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(&json_path, text)?;
    Ok((csv_path, json_path))
}
