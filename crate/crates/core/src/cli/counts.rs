//! Long-format counts files: one `k_idler,l_idler,k_signal,l_signal,count` row
//! per projection, with `# key = value` metadata lines.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::inference::CountMatrix;
use crate::model::{ModePair, ModeSpace};

use super::config::Convention;
use super::CliError;

pub const COLUMNS: &str = "k_idler,l_idler,k_signal,l_signal,count";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountRow {
    pub idler: ModePair,
    pub signal: ModePair,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountsFile {
    /// Known separation, in the units of `convention`.
    pub separation: Option<f64>,
    pub convention: Option<Convention>,
    pub duration: Option<f64>,
    pub rows: Vec<CountRow>,
}

impl CountsFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut file = CountsFile {
            separation: None,
            convention: None,
            duration: None,
            rows: Vec::new(),
        };
        let mut seen = HashSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let at = || format!("line {}", no + 1);
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once('=') {
                    let v = v.trim();
                    let num = || v.parse::<f64>().map_err(|e| format!("{}: bad {}: {e}", at(), k.trim()));
                    match k.trim() {
                        "separation" => file.separation = Some(num()?),
                        "duration" => file.duration = Some(num()?),
                        "convention" => file.convention = Some(v.parse().map_err(|e| format!("{}: {e}", at()))?),
                        _ => {}
                    }
                }
                continue;
            }
            if line.starts_with("k_idler") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(format!("{}: expected 5 columns, found {}", at(), fields.len()));
            }
            let mut v = [0u64; 5];
            for (slot, f) in v.iter_mut().zip(&fields) {
                *slot = f
                    .parse::<u64>()
                    .map_err(|_| format!("{}: '{f}' is not a non-negative integer", at()))?;
            }
            let row = CountRow {
                idler: ModePair::new(v[0] as usize, v[1] as usize),
                signal: ModePair::new(v[2] as usize, v[3] as usize),
                count: v[4],
            };
            if !seen.insert((row.idler, row.signal)) {
                return Err(format!("{}: duplicate mode tuple", at()));
            }
            file.rows.push(row);
        }
        if file.rows.is_empty() {
            return Err("no count rows".into());
        }
        if let Some(d) = file.duration {
            if !(d.is_finite() && d >= 0.0) {
                return Err(format!("duration must be non-negative, got {d}"));
            }
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    /// Lays the rows out over `space`; projections absent from the file count zero.
    pub fn to_count_matrix(&self, space: &ModeSpace) -> Result<CountMatrix, String> {
        let mut counts = vec![0u64; space.len()];
        for row in &self.rows {
            let pos = space.position(row.idler, row.signal).ok_or_else(|| {
                format!(
                    "mode tuple ({},{},{},{}) is outside the configured mode space",
                    row.idler.k, row.idler.l, row.signal.k, row.signal.l
                )
            })?;
            counts[pos] = row.count;
        }
        CountMatrix::new(counts, space.rows(), space.cols()).map_err(|e| e.to_string())
    }

    pub fn from_counts(space: &ModeSpace, counts: &[u64]) -> Self {
        let rows = space
            .outcomes()
            .zip(counts)
            .map(|((idler, signal), &count)| CountRow { idler, signal, count })
            .collect();
        CountsFile {
            separation: None,
            convention: None,
            duration: None,
            rows,
        }
    }

    pub fn render(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in header {
            let _ = writeln!(out, "# {k} = {v}");
        }
        if let Some(c) = self.convention {
            let _ = writeln!(out, "# convention = {c}");
        }
        if let Some(s) = self.separation {
            let _ = writeln!(out, "# separation = {s}");
        }
        if let Some(d) = self.duration {
            let _ = writeln!(out, "# duration = {d}");
        }
        let _ = writeln!(out, "{COLUMNS}");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.idler.k, r.idler.l, r.signal.k, r.signal.l, r.count);
        }
        out
    }
}
