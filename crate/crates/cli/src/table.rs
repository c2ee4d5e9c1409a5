//! Tables rendered as CSV (3 significant digits or full precision) and aligned markdown.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    /// Scientific notation, 3 significant digits.
    Sci(f64),
    /// Fixed point with the given number of decimals.
    Fixed(f64, usize),
    /// Observed rate followed by the predicted one in parentheses.
    Rate { observed: Option<f64>, theory: Option<f64> },
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn render(&self, full: bool) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Sci(v) if full => format!("{v:e}"),
            Cell::Sci(v) => sci3(*v),
            Cell::Fixed(v, _) if full => format!("{v}"),
            Cell::Fixed(v, d) => format!("{v:.d$}"),
            Cell::Rate { observed, theory } => {
                let obs = match observed {
                    Some(r) if full => format!("{r}"),
                    Some(r) => format!("{r:.2}"),
                    None => "--".into(),
                };
                match theory {
                    Some(t) => format!("{obs} ({t:.2})"),
                    None => format!("{obs} (--)"),
                }
            }
            Cell::Empty => String::new(),
        }
    }

    fn is_numeric(&self) -> bool {
        !matches!(self, Cell::Text(_) | Cell::Empty)
    }
}

/// `2.62e-3` style.
pub fn sci3(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.2e}")
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub caption: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(caption: impl Into<String>, header: Vec<String>) -> Self {
        Self { caption: caption.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, full: bool) -> io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render(full)))?;
        }
        let bytes = w.into_inner().map_err(|e| io::Error::new(io::ErrorKind::Other, e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn to_markdown(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|c| c.render(false)).collect()).collect();
        let ncol = self.header.len();
        let mut width: Vec<usize> = self.header.iter().map(|h| h.chars().count().max(3)).collect();
        for row in &cells {
            for (k, c) in row.iter().enumerate() {
                width[k] = width[k].max(c.chars().count());
            }
        }
        let numeric: Vec<bool> = (0..ncol).map(|k| self.rows.iter().any(|r| r[k].is_numeric())).collect();
        let line = |items: &[String]| -> String {
            let parts: Vec<String> = items
                .iter()
                .enumerate()
                .map(|(k, s)| if numeric[k] { format!("{s:>w$}", w = width[k]) } else { format!("{s:<w$}", w = width[k]) })
                .collect();
            format!("| {} |", parts.join(" | "))
        };
        let mut out = String::new();
        if !self.caption.is_empty() {
            out.push_str(&self.caption);
            out.push_str("\n\n");
        }
        out.push_str(&line(&self.header));
        out.push('\n');
        let rule: Vec<String> = (0..ncol)
            .map(|k| if numeric[k] { format!("{}:", "-".repeat(width[k] - 1)) } else { "-".repeat(width[k]) })
            .collect();
        out.push_str(&format!("| {} |\n", rule.join(" | ")));
        for row in &cells {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    fn render(&self, format: Format) -> io::Result<String> {
        match format {
            Format::Csv => self.to_csv(false),
            Format::Md => Ok(self.to_markdown()),
        }
    }
}

/// `out.csv` -> `out.full.csv`; other names get `.full.csv` appended.
pub fn full_sibling(path: &Path) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => path.with_extension("full.csv"),
        _ => {
            let mut s = path.as_os_str().to_owned();
            s.push(".full.csv");
            PathBuf::from(s)
        }
    }
}

/// Writes one table to stdout (`None` or `-`) or to a file; CSV files get a
/// full-precision sibling.
pub fn emit(table: &Table, format: Format, output: Option<&str>) -> io::Result<()> {
    let text = table.render(format)?;
    match output {
        None | Some("-") => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
        Some(path) => write_file(table, format, Path::new(path), &text),
    }
}

/// Writes `<dir>/<name>.<ext>`, creating the directory.
pub fn emit_into(table: &Table, format: Format, dir: &Path, name: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Md => "md",
    };
    let path = dir.join(format!("{name}.{ext}"));
    write_file(table, format, &path, &table.render(format)?)?;
    Ok(path)
}

fn write_file(table: &Table, format: Format, path: &Path, text: &str) -> io::Result<()> {
    fs::write(path, text)?;
    if format == Format::Csv {
        fs::write(full_sibling(path), table.to_csv(true)?)?;
    }
    Ok(())
}
