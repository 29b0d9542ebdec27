use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hessquot::Error;

/// A CSV table: a `# config_hash` comment, a header row, then data rows.
pub struct Csv {
    text: String,
    columns: usize,
}

/// 17 significant digits; negative zero prints as zero.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), num)
}

impl Csv {
    pub fn new(hash: &str, header: &[&str]) -> Self {
        let mut text = format!("# config_hash = {hash}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Csv {
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: Vec<String>) {
        assert_eq!(fields.len(), self.columns, "row width must match the header");
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        write_text(path, &self.text)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Plain-text `key: value` report.
#[derive(Default)]
pub struct Report {
    text: String,
}

impl Report {
    pub fn new(title: &str, hash: &str) -> Self {
        let mut r = Report::default();
        r.line(title);
        r.kv("config_hash", hash);
        r
    }

    pub fn line(&mut self, s: &str) {
        self.text.push_str(s);
        self.text.push('\n');
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key}: {value}");
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        write_text(path, &self.text)
    }
}
