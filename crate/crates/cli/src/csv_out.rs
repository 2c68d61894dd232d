//! CSV output with a `#`-prefixed provenance header. Values are written with
//! 17 significant digits so a re-parse reproduces them bit-for-bit.

use std::io::Write;

pub struct CsvDoc {
    comments: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, text: impl Into<String>) {
        self.comments.push(text.into());
    }

    pub fn provenance(&mut self, command: &str, config_text: &str, seed: Option<u64>) {
        use sha2::Digest;
        self.comment(format!("oscbath {}", env!("CARGO_PKG_VERSION")));
        self.comment(format!("command: {command}"));
        let hash = sha2::Sha256::digest(config_text.as_bytes());
        self.comment(format!("config-sha256: {}", hex::encode(hash)));
        if let Some(s) = seed {
            self.comment(format!("seed: {s}"));
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn write_to(&self, w: &mut dyn Write) -> std::io::Result<()> {
        for c in &self.comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Round-trip-safe decimal rendering (17 significant digits).
pub fn cell(v: f64) -> String {
    format!("{v:.16e}")
}
