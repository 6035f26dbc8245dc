//! CSV tables with a provenance comment line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Scientific notation with enough digits to round-trip typical estimates.
pub fn num(x: f64) -> String {
    format!("{x:.10e}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# key=value` lines after the provenance line.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn render(&self, cfg: &ExperimentConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# qtomo version={VERSION} verb={} config_hash={} seed={}",
            cfg.verb.name(),
            cfg.hash(),
            cfg.seed
        );
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn write(&self, dir: &Path, name: &str, cfg: &ExperimentConfig) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(name);
        std::fs::write(&path, self.render(cfg))
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// `M_11, M_12, …` column names, 1-indexed.
pub fn entry_names(prefix: &str, k: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(k * k);
    for i in 1..=k {
        for j in 1..=k {
            out.push(format!("{prefix}_{i}{j}"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::Verb;

    #[test]
    fn render_has_provenance_header_and_lf() {
        let cfg = ExperimentConfig::defaults(Verb::Fig1);
        let mut t = Table::new(["a", "b"]);
        t.note("assumption=test");
        t.push(vec!["1".into(), num(0.5)]);
        let s = t.render(&cfg);
        let lines: Vec<&str> = s.split('\n').collect();
        assert!(lines[0].starts_with("# qtomo version="));
        assert!(lines[0].contains(&cfg.hash()));
        assert_eq!(lines[1], "# assumption=test");
        assert_eq!(lines[2], "a,b");
        assert_eq!(lines[3], "1,5.0000000000e-1");
        assert!(!s.contains('\r'));
        assert_eq!(entry_names("M", 2), ["M_11", "M_12", "M_21", "M_22"]);
    }
}
