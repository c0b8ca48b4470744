//! Artifacts collected in memory and written by one collector.

use anyhow::{Context, Result};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub files: Vec<Artifact>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push(Artifact { name: name.into(), bytes: bytes.into() });
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|a| a.name == name).map(|a| a.bytes.as_slice())
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for a in &self.files {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// RFC-4180 table.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

/// Plain `key = value` lines in the given order.
pub fn manifest(experiment: &str, entries: &[(String, String)]) -> String {
    let mut s = String::new();
    s.push_str(&format!("experiment = {experiment}\n"));
    s.push_str(&format!("hdqf-bench = {}\n", env!("CARGO_PKG_VERSION")));
    for (k, v) in entries {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s
}

/// Float formatting shared by all tables.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12}")
    } else if x.is_nan() {
        "nan".into()
    } else {
        "divergent".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_quotes_fields() {
        let mut t = Table::new(&["a", "b"]);
        t.row(["(0,1)", "x,y"]);
        let s = String::from_utf8(t.finish()).unwrap();
        assert_eq!(s, "a,b\r\n\"(0,1)\",\"x,y\"\r\n");
    }

    #[test]
    fn write_all_creates_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::default();
        a.add("x.txt", "hi");
        a.write_all(&dir.path().join("sub")).unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("sub/x.txt")).unwrap(), "hi");
        assert_eq!(a.get("x.txt"), Some(&b"hi"[..]));
    }
}
