//! Seeded codebook files.

use crate::output::{manifest, Artifacts};
use crate::settings::Settings;
use anyhow::Result;
use hdqf_core::hdc::CodebookSet;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub factors: usize,
    pub size: usize,
    pub dim: usize,
    /// Redraw repeated rows.
    pub distinct: bool,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self { factors: 2, size: 4, dim: 64, distinct: true, seed: 0 }
    }
}

impl Params {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            factors: s.get("factors", d.factors)?,
            size: s.get("size", d.size)?,
            dim: s.get("dim", d.dim)?,
            distinct: s.get("distinct", d.distinct)?,
            seed: s.get("seed", d.seed)?,
        })
    }
}

pub fn generate(p: &Params) -> Result<CodebookSet> {
    Ok(if p.distinct {
        CodebookSet::generate_distinct(p.seed, p.factors, p.size, p.dim)?
    } else {
        CodebookSet::generate(p.seed, p.factors, p.size, p.dim)?
    })
}

pub fn artifacts(p: &Params) -> Result<Artifacts> {
    let books = generate(p)?;
    let mut bytes = Vec::new();
    books.write_to(&mut bytes)?;
    let mut out = Artifacts::default();
    let name = format!("codebook_F{}_N{}_D{}_seed{}.hdqf", p.factors, p.size, p.dim, p.seed);
    out.add(name.clone(), bytes);
    out.add(
        "manifest.txt",
        manifest(
            "gen-codebook",
            &[
                ("factors".to_string(), p.factors.to_string()),
                ("size".into(), p.size.to_string()),
                ("dim".into(), p.dim.to_string()),
                ("distinct".into(), p.distinct.to_string()),
                ("seed".into(), p.seed.to_string()),
                ("file".into(), name),
            ],
        ),
    );
    Ok(out)
}
