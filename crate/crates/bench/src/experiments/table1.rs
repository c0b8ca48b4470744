//! Quantum iteration count next to resonator statistics.

use crate::output::{manifest, num, Artifacts, Table};
use crate::settings::Settings;
use anyhow::{anyhow, Result};
use hdqf_core::hdqf::optimal_iterations;
use hdqf_core::resonator::{resonator_stats, Init, ResonatorStats};

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    /// `(D, F, N)` rows.
    pub rows: Vec<(usize, usize, usize)>,
    pub trials: usize,
    pub max_iters: usize,
    pub init: Init,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            rows: vec![(100, 3, 10), (100, 4, 10), (25, 3, 5), (25, 4, 5)],
            trials: 500,
            max_iters: 5000,
            init: Init::Random,
            seed: 0,
        }
    }
}

/// `D:F:N` triples separated by commas.
fn parse_rows(s: &str) -> Result<Vec<(usize, usize, usize)>> {
    s.split(',')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| {
            let v: Vec<usize> = r.split(':').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>()?;
            match v[..] {
                [d, f, n] => Ok((d, f, n)),
                _ => Err(anyhow!("row {r:?} is not D:F:N")),
            }
        })
        .collect()
}

impl Params {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            rows: s.raw("rows").map(parse_rows).transpose()?.unwrap_or(d.rows),
            trials: s.get("trials", d.trials)?,
            max_iters: s.get("max_iters", d.max_iters)?,
            init: s.get("init", d.init)?,
            seed: s.get("seed", d.seed)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub dim: usize,
    pub factors: usize,
    pub size: usize,
    pub quantum_steps: usize,
    pub resonator: ResonatorStats,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub params: Params,
    pub rows: Vec<Row>,
}

pub fn run(p: &Params) -> Result<Report> {
    let rows = p
        .rows
        .iter()
        .map(|&(d, f, n)| {
            Ok(Row {
                dim: d,
                factors: f,
                size: n,
                quantum_steps: optimal_iterations(n, f, 1)?,
                resonator: resonator_stats(d, f, n, p.trials, p.max_iters, p.seed, p.init)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report { params: p.clone(), rows })
}

impl Report {
    pub fn artifacts(&self) -> Artifacts {
        let p = &self.params;
        let mut t = Table::new(&[
            "D",
            "F",
            "N",
            "trials",
            "max_iters",
            "init",
            "seed",
            "quantum_N_S",
            "resonator_P_s",
            "resonator_N_I",
            "resonator_P_f",
            "resonator_N_S",
            "resonator_P_wrong",
        ]);
        for r in &self.rows {
            let s = &r.resonator;
            t.row([
                r.dim.to_string(),
                r.factors.to_string(),
                r.size.to_string(),
                p.trials.to_string(),
                p.max_iters.to_string(),
                p.init.to_string(),
                p.seed.to_string(),
                r.quantum_steps.to_string(),
                num(s.p_s),
                num(s.n_i),
                num(s.p_f),
                num(s.n_s),
                num(s.p_wrong),
            ]);
        }
        let mut out = Artifacts::default();
        out.add("table1.csv", t.finish());
        let rows: Vec<String> = p.rows.iter().map(|(d, f, n)| format!("{d}:{f}:{n}")).collect();
        out.add(
            "manifest.txt",
            manifest(
                "table1",
                &[
                    ("rows".to_string(), rows.join(",")),
                    ("trials".into(), p.trials.to_string()),
                    ("max_iters".into(), p.max_iters.to_string()),
                    ("init".into(), p.init.to_string()),
                    ("seed".into(), p.seed.to_string()),
                ],
            ),
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_setting() {
        assert_eq!(parse_rows("25:3:5, 100:4:10").unwrap(), vec![(25, 3, 5), (100, 4, 10)]);
        assert!(parse_rows("25:3").is_err());
        assert!(parse_rows("a:b:c").is_err());
    }
}
