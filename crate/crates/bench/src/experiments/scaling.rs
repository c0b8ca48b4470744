//! Peak iteration and brute-force cost against codebook size.

use super::prob_vs_iter::join;
use super::{instance, log_log_slope};
use crate::output::{manifest, num, Artifacts, Table};
use crate::settings::Settings;
use crate::svg::{LinePlot, Series};
use anyhow::{ensure, Result};
use hdqf_core::hdc::{brute_force_factorize, CodebookSet, FactorAssignment, SearchMode};
use hdqf_core::hdqf::{first_peak, optimal_iterations, run_hdqf, HdqfConfig, Iterations, Mode};
use hdqf_core::rng;
use rand::Rng;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub factors: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Dimension of the quantum instances.
    pub dim: usize,
    /// Dimension of the classical instances (large, so collisions are rare).
    pub classical_dim: usize,
    pub classical_trials: usize,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            factors: vec![2, 3],
            sizes: vec![2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16],
            dim: 16,
            classical_dim: 64,
            classical_trials: 200,
            seed: 0,
        }
    }
}

impl Params {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            factors: s.list("factors", &d.factors)?,
            sizes: s.list("sizes", &d.sizes)?,
            dim: s.get("dim", d.dim)?,
            classical_dim: s.get("classical_dim", d.classical_dim)?,
            classical_trials: s.get("classical_trials", d.classical_trials)?,
            seed: s.get("seed", d.seed)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub factors: usize,
    pub size: usize,
    pub instance_seed: u64,
    pub measured_peak: usize,
    pub optimal: usize,
    pub peak_probability: f64,
    pub classical_mean: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Slopes {
    pub factors: usize,
    pub quantum: f64,
    pub classical: f64,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub params: Params,
    pub points: Vec<Point>,
    pub slopes: Vec<Slopes>,
}

/// Mean first-hit comparisons over random planted instances.
pub fn classical_cost(seed: u64, factors: usize, size: usize, dim: usize, trials: usize) -> Result<f64> {
    let costs: Vec<Result<u64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::substream(seed, (factors * 1000 + size) as u64, i as u64);
            let books = CodebookSet::generate(r.gen(), factors, size, dim)?;
            let planted = FactorAssignment((0..factors).map(|_| r.gen_range(0..size)).collect());
            let target = planted.bind_all(&books)?;
            Ok(brute_force_factorize(&target, &books, SearchMode::FirstHit)?.comparisons)
        })
        .collect();
    let mut total = 0u64;
    for c in costs {
        total += c?;
    }
    Ok(total as f64 / trials as f64)
}

pub fn run(p: &Params) -> Result<Report> {
    ensure!(p.classical_trials > 0, "classical_trials must be >= 1");
    let mut points = Vec::new();
    for &f in &p.factors {
        for &n in &p.sizes {
            let instance_seed = p.seed.wrapping_add((f * 1000 + n) as u64);
            let inst = instance(instance_seed, f, n, p.dim, 1)?;
            ensure!(!inst.fallback, "no single-solution instance for F={f} N={n} D={}", p.dim);
            let optimal = optimal_iterations(n, f, 1)?;
            let cfg = HdqfConfig {
                mode: Mode::Implicit,
                iterations: Iterations::Fixed(2 * optimal + 2),
                seed: instance_seed,
                ..HdqfConfig::default()
            };
            let trace = run_hdqf(&inst.target, &inst.books, &cfg)?;
            let totals = trace.totals();
            let measured_peak = first_peak(&totals).expect("non-empty trace");
            points.push(Point {
                factors: f,
                size: n,
                instance_seed,
                measured_peak,
                optimal,
                peak_probability: totals[measured_peak],
                classical_mean: classical_cost(p.seed, f, n, p.classical_dim, p.classical_trials)?,
            });
        }
    }
    let slopes = p
        .factors
        .iter()
        .map(|&f| {
            let mine: Vec<&Point> = points.iter().filter(|q| q.factors == f).collect();
            let q: Vec<(f64, f64)> = mine.iter().map(|q| (q.size as f64, q.measured_peak.max(1) as f64)).collect();
            let c: Vec<(f64, f64)> = mine.iter().map(|q| (q.size as f64, q.classical_mean)).collect();
            Slopes { factors: f, quantum: log_log_slope(&q), classical: log_log_slope(&c) }
        })
        .collect();
    Ok(Report { params: p.clone(), points, slopes })
}

impl Report {
    pub fn artifacts(&self) -> Artifacts {
        let p = &self.params;
        let mut out = Artifacts::default();
        let mut t = Table::new(&[
            "F",
            "N",
            "D",
            "classical_D",
            "classical_trials",
            "seed",
            "instance_seed",
            "quantum_peak_iteration",
            "optimal_iterations",
            "peak_probability",
            "classical_mean_comparisons",
        ]);
        for q in &self.points {
            t.row([
                q.factors.to_string(),
                q.size.to_string(),
                p.dim.to_string(),
                p.classical_dim.to_string(),
                p.classical_trials.to_string(),
                p.seed.to_string(),
                q.instance_seed.to_string(),
                q.measured_peak.to_string(),
                q.optimal.to_string(),
                num(q.peak_probability),
                num(q.classical_mean),
            ]);
        }
        out.add("scaling.csv", t.finish());
        let mut s = Table::new(&["F", "seed", "quantum_slope", "classical_slope"]);
        for sl in &self.slopes {
            s.row([sl.factors.to_string(), p.seed.to_string(), num(sl.quantum), num(sl.classical)]);
        }
        out.add("scaling_slopes.csv", s.finish());
        let mut plot =
            LinePlot::new("Search cost against codebook size", "codebook size N", "iterations / comparisons");
        plot.log_x = true;
        plot.log_y = true;
        for &f in &p.factors {
            let mine: Vec<&Point> = self.points.iter().filter(|q| q.factors == f).collect();
            plot.series.push(Series::line(
                format!("quantum F={f}"),
                mine.iter().map(|q| (q.size as f64, q.measured_peak.max(1) as f64)).collect(),
            ));
            plot.series.push(
                Series::line(
                    format!("classical F={f}"),
                    mine.iter().map(|q| (q.size as f64, q.classical_mean)).collect(),
                )
                .dashed(),
            );
        }
        out.add("scaling.svg", plot.render());
        let mut m = vec![
            ("factors".to_string(), join(&p.factors)),
            ("sizes".into(), join(&p.sizes)),
            ("dim".into(), p.dim.to_string()),
            ("classical_dim".into(), p.classical_dim.to_string()),
            ("classical_trials".into(), p.classical_trials.to_string()),
            ("seed".into(), p.seed.to_string()),
        ];
        for sl in &self.slopes {
            m.push((format!("slope.F{}.quantum", sl.factors), format!("{:.4}", sl.quantum)));
            m.push((format!("slope.F{}.classical", sl.factors), format!("{:.4}", sl.classical)));
        }
        out.add("manifest.txt", manifest("scaling", &m));
        out
    }
}
