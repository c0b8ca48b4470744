//! Decoding targets with one and with two valid factorizations.

use crate::output::{manifest, num, Artifacts, Table};
use crate::settings::Settings;
use crate::svg::{LinePlot, Series};
use anyhow::{bail, ensure, Result};
use hdqf_core::hdc::{
    bits_to_bipolar, brute_force_factorize, solution_counts, CodebookSet, FactorAssignment, Hypervector, SearchMode,
};
use hdqf_core::hdqf::{assignment_pattern, first_peak, modal_decode, optimal_iterations, Mode, Simulation};
use hdqf_core::rng;
use rand::RngCore;
use rayon::prelude::*;
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub factors: usize,
    pub size: usize,
    pub dim: usize,
    pub max_iterations: usize,
    /// Measurements per modal decode.
    pub runs: usize,
    /// Independent decode traces per target.
    pub repeats: usize,
    /// Consecutive correct decodes that count as reaching the answer.
    pub stable: usize,
    pub attempts: usize,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            factors: 4,
            size: 7,
            dim: 10,
            max_iterations: 60,
            runs: 128,
            repeats: 16,
            stable: 3,
            attempts: 64,
            seed: 0,
        }
    }
}

impl Params {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            factors: s.get("factors", d.factors)?,
            size: s.get("size", d.size)?,
            dim: s.get("dim", d.dim)?,
            max_iterations: s.get("max_iterations", d.max_iterations)?,
            runs: s.get("runs", d.runs)?,
            repeats: s.get("repeats", d.repeats)?,
            stable: s.get("stable", d.stable)?,
            attempts: s.get("attempts", d.attempts)?,
            seed: s.get("seed", d.seed)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct TargetTrace {
    pub t: usize,
    pub target: Hypervector,
    pub solutions: Vec<FactorAssignment>,
    pub optimal: usize,
    /// Exact total success probability per iteration.
    pub totals: Vec<f64>,
    pub peak: usize,
    /// `decodes[r][k]`: modal assignment of repeat `r` at iteration `k`.
    pub decodes: Vec<Vec<Option<FactorAssignment>>>,
    /// Per repeat, first iteration starting `stable` consecutive correct decodes.
    pub first_correct: Vec<Option<usize>>,
}

impl TargetTrace {
    /// Median of `first_correct` over repeats that got there (lower middle).
    pub fn median_first_correct(&self) -> Option<usize> {
        let mut v: Vec<usize> = self.first_correct.iter().flatten().copied().collect();
        if v.len() * 2 <= self.first_correct.len() {
            return None;
        }
        v.sort_unstable();
        Some(v[(v.len() - 1) / 2])
    }

    pub fn correct_fraction(&self, k: usize) -> f64 {
        let ok = self.decodes.iter().filter(|d| d[k].as_ref().is_some_and(|a| self.solutions.contains(a))).count();
        ok as f64 / self.decodes.len() as f64
    }

    /// Distinct valid assignments seen as a modal decode anywhere in the trace.
    pub fn modal_solutions(&self) -> BTreeSet<FactorAssignment> {
        self.decodes.iter().flatten().flatten().filter(|a| self.solutions.contains(a)).cloned().collect()
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub params: Params,
    pub books_seed: u64,
    pub attempts: usize,
    pub books: CodebookSet,
    pub targets: Vec<TargetTrace>,
}

/// Codebooks, `(t, target)` picks and the attempts it took.
pub type Found = (CodebookSet, Vec<(usize, Hypervector)>, usize);

/// Codebooks with reachable targets of exactly one and exactly two solutions.
pub fn find_books(p: &Params) -> Result<Found> {
    for attempt in 0..p.attempts {
        let books = CodebookSet::generate_distinct(p.seed.wrapping_add(attempt as u64), p.factors, p.size, p.dim)?;
        let counts = solution_counts(&books);
        let pick = |t| counts.iter().filter(|&(_, &c)| c == t).map(|(b, _)| b.clone()).min();
        if let (Some(a), Some(b)) = (pick(1), pick(2)) {
            return Ok((books, vec![(1, bits_to_bipolar(&a)), (2, bits_to_bipolar(&b))], attempt + 1));
        }
    }
    bail!("no codebooks with t=1 and t=2 targets in {} attempts from seed {}", p.attempts, p.seed)
}

fn trace(p: &Params, books: &CodebookSet, t: usize, target: Hypervector, index: u64) -> Result<TargetTrace> {
    let solutions = brute_force_factorize(&target, books, SearchMode::Exhaustive)?.solutions;
    ensure!(solutions.len() == t, "expected {t} solutions, found {}", solutions.len());
    let patterns: Vec<u64> = solutions.iter().map(|a| assignment_pattern(books, a)).collect();
    let mut sim = Simulation::new(&target, books, Mode::Implicit, 64)?;
    let mut totals = Vec::new();
    let mut dists = Vec::new();
    loop {
        totals.push(patterns.iter().map(|&q| sim.pattern_probability(q)).sum());
        dists.push(sim.outcome_distribution());
        if sim.iteration() == p.max_iterations {
            break;
        }
        sim.step()?;
    }
    let decodes: Vec<Vec<Option<FactorAssignment>>> = (0..p.repeats)
        .into_par_iter()
        .map(|r| {
            dists
                .iter()
                .enumerate()
                .map(|(k, d)| {
                    let seed = rng::substream(p.seed, index, (r * 10_000 + k) as u64).next_u64();
                    modal_decode(books, d, p.runs, seed, k).ok().map(|d| d.assignment)
                })
                .collect()
        })
        .collect();
    let first_correct = decodes
        .iter()
        .map(|d| {
            let ok: Vec<bool> = d.iter().map(|a| a.as_ref().is_some_and(|a| solutions.contains(a))).collect();
            (0..ok.len().saturating_sub(p.stable - 1)).find(|&k| ok[k..k + p.stable].iter().all(|&b| b))
        })
        .collect();
    Ok(TargetTrace {
        t,
        optimal: optimal_iterations(p.size, p.factors, t as u64)?,
        peak: first_peak(&totals).expect("non-empty trace"),
        target,
        solutions,
        totals,
        decodes,
        first_correct,
    })
}

pub fn run(p: &Params) -> Result<Report> {
    ensure!(p.runs > 0 && p.repeats > 0 && p.stable > 0, "runs, repeats and stable must be >= 1");
    let (books, picks, attempts) = find_books(p)?;
    let targets = picks
        .into_iter()
        .enumerate()
        .map(|(i, (t, target))| trace(p, &books, t, target, i as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report { params: p.clone(), books_seed: books.seed(), attempts, books, targets })
}

impl Report {
    pub fn artifacts(&self) -> Artifacts {
        let p = &self.params;
        let mut out = Artifacts::default();
        let mut t = Table::new(&[
            "F",
            "N",
            "D",
            "t",
            "runs",
            "repeats",
            "seed",
            "iteration",
            "total_success_probability",
            "modal_assignment",
            "modal_correct",
            "correct_fraction",
        ]);
        for tr in &self.targets {
            for k in 0..tr.totals.len() {
                let first = &tr.decodes[0][k];
                t.row([
                    p.factors.to_string(),
                    p.size.to_string(),
                    p.dim.to_string(),
                    tr.t.to_string(),
                    p.runs.to_string(),
                    p.repeats.to_string(),
                    p.seed.to_string(),
                    k.to_string(),
                    num(tr.totals[k]),
                    first.as_ref().map_or("none".into(), |a| a.to_string()),
                    first.as_ref().is_some_and(|a| tr.solutions.contains(a)).to_string(),
                    num(tr.correct_fraction(k)),
                ]);
            }
        }
        out.add("non_unique.csv", t.finish());
        let mut s = Table::new(&[
            "F",
            "N",
            "D",
            "t",
            "seed",
            "solutions",
            "optimal_iterations",
            "peak_iteration",
            "median_first_correct",
            "modal_solutions",
        ]);
        for tr in &self.targets {
            let join = |v: Vec<String>| v.join(" ");
            s.row([
                p.factors.to_string(),
                p.size.to_string(),
                p.dim.to_string(),
                tr.t.to_string(),
                p.seed.to_string(),
                join(tr.solutions.iter().map(|a| a.to_string()).collect()),
                tr.optimal.to_string(),
                tr.peak.to_string(),
                tr.median_first_correct().map_or("none".into(), |k| k.to_string()),
                join(tr.modal_solutions().iter().map(|a| a.to_string()).collect()),
            ]);
        }
        out.add("non_unique_summary.csv", s.finish());
        let mut plot = LinePlot::new(format!("F={} N={} D={}", p.factors, p.size, p.dim), "iteration", "probability");
        for tr in &self.targets {
            let pts = |f: &dyn Fn(usize) -> f64| (0..tr.totals.len()).map(|k| (k as f64, f(k))).collect::<Vec<_>>();
            plot.series.push(Series::line(format!("success probability t={}", tr.t), pts(&|k| tr.totals[k])));
            plot.series.push(
                Series::line(format!("correct decode rate t={}", tr.t), pts(&|k| tr.correct_fraction(k))).dashed(),
            );
        }
        out.add("non_unique.svg", plot.render());
        let mut m = vec![
            ("factors".to_string(), p.factors.to_string()),
            ("size".into(), p.size.to_string()),
            ("dim".into(), p.dim.to_string()),
            ("max_iterations".into(), p.max_iterations.to_string()),
            ("runs".into(), p.runs.to_string()),
            ("repeats".into(), p.repeats.to_string()),
            ("stable".into(), p.stable.to_string()),
            ("seed".into(), p.seed.to_string()),
            ("codebook_seed".into(), self.books_seed.to_string()),
            ("codebook_attempts".into(), self.attempts.to_string()),
        ];
        for tr in &self.targets {
            m.push((format!("t{}.target", tr.t), tr.target.to_bits().to_string()));
        }
        out.add("manifest.txt", manifest("non-unique", &m));
        out
    }
}
