//! Grover search over the product of codebooks.
//!
//! Two engines share one interface. Circuit mode runs the full register
//! layout (factors, ancilla, output line) through the gate-level oracle.
//! Implicit mode keeps amplitudes only on the prepared support and applies
//! the oracle as a phase flip, which reaches instances far beyond the qubit
//! cap.

mod oracle;
mod support;

pub use oracle::{build_oracle, oracle_gate_count, OracleCircuit};
pub use support::SupportState;

use crate::error::{Error, Result};
use crate::hdc::{brute_force_factorize, CodebookSet, FactorAssignment, Hypervector, SearchMode};
use crate::qsim::{
    multiplicity_amplitudes, sample_histogram, Circuit, Gate, Op, RegisterLayout, Span, SparseAxis, StateVector,
    DEFAULT_QUBIT_CAP,
};
use crate::rng;
use num_complex::Complex64;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Circuit,
    Implicit,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circuit" => Ok(Mode::Circuit),
            "implicit" => Ok(Mode::Implicit),
            _ => Err(Error::InvalidParameter(format!("unknown mode {s:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Circuit => "circuit",
            Mode::Implicit => "implicit",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Iterations {
    /// First peak for the prepared weight on the solutions
    /// ([`iterations_for_weight`]); `t = 1` if there are none.
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HdqfConfig {
    pub mode: Mode,
    pub iterations: Iterations,
    /// Shots per histogram snapshot.
    pub shots: usize,
    /// Independent single-shot repetitions for modal decoding.
    pub runs: usize,
    pub seed: u64,
    pub qubit_cap: usize,
    /// Iterations at which to record a measurement histogram.
    pub snapshots: Vec<usize>,
}

impl Default for HdqfConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Implicit,
            iterations: Iterations::Auto,
            shots: 1024,
            runs: 25,
            seed: 0,
            qubit_cap: DEFAULT_QUBIT_CAP,
            snapshots: Vec::new(),
        }
    }
}

impl HdqfConfig {
    fn validate(&self) -> Result<()> {
        if self.shots == 0 || self.runs == 0 {
            return Err(Error::InvalidParameter("shots and runs must be >= 1".into()));
        }
        Ok(())
    }
}

/// First-peak iteration of the closed form: nearest integer to `π/(4θ) − 1/2`,
/// `θ = asin √(t/N^F)`.
pub fn optimal_iterations(size: usize, factors: usize, t: u64) -> Result<usize> {
    let space = (size as f64).powi(factors as i32);
    if t == 0 || t as f64 > space {
        return Err(Error::InvalidParameter(format!("t = {t} outside [1, {space}]")));
    }
    let theta = (t as f64 / space).sqrt().asin();
    Ok((PI / (4.0 * theta) - 0.5).round().max(0.0) as usize)
}

/// First-peak iteration when the prepared state puts weight `p0` on the
/// marked set. Equals [`optimal_iterations`] for distinct-row codebooks, where
/// `p0 = t/N^F`.
pub fn iterations_for_weight(p0: f64) -> Result<usize> {
    if !(p0 > 0.0 && p0 <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("marked weight {p0} outside (0, 1]")));
    }
    let theta = p0.min(1.0).sqrt().asin();
    Ok((PI / (4.0 * theta) - 0.5).round().max(0.0) as usize)
}

/// `sin²((2k+1)·asin √(t/S))`.
pub fn closed_form_success(k: usize, space: f64, t: f64) -> f64 {
    let theta = (t / space).sqrt().asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// First local maximum; a plateau resolves to its first iteration. Falls back
/// to the first global maximum for a trace that never decreases.
pub fn first_peak(values: &[f64]) -> Option<usize> {
    const TOL: f64 = 1e-12;
    let mut start = 0;
    for k in 0..values.len().saturating_sub(1) {
        if values[k + 1] > values[k] + TOL {
            start = k + 1;
        } else if values[k + 1] < values[k] - TOL {
            return Some(start);
        }
    }
    values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if v <= b + TOL => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Per-factor weighted superpositions of the codebook rows, laid side by side
/// over the factor registers.
pub fn factor_axis(books: &CodebookSet) -> Result<SparseAxis> {
    check_patterns(books)?;
    let d = books.dim();
    let parts: Vec<SparseAxis> = (0..books.factors())
        .map(|f| {
            let entries = multiplicity_amplitudes(&books.row_patterns(f))
                .into_iter()
                .map(|(r, w)| (r, Complex64::new(w, 0.0)))
                .collect();
            SparseAxis::new(Span::new(f * d, d), entries)
        })
        .collect();
    SparseAxis::product(&parts)
}

fn check_patterns(books: &CodebookSet) -> Result<()> {
    if books.factors() * books.dim() > 64 {
        return Err(Error::InvalidParameter("register patterns need F·D <= 64".into()));
    }
    Ok(())
}

fn check_layout(state: &StateVector, books: &CodebookSet) -> Result<()> {
    let expect = RegisterLayout::factorization(books.factors(), books.dim())?;
    if state.layout() != &expect {
        return Err(Error::LayoutMismatch(format!(
            "state layout does not match F={}, D={}",
            books.factors(),
            books.dim()
        )));
    }
    Ok(())
}

/// Inject every codebook superposition and put the output line in `|−⟩`.
pub fn prepare_all_factors(state: &mut StateVector, books: &CodebookSet) -> Result<()> {
    check_layout(state, books)?;
    check_patterns(books)?;
    for op in preparation_ops(books)? {
        state.apply_op(&op)?;
    }
    Ok(())
}

pub fn preparation_ops(books: &CodebookSet) -> Result<Vec<Op>> {
    let layout = RegisterLayout::factorization(books.factors(), books.dim())?;
    let out = layout.output().expect("factorization layout");
    let mut ops: Vec<Op> =
        (0..books.factors()).map(|f| Op::Inject { span: layout.factor(f), rows: books.row_patterns(f) }).collect();
    ops.push(Op::Gate(Gate::X(out)));
    ops.push(Op::Gate(Gate::H(out)));
    Ok(ops)
}

/// Oracle circuit followed by the reflection about the prepared state.
pub fn grover_iteration(state: &mut StateVector, oracle: &OracleCircuit, axis: &SparseAxis) -> Result<()> {
    oracle.apply(state)?;
    state.reflect_about(axis)
}

/// Preparation plus `iterations` Grover rounds, as one circuit.
pub fn grover_circuit(books: &CodebookSet, target: &Hypervector, iterations: usize) -> Result<Circuit> {
    let oracle = build_oracle(target, books.factors())?;
    let axis = Arc::new(factor_axis(books)?);
    let layout = oracle.layout();
    let mut c = Circuit::new(layout.n_qubits());
    preparation_ops(books)?.into_iter().for_each(|op| c.push(op));
    for _ in 0..iterations {
        c.extend(oracle.gates().iter().cloned());
        c.push(Op::Reflect(axis.clone()));
    }
    Ok(c)
}

/// Codebook indices for a factor-register pattern; first matching row per
/// factor, `None` if some register holds no codebook row.
pub fn decode_pattern(books: &CodebookSet, pattern: u64) -> Option<FactorAssignment> {
    let d = books.dim();
    let m = if d >= 64 { u64::MAX } else { (1u64 << d) - 1 };
    (0..books.factors())
        .map(|f| {
            let p = pattern >> (f * d) & m;
            books.row_patterns(f).iter().position(|&r| r == p)
        })
        .collect::<Option<Vec<_>>>()
        .map(FactorAssignment)
}

/// Register pattern of an assignment.
pub fn assignment_pattern(books: &CodebookSet, a: &FactorAssignment) -> u64 {
    let d = books.dim();
    a.indices().iter().enumerate().fold(0, |acc, (f, &i)| acc | books.row_patterns(f)[i] << (f * d))
}

enum Engine {
    Circuit { state: StateVector, oracle: OracleCircuit, axis: SparseAxis },
    Implicit(SupportState),
}

/// A prepared search that can be stepped one Grover iteration at a time.
pub struct Simulation {
    engine: Engine,
    factors_span: Span,
    dim: usize,
    iteration: usize,
}

impl Simulation {
    pub fn new(target: &Hypervector, books: &CodebookSet, mode: Mode, qubit_cap: usize) -> Result<Self> {
        if target.dim() != books.dim() {
            return Err(Error::DimensionMismatch { expected: books.dim(), actual: target.dim() });
        }
        check_patterns(books)?;
        let oracle = build_oracle(target, books.factors())?;
        let engine = match mode {
            Mode::Circuit => {
                let mut state = StateVector::new_zero_with_cap(oracle.layout(), qubit_cap)?;
                prepare_all_factors(&mut state, books)?;
                Engine::Circuit { state, axis: factor_axis(books)?, oracle }
            }
            Mode::Implicit => Engine::Implicit(SupportState::prepare(books, oracle.target_pattern())?),
        };
        Ok(Self { engine, factors_span: Span::new(0, books.factors() * books.dim()), dim: books.dim(), iteration: 0 })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn step(&mut self) -> Result<()> {
        match &mut self.engine {
            Engine::Circuit { state, oracle, axis } => grover_iteration(state, oracle, axis)?,
            Engine::Implicit(s) => s.iterate(),
        }
        self.iteration += 1;
        Ok(())
    }

    /// Probability that the factor registers read `pattern`.
    pub fn pattern_probability(&self, pattern: u64) -> f64 {
        match &self.engine {
            Engine::Circuit { state, .. } => state.probability_of(self.factors_span, pattern).unwrap(),
            Engine::Implicit(s) => {
                let d = self.dim;
                let m = if d >= 64 { u64::MAX } else { (1u64 << d) - 1 };
                let parts: Vec<u64> = (0..self.factors_span.len / d).map(|f| pattern >> (f * d) & m).collect();
                s.index_of_patterns(&parts).map_or(0.0, |i| s.probability(i))
            }
        }
    }

    /// Nonzero factor-register outcomes with their probabilities, by pattern.
    pub fn outcome_distribution(&self) -> Vec<(u64, f64)> {
        match &self.engine {
            Engine::Circuit { state, .. } => state
                .span_distribution(self.factors_span)
                .unwrap()
                .into_iter()
                .enumerate()
                .filter(|&(_, p)| p > 0.0)
                .map(|(i, p)| (i as u64, p))
                .collect(),
            Engine::Implicit(s) => {
                let mut v: Vec<(u64, f64)> = (0..s.len()).map(|i| (s.register_pattern(i), s.probability(i))).collect();
                v.sort_by_key(|e| e.0);
                v
            }
        }
    }

    /// `1 − P(ancilla = 0…0)`; zero in implicit mode.
    pub fn ancilla_leak(&self) -> f64 {
        match &self.engine {
            Engine::Circuit { state, .. } => {
                let anc = state.layout().ancilla().expect("factorization layout");
                1.0 - state.probability_of(anc, 0).unwrap()
            }
            Engine::Implicit(_) => 0.0,
        }
    }

    pub fn state(&self) -> Option<&StateVector> {
        match &self.engine {
            Engine::Circuit { state, .. } => Some(state),
            Engine::Implicit(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Probability of each entry of [`RunTrace::solutions`].
    pub per_solution: Vec<f64>,
    /// Probability of measuring any valid factorization.
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub mode: Mode,
    pub solutions: Vec<FactorAssignment>,
    pub records: Vec<IterationRecord>,
    pub peak_iteration: Option<usize>,
    /// `(iteration, histogram over factor-register patterns)`.
    pub snapshots: Vec<(usize, BTreeMap<u64, usize>)>,
    /// Largest `1 − P(ancilla = 0)` seen after any iteration.
    pub max_ancilla_leak: f64,
}

impl RunTrace {
    pub fn totals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.total).collect()
    }

    pub fn max_success(&self) -> f64 {
        self.records.iter().map(|r| r.total).fold(0.0, f64::max)
    }

    /// Columns `iteration,assignment_id,probability,total_success_probability`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iteration,assignment_id,probability,total_success_probability")?;
        for r in &self.records {
            for (a, p) in self.solutions.iter().zip(&r.per_solution) {
                writeln!(w, "{},\"{}\",{:.15},{:.15}", r.iteration, a, p, r.total)?;
            }
        }
        Ok(())
    }
}

/// Valid assignments of `target`, and the distinct register patterns they map to.
fn solutions_of(target: &Hypervector, books: &CodebookSet) -> Result<(Vec<FactorAssignment>, Vec<u64>)> {
    let sols = brute_force_factorize(target, books, SearchMode::Exhaustive)?.solutions;
    let patterns: BTreeSet<u64> = sols.iter().map(|a| assignment_pattern(books, a)).collect();
    Ok((sols, patterns.into_iter().collect()))
}

fn resolve_iterations(it: Iterations, books: &CodebookSet, sim: &Simulation, distinct: &[u64]) -> Result<usize> {
    match it {
        Iterations::Fixed(k) => Ok(k),
        Iterations::Auto if distinct.is_empty() => optimal_iterations(books.size(), books.factors(), 1),
        Iterations::Auto => iterations_for_weight(distinct.iter().map(|&p| sim.pattern_probability(p)).sum()),
    }
}

/// Prepare, then run `(oracle, diffusion)^k`, recording exact probabilities of
/// every valid assignment after each iteration.
pub fn run_hdqf(target: &Hypervector, books: &CodebookSet, config: &HdqfConfig) -> Result<RunTrace> {
    config.validate()?;
    let (solutions, distinct) = solutions_of(target, books)?;
    let sol_patterns: Vec<u64> = solutions.iter().map(|a| assignment_pattern(books, a)).collect();
    let mut sim = Simulation::new(target, books, config.mode, config.qubit_cap)?;
    let k_max = resolve_iterations(config.iterations, books, &sim, &distinct)?;
    let mut records = Vec::with_capacity(k_max + 1);
    let mut snapshots = Vec::new();
    let mut leak: f64 = 0.0;
    loop {
        let k = sim.iteration();
        let probs: BTreeMap<u64, f64> = distinct.iter().map(|&p| (p, sim.pattern_probability(p))).collect();
        records.push(IterationRecord {
            iteration: k,
            per_solution: sol_patterns.iter().map(|p| probs[p]).collect(),
            total: probs.values().sum(),
        });
        leak = leak.max(sim.ancilla_leak());
        if config.snapshots.contains(&k) {
            let dist = sim.outcome_distribution();
            let weights: Vec<f64> = dist.iter().map(|e| e.1).collect();
            let mut r = rng::substream(config.seed, 0, k as u64);
            let hist =
                sample_histogram(&weights, config.shots, &mut r).into_iter().map(|(i, c)| (dist[i].0, c)).collect();
            snapshots.push((k, hist));
        }
        if k == k_max {
            break;
        }
        sim.step()?;
    }
    let totals: Vec<f64> = records.iter().map(|r| r.total).collect();
    Ok(RunTrace {
        mode: config.mode,
        solutions,
        peak_iteration: first_peak(&totals),
        records,
        snapshots,
        max_ancilla_leak: leak,
    })
}

/// Result of repeated single-shot measurement with modal decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct Decode {
    /// Most frequent decoded assignment; ties go to the smallest.
    pub assignment: FactorAssignment,
    /// Share of all runs that produced the modal assignment.
    pub frequency: f64,
    pub counts: BTreeMap<FactorAssignment, usize>,
    /// Runs whose measurement matched no codebook row.
    pub discarded: usize,
    pub runs: usize,
    pub iterations: usize,
}

/// `runs` single measurements drawn from a factor-register distribution,
/// each on its own RNG stream, decoded to assignments and reduced to the mode.
pub fn modal_decode(
    books: &CodebookSet,
    distribution: &[(u64, f64)],
    runs: usize,
    seed: u64,
    iterations: usize,
) -> Result<Decode> {
    let weights: Vec<f64> = distribution.iter().map(|e| e.1).collect();
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cdf.push(acc);
    }
    let mut counts: BTreeMap<FactorAssignment, usize> = BTreeMap::new();
    let mut discarded = 0;
    for run in 0..runs {
        let mut r = rng::stream(seed, run as u64);
        let u = r.gen::<f64>() * acc;
        let i = cdf.partition_point(|&c| c <= u).min(weights.len() - 1);
        match decode_pattern(books, distribution[i].0) {
            Some(a) => *counts.entry(a).or_default() += 1,
            None => discarded += 1,
        }
    }
    let (assignment, &n) = counts
        .iter()
        .fold(None, |best: Option<(&FactorAssignment, &usize)>, e| match best {
            Some(b) if b.1 >= e.1 => Some(b),
            _ => Some(e),
        })
        .ok_or(Error::NoMatchedMeasurement)?;
    Ok(Decode {
        assignment: assignment.clone(),
        frequency: n as f64 / runs as f64,
        discarded,
        runs,
        iterations,
        counts,
    })
}

/// Simulation advanced to the configured (default: optimal) iteration.
pub fn evolve(target: &Hypervector, books: &CodebookSet, config: &HdqfConfig) -> Result<Simulation> {
    config.validate()?;
    let mut sim = Simulation::new(target, books, config.mode, config.qubit_cap)?;
    let k = match config.iterations {
        Iterations::Fixed(k) => k,
        Iterations::Auto => {
            let (_, distinct) = solutions_of(target, books)?;
            resolve_iterations(Iterations::Auto, books, &sim, &distinct)?
        }
    };
    for _ in 0..k {
        sim.step()?;
    }
    Ok(sim)
}

/// Run to the configured (default: optimal) iteration, measure `runs` times
/// and return the modal assignment.
pub fn factorize(target: &Hypervector, books: &CodebookSet, config: &HdqfConfig) -> Result<Decode> {
    let sim = evolve(target, books, config)?;
    modal_decode(books, &sim.outcome_distribution(), config.runs, config.seed, sim.iteration())
}
