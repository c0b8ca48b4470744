//! Thermal relaxation on circuit execution.
//!
//! Steps run one after another. Every step advances the wall clock by its
//! duration; touched qubits relax for that duration after the step, idle
//! qubits relax for the same time. Idle relaxation is applied lazily, the
//! next time a qubit is touched and once more at the end, which is exact
//! because relaxation channels on one qubit compose additively in time and
//! commute with operations on other qubits.

mod channel;

pub use channel::{depolarizing_channel, relaxation_channel, Channel, Durations, NoiseParams};

use crate::error::{Error, Result};
use crate::qsim::{sample_histogram, Circuit, Gate, Op, RegisterLayout, Span, StateVector};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

/// Largest register the density-matrix reference accepts.
pub const DENSITY_QUBIT_CAP: usize = 10;

/// A circuit together with what is needed to time it and read it out.
#[derive(Clone, Debug)]
pub struct NoisePlan {
    pub circuit: Circuit,
    /// Span whose distribution is reported.
    pub readout: Span,
    /// Codebook size `N`, used to time reflections.
    pub rows: usize,
}

trait Backend {
    fn op(&mut self, op: &Op) -> Result<()>;
    fn channel(&mut self, q: usize, ch: &Channel) -> Result<()>;
}

fn execute<B: Backend>(backend: &mut B, plan: &NoisePlan, params: &NoiseParams) -> Result<()> {
    params.validate()?;
    let n = plan.circuit.n_qubits;
    let mut last = vec![0.0f64; n];
    let mut now = 0.0f64;
    let depol = depolarizing_channel(params.depolarizing);
    let relax = |backend: &mut B, q: usize, dt: f64| -> Result<()> {
        if dt > 0.0 {
            let ch = relaxation_channel(params, dt)?;
            if !ch.is_identity() {
                backend.channel(q, &ch)?;
            }
        }
        Ok(())
    };
    for op in &plan.circuit.ops {
        let qubits = op.qubits();
        for &q in &qubits {
            relax(backend, q, now - last[q])?;
        }
        backend.op(op)?;
        let dt = params.durations.of_op(op, plan.rows);
        now += dt;
        for &q in &qubits {
            relax(backend, q, dt)?;
            if !depol.is_identity() {
                backend.channel(q, &depol)?;
            }
            last[q] = now;
        }
    }
    for (q, &t) in last.iter().enumerate() {
        relax(backend, q, now - t)?;
    }
    Ok(())
}

/// Total wall time of a plan.
pub fn plan_duration(plan: &NoisePlan, durations: &Durations) -> f64 {
    plan.circuit.ops.iter().map(|op| durations.of_op(op, plan.rows)).sum()
}

struct Trajectory<'a, R: Rng> {
    state: StateVector,
    rng: &'a mut R,
}

impl<R: Rng> Backend for Trajectory<'_, R> {
    fn op(&mut self, op: &Op) -> Result<()> {
        self.state.apply_op(op)
    }

    fn channel(&mut self, q: usize, ch: &Channel) -> Result<()> {
        let rho = self.state.reduced_density(q)?;
        let weights: Vec<f64> = ch.kraus.iter().map(|k| trace_re(&ch_branch(k, &rho))).collect();
        let total: f64 = weights.iter().sum();
        let mut u = self.rng.gen::<f64>() * total;
        let mut pick = weights.len() - 1;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                pick = i;
                break;
            }
            u -= w;
        }
        let s = 1.0 / weights[pick].sqrt();
        let k = ch.kraus[pick];
        let scaled = [[k[0][0] * s, k[0][1] * s], [k[1][0] * s, k[1][1] * s]];
        self.state.apply_matrix(q, &scaled)
    }
}

fn ch_branch(k: &crate::qsim::Matrix2, rho: &crate::qsim::Matrix2) -> crate::qsim::Matrix2 {
    channel::mul(&channel::mul(k, rho), &channel::dagger(k))
}

fn trace_re(m: &crate::qsim::Matrix2) -> f64 {
    m[0][0].re + m[1][1].re
}

/// Flip each of `width` bits independently with probability `p`.
fn readout_noise(dist: &mut [f64], width: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    for b in 0..width {
        let bit = 1usize << b;
        for i in 0..dist.len() {
            if i & bit == 0 {
                let (a, c) = (dist[i], dist[i | bit]);
                dist[i] = (1.0 - p) * a + p * c;
                dist[i | bit] = p * a + (1.0 - p) * c;
            }
        }
    }
}

/// One noise-free run of the plan: the readout distribution.
pub fn ideal_distribution(plan: &NoisePlan, qubit_cap: usize) -> Result<Vec<f64>> {
    let mut s = StateVector::new_zero_with_cap(RegisterLayout::plain(plan.circuit.n_qubits), qubit_cap)?;
    s.run(&plan.circuit)?;
    s.span_distribution(plan.readout)
}

/// Aggregated outcome of noisy and ideal execution.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyResult {
    /// Sampled readout patterns across all trajectories.
    pub histogram: BTreeMap<u64, usize>,
    pub ideal_histogram: BTreeMap<u64, usize>,
    /// Trajectory-averaged exact readout distribution.
    pub distribution: Vec<f64>,
    pub ideal_distribution: Vec<f64>,
    pub trials: usize,
    pub shots: usize,
}

impl NoisyResult {
    /// TV distance between the averaged noisy and the ideal distributions.
    pub fn tv_error(&self) -> f64 {
        tv_distance(&self.distribution, &self.ideal_distribution).expect("same readout span")
    }

    /// TV distance between the sampled histograms.
    pub fn sampled_tv_error(&self) -> f64 {
        let n = self.distribution.len();
        let norm = |h: &BTreeMap<u64, usize>| {
            let total: usize = h.values().sum();
            let mut v = vec![0.0; n];
            for (&k, &c) in h {
                v[k as usize] = c as f64 / total as f64;
            }
            v
        };
        tv_distance(&norm(&self.histogram), &norm(&self.ideal_histogram)).expect("same readout span")
    }

    pub fn success_error(&self, solutions: &[u64]) -> f64 {
        success_error(&self.distribution, &self.ideal_distribution, solutions)
    }
}

/// Exact readout distribution and sampled histogram of one trajectory.
type TrialOutcome = (Vec<f64>, BTreeMap<u64, usize>);

/// Monte Carlo trajectories: `trials` independent noisy runs, `shots` samples
/// from each.
pub fn run_noisy(
    plan: &NoisePlan,
    params: &NoiseParams,
    shots: usize,
    trials: usize,
    seed: u64,
    qubit_cap: usize,
) -> Result<NoisyResult> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let layout = RegisterLayout::plain(plan.circuit.n_qubits);
    let ideal = ideal_distribution(plan, qubit_cap)?;
    let width = plan.readout.len;
    let per_trial: Vec<Result<TrialOutcome>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut r = rng::substream(seed, 1, trial as u64);
            let state = StateVector::new_zero_with_cap(layout.clone(), qubit_cap)?;
            let mut traj = Trajectory { state, rng: &mut r };
            execute(&mut traj, plan, params)?;
            let mut dist = traj.state.span_distribution(plan.readout)?;
            readout_noise(&mut dist, width, params.readout_flip);
            let mut hist_rng = rng::substream(seed, 2, trial as u64);
            let hist = sample_histogram(&dist, shots, &mut hist_rng);
            Ok((dist, hist.into_iter().map(|(k, c)| (k as u64, c)).collect()))
        })
        .collect();
    let mut distribution = vec![0.0; ideal.len()];
    let mut histogram = BTreeMap::new();
    for res in per_trial {
        let (dist, hist) = res?;
        distribution.iter_mut().zip(&dist).for_each(|(a, b)| *a += b / trials as f64);
        for (k, c) in hist {
            *histogram.entry(k).or_insert(0) += c;
        }
    }
    let mut ideal_rng = rng::substream(seed, 3, 0);
    let ideal_histogram =
        sample_histogram(&ideal, shots * trials, &mut ideal_rng).into_iter().map(|(k, c)| (k as u64, c)).collect();
    Ok(NoisyResult { histogram, ideal_histogram, distribution, ideal_distribution: ideal, trials, shots })
}

/// Vectorized density matrix: index `row + (col << n)` on `2n` qubits.
struct Density {
    vec: StateVector,
    n: usize,
}

impl Backend for Density {
    fn op(&mut self, op: &Op) -> Result<()> {
        let n = self.n;
        self.vec.apply_op(op)?;
        // the conjugate copy on the column qubits
        let shifted = match op {
            Op::Gate(g) => Op::Gate(shift_gate(g, n)),
            Op::Inject { span, rows } => Op::Inject { span: Span::new(span.start + n, span.len), rows: rows.clone() },
            Op::Reflect(axis) => Op::Reflect(Arc::new(axis.shifted(n).conj())),
        };
        self.vec.apply_op(&shifted)
    }

    fn channel(&mut self, q: usize, ch: &Channel) -> Result<()> {
        self.vec.apply_matrix2(q, q + self.n, &ch.superoperator())
    }
}

/// The gate set is real, so the conjugate gate is the same gate moved up by `n`.
fn shift_gate(g: &Gate, n: usize) -> Gate {
    match g {
        Gate::X(q) => Gate::X(q + n),
        Gate::H(q) => Gate::H(q + n),
        Gate::Cx { control, target } => Gate::Cx { control: control + n, target: target + n },
        Gate::Mcx { controls, target } => {
            Gate::Mcx { controls: controls.iter().map(|c| c + n).collect(), target: target + n }
        }
        Gate::PhaseFlip { qubits, predicate } => {
            let p = predicate.clone();
            Gate::PhaseFlip { qubits: qubits.iter().map(|q| q + n).collect(), predicate: Arc::new(move |i| p(i >> n)) }
        }
    }
}

/// Exact noisy readout distribution by evolving the full density matrix.
///
/// Returns the distribution and the trace after every channel application.
pub fn density_matrix_reference(plan: &NoisePlan, params: &NoiseParams) -> Result<DensityReference> {
    let n = plan.circuit.n_qubits;
    if n > DENSITY_QUBIT_CAP {
        return Err(Error::DensityCap { requested: n, cap: DENSITY_QUBIT_CAP });
    }
    let vec = StateVector::new_zero_with_cap(RegisterLayout::plain(2 * n), 2 * n)?;
    let mut dm = Density { vec, n };
    let mut traces = Vec::new();
    struct Tracking<'a> {
        dm: &'a mut Density,
        traces: &'a mut Vec<f64>,
    }
    impl Backend for Tracking<'_> {
        fn op(&mut self, op: &Op) -> Result<()> {
            self.dm.op(op)
        }
        fn channel(&mut self, q: usize, ch: &Channel) -> Result<()> {
            self.dm.channel(q, ch)?;
            self.traces.push(density_trace(self.dm));
            Ok(())
        }
    }
    execute(&mut Tracking { dm: &mut dm, traces: &mut traces }, plan, params)?;
    let mut distribution = vec![0.0; 1 << plan.readout.len];
    let amps = dm.vec.amplitudes();
    for i in 0..1usize << n {
        distribution[plan.readout.extract(i) as usize] += amps[i | i << n].re;
    }
    readout_noise(&mut distribution, plan.readout.len, params.readout_flip);
    Ok(DensityReference { distribution, traces, final_trace: density_trace(&dm) })
}

fn density_trace(dm: &Density) -> f64 {
    let amps = dm.vec.amplitudes();
    (0..1usize << dm.n).map(|i| amps[i | i << dm.n].re).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReference {
    pub distribution: Vec<f64>,
    /// Trace after each channel application.
    pub traces: Vec<f64>,
    pub final_trace: f64,
}

/// `½ Σ |p_i − q_i|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), actual: q.len() });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `|P_noisy(solutions) − P_ideal(solutions)|`.
pub fn success_error(noisy: &[f64], ideal: &[f64], solutions: &[u64]) -> f64 {
    let mass = |d: &[f64]| solutions.iter().map(|&s| d[s as usize]).sum::<f64>();
    (mass(noisy) - mass(ideal)).abs()
}

/// Average ranks (1-based), ties share the mean rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation with a two-sided p-value.
///
/// The p-value is exact (all permutations) for up to 9 points and uses the
/// t approximation beyond that.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::InvalidParameter("spearman needs at least 3 points".into()));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let rho = pearson(&rx, &ry);
    let n = x.len();
    let p = if n <= 9 {
        let mut perm = ry.clone();
        let (mut hits, mut total) = (0u64, 0u64);
        permute_all(&mut perm, 0, &mut |p| {
            total += 1;
            if pearson(&rx, p).abs() >= rho.abs() - 1e-12 {
                hits += 1;
            }
        });
        hits as f64 / total as f64
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho).max(1e-300)).sqrt();
        student_t_two_sided(t, df)
    };
    Ok((rho, p))
}

fn permute_all(v: &mut Vec<f64>, k: usize, f: &mut impl FnMut(&[f64])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute_all(v, k + 1, f);
        v.swap(k, i);
    }
}

fn student_t_two_sided(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    2.0 * dist.sf(t.abs())
}

/// One row of the noise study.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseStudyRow {
    pub t1: f64,
    pub t2: f64,
    pub iterations: usize,
    pub tv_error: f64,
    pub success_error: f64,
    pub trials: usize,
    pub shots: usize,
    pub seed: u64,
}

/// Columns `T1_seconds,T2_seconds,iterations,tv_error,success_error,trials,shots,seed`.
pub fn write_noise_csv<W: Write>(mut w: W, rows: &[NoiseStudyRow]) -> std::io::Result<()> {
    writeln!(w, "T1_seconds,T2_seconds,iterations,tv_error,success_error,trials,shots,seed")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{:e},{},{:.12},{:.12},{},{},{}",
            r.t1, r.t2, r.iterations, r.tv_error, r.success_error, r.trials, r.shots, r.seed
        )?;
    }
    Ok(())
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdc::CodebookSet;
    use crate::hdc::FactorAssignment;
    use crate::hdqf::grover_circuit;

    fn small_plan(seed: u64, iterations: usize) -> (NoisePlan, Vec<u64>) {
        // F=2, N=2, D=2: 7 qubits
        let books = CodebookSet::generate_distinct(seed, 2, 2, 2).unwrap();
        let target = FactorAssignment(vec![1, 0]).bind_all(&books).unwrap();
        let circuit = grover_circuit(&books, &target, iterations).unwrap();
        let sols = crate::hdc::brute_force_factorize(&target, &books, crate::hdc::SearchMode::Exhaustive)
            .unwrap()
            .solutions
            .iter()
            .map(|a| crate::hdqf::assignment_pattern(&books, a))
            .collect();
        (NoisePlan { circuit, readout: Span::new(0, 4), rows: 2 }, sols)
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(tv_distance(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), 0.5);
        assert!(tv_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn ideal_params_reproduce_ideal_distribution() {
        let (plan, sols) = small_plan(3, 1);
        let res = run_noisy(&plan, &NoiseParams::ideal(), 200, 10, 1, 26).unwrap();
        assert!(res.tv_error() < 1e-12);
        assert!(res.success_error(&sols) < 1e-12);
        assert!(res.sampled_tv_error() < 0.05);
        assert_eq!(res.histogram.values().sum::<usize>(), 2000);
        assert_eq!(res.ideal_histogram.values().sum::<usize>(), 2000);
        let dm = density_matrix_reference(&plan, &NoiseParams::ideal()).unwrap();
        assert!(tv_distance(&dm.distribution, &res.ideal_distribution).unwrap() < 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let (plan, _) = small_plan(3, 2);
        let p = NoiseParams::thermal(2e-6);
        assert_eq!(run_noisy(&plan, &p, 50, 8, 9, 26).unwrap(), run_noisy(&plan, &p, 50, 8, 9, 26).unwrap());
    }

    #[test]
    fn density_trace_is_preserved() {
        let (plan, _) = small_plan(4, 2);
        let dm = density_matrix_reference(&plan, &NoiseParams::thermal(3e-6)).unwrap();
        assert!(!dm.traces.is_empty());
        assert!(dm.traces.iter().all(|t| (t - 1.0).abs() < 1e-9));
        let total: f64 = dm.distribution.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn density_cap() {
        // F=2, D=3 is exactly 10 qubits; D=4 is 13
        let books = CodebookSet::generate(1, 2, 2, 4).unwrap();
        let target = books.row(0, 0).clone();
        let plan =
            NoisePlan { circuit: grover_circuit(&books, &target, 1).unwrap(), readout: Span::new(0, 8), rows: 2 };
        assert!(matches!(density_matrix_reference(&plan, &NoiseParams::ideal()), Err(Error::DensityCap { .. })));
    }

    #[test]
    fn strong_relaxation_drives_to_ground() {
        let (plan, _) = small_plan(5, 3);
        let dm = density_matrix_reference(&plan, &NoiseParams::thermal(1e-8)).unwrap();
        assert!(dm.distribution[0] > 0.99);
        let res = run_noisy(&plan, &NoiseParams::thermal(1e-8), 10, 20, 2, 26).unwrap();
        assert!(res.distribution[0] > 0.99);
    }

    #[test]
    fn trajectories_match_density_reference() {
        let (plan, _) = small_plan(6, 2);
        let p = NoiseParams::thermal(4e-6);
        let dm = density_matrix_reference(&plan, &p).unwrap();
        let res = run_noisy(&plan, &p, 1, 2000, 3, 26).unwrap();
        let tv = tv_distance(&dm.distribution, &res.distribution).unwrap();
        assert!(tv < 0.02, "{tv}");
        // noise actually did something
        assert!(tv_distance(&dm.distribution, &res.ideal_distribution).unwrap() > 0.05);
    }

    #[test]
    fn optional_knobs_match_density_reference() {
        let (plan, _) = small_plan(7, 1);
        let p = NoiseParams { depolarizing: 0.01, readout_flip: 0.02, ..NoiseParams::thermal(2e-5) };
        let dm = density_matrix_reference(&plan, &p).unwrap();
        let res = run_noisy(&plan, &p, 1, 20_000, 4, 26).unwrap();
        let tv = tv_distance(&dm.distribution, &res.distribution).unwrap();
        assert!(tv < 0.02, "{tv}");
    }

    #[test]
    fn spearman_examples() {
        let x: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let (rho, p) = spearman(&x, &y).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
        assert!((p - 2.0 / 40320.0).abs() < 1e-12);
        let (rho, _) = spearman(&x, &y.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
        assert!((rho + 1.0).abs() < 1e-12);
        // ties share ranks
        assert_eq!(ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
        // large n uses the t tail; rho = 1 gives p ≈ 0
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let (_, p) = spearman(&x, &x).unwrap();
        assert!(p < 1e-10);
        let noise: Vec<f64> = (0..30).map(|i| ((i * 7919) % 31) as f64).collect();
        let (_, p) = spearman(&x, &noise).unwrap();
        assert!(p > 0.0 && p <= 1.0);
    }

    #[test]
    fn t_tail_reference_values() {
        // two-sided p for t = 2.0 at 10 dof is 0.07339
        assert!((student_t_two_sided(2.0, 10.0) - 0.073388).abs() < 1e-5);
    }

    #[test]
    fn grid_and_csv() {
        let g = log_grid(1e-5, 1e-2, 8);
        assert_eq!(g.len(), 8);
        assert!((g[0] - 1e-5).abs() < 1e-18 && (g[7] - 1e-2).abs() < 1e-15);
        let mut out = Vec::new();
        write_noise_csv(
            &mut out,
            &[NoiseStudyRow {
                t1: 1e-5,
                t2: 2e-5,
                iterations: 2,
                tv_error: 0.1,
                success_error: 0.05,
                trials: 50,
                shots: 10,
                seed: 1,
            }],
        )
        .unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("T1_seconds,T2_seconds,iterations,tv_error,success_error,trials,shots,seed\n"));
        assert_eq!(text.lines().count(), 2);
    }
}
