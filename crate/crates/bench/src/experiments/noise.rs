//! Readout error under thermal relaxation.

use super::instance;
use super::prob_vs_iter::join;
use crate::output::{manifest, num, Artifacts, Table};
use crate::settings::Settings;
use crate::svg::{LinePlot, Series};
use anyhow::{ensure, Result};
use hdqf_core::hdc::CodebookSet;
use hdqf_core::hdqf::{assignment_pattern, grover_circuit, optimal_iterations};
use hdqf_core::noise::{
    density_matrix_reference, log_grid, run_noisy, spearman, tv_distance, NoiseParams, NoisePlan, NoiseStudyRow,
};
use hdqf_core::qsim::Span;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub factors: usize,
    pub dim: usize,
    pub sizes: Vec<usize>,
    pub t1_min: f64,
    pub t1_max: f64,
    pub t1_points: usize,
    /// `T2 = t2_ratio · T1`.
    pub t2_ratio: f64,
    /// Fixed T1 for the iteration sweep.
    pub sweep_t1: f64,
    pub max_iterations: usize,
    pub trials: usize,
    pub shots: usize,
    /// Trajectories for the density-matrix comparison (0 skips it).
    pub reference_trials: usize,
    pub reference_t1: f64,
    pub qubit_cap: usize,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            factors: 2,
            dim: 4,
            sizes: vec![4, 5],
            t1_min: 1e-5,
            t1_max: 1e-2,
            t1_points: 8,
            t2_ratio: 2.0,
            sweep_t1: 1e-3,
            max_iterations: 8,
            trials: 50,
            shots: 100,
            reference_trials: 2000,
            reference_t1: 2e-5,
            qubit_cap: 20,
            seed: 0,
        }
    }
}

impl Params {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            factors: s.get("factors", d.factors)?,
            dim: s.get("dim", d.dim)?,
            sizes: s.list("sizes", &d.sizes)?,
            t1_min: s.get("t1_min", d.t1_min)?,
            t1_max: s.get("t1_max", d.t1_max)?,
            t1_points: s.get("t1_points", d.t1_points)?,
            t2_ratio: s.get("t2_ratio", d.t2_ratio)?,
            sweep_t1: s.get("sweep_t1", d.sweep_t1)?,
            max_iterations: s.get("max_iterations", d.max_iterations)?,
            trials: s.get("trials", d.trials)?,
            shots: s.get("shots", d.shots)?,
            reference_trials: s.get("reference_trials", d.reference_trials)?,
            reference_t1: s.get("reference_t1", d.reference_t1)?,
            qubit_cap: s.get("qubit_cap", d.qubit_cap)?,
            seed: s.get("seed", d.seed)?,
        })
    }

    fn params(&self, t1: f64) -> NoiseParams {
        NoiseParams { t2: self.t2_ratio * t1, ..NoiseParams::thermal(t1) }
    }
}

/// Both monotonicity tests for one codebook size.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub size: usize,
    pub instance_seed: u64,
    pub optimal: usize,
    /// TV error along the T1 grid at the optimal iteration.
    pub t1_rows: Vec<NoiseStudyRow>,
    /// TV error along iterations at `sweep_t1`.
    pub iteration_rows: Vec<NoiseStudyRow>,
    /// Noise-free control at the optimal iteration.
    pub control: NoiseStudyRow,
    /// Spearman (ρ, p) of TV error against T1.
    pub t1_spearman: (f64, f64),
    /// Spearman (ρ, p) of TV error against iterations.
    pub iteration_spearman: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceCheck {
    pub qubits: usize,
    pub trials: usize,
    pub t1: f64,
    pub tv: f64,
    pub final_trace: f64,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub params: Params,
    pub curves: Vec<Curve>,
    pub reference: Option<ReferenceCheck>,
}

fn plan(books: &CodebookSet, target: &hdqf_core::hdc::Hypervector, k: usize) -> Result<NoisePlan> {
    Ok(NoisePlan {
        circuit: grover_circuit(books, target, k)?,
        readout: Span::new(0, books.factors() * books.dim()),
        rows: books.size(),
    })
}

pub fn run(p: &Params) -> Result<Report> {
    ensure!(p.trials > 0 && p.shots > 0, "trials and shots must be >= 1");
    let mut curves = Vec::new();
    for &n in &p.sizes {
        let instance_seed = p.seed.wrapping_add((p.factors * 1000 + n) as u64);
        let inst = instance(instance_seed, p.factors, n, p.dim, 1)?;
        let t = inst.solutions.max(1);
        let optimal = optimal_iterations(n, p.factors, t as u64)?;
        let solutions: Vec<u64> =
            hdqf_core::hdc::brute_force_factorize(&inst.target, &inst.books, hdqf_core::hdc::SearchMode::Exhaustive)?
                .solutions
                .iter()
                .map(|a| assignment_pattern(&inst.books, a))
                .collect();
        let point = |t1: f64, k: usize| -> Result<NoiseStudyRow> {
            let params = p.params(t1);
            let res = run_noisy(&plan(&inst.books, &inst.target, k)?, &params, p.shots, p.trials, p.seed, p.qubit_cap)?;
            Ok(NoiseStudyRow {
                t1,
                t2: params.t2,
                iterations: k,
                tv_error: res.tv_error(),
                success_error: res.success_error(&solutions),
                trials: p.trials,
                shots: p.shots,
                seed: p.seed,
            })
        };
        let t1_rows = log_grid(p.t1_min, p.t1_max, p.t1_points)
            .into_iter()
            .map(|t1| point(t1, optimal))
            .collect::<Result<Vec<_>>>()?;
        let iteration_rows = (0..=p.max_iterations).map(|k| point(p.sweep_t1, k)).collect::<Result<Vec<_>>>()?;
        let control = point(f64::INFINITY, optimal)?;
        let tv = |rows: &[NoiseStudyRow]| rows.iter().map(|r| r.tv_error).collect::<Vec<_>>();
        let t1s: Vec<f64> = t1_rows.iter().map(|r| r.t1).collect();
        let ks: Vec<f64> = iteration_rows.iter().map(|r| r.iterations as f64).collect();
        curves.push(Curve {
            size: n,
            instance_seed,
            optimal,
            t1_spearman: spearman(&tv(&t1_rows), &t1s)?,
            iteration_spearman: spearman(&tv(&iteration_rows), &ks)?,
            t1_rows,
            iteration_rows,
            control,
        });
    }
    let reference = if p.reference_trials > 0 { Some(reference_check(p)?) } else { None };
    Ok(Report { params: p.clone(), curves, reference })
}

/// Trajectory average against the exact density matrix on a 7-qubit plan.
pub fn reference_check(p: &Params) -> Result<ReferenceCheck> {
    let inst = instance(p.seed, 2, 2, 2, 1)?;
    let k = optimal_iterations(2, 2, inst.solutions.max(1) as u64)?;
    let pl = plan(&inst.books, &inst.target, k.max(1))?;
    let params = p.params(p.reference_t1);
    let dm = density_matrix_reference(&pl, &params)?;
    let traj = run_noisy(&pl, &params, 1, p.reference_trials, p.seed, p.qubit_cap)?;
    Ok(ReferenceCheck {
        qubits: pl.circuit.n_qubits,
        trials: p.reference_trials,
        t1: p.reference_t1,
        tv: tv_distance(&traj.distribution, &dm.distribution)?,
        final_trace: dm.final_trace,
    })
}

impl Report {
    pub fn artifacts(&self) -> Artifacts {
        let p = &self.params;
        let mut out = Artifacts::default();
        for c in &self.curves {
            let mut rows = c.t1_rows.clone();
            rows.extend(c.iteration_rows.iter().cloned());
            rows.push(c.control.clone());
            let mut t = Table::new(&[
                "F",
                "N",
                "D",
                "T1_seconds",
                "T2_seconds",
                "iterations",
                "tv_error",
                "success_error",
                "trials",
                "shots",
                "seed",
            ]);
            for r in &rows {
                t.row([
                    p.factors.to_string(),
                    c.size.to_string(),
                    p.dim.to_string(),
                    format!("{:e}", r.t1),
                    format!("{:e}", r.t2),
                    r.iterations.to_string(),
                    num(r.tv_error),
                    num(r.success_error),
                    r.trials.to_string(),
                    r.shots.to_string(),
                    r.seed.to_string(),
                ]);
            }
            out.add(format!("noise_N{}.csv", c.size), t.finish());

            let mut plot = LinePlot::new(
                format!("Readout error against T1 (F={} N={} D={}, k={})", p.factors, c.size, p.dim, c.optimal),
                "T1 (s)",
                "error",
            );
            plot.log_x = true;
            plot = plot.with(Series::line("TV error", c.t1_rows.iter().map(|r| (r.t1, r.tv_error)).collect())).with(
                Series::line("success error", c.t1_rows.iter().map(|r| (r.t1, r.success_error)).collect()).dashed(),
            );
            out.add(format!("noise_t1_N{}.svg", c.size), plot.render());
            let plot = LinePlot::new(
                format!("Readout error against iterations (T1 = {:e} s)", p.sweep_t1),
                "iteration",
                "error",
            )
            .with(Series::line(
                "TV error",
                c.iteration_rows.iter().map(|r| (r.iterations as f64, r.tv_error)).collect(),
            ))
            .with(
                Series::line(
                    "success error",
                    c.iteration_rows.iter().map(|r| (r.iterations as f64, r.success_error)).collect(),
                )
                .dashed(),
            );
            out.add(format!("noise_iterations_N{}.svg", c.size), plot.render());
        }
        let mut t = Table::new(&["F", "N", "D", "trials", "seed", "test", "spearman_rho", "p_value"]);
        for c in &self.curves {
            for (name, (rho, pv)) in [("tv_vs_T1", c.t1_spearman), ("tv_vs_iterations", c.iteration_spearman)] {
                t.row([
                    p.factors.to_string(),
                    c.size.to_string(),
                    p.dim.to_string(),
                    p.trials.to_string(),
                    p.seed.to_string(),
                    name.to_string(),
                    num(rho),
                    num(pv),
                ]);
            }
        }
        out.add("noise_monotonicity.csv", t.finish());
        let mut m = vec![
            ("factors".to_string(), p.factors.to_string()),
            ("dim".into(), p.dim.to_string()),
            ("sizes".into(), join(&p.sizes)),
            ("t1_grid".into(), format!("{:e}..{:e} ({} log points)", p.t1_min, p.t1_max, p.t1_points)),
            ("t2_ratio".into(), p.t2_ratio.to_string()),
            ("sweep_t1".into(), format!("{:e}", p.sweep_t1)),
            ("max_iterations".into(), p.max_iterations.to_string()),
            ("trials".into(), p.trials.to_string()),
            ("shots".into(), p.shots.to_string()),
            ("seed".into(), p.seed.to_string()),
        ];
        for c in &self.curves {
            m.push((format!("N{}.instance_seed", c.size), c.instance_seed.to_string()));
        }
        if let Some(r) = &self.reference {
            m.push(("reference.qubits".into(), r.qubits.to_string()));
            m.push(("reference.trials".into(), r.trials.to_string()));
            m.push(("reference.t1".into(), format!("{:e}", r.t1)));
            m.push(("reference.tv".into(), format!("{:.6}", r.tv)));
        }
        out.add("manifest.txt", manifest("noise", &m));
        out
    }
}
