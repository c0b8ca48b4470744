//! Success probability against iteration count.

use super::{instance, Instance};
use crate::output::{manifest, num, Artifacts, Table};
use crate::settings::Settings;
use crate::svg::{LinePlot, Series};
use anyhow::Result;
use hdqf_core::hdqf::{
    closed_form_success, first_peak, optimal_iterations, run_hdqf, HdqfConfig, Iterations, Mode, RunTrace,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub factors: Vec<usize>,
    pub sizes: Vec<usize>,
    pub dim: usize,
    pub mode: Mode,
    pub qubit_cap: usize,
    /// Circuit runs up to this many qubits are checked against implicit mode.
    pub cross_check_qubits: usize,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            factors: vec![2, 4],
            sizes: vec![2, 4, 8],
            dim: 5,
            mode: Mode::Circuit,
            qubit_cap: 20,
            cross_check_qubits: 18,
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
            mode: s.get("mode", d.mode)?,
            qubit_cap: s.get("qubit_cap", d.qubit_cap)?,
            cross_check_qubits: s.get("cross_check_qubits", d.cross_check_qubits)?,
            seed: s.get("seed", d.seed)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub factors: usize,
    pub size: usize,
    pub seed: u64,
    pub instance: Instance,
    pub optimal: usize,
    /// Mode the trace was produced in.
    pub mode: Mode,
    pub trace: RunTrace,
    pub closed_form: Vec<f64>,
    /// Largest |circuit − implicit| when both were run.
    pub cross_check: Option<f64>,
    pub notice: Option<String>,
}

impl Cell {
    pub fn max_closed_form_error(&self) -> f64 {
        self.trace.totals().iter().zip(&self.closed_form).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn first_peak(&self) -> Option<usize> {
        first_peak(&self.trace.totals())
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub params: Params,
    pub cells: Vec<Cell>,
}

pub fn run(p: &Params) -> Result<Report> {
    let mut cells = Vec::new();
    for &f in &p.factors {
        for &n in &p.sizes {
            let seed = p.seed.wrapping_add((f * 1000 + n) as u64);
            let inst = instance(seed, f, n, p.dim, 1)?;
            let t = inst.solutions.max(1);
            let optimal = optimal_iterations(n, f, t as u64)?;
            let k_max = (3 * optimal).max(6);
            let qubits = f * p.dim + p.dim + 1;
            let mut mode = p.mode;
            let mut notice = None;
            if mode == Mode::Circuit && qubits > p.qubit_cap {
                notice = Some(format!(
                    "F={f} N={n}: {qubits} qubits exceed the cap of {}, using implicit mode",
                    p.qubit_cap
                ));
                mode = Mode::Implicit;
            }
            let cfg = |mode| HdqfConfig {
                mode,
                iterations: Iterations::Fixed(k_max),
                seed,
                qubit_cap: p.qubit_cap,
                ..HdqfConfig::default()
            };
            let implicit = run_hdqf(&inst.target, &inst.books, &cfg(Mode::Implicit))?;
            let (trace, cross_check) = if mode == Mode::Circuit {
                let circ = run_hdqf(&inst.target, &inst.books, &cfg(Mode::Circuit))?;
                let diff = if qubits <= p.cross_check_qubits {
                    Some(circ.totals().iter().zip(implicit.totals()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                } else {
                    None
                };
                (circ, diff)
            } else {
                (implicit, None)
            };
            let space = (n as f64).powi(f as i32);
            let closed_form = (0..=k_max).map(|k| closed_form_success(k, space, t as f64)).collect();
            cells.push(Cell {
                factors: f,
                size: n,
                seed,
                instance: inst,
                optimal,
                mode,
                trace,
                closed_form,
                cross_check,
                notice,
            });
        }
    }
    Ok(Report { params: p.clone(), cells })
}

impl Report {
    pub fn artifacts(&self) -> Artifacts {
        let mut out = Artifacts::default();
        let p = &self.params;
        for c in &self.cells {
            let mut t = Table::new(&[
                "F",
                "N",
                "D",
                "t",
                "mode",
                "seed",
                "iteration",
                "assignment_id",
                "probability",
                "total_success_probability",
                "closed_form",
            ]);
            for (r, cf) in c.trace.records.iter().zip(&c.closed_form) {
                for (a, prob) in c.trace.solutions.iter().zip(&r.per_solution) {
                    t.row([
                        c.factors.to_string(),
                        c.size.to_string(),
                        p.dim.to_string(),
                        c.instance.solutions.to_string(),
                        c.mode.to_string(),
                        c.seed.to_string(),
                        r.iteration.to_string(),
                        a.to_string(),
                        num(*prob),
                        num(r.total),
                        num(*cf),
                    ]);
                }
            }
            let stem = format!("prob_vs_iter_F{}_N{}", c.factors, c.size);
            out.add(format!("{stem}.csv"), t.finish());
            let pts = |v: &[f64]| v.iter().enumerate().map(|(k, &y)| (k as f64, y)).collect::<Vec<_>>();
            let plot = LinePlot::new(
                format!("F={} N={} D={} t={} ({})", c.factors, c.size, p.dim, c.instance.solutions, c.mode),
                "iteration",
                "probability of a correct factorization",
            )
            .with(Series::line("simulated", pts(&c.trace.totals())))
            .with(Series::line("closed form", pts(&c.closed_form)).dashed());
            out.add(format!("{stem}.svg"), plot.render());
        }
        let mut m = vec![
            ("factors".to_string(), join(&p.factors)),
            ("sizes".into(), join(&p.sizes)),
            ("dim".into(), p.dim.to_string()),
            ("mode".into(), p.mode.to_string()),
            ("qubit_cap".into(), p.qubit_cap.to_string()),
            ("cross_check_qubits".into(), p.cross_check_qubits.to_string()),
            ("seed".into(), p.seed.to_string()),
        ];
        for c in &self.cells {
            m.push((format!("cell.F{}_N{}.seed", c.factors, c.size), c.seed.to_string()));
            m.push((format!("cell.F{}_N{}.solutions", c.factors, c.size), c.instance.solutions.to_string()));
            if let Some(n) = &c.notice {
                m.push((format!("cell.F{}_N{}.notice", c.factors, c.size), n.clone()));
            }
        }
        out.add("manifest.txt", manifest("prob-vs-iter", &m));
        out
    }
}

pub(crate) fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}
