use super::{Circuit, Gate, Op, RegisterLayout, Span, SparseAxis};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

/// Default qubit budget: 2^26 double-complex amplitudes is 1 GiB.
pub const DEFAULT_QUBIT_CAP: usize = 26;

pub type Matrix2 = [[Complex64; 2]; 2];
pub type Matrix4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense statevector. Basis index bit `q` is the value of qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    layout: RegisterLayout,
}

/// Iterate all `i < 2^n` with `i & fixed == value`, in increasing order.
#[inline]
fn for_each_with_fixed(n: usize, fixed: usize, value: usize, mut f: impl FnMut(usize)) {
    let free = !fixed & ((1usize << n) - 1);
    let mut x = 0usize;
    loop {
        f(x | value);
        x = (x.wrapping_sub(free)) & free;
        if x == 0 {
            break;
        }
    }
}

impl StateVector {
    pub fn new_zero(layout: RegisterLayout) -> Result<Self> {
        Self::new_zero_with_cap(layout, DEFAULT_QUBIT_CAP)
    }

    pub fn new_zero_with_cap(layout: RegisterLayout, cap: usize) -> Result<Self> {
        let n = layout.n_qubits();
        if n > cap || n >= usize::BITS as usize - 1 {
            return Err(Error::QubitBudget { requested: n, cap });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(Self { amps, layout })
    }

    /// Wrap raw amplitudes (length must be a power of two matching the layout).
    pub fn from_amplitudes(amps: Vec<Complex64>, layout: RegisterLayout) -> Result<Self> {
        if amps.len() != 1 << layout.n_qubits() {
            return Err(Error::DimensionMismatch { expected: 1 << layout.n_qubits(), actual: amps.len() });
        }
        Ok(Self { amps, layout })
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.n_qubits()
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let s = 1.0 / self.norm_sqr().sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits() {
            return Err(Error::IndexOutOfRange { index: q, size: self.n_qubits() });
        }
        Ok(())
    }

    fn check_span(&self, span: Span) -> Result<()> {
        if span.end() > self.n_qubits() {
            return Err(Error::IndexOutOfRange { index: span.end() - 1, size: self.n_qubits() });
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits())?;
        match gate {
            Gate::X(q) => self.mcx_kernel(0, *q),
            Gate::H(q) => self.h_kernel(*q),
            Gate::Cx { control, target } => self.mcx_kernel(1 << control, *target),
            Gate::Mcx { controls, target } => {
                let mask = controls.iter().fold(0usize, |m, &c| m | 1 << c);
                self.mcx_kernel(mask, *target)
            }
            Gate::PhaseFlip { predicate, .. } => {
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if predicate(i) {
                        *a = -*a;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.apply(g))
    }

    pub fn apply_op(&mut self, op: &Op) -> Result<()> {
        match op {
            Op::Gate(g) => self.apply(g),
            Op::Inject { span, rows } => self.inject_superposition(*span, rows),
            Op::Reflect(axis) => self.reflect_about(axis),
        }
    }

    pub fn run(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits != self.n_qubits() {
            return Err(Error::LayoutMismatch(format!(
                "circuit has {} qubits, state has {}",
                circuit.n_qubits,
                self.n_qubits()
            )));
        }
        circuit.ops.iter().try_for_each(|op| self.apply_op(op))
    }

    /// Swap target where all bits of `control_mask` are set.
    fn mcx_kernel(&mut self, control_mask: usize, target: usize) {
        let t = 1usize << target;
        let amps = &mut self.amps;
        for_each_with_fixed(self.layout.n_qubits(), control_mask | t, control_mask, |i| {
            amps.swap(i, i | t);
        });
    }

    fn h_kernel(&mut self, q: usize) {
        let half = 1usize << q;
        for chunk in self.amps.chunks_mut(half << 1) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = (x + y) * FRAC_1_SQRT_2;
                *b = (x - y) * FRAC_1_SQRT_2;
            }
        }
    }

    /// Apply an arbitrary 2×2 matrix to qubit `q` (not necessarily unitary).
    pub fn apply_matrix(&mut self, q: usize, m: &Matrix2) -> Result<()> {
        self.check_qubit(q)?;
        let half = 1usize << q;
        for chunk in self.amps.chunks_mut(half << 1) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m[0][0] * x + m[0][1] * y;
                *b = m[1][0] * x + m[1][1] * y;
            }
        }
        Ok(())
    }

    /// Apply a 4×4 matrix on `(qa, qb)`; local index is `bit(qa) + 2·bit(qb)`.
    pub fn apply_matrix2(&mut self, qa: usize, qb: usize, m: &Matrix4) -> Result<()> {
        self.check_qubit(qa)?;
        self.check_qubit(qb)?;
        if qa == qb {
            return Err(Error::InvalidParameter("two-qubit matrix on a single qubit".into()));
        }
        let (ba, bb) = (1usize << qa, 1usize << qb);
        let amps = &mut self.amps;
        for_each_with_fixed(self.layout.n_qubits(), ba | bb, 0, |i| {
            let idx = [i, i | ba, i | bb, i | ba | bb];
            let v = idx.map(|k| amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                amps[k] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        });
        Ok(())
    }

    /// Reduced single-qubit density matrix `[[ρ00, ρ01], [ρ10, ρ11]]`.
    pub fn reduced_density(&self, q: usize) -> Result<Matrix2> {
        self.check_qubit(q)?;
        let half = 1usize << q;
        let (mut p0, mut p1, mut c) = (0.0, 0.0, ZERO);
        for chunk in self.amps.chunks(half << 1) {
            let (lo, hi) = chunk.split_at(half);
            for (a, b) in lo.iter().zip(hi) {
                p0 += a.norm_sqr();
                p1 += b.norm_sqr();
                c += a * b.conj();
            }
        }
        Ok([[Complex64::new(p0, 0.0), c], [c.conj(), Complex64::new(p1, 0.0)]])
    }

    /// Load `Σ_i |row_i⟩`, normalized, into a span that is currently `|0…0⟩`.
    /// A row repeated `m` times gets amplitude proportional to `m`.
    pub fn inject_superposition(&mut self, span: Span, rows: &[u64]) -> Result<()> {
        self.check_span(span)?;
        if rows.is_empty() {
            return Err(Error::Empty("basis rows"));
        }
        let width_mask = if span.len >= 64 { u64::MAX } else { (1u64 << span.len) - 1 };
        if let Some(&bad) = rows.iter().find(|&&r| r & !width_mask != 0) {
            return Err(Error::InvalidParameter(format!("row {bad:#b} wider than span")));
        }
        let mask = span.mask();
        if self.amps.iter().enumerate().any(|(i, a)| i & mask != 0 && a.norm_sqr() > 1e-24) {
            return Err(Error::SpanNotBaseline);
        }
        let weights: Vec<(usize, f64)> =
            multiplicity_amplitudes(rows).into_iter().map(|(r, w)| (span.deposit(r), w)).collect();
        let zero_weight = weights.iter().find(|(off, _)| *off == 0).map_or(0.0, |w| w.1);
        let amps = &mut self.amps;
        for_each_with_fixed(self.layout.n_qubits(), mask, 0, |i| {
            let a = amps[i];
            if a == ZERO {
                return;
            }
            for &(off, w) in &weights {
                if off != 0 {
                    amps[i | off] = a * w;
                }
            }
            amps[i] = a * zero_weight;
        });
        Ok(())
    }

    /// `ψ → (2|a⟩⟨a| − I) ⊗ I_rest ψ` for the axis span.
    pub fn reflect_about(&mut self, axis: &SparseAxis) -> Result<()> {
        self.check_span(axis.span)?;
        let norm = axis.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitAxis(norm));
        }
        let span = axis.span;
        let offsets: Vec<(usize, Complex64)> = axis.entries.iter().map(|&(p, a)| (span.deposit(p), a)).collect();
        let amps = &mut self.amps;
        if span.start == 0 {
            // contiguous blocks: one per assignment of the remaining qubits
            for block in amps.chunks_mut(1 << span.len) {
                let overlap: Complex64 = offsets.iter().map(|&(o, a)| a.conj() * block[o]).sum();
                block.iter_mut().for_each(|x| *x = -*x);
                let two = overlap * 2.0;
                for &(o, a) in &offsets {
                    block[o] += two * a;
                }
            }
        } else {
            for_each_with_fixed(self.layout.n_qubits(), span.mask(), 0, |base| {
                let overlap: Complex64 = offsets.iter().map(|&(o, a)| a.conj() * amps[base | o]).sum();
                let two = overlap * 2.0;
                // negate the fiber
                for_each_with_fixed(span.len, 0, 0, |k| {
                    let idx = base | k << span.start;
                    amps[idx] = -amps[idx];
                });
                for &(o, a) in &offsets {
                    amps[base | o] += two * a;
                }
            });
        }
        Ok(())
    }

    /// Negate amplitudes whose `span` pattern satisfies `predicate`.
    pub fn phase_flip_where(&mut self, span: Span, predicate: impl Fn(u64) -> bool) -> Result<()> {
        self.check_span(span)?;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if predicate(span.extract(i)) {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Probability that `span` reads `pattern`.
    pub fn probability_of(&self, span: Span, pattern: u64) -> Result<f64> {
        self.check_span(span)?;
        let mut p = 0.0;
        let amps = &self.amps;
        for_each_with_fixed(self.n_qubits(), span.mask(), span.deposit(pattern), |i| {
            p += amps[i].norm_sqr();
        });
        Ok(p)
    }

    /// Marginal distribution over all `2^len` patterns of `span`.
    pub fn span_distribution(&self, span: Span) -> Result<Vec<f64>> {
        self.check_span(span)?;
        let mut dist = vec![0.0; 1 << span.len];
        for (i, a) in self.amps.iter().enumerate() {
            dist[span.extract(i) as usize] += a.norm_sqr();
        }
        Ok(dist)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draw `shots` basis indices from `|ψ|²` without collapsing the state.
    pub fn measure_all<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> BTreeMap<usize, usize> {
        sample_histogram(&self.probabilities(), shots, rng)
    }

    /// Debug dump: `basis_index,re,im` per amplitude.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "basis_index,re,im")?;
        for (i, a) in self.amps.iter().enumerate() {
            writeln!(w, "{i},{:e},{:e}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// Distinct rows with normalized amplitudes `m_r / sqrt(Σ m²)`, sorted by row.
pub fn multiplicity_amplitudes(rows: &[u64]) -> Vec<(u64, f64)> {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &r in rows {
        *counts.entry(r).or_default() += 1;
    }
    let norm = counts.values().map(|&m| (m * m) as f64).sum::<f64>().sqrt();
    counts.into_iter().map(|(r, m)| (r, m as f64 / norm)).collect()
}

/// Histogram of `shots` i.i.d. draws from an (unnormalized) weight vector.
pub fn sample_histogram<R: Rng + ?Sized>(weights: &[f64], shots: usize, rng: &mut R) -> BTreeMap<usize, usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cdf.push(acc);
    }
    let mut hist = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        let mut k = cdf.partition_point(|&c| c <= u);
        // never land on a zero-weight tail entry
        while k > 0 && (k >= weights.len() || weights[k] == 0.0) {
            k -= 1;
        }
        *hist.entry(k).or_insert(0) += 1;
    }
    hist
}
