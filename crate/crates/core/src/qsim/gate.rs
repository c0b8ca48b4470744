use super::Span;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Predicate over a full basis index.
pub type BasisPredicate = Arc<dyn Fn(usize) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum Gate {
    X(usize),
    H(usize),
    Cx {
        control: usize,
        target: usize,
    },
    /// Flip `target` where every control is 1.
    Mcx {
        controls: Vec<usize>,
        target: usize,
    },
    /// Negate amplitudes whose basis index satisfies the predicate.
    PhaseFlip {
        qubits: Vec<usize>,
        predicate: BasisPredicate,
    },
}

/// Gate families, used to look up durations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    OneQubit,
    Cx,
    Mcx { controls: usize },
    PhaseFlip,
    Prepare,
    Reflect,
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::X(_) | Gate::H(_) => GateKind::OneQubit,
            Gate::Cx { .. } => GateKind::Cx,
            Gate::Mcx { controls, .. } => GateKind::Mcx { controls: controls.len() },
            Gate::PhaseFlip { .. } => GateKind::PhaseFlip,
        }
    }

    /// Qubits the gate acts on.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X(q) | Gate::H(q) => vec![*q],
            Gate::Cx { control, target } => vec![*control, *target],
            Gate::Mcx { controls, target } => {
                let mut q = controls.clone();
                q.push(*target);
                q
            }
            Gate::PhaseFlip { qubits, .. } => qubits.clone(),
        }
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        if let Some(&bad) = qs.iter().find(|&&q| q >= n) {
            return Err(Error::IndexOutOfRange { index: bad, size: n });
        }
        let target = match self {
            Gate::Cx { target, .. } | Gate::Mcx { target, .. } => Some(*target),
            _ => None,
        };
        if let Some(t) = target {
            if qs[..qs.len() - 1].contains(&t) {
                return Err(Error::InvalidParameter(format!("qubit {t} is both control and target")));
            }
        }
        Ok(())
    }
}

impl PartialEq for Gate {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Gate::X(a), Gate::X(b)) | (Gate::H(a), Gate::H(b)) => a == b,
            (Gate::Cx { control: c1, target: t1 }, Gate::Cx { control: c2, target: t2 }) => c1 == c2 && t1 == t2,
            (Gate::Mcx { controls: c1, target: t1 }, Gate::Mcx { controls: c2, target: t2 }) => c1 == c2 && t1 == t2,
            (Gate::PhaseFlip { predicate: p1, .. }, Gate::PhaseFlip { predicate: p2, .. }) => Arc::ptr_eq(p1, p2),
            _ => false,
        }
    }
}

impl fmt::Debug for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::X(q) => write!(f, "X({q})"),
            Gate::H(q) => write!(f, "H({q})"),
            Gate::Cx { control, target } => write!(f, "CX({control}->{target})"),
            Gate::Mcx { controls, target } => write!(f, "MCX({controls:?}->{target})"),
            Gate::PhaseFlip { qubits, .. } => write!(f, "PHASE_FLIP({qubits:?})"),
        }
    }
}

/// Sparse unit vector over the patterns of a span.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseAxis {
    pub span: Span,
    pub entries: Vec<(u64, Complex64)>,
}

impl SparseAxis {
    pub fn new(span: Span, entries: Vec<(u64, Complex64)>) -> Self {
        Self { span, entries }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Tensor product of per-register axes laid side by side, first part lowest.
    pub fn product(parts: &[SparseAxis]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty("axis parts"))?;
        let mut span = first.span;
        let mut entries = first.entries.clone();
        for part in &parts[1..] {
            if part.span.start != span.end() {
                return Err(Error::InvalidParameter("axis parts must be adjacent".into()));
            }
            let shift = part.span.start - span.start;
            entries = entries
                .iter()
                .flat_map(|&(p, a)| part.entries.iter().map(move |&(q, b)| (p | q << shift, a * b)))
                .collect();
            span = Span::new(span.start, span.len + part.span.len);
        }
        Ok(Self { span, entries })
    }

    pub fn conj(&self) -> Self {
        Self { span: self.span, entries: self.entries.iter().map(|&(p, a)| (p, a.conj())).collect() }
    }

    pub fn shifted(&self, offset: usize) -> Self {
        Self { span: Span::new(self.span.start + offset, self.span.len), entries: self.entries.clone() }
    }
}

/// One step of a circuit plan.
#[derive(Clone, Debug)]
pub enum Op {
    Gate(Gate),
    /// Load a multiplicity-weighted superposition of rows into a baseline span.
    Inject {
        span: Span,
        rows: Vec<u64>,
    },
    /// `(2|a⟩⟨a| − I)` on the axis span, identity elsewhere.
    Reflect(Arc<SparseAxis>),
}

impl Op {
    pub fn kind(&self) -> GateKind {
        match self {
            Op::Gate(g) => g.kind(),
            Op::Inject { .. } => GateKind::Prepare,
            Op::Reflect(_) => GateKind::Reflect,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Op::Gate(g) => g.qubits(),
            Op::Inject { span, .. } => span.qubits().collect(),
            Op::Reflect(axis) => axis.span.qubits().collect(),
        }
    }
}

/// Ordered list of operations on `n` qubits.
#[derive(Clone, Debug, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<Op>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, ops: Vec::new() }
    }

    pub fn push(&mut self, op: Op) {
        self.ops.push(op);
    }

    pub fn gate(&mut self, g: Gate) {
        self.ops.push(Op::Gate(g));
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) {
        self.ops.extend(gates.into_iter().map(Op::Gate));
    }
}

/// Toffoli ladder for an MCX with `controls.len() ≥ 3`, using
/// `controls.len() - 2` scratch qubits that start and end in `|0⟩`.
///
/// Only used to report two-level gate counts; the simulator applies MCX as a
/// single kernel.
pub fn mcx_toffoli_ladder(controls: &[usize], target: usize, scratch: &[usize]) -> Result<Vec<Gate>> {
    let k = controls.len();
    match k {
        0 => return Ok(vec![Gate::X(target)]),
        1 => return Ok(vec![Gate::Cx { control: controls[0], target }]),
        2 => return Ok(vec![Gate::Mcx { controls: controls.to_vec(), target }]),
        _ => {}
    }
    if scratch.len() < k - 2 {
        return Err(Error::InvalidParameter(format!("ladder needs {} scratch qubits", k - 2)));
    }
    let toffoli = |a: usize, b: usize, t: usize| Gate::Mcx { controls: vec![a, b], target: t };
    let mut up = vec![toffoli(controls[0], controls[1], scratch[0])];
    for i in 2..k - 1 {
        up.push(toffoli(controls[i], scratch[i - 2], scratch[i - 1]));
    }
    let mut gates = up.clone();
    gates.push(toffoli(controls[k - 1], scratch[k - 3], target));
    gates.extend(up.into_iter().rev());
    Ok(gates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Gate::Cx { control: 1, target: 1 }.validate(3).is_err());
        assert!(Gate::X(3).validate(3).is_err());
        assert!(Gate::Mcx { controls: vec![0, 2], target: 1 }.validate(3).is_ok());
        assert!(Gate::Mcx { controls: vec![0, 1], target: 1 }.validate(3).is_err());
    }

    #[test]
    fn ladder_counts() {
        let g = mcx_toffoli_ladder(&[0, 1, 2, 3, 4], 5, &[6, 7, 8]).unwrap();
        assert_eq!(g.len(), 2 * (5 - 2) + 1);
        assert!(mcx_toffoli_ladder(&[0, 1, 2], 3, &[]).is_err());
    }

    #[test]
    fn axis_product() {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let a = SparseAxis::new(Span::new(0, 2), vec![(0b00, h), (0b11, h)]);
        let b = SparseAxis::new(Span::new(2, 1), vec![(1, Complex64::new(1.0, 0.0))]);
        let p = SparseAxis::product(&[a, b]).unwrap();
        assert_eq!(p.span, Span::new(0, 3));
        assert_eq!(p.entries.iter().map(|e| e.0).collect::<Vec<_>>(), vec![0b100, 0b111]);
        assert!((p.norm_sqr() - 1.0).abs() < 1e-15);
    }
}
