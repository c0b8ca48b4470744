use crate::error::{Error, Result};

/// Contiguous run of qubits `[start, start + len)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub len: usize,
}

impl Span {
    pub const fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    /// Mask of this span's bits within a basis index.
    pub fn mask(&self) -> usize {
        low_mask(self.len) << self.start
    }

    /// The span's bits of `index`, as a pattern with qubit `start` at bit 0.
    #[inline]
    pub fn extract(&self, index: usize) -> u64 {
        ((index >> self.start) & low_mask(self.len)) as u64
    }

    #[inline]
    pub fn deposit(&self, pattern: u64) -> usize {
        (pattern as usize & low_mask(self.len)) << self.start
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        self.start..self.end()
    }

    pub fn contains(&self, q: usize) -> bool {
        (self.start..self.end()).contains(&q)
    }
}

#[inline]
fn low_mask(len: usize) -> usize {
    if len >= usize::BITS as usize {
        usize::MAX
    } else {
        (1usize << len) - 1
    }
}

/// Named register layout.
///
/// The factorization layout is `[factor 0 | factor 1 | … | factor F-1 |
/// ancilla | output]` from qubit 0 upward, each factor and the ancilla being
/// `D` qubits wide. Qubit 0 is the least-significant bit of a basis index,
/// and element `d` of factor `f` sits on qubit `f·D + d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    factor_spans: Vec<Span>,
    ancilla: Option<Span>,
    output: Option<usize>,
    n: usize,
}

impl RegisterLayout {
    /// Layout for `F` factors of dimension `D`: `n = F·D + D + 1` qubits.
    pub fn factorization(factors: usize, dim: usize) -> Result<Self> {
        if factors == 0 || dim == 0 {
            return Err(Error::InvalidParameter("F and D must be >= 1".into()));
        }
        let factor_spans = (0..factors).map(|f| Span::new(f * dim, dim)).collect();
        let ancilla = Span::new(factors * dim, dim);
        Ok(Self { factor_spans, ancilla: Some(ancilla), output: Some(ancilla.end()), n: ancilla.end() + 1 })
    }

    /// Factor registers only, no ancilla or output line.
    pub fn factors_only(factors: usize, dim: usize) -> Result<Self> {
        if factors == 0 || dim == 0 {
            return Err(Error::InvalidParameter("F and D must be >= 1".into()));
        }
        Ok(Self {
            factor_spans: (0..factors).map(|f| Span::new(f * dim, dim)).collect(),
            ancilla: None,
            output: None,
            n: factors * dim,
        })
    }

    /// `n` anonymous qubits.
    pub fn plain(n: usize) -> Self {
        Self { factor_spans: Vec::new(), ancilla: None, output: None, n }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn factor_count(&self) -> usize {
        self.factor_spans.len()
    }

    pub fn factor(&self, f: usize) -> Span {
        self.factor_spans[f]
    }

    pub fn factor_spans(&self) -> &[Span] {
        &self.factor_spans
    }

    /// All factor registers as one span (they are contiguous from qubit 0).
    pub fn factors_span(&self) -> Span {
        let len = self.factor_spans.iter().map(|s| s.len).sum();
        Span::new(0, len)
    }

    pub fn ancilla(&self) -> Option<Span> {
        self.ancilla
    }

    pub fn output(&self) -> Option<usize> {
        self.output
    }

    /// Factor dimension `D`, if this layout has factor registers.
    pub fn dim(&self) -> Option<usize> {
        self.factor_spans.first().map(|s| s.len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorization_layout_partitions_qubits() {
        let l = RegisterLayout::factorization(3, 4).unwrap();
        assert_eq!(l.n_qubits(), 3 * 4 + 4 + 1);
        let mut covered = vec![0u8; l.n_qubits()];
        for s in l.factor_spans() {
            s.qubits().for_each(|q| covered[q] += 1);
        }
        l.ancilla().unwrap().qubits().for_each(|q| covered[q] += 1);
        covered[l.output().unwrap()] += 1;
        assert!(covered.iter().all(|&c| c == 1));
        assert_eq!(l.factors_span(), Span::new(0, 12));
    }

    #[test]
    fn span_extract_deposit() {
        let s = Span::new(3, 4);
        assert_eq!(s.mask(), 0b111_1000);
        assert_eq!(s.extract(0b1010_1000), 0b0101);
        assert_eq!(s.deposit(0b0101), 0b010_1000);
    }
}
