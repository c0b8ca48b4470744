use crate::error::{Error, Result};
use crate::hdc::CodebookSet;
use crate::qsim::multiplicity_amplitudes;

/// Grover dynamics restricted to the prepared support.
///
/// The prepared state and every oracle / diffusion image of it lives in the
/// span of `|r_0⟩|r_1⟩…|r_{F-1}⟩` with `r_f` ranging over the distinct rows of
/// codebook `f`, so amplitudes are kept only there. Index `f` varies with
/// stride `Π_{g<f} n_g` (factor 0 fastest, like the qubit order).
#[derive(Clone, Debug)]
pub struct SupportState {
    dim: usize,
    /// Distinct row patterns per factor, sorted.
    rows: Vec<Vec<u64>>,
    /// First codebook index holding each distinct row.
    first_index: Vec<Vec<usize>>,
    axis: Vec<f64>,
    amps: Vec<f64>,
    marked: Vec<bool>,
}

impl SupportState {
    /// Prepared superposition, with the marked set defined by `target_pattern`.
    pub fn prepare(books: &CodebookSet, target_pattern: u64) -> Result<Self> {
        let dim = books.dim();
        if dim > 64 {
            return Err(Error::InvalidParameter("register patterns need D <= 64".into()));
        }
        let mut rows = Vec::new();
        let mut first_index = Vec::new();
        let mut weights = Vec::new();
        for f in 0..books.factors() {
            let patterns = books.row_patterns(f);
            let amps = multiplicity_amplitudes(&patterns);
            first_index.push(amps.iter().map(|(r, _)| patterns.iter().position(|p| p == r).unwrap()).collect());
            rows.push(amps.iter().map(|a| a.0).collect::<Vec<_>>());
            weights.push(amps.into_iter().map(|a| a.1).collect::<Vec<_>>());
        }
        let size: usize = rows.iter().map(Vec::len).product();
        let mut axis = vec![1.0; size];
        let mut xor = vec![0u64; size];
        let mut stride = 1;
        for (rs, ws) in rows.iter().zip(&weights) {
            for i in 0..size {
                let k = (i / stride) % rs.len();
                axis[i] *= ws[k];
                xor[i] ^= rs[k];
            }
            stride *= rs.len();
        }
        let marked = xor.iter().map(|&x| x == target_pattern).collect();
        Ok(Self { dim, rows, first_index, amps: axis.clone(), axis, marked })
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn marked(&self) -> &[bool] {
        &self.marked
    }

    /// Oracle then diffusion.
    pub fn iterate(&mut self) {
        for (a, &m) in self.amps.iter_mut().zip(&self.marked) {
            if m {
                *a = -*a;
            }
        }
        let overlap: f64 = self.amps.iter().zip(&self.axis).map(|(a, w)| a * w).sum();
        for (a, w) in self.amps.iter_mut().zip(&self.axis) {
            *a = 2.0 * overlap * w - *a;
        }
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.amps[i] * self.amps[i]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a * a).collect()
    }

    pub fn marked_probability(&self) -> f64 {
        self.amps.iter().zip(&self.marked).filter(|(_, &m)| m).map(|(a, _)| a * a).sum()
    }

    /// Per-factor distinct-row positions of support index `i`.
    pub fn digits(&self, mut i: usize) -> Vec<usize> {
        self.rows
            .iter()
            .map(|rs| {
                let k = i % rs.len();
                i /= rs.len();
                k
            })
            .collect()
    }

    /// Support index of a tuple of row patterns, if every pattern is a row.
    pub fn index_of_patterns(&self, patterns: &[u64]) -> Option<usize> {
        let mut idx = 0;
        let mut stride = 1;
        for (rs, p) in self.rows.iter().zip(patterns) {
            idx += rs.binary_search(p).ok()? * stride;
            stride *= rs.len();
        }
        Some(idx)
    }

    /// Full factor-register pattern (factor 0 in the low `D` bits).
    pub fn register_pattern(&self, i: usize) -> u64 {
        self.digits(i).iter().enumerate().fold(0, |acc, (f, &k)| acc | self.rows[f][k] << (f * self.dim))
    }

    /// Codebook indices (first matching row per factor) of support index `i`.
    pub fn assignment(&self, i: usize) -> Vec<usize> {
        self.digits(i).iter().enumerate().map(|(f, &k)| self.first_index[f][k]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdc::Hypervector;

    #[test]
    fn support_size_is_product_of_distinct_counts() {
        let h = |v: &[i8]| Hypervector::from_slice(v).unwrap();
        let books = CodebookSet::from_rows(
            vec![vec![h(&[1, 1]), h(&[1, 1]), h(&[-1, 1])], vec![h(&[1, -1]), h(&[-1, -1]), h(&[1, 1])]],
            0,
        )
        .unwrap();
        let s = SupportState::prepare(&books, 0).unwrap();
        assert_eq!(s.len(), 2 * 3);
        let norm: f64 = s.probabilities().iter().sum();
        assert!((norm - 1.0).abs() < 1e-12);
        // duplicated first row carries 4/5 of factor 0's mass
        let p0: f64 = (0..s.len()).filter(|&i| s.digits(i)[0] == 0).map(|i| s.probability(i)).sum();
        assert!((p0 - 0.8).abs() < 1e-12);
        assert_eq!(s.assignment(0)[0], 0);
    }
}
