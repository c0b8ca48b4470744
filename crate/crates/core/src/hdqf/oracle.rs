use crate::error::{Error, Result};
use crate::hdc::{BitString, Hypervector};
use crate::qsim::{Gate, RegisterLayout, Span, StateVector};

/// The compute / test / uncompute oracle on the factorization layout.
///
/// With the output line in `|−⟩`, the net action is a phase of `−1` on
/// factor-register basis states whose XOR equals the target bits.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCircuit {
    gates: Vec<Gate>,
    target_bits: BitString,
    factors: usize,
    dim: usize,
}

/// `2·F·D + 2·zeros(v) + 1`.
pub fn oracle_gate_count(factors: usize, target_bits: &BitString) -> usize {
    2 * factors * target_bits.len() + 2 * target_bits.count_zeros() + 1
}

pub fn build_oracle(target: &Hypervector, factors: usize) -> Result<OracleCircuit> {
    if factors == 0 {
        return Err(Error::InvalidParameter("F must be >= 1".into()));
    }
    let dim = target.dim();
    let layout = RegisterLayout::factorization(factors, dim)?;
    let ancilla = layout.ancilla().expect("factorization layout");
    let output = layout.output().expect("factorization layout");
    let target_bits = target.to_bits();

    let mut mxor = Vec::with_capacity(factors * dim);
    for d in 0..dim {
        for f in 0..factors {
            mxor.push(Gate::Cx { control: layout.factor(f).start + d, target: ancilla.start + d });
        }
    }
    // after the mask an ancilla bit is 1 iff it agrees with the target bit
    let mask: Vec<Gate> = (0..dim).filter(|&d| !target_bits.get(d)).map(|d| Gate::X(ancilla.start + d)).collect();

    let mut gates = mxor.clone();
    gates.extend(mask.iter().cloned());
    gates.push(Gate::Mcx { controls: ancilla.qubits().collect(), target: output });
    gates.extend(mask.into_iter().rev());
    gates.extend(mxor.into_iter().rev());
    Ok(OracleCircuit { gates, target_bits, factors, dim })
}

impl OracleCircuit {
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn target_bits(&self) -> &BitString {
        &self.target_bits
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layout(&self) -> RegisterLayout {
        RegisterLayout::factorization(self.factors, self.dim).expect("validated at build")
    }

    /// Target bits as a `D`-bit register pattern.
    pub fn target_pattern(&self) -> u64 {
        self.target_bits.to_u64().expect("register patterns need D <= 64")
    }

    /// Whether a full factor-register pattern (factor 0 lowest) is marked.
    pub fn marks(&self, factors_pattern: u64) -> bool {
        let m = (1u64 << self.dim) - 1;
        let x = (0..self.factors).fold(0, |acc, f| acc ^ (factors_pattern >> (f * self.dim) & m));
        x == self.target_pattern()
    }

    /// Run the gate list on a factorization-layout state.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.check_layout(state)?;
        state.apply_all(&self.gates)
    }

    /// Same phase action without the ancilla: a direct phase flip.
    pub fn apply_implicit(&self, state: &mut StateVector) -> Result<()> {
        if self.dim > 64 || self.factors * self.dim > 64 {
            return Err(Error::InvalidParameter("implicit oracle needs F·D <= 64".into()));
        }
        let span = Span::new(0, self.factors * self.dim);
        state.phase_flip_where(span, |p| self.marks(p))
    }

    fn check_layout(&self, state: &StateVector) -> Result<()> {
        if state.layout() != &self.layout() {
            return Err(Error::LayoutMismatch(format!(
                "oracle built for F={}, D={}; state has {} qubits",
                self.factors,
                self.dim,
                state.n_qubits()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hv(bits: &str) -> Hypervector {
        crate::hdc::bits_to_bipolar(&BitString::parse(bits).unwrap())
    }

    #[test]
    fn structure_is_compute_test_uncompute() {
        let o = build_oracle(&hv("1101"), 3).unwrap();
        let g = o.gates();
        let mid = g.len() / 2;
        assert!(matches!(g[mid], Gate::Mcx { .. }));
        for i in 0..mid {
            assert_eq!(g[i], g[g.len() - 1 - i]);
        }
        assert_eq!(o.gate_count(), 2 * 3 * 4 + 2 + 1);
        assert_eq!(o.gate_count(), oracle_gate_count(3, o.target_bits()));
    }

    #[test]
    fn mxor_example() {
        // two 5-bit factors 10110 and 01101 leave 11011 on the ancilla after the chain
        let o = build_oracle(&hv("00000"), 2).unwrap();
        let layout = o.layout();
        let a = BitString::parse("10110").unwrap().to_u64().unwrap();
        let b = BitString::parse("01101").unwrap().to_u64().unwrap();
        let start = layout.factor(0).deposit(a) | layout.factor(1).deposit(b);
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << layout.n_qubits()];
        amps[start] = 1.0.into();
        let mut s = StateVector::from_amplitudes(amps, layout.clone()).unwrap();
        s.apply_all(&o.gates()[..10]).unwrap();
        let anc = layout.ancilla().unwrap();
        let expect = BitString::parse("11011").unwrap().to_u64().unwrap();
        assert_eq!(s.probability_of(anc, expect).unwrap(), 1.0);
    }

    #[test]
    fn mask_example() {
        // ancilla 1001 against target 1101: the mask flips bit 2 only, giving 1011
        let o = build_oracle(&hv("1101"), 1).unwrap();
        let layout = o.layout();
        let anc = layout.ancilla().unwrap();
        let q = BitString::parse("1001").unwrap().to_u64().unwrap();
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << layout.n_qubits()];
        amps[anc.deposit(q)] = 1.0.into();
        let mut s = StateVector::from_amplitudes(amps, layout.clone()).unwrap();
        let masks: Vec<Gate> = o.gates().iter().skip(4).take_while(|g| matches!(g, Gate::X(_))).cloned().collect();
        assert_eq!(masks.len(), 1);
        s.apply_all(&masks).unwrap();
        let after = BitString::parse("1011").unwrap().to_u64().unwrap();
        assert_eq!(s.probability_of(anc, after).unwrap(), 1.0);
        // MCX does not fire: output line unchanged
        s.apply(&o.gates()[5]).unwrap();
        assert_eq!(s.probability_of(Span::new(layout.output().unwrap(), 1), 0).unwrap(), 1.0);
    }

    #[test]
    fn marks_by_xor() {
        let o = build_oracle(&hv("011"), 2).unwrap();
        let v = o.target_pattern();
        assert!(o.marks(0b101 | (0b101 ^ v) << 3));
        assert!(!o.marks(0b101 | 0b101 << 3));
    }
}
