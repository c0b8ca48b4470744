//! Multiply-Add-Permute hypervector algebra.
//!
//! Hypervectors are bipolar (`±1`). Binding is the element-wise product,
//! bundling the element-wise integer sum, permutation a circular shift and
//! similarity the normalized dot product. Under the mapping `+1 ↔ 0`,
//! `-1 ↔ 1` binding becomes XOR of bit strings, which is what lets a register
//! of qubits hold a hypervector.

mod bits;
mod codebook;
mod factorize;

pub use bits::BitString;
pub use codebook::{CodebookSet, CODEBOOK_MAGIC, CODEBOOK_VERSION};
pub use factorize::{
    brute_force_factorize, find_unique_instance, solution_counts, FactorAssignment, Factorization, SearchMode,
    UniqueInstance,
};

use crate::error::{Error, Result};
use rand::Rng;

/// A bipolar hypervector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypervector {
    elements: Vec<i8>,
}

impl Hypervector {
    /// Build from raw elements; every element must be exactly `-1` or `+1`.
    pub fn new(elements: Vec<i8>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Empty("hypervector"));
        }
        if let Some(&bad) = elements.iter().find(|&&e| e != 1 && e != -1) {
            return Err(Error::NotBipolar(bad as i64));
        }
        Ok(Self { elements })
    }

    pub fn from_slice(elements: &[i8]) -> Result<Self> {
        Self::new(elements.to_vec())
    }

    /// Build from bools where `true` means `-1`.
    pub fn from_negative_mask(mask: impl IntoIterator<Item = bool>) -> Result<Self> {
        Self::new(mask.into_iter().map(|neg| if neg { -1 } else { 1 }).collect())
    }

    pub fn ones(dim: usize) -> Self {
        assert!(dim >= 1, "hypervector dimension must be positive");
        Self { elements: vec![1; dim] }
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        assert!(dim >= 1, "hypervector dimension must be positive");
        Self { elements: (0..dim).map(|_| if rng.gen::<bool>() { -1 } else { 1 }).collect() }
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[i8] {
        &self.elements
    }

    pub fn neg(&self) -> Self {
        Self { elements: self.elements.iter().map(|&e| -e).collect() }
    }

    pub fn to_bits(&self) -> BitString {
        bipolar_to_bits(self)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(())
    }
}

/// Unthresholded bundle: element-wise integer sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleVector {
    elements: Vec<i32>,
    count: usize,
}

impl BundleVector {
    pub fn elements(&self) -> &[i32] {
        &self.elements
    }

    /// Number of bundled constituents.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Sign threshold with ties resolved to `+1`.
    pub fn sign(&self) -> Hypervector {
        Hypervector { elements: sign_ties_positive(&self.elements) }
    }
}

pub(crate) fn sign_ties_positive(values: &[i32]) -> Vec<i8> {
    values.iter().map(|&v| if v >= 0 { 1 } else { -1 }).collect()
}

pub fn bind(a: &Hypervector, b: &Hypervector) -> Result<Hypervector> {
    a.check_dim(b)?;
    Ok(Hypervector { elements: a.elements.iter().zip(&b.elements).map(|(x, y)| x * y).collect() })
}

pub fn bundle(vs: &[Hypervector]) -> Result<BundleVector> {
    let first = vs.first().ok_or(Error::Empty("bundle input"))?;
    let mut sums = vec![0i32; first.dim()];
    for v in vs {
        first.check_dim(v)?;
        for (s, &e) in sums.iter_mut().zip(&v.elements) {
            *s += e as i32;
        }
    }
    Ok(BundleVector { elements: sums, count: vs.len() })
}

/// Circular shift: `result[i] = h[(i - k) mod D]`.
pub fn permute(h: &Hypervector, k: i64) -> Hypervector {
    let d = h.dim() as i64;
    let shift = k.rem_euclid(d) as usize;
    let mut elements = h.elements.clone();
    elements.rotate_right(shift);
    Hypervector { elements }
}

/// `a·b / D`.
pub fn similarity(a: &Hypervector, b: &Hypervector) -> Result<f64> {
    a.check_dim(b)?;
    let dot: i64 = a.elements.iter().zip(&b.elements).map(|(&x, &y)| (x * y) as i64).sum();
    Ok(dot as f64 / a.dim() as f64)
}

/// `+1 → 0`, `-1 → 1`.
pub fn bipolar_to_bits(h: &Hypervector) -> BitString {
    BitString::from_bools(h.elements.iter().map(|&e| e < 0))
}

pub fn bits_to_bipolar(bits: &BitString) -> Hypervector {
    Hypervector { elements: bits.iter().map(|b| if b { -1 } else { 1 }).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn hv(e: &[i8]) -> Hypervector {
        Hypervector::from_slice(e).unwrap()
    }

    #[test]
    fn rejects_non_bipolar() {
        assert_eq!(Hypervector::new(vec![1, 0, -1]), Err(Error::NotBipolar(0)));
        assert!(Hypervector::new(vec![]).is_err());
    }

    #[test]
    fn bind_examples() {
        let mut r = rng::seeded(1);
        let h = Hypervector::random(32, &mut r);
        assert_eq!(bind(&h, &h).unwrap(), Hypervector::ones(32));
        assert_eq!(bind(&h, &Hypervector::ones(32)).unwrap(), h);
        assert_eq!(bind(&hv(&[1, -1, 1]), &hv(&[-1, -1, 1])).unwrap(), hv(&[-1, 1, 1]));
        assert!(matches!(bind(&hv(&[1, 1]), &hv(&[1])), Err(Error::DimensionMismatch { expected: 2, actual: 1 })));
    }

    #[test]
    fn bundle_examples() {
        let mut r = rng::seeded(2);
        let h = Hypervector::random(16, &mut r);
        let single = bundle(std::slice::from_ref(&h)).unwrap();
        assert_eq!(single.elements(), &h.elements().iter().map(|&e| e as i32).collect::<Vec<_>>()[..]);
        assert!(bundle(&[h.clone(), h.neg()]).unwrap().elements().iter().all(|&e| e == 0));
        let three: Vec<_> = (0..3).map(|_| Hypervector::random(64, &mut r)).collect();
        let b = bundle(&three).unwrap();
        assert!(b.elements().iter().all(|e| [-3, -1, 1, 3].contains(e)));
        assert!(b.elements().iter().all(|e| e.unsigned_abs() as usize <= b.count()));
        assert_eq!(bundle(&[]), Err(Error::Empty("bundle input")));
        assert!(bundle(&[hv(&[1]), hv(&[1, 1])]).is_err());
    }

    #[test]
    fn sign_threshold_ties_go_positive() {
        let b = bundle(&[hv(&[1, -1, -1]), hv(&[-1, -1, 1])]).unwrap();
        assert_eq!(b.sign(), hv(&[1, -1, 1]));
    }

    #[test]
    fn permute_examples() {
        let mut r = rng::seeded(3);
        let h = Hypervector::random(11, &mut r);
        assert_eq!(permute(&h, 0), h);
        assert_eq!(permute(&permute(&h, 4), 11 - 4), h);
        assert_eq!(permute(&permute(&h, -3), 3), h);
        assert_eq!(permute(&hv(&[1, -1, -1]), 1), hv(&[-1, 1, -1]));
    }

    #[test]
    fn similarity_examples() {
        let mut r = rng::seeded(4);
        let h = Hypervector::random(100, &mut r);
        assert_eq!(similarity(&h, &h).unwrap(), 1.0);
        assert_eq!(similarity(&h, &h.neg()).unwrap(), -1.0);
    }

    #[test]
    fn bit_mapping_examples() {
        let bits = bipolar_to_bits(&hv(&[1, -1, 1]));
        assert_eq!(bits.to_string(), "010");
        assert_eq!(bits_to_bipolar(&bits), hv(&[1, -1, 1]));
    }

    #[test]
    fn bind_is_xor_exhaustive_small_dims() {
        for d in 1..=4usize {
            let all: Vec<Hypervector> = (0..1u32 << d)
                .map(|m| Hypervector::from_negative_mask((0..d).map(|i| m >> i & 1 == 1)).unwrap())
                .collect();
            for a in &all {
                for b in &all {
                    let lhs = bipolar_to_bits(&bind(a, b).unwrap());
                    let rhs = bipolar_to_bits(a).xor(&bipolar_to_bits(b)).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    fn arb_hv(d: usize) -> impl Strategy<Value = Hypervector> {
        proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], d).prop_map(|e| Hypervector::new(e).unwrap())
    }

    proptest! {
        #[test]
        fn binding_group_laws((a, b, c) in (1usize..40).prop_flat_map(|d| (arb_hv(d), arb_hv(d), arb_hv(d)))) {
            let ab = bind(&a, &b).unwrap();
            prop_assert_eq!(&ab, &bind(&b, &a).unwrap());
            prop_assert_eq!(bind(&ab, &c).unwrap(), bind(&a, &bind(&b, &c).unwrap()).unwrap());
            prop_assert_eq!(bind(&ab, &b).unwrap(), a.clone());
            prop_assert_eq!(bind(&a, &Hypervector::ones(a.dim())).unwrap(), a.clone());
        }

        #[test]
        fn similarity_symmetric_bounded((a, b) in (1usize..64).prop_flat_map(|d| (arb_hv(d), arb_hv(d)))) {
            let s = similarity(&a, &b).unwrap();
            prop_assert_eq!(s, similarity(&b, &a).unwrap());
            prop_assert!((-1.0..=1.0).contains(&s));
        }

        #[test]
        fn bits_round_trip(a in (1usize..200).prop_flat_map(arb_hv)) {
            prop_assert_eq!(bits_to_bipolar(&bipolar_to_bits(&a)), a);
        }
    }
}
