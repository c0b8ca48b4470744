//! Exhaustive classical factorization and instance construction.

use super::{bind, BitString, CodebookSet, Hypervector};
use crate::error::{Error, Result};
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;

/// One codevector index per factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorAssignment(pub Vec<usize>);

impl FactorAssignment {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Lexicographic rank with factor 0 most significant.
    pub fn rank(&self, size: usize) -> u64 {
        self.0.iter().fold(0u64, |acc, &i| acc * size as u64 + i as u64)
    }

    pub fn from_rank(mut rank: u64, size: usize, factors: usize) -> Self {
        let mut idx = vec![0; factors];
        for slot in idx.iter_mut().rev() {
            *slot = (rank % size as u64) as usize;
            rank /= size as u64;
        }
        Self(idx)
    }

    /// Componentwise product of the selected codevectors.
    pub fn bind_all(&self, books: &CodebookSet) -> Result<Hypervector> {
        if self.0.len() != books.factors() {
            return Err(Error::DimensionMismatch { expected: books.factors(), actual: self.0.len() });
        }
        let mut acc = Hypervector::ones(books.dim());
        for (f, &i) in self.0.iter().enumerate() {
            if i >= books.size() {
                return Err(Error::IndexOutOfRange { index: i, size: books.size() });
            }
            acc = bind(&acc, books.row(f, i))?;
        }
        Ok(acc)
    }
}

impl std::fmt::Display for FactorAssignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Enumerate all `N^F` candidates.
    Exhaustive,
    /// Stop at the first hit; comparisons count candidates up to and including it.
    FirstHit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    /// Valid assignments in lexicographic order.
    pub solutions: Vec<FactorAssignment>,
    /// Candidate evaluations performed.
    pub comparisons: u64,
}

impl Factorization {
    pub fn count(&self) -> usize {
        self.solutions.len()
    }
}

/// Packed rows, one `Vec<u64>` of words per `(f, i)`.
struct PackedBooks {
    words: usize,
    rows: Vec<Vec<u64>>,
    size: usize,
    factors: usize,
}

impl PackedBooks {
    fn new(books: &CodebookSet) -> Self {
        let rows: Vec<Vec<u64>> = (0..books.factors())
            .flat_map(|f| (0..books.size()).map(move |i| (f, i)))
            .map(|(f, i)| books.row(f, i).to_bits().words().to_vec())
            .collect();
        Self { words: books.dim().div_ceil(64), rows, size: books.size(), factors: books.factors() }
    }

    fn row(&self, f: usize, i: usize) -> &[u64] {
        &self.rows[f * self.size + i]
    }

    /// Visit every assignment in lexicographic order with its bound product.
    /// The visitor returns `false` to stop.
    fn for_each_product(&self, mut visit: impl FnMut(&[usize], &[u64]) -> bool) {
        let (fc, w) = (self.factors, self.words);
        let mut idx = vec![0usize; fc];
        // prefix[f] = XOR of rows 0..=f
        let mut prefix = vec![0u64; fc * w];
        let refresh = |prefix: &mut [u64], idx: &[usize], from: usize| {
            for f in from..fc {
                for k in 0..w {
                    let prev = if f == 0 { 0 } else { prefix[(f - 1) * w + k] };
                    prefix[f * w + k] = prev ^ self.row(f, idx[f])[k];
                }
            }
        };
        refresh(&mut prefix, &idx, 0);
        loop {
            if !visit(&idx, &prefix[(fc - 1) * w..]) {
                return;
            }
            // odometer, last factor fastest
            let mut f = fc;
            loop {
                if f == 0 {
                    return;
                }
                f -= 1;
                idx[f] += 1;
                if idx[f] < self.size {
                    break;
                }
                idx[f] = 0;
            }
            refresh(&mut prefix, &idx, f);
        }
    }
}

/// All assignments whose binding equals `target`, by lexicographic enumeration.
pub fn brute_force_factorize(target: &Hypervector, books: &CodebookSet, mode: SearchMode) -> Result<Factorization> {
    if target.dim() != books.dim() {
        return Err(Error::DimensionMismatch { expected: books.dim(), actual: target.dim() });
    }
    let packed = PackedBooks::new(books);
    let goal = target.to_bits();
    let goal = goal.words();
    let mut solutions = Vec::new();
    let mut comparisons = 0u64;
    packed.for_each_product(|idx, product| {
        comparisons += 1;
        if product == goal {
            solutions.push(FactorAssignment(idx.to_vec()));
            if mode == SearchMode::FirstHit {
                return false;
            }
        }
        true
    });
    Ok(Factorization { solutions, comparisons })
}

/// Number of assignments producing each reachable bound vector.
pub fn solution_counts(books: &CodebookSet) -> HashMap<BitString, usize> {
    let packed = PackedBooks::new(books);
    let dim = books.dim();
    let mut counts: HashMap<Vec<u64>, usize> = HashMap::new();
    packed.for_each_product(|_, product| {
        *counts.entry(product.to_vec()).or_default() += 1;
        true
    });
    counts
        .into_iter()
        .map(|(words, c)| {
            let bits = BitString::from_bools((0..dim).map(|d| words[d / 64] >> (d % 64) & 1 == 1));
            (bits, c)
        })
        .collect()
}

/// Distinct-row codebooks together with a target that has exactly `t`
/// factorizations.
#[derive(Clone, Debug)]
pub struct UniqueInstance {
    pub books: CodebookSet,
    pub target: Hypervector,
    pub solutions: Vec<FactorAssignment>,
    /// Random draws tried before success.
    pub attempts: usize,
    /// Row replacements applied by the local search (0 if a random draw sufficed).
    pub repairs: usize,
}

/// Find distinct-row codebooks and a target with exactly `t` solutions.
///
/// Random draws are tried first. If none of `attempts` draws contains such a
/// target, the first draw is repaired by seeded row replacement, accepting a
/// move when it does not move the closest achievable multiplicity away from
/// `t`. Dense instances (`N^F ≫ 2^D`) need the repair step.
pub fn find_unique_instance(
    seed: u64,
    factors: usize,
    size: usize,
    dim: usize,
    t: usize,
    attempts: usize,
) -> Result<UniqueInstance> {
    const REPAIR_STEPS: usize = 20_000;
    if t == 0 {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    let pick = |books: &CodebookSet, rng: &mut rng::Rng| -> Option<Hypervector> {
        let mut hits: Vec<BitString> =
            solution_counts(books).into_iter().filter(|&(_, c)| c == t).map(|(b, _)| b).collect();
        hits.sort();
        hits.choose(rng).map(super::bits_to_bipolar)
    };
    let finish = |books: CodebookSet, target: Hypervector, attempts, repairs| {
        let solutions = brute_force_factorize(&target, &books, SearchMode::Exhaustive)?.solutions;
        Ok(UniqueInstance { books, target, solutions, attempts, repairs })
    };

    let mut first = None;
    for attempt in 0..attempts.max(1) {
        let books = CodebookSet::generate_distinct(seed.wrapping_add(attempt as u64), factors, size, dim)?;
        let mut rng = rng::stream(seed, 1 + attempt as u64);
        if let Some(target) = pick(&books, &mut rng) {
            return finish(books, target, attempt + 1, 0);
        }
        first.get_or_insert(books);
    }

    // distance of the nearest reachable multiplicity to t
    let score =
        |books: &CodebookSet| solution_counts(books).values().map(|&c| c.abs_diff(t)).min().unwrap_or(usize::MAX);
    let mut books = first.expect("at least one attempt");
    let mut rng = rng::stream(seed, 0xFFFF_FFFF);
    let mut current = score(&books);
    for step in 0..REPAIR_STEPS {
        if current == 0 {
            let target = pick(&books, &mut rng).expect("score 0 means a hit exists");
            return finish(books, target, attempts, step);
        }
        let f = rng.gen_range(0..factors);
        let i = rng.gen_range(0..size);
        let candidate = Hypervector::random(dim, &mut rng);
        if books.codebook(f).contains(&candidate) {
            continue;
        }
        let old = books.row(f, i).clone();
        books.set_row(f, i, candidate)?;
        let s = score(&books);
        if s <= current {
            current = s;
        } else {
            books.set_row(f, i, old)?;
        }
    }
    Err(Error::InstanceNotFound(attempts + REPAIR_STEPS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_round_trip() {
        let a = FactorAssignment(vec![2, 0, 3]);
        assert_eq!(a.rank(4), 2 * 16 + 3);
        assert_eq!(FactorAssignment::from_rank(35, 4, 3), a);
    }

    #[test]
    fn bind_all_examples() {
        let books = CodebookSet::generate(5, 1, 3, 9).unwrap();
        assert_eq!(&FactorAssignment(vec![1]).bind_all(&books).unwrap(), books.row(0, 1));
        let h = books.row(0, 2).clone();
        let same = CodebookSet::from_rows(vec![vec![h.clone()], vec![h]], 0).unwrap();
        assert_eq!(FactorAssignment(vec![0, 0]).bind_all(&same).unwrap(), Hypervector::ones(9));
        assert!(FactorAssignment(vec![3]).bind_all(&books).is_err());
        assert!(FactorAssignment(vec![0, 0]).bind_all(&books).is_err());
    }

    #[test]
    fn bind_all_matches_fold() {
        let books = CodebookSet::generate(17, 3, 4, 8).unwrap();
        let a = FactorAssignment(vec![3, 1, 2]);
        let fold = bind(&bind(books.row(0, 3), books.row(1, 1)).unwrap(), books.row(2, 2)).unwrap();
        assert_eq!(a.bind_all(&books).unwrap(), fold);
    }

    #[test]
    fn planted_solution_is_found() {
        let books = CodebookSet::generate(21, 2, 4, 12).unwrap();
        let planted = FactorAssignment(vec![3, 1]);
        let target = planted.bind_all(&books).unwrap();
        let res = brute_force_factorize(&target, &books, SearchMode::Exhaustive).unwrap();
        assert!(res.solutions.contains(&planted));
        assert_eq!(res.comparisons, 16);
        let first = brute_force_factorize(&target, &books, SearchMode::FirstHit).unwrap();
        assert_eq!(first.comparisons, res.solutions[0].rank(4) + 1);
    }

    #[test]
    fn single_factor_exact_match() {
        let books = CodebookSet::generate_distinct(4, 1, 4, 6).unwrap();
        let res = brute_force_factorize(books.row(0, 2), &books, SearchMode::Exhaustive).unwrap();
        assert_eq!(res.solutions, vec![FactorAssignment(vec![2])]);
    }

    #[test]
    fn enumeration_order_is_lexicographic_across_words() {
        // D > 64 exercises multi-word XOR
        let books = CodebookSet::generate(8, 3, 3, 130).unwrap();
        let planted = FactorAssignment(vec![2, 0, 1]);
        let target = planted.bind_all(&books).unwrap();
        let res = brute_force_factorize(&target, &books, SearchMode::FirstHit).unwrap();
        assert_eq!(res.solutions, vec![planted.clone()]);
        assert_eq!(res.comparisons, planted.rank(3) + 1);
    }

    #[test]
    fn no_solution_is_empty() {
        let books = CodebookSet::generate(9, 2, 2, 40).unwrap();
        let res = brute_force_factorize(&Hypervector::ones(40), &books, SearchMode::Exhaustive);
        // a random D=40 target is unreachable unless it happens to equal a product
        let counts = solution_counts(&books);
        let expected = counts.get(&Hypervector::ones(40).to_bits()).copied().unwrap_or(0);
        assert_eq!(res.unwrap().count(), expected);
        assert!(brute_force_factorize(&Hypervector::ones(3), &books, SearchMode::Exhaustive).is_err());
    }

    #[test]
    fn counts_cover_search_space() {
        let books = CodebookSet::generate(12, 3, 5, 6).unwrap();
        let total: usize = solution_counts(&books).values().sum();
        assert_eq!(total as u64, books.search_space());
    }

    #[test]
    fn pigeonhole_forces_non_unique_targets() {
        // 7^4 = 2401 products into 2^10 = 1024 vectors
        let books = CodebookSet::generate(1, 4, 7, 10).unwrap();
        assert!(solution_counts(&books).values().any(|&c| c >= 2));
    }

    #[test]
    fn random_instances_are_mostly_unique() {
        let mut unique = 0;
        for s in 0..200u64 {
            let books = CodebookSet::generate(1000 + s, 3, 8, 64).unwrap();
            let mut r = rng::stream(s, 3);
            let planted = FactorAssignment((0..3).map(|_| r.gen_range(0..8)).collect());
            let target = planted.bind_all(&books).unwrap();
            let res = brute_force_factorize(&target, &books, SearchMode::Exhaustive).unwrap();
            assert!(res.solutions.contains(&planted));
            unique += (res.count() == 1) as usize;
        }
        assert!(unique >= 190, "{unique}/200 unique");
    }

    #[test]
    fn unique_instance_dense_case_needs_repair() {
        let inst = find_unique_instance(5, 3, 8, 5, 1, 4).unwrap();
        assert!(inst.books.has_distinct_rows());
        assert_eq!(inst.solutions.len(), 1);
        assert!(inst.repairs > 0);
        assert_eq!(inst.solutions[0].bind_all(&inst.books).unwrap(), inst.target);
    }

    #[test]
    fn unique_instance_sparse_case_is_random() {
        let inst = find_unique_instance(5, 2, 4, 5, 1, 10).unwrap();
        assert_eq!(inst.repairs, 0);
        assert_eq!(inst.solutions.len(), 1);
        let two = find_unique_instance(6, 4, 7, 10, 2, 10).unwrap();
        assert_eq!(two.solutions.len(), 2);
    }
}
