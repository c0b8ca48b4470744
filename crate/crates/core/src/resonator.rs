//! Resonator-network factorization baseline.
//!
//! Update: `x̂_f ← sign(C_f C_fᵀ (v ⊙ Π_{g≠f} x̂_g))`, all factors at once,
//! ties to `+1`.

use crate::error::{Error, Result};
use crate::hdc::{bundle, CodebookSet, FactorAssignment, Hypervector};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;
use std::collections::HashSet;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    /// Sign of each codebook's bundle.
    Bundle,
    /// Independent uniform bipolar vectors.
    Random,
}

impl std::str::FromStr for Init {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bundle" => Ok(Init::Bundle),
            "random" => Ok(Init::Random),
            _ => Err(Error::InvalidParameter(format!("unknown init {s:?}"))),
        }
    }
}

impl std::fmt::Display for Init {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Init::Bundle => "bundle",
            Init::Random => "random",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResonatorState {
    pub estimates: Vec<Hypervector>,
    pub iteration: usize,
}

pub fn resonator_init<R: Rng + ?Sized>(books: &CodebookSet, init: Init, rng: &mut R) -> ResonatorState {
    let estimates = (0..books.factors())
        .map(|f| match init {
            Init::Bundle => bundle(books.codebook(f)).expect("non-empty codebook").sign(),
            Init::Random => Hypervector::random(books.dim(), rng),
        })
        .collect();
    ResonatorState { estimates, iteration: 0 }
}

/// `sign(C Cᵀ u)` with ties to `+1`.
fn project(book: &[Hypervector], u: &[i32]) -> Vec<i8> {
    let mut w = vec![0i32; u.len()];
    for row in book {
        let a: i32 = row.elements().iter().zip(u).map(|(&c, &x)| c as i32 * x).sum();
        for (wi, &c) in w.iter_mut().zip(row.elements()) {
            *wi += a * c as i32;
        }
    }
    w.iter().map(|&x| if x < 0 { -1 } else { 1 }).collect()
}

/// One synchronous update of every estimate.
pub fn resonator_step(state: &ResonatorState, target: &Hypervector, books: &CodebookSet) -> Result<ResonatorState> {
    if target.dim() != books.dim() {
        return Err(Error::DimensionMismatch { expected: books.dim(), actual: target.dim() });
    }
    let f_count = books.factors();
    let estimates = (0..f_count)
        .map(|f| {
            let mut u: Vec<i32> = target.elements().iter().map(|&e| e as i32).collect();
            for (g, x) in state.estimates.iter().enumerate() {
                if g != f {
                    u.iter_mut().zip(x.elements()).for_each(|(a, &b)| *a *= b as i32);
                }
            }
            Hypervector::new(project(books.codebook(f), &u)).expect("sign output is bipolar")
        })
        .collect();
    Ok(ResonatorState { estimates, iteration: state.iteration + 1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Correct,
    Wrong,
    NonConverged,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResonatorRun {
    pub outcome: Outcome,
    /// Steps taken until the estimates stopped changing (the confirming step
    /// is not counted), or `max_iters` if they never did.
    pub iterations: usize,
    pub state: ResonatorState,
    /// Codebook indices of the final estimates, where each is a codebook row.
    pub decoded: Option<FactorAssignment>,
}

/// Iterate from `start` to a fixed point or `max_iters` steps.
///
/// The dynamics are deterministic, so revisiting an earlier state means a
/// limit cycle; the run stops there as non-converged.
pub fn run_resonator_from(
    start: ResonatorState,
    target: &Hypervector,
    books: &CodebookSet,
    max_iters: usize,
) -> Result<ResonatorRun> {
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
    }
    let mut seen: HashSet<Vec<Hypervector>> = HashSet::new();
    let mut state = start;
    let mut steps = 0;
    while steps < max_iters {
        let next = resonator_step(&state, target, books)?;
        steps += 1;
        if next.estimates == state.estimates {
            let decoded = decode(&state, books);
            let correct = match &decoded {
                Some(a) => &a.bind_all(books)? == target,
                None => false,
            };
            return Ok(ResonatorRun {
                outcome: if correct { Outcome::Correct } else { Outcome::Wrong },
                iterations: steps - 1,
                state,
                decoded,
            });
        }
        if !seen.insert(state.estimates.clone()) {
            break;
        }
        state = next;
    }
    let decoded = decode(&state, books);
    Ok(ResonatorRun { outcome: Outcome::NonConverged, iterations: max_iters, state, decoded })
}

/// Bundle-initialized run.
pub fn run_resonator(target: &Hypervector, books: &CodebookSet, max_iters: usize) -> Result<ResonatorRun> {
    let start = resonator_init(books, Init::Bundle, &mut rng::seeded(0));
    run_resonator_from(start, target, books, max_iters)
}

fn decode(state: &ResonatorState, books: &CodebookSet) -> Option<FactorAssignment> {
    state
        .estimates
        .iter()
        .enumerate()
        .map(|(f, x)| books.codebook(f).iter().position(|r| r == x))
        .collect::<Option<Vec<_>>>()
        .map(FactorAssignment)
}

/// Nearest codebook row of each estimate by similarity (first on ties).
pub fn cleanup(state: &ResonatorState, books: &CodebookSet) -> FactorAssignment {
    FactorAssignment(
        state
            .estimates
            .iter()
            .enumerate()
            .map(|(f, x)| {
                let sims: Vec<i64> = books
                    .codebook(f)
                    .iter()
                    .map(|r| r.elements().iter().zip(x.elements()).map(|(&a, &b)| (a * b) as i64).sum())
                    .collect();
                let best = *sims.iter().max().expect("non-empty codebook");
                sims.iter().position(|&s| s == best).unwrap()
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonatorStats {
    pub dim: usize,
    pub factors: usize,
    pub size: usize,
    pub trials: usize,
    pub seed: u64,
    pub init: Init,
    pub max_iters: usize,
    pub correct: usize,
    pub wrong: usize,
    pub non_converged: usize,
    /// Probability of converging to the correct factorization.
    pub p_s: f64,
    /// Mean iterations among correct convergences (NaN if none).
    pub n_i: f64,
    /// Probability of not converging.
    pub p_f: f64,
    /// `N_I / P_s`, infinite when `P_s = 0`.
    pub n_s: f64,
    pub p_wrong: f64,
}

/// Monte Carlo over fresh codebooks and planted targets.
///
/// Trial `i` draws codebooks, planted assignment and (for random init) the
/// starting estimates from stream `i` of `seed`.
pub fn resonator_stats(
    dim: usize,
    factors: usize,
    size: usize,
    trials: usize,
    max_iters: usize,
    seed: u64,
    init: Init,
) -> Result<ResonatorStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let runs: Vec<Result<ResonatorRun>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let books = CodebookSet::generate(r.gen(), factors, size, dim)?;
            let planted = FactorAssignment((0..factors).map(|_| r.gen_range(0..size)).collect());
            let target = planted.bind_all(&books)?;
            let start = resonator_init(&books, init, &mut r);
            run_resonator_from(start, &target, &books, max_iters)
        })
        .collect();
    let mut correct = 0;
    let mut wrong = 0;
    let mut non_converged = 0;
    let mut iters = 0usize;
    for run in runs {
        let run = run?;
        match run.outcome {
            Outcome::Correct => {
                correct += 1;
                iters += run.iterations;
            }
            Outcome::Wrong => wrong += 1,
            Outcome::NonConverged => non_converged += 1,
        }
    }
    let t = trials as f64;
    let p_s = correct as f64 / t;
    let n_i = if correct > 0 { iters as f64 / correct as f64 } else { f64::NAN };
    Ok(ResonatorStats {
        dim,
        factors,
        size,
        trials,
        seed,
        init,
        max_iters,
        correct,
        wrong,
        non_converged,
        p_s,
        n_i,
        p_f: non_converged as f64 / t,
        n_s: if correct > 0 { n_i / p_s } else { f64::INFINITY },
        p_wrong: wrong as f64 / t,
    })
}

/// Columns `D,F,N,trials,P_s,N_I,P_f,N_S,P_wrong,seed`.
pub fn write_stats_csv<W: Write>(mut w: W, rows: &[ResonatorStats]) -> std::io::Result<()> {
    writeln!(w, "D,F,N,trials,P_s,N_I,P_f,N_S,P_wrong,seed")?;
    let num = |x: f64| if x.is_finite() { format!("{x:.6}") } else { "divergent".to_string() };
    for s in rows {
        writeln!(
            w,
            "{},{},{},{},{:.6},{},{:.6},{},{:.6},{}",
            s.dim,
            s.factors,
            s.size,
            s.trials,
            s.p_s,
            num(s.n_i),
            s.p_f,
            num(s.n_s),
            s.p_wrong,
            s.seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdc::similarity;

    #[test]
    fn init_examples() {
        let books = CodebookSet::generate(1, 2, 1, 16).unwrap();
        let s = resonator_init(&books, Init::Bundle, &mut rng::seeded(0));
        assert_eq!(&s.estimates[0], books.row(0, 0));

        let h = Hypervector::random(8, &mut rng::seeded(2));
        let pair = CodebookSet::from_rows(vec![vec![h.clone(), h.neg()]], 0).unwrap();
        let s = resonator_init(&pair, Init::Bundle, &mut rng::seeded(0));
        assert_eq!(s.estimates[0], Hypervector::ones(8));

        let s = resonator_init(&books, Init::Random, &mut rng::seeded(3));
        assert!(s.estimates.iter().all(|x| x.elements().iter().all(|&e| e == 1 || e == -1)));
    }

    #[test]
    fn single_factor_is_nearest_neighbour() {
        // target: a codevector with a quarter of its entries flipped
        for seed in 0..20 {
            let books = CodebookSet::generate(seed, 1, 6, 512).unwrap();
            let mut r = rng::stream(seed, 9);
            let src = r.gen_range(0..6);
            let noisy: Vec<i8> =
                books.row(0, src).elements().iter().map(|&e| if r.gen_bool(0.25) { -e } else { e }).collect();
            let target = Hypervector::new(noisy).unwrap();
            let sims: Vec<f64> = books.codebook(0).iter().map(|r| similarity(r, &target).unwrap()).collect();
            let best = (0..6).max_by(|&a, &b| sims[a].total_cmp(&sims[b])).unwrap();
            let start = resonator_init(&books, Init::Bundle, &mut rng::seeded(0));
            let first = resonator_step(&start, &target, &books).unwrap();
            assert_eq!(&first.estimates[0], books.row(0, best));
            let run = run_resonator(&target, &books, 10).unwrap();
            assert_eq!(run.iterations, 1);
            assert_eq!(run.decoded, Some(FactorAssignment(vec![best])));
        }
    }

    #[test]
    fn step_is_deterministic_and_bipolar() {
        let books = CodebookSet::generate(4, 3, 5, 25).unwrap();
        let target = FactorAssignment(vec![1, 2, 3]).bind_all(&books).unwrap();
        let s0 = resonator_init(&books, Init::Random, &mut rng::seeded(1));
        let a = resonator_step(&s0, &target, &books).unwrap();
        let b = resonator_step(&s0, &target, &books).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iteration, 1);
    }

    #[test]
    fn planted_solution_is_a_fixed_point_at_high_dimension() {
        let mut fixed = 0;
        for seed in 0..100 {
            let books = CodebookSet::generate(seed, 3, 10, 256).unwrap();
            let planted = FactorAssignment(vec![1, 4, 7]);
            let target = planted.bind_all(&books).unwrap();
            let at = ResonatorState {
                estimates: (0..3).map(|f| books.row(f, planted.0[f]).clone()).collect(),
                iteration: 0,
            };
            if resonator_step(&at, &target, &books).unwrap().estimates == at.estimates {
                fixed += 1;
            }
        }
        assert!(fixed >= 95, "{fixed}");
    }

    #[test]
    fn high_snr_regime_recovers_quickly() {
        let mut ok = 0;
        for seed in 0..100 {
            let books = CodebookSet::generate(seed, 2, 4, 256).unwrap();
            let planted = FactorAssignment(vec![(seed % 4) as usize, 3]);
            let target = planted.bind_all(&books).unwrap();
            let run = run_resonator(&target, &books, 10).unwrap();
            if run.outcome == Outcome::Correct && run.iterations <= 10 {
                ok += 1;
                assert_eq!(run.decoded, Some(planted));
            }
        }
        assert!(ok >= 95, "{ok}");
    }

    #[test]
    fn zero_iterations_rejected() {
        let books = CodebookSet::generate(1, 2, 2, 8).unwrap();
        assert!(run_resonator(books.row(0, 0), &books, 0).is_err());
    }

    #[test]
    fn stats_partition_and_replay() {
        let s = resonator_stats(25, 3, 5, 60, 500, 7, Init::Random).unwrap();
        assert_eq!(s.correct + s.wrong + s.non_converged, 60);
        assert!((s.p_s + s.p_f + s.p_wrong - 1.0).abs() < 1e-12);
        assert_eq!(s, resonator_stats(25, 3, 5, 60, 500, 7, Init::Random).unwrap());
        let mut out = Vec::new();
        write_stats_csv(&mut out, &[s]).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("D,F,N,trials,P_s,N_I,P_f,N_S,P_wrong,seed\n"));
    }
}
