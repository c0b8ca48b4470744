pub mod codebook;
pub mod image_decode;
pub mod noise;
pub mod non_unique;
pub mod prob_vs_iter;
pub mod scaling;
pub mod table1;

use anyhow::{Context, Result};
use hdqf_core::hdc::{bits_to_bipolar, find_unique_instance, solution_counts, CodebookSet, Hypervector};

/// Codebooks and a target with `t` solutions, or the rarest reachable
/// target when no draw gets down to `t`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub books: CodebookSet,
    pub target: Hypervector,
    pub solutions: usize,
    /// `true` when `t` could not be reached.
    pub fallback: bool,
}

pub fn instance(seed: u64, factors: usize, size: usize, dim: usize, t: usize) -> Result<Instance> {
    let space = (size as f64).powi(factors as i32);
    // so dense that every pattern is hit many times: repair cannot reach t
    let hopeless = space / 2f64.powi(dim as i32) > 64.0 * t as f64;
    if !hopeless {
        if let Ok(u) = find_unique_instance(seed, factors, size, dim, t, 64) {
            return Ok(Instance { solutions: u.solutions.len(), books: u.books, target: u.target, fallback: false });
        }
    }
    let books = CodebookSet::generate_distinct(seed, factors, size, dim)?;
    let (bits, count) = solution_counts(&books)
        .into_iter()
        .min_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)))
        .context("empty product set")?;
    Ok(Instance { target: bits_to_bipolar(&bits), books, solutions: count, fallback: count != t })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..10).map(|n| (n as f64, 3.0 * (n as f64).powf(1.5))).collect();
        assert!((log_log_slope(&pts) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn instances() {
        let i = instance(1, 2, 4, 5, 1).unwrap();
        assert_eq!((i.solutions, i.fallback), (1, false));
        let d = instance(1, 4, 8, 5, 1).unwrap();
        assert!(d.fallback && d.solutions > 1);
        let counts = solution_counts(&d.books);
        assert_eq!(counts.values().min(), Some(&d.solutions));
    }
}
