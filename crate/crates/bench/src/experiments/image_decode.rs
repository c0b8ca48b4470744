//! Recovering images from image ⊙ location hypervectors, section by section.

use crate::images::{glyphs, load_images, BinaryImage};
use crate::output::{manifest, num, Artifacts, Table};
use crate::settings::Settings;
use crate::svg::image_panel;
use anyhow::{ensure, Result};
use hdqf_core::hdc::{bind, bits_to_bipolar, BitString, CodebookSet, Hypervector};
use hdqf_core::hdqf::{evolve, HdqfConfig, Iterations, Mode};
use hdqf_core::qsim::sample_histogram;
use hdqf_core::resonator::{cleanup, run_resonator};
use hdqf_core::rng;
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub glyphs: usize,
    pub glyph_size: usize,
    /// Directory of `.pbm` files used instead of the generated glyphs.
    pub image_dir: Option<PathBuf>,
    /// Number of location vectors; image `i` sits at location `i mod L`.
    pub locations: usize,
    pub section_dim: usize,
    /// Measurements per section.
    pub runs: usize,
    pub mode: Mode,
    pub qubit_cap: usize,
    /// Dimension of the high-dimensional resonator.
    pub high_dim: usize,
    pub high_encoding: HighEncoding,
    pub max_iters: usize,
    /// Seeds for the majority verdict (the first is `seed` itself).
    pub verdict_seeds: usize,
    /// Mode for every verdict seed after the first.
    pub verdict_mode: Mode,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            glyphs: 4,
            glyph_size: 48,
            image_dir: None,
            locations: 4,
            section_dim: 6,
            runs: 25,
            mode: Mode::Circuit,
            qubit_cap: 20,
            high_dim: 256,
            high_encoding: HighEncoding::Random,
            max_iters: 200,
            verdict_seeds: 20,
            verdict_mode: Mode::Implicit,
            seed: 0,
        }
    }
}

impl Params {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            glyphs: s.get("glyphs", d.glyphs)?,
            glyph_size: s.get("glyph_size", d.glyph_size)?,
            image_dir: s.raw("image_dir").map(PathBuf::from),
            locations: s.get("locations", d.locations)?,
            section_dim: s.get("section_dim", d.section_dim)?,
            runs: s.get("runs", d.runs)?,
            mode: s.get("mode", d.mode)?,
            qubit_cap: s.get("qubit_cap", d.qubit_cap)?,
            high_dim: s.get("high_dim", d.high_dim)?,
            high_encoding: s.get("high_encoding", d.high_encoding)?,
            max_iters: s.get("max_iters", d.max_iters)?,
            verdict_seeds: s.get("verdict_seeds", d.verdict_seeds)?,
            verdict_mode: s.get("verdict_mode", d.verdict_mode)?,
            seed: s.get("seed", d.seed)?,
        })
    }

    pub fn images(&self) -> Result<Vec<BinaryImage>> {
        match &self.image_dir {
            Some(dir) => load_images(dir),
            None => Ok(glyphs(self.glyphs, self.glyph_size)),
        }
    }
}

/// How a section is lifted to the high-dimensional resonator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HighEncoding {
    /// A seeded random codevector per (section, role, pattern).
    Random,
    /// `sign(R x)` with a seeded sign matrix `R` per (section, role).
    Linear,
}

impl std::str::FromStr for HighEncoding {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(HighEncoding::Random),
            "linear" => Ok(HighEncoding::Linear),
            _ => anyhow::bail!("unknown high_encoding {s:?} (random | linear)"),
        }
    }
}

impl std::fmt::Display for HighEncoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HighEncoding::Random => "random",
            HighEncoding::Linear => "linear",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Quantum,
    /// First-pass per-section modal decode alone.
    QuantumModal,
    ResonatorLow,
    ResonatorHigh,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Quantum, Method::QuantumModal, Method::ResonatorLow, Method::ResonatorHigh];

    pub fn name(self) -> &'static str {
        match self {
            Method::Quantum => "quantum",
            Method::QuantumModal => "quantum_modal",
            Method::ResonatorLow => "resonator_low",
            Method::ResonatorHigh => "resonator_high",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeedResult {
    pub seed: u64,
    pub mode: Mode,
    pub recovered: BTreeMap<Method, Vec<BinaryImage>>,
    pub accuracy: BTreeMap<Method, Vec<f64>>,
    /// Location chosen by consensus, per image.
    pub locations: Vec<usize>,
}

impl SeedResult {
    pub fn mean_accuracy(&self, m: Method) -> f64 {
        let a = &self.accuracy[&m];
        a.iter().sum::<f64>() / a.len() as f64
    }

    pub fn exact(&self, m: Method) -> bool {
        self.accuracy[&m].iter().all(|&a| a == 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub seeds: usize,
    pub quantum_exact: usize,
    pub low_imperfect: usize,
    pub high_exact: usize,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        let majority = |n: usize| 2 * n > self.seeds;
        majority(self.quantum_exact) && majority(self.low_imperfect) && majority(self.high_exact)
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub params: Params,
    pub images: Vec<BinaryImage>,
    pub seeds: Vec<SeedResult>,
    pub verdict: Verdict,
}

fn section(v: &Hypervector, s: usize, d: usize) -> Hypervector {
    Hypervector::from_slice(&v.elements()[s * d..(s + 1) * d]).expect("non-empty section")
}

/// `sign(R x)` with ties to `+1`, `R` a seeded `dim × len(x)` sign matrix.
fn project(matrix: &[Vec<i8>], x: &Hypervector) -> Hypervector {
    let out = matrix
        .iter()
        .map(|row| {
            let s: i32 = row.iter().zip(x.elements()).map(|(&a, &b)| (a * b) as i32).sum();
            if s < 0 {
                -1
            } else {
                1
            }
        })
        .collect();
    Hypervector::new(out).expect("projection output is bipolar")
}

fn sign_matrix<R: Rng>(rows: usize, cols: usize, r: &mut R) -> Vec<Vec<i8>> {
    (0..rows).map(|_| (0..cols).map(|_| if r.gen::<bool>() { 1 } else { -1 }).collect()).collect()
}

/// Pixels of a factor-0 register pattern (bit clear ↦ +1 ↦ pixel 1).
fn pattern_pixels(pattern: u64, d: usize) -> impl Iterator<Item = u8> {
    (0..d).map(move |i| u8::from(pattern >> i & 1 == 0))
}

fn row_pixels(h: &Hypervector) -> impl Iterator<Item = u8> + '_ {
    h.elements().iter().map(|&x| u8::from(x > 0))
}

fn modal<K: Ord + Copy>(counts: &BTreeMap<K, usize>) -> Option<K> {
    counts
        .iter()
        .fold(None, |best: Option<(K, usize)>, (&k, &c)| match best {
            Some((_, b)) if b >= c => best,
            _ => Some((k, c)),
        })
        .map(|e| e.0)
}

/// High-dimensional codebooks for one section. Each role keeps one row per
/// distinct low-dimensional pattern, padded like the second quantum pass;
/// repeated rows would otherwise weight the resonator's projections toward
/// the repeated pattern.
struct Lifted {
    books: CodebookSet,
    patterns: [Vec<u64>; 2],
}

impl Lifted {
    fn row(&self, role: usize, pattern: u64) -> &Hypervector {
        let j = self.patterns[role].iter().position(|&q| q == pattern).expect("pattern was lifted");
        self.books.row(role, j)
    }
}

/// Distinct row patterns of one role, padded with the smallest unused
/// patterns back to `N`.
fn padded_patterns(books: &CodebookSet, role: usize) -> Vec<u64> {
    let n = books.size();
    let mut v: Vec<u64> = Vec::with_capacity(n);
    for q in books.row_patterns(role) {
        if !v.contains(&q) {
            v.push(q);
        }
    }
    let mut pad = 0u64;
    while v.len() < n {
        if !v.contains(&pad) {
            v.push(pad);
        }
        pad += 1;
    }
    v
}

fn lift(p: &Params, books: &CodebookSet, seed: u64, s: usize) -> Result<Lifted> {
    let patterns = [padded_patterns(books, 0), padded_patterns(books, 1)];
    let d = books.dim();
    let rows: Vec<Vec<Hypervector>> = match p.high_encoding {
        HighEncoding::Random => (0..2)
            .map(|role| {
                patterns[role]
                    .iter()
                    .map(|&pat| {
                        let mut r = rng::substream(seed, 30 + role as u64, (s as u64) << 32 | pat);
                        Hypervector::random(p.high_dim, &mut r)
                    })
                    .collect()
            })
            .collect(),
        HighEncoding::Linear => {
            let mut r = rng::substream(seed, 32, s as u64);
            (0..2)
                .map(|role| {
                    let m = sign_matrix(p.high_dim, d, &mut r);
                    patterns[role].iter().map(|&q| project(&m, &bits_to_bipolar(&BitString::from_u64(q, d)))).collect()
                })
                .collect()
        }
    };
    Ok(Lifted { books: CodebookSet::from_rows(rows, seed)?, patterns })
}

/// Codebooks for the second pass: the distinct image rows padded with unused
/// patterns back to `N` rows, against `N` copies of the chosen location row.
/// Padding keeps the search a uniform `N`-way one, so a section whose image
/// rows split evenly between two patterns is still amplified.
fn conditioned_books(books: &CodebookSet, location: usize, seed: u64) -> Result<CodebookSet> {
    let (n, d) = (books.size(), books.dim());
    let rows = padded_patterns(books, 0);
    let image = rows.iter().map(|&p| bits_to_bipolar(&BitString::from_u64(p, d))).collect();
    let fixed = vec![books.row(1, location).clone(); n];
    Ok(CodebookSet::from_rows(vec![image, fixed], seed)?)
}

/// `runs` measured factor-register patterns of the evolved state.
fn measure(sim: &hdqf_core::hdqf::Simulation, runs: usize, r: &mut rng::Rng) -> BTreeMap<u64, usize> {
    let dist = sim.outcome_distribution();
    let weights: Vec<f64> = dist.iter().map(|e| e.1).collect();
    sample_histogram(&weights, runs, r).into_iter().map(|(k, c)| (dist[k].0, c)).collect()
}

/// Decode every image with every method for one seed.
///
/// The quantum pipeline runs two passes per section. The first factorizes
/// over both codebooks; the majority of its modal locations fixes the
/// image's location. The second factorizes again with the location register
/// held at that row, which resolves sections whose target has several valid
/// (image, location) pairs.
pub fn decode_seed(p: &Params, images: &[BinaryImage], seed: u64, mode: Mode) -> Result<SeedResult> {
    ensure!(!images.is_empty(), "no images");
    let (w, h) = (images[0].width, images[0].height);
    ensure!(images.iter().all(|i| (i.width, i.height) == (w, h)), "images differ in size");
    let len = w * h;
    let d = p.section_dim;
    ensure!(d > 0 && len % d == 0, "image size {len} is not divisible by section dimension {d}");
    ensure!(p.locations > 0 && p.runs > 0, "locations and runs must be >= 1");
    let sections = len / d;
    let img_vecs: Vec<Hypervector> = images.iter().map(BinaryImage::polarize).collect();
    let locs: Vec<Hypervector> =
        (0..p.locations).map(|j| Hypervector::random(len, &mut rng::substream(seed, 10, j as u64))).collect();
    let books: Vec<CodebookSet> = (0..sections)
        .map(|s| {
            CodebookSet::from_rows(
                vec![
                    img_vecs.iter().map(|v| section(v, s, d)).collect(),
                    locs.iter().map(|v| section(v, s, d)).collect(),
                ],
                seed,
            )
        })
        .collect::<hdqf_core::Result<_>>()?;
    let high: Vec<Lifted> =
        (0..sections).into_par_iter().map(|s| lift(p, &books[s], seed, s)).collect::<Result<_>>()?;
    let cfg = HdqfConfig {
        mode,
        iterations: Iterations::Auto,
        runs: p.runs,
        qubit_cap: p.qubit_cap,
        seed,
        ..HdqfConfig::default()
    };
    let mask = (1u64 << d) - 1;

    let mut recovered: BTreeMap<Method, Vec<BinaryImage>> = BTreeMap::new();
    let mut chosen = Vec::new();
    for (i, img) in img_vecs.iter().enumerate() {
        let loc = i % p.locations;
        let target = bind(img, &locs[loc])?;
        // (first-pass counts, low-dim resonator pixels, high-dim resonator pixels)
        type SectionOut = (BTreeMap<u64, usize>, Vec<u8>, Vec<u8>);
        let first: Vec<SectionOut> = (0..sections)
            .into_par_iter()
            .map(|s| -> Result<SectionOut> {
                let t = section(&target, s, d);
                let sim = evolve(&t, &books[s], &cfg)?;
                let counts = measure(&sim, p.runs, &mut rng::substream(seed, 20 + i as u64, s as u64));
                let low = run_resonator(&t, &books[s], p.max_iters)?;
                let low_px = row_pixels(books[s].row(0, cleanup(&low.state, &books[s]).0[0])).collect();
                let hs = &high[s];
                let ht = bind(hs.row(0, books[s].row_patterns(0)[i]), hs.row(1, books[s].row_patterns(1)[loc]))?;
                let hi = run_resonator(&ht, &hs.books, p.max_iters)?;
                let hi_px = pattern_pixels(hs.patterns[0][cleanup(&hi.state, &hs.books).0[0]], d).collect();
                Ok((counts, low_px, hi_px))
            })
            .collect::<Result<_>>()?;

        let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
        for (s, (counts, _, _)) in first.iter().enumerate() {
            let lp = modal(counts).expect("runs >= 1") >> d & mask;
            if let Some(j) = books[s].row_patterns(1).iter().position(|&x| x == lp) {
                *votes.entry(j).or_default() += 1;
            }
        }
        let consensus = modal(&votes).unwrap_or(0);
        chosen.push(consensus);

        let second: Vec<u64> = (0..sections)
            .into_par_iter()
            .map(|s| -> Result<u64> {
                let b = conditioned_books(&books[s], consensus, seed)?;
                let sim = evolve(&section(&target, s, d), &b, &cfg)?;
                let counts = measure(&sim, p.runs, &mut rng::substream(seed, 40 + i as u64, s as u64));
                Ok(modal(&counts).expect("runs >= 1") & mask)
            })
            .collect::<Result<_>>()?;

        let mut px: BTreeMap<Method, Vec<u8>> = Method::ALL.iter().map(|&m| (m, Vec::with_capacity(len))).collect();
        for ((counts, low_px, hi_px), &bits) in first.iter().zip(&second) {
            let overall = modal(counts).expect("runs >= 1");
            px.get_mut(&Method::Quantum).unwrap().extend(pattern_pixels(bits, d));
            px.get_mut(&Method::QuantumModal).unwrap().extend(pattern_pixels(overall & mask, d));
            px.get_mut(&Method::ResonatorLow).unwrap().extend(low_px);
            px.get_mut(&Method::ResonatorHigh).unwrap().extend(hi_px);
        }
        for (m, v) in px {
            recovered.entry(m).or_default().push(BinaryImage::new(w, h, v)?);
        }
    }
    let accuracy =
        recovered.iter().map(|(&m, rec)| (m, rec.iter().zip(images).map(|(a, b)| a.accuracy(b)).collect())).collect();
    Ok(SeedResult { seed, mode, recovered, accuracy, locations: chosen })
}

pub fn run(p: &Params) -> Result<Report> {
    let images = p.images()?;
    let mut seeds = Vec::new();
    for k in 0..p.verdict_seeds.max(1) {
        let mode = if k == 0 { p.mode } else { p.verdict_mode };
        seeds.push(decode_seed(p, &images, p.seed.wrapping_add(k as u64), mode)?);
    }
    let verdict = Verdict {
        seeds: seeds.len(),
        quantum_exact: seeds.iter().filter(|r| r.exact(Method::Quantum)).count(),
        low_imperfect: seeds.iter().filter(|r| !r.exact(Method::ResonatorLow)).count(),
        high_exact: seeds.iter().filter(|r| r.exact(Method::ResonatorHigh)).count(),
    };
    Ok(Report { params: p.clone(), images, seeds, verdict })
}

impl Report {
    pub fn artifacts(&self) -> Artifacts {
        let p = &self.params;
        let mut out = Artifacts::default();
        let mut t = Table::new(&[
            "seed",
            "mode",
            "method",
            "image",
            "section_dim",
            "locations",
            "runs",
            "high_dim",
            "max_iters",
            "pixel_accuracy",
        ]);
        for r in &self.seeds {
            for m in Method::ALL {
                for (i, a) in r.accuracy[&m].iter().enumerate() {
                    t.row([
                        r.seed.to_string(),
                        r.mode.to_string(),
                        m.name().to_string(),
                        i.to_string(),
                        p.section_dim.to_string(),
                        p.locations.to_string(),
                        p.runs.to_string(),
                        p.high_dim.to_string(),
                        p.max_iters.to_string(),
                        num(*a),
                    ]);
                }
            }
        }
        out.add("image_accuracy.csv", t.finish());
        if let Some(first) = self.seeds.first() {
            let mut rows = vec![("original".to_string(), self.images.iter().collect::<Vec<_>>())];
            for m in Method::ALL {
                rows.push((m.name().to_string(), first.recovered[&m].iter().collect()));
                for (i, img) in first.recovered[&m].iter().enumerate() {
                    out.add(format!("{}_{i}.pbm", m.name()), img.to_pbm());
                }
            }
            for (i, img) in self.images.iter().enumerate() {
                out.add(format!("original_{i}.pbm"), img.to_pbm());
            }
            out.add("image_panels.svg", image_panel(&rows, 2.0));
        }
        let v = &self.verdict;
        out.add(
            "manifest.txt",
            manifest(
                "image-decode",
                &[
                    (
                        "images".to_string(),
                        p.image_dir.as_ref().map_or(
                            format!("{} generated glyphs of {}x{}", p.glyphs, p.glyph_size, p.glyph_size),
                            |d| d.display().to_string(),
                        ),
                    ),
                    ("locations".into(), p.locations.to_string()),
                    ("section_dim".into(), p.section_dim.to_string()),
                    ("runs".into(), p.runs.to_string()),
                    ("mode".into(), p.mode.to_string()),
                    ("verdict_mode".into(), p.verdict_mode.to_string()),
                    ("qubit_cap".into(), p.qubit_cap.to_string()),
                    ("high_dim".into(), p.high_dim.to_string()),
                    ("high_encoding".into(), p.high_encoding.to_string()),
                    ("max_iters".into(), p.max_iters.to_string()),
                    ("seed".into(), p.seed.to_string()),
                    ("verdict_seeds".into(), v.seeds.to_string()),
                    ("verdict.quantum_exact".into(), v.quantum_exact.to_string()),
                    ("verdict.resonator_low_imperfect".into(), v.low_imperfect.to_string()),
                    ("verdict.resonator_high_exact".into(), v.high_exact.to_string()),
                ],
            ),
        );
        out
    }
}
