//! Binary images: ASCII PBM I/O and generated glyph fixtures.

use anyhow::{bail, ensure, Context, Result};
use hdqf_core::hdc::Hypervector;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, each 0 or 1.
    pub pixels: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        ensure!(pixels.len() == width * height, "expected {} pixels, got {}", width * height, pixels.len());
        if let Some(p) = pixels.iter().find(|&&p| p > 1) {
            bail!("non-binary pixel value {p}");
        }
        Ok(Self { width, height, pixels })
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// 1 ↦ +1, 0 ↦ −1.
    pub fn polarize(&self) -> Hypervector {
        Hypervector::new(self.pixels.iter().map(|&p| if p == 1 { 1 } else { -1 }).collect()).expect("non-empty image")
    }

    pub fn from_bipolar(width: usize, height: usize, v: &[i8]) -> Result<Self> {
        Self::new(width, height, v.iter().map(|&x| u8::from(x > 0)).collect())
    }

    /// Fraction of equal pixels.
    pub fn accuracy(&self, other: &BinaryImage) -> f64 {
        if self.pixels.len() != other.pixels.len() || self.pixels.is_empty() {
            return 0.0;
        }
        let same = self.pixels.iter().zip(&other.pixels).filter(|(a, b)| a == b).count();
        same as f64 / self.pixels.len() as f64
    }

    /// ASCII PBM (`P1`); 1 is black.
    pub fn to_pbm(&self) -> String {
        let mut s = format!("P1\n{} {}\n", self.width, self.height);
        for row in self.pixels.chunks(self.width.max(1)) {
            s.extend(row.iter().map(|&p| if p == 1 { '1' } else { '0' }));
            s.push('\n');
        }
        s
    }

    pub fn parse_pbm(text: &str) -> Result<Self> {
        let body: String = text.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join("\n");
        let mut tokens = body.split_whitespace();
        match tokens.next() {
            Some("P1") => {}
            Some(m) => bail!("unsupported PBM magic {m:?} (only P1)"),
            None => bail!("empty PBM"),
        }
        let mut dim = |name| -> Result<usize> {
            tokens.next().with_context(|| format!("missing {name}"))?.parse().with_context(|| format!("bad {name}"))
        };
        let (width, height) = (dim("width")?, dim("height")?);
        let mut pixels = Vec::with_capacity(width * height);
        for tok in tokens {
            for c in tok.chars() {
                match c {
                    '0' => pixels.push(0),
                    '1' => pixels.push(1),
                    _ => bail!("non-binary pixel {c:?}"),
                }
            }
        }
        ensure!(
            pixels.len() == width * height,
            "PBM header says {width}x{height} = {} pixels, found {}",
            width * height,
            pixels.len()
        );
        Self::new(width, height, pixels)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse_pbm(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pbm()).with_context(|| format!("writing {}", path.display()))
    }
}

/// Every `.pbm` file in `dir`, sorted by name.
pub fn load_images(dir: &Path) -> Result<Vec<BinaryImage>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "pbm"))
        .collect();
    paths.sort();
    ensure!(!paths.is_empty(), "no .pbm files in {}", dir.display());
    paths.iter().map(|p| BinaryImage::load(p)).collect()
}

/// Deterministic `size × size` glyphs: ring, plus, diagonal cross, triangle,
/// frame, stripes (cycled).
pub fn glyphs(count: usize, size: usize) -> Vec<BinaryImage> {
    let s = size as f64;
    let c = (s - 1.0) / 2.0;
    let w = (s / 10.0).max(1.0);
    (0..count)
        .map(|g| {
            let pixels = (0..size * size)
                .map(|i| {
                    let (y, x) = ((i / size) as f64, (i % size) as f64);
                    let (dx, dy) = (x - c, y - c);
                    let on = match g % 6 {
                        0 => ((dx * dx + dy * dy).sqrt() - 0.35 * s).abs() < w,
                        1 => dx.abs() < w || dy.abs() < w,
                        2 => (dx - dy).abs() < w * 1.2 || (dx + dy).abs() < w * 1.2,
                        3 => y > 0.15 * s && y < 0.85 * s && dx.abs() < (y - 0.15 * s) * 0.6,
                        4 => {
                            let m = dx.abs().max(dy.abs());
                            m < 0.4 * s && m > 0.4 * s - 1.5 * w
                        }
                        _ => ((y / (2.0 * w)) as usize + g / 6).is_multiple_of(2),
                    };
                    u8::from(on)
                })
                .collect();
            BinaryImage { width: size, height: size, pixels }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glyphs_are_deterministic_and_distinct() {
        let a = glyphs(6, 48);
        assert_eq!(a, glyphs(6, 48));
        for (i, g) in a.iter().enumerate() {
            assert_eq!((g.width, g.height, g.len()), (48, 48, 2304));
            let ones = g.pixels.iter().filter(|&&p| p == 1).count();
            assert!(ones > 100 && ones < 2200, "glyph {i} has {ones} set pixels");
            for h in &a[..i] {
                assert!(g.accuracy(h) < 0.95);
            }
        }
    }

    #[test]
    fn pbm_parse_errors() {
        assert!(BinaryImage::parse_pbm("P1\n2 2\n0 1 1\n").is_err());
        assert!(BinaryImage::parse_pbm("P1\n2 2\n0 1 1 0 1\n").is_err());
        assert!(BinaryImage::parse_pbm("P1\n2 1\n0 2\n").is_err());
        assert!(BinaryImage::parse_pbm("P4\n2 1\n").is_err());
        let img = BinaryImage::parse_pbm("P1 # comment\n3 1\n1 0\n1\n").unwrap();
        assert_eq!(img.pixels, vec![1, 0, 1]);
    }

    #[test]
    fn polarize_round_trip() {
        let img = &glyphs(1, 12)[0];
        let v = img.polarize();
        assert_eq!(&BinaryImage::from_bipolar(12, 12, v.elements()).unwrap(), img);
    }
}
