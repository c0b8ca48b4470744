use super::{BitString, Hypervector};
use crate::error::{Error, Result};
use crate::rng;
use std::collections::HashSet;
use std::io::{Read, Write};

pub const CODEBOOK_MAGIC: &[u8; 4] = b"HDQF";
pub const CODEBOOK_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 2 + 4 + 4 + 8;

/// `F` codebooks of `N` bipolar codevectors each, all of dimension `D`.
///
/// Rows are stored factor-major: row `(f, i)` lives at `f * N + i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodebookSet {
    factors: usize,
    size: usize,
    dim: usize,
    seed: u64,
    rows: Vec<Hypervector>,
}

impl CodebookSet {
    /// i.i.d. uniform `±1` entries drawn in `(f, i, d)` order from stream 0 of
    /// `seed`. Duplicate rows are kept.
    pub fn generate(seed: u64, factors: usize, size: usize, dim: usize) -> Result<Self> {
        check_shape(factors, size, dim)?;
        let mut rng = rng::seeded(seed);
        let rows = (0..factors * size).map(|_| Hypervector::random(dim, &mut rng)).collect();
        Ok(Self { factors, size, dim, seed, rows })
    }

    /// Same stream as [`generate`](Self::generate), but a row that repeats an
    /// earlier row of the same codebook is redrawn.
    pub fn generate_distinct(seed: u64, factors: usize, size: usize, dim: usize) -> Result<Self> {
        check_shape(factors, size, dim)?;
        if dim < 64 && size as u64 > 1u64 << dim {
            return Err(Error::InvalidParameter(format!("cannot draw {size} distinct rows of dimension {dim}")));
        }
        let mut rng = rng::seeded(seed);
        let mut rows = Vec::with_capacity(factors * size);
        for _ in 0..factors {
            let mut seen = HashSet::new();
            while seen.len() < size {
                let h = Hypervector::random(dim, &mut rng);
                if seen.insert(h.clone()) {
                    rows.push(h);
                }
            }
        }
        Ok(Self { factors, size, dim, seed, rows })
    }

    /// Assemble from explicit per-factor codebooks.
    pub fn from_rows(books: Vec<Vec<Hypervector>>, seed: u64) -> Result<Self> {
        let factors = books.len();
        let size = books.first().map_or(0, Vec::len);
        let dim = books.first().and_then(|b| b.first()).map_or(0, Hypervector::dim);
        check_shape(factors, size, dim)?;
        for book in &books {
            if book.len() != size {
                return Err(Error::DimensionMismatch { expected: size, actual: book.len() });
            }
            if let Some(bad) = book.iter().find(|h| h.dim() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, actual: bad.dim() });
            }
        }
        Ok(Self { factors, size, dim, seed, rows: books.into_iter().flatten().collect() })
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `N^F`, saturating.
    pub fn search_space(&self) -> u64 {
        (self.size as u64).saturating_pow(self.factors as u32)
    }

    pub fn row(&self, factor: usize, index: usize) -> &Hypervector {
        &self.rows[factor * self.size + index]
    }

    pub fn codebook(&self, factor: usize) -> &[Hypervector] {
        &self.rows[factor * self.size..(factor + 1) * self.size]
    }

    pub fn set_row(&mut self, factor: usize, index: usize, h: Hypervector) -> Result<()> {
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: h.dim() });
        }
        if factor >= self.factors {
            return Err(Error::IndexOutOfRange { index: factor, size: self.factors });
        }
        if index >= self.size {
            return Err(Error::IndexOutOfRange { index, size: self.size });
        }
        self.rows[factor * self.size + index] = h;
        Ok(())
    }

    /// Rows of one factor as register patterns (requires `D ≤ 64`).
    pub fn row_patterns(&self, factor: usize) -> Vec<u64> {
        assert!(self.dim <= 64, "register patterns need D <= 64");
        self.codebook(factor).iter().map(|h| h.to_bits().to_u64().expect("D <= 64")).collect()
    }

    pub fn has_distinct_rows(&self) -> bool {
        (0..self.factors).all(|f| {
            let set: HashSet<_> = self.codebook(f).iter().collect();
            set.len() == self.size
        })
    }

    pub fn mean_entry(&self) -> f64 {
        let total: i64 = self.rows.iter().flat_map(|h| h.elements()).map(|&e| e as i64).sum();
        total as f64 / (self.rows.len() * self.dim) as f64
    }

    /// Serialize: little-endian header, then each row packed LSB-first into
    /// `ceil(D/8)` bytes, bit set meaning `-1`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Format(e.to_string());
        let factors = u16::try_from(self.factors).map_err(|_| Error::Format("F does not fit in u16".into()))?;
        let size = u32::try_from(self.size).map_err(|_| Error::Format("N does not fit in u32".into()))?;
        let dim = u32::try_from(self.dim).map_err(|_| Error::Format("D does not fit in u32".into()))?;
        let mut header = Vec::with_capacity(HEADER_LEN);
        header.extend_from_slice(CODEBOOK_MAGIC);
        header.extend_from_slice(&CODEBOOK_VERSION.to_le_bytes());
        header.extend_from_slice(&factors.to_le_bytes());
        header.extend_from_slice(&size.to_le_bytes());
        header.extend_from_slice(&dim.to_le_bytes());
        header.extend_from_slice(&self.seed.to_le_bytes());
        w.write_all(&header).map_err(io)?;
        let row_bytes = self.dim.div_ceil(8);
        let mut buf = vec![0u8; row_bytes];
        for row in &self.rows {
            buf.iter_mut().for_each(|b| *b = 0);
            for (d, &e) in row.elements().iter().enumerate() {
                if e < 0 {
                    buf[d / 8] |= 1 << (d % 8);
                }
            }
            w.write_all(&buf).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header).map_err(|e| Error::Format(format!("header: {e}")))?;
        if &header[0..4] != CODEBOOK_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != CODEBOOK_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let factors = u16::from_le_bytes([header[6], header[7]]) as usize;
        let size = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
        let seed = u64::from_le_bytes(header[16..24].try_into().unwrap());
        check_shape(factors, size, dim).map_err(|e| Error::Format(e.to_string()))?;
        let row_bytes = dim.div_ceil(8);
        let mut buf = vec![0u8; row_bytes];
        let mut rows = Vec::with_capacity(factors * size);
        for _ in 0..factors * size {
            r.read_exact(&mut buf).map_err(|e| Error::Format(format!("payload: {e}")))?;
            let bits = BitString::from_bools((0..dim).map(|d| buf[d / 8] >> (d % 8) & 1 == 1));
            rows.push(super::bits_to_bipolar(&bits));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest).map_err(|e| Error::Format(e.to_string()))? != 0 {
            return Err(Error::Format("trailing bytes after payload".into()));
        }
        Ok(Self { factors, size, dim, seed, rows })
    }
}

fn check_shape(factors: usize, size: usize, dim: usize) -> Result<()> {
    for (name, v) in [("F", factors), ("N", size), ("D", dim)] {
        if v == 0 {
            return Err(Error::InvalidParameter(format!("{name} must be >= 1")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = CodebookSet::generate(7, 2, 2, 4).unwrap();
        let b = CodebookSet::generate(7, 2, 2, 4).unwrap();
        assert_eq!(a, b);
        let c = CodebookSet::generate(8, 2, 2, 4).unwrap();
        assert_ne!(a.rows, c.rows);
    }

    #[test]
    fn entries_are_balanced() {
        // 4 * 50 * 50 = 10^4 entries; std of the mean is 0.01
        let books = CodebookSet::generate(11, 4, 50, 50).unwrap();
        assert!(books.mean_entry().abs() <= 0.05, "{}", books.mean_entry());
    }

    #[test]
    fn rejects_zero_shape() {
        assert!(CodebookSet::generate(1, 0, 2, 2).is_err());
        assert!(CodebookSet::generate(1, 1, 0, 2).is_err());
        assert!(CodebookSet::generate(1, 1, 2, 0).is_err());
        assert!(CodebookSet::generate_distinct(1, 1, 5, 2).is_err());
    }

    #[test]
    fn distinct_generation() {
        let books = CodebookSet::generate_distinct(3, 3, 8, 3).unwrap();
        assert!(books.has_distinct_rows());
        // with D=2 and N=4 every codebook is a permutation of all four vectors
        let books = CodebookSet::generate_distinct(3, 2, 4, 2).unwrap();
        assert!(books.has_distinct_rows());
    }

    #[test]
    fn file_round_trip_and_layout() {
        let books = CodebookSet::generate(99, 3, 5, 13).unwrap();
        let mut bytes = Vec::new();
        books.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 15 * 2);
        assert_eq!(&bytes[..4], b"HDQF");
        assert_eq!(u16::from_le_bytes([bytes[6], bytes[7]]), 3);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 99);
        let first = books.row(0, 0);
        assert_eq!(bytes[HEADER_LEN] & 1 == 1, first.elements()[0] < 0);
        assert_eq!(CodebookSet::read_from(&bytes[..]).unwrap(), books);
    }

    #[test]
    fn file_rejects_corruption() {
        let books = CodebookSet::generate(1, 1, 2, 8).unwrap();
        let mut bytes = Vec::new();
        books.write_to(&mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(CodebookSet::read_from(&bad[..]).is_err());
        assert!(CodebookSet::read_from(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(CodebookSet::read_from(&long[..]).is_err());
    }
}
