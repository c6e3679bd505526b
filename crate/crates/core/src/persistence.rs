//! Flat little-endian binary files for eigenspaces (`FPCS`) and databases (`FPDB`).
//!
//! Both share a 53-byte header:
//!
//! | bytes | field |
//! |-------|-------|
//! | 4     | magic |
//! | 4     | version (u32, = 1) |
//! | 12    | N, K, M (u32 each) |
//! | 1     | edge method (0 none, 1 sobel, 2 canny) |
//! | 32    | sigma, high percentile, low ratio, sobel factor (f64 each) |
//!
//! A space file continues with the mean (`N·K`), `U` (`N·K × M`, row-major),
//! the eigenvalues (`M`) and `Ω` (`M × M`, row-major), all f64. A database
//! file continues with the data matrix (`N·K × M`, row-major, f64) followed by
//! one label record per column: finger (u32), impression (u32), a flags byte
//! (bit 0 finger present, bit 1 impression present), path length (u32) and
//! the UTF-8 path.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::edges::{EdgeConfig, EdgeMethod};
use crate::eigenspace::EigenSpace;
use crate::error::{Error, Result};
use crate::imaging::{FingerprintDatabase, ImageLabel};

pub const SPACE_MAGIC: [u8; 4] = *b"FPCS";
pub const DATABASE_MAGIC: [u8; 4] = *b"FPDB";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 53;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceFileHeader {
    pub magic: [u8; 4],
    pub version: u32,
    pub height: u32,
    pub width: u32,
    pub count: u32,
    pub edge: EdgeConfig,
}

impl SpaceFileHeader {
    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.magic);
        out.extend_from_slice(&self.version.to_le_bytes());
        for v in [self.height, self.width, self.count] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(self.edge.method.code());
        for v in [
            self.edge.canny_sigma,
            self.edge.canny_high_percentile,
            self.edge.canny_low_ratio,
            self.edge.sobel_threshold_factor,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn read(reader: &mut Reader<'_>, expected_magic: [u8; 4], strict_method: bool) -> Result<Self> {
        let magic: [u8; 4] = reader.take(4)?.try_into().expect("4 bytes");
        if magic != expected_magic {
            return Err(Error::BadMagic {
                expected: expected_magic,
                found: magic,
            });
        }
        let version = reader.u32()?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let (height, width, count) = (reader.u32()?, reader.u32()?, reader.u32()?);
        if height == 0 || width == 0 || count == 0 {
            return Err(Error::Corrupt("header dimensions must be positive".into()));
        }
        let code = reader.take(1)?[0];
        let method = match EdgeMethod::from_code(code) {
            Some(m) => m,
            None if !strict_method => EdgeMethod::None,
            None => return Err(Error::Corrupt(format!("unknown edge method code {code}"))),
        };
        let edge = EdgeConfig {
            method,
            canny_sigma: reader.f64()?,
            canny_high_percentile: reader.f64()?,
            canny_low_ratio: reader.f64()?,
            sobel_threshold_factor: reader.f64()?,
        };
        Ok(Self {
            magic,
            version,
            height,
            width,
            count,
            edge,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::UnexpectedEof)?;
        let slice = self.bytes.get(self.pos..end).ok_or(Error::UnexpectedEof)?;
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or(Error::UnexpectedEof)?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

fn push_f64s<'a>(out: &mut Vec<u8>, values: impl IntoIterator<Item = &'a f64>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn push_row_major(out: &mut Vec<u8>, m: &DMatrix<f64>) {
    for r in 0..m.nrows() {
        push_f64s(out, m.row(r).iter());
    }
}

fn dim_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Corrupt(format!("dimension {v} exceeds u32")))
}

/// Exact byte length of a space file for the given dimensions.
pub fn space_file_len(pixels: usize, m: usize) -> u64 {
    HEADER_LEN as u64 + 8 * (pixels as u64 * (m as u64 + 1) + m as u64 * (m as u64 + 1))
}

pub fn encode_space(space: &EigenSpace) -> Result<Vec<u8>> {
    let pixels = space.height * space.width;
    let m = space.size();
    let mut out = Vec::with_capacity(space_file_len(pixels, m) as usize);
    SpaceFileHeader {
        magic: SPACE_MAGIC,
        version: VERSION,
        height: dim_u32(space.height)?,
        width: dim_u32(space.width)?,
        count: dim_u32(m)?,
        edge: space.edge_config,
    }
    .write(&mut out);
    push_f64s(&mut out, space.mean.iter());
    push_row_major(&mut out, &space.basis);
    push_f64s(&mut out, space.eigenvalues.iter());
    push_row_major(&mut out, &space.omega);
    Ok(out)
}

pub fn decode_space(bytes: &[u8]) -> Result<EigenSpace> {
    let mut reader = Reader { bytes, pos: 0 };
    let header = SpaceFileHeader::read(&mut reader, SPACE_MAGIC, true)?;
    let (h, w, m) = (header.height as usize, header.width as usize, header.count as usize);
    let pixels = h * w;
    let expected = space_file_len(pixels, m);
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(Error::UnexpectedEof);
    }
    if actual > expected {
        return Err(Error::FileLength { expected, actual });
    }
    let mean = DVector::from_vec(reader.f64s(pixels)?);
    let basis = DMatrix::from_row_slice(pixels, m, &reader.f64s(pixels * m)?);
    let eigenvalues = DVector::from_vec(reader.f64s(m)?);
    let omega = DMatrix::from_row_slice(m, m, &reader.f64s(m * m)?);
    EigenSpace::from_parts(mean, basis, eigenvalues, omega, header.edge, h, w)
}

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Corrupt(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn save_space(space: &EigenSpace, path: &Path) -> Result<()> {
    write_atomic(path, &encode_space(space)?)
}

pub fn load_space(path: &Path) -> Result<EigenSpace> {
    decode_space(&fs::read(path)?)
}

pub fn encode_database(db: &FingerprintDatabase) -> Result<Vec<u8>> {
    let (h, w) = db.dims();
    let mut out = Vec::new();
    SpaceFileHeader {
        magic: DATABASE_MAGIC,
        version: VERSION,
        height: dim_u32(h)?,
        width: dim_u32(w)?,
        count: dim_u32(db.len())?,
        edge: EdgeConfig {
            method: EdgeMethod::None,
            canny_sigma: 0.0,
            canny_high_percentile: 0.0,
            canny_low_ratio: 0.0,
            sobel_threshold_factor: 0.0,
        },
    }
    .write(&mut out);
    push_row_major(&mut out, db.data());
    for label in db.labels() {
        out.extend_from_slice(&label.finger.unwrap_or(0).to_le_bytes());
        out.extend_from_slice(&label.impression.unwrap_or(0).to_le_bytes());
        out.push(u8::from(label.finger.is_some()) | (u8::from(label.impression.is_some()) << 1));
        out.extend_from_slice(&dim_u32(label.path.len())?.to_le_bytes());
        out.extend_from_slice(label.path.as_bytes());
    }
    Ok(out)
}

pub fn decode_database(bytes: &[u8]) -> Result<FingerprintDatabase> {
    let mut reader = Reader { bytes, pos: 0 };
    let header = SpaceFileHeader::read(&mut reader, DATABASE_MAGIC, false)?;
    let (h, w, m) = (header.height as usize, header.width as usize, header.count as usize);
    let data = DMatrix::from_row_slice(h * w, m, &reader.f64s(h * w * m)?);
    if let Some(bad) = data.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Corrupt(format!("pixel {bad} outside [0, 1]")));
    }
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let finger = reader.u32()?;
        let impression = reader.u32()?;
        let flags = reader.take(1)?[0];
        let len = reader.u32()? as usize;
        let path = String::from_utf8(reader.take(len)?.to_vec())
            .map_err(|_| Error::Corrupt("label path is not UTF-8".into()))?;
        labels.push(ImageLabel {
            finger: (flags & 1 != 0).then_some(finger),
            impression: (flags & 2 != 0).then_some(impression),
            path,
        });
    }
    if reader.remaining() != 0 {
        return Err(Error::FileLength {
            expected: reader.pos as u64,
            actual: bytes.len() as u64,
        });
    }
    FingerprintDatabase::from_matrix(data, labels, h, w)
}

pub fn save_database(db: &FingerprintDatabase, path: &Path) -> Result<()> {
    write_atomic(path, &encode_database(db)?)
}

pub fn load_database(path: &Path) -> Result<FingerprintDatabase> {
    decode_database(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenspace::train;
    use crate::imaging::GrayImage;
    use proptest::prelude::*;

    fn sample_db(h: usize, w: usize, m: usize, seed: u64) -> FingerprintDatabase {
        let images: Vec<GrayImage> = (0..m)
            .map(|k| {
                GrayImage::from_fn(h, w, |r, c| {
                    let x = seed
                        .wrapping_add((k * 977 + r * 31 + c) as u64)
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    (x >> 11) as f64 / (1u64 << 53) as f64
                })
                .unwrap()
            })
            .collect();
        let labels = (0..m)
            .map(|k| ImageLabel {
                finger: Some(k as u32 / 2 + 1),
                impression: if k == 1 { None } else { Some(k as u32 % 2 + 1) },
                path: format!("dir/{k}_é.tif"),
            })
            .collect();
        FingerprintDatabase::from_images(&images, labels).unwrap()
    }

    fn sample_space() -> EigenSpace {
        let cfg = EdgeConfig {
            canny_sigma: 1.25,
            ..EdgeConfig::with_method(EdgeMethod::Canny)
        };
        train(&sample_db(12, 13, 4, 3), &cfg).unwrap()
    }

    #[test]
    fn space_round_trip_is_bit_exact() {
        let space = sample_space();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.fpcs");
        save_space(&space, &path).unwrap();
        let loaded = load_space(&path).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(loaded.mean.as_slice()), bits(space.mean.as_slice()));
        assert_eq!(bits(loaded.basis.as_slice()), bits(space.basis.as_slice()));
        assert_eq!(bits(loaded.eigenvalues.as_slice()), bits(space.eigenvalues.as_slice()));
        assert_eq!(bits(loaded.omega.as_slice()), bits(space.omega.as_slice()));
        assert_eq!(loaded, space);
        let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
    }

    #[test]
    fn space_file_length_from_layout() {
        let space = sample_space();
        let bytes = encode_space(&space).unwrap();
        let (nk, m) = (12 * 13, 4);
        assert_eq!(bytes.len(), 53 + 8 * (nk * (m + 1) + m * (m + 1)));
        assert_eq!(&bytes[..4], b"FPCS");
        assert_eq!(bytes[20], 2);
        assert_eq!(f64::from_le_bytes(bytes[21..29].try_into().unwrap()), 1.25);
        // mean[0] follows the header directly
        assert_eq!(f64::from_le_bytes(bytes[53..61].try_into().unwrap()), space.mean[0]);
        // U row 0, column 1
        let off = 53 + 8 * (nk + 1);
        assert_eq!(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()), space.basis[(0, 1)]);
    }

    #[test]
    fn corrupt_space_files() {
        let bytes = encode_space(&sample_space()).unwrap();
        assert!(matches!(decode_space(&bytes[..bytes.len() - 1]), Err(Error::UnexpectedEof)));
        assert!(matches!(decode_space(&bytes[..10]), Err(Error::UnexpectedEof)));
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(matches!(decode_space(&longer), Err(Error::FileLength { .. })));
        let mut bad = bytes.clone();
        bad[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_space(&bad), Err(Error::BadMagic { .. })));
        let mut v2 = bytes.clone();
        v2[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(decode_space(&v2), Err(Error::UnsupportedVersion(2))));
        let mut method = bytes;
        method[20] = 9;
        assert!(matches!(decode_space(&method), Err(Error::Corrupt(_))));
    }

    #[test]
    fn loaded_space_keeps_self_projection() {
        let db = sample_db(5, 6, 5, 11);
        let space = train(&db, &EdgeConfig::default()).unwrap();
        let loaded = decode_space(&encode_space(&space).unwrap()).unwrap();
        for m in 0..db.len() {
            let p = crate::eigenspace::project(&loaded, &db.image(m)).unwrap();
            assert_eq!(p.coords.as_slice(), loaded.omega.column(m).as_slice());
        }
    }

    #[test]
    fn database_round_trip_and_errors() {
        let db = sample_db(3, 4, 5, 1);
        let bytes = encode_database(&db).unwrap();
        assert_eq!(&bytes[..4], b"FPDB");
        let loaded = decode_database(&bytes).unwrap();
        assert_eq!(loaded, db);
        assert!(loaded.label_fallback);
        assert!(matches!(decode_database(&bytes[..bytes.len() - 2]), Err(Error::UnexpectedEof)));
        let mut longer = bytes.clone();
        longer.extend_from_slice(b"xx");
        assert!(matches!(decode_database(&longer), Err(Error::FileLength { .. })));
        assert!(matches!(decode_space(&bytes), Err(Error::BadMagic { .. })));
    }

    proptest! {
        #[test]
        fn database_round_trip(h in 1usize..5, w in 1usize..5, m in 2usize..6, seed in any::<u64>()) {
            let db = sample_db(h, w, m, seed);
            prop_assert_eq!(decode_database(&encode_database(&db).unwrap()).unwrap(), db);
        }
    }
}
