// Binary layout, all integers and floats little-endian:
//
//   offset  size  field
//   0       8     magic "PRIORLIB"
//   8       4     u32 format version (1)
//   12      4     u32 K
//   16      8     f64 cell_size
//   24      4     u32 n_heading_bins
//   28      32    f64 x4 bounds (min_x, min_y, max_x, max_y)
//   60      8     u64 entry count
//   68      32*n  entries: u32 gx, u32 gy, u32 gh, u32 primitive_index,
//                          u64 episode_id, f64 trajectory_cost
//
// Entries are written in anchor-key order, insertion order within a key.

use super::{AnchorGrid, AnchorKey, LibraryError, PriorEntry, PriorLibrary, TrimPolicy};
use crate::geometry::Point2;
use crate::world::Bounds;
use std::io::{Read, Write};

pub const MAGIC: &[u8; 8] = b"PRIORLIB";
pub const FORMAT_VERSION: u32 = 1;

const ENTRY_BYTES: usize = 32;

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], LibraryError> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| LibraryError::Corrupt(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length checked"))
    }

    fn u32(&mut self) -> Result<u32, LibraryError> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64, LibraryError> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64, LibraryError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

impl PriorLibrary {
    /// Writes the committed entries; staged episodes are not persisted.
    pub fn save<W: Write>(&self, mut sink: W) -> Result<(), LibraryError> {
        let mut buf = Vec::with_capacity(68 + ENTRY_BYTES * self.total_entries());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.k as u32).to_le_bytes());
        buf.extend_from_slice(&self.grid.cell_size.to_le_bytes());
        buf.extend_from_slice(&self.grid.n_heading_bins.to_le_bytes());
        let b = &self.grid.bounds;
        for v in [b.min.x, b.min.y, b.max.x, b.max.y] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&(self.total_entries() as u64).to_le_bytes());
        for (key, list) in &self.entries {
            for e in list {
                buf.extend_from_slice(&key.gx.to_le_bytes());
                buf.extend_from_slice(&key.gy.to_le_bytes());
                buf.extend_from_slice(&key.gh.to_le_bytes());
                buf.extend_from_slice(&(e.primitive_index as u32).to_le_bytes());
                buf.extend_from_slice(&e.episode_id.to_le_bytes());
                buf.extend_from_slice(&e.trajectory_cost.to_le_bytes());
            }
        }
        sink.write_all(&buf)?;
        sink.flush()?;
        Ok(())
    }

    /// Reads a library with the default trim policy.
    pub fn load<R: Read>(mut source: R) -> Result<Self, LibraryError> {
        let mut buf = Vec::new();
        source.read_to_end(&mut buf)?;
        let mut cur = Cursor { buf: &buf, pos: 0 };

        if &cur.take::<8>()? != MAGIC {
            return Err(LibraryError::BadMagic);
        }
        let version = cur.u32()?;
        if version != FORMAT_VERSION {
            return Err(LibraryError::UnsupportedVersion(version));
        }
        let k = cur.u32()? as usize;
        let cell_size = cur.f64()?;
        let n_heading_bins = cur.u32()?;
        let (min_x, min_y, max_x, max_y) = (cur.f64()?, cur.f64()?, cur.f64()?, cur.f64()?);
        let bounds = Bounds::new(Point2::new(min_x, min_y), Point2::new(max_x, max_y));
        let grid = AnchorGrid::new(bounds, cell_size, n_heading_bins)?;
        let mut lib = PriorLibrary::new(grid, k, TrimPolicy::default())?;

        let count = cur.u64()?;
        let remaining = (buf.len() - cur.pos) as u64;
        if count.checked_mul(ENTRY_BYTES as u64) != Some(remaining) {
            return Err(LibraryError::Corrupt(format!(
                "header declares {count} entries but {remaining} payload bytes follow"
            )));
        }
        for _ in 0..count {
            let key = AnchorKey {
                gx: cur.u32()?,
                gy: cur.u32()?,
                gh: cur.u32()?,
            };
            let entry = PriorEntry {
                primitive_index: cur.u32()? as usize,
                episode_id: cur.u64()?,
                trajectory_cost: cur.f64()?,
            };
            lib.check_entry(&key, &entry)?;
            lib.entries.entry(key).or_default().push(entry);
        }
        let keys: Vec<AnchorKey> = lib.entries.keys().copied().collect();
        for key in keys {
            lib.refresh_pmf(key);
        }
        Ok(lib)
    }

    /// Checks that a loaded library was built for the given configuration.
    pub fn check_compatible(&self, grid: &AnchorGrid, k: usize) -> Result<(), LibraryError> {
        fn mismatch(
            field: &'static str,
            expected: impl ToString,
            found: impl ToString,
        ) -> LibraryError {
            LibraryError::Mismatch {
                field,
                expected: expected.to_string(),
                found: found.to_string(),
            }
        }
        if self.k != k {
            return Err(mismatch("K", k, self.k));
        }
        if self.grid.cell_size != grid.cell_size {
            return Err(mismatch("cell_size", grid.cell_size, self.grid.cell_size));
        }
        if self.grid.n_heading_bins != grid.n_heading_bins {
            return Err(mismatch(
                "n_heading_bins",
                grid.n_heading_bins,
                self.grid.n_heading_bins,
            ));
        }
        if self.grid.bounds != grid.bounds {
            return Err(mismatch(
                "bounds",
                format!("{:?}", grid.bounds),
                format!("{:?}", self.grid.bounds),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_lib() -> PriorLibrary {
        let grid = AnchorGrid::new(
            Bounds::new(Point2::new(-1.0, 0.0), Point2::new(9.0, 5.0)),
            0.5,
            8,
        )
        .unwrap();
        PriorLibrary::new(grid, 5, TrimPolicy::default()).unwrap()
    }

    fn bytes(lib: &PriorLibrary) -> Vec<u8> {
        let mut out = Vec::new();
        lib.save(&mut out).unwrap();
        out
    }

    #[test]
    fn empty_round_trip() {
        let lib = sample_lib();
        let out = bytes(&lib);
        assert_eq!(out.len(), 68);
        assert_eq!(&out[..8], MAGIC);
        let back = PriorLibrary::load(out.as_slice()).unwrap();
        assert_eq!(back, lib);
        assert!(back.is_empty());
    }

    #[test]
    fn rejects_out_of_range_index() {
        let mut lib = sample_lib();
        let key = AnchorKey {
            gx: 1,
            gy: 1,
            gh: 1,
        };
        lib.insert(
            key,
            PriorEntry {
                primitive_index: 4,
                episode_id: 1,
                trajectory_cost: 2.0,
            },
        )
        .unwrap();
        let mut out = bytes(&lib);
        // primitive_index of the first entry
        out[68 + 12..68 + 16].copy_from_slice(&5u32.to_le_bytes());
        assert!(matches!(
            PriorLibrary::load(out.as_slice()),
            Err(LibraryError::IndexOutOfRange { index: 5, k: 5 })
        ));
    }

    #[test]
    fn rejects_bad_headers() {
        let mut lib = sample_lib();
        lib.insert(
            AnchorKey {
                gx: 0,
                gy: 0,
                gh: 0,
            },
            PriorEntry {
                primitive_index: 0,
                episode_id: 0,
                trajectory_cost: 0.0,
            },
        )
        .unwrap();
        let good = bytes(&lib);

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(
            PriorLibrary::load(bad.as_slice()),
            Err(LibraryError::BadMagic)
        ));

        let mut bad = good.clone();
        bad[8..12].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            PriorLibrary::load(bad.as_slice()),
            Err(LibraryError::UnsupportedVersion(2))
        ));

        let mut bad = good.clone();
        bad[60..68].copy_from_slice(&7u64.to_le_bytes());
        assert!(matches!(
            PriorLibrary::load(bad.as_slice()),
            Err(LibraryError::Corrupt(_))
        ));

        let mut bad = good.clone();
        bad[16..24].copy_from_slice(&(-1.0f64).to_le_bytes());
        assert!(matches!(
            PriorLibrary::load(bad.as_slice()),
            Err(LibraryError::InvalidConfig(_))
        ));

        assert!(PriorLibrary::load(&good[..40]).is_err());
        assert!(PriorLibrary::load(&good[..good.len() - 1]).is_err());
    }

    #[test]
    fn compatibility_check() {
        let lib = sample_lib();
        assert!(lib.check_compatible(lib.grid(), 5).is_ok());
        assert!(matches!(
            lib.check_compatible(lib.grid(), 7),
            Err(LibraryError::Mismatch { field: "K", .. })
        ));
        let mut g = *lib.grid();
        g.n_heading_bins = 4;
        assert!(matches!(
            lib.check_compatible(&g, 5),
            Err(LibraryError::Mismatch {
                field: "n_heading_bins",
                ..
            })
        ));
    }
}
