//! Mapping-table exports.
//!
//! JSON:
//! `{"n":…, "p":…, "region":[…], "layout":"padded|compacted", "entries":[{"cell":[…], "index":v}, …]}`
//! with entries sorted by index. Variable-length tables use `"layout":"vh"` and
//! add a `"representatives"` array of the same entry shape.
//!
//! Binary (little-endian): magic `HDMT`, `u8` version = 1, `u8` n, `u8` p,
//! `u8` layout (0 padded, 1 compacted, 2 vh), `u32` extent per axis, then one
//! `(u16 per coordinate, u32 index)` record per entry. Vanilla tables carry
//! exactly one entry per region cell. Variable-length tables prefix the entry
//! records with a `u32` count and append a `u32` count followed by
//! `(u16 coords of skipped cell, u32 on-curve index)` representative records.

use serde::{Deserialize, Serialize};

use crate::curve::mapping::INVALID;
use crate::curve::{CurveSpec, LatticePoint, Layout, MappingTable, Region};
use crate::error::{Error, Result};
use crate::vh::VhMappingTable;

const MAGIC: &[u8; 4] = b"HDMT";
const VERSION: u8 = 1;
const LAYOUT_VH: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileLayout {
    Padded,
    Compacted,
    Vh,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub cell: Vec<u32>,
    pub index: u32,
}

/// Format-neutral view of a vanilla or variable-length mapping table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingFile {
    pub n: usize,
    pub p: u32,
    pub region: Vec<usize>,
    pub layout: FileLayout,
    pub entries: Vec<FileEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representatives: Option<Vec<FileEntry>>,
}

fn entry(cell: LatticePoint, index: u32) -> FileEntry {
    FileEntry {
        cell: cell.coords().to_vec(),
        index,
    }
}

fn malformed(reason: impl Into<String>) -> Error {
    Error::Format {
        format: "HDMT",
        reason: reason.into(),
    }
}

impl MappingFile {
    pub fn from_table(table: &MappingTable) -> Self {
        Self {
            n: table.spec().n(),
            p: table.spec().p(),
            region: table.region().extents().to_vec(),
            layout: match table.layout() {
                Layout::Padded => FileLayout::Padded,
                Layout::Compacted => FileLayout::Compacted,
            },
            entries: table.entries().map(|(c, v)| entry(c, v)).collect(),
            representatives: None,
        }
    }

    pub fn from_vh(table: &VhMappingTable) -> Self {
        let base = table.base();
        Self {
            n: base.spec().n(),
            p: base.spec().p(),
            region: base.region().extents().to_vec(),
            layout: FileLayout::Vh,
            entries: base.entries().map(|(c, v)| entry(c, v)).collect(),
            representatives: Some(
                table
                    .representatives()
                    .iter()
                    .map(|&(c, v)| entry(c, v))
                    .collect(),
            ),
        }
    }

    fn spec_and_region(&self) -> Result<(CurveSpec, Region)> {
        let spec = CurveSpec::new(self.n, self.p)?;
        let region = Region::new(&self.region)?;
        region.check_fits(&spec)?;
        Ok((spec, region))
    }

    fn point(&self, region: &Region, cell: &[u32]) -> Result<LatticePoint> {
        let pt = LatticePoint::new(cell)?;
        if !region.contains(&pt) {
            return Err(malformed(format!("cell {cell:?} outside region {:?}", self.region)));
        }
        Ok(pt)
    }

    fn slots(&self, region: &Region, code_length: usize) -> Result<Vec<u32>> {
        let mut slots = vec![INVALID; code_length];
        for e in &self.entries {
            let pt = self.point(region, &e.cell)?;
            let slot = slots
                .get_mut(e.index as usize)
                .ok_or_else(|| malformed(format!("index {} beyond code length {code_length}", e.index)))?;
            if *slot != INVALID {
                return Err(malformed(format!("index {} used twice", e.index)));
            }
            *slot = region.offset(&pt).expect("checked") as u32;
        }
        Ok(slots)
    }

    pub fn into_table(&self) -> Result<MappingTable> {
        let (spec, region) = self.spec_and_region()?;
        let (layout, len) = match self.layout {
            FileLayout::Padded => (Layout::Padded, spec.length()),
            FileLayout::Compacted => (Layout::Compacted, region.cell_count()),
            FileLayout::Vh => return Err(malformed("variable-length table read as vanilla")),
        };
        if self.entries.len() != region.cell_count() {
            return Err(malformed(format!(
                "{} entries for a region of {} cells",
                self.entries.len(),
                region.cell_count()
            )));
        }
        MappingTable::from_slots(spec, region.clone(), layout, self.slots(&region, len)?)
    }

    pub fn into_vh(&self) -> Result<VhMappingTable> {
        let (spec, region) = self.spec_and_region()?;
        if self.layout != FileLayout::Vh {
            return Err(malformed("vanilla table read as variable-length"));
        }
        let base = MappingTable::from_slots(
            spec,
            region.clone(),
            Layout::Compacted,
            self.slots(&region, self.entries.len())?,
        )?;
        let reps = self
            .representatives
            .as_deref()
            .unwrap_or_default()
            .iter()
            .map(|e| Ok((self.point(&region, &e.cell)?, e.index)))
            .collect::<Result<Vec<_>>>()?;
        VhMappingTable::from_parts(base, reps)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_hdmt(&self) -> Result<Vec<u8>> {
        let layout = match self.layout {
            FileLayout::Padded => 0,
            FileLayout::Compacted => 1,
            FileLayout::Vh => LAYOUT_VH,
        };
        let mut out = Vec::with_capacity(16 + self.entries.len() * (4 + 2 * self.n));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&[VERSION, self.n as u8, self.p as u8, layout]);
        for &e in &self.region {
            out.extend_from_slice(&(e as u32).to_le_bytes());
        }
        let write_records = |out: &mut Vec<u8>, records: &[FileEntry]| -> Result<()> {
            for r in records {
                for &c in &r.cell {
                    let c = u16::try_from(c).map_err(|_| malformed(format!("coordinate {c} exceeds u16")))?;
                    out.extend_from_slice(&c.to_le_bytes());
                }
                out.extend_from_slice(&r.index.to_le_bytes());
            }
            Ok(())
        };
        if self.layout == FileLayout::Vh {
            out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
            write_records(&mut out, &self.entries)?;
            let reps = self.representatives.as_deref().unwrap_or_default();
            out.extend_from_slice(&(reps.len() as u32).to_le_bytes());
            write_records(&mut out, reps)?;
        } else {
            write_records(&mut out, &self.entries)?;
        }
        Ok(out)
    }

    pub fn from_hdmt(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(malformed("bad magic"));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(malformed(format!("unsupported version {version}")));
        }
        let n = r.u8()? as usize;
        let p = r.u8()? as u32;
        let layout = match r.u8()? {
            0 => FileLayout::Padded,
            1 => FileLayout::Compacted,
            LAYOUT_VH => FileLayout::Vh,
            t => return Err(malformed(format!("unknown layout tag {t}"))),
        };
        if n != 2 && n != 3 {
            return Err(Error::InvalidDimension(n));
        }
        let region: Vec<usize> = (0..n).map(|_| r.u32().map(|v| v as usize)).collect::<Result<_>>()?;
        let read_records = |r: &mut Reader<'_>, count: usize| -> Result<Vec<FileEntry>> {
            (0..count)
                .map(|_| {
                    let cell = (0..n).map(|_| r.u16().map(u32::from)).collect::<Result<Vec<_>>>()?;
                    Ok(FileEntry { cell, index: r.u32()? })
                })
                .collect()
        };
        let (entries, representatives) = if layout == FileLayout::Vh {
            let count = r.u32()? as usize;
            let entries = read_records(&mut r, count)?;
            let count = r.u32()? as usize;
            (entries, Some(read_records(&mut r, count)?))
        } else {
            let count = region.iter().product();
            (read_records(&mut r, count)?, None)
        };
        if r.pos != bytes.len() {
            return Err(malformed(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Self {
            n,
            p,
            region,
            layout,
            entries,
            representatives,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos + k;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| malformed("truncated"))?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

pub fn write_json(table: &MappingTable) -> Result<String> {
    MappingFile::from_table(table).to_json()
}

pub fn read_json(s: &str) -> Result<MappingTable> {
    MappingFile::from_json(s)?.into_table()
}

pub fn write_hdmt(table: &MappingTable) -> Result<Vec<u8>> {
    MappingFile::from_table(table).to_hdmt()
}

pub fn read_hdmt(bytes: &[u8]) -> Result<MappingTable> {
    MappingFile::from_hdmt(bytes)?.into_table()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::build_mapping;

    #[test]
    fn binary_layout_of_order_one() {
        let s = CurveSpec::new(2, 1).unwrap();
        let t = build_mapping(s, &s.full_region(), Layout::Padded).unwrap();
        let bytes = write_hdmt(&t).unwrap();
        let mut expected = b"HDMT".to_vec();
        expected.extend_from_slice(&[1, 2, 1, 0]);
        expected.extend_from_slice(&2u32.to_le_bytes());
        expected.extend_from_slice(&2u32.to_le_bytes());
        for (i, j, v) in [(0u16, 0u16, 0u32), (1, 0, 1), (1, 1, 2), (0, 1, 3)] {
            expected.extend_from_slice(&i.to_le_bytes());
            expected.extend_from_slice(&j.to_le_bytes());
            expected.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(bytes, expected);
        assert_eq!(read_hdmt(&bytes).unwrap(), t);
    }

    #[test]
    fn json_shape() {
        let s = CurveSpec::new(2, 1).unwrap();
        let t = build_mapping(s, &s.full_region(), Layout::Padded).unwrap();
        let json = write_json(&t).unwrap();
        assert_eq!(
            json,
            r#"{"n":2,"p":1,"region":[2,2],"layout":"padded","entries":[{"cell":[0,0],"index":0},{"cell":[1,0],"index":1},{"cell":[1,1],"index":2},{"cell":[0,1],"index":3}]}"#
        );
        assert_eq!(read_json(&json).unwrap(), t);
    }

    #[test]
    fn truncated_input_rejected() {
        let s = CurveSpec::new(3, 1).unwrap();
        let t = build_mapping(s, &s.full_region(), Layout::Compacted).unwrap();
        let bytes = write_hdmt(&t).unwrap();
        assert!(read_hdmt(&bytes[..bytes.len() - 1]).is_err());
        assert!(read_hdmt(b"XXXX").is_err());
    }
}
