use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::curve::transform::{full_offsets, traverse};
use crate::curve::{CurveSpec, LatticePoint, Region};
use crate::error::{Error, Result};

/// How region cells are laid out in the 1D code.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Keeps full-curve indices; code length `2^(n·p)` with gaps for cells outside the region.
    #[default]
    Padded,
    /// Renumbers region cells consecutively in curve order.
    Compacted,
}

impl std::str::FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "padded" => Ok(Layout::Padded),
            "compacted" => Ok(Layout::Compacted),
            other => Err(Error::Format {
                format: "layout",
                reason: format!("unknown layout {other:?} (expected padded or compacted)"),
            }),
        }
    }
}

pub(crate) const INVALID: u32 = u32::MAX;

/// Bijection between region cells and 1D code slots.
#[derive(Clone, Debug)]
pub struct MappingTable {
    spec: CurveSpec,
    region: Region,
    layout: Layout,
    /// Code slot to row-major region offset, `INVALID` for padding.
    slots: Vec<u32>,
    /// Row-major region offset to code slot, `INVALID` for cells off the curve.
    /// Built on first lookup: the scattered writes cost more than the walk itself.
    cell_slots: OnceLock<Vec<u32>>,
}

impl PartialEq for MappingTable {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.region == other.region
            && self.layout == other.layout
            && self.slots == other.slots
    }
}

impl Eq for MappingTable {}

fn invert(slots: &[u32], cells: usize) -> Result<Vec<u32>> {
    let mut cell_slots = vec![INVALID; cells];
    for (slot, &off) in slots.iter().enumerate() {
        if off == INVALID {
            continue;
        }
        let entry = cell_slots.get_mut(off as usize).ok_or_else(|| Error::Format {
            format: "mapping table",
            reason: format!("region offset {off} out of range"),
        })?;
        if *entry != INVALID {
            return Err(Error::Format {
                format: "mapping table",
                reason: format!("region offset {off} mapped twice"),
            });
        }
        *entry = slot as u32;
    }
    Ok(cell_slots)
}

impl MappingTable {
    /// Builds a table from the region offset stored in each code slot.
    pub(crate) fn from_slots(
        spec: CurveSpec,
        region: Region,
        layout: Layout,
        slots: Vec<u32>,
    ) -> Result<Self> {
        let cell_slots = OnceLock::from(invert(&slots, region.cell_count())?);
        Ok(Self {
            spec,
            region,
            layout,
            slots,
            cell_slots,
        })
    }

    pub fn spec(&self) -> CurveSpec {
        self.spec
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn code_length(&self) -> usize {
        self.slots.len()
    }

    /// Number of mapped region cells.
    pub fn entry_count(&self) -> usize {
        self.slots.iter().filter(|&&s| s != INVALID).count()
    }

    fn cell_slots(&self) -> &[u32] {
        self.cell_slots.get_or_init(|| {
            invert(&self.slots, self.region.cell_count()).expect("slots validated at construction")
        })
    }

    pub fn is_valid(&self, slot: usize) -> bool {
        self.slots.get(slot).is_some_and(|&o| o != INVALID)
    }

    pub fn index_of(&self, cell: &LatticePoint) -> Option<u32> {
        let off = self.region.offset(cell)?;
        match self.cell_slots()[off] {
            INVALID => None,
            s => Some(s),
        }
    }

    pub fn cell_at(&self, slot: usize) -> Option<LatticePoint> {
        self.region_offset_at(slot)
            .map(|o| self.region.cell_at_offset(o))
    }

    /// Row-major region offset stored in `slot`.
    pub fn region_offset_at(&self, slot: usize) -> Option<usize> {
        match self.slots.get(slot) {
            Some(&o) if o != INVALID => Some(o as usize),
            _ => None,
        }
    }

    /// Code slot of the cell at a row-major region offset.
    pub fn slot_of_offset(&self, offset: usize) -> Option<usize> {
        match self.cell_slots().get(offset) {
            Some(&s) if s != INVALID => Some(s as usize),
            _ => None,
        }
    }

    /// Mapped `(cell, index)` pairs in index order.
    pub fn entries(&self) -> impl Iterator<Item = (LatticePoint, u32)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, &o)| o != INVALID)
            .map(|(s, &o)| (self.region.cell_at_offset(o as usize), s as u32))
    }
}

/// Walks the full-space curve and records where each region cell lands.
pub fn build_mapping(spec: CurveSpec, region: &Region, layout: Layout) -> Result<MappingTable> {
    region.check_fits(&spec)?;
    let n = spec.n();
    let ext = region.extents();
    let full = ext.iter().all(|&e| e == spec.side());

    if full {
        // Padded and compacted coincide on the full hypercube.
        let strides = if n == 2 {
            [ext[1] as u32, 1, 0]
        } else {
            [(ext[1] * ext[2]) as u32, ext[2] as u32, 1]
        };
        let slots = full_offsets(spec, strides);
        return Ok(MappingTable {
            spec,
            region: region.clone(),
            layout,
            slots,
            cell_slots: OnceLock::new(),
        });
    }

    let len = match layout {
        Layout::Padded => spec.length(),
        Layout::Compacted => region.cell_count(),
    };
    let mut slots = vec![INVALID; len];
    let mut cell_slots = vec![INVALID; region.cell_count()];
    let mut v = 0usize;
    let mut next = 0usize;
    let e = [ext[0] as u32, ext[1] as u32, if n == 3 { ext[2] as u32 } else { 1 }];
    traverse(spec, |c| {
        if c[0] < e[0] && c[1] < e[1] && c[2] < e[2] {
            let off = (c[0] * e[1] + c[1]) * e[2] + c[2];
            let slot = match layout {
                Layout::Padded => v,
                Layout::Compacted => {
                    next += 1;
                    next - 1
                }
            };
            slots[slot] = off;
            cell_slots[off as usize] = slot as u32;
        }
        v += 1;
    });
    Ok(MappingTable {
        spec,
        region: region.clone(),
        layout,
        slots,
        cell_slots: OnceLock::from(cell_slots),
    })
}
