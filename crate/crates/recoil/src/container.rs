//! Self-contained single-file format for a split-decodable stream.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic "RCL1" | version u8 | symbol_width u8 | quant_bits u8 | lanes u16
//! tasks u32 | n_symbols u64 | stream_words u64            (header, 29 bytes)
//! model: count u32, then per present symbol (ascending): value (1 or 2
//!        bytes by width), frequency u32
//! final lane states: lanes x u32
//! global split block (only when tasks > 1): a signed series of word-offset
//!        residuals against an even spread, then a signed series of
//!        top-group residuals against an even spread, padded to a byte
//! per-split records (tasks - 1): lanes x u16 seed states, then an unsigned
//!        series of per-lane group distances from the record's top group,
//!        each record padded to a byte
//! stream: stream_words x u16
//! ```
//!
//! Offsets and groups are stored as residuals because balanced split points
//! sit near the even spread, keeping both series narrow. Per-lane anchor
//! indices are not stored at all: a lane's index inside a known group is
//! fixed by the interleaving, so groups alone reconstruct them.

use crate::error::{Error, Result};
use crate::interleaved::{self, index_of};
use crate::model::{quantize, Histogram, QuantizedModel};
use crate::rans::LOWER_BOUND;
use crate::series::{pack_series, unpack_series, BitReader, BitWriter, MaxWidth};
use crate::splitter::{choose_splits, combine_splits, SplitPoint, SplitTable};

const MAGIC: &[u8; 4] = b"RCL1";
const VERSION: u8 = 1;

/// A fully decodable unit: parameters, model, seed data and the stream.
#[derive(Debug, Clone)]
pub struct Container {
    pub symbol_width: u8,
    pub quant_bits: u8,
    pub lanes: u16,
    pub n_symbols: u64,
    pub model: QuantizedModel,
    pub final_states: Vec<u32>,
    pub table: SplitTable,
    pub words: Vec<u16>,
}

/// Byte footprint of each container section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionSizes {
    pub header: u64,
    pub model: u64,
    pub final_states: u64,
    pub global: u64,
    pub records: u64,
    pub stream: u64,
}

impl SectionSizes {
    pub fn total(&self) -> u64 {
        self.header + self.model + self.final_states + self.global + self.records + self.stream
    }

    /// Bytes spent purely on mid-stream entry: everything a single-task
    /// container would not carry.
    pub fn split_metadata(&self) -> u64 {
        self.global + self.records
    }
}

impl Container {
    pub fn tasks(&self) -> u64 {
        self.table.points.len() as u64 + 1
    }

    /// Serialize, reporting where every byte went.
    pub fn to_bytes(&self) -> Result<(Vec<u8>, SectionSizes)> {
        if self.lanes == 0 || self.final_states.len() != self.lanes as usize {
            return Err(Error::InvalidParameter("lane count and states disagree"));
        }
        if self.tasks() > u32::MAX as u64 {
            return Err(Error::InvalidParameter("too many tasks"));
        }
        let mut buf: Vec<u8> = Vec::new();

        buf.extend_from_slice(MAGIC);
        buf.push(VERSION);
        buf.push(self.symbol_width);
        buf.push(self.quant_bits);
        buf.extend_from_slice(&self.lanes.to_le_bytes());
        buf.extend_from_slice(&(self.tasks() as u32).to_le_bytes());
        buf.extend_from_slice(&self.n_symbols.to_le_bytes());
        buf.extend_from_slice(&(self.words.len() as u64).to_le_bytes());
        let header_end = buf.len();

        let present: Vec<(u16, u32)> = self.model.present().collect();
        buf.extend_from_slice(&(present.len() as u32).to_le_bytes());
        for &(sym, f) in &present {
            match self.symbol_width {
                8 => buf.push(sym as u8),
                _ => buf.extend_from_slice(&sym.to_le_bytes()),
            }
            buf.extend_from_slice(&f.to_le_bytes());
        }
        let model_end = buf.len();

        for &x in &self.final_states {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        let states_end = buf.len();

        let mut global_end = buf.len();
        if !self.table.points.is_empty() {
            let tasks = self.tasks();
            let spread_words = (self.words.len() as u64).div_ceil(tasks);
            let spread_symbols = self.n_symbols.div_ceil(tasks);
            let mut offset_res: Vec<i64> = Vec::new();
            let mut group_res: Vec<i64> = Vec::new();
            for (i, p) in self.table.points.iter().enumerate() {
                let k = i as u64 + 1;
                offset_res.push(p.word_offset as i64 - (k * spread_words) as i64);
                group_res.push(p.max_group() as i64 - even_group(k, spread_symbols, self.lanes));
            }
            let mut w = BitWriter::new();
            pack_series(&offset_res, MaxWidth::U32, true, &mut w)?;
            pack_series(&group_res, MaxWidth::U32, true, &mut w)?;
            w.pad_to_byte();
            buf.extend_from_slice(&w.into_bytes());
            global_end = buf.len();

            for p in &self.table.points {
                debug_assert_eq!(p.anchor_states.len(), self.lanes as usize);
                for &s in &p.anchor_states {
                    buf.extend_from_slice(&s.to_le_bytes());
                }
                let top = p.max_group();
                let dist: Vec<i64> =
                    p.anchor_groups.iter().map(|&g| (top - g) as i64).collect();
                let mut w = BitWriter::new();
                pack_series(&dist, MaxWidth::U16, false, &mut w)?;
                w.pad_to_byte();
                buf.extend_from_slice(&w.into_bytes());
            }
        }
        let records_end = buf.len();

        for &word in &self.words {
            buf.extend_from_slice(&word.to_le_bytes());
        }

        let sizes = SectionSizes {
            header: header_end as u64,
            model: (model_end - header_end) as u64,
            final_states: (states_end - model_end) as u64,
            global: (global_end - states_end) as u64,
            records: (records_end - global_end) as u64,
            stream: (buf.len() - records_end) as u64,
        };
        Ok((buf, sizes))
    }

    pub fn section_sizes(&self) -> Result<SectionSizes> {
        Ok(self.to_bytes()?.1)
    }
}

/// Even-spread top group for the k-th split of a stream with the given
/// per-task symbol share.
fn even_group(k: u64, spread_symbols: u64, lanes: u16) -> i64 {
    ((k as u128 * spread_symbols as u128).div_ceil(lanes as u128)) as i64
}

/// Model the input, encode it, pick split points and assemble a container.
pub fn encode_to_container(
    symbols: &[u16],
    symbol_width: u8,
    quant_bits: u8,
    lanes: u16,
    tasks: u64,
) -> Result<Container> {
    if lanes == 0 {
        return Err(Error::InvalidParameter("lane count must be at least 1"));
    }
    let model = if symbols.is_empty() {
        QuantizedModel::empty(symbol_width, quant_bits)?
    } else {
        quantize(&Histogram::from_symbols(symbols, symbol_width)?, quant_bits)?
    };
    let enc = interleaved::encode(symbols, &model, lanes)?;
    let table = choose_splits(&enc.log, symbols.len() as u64, lanes, tasks)?;
    Ok(Container {
        symbol_width,
        quant_bits,
        lanes,
        n_symbols: symbols.len() as u64,
        model,
        final_states: enc.final_states,
        table,
        words: enc.words,
    })
}

/// Same stream and model, with the split table thinned to at most `tasks`
/// tasks. No recoding happens; dropped points simply disappear.
pub fn combine_container(c: &Container, tasks: u64) -> Result<Container> {
    let points = combine_splits(&c.table.points, tasks)?;
    Ok(Container {
        table: SplitTable {
            lanes: c.lanes,
            n_symbols: c.n_symbols,
            points,
        },
        ..c.clone()
    })
}

struct ByteCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteCursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::TruncatedContainer(what));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Parse and validate a container.
pub fn read_container(bytes: &[u8]) -> Result<Container> {
    let mut cur = ByteCursor { bytes, pos: 0 };

    if cur.take(4, "header")? != MAGIC.as_slice() {
        return Err(Error::BadMagic);
    }
    let version = cur.u8("header")?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let symbol_width = cur.u8("header")?;
    if symbol_width != 8 && symbol_width != 16 {
        return Err(Error::InconsistentMetadata("unsupported symbol width"));
    }
    let quant_bits = cur.u8("header")?;
    if quant_bits == 0 || quant_bits > 16 {
        return Err(Error::InconsistentMetadata("quantization level out of range"));
    }
    let lanes = cur.u16("header")?;
    if lanes == 0 {
        return Err(Error::InconsistentMetadata("zero lanes"));
    }
    let tasks = cur.u32("header")? as u64;
    if tasks == 0 {
        return Err(Error::InconsistentMetadata("zero tasks"));
    }
    let n_symbols = cur.u64("header")?;
    let stream_words = cur.u64("header")?;

    let count = cur.u32("model")? as usize;
    if count == 0 && n_symbols > 0 {
        return Err(Error::InconsistentMetadata("no model for nonempty data"));
    }
    let mut pairs: Vec<(u16, u32)> = Vec::with_capacity(count);
    for _ in 0..count {
        let sym = match symbol_width {
            8 => cur.u8("model")? as u16,
            _ => cur.u16("model")?,
        };
        let f = cur.u32("model")?;
        pairs.push((sym, f));
    }
    let model = QuantizedModel::from_freqs(&pairs, symbol_width, quant_bits)?;

    let mut final_states = Vec::with_capacity(lanes as usize);
    for _ in 0..lanes {
        let x = cur.u32("final states")?;
        if x < LOWER_BOUND {
            return Err(Error::InconsistentMetadata("final state not normalized"));
        }
        final_states.push(x);
    }

    let mut points: Vec<SplitPoint> = Vec::new();
    if tasks > 1 {
        let splits = (tasks - 1) as usize;
        let spread_words = stream_words.div_ceil(tasks);
        let spread_symbols = n_symbols.div_ceil(tasks);

        let rest = &bytes[cur.pos..];
        let mut br = BitReader::new(rest);
        let offset_res = unpack_series(&mut br, splits, MaxWidth::U32, true)
            .map_err(relabel_truncated("global split block"))?;
        let group_res = unpack_series(&mut br, splits, MaxWidth::U32, true)
            .map_err(relabel_truncated("global split block"))?;
        br.align_to_byte();
        cur.pos += br.bytes_consumed();

        let mut offsets = Vec::with_capacity(splits);
        let mut top_groups = Vec::with_capacity(splits);
        for i in 0..splits {
            let k = i as u64 + 1;
            let off = (k as i128) * (spread_words as i128) + offset_res[i] as i128;
            if off < 0 || off >= stream_words as i128 {
                return Err(Error::InconsistentMetadata("split offset out of range"));
            }
            if let Some(&prev) = offsets.last() {
                if off as u64 <= prev {
                    return Err(Error::InconsistentMetadata("split offsets not increasing"));
                }
            }
            offsets.push(off as u64);

            let g = even_group(k, spread_symbols, lanes) as i128 + group_res[i] as i128;
            if g < 1 {
                return Err(Error::InconsistentMetadata("split group out of range"));
            }
            top_groups.push(g as u64);
        }

        let mut prev_boundary = 0u64;
        for i in 0..splits {
            let mut states = Vec::with_capacity(lanes as usize);
            for _ in 0..lanes {
                states.push(cur.u16("split record")?);
            }
            let rest = &bytes[cur.pos..];
            let mut br = BitReader::new(rest);
            let dist = unpack_series(&mut br, lanes as usize, MaxWidth::U16, false)
                .map_err(relabel_truncated("split record"))?;
            br.align_to_byte();
            cur.pos += br.bytes_consumed();

            let top = top_groups[i];
            if !dist.contains(&0) {
                return Err(Error::InconsistentMetadata("no lane at the split's top group"));
            }
            let mut groups = Vec::with_capacity(lanes as usize);
            let mut lo = u64::MAX;
            let mut hi = 0u64;
            for (j, &d) in dist.iter().enumerate() {
                if d as u64 >= top {
                    return Err(Error::InconsistentMetadata("split group distance too large"));
                }
                let g = top - d as u64;
                let idx = index_of(g, j as u64 + 1, lanes as u64);
                if idx > n_symbols {
                    return Err(Error::InconsistentMetadata("split anchor beyond the data"));
                }
                lo = lo.min(idx);
                hi = hi.max(idx);
                groups.push(g);
            }
            if hi <= prev_boundary || lo <= prev_boundary {
                return Err(Error::InconsistentMetadata("split sections overlap"));
            }
            prev_boundary = hi;

            points.push(SplitPoint {
                boundary_index: hi,
                sync_start: lo,
                word_offset: offsets[i],
                anchor_states: states,
                anchor_groups: groups,
            });
        }
    }

    let mut words = Vec::with_capacity(stream_words as usize);
    for _ in 0..stream_words {
        words.push(cur.u16("stream")?);
    }
    if cur.pos != bytes.len() {
        return Err(Error::InconsistentMetadata("trailing bytes"));
    }

    Ok(Container {
        symbol_width,
        quant_bits,
        lanes,
        n_symbols,
        model,
        final_states,
        table: SplitTable {
            lanes,
            n_symbols,
            points,
        },
        words,
    })
}

/// Series exhaustion inside a container is a truncation of that section.
fn relabel_truncated(what: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::TruncatedSeries => Error::TruncatedContainer(what),
        other => other,
    }
}
