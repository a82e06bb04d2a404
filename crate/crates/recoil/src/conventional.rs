//! Baseline parallel codec: independent substreams fixed at encode time.
//!
//! The input is cut into `P` near-equal partitions and each partition is
//! encoded on its own, so a decoder can run one task per partition. The
//! price is paid up front and per partition: a stream offset and a full set
//! of lane states in the header, and the partition count can never change
//! after encoding. This is the reference against which the retrofittable
//! split metadata is measured.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic "RCV1" | version u8 | symbol_width u8 | quant_bits u8 | lanes u16
//! partitions u32 | n_symbols u64 | stream_words u64        (header, 29 B)
//! offsets: partitions x u32 (word offset of each substream)
//! final lane states: partitions x lanes x u32
//! model: count u32, then per present symbol value (1 or 2 bytes) + u32
//! stream: concatenated substreams, stream_words x u16
//! ```

use crate::error::{Error, Result};
use crate::interleaved::{self, decode_range, DecodeRange};
use crate::model::{quantize, Histogram, QuantizedModel};
use crate::rans::{StreamCursor, LOWER_BOUND};

const MAGIC: &[u8; 4] = b"RCV1";
const VERSION: u8 = 1;

/// A partitioned encoding: one independent substream per partition, all
/// sharing one model.
#[derive(Debug, Clone)]
pub struct Conventional {
    pub symbol_width: u8,
    pub quant_bits: u8,
    pub lanes: u16,
    pub n_symbols: u64,
    pub model: QuantizedModel,
    /// Word offset of each partition's substream, ascending, first is 0.
    pub offsets: Vec<u32>,
    /// Final lane states of each partition.
    pub final_states: Vec<Vec<u32>>,
    pub words: Vec<u16>,
}

/// Byte footprint of each section of the partitioned format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConventionalSizes {
    pub header: u64,
    pub offsets: u64,
    pub final_states: u64,
    pub model: u64,
    pub stream: u64,
}

impl ConventionalSizes {
    pub fn total(&self) -> u64 {
        self.header + self.offsets + self.final_states + self.model + self.stream
    }

    /// Fixed cost that scales with the partition count.
    pub fn per_partition_fixed(&self) -> u64 {
        self.offsets + self.final_states
    }
}

/// Symbol range of partition `p` (1-based): an even split by index.
pub fn partition_bounds(n_symbols: u64, p: u32, partitions: u32) -> (u64, u64) {
    let lo = (p as u128 - 1) * n_symbols as u128 / partitions as u128;
    let hi = p as u128 * n_symbols as u128 / partitions as u128;
    (lo as u64, hi as u64)
}

impl Conventional {
    pub fn partitions(&self) -> u32 {
        self.offsets.len() as u32
    }

    pub fn to_bytes(&self) -> Result<(Vec<u8>, ConventionalSizes)> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.push(VERSION);
        buf.push(self.symbol_width);
        buf.push(self.quant_bits);
        buf.extend_from_slice(&self.lanes.to_le_bytes());
        buf.extend_from_slice(&self.partitions().to_le_bytes());
        buf.extend_from_slice(&self.n_symbols.to_le_bytes());
        buf.extend_from_slice(&(self.words.len() as u64).to_le_bytes());
        let header_end = buf.len();

        for &o in &self.offsets {
            buf.extend_from_slice(&o.to_le_bytes());
        }
        let offsets_end = buf.len();

        for states in &self.final_states {
            debug_assert_eq!(states.len(), self.lanes as usize);
            for &x in states {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        let states_end = buf.len();

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

        for &w in &self.words {
            buf.extend_from_slice(&w.to_le_bytes());
        }

        let sizes = ConventionalSizes {
            header: header_end as u64,
            offsets: (offsets_end - header_end) as u64,
            final_states: (states_end - offsets_end) as u64,
            model: (model_end - states_end) as u64,
            stream: (buf.len() - model_end) as u64,
        };
        Ok((buf, sizes))
    }
}

/// Model the input once, then encode each partition independently.
pub fn encode_conventional(
    symbols: &[u16],
    symbol_width: u8,
    quant_bits: u8,
    lanes: u16,
    partitions: u32,
) -> Result<Conventional> {
    if lanes == 0 {
        return Err(Error::InvalidParameter("lane count must be at least 1"));
    }
    if partitions == 0 {
        return Err(Error::InvalidParameter("partition count must be at least 1"));
    }
    let model = if symbols.is_empty() {
        QuantizedModel::empty(symbol_width, quant_bits)?
    } else {
        quantize(&Histogram::from_symbols(symbols, symbol_width)?, quant_bits)?
    };

    let mut offsets = Vec::with_capacity(partitions as usize);
    let mut final_states = Vec::with_capacity(partitions as usize);
    let mut words: Vec<u16> = Vec::new();
    for p in 1..=partitions {
        let (lo, hi) = partition_bounds(symbols.len() as u64, p, partitions);
        let enc = interleaved::encode(&symbols[lo as usize..hi as usize], &model, lanes)?;
        if words.len() > u32::MAX as usize {
            return Err(Error::ValueOverflow {
                value: words.len() as u64,
                max_bits: 32,
            });
        }
        offsets.push(words.len() as u32);
        final_states.push(enc.final_states);
        words.extend_from_slice(&enc.words);
    }

    Ok(Conventional {
        symbol_width,
        quant_bits,
        lanes,
        n_symbols: symbols.len() as u64,
        model,
        offsets,
        final_states,
        words,
    })
}

/// Parse and validate a partitioned encoding.
pub fn read_conventional(bytes: &[u8]) -> Result<Conventional> {
    let need = |have: usize, want: usize, what: &'static str| -> Result<()> {
        if have < want {
            Err(Error::TruncatedContainer(what))
        } else {
            Ok(())
        }
    };
    let mut pos = 0usize;

    need(bytes.len(), 29, "header")?;
    if &bytes[0..4] != MAGIC.as_slice() {
        return Err(Error::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(Error::UnsupportedVersion(bytes[4]));
    }
    let symbol_width = bytes[5];
    if symbol_width != 8 && symbol_width != 16 {
        return Err(Error::InconsistentMetadata("unsupported symbol width"));
    }
    let quant_bits = bytes[6];
    if quant_bits == 0 || quant_bits > 16 {
        return Err(Error::InconsistentMetadata("quantization level out of range"));
    }
    let lanes = u16::from_le_bytes(bytes[7..9].try_into().unwrap());
    if lanes == 0 {
        return Err(Error::InconsistentMetadata("zero lanes"));
    }
    let partitions = u32::from_le_bytes(bytes[9..13].try_into().unwrap());
    if partitions == 0 {
        return Err(Error::InconsistentMetadata("zero partitions"));
    }
    let n_symbols = u64::from_le_bytes(bytes[13..21].try_into().unwrap());
    let stream_words = u64::from_le_bytes(bytes[21..29].try_into().unwrap());
    pos += 29;

    let p = partitions as usize;
    need(bytes.len() - pos, 4 * p, "offset table")?;
    let mut offsets = Vec::with_capacity(p);
    for i in 0..p {
        let o = u32::from_le_bytes(bytes[pos + 4 * i..pos + 4 * i + 4].try_into().unwrap());
        if (i == 0 && o != 0)
            || offsets.last().is_some_and(|&prev| o < prev)
            || o as u64 > stream_words
        {
            return Err(Error::InconsistentMetadata("offset table out of order"));
        }
        offsets.push(o);
    }
    pos += 4 * p;

    need(bytes.len() - pos, 4 * p * lanes as usize, "final states")?;
    let mut final_states = Vec::with_capacity(p);
    for _ in 0..p {
        let mut states = Vec::with_capacity(lanes as usize);
        for _ in 0..lanes {
            let x = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
            if x < LOWER_BOUND {
                return Err(Error::InconsistentMetadata("final state not normalized"));
            }
            states.push(x);
            pos += 4;
        }
        final_states.push(states);
    }

    need(bytes.len() - pos, 4, "model")?;
    let count = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
    pos += 4;
    if count == 0 && n_symbols > 0 {
        return Err(Error::InconsistentMetadata("no model for nonempty data"));
    }
    let sym_len = if symbol_width == 8 { 1 } else { 2 };
    need(bytes.len() - pos, count * (sym_len + 4), "model")?;
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let sym = if symbol_width == 8 {
            bytes[pos] as u16
        } else {
            u16::from_le_bytes(bytes[pos..pos + 2].try_into().unwrap())
        };
        pos += sym_len;
        let f = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
        pos += 4;
        pairs.push((sym, f));
    }
    let model = QuantizedModel::from_freqs(&pairs, symbol_width, quant_bits)?;

    need(
        bytes.len() - pos,
        stream_words as usize * 2,
        "stream",
    )?;
    let mut words = Vec::with_capacity(stream_words as usize);
    for i in 0..stream_words as usize {
        words.push(u16::from_le_bytes(
            bytes[pos + 2 * i..pos + 2 * i + 2].try_into().unwrap(),
        ));
    }
    pos += stream_words as usize * 2;
    if pos != bytes.len() {
        return Err(Error::InconsistentMetadata("trailing bytes"));
    }

    Ok(Conventional {
        symbol_width,
        quant_bits,
        lanes,
        n_symbols,
        model,
        offsets,
        final_states,
        words,
    })
}

fn run_partition(c: &Conventional, p: u32, out: &mut [u16]) -> Result<()> {
    let (lo, hi) = partition_bounds(c.n_symbols, p, c.partitions());
    let count = hi - lo;
    debug_assert_eq!(out.len(), count as usize);
    if count == 0 {
        return Ok(());
    }
    let start = c.offsets[p as usize - 1] as usize;
    let end = if (p as usize) < c.offsets.len() {
        c.offsets[p as usize] as usize
    } else {
        c.words.len()
    };
    if end < start || end > c.words.len() {
        return Err(Error::InconsistentMetadata("offset table out of order"));
    }
    let slice = &c.words[start..end];
    let mut states: Vec<Option<u32>> = c.final_states[p as usize - 1]
        .iter()
        .map(|&x| Some(x))
        .collect();
    let mut cursor = StreamCursor::new(slice, slice.len());
    decode_range(
        &mut cursor,
        &mut states,
        &c.model,
        DecodeRange {
            start_index: count,
            stop_index: 1,
            commit_lo: 1,
            commit_hi: count,
        },
        None,
        out,
        None,
    )
}

/// Decode all partitions on up to `workers` threads.
pub fn decode_conventional(c: &Conventional, workers: usize) -> Result<Vec<u16>> {
    if c.final_states.len() != c.offsets.len() {
        return Err(Error::InconsistentMetadata("partition tables disagree"));
    }
    for states in &c.final_states {
        if states.len() != c.lanes as usize {
            return Err(Error::InconsistentMetadata("partition tables disagree"));
        }
    }
    let partitions = c.partitions();
    let mut out = vec![0u16; c.n_symbols as usize];
    let mut jobs: Vec<(u32, &mut [u16])> = Vec::with_capacity(partitions as usize);
    let mut rest: &mut [u16] = &mut out;
    for p in 1..=partitions {
        let (lo, hi) = partition_bounds(c.n_symbols, p, partitions);
        let (head, tail) = rest.split_at_mut((hi - lo) as usize);
        jobs.push((p, head));
        rest = tail;
    }
    debug_assert!(rest.is_empty());

    let workers = workers.max(1).min(jobs.len().max(1));
    let mut failure: Option<(u32, Error)> = None;
    if workers == 1 {
        for (p, slice) in jobs {
            if let Err(e) = run_partition(c, p, slice) {
                failure = Some((p, e));
                break;
            }
        }
    } else {
        let mut buckets: Vec<Vec<(u32, &mut [u16])>> =
            (0..workers).map(|_| Vec::new()).collect();
        for (i, job) in jobs.into_iter().enumerate() {
            buckets[i % workers].push(job);
        }
        let results = std::thread::scope(|s| {
            let handles: Vec<_> = buckets
                .into_iter()
                .map(|bucket| {
                    s.spawn(move || {
                        bucket
                            .into_iter()
                            .map(|(p, slice)| (p, run_partition(c, p, slice)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("decode worker panicked"))
                .collect::<Vec<_>>()
        });
        for (p, r) in results {
            if let Err(e) = r {
                if failure.as_ref().map_or(true, |(fp, _)| p < *fp) {
                    failure = Some((p, e));
                }
            }
        }
    }
    match failure {
        Some((_, e)) => Err(e),
        None => Ok(out),
    }
}
