//! Lane-interleaved coding over a single shared word stream.
//!
//! `W` independent lane states encode one sequence: lane `j` (1-based) owns
//! the symbols whose 1-based index `i` satisfies `((i - 1) mod W) + 1 == j`,
//! and a symbol group `g` covers indices `(g-1)*W + 1 ..= g*W`. Within a
//! group the encoder processes lanes in increasing order, renormalizing a
//! lane immediately before encoding its symbol, so that group's emissions
//! land in the stream in increasing lane order.
//!
//! Decoding walks groups downward. Before the symbols of group `g` are
//! decoded, lanes refill in decreasing lane order; that pass consumes, in
//! exact reverse, the words emitted while the encoder renormalized for group
//! `g + 1`. A lane that never drains never reads, which is what lets a
//! partially initialized decoder keep a correct read cursor during split
//! synchronization.
//!
//! The encoder also returns a log with one entry per emitted word, recording
//! which lane emitted it and the lane's most recently encoded symbol at that
//! moment; split selection is built entirely on that log.

use crate::error::{Error, Result};
use crate::model::QuantizedModel;
use crate::rans::{
    decode_step, encode_step, renorm_decode, renorm_encode, StreamCursor, INITIAL_STATE,
    LOWER_BOUND,
};

/// Symbol group of a 1-based symbol index.
#[inline]
pub fn group_of(index: u64, lanes: u64) -> u64 {
    debug_assert!(index >= 1);
    (index + lanes - 1) / lanes
}

/// Lane (1-based) owning a 1-based symbol index.
#[inline]
pub fn lane_of(index: u64, lanes: u64) -> u64 {
    debug_assert!(index >= 1);
    (index - 1) % lanes + 1
}

/// Symbol index of `(group, lane)`, both 1-based.
#[inline]
pub fn index_of(group: u64, lane: u64, lanes: u64) -> u64 {
    (group - 1) * lanes + lane
}

/// One word pushed to the stream during encoder renormalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenormEvent {
    /// Offset of the emitted word in the stream.
    pub word_offset: u64,
    /// Emitting lane, 1-based.
    pub lane: u16,
    /// The lane's most recently encoded symbol at emission time; zero when
    /// the lane had not yet encoded anything.
    pub symbol_index: u64,
    /// Lane state right after the emission. A single emission always leaves
    /// the state below 2^16; keeping the full 32-bit value here lets tests
    /// check that bound instead of assuming it.
    pub post_state: u32,
}

/// Encoder output: the shared word stream, one final state per lane, and the
/// renormalization log.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub words: Vec<u16>,
    pub final_states: Vec<u32>,
    pub log: Vec<RenormEvent>,
}

/// Encode `symbols` with `lanes` interleaved states.
pub fn encode(symbols: &[u16], model: &QuantizedModel, lanes: u16) -> Result<Encoding> {
    if lanes == 0 {
        return Err(Error::InvalidParameter("lane count must be at least 1"));
    }
    let w = lanes as usize;
    let mut states = vec![INITIAL_STATE; w];
    let mut last_encoded = vec![0u64; w];
    let mut words: Vec<u16> = Vec::new();
    let mut log: Vec<RenormEvent> = Vec::new();

    for (pos, &s) in symbols.iter().enumerate() {
        let i = pos as u64 + 1;
        let j = (pos % w) as usize;
        let before = words.len();
        let (drained, emitted) = renorm_encode(states[j], model, s, &mut words)?;
        for k in 0..emitted as usize {
            log.push(RenormEvent {
                word_offset: (before + k) as u64,
                lane: j as u16 + 1,
                symbol_index: last_encoded[j],
                post_state: drained,
            });
        }
        states[j] = encode_step(drained, model, s)?;
        last_encoded[j] = i;
    }

    Ok(Encoding {
        words,
        final_states: states,
        log,
    })
}

/// Inclusive index range a group-stepped decode walks and commits.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DecodeRange {
    /// Highest symbol index the decoder produces.
    pub start_index: u64,
    /// Lowest symbol index the decoder produces; decoding stops after it.
    pub stop_index: u64,
    /// Inclusive window of indices written to the output slice. Indices
    /// outside it are decoded only to advance lane states.
    pub commit_lo: u64,
    pub commit_hi: u64,
}

/// Instrumentation for decode-order tests.
#[derive(Debug, Default)]
pub(crate) struct DecodeTrace {
    /// `(lane, word_offset)` per read, in read order.
    pub reads: Vec<(u16, u64)>,
    /// Refill pass in which each lane was initialized from an anchor.
    pub init_pass: Vec<Option<u64>>,
    /// Refill pass in which each lane performed its first read.
    pub first_read_pass: Vec<Option<u64>>,
}

impl DecodeTrace {
    #[cfg(test)]
    pub fn for_lanes(lanes: u16) -> Self {
        DecodeTrace {
            reads: Vec::new(),
            init_pass: vec![None; lanes as usize],
            first_read_pass: vec![None; lanes as usize],
        }
    }
}

/// Group-stepped backward decoder shared by the serial, partitioned, and
/// split decode paths.
///
/// `states` holds one entry per lane; `None` marks a lane that has not been
/// initialized yet and will be woken by `anchors` (lane-indexed
/// `(state, group)`) when its group is reached. Symbols decoded while some
/// lane is uninitialized are only valid above the lowest anchor index, which
/// is why callers keep `commit_hi` below it.
pub(crate) fn decode_range(
    cursor: &mut StreamCursor,
    states: &mut [Option<u32>],
    model: &QuantizedModel,
    range: DecodeRange,
    anchors: Option<&[(u16, u64)]>,
    out: &mut [u16],
    mut trace: Option<&mut DecodeTrace>,
) -> Result<()> {
    if range.start_index < range.stop_index {
        return Ok(());
    }
    debug_assert!(range.stop_index >= 1);
    debug_assert!(range.commit_lo > range.commit_hi || range.commit_lo >= range.stop_index);
    debug_assert!(range.commit_lo > range.commit_hi || range.commit_hi <= range.start_index);

    let lanes = states.len() as u64;
    let top_group = group_of(range.start_index, lanes);
    let stop_group = group_of(range.stop_index, lanes);

    for g in (stop_group..=top_group).rev() {
        let pass = top_group - g;
        // Refill pass, highest lane first: wake lanes anchored at this group,
        // then let every drained lane pull from the stream. The reads mirror,
        // in reverse, the words emitted ahead of the group-(g+1) encodes.
        for j in (0..states.len()).rev() {
            if let Some(anchor) = anchors {
                if anchor[j].1 == g && states[j].is_none() {
                    states[j] = Some(anchor[j].0 as u32);
                    if let Some(t) = trace.as_deref_mut() {
                        t.init_pass[j] = Some(pass);
                    }
                }
            }
            if let Some(x) = states[j] {
                if x < LOWER_BOUND {
                    let before = cursor.remaining();
                    states[j] = Some(renorm_decode(x, cursor)?);
                    if let Some(t) = trace.as_deref_mut() {
                        for off in (cursor.remaining()..before).rev() {
                            t.reads.push((j as u16 + 1, off as u64));
                        }
                        t.first_read_pass[j].get_or_insert(pass);
                    }
                }
            }
        }
        // Decode pass, highest lane first.
        for j in (0..states.len()).rev() {
            let i = index_of(g, j as u64 + 1, lanes);
            if i > range.start_index || i < range.stop_index {
                continue;
            }
            match states[j] {
                None => {
                    if i <= range.commit_hi {
                        return Err(Error::SyncFailure {
                            lane: j as u16 + 1,
                            index: i,
                        });
                    }
                    // Skipped: this index is inside a synchronization
                    // section and will be produced by the neighbor task.
                }
                Some(x) => {
                    let (sym, prev) = decode_step(x, model);
                    if i >= range.commit_lo && i <= range.commit_hi {
                        out[(i - range.commit_lo) as usize] = sym;
                    }
                    states[j] = Some(prev);
                }
            }
        }
    }

    // When the walk reaches the bottom of the sequence, pull back the words
    // emitted before the very first encodes so a full decode drains the
    // stream and returns every lane to the initial state.
    if range.stop_index == 1 {
        let pass = top_group - stop_group + 1;
        for j in (0..states.len()).rev() {
            if let Some(x) = states[j] {
                if x < LOWER_BOUND {
                    let before = cursor.remaining();
                    states[j] = Some(renorm_decode(x, cursor)?);
                    if let Some(t) = trace.as_deref_mut() {
                        for off in (cursor.remaining()..before).rev() {
                            t.reads.push((j as u16 + 1, off as u64));
                        }
                        t.first_read_pass[j].get_or_insert(pass);
                    }
                }
            }
        }
    }

    Ok(())
}

/// Decode `count` symbols ending at `start_index`, given the lane states as
/// they were after `start_index` was encoded. Symbols are produced from
/// `start_index` downward and returned in sequence order.
pub fn decode(
    words: &[u16],
    start_states: &[u32],
    model: &QuantizedModel,
    count: u64,
    start_index: u64,
) -> Result<Vec<u16>> {
    if start_states.is_empty() {
        return Err(Error::InvalidParameter("lane count must be at least 1"));
    }
    if count > start_index {
        return Err(Error::InvalidParameter("decode count exceeds start index"));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let stop = start_index - count + 1;
    let mut out = vec![0u16; count as usize];
    let mut states: Vec<Option<u32>> = start_states.iter().map(|&x| Some(x)).collect();
    let mut cursor = StreamCursor::new(words, words.len());
    decode_range(
        &mut cursor,
        &mut states,
        model,
        DecodeRange {
            start_index,
            stop_index: stop,
            commit_lo: stop,
            commit_hi: start_index,
        },
        None,
        &mut out,
        None,
    )?;
    Ok(out)
}
