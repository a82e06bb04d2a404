//! Core range-coder state transforms.
//!
//! States are 32 bits wide and normalized states live in `[2^16, 2^32)`.
//! Renormalization moves 16-bit words between the state and the word stream:
//! the encoder pushes the low half out when the state would overflow the next
//! encode step, the decoder pulls words back in while its state is below the
//! normalized interval. Because the word width is at least the quantization
//! level, each of those loops runs at most once per symbol, and a state is
//! always below `2^16` right after an emission.

use crate::error::{Error, Result};
use crate::model::QuantizedModel;

/// Total state width in bits.
pub const STATE_BITS: u32 = 32;
/// Width of one stream word (`b`).
pub const WORD_BITS: u32 = 16;
/// Lower bound of the normalized state interval (`L`).
pub const LOWER_BOUND: u32 = 1 << 16;
/// Every lane starts encoding from this state.
pub const INITIAL_STATE: u32 = LOWER_BOUND;

/// Encoder-side renormalization threshold for a symbol of frequency `freq`:
/// the state must be below `freq << (32 - quant_bits)` before the symbol is
/// pushed, or the following decode step would not be able to invert it.
#[inline]
pub fn renorm_threshold(freq: u32, quant_bits: u8) -> u64 {
    (freq as u64) << (STATE_BITS - quant_bits as u32)
}

/// Push one symbol into the state. Fails if the model cannot express the
/// symbol; the caller must have renormalized for this symbol first.
#[inline]
pub fn encode_step(x: u32, model: &QuantizedModel, symbol: u16) -> Result<u32> {
    let f = model.freq(symbol);
    if f == 0 {
        return Err(Error::ZeroFrequencySymbol(symbol));
    }
    debug_assert!((x as u64) < renorm_threshold(f, model.quant_bits()));
    let q = x / f;
    let r = x % f;
    Ok((q << model.quant_bits()) + model.cum(symbol) + r)
}

/// Pop the most recently encoded symbol out of a normalized state.
#[inline]
pub fn decode_step(x: u32, model: &QuantizedModel) -> (u16, u32) {
    let n = model.quant_bits();
    let slot = x & ((1u32 << n) - 1);
    let symbol = model.lookup_symbol(slot);
    let prev = model.freq(symbol) * (x >> n) + (slot - model.cum(symbol));
    (symbol, prev)
}

/// Emit words until the state can absorb `next` without overflowing.
/// Returns the drained state and how many words were emitted; with the fixed
/// 16-bit word width that count is at most one.
#[inline]
pub fn renorm_encode(
    x: u32,
    model: &QuantizedModel,
    next: u16,
    sink: &mut Vec<u16>,
) -> Result<(u32, u32)> {
    let f = model.freq(next);
    if f == 0 {
        return Err(Error::ZeroFrequencySymbol(next));
    }
    let threshold = renorm_threshold(f, model.quant_bits());
    let mut x = x;
    let mut emitted = 0u32;
    while x as u64 >= threshold {
        sink.push((x & 0xFFFF) as u16);
        x >>= WORD_BITS;
        emitted += 1;
    }
    debug_assert!(emitted <= 1, "one emission must renormalize any 32-bit state");
    debug_assert!(emitted == 0 || x < LOWER_BOUND);
    Ok((x, emitted))
}

/// Refill a drained state from the stream until it is normalized again.
/// Reads at most one word for any state a decode step can produce.
#[inline]
pub fn renorm_decode(x: u32, cursor: &mut StreamCursor) -> Result<u32> {
    let mut x = x;
    while x < LOWER_BOUND {
        let w = cursor.pop()?;
        x = (x << WORD_BITS) | w as u32;
    }
    Ok(x)
}

/// Backward read position over a shared word stream. Reading moves toward
/// offset zero; each decode task owns its own cursor.
#[derive(Debug, Clone)]
pub struct StreamCursor<'a> {
    words: &'a [u16],
    pos: usize,
}

impl<'a> StreamCursor<'a> {
    /// Cursor whose first read returns `words[pos - 1]`.
    pub fn new(words: &'a [u16], pos: usize) -> Self {
        debug_assert!(pos <= words.len());
        StreamCursor { words, pos }
    }

    /// Number of words still readable below the cursor.
    pub fn remaining(&self) -> usize {
        self.pos
    }

    #[inline]
    pub fn pop(&mut self) -> Result<u16> {
        if self.pos == 0 {
            return Err(Error::BitstreamUnderflow);
        }
        self.pos -= 1;
        Ok(self.words[self.pos])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{quantize, Histogram};
    use proptest::prelude::*;

    /// f = {A: 8, B: 6, C: 2} at quant_bits = 4, so F = {0, 8, 14}.
    fn worked_model() -> QuantizedModel {
        let mut h = Histogram::new(8).unwrap();
        for (s, c) in [(b'A', 8), (b'B', 6), (b'C', 2)] {
            for _ in 0..c {
                h.record(s as u16).unwrap();
            }
        }
        quantize(&h, 4).unwrap()
    }

    #[test]
    fn encode_step_worked_examples() {
        let m = worked_model();
        assert_eq!(encode_step(16, &m, b'A' as u16).unwrap(), 32);
        assert_eq!(encode_step(5, &m, b'C' as u16).unwrap(), 47);
    }

    #[test]
    fn decode_step_worked_examples() {
        let m = worked_model();
        assert_eq!(decode_step(47, &m), (b'C' as u16, 5));
        assert_eq!(decode_step(32, &m), (b'A' as u16, 16));
    }

    #[test]
    fn encode_step_rejects_absent_symbol() {
        let m = worked_model();
        assert!(matches!(
            encode_step(16, &m, b'Z' as u16),
            Err(Error::ZeroFrequencySymbol(_))
        ));
    }

    #[test]
    fn renorm_encode_worked_example() {
        // quant_bits = 11 and f(next) = 1: threshold is 2^21, so 2^22 emits
        // exactly one word (its low half, zero) and drains to 2^6.
        let mut h = Histogram::new(8).unwrap();
        for _ in 0..2047 {
            h.record(0).unwrap();
        }
        h.record(1).unwrap();
        let m = quantize(&h, 11).unwrap();
        assert_eq!(m.freq(1), 1);

        let mut sink = Vec::new();
        let (x, emitted) = renorm_encode(1 << 22, &m, 1, &mut sink).unwrap();
        assert_eq!((x, emitted), (64, 1));
        assert_eq!(sink, vec![0x0000]);

        // Already below the threshold: nothing happens.
        let (x, emitted) = renorm_encode(64, &m, 1, &mut sink).unwrap();
        assert_eq!((x, emitted), (64, 0));
        assert_eq!(sink.len(), 1);
    }

    #[test]
    fn renorm_decode_worked_examples() {
        let words = [0x0000u16];
        let mut cur = StreamCursor::new(&words, 1);
        assert_eq!(renorm_decode(64, &mut cur).unwrap(), 64 << 16);
        assert_eq!(cur.remaining(), 0);

        let words = [0xFFFFu16];
        let mut cur = StreamCursor::new(&words, 1);
        assert_eq!(renorm_decode(1, &mut cur).unwrap(), 0x0001_FFFF);

        // Normalized states never read.
        let mut cur = StreamCursor::new(&[], 0);
        assert_eq!(renorm_decode(LOWER_BOUND, &mut cur).unwrap(), LOWER_BOUND);
    }

    #[test]
    fn renorm_decode_underflow() {
        let mut cur = StreamCursor::new(&[], 0);
        assert!(matches!(
            renorm_decode(1, &mut cur),
            Err(Error::BitstreamUnderflow)
        ));
    }

    /// Single-`if` renormalization used as the cross-check for the loop form.
    fn renorm_encode_once(
        x: u32,
        model: &QuantizedModel,
        next: u16,
        sink: &mut Vec<u16>,
    ) -> (u32, u32) {
        let threshold = renorm_threshold(model.freq(next), model.quant_bits());
        if x as u64 >= threshold {
            sink.push((x & 0xFFFF) as u16);
            (x >> WORD_BITS, 1)
        } else {
            (x, 0)
        }
    }

    fn arb_model() -> impl Strategy<Value = QuantizedModel> {
        (1u8..=16, 1usize..=16).prop_map(|(n, k)| {
            let k = k.min(1usize << n);
            let mut h = Histogram::new(8).unwrap();
            for s in 0..k {
                for _ in 0..(1 + (s * 37) % 11) {
                    h.record(s as u16).unwrap();
                }
            }
            quantize(&h, n).unwrap()
        })
    }

    proptest! {
        #[test]
        fn step_pair_inverts(
            m in arb_model(),
            x in LOWER_BOUND..u32::MAX,
            pick in 0u32..u32::MAX,
        ) {
            let present: Vec<u16> = m.present().map(|(s, _)| s).collect();
            let sym = present[(pick as usize) % present.len()];
            // Drain only as far as a real encoder would before this symbol.
            let mut sink = Vec::new();
            let (drained, _) = renorm_encode(x, &m, sym, &mut sink).unwrap();
            let encoded = encode_step(drained, &m, sym).unwrap();
            prop_assert!(encoded >= LOWER_BOUND);
            let (sym2, back) = decode_step(encoded, &m);
            prop_assert_eq!(sym2, sym);
            prop_assert_eq!(back, drained);
        }

        #[test]
        fn renorm_pair_inverts(
            m in arb_model(),
            x in LOWER_BOUND..u32::MAX,
            pick in 0u32..u32::MAX,
        ) {
            let present: Vec<u16> = m.present().map(|(s, _)| s).collect();
            let sym = present[(pick as usize) % present.len()];
            let mut sink = Vec::new();
            let (drained, emitted) = renorm_encode(x, &m, sym, &mut sink).unwrap();
            prop_assert!(emitted <= 1);
            prop_assert_eq!(sink.len(), emitted as usize);
            if emitted == 1 {
                // The emission lemma: a single emitted word leaves the state
                // in 16-bit range.
                prop_assert!(drained < LOWER_BOUND);
            }
            let mut cur = StreamCursor::new(&sink, sink.len());
            let refilled = renorm_decode(drained, &mut cur).unwrap();
            prop_assert_eq!(refilled, x);
            prop_assert_eq!(cur.remaining(), 0);
        }

        #[test]
        fn loop_form_matches_single_step_form(
            m in arb_model(),
            x in 0u32..u32::MAX,
            pick in 0u32..u32::MAX,
        ) {
            let present: Vec<u16> = m.present().map(|(s, _)| s).collect();
            let sym = present[(pick as usize) % present.len()];
            let mut a = Vec::new();
            let mut b = Vec::new();
            let loop_out = renorm_encode(x, &m, sym, &mut a).unwrap();
            let once_out = renorm_encode_once(x, &m, sym, &mut b);
            prop_assert_eq!(loop_out, once_out);
            prop_assert_eq!(a, b);
        }
    }
}
