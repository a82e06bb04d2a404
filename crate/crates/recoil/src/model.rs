//! Symbol statistics and the quantized frequency model.
//!
//! The model assigns every present symbol an integer frequency `f(t) >= 1`
//! such that the frequencies sum to exactly `2^quant_bits`. Encoder and
//! decoder share the same model; the cumulative table `F(t)` and the
//! slot-to-symbol lookup are derived from it.

use crate::error::{Error, Result};

/// Highest supported quantization level; slot indices fit in 16 bits.
pub const MAX_QUANT_BITS: u8 = 16;

/// Occurrence counts over a dense symbol domain of width 8 or 16 bits.
#[derive(Debug, Clone)]
pub struct Histogram {
    counts: Vec<u64>,
    symbol_width: u8,
}

impl Histogram {
    pub fn new(symbol_width: u8) -> Result<Self> {
        if symbol_width != 8 && symbol_width != 16 {
            return Err(Error::InvalidParameter("symbol width must be 8 or 16"));
        }
        Ok(Histogram {
            counts: vec![0; 1usize << symbol_width],
            symbol_width,
        })
    }

    pub fn from_symbols(symbols: &[u16], symbol_width: u8) -> Result<Self> {
        let mut hist = Histogram::new(symbol_width)?;
        for &s in symbols {
            hist.record(s)?;
        }
        Ok(hist)
    }

    pub fn record(&mut self, symbol: u16) -> Result<()> {
        let idx = symbol as usize;
        if idx >= self.counts.len() {
            return Err(Error::InvalidParameter("symbol exceeds the declared width"));
        }
        self.counts[idx] += 1;
        Ok(())
    }

    pub fn count(&self, symbol: u16) -> u64 {
        self.counts.get(symbol as usize).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn symbol_width(&self) -> u8 {
        self.symbol_width
    }
}

/// Frequencies quantized to a power-of-two total, plus the derived decode
/// tables.
#[derive(Debug, Clone)]
pub struct QuantizedModel {
    symbol_width: u8,
    quant_bits: u8,
    /// `f(t)` over the dense symbol domain; zero for absent symbols.
    freqs: Vec<u32>,
    /// `F(t)`: sum of `f(u)` for `u < t`.
    cdf: Vec<u32>,
    /// Slot-to-symbol table with `2^quant_bits` entries; empty when the
    /// alphabet is empty.
    slots: Vec<u16>,
}

impl QuantizedModel {
    /// Model with no symbols at all. Only a zero-length sequence can be
    /// encoded against it.
    pub fn empty(symbol_width: u8, quant_bits: u8) -> Result<Self> {
        check_params(symbol_width, quant_bits)?;
        let domain = 1usize << symbol_width;
        Ok(QuantizedModel {
            symbol_width,
            quant_bits,
            freqs: vec![0; domain],
            cdf: vec![0; domain],
            slots: Vec::new(),
        })
    }

    /// Rebuild a model from already-quantized frequencies (the container
    /// decode path). Frequencies must be positive for listed symbols and sum
    /// to `2^quant_bits`.
    pub fn from_freqs(pairs: &[(u16, u32)], symbol_width: u8, quant_bits: u8) -> Result<Self> {
        check_params(symbol_width, quant_bits)?;
        if pairs.is_empty() {
            return QuantizedModel::empty(symbol_width, quant_bits);
        }
        let domain = 1usize << symbol_width;
        let target = 1u64 << quant_bits;
        let mut freqs = vec![0u32; domain];
        let mut total = 0u64;
        let mut prev: Option<u16> = None;
        for &(sym, f) in pairs {
            if (sym as usize) >= domain {
                return Err(Error::InconsistentMetadata("model symbol exceeds width"));
            }
            if prev.is_some_and(|p| p >= sym) {
                return Err(Error::InconsistentMetadata("model symbols not ascending"));
            }
            if f == 0 {
                return Err(Error::InconsistentMetadata("model lists a zero frequency"));
            }
            prev = Some(sym);
            freqs[sym as usize] = f;
            total += f as u64;
        }
        if total != target {
            return Err(Error::InconsistentMetadata("model frequencies do not sum to 2^n"));
        }
        Ok(QuantizedModel::from_dense(freqs, symbol_width, quant_bits))
    }

    fn from_dense(freqs: Vec<u32>, symbol_width: u8, quant_bits: u8) -> Self {
        let mut cdf = vec![0u32; freqs.len()];
        let mut acc = 0u32;
        for (t, &f) in freqs.iter().enumerate() {
            cdf[t] = acc;
            acc += f;
        }
        let mut slots = vec![0u16; 1usize << quant_bits];
        for (t, &f) in freqs.iter().enumerate() {
            let base = cdf[t] as usize;
            for slot in slots.iter_mut().skip(base).take(f as usize) {
                *slot = t as u16;
            }
        }
        QuantizedModel {
            symbol_width,
            quant_bits,
            freqs,
            cdf,
            slots,
        }
    }

    pub fn symbol_width(&self) -> u8 {
        self.symbol_width
    }

    pub fn quant_bits(&self) -> u8 {
        self.quant_bits
    }

    pub fn freq(&self, symbol: u16) -> u32 {
        self.freqs[symbol as usize]
    }

    pub fn cum(&self, symbol: u16) -> u32 {
        self.cdf[symbol as usize]
    }

    /// Symbol owning a slot: the unique `t` with `F(t) <= slot < F(t) + f(t)`.
    pub fn lookup_symbol(&self, slot: u32) -> u16 {
        self.slots[slot as usize]
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Present symbols with their frequencies, ascending by symbol value.
    pub fn present(&self) -> impl Iterator<Item = (u16, u32)> + '_ {
        self.freqs
            .iter()
            .enumerate()
            .filter(|(_, &f)| f > 0)
            .map(|(t, &f)| (t as u16, f))
    }
}

fn check_params(symbol_width: u8, quant_bits: u8) -> Result<()> {
    if symbol_width != 8 && symbol_width != 16 {
        return Err(Error::InvalidParameter("symbol width must be 8 or 16"));
    }
    if quant_bits == 0 || quant_bits > MAX_QUANT_BITS {
        return Err(Error::InvalidParameter("quantization level must be 1..=16"));
    }
    Ok(())
}

/// Quantize a histogram to frequencies summing to `2^quant_bits`.
///
/// Shares are assigned proportionally and rounded by largest remainder; a
/// present symbol is never pushed below frequency 1. The result depends only
/// on the histogram, so re-quantizing a model's own frequencies reproduces
/// the model.
pub fn quantize(hist: &Histogram, quant_bits: u8) -> Result<QuantizedModel> {
    check_params(hist.symbol_width(), quant_bits)?;
    let total = hist.total();
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    let target = 1u64 << quant_bits;

    let present: Vec<(u16, u64)> = hist
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(t, &c)| (t as u16, c))
        .collect();
    if present.len() as u64 > target {
        return Err(Error::AlphabetTooLarge {
            present: present.len(),
            slots: target as u32,
        });
    }

    // Exact share of symbol t is count*target/total; keep the numerator to
    // compare fractional remainders without floating point.
    let mut f: Vec<u64> = Vec::with_capacity(present.len());
    let mut num: Vec<u128> = Vec::with_capacity(present.len());
    for &(_, c) in &present {
        let n = c as u128 * target as u128;
        num.push(n);
        f.push(((n / total as u128) as u64).max(1));
    }

    let mut sum: u64 = f.iter().sum();
    if sum < target {
        // Grant the deficit to the most under-allocated symbols. Measuring
        // against the current assignment (not the raw remainder) matters:
        // a rare symbol lifted to the minimum already holds more than its
        // exact share and must not outrank a frequent one. The deficit is
        // always smaller than the alphabet, so one pass suffices.
        let mut order: Vec<usize> = (0..present.len()).collect();
        order.sort_by(|&a, &b| {
            let under_a = num[a] as i128 - (f[a] as u128 * total as u128) as i128;
            let under_b = num[b] as i128 - (f[b] as u128 * total as u128) as i128;
            under_b
                .cmp(&under_a)
                .then(present[b].1.cmp(&present[a].1))
                .then(present[a].0.cmp(&present[b].0))
        });
        let deficit = (target - sum) as usize;
        assert!(deficit <= order.len());
        for &i in order.iter().take(deficit) {
            f[i] += 1;
        }
        sum = target;
    }
    while sum > target {
        // Minimum-frequency lifts can overshoot; take back from the most
        // over-allocated symbols, never dropping any below 1.
        let mut order: Vec<usize> = (0..present.len()).filter(|&i| f[i] > 1).collect();
        assert!(!order.is_empty());
        order.sort_by(|&a, &b| {
            let over_a = f[a] as i128 * total as i128 - num[a] as i128;
            let over_b = f[b] as i128 * total as i128 - num[b] as i128;
            over_b
                .cmp(&over_a)
                .then(f[b].cmp(&f[a]))
                .then(present[a].0.cmp(&present[b].0))
        });
        for &i in &order {
            if sum == target {
                break;
            }
            if f[i] > 1 {
                f[i] -= 1;
                sum -= 1;
            }
        }
    }

    let domain = 1usize << hist.symbol_width();
    let mut dense = vec![0u32; domain];
    for (i, &(sym, _)) in present.iter().enumerate() {
        dense[sym as usize] = f[i] as u32;
    }
    Ok(QuantizedModel::from_dense(dense, hist.symbol_width(), quant_bits))
}
