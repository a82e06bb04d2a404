//! Interleaved rANS coding with decoder-chosen parallelism.
//!
//! The encoder produces one sequential stream driven by `W` interleaved lane
//! states, exactly as a serial coder would, and additionally remembers where
//! each lane's states were flushed. From that record the splitter derives
//! split points: positions where a decoder can be seeded mid-stream with a
//! handful of per-lane states and resynchronize within a few symbol groups.
//! Split points live next to the stream, not inside it, so the same encoded
//! bytes can ship with many, few, or no splits, and a container can be
//! re-targeted to a different task count without touching the stream.
//!
//! The crate has three layers:
//!
//! * the coding core: [`model`], [`rans`], [`interleaved`];
//! * split machinery and storage: [`splitter`], [`series`], [`container`],
//!   [`parallel`];
//! * a fixed-partition baseline codec for comparison: [`conventional`].
//!
//! ```
//! let data = recoil::datasets::exponential_bytes(1, 20_000, 100);
//! let symbols = recoil::symbols_from_bytes(&data);
//! let c = recoil::encode_to_container(&symbols, 8, 11, 32, 8).unwrap();
//! let decoded = recoil::decode_container(&c, 4).unwrap();
//! assert_eq!(recoil::bytes_from_symbols(&decoded).unwrap(), data);
//! ```

pub mod container;
pub mod conventional;
pub mod datasets;
pub mod error;
pub mod interleaved;
pub mod model;
pub mod parallel;
pub mod rans;
pub mod series;
pub mod splitter;

pub use container::{combine_container, encode_to_container, read_container, Container,
    SectionSizes};
pub use conventional::{
    decode_conventional, encode_conventional, read_conventional, Conventional,
};
pub use error::{Error, Result};
pub use model::{quantize, Histogram, QuantizedModel};
pub use parallel::{decode_container, plan_tasks, TaskPlan};
pub use splitter::{SplitPoint, SplitTable};

/// Widen bytes to the symbol domain.
pub fn symbols_from_bytes(bytes: &[u8]) -> Vec<u16> {
    bytes.iter().map(|&b| b as u16).collect()
}

/// Narrow symbols back to bytes; fails if any symbol needs more than 8 bits.
pub fn bytes_from_symbols(symbols: &[u16]) -> Result<Vec<u8>> {
    symbols
        .iter()
        .map(|&s| {
            u8::try_from(s).map_err(|_| Error::InvalidParameter("symbol does not fit in a byte"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_adapters_roundtrip() {
        let bytes = vec![0u8, 1, 127, 255];
        let symbols = symbols_from_bytes(&bytes);
        assert_eq!(symbols, vec![0u16, 1, 127, 255]);
        assert_eq!(bytes_from_symbols(&symbols).unwrap(), bytes);
        assert!(bytes_from_symbols(&[256]).is_err());
    }
}
