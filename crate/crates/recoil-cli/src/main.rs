//! Command line front end for the recoil codec.
//!
//! Subcommands: `encode`, `decode`, `combine`, `inspect`, `bench`. Containers
//! are detected by magic, so `decode` and `inspect` accept both the
//! split-decodable format and the partitioned baseline.

mod bench;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use recoil::{
    combine_container, decode_container, decode_conventional, encode_conventional,
    encode_to_container, plan_tasks, read_container, read_conventional, symbols_from_bytes,
};

#[derive(Parser)]
#[command(name = "recoil", version, about = "Split-decodable rANS compressor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into a container.
    Encode(EncodeArgs),
    /// Decompress a container back to the original bytes.
    Decode(DecodeArgs),
    /// Reduce the number of entry points in a split container.
    Combine(CombineArgs),
    /// Describe a container without decoding it.
    Inspect(InspectArgs),
    /// Measure sizes and decode speed on synthetic datasets.
    Bench(bench::BenchArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Single stream with resynchronization metadata.
    Recoil,
    /// Independently encoded partitions.
    Conventional,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Recoil => "recoil",
            Mode::Conventional => "conventional",
        })
    }
}

#[derive(Args)]
struct EncodeArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Recoil)]
    mode: Mode,
    /// Interleaved states sharing the stream.
    #[arg(long, default_value_t = 32)]
    lanes: u16,
    /// Frequency table precision in bits.
    #[arg(long, default_value_t = 11)]
    quant_bits: u8,
    /// Decode tasks to provision (split points plus one, or partitions).
    #[arg(long, default_value_t = 1)]
    splits: u64,
    /// Treat the input as a sequence of 8-bit or 16-bit values.
    #[arg(long, default_value_t = 8)]
    symbol_width: u8,
}

#[derive(Args)]
struct DecodeArgs {
    input: PathBuf,
    output: PathBuf,
    /// Worker threads; defaults to the visible core count.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CombineArgs {
    input: PathBuf,
    output: PathBuf,
    /// Keep at most this many decode tasks.
    #[arg(long)]
    splits: u64,
}

#[derive(Args)]
struct InspectArgs {
    input: PathBuf,
}

pub enum CliError {
    Io(PathBuf, std::io::Error),
    Codec(recoil::Error),
    Usage(&'static str),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(..) => 1,
            CliError::Codec(e) => e.exit_code() as u8,
            CliError::Usage(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Codec(e) => e.fmt(f),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<recoil::Error> for CliError {
    fn from(e: recoil::Error) -> Self {
        CliError::Codec(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Io(path.to_owned(), e))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::Io(path.to_owned(), e))
}

/// Turn raw file bytes into the symbol width the model expects.
pub fn file_to_symbols(bytes: &[u8], symbol_width: u8) -> CliResult<Vec<u16>> {
    match symbol_width {
        8 => Ok(symbols_from_bytes(bytes)),
        16 => {
            if bytes.len() % 2 != 0 {
                return Err(CliError::Usage(
                    "16-bit symbols need an even number of input bytes",
                ));
            }
            Ok(bytes
                .chunks_exact(2)
                .map(|p| u16::from_le_bytes([p[0], p[1]]))
                .collect())
        }
        _ => Err(CliError::Usage("symbol width must be 8 or 16")),
    }
}

fn symbols_to_file(symbols: &[u16], symbol_width: u8) -> CliResult<Vec<u8>> {
    match symbol_width {
        8 => Ok(recoil::bytes_from_symbols(symbols)?),
        16 => Ok(symbols.iter().flat_map(|s| s.to_le_bytes()).collect()),
        _ => Err(CliError::Usage("symbol width must be 8 or 16")),
    }
}

fn threads_or_cores(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
    })
}

fn cmd_encode(args: &EncodeArgs) -> CliResult<()> {
    let raw = read_file(&args.input)?;
    let symbols = file_to_symbols(&raw, args.symbol_width)?;
    let t0 = Instant::now();
    let bytes = match args.mode {
        Mode::Recoil => {
            let c = encode_to_container(
                &symbols,
                args.symbol_width,
                args.quant_bits,
                args.lanes,
                args.splits,
            )?;
            let (bytes, sizes) = c.to_bytes()?;
            println!(
                "sections: header {} B, model {} B, final states {} B, split metadata {} B, stream {} B",
                sizes.header,
                sizes.model,
                sizes.final_states,
                sizes.split_metadata(),
                sizes.stream
            );
            if c.tasks() < args.splits {
                println!(
                    "note: event density supported only {} of {} requested tasks",
                    c.tasks(),
                    args.splits
                );
            }
            bytes
        }
        Mode::Conventional => {
            let splits = u32::try_from(args.splits)
                .map_err(|_| CliError::Usage("partition count does not fit in 32 bits"))?;
            let c = encode_conventional(
                &symbols,
                args.symbol_width,
                args.quant_bits,
                args.lanes,
                splits,
            )?;
            let (bytes, sizes) = c.to_bytes()?;
            println!(
                "sections: header {} B, offsets {} B, final states {} B, model {} B, stream {} B",
                sizes.header, sizes.offsets, sizes.final_states, sizes.model, sizes.stream
            );
            bytes
        }
    };
    let dt = t0.elapsed();
    write_file(&args.output, &bytes)?;
    println!(
        "encoded {} B -> {} B in {:.2} s",
        raw.len(),
        bytes.len(),
        dt.as_secs_f64()
    );
    Ok(())
}

fn cmd_decode(args: &DecodeArgs) -> CliResult<()> {
    let bytes = read_file(&args.input)?;
    let threads = threads_or_cores(args.threads);
    let t0;
    let (symbols, width);
    if bytes.len() >= 4 && &bytes[..4] == b"RCV1" {
        let c = read_conventional(&bytes)?;
        t0 = Instant::now();
        symbols = decode_conventional(&c, threads)?;
        width = c.symbol_width;
    } else {
        // Unknown magic falls through here and fails with a format error.
        let c = read_container(&bytes)?;
        t0 = Instant::now();
        symbols = decode_container(&c, threads)?;
        width = c.symbol_width;
    }
    let dt = t0.elapsed().as_secs_f64();
    let raw = symbols_to_file(&symbols, width)?;
    write_file(&args.output, &raw)?;
    println!(
        "decoded {} B with {} thread(s) at {:.1} MB/s",
        raw.len(),
        threads,
        raw.len() as f64 / dt.max(1e-9) / 1e6
    );
    Ok(())
}

fn cmd_combine(args: &CombineArgs) -> CliResult<()> {
    let bytes = read_file(&args.input)?;
    if bytes.len() >= 4 && &bytes[..4] == b"RCV1" {
        return Err(CliError::Usage(
            "partitioned containers have no split table to combine",
        ));
    }
    let c = read_container(&bytes)?;
    let t0 = Instant::now();
    let thin = combine_container(&c, args.splits)?;
    let out = thin.to_bytes()?.0;
    let dt = t0.elapsed();
    write_file(&args.output, &out)?;
    println!(
        "tasks {} -> {}, {} B saved in {:.2} ms",
        c.tasks(),
        thin.tasks(),
        bytes.len().saturating_sub(out.len()),
        dt.as_secs_f64() * 1e3
    );
    Ok(())
}

/// Bucket counts by power-of-two ranges for a compact histogram.
fn log_histogram(values: impl Iterator<Item = u64>) -> Vec<(u64, u64, u64)> {
    let mut buckets: Vec<(u64, u64, u64)> = Vec::new();
    for v in values {
        let (lo, hi) = if v == 0 {
            (0, 0)
        } else {
            let b = 63 - v.leading_zeros() as u64;
            (1 << b, (1 << (b + 1)) - 1)
        };
        match buckets.iter_mut().find(|(l, _, _)| *l == lo) {
            Some(entry) => entry.2 += 1,
            None => buckets.push((lo, hi, 1)),
        }
    }
    buckets.sort_unstable();
    buckets
}

fn cmd_inspect(args: &InspectArgs) -> CliResult<()> {
    let bytes = read_file(&args.input)?;
    if bytes.len() >= 4 && &bytes[..4] == b"RCV1" {
        let c = read_conventional(&bytes)?;
        let sizes = c.to_bytes()?.1;
        println!("partitioned container (RCV1), {} B", bytes.len());
        println!(
            "  symbol width {} bits, quant bits {}, lanes {}, partitions {}, symbols {}",
            c.symbol_width,
            c.quant_bits,
            c.lanes,
            c.partitions(),
            c.n_symbols
        );
        println!(
            "  sections: header {} B, offsets {} B, final states {} B, model {} B, stream {} B",
            sizes.header, sizes.offsets, sizes.final_states, sizes.model, sizes.stream
        );
        println!(
            "  fixed metadata per partition: {} B",
            sizes.per_partition_fixed()
        );
        return Ok(());
    }

    let c = read_container(&bytes)?;
    let sizes = c.section_sizes()?;
    println!("split-decodable container (RCL1), {} B", bytes.len());
    println!(
        "  symbol width {} bits, quant bits {}, lanes {}, tasks {}, symbols {}, stream words {}",
        c.symbol_width,
        c.quant_bits,
        c.lanes,
        c.tasks(),
        c.n_symbols,
        c.words.len()
    );
    println!(
        "  sections: header {} B, model {} B, final states {} B, global {} B, split records {} B, stream {} B",
        sizes.header, sizes.model, sizes.final_states, sizes.global, sizes.records, sizes.stream
    );

    let plans = plan_tasks(&c)?;
    let lens: Vec<u64> = plans.iter().map(|p| p.commit_len() as u64).collect();
    if let (Some(&min), Some(&max)) = (lens.iter().min(), lens.iter().max()) {
        let avg = lens.iter().sum::<u64>() as f64 / lens.len() as f64;
        println!(
            "  committed ranges over {} task(s): min {min}, avg {avg:.1}, max {max}",
            lens.len()
        );
    }
    if c.table.points.is_empty() {
        println!("  no split points");
    } else {
        println!("  sync-section lengths (symbols re-decoded before each entry):");
        let spans = c
            .table
            .points
            .iter()
            .map(|p| p.boundary_index - p.sync_start + 1);
        for (lo, hi, n) in log_histogram(spans) {
            if lo == hi {
                println!("    {lo:>8}        : {n}");
            } else {
                println!("    {lo:>8}..{hi:<8}: {n}");
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Combine(args) => cmd_combine(args),
        Command::Inspect(args) => cmd_inspect(args),
        Command::Bench(args) => bench::run(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
