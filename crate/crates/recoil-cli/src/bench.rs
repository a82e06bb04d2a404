//! The `bench` subcommand: deterministic synthetic datasets, an
//! overhead-versus-entry-points sweep for both container formats, and a
//! decode throughput sweep over worker counts. Results go to stdout as text
//! and to a CSV file for plotting.

use std::hint::black_box;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use recoil::container::Container;
use recoil::datasets::{empirical_entropy, exponential_bytes};
use recoil::interleaved;
use recoil::splitter::choose_splits;
use recoil::{
    decode_container, decode_conventional, encode_conventional, quantize, symbols_from_bytes,
    Histogram,
};

use crate::{write_file, CliError, CliResult, Mode};

#[derive(Args)]
pub struct BenchArgs {
    /// Raw bytes per synthetic dataset.
    #[arg(long, default_value_t = 10_000_000)]
    size: usize,
    /// Timed decode repetitions per configuration; throughput is the mean.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Comma separated task counts to sweep.
    #[arg(long, default_value = "1,4,16,64,256,1024,2176")]
    splits: String,
    /// Comma separated worker counts; defaults to 1 through the core count.
    #[arg(long)]
    threads: Option<String>,
    #[arg(long, default_value_t = 32)]
    lanes: u16,
    #[arg(long, default_value_t = 11)]
    quant_bits: u8,
    /// Where to write the measurement table.
    #[arg(long, default_value = "recoil-bench.csv")]
    csv: PathBuf,
}

fn parse_list(text: &str, what: &'static str) -> CliResult<Vec<u64>> {
    text.split(',')
        .map(|part| part.trim().parse().map_err(|_| CliError::Usage(what)))
        .collect()
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    if args.size == 0 {
        return Err(CliError::Usage("--size must be at least 1"));
    }
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1"));
    }
    let splits = parse_list(&args.splits, "--splits expects comma separated integers")?;
    let threads: Vec<usize> = match &args.threads {
        Some(t) => parse_list(t, "--threads expects comma separated integers")?
            .into_iter()
            .map(|v| v as usize)
            .collect(),
        None => {
            let cores = std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1);
            (1..=cores).collect()
        }
    };
    if threads.iter().any(|&t| t == 0) {
        return Err(CliError::Usage("worker counts must be at least 1"));
    }

    let mut csv = String::from(
        "dataset,mode,W,n,splits,threads,encoded_bytes,overhead_bytes,overhead_pct,throughput_Bps\n",
    );

    for (name, lambda) in [
        ("exp10", 10u32),
        ("exp50", 50),
        ("exp100", 100),
        ("exp200", 200),
        ("exp500", 500),
    ] {
        let data = exponential_bytes(4242 + lambda as u64, args.size, lambda);
        let symbols = symbols_from_bytes(&data);
        println!(
            "# {name}: {} B raw, {:.2} bits/byte empirical entropy",
            data.len(),
            empirical_entropy(&data)
        );

        bench_recoil(args, &splits, &threads, name, &symbols, &mut csv)?;
        bench_conventional(args, &splits, &threads, name, &symbols, &mut csv)?;
    }

    write_file(&args.csv, csv.as_bytes())?;
    println!("wrote {}", args.csv.display());
    Ok(())
}

fn mean_secs(runs: usize, mut f: impl FnMut() -> CliResult<()>) -> CliResult<f64> {
    let mut total = 0.0;
    for _ in 0..runs {
        let t0 = Instant::now();
        f()?;
        total += t0.elapsed().as_secs_f64();
    }
    Ok(total / runs as f64)
}

fn bench_recoil(
    args: &BenchArgs,
    splits: &[u64],
    threads: &[usize],
    name: &str,
    symbols: &[u16],
    csv: &mut String,
) -> CliResult<()> {
    let t0 = Instant::now();
    let model = quantize(&Histogram::from_symbols(symbols, 8)?, args.quant_bits)?;
    let enc = interleaved::encode(symbols, &model, args.lanes)?;
    println!(
        "  recoil: model+encode {:.2} s, {} stream words, {} renorm events",
        t0.elapsed().as_secs_f64(),
        enc.words.len(),
        enc.log.len()
    );

    let build = |tasks: u64| -> CliResult<(Container, usize, f64)> {
        let t0 = Instant::now();
        let table = choose_splits(&enc.log, symbols.len() as u64, args.lanes, tasks)?;
        let c = Container {
            symbol_width: 8,
            quant_bits: args.quant_bits,
            lanes: args.lanes,
            n_symbols: symbols.len() as u64,
            model: model.clone(),
            final_states: enc.final_states.clone(),
            table,
            words: enc.words.clone(),
        };
        let len = c.to_bytes()?.0.len();
        Ok((c, len, t0.elapsed().as_secs_f64()))
    };

    let baseline = build(1)?.1;
    for &m in splits {
        let (c, encoded, prep) = build(m)?;
        println!(
            "    splits {m}: {encoded} B ({:+} B, {:+.3}%), prepared in {:.1} ms",
            encoded as i64 - baseline as i64,
            (encoded as i64 - baseline as i64) as f64 / baseline as f64 * 100.0,
            prep * 1e3
        );
        if c.tasks() < m {
            println!("      note: only {} tasks fit the event log", c.tasks());
        }
        for &t in threads {
            let secs = mean_secs(args.runs, || {
                black_box(decode_container(&c, t)?);
                Ok(())
            })?;
            let throughput = symbols.len() as f64 / secs;
            println!("      threads {t}: {:.1} MB/s", throughput / 1e6);
            Row {
                dataset: name,
                mode: Mode::Recoil,
                lanes: args.lanes,
                quant_bits: args.quant_bits,
                splits: m,
                threads: t,
                encoded,
                baseline,
            }
            .push(csv, throughput);
        }
    }
    Ok(())
}

fn bench_conventional(
    args: &BenchArgs,
    splits: &[u64],
    threads: &[usize],
    name: &str,
    symbols: &[u16],
    csv: &mut String,
) -> CliResult<()> {
    let encode = |p: u64| -> CliResult<(recoil::Conventional, usize, f64)> {
        let p = u32::try_from(p)
            .map_err(|_| CliError::Usage("partition count does not fit in 32 bits"))?;
        let t0 = Instant::now();
        let c = encode_conventional(symbols, 8, args.quant_bits, args.lanes, p)?;
        let len = c.to_bytes()?.0.len();
        Ok((c, len, t0.elapsed().as_secs_f64()))
    };

    let baseline = encode(1)?.1;
    println!("  conventional: baseline {baseline} B at 1 partition");
    let mut sizes: Vec<(u64, usize)> = Vec::new();
    for &m in splits {
        let (c, encoded, enc_dt) = encode(m)?;
        sizes.push((m, encoded));
        println!(
            "    partitions {m}: {encoded} B ({:+} B, {:+.3}%), encoded in {:.2} s",
            encoded as i64 - baseline as i64,
            (encoded as i64 - baseline as i64) as f64 / baseline as f64 * 100.0,
            enc_dt
        );
        for &t in threads {
            let secs = mean_secs(args.runs, || {
                black_box(decode_conventional(&c, t)?);
                Ok(())
            })?;
            let throughput = symbols.len() as f64 / secs;
            println!("      threads {t}: {:.1} MB/s", throughput / 1e6);
            Row {
                dataset: name,
                mode: Mode::Conventional,
                lanes: args.lanes,
                quant_bits: args.quant_bits,
                splits: m,
                threads: t,
                encoded,
                baseline,
            }
            .push(csv, throughput);
        }
    }
    sizes.sort_unstable();
    let monotone = sizes.windows(2).all(|w| w[0].1 <= w[1].1);
    println!(
        "  conventional size monotone in partitions: {}",
        if monotone { "yes" } else { "NO" }
    );
    Ok(())
}

struct Row<'a> {
    dataset: &'a str,
    mode: Mode,
    lanes: u16,
    quant_bits: u8,
    splits: u64,
    threads: usize,
    encoded: usize,
    baseline: usize,
}

impl Row<'_> {
    fn push(&self, csv: &mut String, throughput: f64) {
        let overhead = self.encoded as i64 - self.baseline as i64;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.4},{:.0}\n",
            self.dataset,
            self.mode,
            self.lanes,
            self.quant_bits,
            self.splits,
            self.threads,
            self.encoded,
            overhead,
            overhead as f64 / self.baseline as f64 * 100.0,
            throughput
        ));
    }
}
