// SPDX-License-Identifier: Apache-2.0

//! Drives the command-line layer from code: a sweep over f for one variant
//! and attack, rendered as the same CSV the binary prints.
//!
//! cargo run --release --example sweep_report -- librabft delay

use clap::Parser;
use hotstuff_perf::cli::{parse_config, run_command, Cli};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let variant = args.next().unwrap_or_else(|| "hotstuff".into());
    let attack = args.next().unwrap_or_else(|| "forking".into());
    let cli = Cli::try_parse_from([
        "hotstuff-perf",
        "sweep",
        "--n",
        "16",
        "--variant",
        &variant,
        "--attack",
        &attack,
        "--rounds",
        "50000",
        "--runs",
        "5",
    ])?;
    let out = run_command(&parse_config(cli)?)?;
    for w in &out.warnings {
        eprintln!("note: {w}");
    }
    print!("{}", out.text);
    Ok(())
}
