//! Runs every stage on a job config and prints the stage table.
//!
//! Usage: `cargo run --example full_pipeline -- [config.json] [out_dir]`

use std::path::PathBuf;

use special_generic::pipeline::{run_full, Job, Overrides};

fn main() -> special_generic::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/annulus.json")));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sgm-full"));
    let over = Overrides {
        out: Some(out.clone()),
        ..Overrides::default()
    };
    let job = Job::load(&config, &over)?;
    let report = run_full(&job, &[], true, false)?;
    for s in &report.stages {
        println!("{:>13}  {:?}  {}", s.stage, s.status, s.message.as_deref().unwrap_or(""));
    }
    println!("verdict: {:?}", report.verdict);
    println!("artifacts in {}", out.display());
    Ok(())
}
