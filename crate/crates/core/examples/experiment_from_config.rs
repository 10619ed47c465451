//! The config-driven harness end to end: run, check the bound, compare.
//!
//! ```text
//! cargo run --example experiment_from_config -- [CONFIG] [OUT_DIR]
//! ```

use std::path::{Path, PathBuf};

use xrda::harness::{
    check_bound, compare, default_presets, parse_config_in, run_experiment, HarnessError, DEFAULT_SLACK,
};

fn main() -> Result<(), HarnessError> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/lad_l1.toml"));
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("xrda-example"));
    let text = std::fs::read_to_string(&config).map_err(|e| HarnessError::Io {
        path: config.clone(),
        message: e.to_string(),
    })?;
    let cfg = parse_config_in(&text, config.parent().unwrap_or(Path::new(".")), false)?;

    let traces = run_experiment(&cfg, &out)?;
    for t in &traces {
        println!("wrote {}", t.display());
    }
    let report = check_bound(&traces, true, DEFAULT_SLACK)?;
    let failed = report.lines.iter().filter(|l| l.starts_with("FAIL")).count();
    println!("bound check: {} rows, {failed} failing", report.lines.len());
    print!("{}", compare(&cfg, &default_presets(&cfg), &out)?.to_table());
    Ok(())
}
