//! The command-line runner driven in-process: forward solve to files, then
//! reconstruction from those files, into a temporary directory.
//!
//! cargo run --release --example cli_pipeline

use conformal_cavity::cli::run_from;

fn main() {
    let dir = std::env::temp_dir().join("cavity_cli_pipeline");
    let out = dir.to_string_lossy().into_owned();
    let forward = run_from(["cavity", "forward", "--order", "8", "--center=-0.5,0", "--out", &out]);
    let reconstruct = run_from(["cavity", "reconstruct", "--measurement", &out, "--out", &out]);
    println!("exit codes: forward {forward}, reconstruct {reconstruct}");
    println!("files in {out}:");
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .map(|d| d.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    names.sort();
    for n in names {
        println!("  {n}");
    }
}
