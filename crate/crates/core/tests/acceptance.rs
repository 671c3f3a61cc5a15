//! One line per acceptance criterion; exits nonzero if any fails.
//!
//! `cargo test -p amzv --test acceptance -- 4 9` runs a subset.

use std::process::ExitCode;

use amzv::acceptance::{run_one, Config};

fn main() -> ExitCode {
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u32> = if picked.is_empty() { (1..=13).collect() } else { picked };
    let cfg = Config::default();
    let mut failed = 0;
    for id in ids {
        let o = run_one(id, &cfg);
        println!("{}", o.line());
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        println!("all criteria passed");
        ExitCode::SUCCESS
    }
}
