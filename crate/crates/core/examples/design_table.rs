//! Enumerates every real design for n = 1..=N (default 6) and prints the
//! `n^2 c_i / c` table with condition numbers.

use marx_core::polysys::DesignSpec;
use marx_core::solver::{enumerate, EnumerateOptions};

fn main() -> marx_core::Result<()> {
    let max_n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);
    for n in 1..=max_n {
        let spec = DesignSpec::standard(n)?;
        let start = std::time::Instant::now();
        let set = enumerate(&spec, &EnumerateOptions::default())?;
        let s = &set.path_stats;
        println!(
            "n = {n}: {} real of {} paths ({} complex, {} diverged, {} failed, {} retracked) in {:.2?}",
            s.real, s.total, s.complex, s.diverged, s.failed, s.retracked, start.elapsed()
        );
        for (i, sol) in set.solutions.iter().enumerate() {
            let row: Vec<String> = sol.scaled.iter().map(|v| format!("{v:8.5}")).collect();
            let mark = if sol.regular { "  regular" } else { "" };
            println!("  {:2}  {}  cond {:.4}{mark}", i + 1, row.join(" "), sol.condition);
        }
    }
    Ok(())
}
