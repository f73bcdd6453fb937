//! Enumerates the real designs for a single stage count and prints them as
//! JSON. Usage: `enumerate_one N [SEED]`.

use marx_core::polysys::DesignSpec;
use marx_core::solver::{enumerate, EnumerateOptions};

fn main() -> marx_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let options = EnumerateOptions {
        seed,
        ..EnumerateOptions::default()
    };
    let set = enumerate(&DesignSpec::standard(n)?, &options)?;
    println!("{}", set.to_json()?);
    Ok(())
}
