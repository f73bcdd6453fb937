//! Prints the exact f- and k-systems for n stages (default 2) and the k-system
//! as JSON.

use marx_core::polysys::{rational_to_string, system_f, system_k, DesignSpec, PolySystem};

fn show(sys: &PolySystem) {
    let vars = sys.variables();
    for (i, p) in sys.polynomials().iter().enumerate() {
        let terms: Vec<String> = p
            .terms()
            .map(|(m, c)| {
                let mono: Vec<String> = m
                    .exponents()
                    .iter()
                    .zip(&vars)
                    .filter(|(e, _)| **e > 0)
                    .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                    .collect();
                if mono.is_empty() {
                    rational_to_string(c)
                } else {
                    format!("{}*{}", rational_to_string(c), mono.join("*"))
                }
            })
            .collect();
        println!("  {}: {} = 0", i + 1, terms.join(" + "));
    }
}

fn main() -> marx_core::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    let spec = DesignSpec::standard(n)?;
    let f = system_f(&spec)?;
    let k = system_k(&spec)?;
    println!("f-system, degrees {:?}, Bezout number {}", f.degrees(), f.bezout_number());
    show(&f);
    println!("k-system, degrees {:?}, Bezout number {}", k.degrees(), k.bezout_number());
    show(&k);
    println!("{}", k.to_json()?);
    Ok(())
}
