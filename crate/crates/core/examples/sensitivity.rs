//! Eigenvalue condition numbers of every n-stage design (default n = 3) and
//! the area of each pseudospectral level on a coarse grid.

use marx_core::analysis::{condition_of_f, pseudospectrum, Window, DEFAULT_EPSILONS};
use marx_core::circuit::build_a0;
use marx_core::polysys::DesignSpec;
use marx_core::solver::{enumerate, EnumerateOptions};
use marx_core::Tolerances;

fn main() -> marx_core::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let spec = DesignSpec::standard(n)?;
    let set = enumerate(&spec, &EnumerateOptions::default())?;
    for (i, sol) in set.solutions.iter().enumerate() {
        let sens = condition_of_f(&sol.f, &Tolerances::default())?;
        let model = build_a0(&spec, &sol.f)?;
        let grid = pseudospectrum(&model, Window::around(&model), (81, 81), &DEFAULT_EPSILONS)?;
        let conds: Vec<String> = sens.conditions.iter().map(|c| format!("{c:.4}")).collect();
        let areas: Vec<String> = DEFAULT_EPSILONS.iter().map(|&e| format!("{:.4}", grid.area_fraction(e))).collect();
        let mark = if sol.regular { " (regular)" } else { "" };
        println!("#{}{mark}: cond per eigenvalue [{}]", i + 1, conds.join(", "));
        println!("    area fraction at eps {:?}: [{}]", DEFAULT_EPSILONS, areas.join(", "));
    }
    Ok(())
}
