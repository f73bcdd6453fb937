//! Discharges the regular n-stage design (default n = 4) and prints a few
//! samples of the load voltage and the stored energy, then the transfer check.

use marx_core::analysis::select_regular;
use marx_core::circuit::{build_a0, simulate, verify_transfer};
use marx_core::polysys::DesignSpec;
use marx_core::solver::{enumerate, EnumerateOptions};

fn main() -> marx_core::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let spec = DesignSpec::standard(n)?;
    let set = enumerate(&spec, &EnumerateOptions::default())?;
    let design = select_regular(&set)?.remove(0);
    let model = build_a0(&spec, &design.f)?;
    let trace = simulate(&model, 1.0, 201)?;
    println!("{:>8} {:>12} {:>12}", "t", "v_L", "energy");
    for j in (0..trace.times.len()).step_by(20) {
        println!("{:8.4} {:12.8} {:12.8}", trace.times[j], trace.v_load[j], trace.energy[j]);
    }
    let r = verify_transfer(&trace);
    println!(
        "v_L(T) = {:.10}, |x(T) - target| = {:.2e}, drift {:.2e}, passed {}",
        r.load_voltage, r.endpoint_residual, r.energy_drift, r.passed
    );
    Ok(())
}
