//! Writes the SPICE deck of the regular two-stage design to stdout and checks
//! it parses back.

use marx_core::analysis::select_regular;
use marx_core::circuit::{netlist, parse_netlist, ElementKind};
use marx_core::polysys::DesignSpec;
use marx_core::solver::{enumerate, EnumerateOptions};

fn main() -> marx_core::Result<()> {
    let spec = DesignSpec::standard(2)?.with_components(1e-9, 1e-6)?;
    let set = enumerate(&spec, &EnumerateOptions::default())?;
    let design = select_regular(&set)?.remove(0);
    let deck = netlist(&spec, &design.k, 10e3)?;
    print!("{deck}");
    let parsed = parse_netlist(&deck)?;
    eprintln!(
        "{} capacitors, {} inductors",
        parsed.count(ElementKind::Capacitor),
        parsed.count(ElementKind::Inductor)
    );
    Ok(())
}
