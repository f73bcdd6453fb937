//! State-space model of the ladder, modal checks, simulation and netlist export.

mod model;
mod netlist;
mod simulate;

pub use model::{
    build_a0, idx_i, idx_load_current, idx_load_voltage, idx_v, idx_vc, modal_check, modal_report, state_labels,
    ModalReport, StateModel,
};
pub use netlist::{netlist, parse_netlist, Element, ElementKind, ParsedNetlist};
pub use simulate::{simulate, simulate_from, verify_transfer, verify_transfer_with, SimTrace, TransferReport};
