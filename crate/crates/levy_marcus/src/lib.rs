//! Lévy jump driver, Marcus canonical flows of noise operators and the
//! compensator integral.

mod driver;
mod flow;
mod io;

pub use driver::{gauss_legendre, sample_jumps, LevyDriver, LevyMeasure};
pub use flow::{
    compensator_drift, compensator_drift_nodes, default_substeps, flow_defect_bounds, flow_stability, generator,
    marcus_flow, marcus_flow_substeps, small_jump_correction, DefectRow, FlowConstants, MarcusFlowResult,
    StabilityReport, QUAD_NODES,
};
pub use io::{write_defect_table, write_jump_log, DEFECT_HEADER, JUMP_HEADER};
