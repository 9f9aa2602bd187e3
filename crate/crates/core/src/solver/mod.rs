//! Finite-volume scheme for `∂ₜf + v∂ₓf - V'(x)∂ᵥf = ∂ᵥ(∂ᵥf - (∂ᵥM/M) f)`
//! on a bounded phase-space box.

pub mod field;
pub mod grid;
pub mod run;
pub mod steady;
pub mod stepper;
pub mod transport;
pub mod velocity;

pub use field::{default_initial_condition, initial_datum, Field};
pub use grid::{build_grid, PhaseGrid};
pub use run::{read_checkpoint, run, write_checkpoint, Checkpoint, Observer, RunSettings, Start};
pub use steady::{steady_state_reference, SteadyOptions, SteadyState};
pub use stepper::{cfl_timestep, strang_step, Splitting, Stepper};
pub use transport::XBoundary;
pub use velocity::cc_weight;
