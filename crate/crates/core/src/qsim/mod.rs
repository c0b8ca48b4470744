//! Dense statevector simulator with named register layouts.

mod gate;
mod layout;
mod state;

pub use gate::{mcx_toffoli_ladder, BasisPredicate, Circuit, Gate, GateKind, Op, SparseAxis};
pub use layout::{RegisterLayout, Span};
pub use state::{multiplicity_amplitudes, sample_histogram, Matrix2, Matrix4, StateVector, DEFAULT_QUBIT_CAP};
