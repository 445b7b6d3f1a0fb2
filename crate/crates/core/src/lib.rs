//! Hybrid quantum-neural wavefunction for molecular ground states.
//!
//! A paired-doubles circuit `|psi>` on the alpha register and a fixed
//! circuit `|phi>` on the beta register are entangled by a CNOT ladder, and
//! the resulting amplitudes are reweighted by a masked MLP `b(k, j)`. The
//! energy of the hybrid state is estimated from computational-basis shots.

pub mod ansatz;
pub mod error;
pub mod hamiltonian;
pub mod integrals;
pub mod measurement;
pub mod neural;
pub mod oracles;
pub mod pauli;
pub mod solvers;
pub mod statevector;

pub use error::{Error, Result};
pub use integrals::IntegralSet;
pub use solvers::{CircuitKind, Mode, TrainConfig};
pub use neural::{AdaMaxState, BilinearForm, NetworkShape, NeuralAmplitudeModel};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use statevector::{GateOp, State};
