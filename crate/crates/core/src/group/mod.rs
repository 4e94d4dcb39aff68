//! Group machinery behind the covariant kernels: the SU(2) Euler
//! parametrization and its per-qubit product representation, the
//! graph-stabilizer subgroup with its Pauli algebra, and the Z*_p
//! regular-representation kernel for small primes.

mod euler;
mod pauli;
mod zpstar;

pub use euler::{compose_euler_with_pauli, datum_to_unitaries, normalize_angle, EulerTriple};
pub use pauli::{
    graph_stabilizer_generators, pauli_multiply, sample_stabilizer_element, Pauli, PauliString,
    StabilizerGroup,
};
pub use zpstar::ZpStarGroup;
