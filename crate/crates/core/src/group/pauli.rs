//! Pauli strings with phase tracking and the graph-stabilizer subgroup.
//!
//! Phases are powers of i (exponent in {0,1,2,3}). Kernels discard phase
//! through |·|², but the stabilizer-invariance checks need it exact.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::statevector::{CouplingGraph, Gate1Q, QuantumState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn to_gate(self) -> Gate1Q {
        match self {
            Pauli::I => Gate1Q::identity(),
            Pauli::X => Gate1Q::pauli_x(),
            Pauli::Y => Gate1Q::pauli_y(),
            Pauli::Z => Gate1Q::pauli_z(),
        }
    }

    /// Single-letter product a·b = i^phase · letter.
    fn multiply(a: Pauli, b: Pauli) -> (Pauli, u8) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (p, 0),
            (X, X) | (Y, Y) | (Z, Z) => (I, 0),
            (X, Y) => (Z, 1),
            (Y, X) => (Z, 3),
            (Y, Z) => (X, 1),
            (Z, Y) => (X, 3),
            (Z, X) => (Y, 1),
            (X, Z) => (Y, 3),
        }
    }

    /// (x, z) symplectic coordinates; Y carries both bits.
    fn symplectic(self) -> (u8, u8) {
        match self {
            Pauli::I => (0, 0),
            Pauli::X => (1, 0),
            Pauli::Y => (1, 1),
            Pauli::Z => (0, 1),
        }
    }
}

/// An n-qubit Pauli operator i^phase · P_{n−1} ⊗ … ⊗ P_0, stored as one
/// letter per qubit plus the phase exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: u8,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, phase: u8) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::validation("Pauli string needs at least one qubit"));
        }
        if phase > 3 {
            return Err(Error::validation("phase exponent must be in 0..=3"));
        }
        Ok(PauliString { letters, phase })
    }

    pub fn identity(n: usize) -> Self {
        PauliString { letters: vec![Pauli::I; n], phase: 0 }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    /// Power of i in front of the bare letter product.
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn phase_factor(&self) -> Complex64 {
        match self.phase {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// True when the bare letter products anticommute on an odd number of
    /// qubits (symplectic inner product 1).
    pub fn anticommutes_with(&self, other: &PauliString) -> bool {
        let mut parity = 0u8;
        for (&a, &b) in self.letters.iter().zip(&other.letters) {
            let (xa, za) = a.symplectic();
            let (xb, zb) = b.symplectic();
            parity ^= (xa & zb) ^ (xb & za);
        }
        parity == 1
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        !self.anticommutes_with(other)
    }

    /// Apply i^phase · ⊗letters to a state, one gate per non-identity
    /// letter plus a global phase.
    pub fn apply_to_state(&self, state: &mut QuantumState) -> Result<()> {
        if state.qubit_count() != self.len() {
            return Err(Error::dimension(format!(
                "Pauli string on {} qubits applied to {}-qubit state",
                self.len(),
                state.qubit_count()
            )));
        }
        for (q, &p) in self.letters.iter().enumerate() {
            if p != Pauli::I {
                state.apply_1q(q, &p.to_gate())?;
            }
        }
        let factor = self.phase_factor();
        if factor != Complex64::new(1.0, 0.0) {
            // global phase applied directly to the raw amplitudes
            let scaled: Vec<Complex64> =
                state.amplitudes().iter().map(|a| a * factor).collect();
            *state = QuantumState::from_amplitudes(scaled)?;
        }
        Ok(())
    }
}

/// Letterwise Pauli product with phase tracking: a · b.
pub fn pauli_multiply(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    if a.len() != b.len() {
        return Err(Error::dimension(format!(
            "Pauli strings of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut phase = (a.phase + b.phase) % 4;
    let letters = a
        .letters
        .iter()
        .zip(&b.letters)
        .map(|(&x, &y)| {
            let (l, ph) = Pauli::multiply(x, y);
            phase = (phase + ph) % 4;
            l
        })
        .collect();
    Ok(PauliString { letters, phase })
}

/// The graph-stabilizer subgroup ⟨s_1,…,s_n⟩ with s_i = X_i ⊗ Z_{neighbors(i)}.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    generators: Vec<PauliString>,
    graph: CouplingGraph,
}

impl StabilizerGroup {
    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn graph(&self) -> &CouplingGraph {
        &self.graph
    }

    pub fn qubit_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Multiply out the subset of generators selected by the mask bits.
    /// Mask 0 yields the identity string.
    pub fn element_from_mask(&self, mask: u64) -> Result<PauliString> {
        let n = self.generators.len();
        if n < 64 && mask >= (1u64 << n) {
            return Err(Error::validation(format!(
                "mask {mask} selects more than {n} generators"
            )));
        }
        let mut acc = PauliString::identity(self.qubit_count());
        for (i, gen) in self.generators.iter().enumerate() {
            if mask >> i & 1 == 1 {
                acc = pauli_multiply(&acc, gen)?;
            }
        }
        Ok(acc)
    }
}

/// Read the stabilizer generators off a coupling graph: generator i has X
/// at vertex i and Z at every neighbor of i.
pub fn graph_stabilizer_generators(graph: &CouplingGraph) -> Result<StabilizerGroup> {
    let n = graph.vertex_count();
    if n > 63 {
        return Err(Error::validation(
            "stabilizer subset masks use u64; at most 63 generators supported",
        ));
    }
    let mut generators = Vec::with_capacity(n);
    for i in 0..n {
        let mut letters = vec![Pauli::I; n];
        letters[i] = Pauli::X;
        for nb in graph.neighbors(i) {
            letters[nb] = Pauli::Z;
        }
        generators.push(PauliString::new(letters, 0)?);
    }
    let group = StabilizerGroup { generators, graph: graph.clone() };
    for (i, a) in group.generators.iter().enumerate() {
        for b in group.generators.iter().skip(i + 1) {
            if a.anticommutes_with(b) {
                return Err(Error::numerical("graph stabilizer generators do not commute"));
            }
        }
    }
    if symplectic_rank(&group.generators) != n {
        return Err(Error::numerical("graph stabilizer generators are not independent"));
    }
    Ok(group)
}

/// GF(2) rank of the generators' symplectic (x|z) rows.
fn symplectic_rank(strings: &[PauliString]) -> usize {
    let n = match strings.first() {
        Some(s) => s.len(),
        None => return 0,
    };
    let mut rows: Vec<u128> = strings
        .iter()
        .map(|s| {
            let mut bits = 0u128;
            for (q, &p) in s.letters().iter().enumerate() {
                let (x, z) = p.symplectic();
                bits |= (x as u128) << q;
                bits |= (z as u128) << (n + q);
            }
            bits
        })
        .collect();
    let mut rank = 0;
    for col in 0..(2 * n) {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> col & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r] >> col & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

/// Draw one element uniformly from the 2^n-element stabilizer group by
/// multiplying a uniformly random subset of generators.
pub fn sample_stabilizer_element<R: Rng>(group: &StabilizerGroup, rng: &mut R) -> PauliString {
    let n = group.generators().len();
    let mask: u64 = rng.random::<u64>() & ((1u64 << n) - 1);
    group
        .element_from_mask(mask)
        .expect("mask is within generator count by construction")
}
