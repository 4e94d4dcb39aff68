//! Dense complex statevector simulation of the circuit family used by the
//! kernels: single-qubit gates, CZ entanglers, fiducial-state preparation,
//! overlaps, and outcome distributions.
//!
//! Convention: amplitudes are indexed little-endian. Basis index `i`
//! encodes qubit `k` as bit `k` of `i`, so `|q1 q0⟩ = |01⟩` lives at
//! index `0b01 = 1` for qubit 0 in state `|1⟩`. Every module in this
//! crate shares this mapping.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest qubit count accepted by [`QuantumState::zero`]; 2^24 amplitudes
/// is ~256 MiB of complex doubles. Use [`QuantumState::zero_with_cap`] to
/// raise it deliberately.
pub const DEFAULT_QUBIT_CAP: usize = 24;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A 2×2 complex matrix acting on one qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate1Q {
    /// Row-major entries: `m[row][col]`.
    pub m: [[Complex64; 2]; 2],
}

impl Gate1Q {
    pub fn new(m: [[Complex64; 2]; 2]) -> Self {
        Gate1Q { m }
    }

    pub fn identity() -> Self {
        Gate1Q::new([[ONE, ZERO], [ZERO, ONE]])
    }

    /// R_X(φ) = exp(−i(φ/2)X)
    pub fn rx(phi: f64) -> Self {
        let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
        Gate1Q::new([
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ])
    }

    /// R_Y(φ) = exp(−i(φ/2)Y)
    pub fn ry(phi: f64) -> Self {
        let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
        Gate1Q::new([
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ])
    }

    /// R_Z(φ) = exp(−i(φ/2)Z)
    pub fn rz(phi: f64) -> Self {
        Gate1Q::new([
            [Complex64::from_polar(1.0, -phi / 2.0), ZERO],
            [ZERO, Complex64::from_polar(1.0, phi / 2.0)],
        ])
    }

    pub fn pauli_x() -> Self {
        Gate1Q::new([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Gate1Q::new([
            [ZERO, Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, 1.0), ZERO],
        ])
    }

    pub fn pauli_z() -> Self {
        Gate1Q::new([[ONE, ZERO], [ZERO, -ONE]])
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Gate1Q) -> Gate1Q {
        let a = &self.m;
        let b = &rhs.m;
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Gate1Q::new(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Gate1Q {
        Gate1Q::new([
            [self.m[0][0].conj(), self.m[1][0].conj()],
            [self.m[0][1].conj(), self.m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn scale(&self, s: Complex64) -> Gate1Q {
        let mut out = self.m;
        for row in &mut out {
            for e in row {
                *e *= s;
            }
        }
        Gate1Q::new(out)
    }

    /// Max-abs deviation of U†U from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let mut err: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { ONE } else { ZERO };
                err = err.max((p.m[r][c] - target).norm());
            }
        }
        err
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }
}

/// Undirected simple coupling graph; edges carry the CZ entanglers of the
/// fiducial circuit and define the graph-stabilizer subgroup.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CouplingGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl CouplingGraph {
    /// Build a graph, normalizing each edge to (low, high) order and
    /// rejecting self-loops, duplicates, and out-of-range vertices.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("graph must have at least one vertex"));
        }
        let mut normalized: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::validation(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::validation(format!(
                    "edge ({a},{b}) out of range for {n} vertices"
                )));
            }
            let e = (a.min(b), a.max(b));
            if normalized.contains(&e) {
                return Err(Error::validation(format!("duplicate edge ({},{})", e.0, e.1)));
            }
            normalized.push(e);
        }
        Ok(CouplingGraph { n, edges: normalized })
    }

    /// Path 0–1–…–(n−1).
    pub fn path(n: usize) -> Result<Self> {
        CouplingGraph::new(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Cycle on n ≥ 3 vertices.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::validation("ring needs at least 3 vertices"));
        }
        CouplingGraph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// A fragment of a heavy-hex coupling map: a spine path with a pendant
    /// qubit attached at every third spine site, the T-junction motif of
    /// the heavy-hexagon topology. Vertices are numbered in construction
    /// order; max degree is 3 and the graph is connected.
    pub fn heavy_hex_fragment(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("graph must have at least one vertex"));
        }
        let mut edges = Vec::new();
        let mut next = 0usize;
        let mut prev_spine: Option<usize> = None;
        let mut spine_pos = 0usize;
        while next < n {
            let v = next;
            next += 1;
            if let Some(p) = prev_spine {
                edges.push((p, v));
            }
            prev_spine = Some(v);
            if spine_pos % 3 == 1 && next < n {
                edges.push((v, next));
                next += 1;
            }
            spine_pos += 1;
        }
        CouplingGraph::new(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Dense n-qubit pure state.
#[derive(Clone, Debug)]
pub struct QuantumState {
    n: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// |0^n⟩ under the default memory cap.
    pub fn zero(n: usize) -> Result<Self> {
        QuantumState::zero_with_cap(n, DEFAULT_QUBIT_CAP)
    }

    pub fn zero_with_cap(n: usize, cap: usize) -> Result<Self> {
        if n == 0 || n > cap {
            return Err(Error::validation(format!(
                "qubit count {n} outside supported range 1..={cap}"
            )));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(QuantumState { n, amps })
    }

    /// Build from raw amplitudes; the vector length must be a power of two
    /// and the norm must be 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::validation("amplitude count must be a power of two"));
        }
        let n = len.trailing_zeros() as usize;
        if n == 0 {
            return Err(Error::validation("need at least one qubit"));
        }
        let state = QuantumState { n, amps };
        let norm_sq: f64 = state.amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::validation(format!(
                "state not normalized: |ψ|² = {norm_sq}"
            )));
        }
        Ok(state)
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Apply a single-qubit gate. The qubit index is always checked; gate
    /// unitarity is checked (within 1e-9) only in debug builds to keep the
    /// kernel evaluation loop hot.
    pub fn apply_1q(&mut self, qubit: usize, g: &Gate1Q) -> Result<()> {
        if qubit >= self.n {
            return Err(Error::validation(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n
            )));
        }
        if cfg!(debug_assertions) && !g.is_unitary(1e-9) {
            return Err(Error::validation(format!(
                "gate is not unitary (error {:.3e})",
                g.unitarity_error()
            )));
        }
        let step = 1usize << qubit;
        let [[u00, u01], [u10, u11]] = g.m;
        for base in (0..self.amps.len()).step_by(2 * step) {
            for offset in 0..step {
                let i = base + offset;
                let j = i | step;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = u00 * a + u01 * b;
                self.amps[j] = u10 * a + u11 * b;
            }
        }
        Ok(())
    }

    /// Apply CZ = diag(1,1,1,−1) on a pair of distinct qubits.
    pub fn apply_cz(&mut self, q1: usize, q2: usize) -> Result<()> {
        if q1 == q2 {
            return Err(Error::validation("CZ needs two distinct qubits"));
        }
        if q1 >= self.n || q2 >= self.n {
            return Err(Error::validation(format!(
                "CZ ({q1},{q2}) out of range for {} qubits",
                self.n
            )));
        }
        let mask = (1usize << q1) | (1usize << q2);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &QuantumState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::dimension(format!(
                "overlap of {}-qubit and {}-qubit states",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability of each computational-basis outcome.
    pub fn outcome_distribution(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Prepare the interpolating fiducial state
/// ∏_{(k,t)∈E} CZ_{k,t} ∏_k R_Y(λ) |0^n⟩.
///
/// At λ = 0 this is |0^n⟩; at λ = π/2 it is the graph state stabilized by
/// the graph's stabilizer group. The CZ factors commute, so edge order is
/// irrelevant.
pub fn prepare_fiducial(graph: &CouplingGraph, lambda: f64) -> Result<QuantumState> {
    let mut state = QuantumState::zero(graph.vertex_count())?;
    let ry = Gate1Q::ry(lambda);
    for q in 0..graph.vertex_count() {
        state.apply_1q(q, &ry)?;
    }
    for &(a, b) in graph.edges() {
        state.apply_cz(a, b)?;
    }
    Ok(state)
}

/// Collapse a 2^n-outcome distribution into n+1 Hamming-weight buckets.
pub fn hamming_weight_distribution(p: &[f64], n: usize) -> Result<Vec<f64>> {
    if p.len() != 1 << n {
        return Err(Error::dimension(format!(
            "distribution has {} outcomes, expected 2^{n}",
            p.len()
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::validation(format!(
            "distribution sums to {total}, expected 1"
        )));
    }
    let mut buckets = vec![0.0; n + 1];
    for (i, &prob) in p.iter().enumerate() {
        buckets[i.count_ones() as usize] += prob;
    }
    Ok(buckets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_states_close(a: &QuantumState, b: &QuantumState, tol: f64) {
        assert_eq!(a.qubit_count(), b.qubit_count());
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn zero_state_is_all_zeros_ket() {
        let s = QuantumState::zero(1).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);
        let s = QuantumState::zero(2).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
    }

    #[test]
    fn zero_state_respects_cap() {
        assert!(QuantumState::zero(25).is_err());
        assert!(QuantumState::zero(0).is_err());
        assert!(QuantumState::zero_with_cap(25, 26).is_ok());
    }

    #[test]
    fn ry_pi_flips_zero_to_one() {
        let mut s = QuantumState::zero(1).unwrap();
        s.apply_1q(0, &Gate1Q::ry(PI)).unwrap();
        assert_abs_diff_eq!((s.amplitudes()[1] - ONE).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[0].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rx_zero_is_identity() {
        let mut s = QuantumState::zero(3).unwrap();
        s.apply_1q(1, &Gate1Q::ry(0.7)).unwrap();
        let before = s.clone();
        s.apply_1q(1, &Gate1Q::rx(0.0)).unwrap();
        assert_states_close(&before, &s, 0.0);
    }

    #[test]
    fn rz_on_plus_matches_2x2_oracle() {
        // R_Z(π/2)|+⟩: ⟨+|out⟩ = (e^{−iπ/4} + e^{iπ/4})/2 = cos(π/4).
        let mut s = QuantumState::zero(1).unwrap();
        s.apply_1q(0, &Gate1Q::ry(FRAC_PI_2)).unwrap(); // |+⟩
        let plus = s.clone();
        s.apply_1q(0, &Gate1Q::rz(FRAC_PI_2)).unwrap();
        let ov = plus.overlap(&s).unwrap();
        assert_abs_diff_eq!(ov.re, (PI / 4.0).cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(ov.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn apply_1q_rejects_bad_inputs() {
        let mut s = QuantumState::zero(2).unwrap();
        assert!(s.apply_1q(2, &Gate1Q::identity()).is_err());
        // Non-unitary gate is caught in debug builds.
        if cfg!(debug_assertions) {
            let bad = Gate1Q::new([[ONE, ONE], [ZERO, ONE]]);
            assert!(s.apply_1q(0, &bad).is_err());
        }
    }

    #[test]
    fn cz_flips_only_the_both_ones_amplitude() {
        let mut s = QuantumState::zero(2).unwrap();
        s.apply_1q(0, &Gate1Q::pauli_x()).unwrap();
        s.apply_1q(1, &Gate1Q::pauli_x()).unwrap(); // |11⟩
        s.apply_cz(0, 1).unwrap();
        assert_abs_diff_eq!((s.amplitudes()[3] + ONE).norm(), 0.0, epsilon = 1e-15);

        let mut z = QuantumState::zero(2).unwrap();
        z.apply_cz(0, 1).unwrap();
        assert_eq!(z.amplitudes()[0], ONE);
    }

    #[test]
    fn cz_is_an_involution() {
        let mut s = prepare_fiducial(&CouplingGraph::path(3).unwrap(), 0.9).unwrap();
        let before = s.clone();
        s.apply_cz(0, 2).unwrap();
        s.apply_cz(0, 2).unwrap();
        assert_states_close(&before, &s, 0.0);
    }

    #[test]
    fn cz_rejects_equal_or_out_of_range_qubits() {
        let mut s = QuantumState::zero(2).unwrap();
        assert!(s.apply_cz(1, 1).is_err());
        assert!(s.apply_cz(0, 2).is_err());
    }

    #[test]
    fn fiducial_at_lambda_zero_is_zero_state() {
        let g = CouplingGraph::ring(4).unwrap();
        let s = prepare_fiducial(&g, 0.0).unwrap();
        assert_eq!(s.amplitudes()[0], ONE);
        assert!(s.amplitudes()[1..].iter().all(|a| *a == ZERO));
    }

    #[test]
    fn fiducial_single_edge_at_half_pi() {
        let g = CouplingGraph::new(2, [(0, 1)]).unwrap();
        let s = prepare_fiducial(&g, FRAC_PI_2).unwrap();
        let expect = [0.5, 0.5, 0.5, -0.5];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fiducial_is_independent_of_cz_order() {
        let edges = [(0, 1), (1, 2), (2, 3), (0, 3)];
        let g1 = CouplingGraph::new(4, edges).unwrap();
        let mut rev = edges;
        rev.reverse();
        let g2 = CouplingGraph::new(4, rev).unwrap();
        let s1 = prepare_fiducial(&g1, 1.234).unwrap();
        let s2 = prepare_fiducial(&g2, 1.234).unwrap();
        assert_states_close(&s1, &s2, 1e-12);
    }

    #[test]
    fn overlap_basics() {
        let zero = QuantumState::zero(1).unwrap();
        assert_abs_diff_eq!((zero.overlap(&zero).unwrap() - ONE).norm(), 0.0, epsilon = 1e-15);

        let mut one = QuantumState::zero(1).unwrap();
        one.apply_1q(0, &Gate1Q::pauli_x()).unwrap();
        assert_abs_diff_eq!(zero.overlap(&one).unwrap().norm(), 0.0, epsilon = 1e-15);

        let mut plus = QuantumState::zero(1).unwrap();
        plus.apply_1q(0, &Gate1Q::ry(FRAC_PI_2)).unwrap();
        assert_abs_diff_eq!(
            zero.overlap(&plus).unwrap().re,
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );

        let two = QuantumState::zero(2).unwrap();
        assert!(zero.overlap(&two).is_err());
    }

    #[test]
    fn outcome_distribution_sums_to_one() {
        let g = CouplingGraph::new(2, [(0, 1)]).unwrap();
        let s = prepare_fiducial(&g, FRAC_PI_2).unwrap();
        let p = s.outcome_distribution();
        for prob in &p {
            assert_abs_diff_eq!(*prob, 0.25, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hamming_buckets_count_popcounts() {
        let h = hamming_weight_distribution(&[1.0, 0.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(h, vec![1.0, 0.0, 0.0]);

        let h = hamming_weight_distribution(&[0.25; 4], 2).unwrap();
        assert_eq!(h, vec![0.25, 0.5, 0.25]);

        assert!(hamming_weight_distribution(&[0.5, 0.5], 2).is_err());
    }

    #[test]
    fn hamming_bucket_zero_is_p0() {
        let g = CouplingGraph::path(3).unwrap();
        let s = prepare_fiducial(&g, 0.77).unwrap();
        let p = s.outcome_distribution();
        let h = hamming_weight_distribution(&p, 3).unwrap();
        assert_eq!(h[0], p[0]);
    }

    #[test]
    fn norm_preserved_under_long_gate_sequences() {
        let mut s = QuantumState::zero(4).unwrap();
        let mut rng = crate::rng::rng_from_seed(5);
        use rand::Rng;
        for step in 0..200 {
            let q = rng.random_range(0..4);
            match step % 3 {
                0 => s.apply_1q(q, &Gate1Q::rx(rng.random_range(-3.0..3.0))).unwrap(),
                1 => s.apply_1q(q, &Gate1Q::rz(rng.random_range(-3.0..3.0))).unwrap(),
                _ => {
                    let q2 = (q + 1 + rng.random_range(0..3)) % 4;
                    s.apply_cz(q.min(q2), q.max(q2)).unwrap();
                }
            }
        }
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gate_then_adjoint_restores_state() {
        let g = Gate1Q::rx(0.3).mul(&Gate1Q::rz(1.1));
        let mut s = prepare_fiducial(&CouplingGraph::path(3).unwrap(), 0.4).unwrap();
        let before = s.clone();
        s.apply_1q(2, &g).unwrap();
        s.apply_1q(2, &g.adjoint()).unwrap();
        assert_states_close(&before, &s, 1e-10);
    }

    #[test]
    fn graph_validation() {
        assert!(CouplingGraph::new(3, [(0, 0)]).is_err());
        assert!(CouplingGraph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(CouplingGraph::new(3, [(0, 3)]).is_err());
        assert!(CouplingGraph::new(0, []).is_err());
        let g = CouplingGraph::new(3, [(2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(1, 2)]);
        assert_eq!(g.neighbors(1), vec![2]);
    }

    #[test]
    fn builtin_graphs_have_expected_shape() {
        let p = CouplingGraph::path(4).unwrap();
        assert_eq!(p.edges(), &[(0, 1), (1, 2), (2, 3)]);
        let r = CouplingGraph::ring(4).unwrap();
        assert_eq!(r.edges().len(), 4);
        assert!(CouplingGraph::ring(2).is_err());

        for n in 1..=16 {
            let h = CouplingGraph::heavy_hex_fragment(n).unwrap();
            assert_eq!(h.vertex_count(), n);
            // connected: reachable count from 0 equals n
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for w in h.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            assert!(seen.iter().all(|&s| s), "heavy-hex fragment n={n} disconnected");
            for v in 0..n {
                assert!(h.neighbors(v).len() <= 3);
            }
        }
    }
}
