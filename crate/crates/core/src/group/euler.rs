//! Euler-angle parametrization of SU(2):
//! D(θ1,θ2,θ3) = exp(−i(θ1/2)X) · exp(−i(θ2/2)Z) · exp(−i(θ3/2)X).
//!
//! Data lives in the θ3 ≡ 0 family throughout; θ3 is kept in the type so
//! the parametrization is the full one.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::group::Pauli;
use crate::statevector::Gate1Q;

/// Canonicalize an angle into (−2π, 2π].
///
/// Rotation gates are 4π-periodic, so this is value-preserving on the
/// unitary itself (not merely up to phase). Compositions with Pauli
/// letters add π and negate angles; without canonicalization the angles
/// grow without bound.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(4.0 * PI);
    if r > 2.0 * PI {
        r - 4.0 * PI
    } else {
        r
    }
}

/// The three Euler angles of one SU(2) element, in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerTriple {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl EulerTriple {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Result<Self> {
        if !(theta1.is_finite() && theta2.is_finite() && theta3.is_finite()) {
            return Err(Error::validation("Euler angles must be finite"));
        }
        Ok(EulerTriple { theta1, theta2, theta3 })
    }

    pub fn normalized(&self) -> EulerTriple {
        EulerTriple {
            theta1: normalize_angle(self.theta1),
            theta2: normalize_angle(self.theta2),
            theta3: normalize_angle(self.theta3),
        }
    }

    /// The unitary D(θ1,θ2,θ3) = R_X(θ1) R_Z(θ2) R_X(θ3).
    pub fn to_unitary(&self) -> Gate1Q {
        Gate1Q::rx(self.theta1)
            .mul(&Gate1Q::rz(self.theta2))
            .mul(&Gate1Q::rx(self.theta3))
    }
}

/// Map a 2n-dimensional angle vector to the n per-qubit unitaries of the
/// product representation D_θ = ⊗_k R_X(θ_{2k}) R_Z(θ_{2k+1}).
pub fn datum_to_unitaries(theta: &[f64]) -> Result<Vec<Gate1Q>> {
    if theta.len() % 2 != 0 || theta.is_empty() {
        return Err(Error::dimension(format!(
            "angle vector length {} is not a positive even number",
            theta.len()
        )));
    }
    theta
        .chunks_exact(2)
        .map(|pair| Ok(EulerTriple::new(pair[0], pair[1], 0.0)?.to_unitary()))
        .collect()
}

/// Fold a Pauli letter into a (θ1, θ2) Euler pair: returns angles with
/// D(θ1′,θ2′,0) ∝ D(θ1,θ2,0)·P up to a global phase, canonicalized.
pub fn compose_euler_with_pauli(angles: (f64, f64), p: Pauli) -> (f64, f64) {
    let (t1, t2) = angles;
    let (u1, u2) = match p {
        Pauli::I => (t1, t2),
        Pauli::X => (t1 + PI, -t2),
        Pauli::Z => (t1, t2 + PI),
        Pauli::Y => (t1 + PI, -t2 - PI),
    };
    (normalize_angle(u1), normalize_angle(u2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::Rng;

    /// Test-only 2×2 matrix exponential by scaled Taylor series,
    /// independent of the closed-form rotation constructors.
    fn expm(a: [[Complex64; 2]; 2]) -> Gate1Q {
        let half = Gate1Q::new(a).scale(Complex64::new(0.5f64.powi(16), 0.0));
        let mut term = Gate1Q::identity();
        let mut sum = Gate1Q::identity();
        for k in 1..30 {
            term = term.mul(&half).scale(Complex64::new(1.0 / k as f64, 0.0));
            let mut next = sum.m;
            for r in 0..2 {
                for c in 0..2 {
                    next[r][c] += term.m[r][c];
                }
            }
            sum = Gate1Q::new(next);
        }
        for _ in 0..16 {
            sum = sum.mul(&sum);
        }
        sum
    }

    fn exp_rotation(axis: Pauli, phi: f64) -> Gate1Q {
        let i = Complex64::new(0.0, 1.0);
        let h = Complex64::new(-phi / 2.0, 0.0) * i;
        let z = Complex64::new(0.0, 0.0);
        let base = match axis {
            Pauli::X => [[z, h], [h, z]],
            Pauli::Y => [[z, -i * h], [i * h, z]],
            Pauli::Z => [[h, z], [z, -h]],
            Pauli::I => [[h, z], [z, h]],
        };
        expm(base)
    }

    fn assert_gates_close(a: &Gate1Q, b: &Gate1Q, tol: f64) {
        for r in 0..2 {
            for c in 0..2 {
                assert!(
                    (a.m[r][c] - b.m[r][c]).norm() <= tol,
                    "entry ({r},{c}): {} vs {}",
                    a.m[r][c],
                    b.m[r][c]
                );
            }
        }
    }

    /// |tr(A†B)| = 2 iff A and B are equal up to a global phase.
    fn phase_free_equal(a: &Gate1Q, b: &Gate1Q, tol: f64) -> bool {
        (a.adjoint().mul(b).trace().norm() - 2.0).abs() <= tol
    }

    #[test]
    fn normalize_angle_lands_in_half_open_range() {
        for theta in [-13.0, -4.0 * PI, -2.0 * PI, 0.0, 2.0 * PI, 4.0 * PI, 29.5] {
            let r = normalize_angle(theta);
            assert!(r > -2.0 * PI && r <= 2.0 * PI, "{theta} -> {r}");
            // value-preserving on the unitary
            let u = EulerTriple::new(theta, 0.0, 0.0).unwrap().to_unitary();
            let v = EulerTriple::new(r, 0.0, 0.0).unwrap().to_unitary();
            assert_gates_close(&u, &v, 1e-9);
        }
        assert_abs_diff_eq!(normalize_angle(2.0 * PI), 2.0 * PI, epsilon = 1e-15);
    }

    #[test]
    fn zero_angles_give_identity() {
        let u = EulerTriple::new(0.0, 0.0, 0.0).unwrap().to_unitary();
        assert_gates_close(&u, &Gate1Q::identity(), 0.0);
    }

    #[test]
    fn pi_about_x_is_minus_i_x() {
        let u = EulerTriple::new(PI, 0.0, 0.0).unwrap().to_unitary();
        let expect = Gate1Q::pauli_x().scale(Complex64::new(0.0, -1.0));
        assert_gates_close(&u, &expect, 1e-15);
    }

    #[test]
    fn euler_matches_matrix_exponential_oracle() {
        let u = EulerTriple::new(PI / 2.0, PI / 2.0, 0.0).unwrap().to_unitary();
        let oracle = exp_rotation(Pauli::X, PI / 2.0).mul(&exp_rotation(Pauli::Z, PI / 2.0));
        assert_gates_close(&u, &oracle, 1e-11);

        let mut rng = crate::rng::rng_from_seed(11);
        for _ in 0..20 {
            let (a, b, c) = (
                rng.random_range(-6.0..6.0),
                rng.random_range(-6.0..6.0),
                rng.random_range(-6.0..6.0),
            );
            let u = EulerTriple::new(a, b, c).unwrap().to_unitary();
            let oracle = exp_rotation(Pauli::X, a)
                .mul(&exp_rotation(Pauli::Z, b))
                .mul(&exp_rotation(Pauli::X, c));
            assert_gates_close(&u, &oracle, 1e-11);
            assert!(u.is_unitary(1e-12));
        }
    }

    #[test]
    fn non_finite_angles_rejected() {
        assert!(EulerTriple::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(EulerTriple::new(0.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn datum_to_unitaries_basics() {
        let gates = datum_to_unitaries(&[0.0; 6]).unwrap();
        assert_eq!(gates.len(), 3);
        for g in &gates {
            assert_gates_close(g, &Gate1Q::identity(), 0.0);
        }

        let gates = datum_to_unitaries(&[PI, 0.0]).unwrap();
        let expect = Gate1Q::pauli_x().scale(Complex64::new(0.0, -1.0));
        assert_gates_close(&gates[0], &expect, 1e-15);

        assert!(datum_to_unitaries(&[1.0, 2.0, 3.0]).is_err());
        assert!(datum_to_unitaries(&[]).is_err());
    }

    #[test]
    fn datum_matches_per_qubit_products() {
        let mut rng = crate::rng::rng_from_seed(3);
        let theta: Vec<f64> = (0..8).map(|_| rng.random_range(-6.0..6.0)).collect();
        let gates = datum_to_unitaries(&theta).unwrap();
        for (k, g) in gates.iter().enumerate() {
            let direct = Gate1Q::rx(theta[2 * k]).mul(&Gate1Q::rz(theta[2 * k + 1]));
            assert_gates_close(g, &direct, 0.0);
        }
    }

    #[test]
    fn compose_with_identity_is_identity() {
        let (a, b) = compose_euler_with_pauli((0.4, -1.1), Pauli::I);
        assert_abs_diff_eq!(a, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(b, -1.1, epsilon = 1e-15);
    }

    #[test]
    fn compose_with_x_and_y_match_product_oracle() {
        for (p, gate) in [(Pauli::X, Gate1Q::pauli_x()), (Pauli::Y, Gate1Q::pauli_y())] {
            let (a, b) = compose_euler_with_pauli((0.3, 0.7), p);
            let out = EulerTriple::new(a, b, 0.0).unwrap().to_unitary();
            let target = EulerTriple::new(0.3, 0.7, 0.0).unwrap().to_unitary().mul(&gate);
            assert!(phase_free_equal(&out, &target, 1e-9));
        }
        let (a, b) = compose_euler_with_pauli((0.3, 0.7), Pauli::X);
        assert_abs_diff_eq!(a, 0.3 + PI, epsilon = 1e-12);
        assert_abs_diff_eq!(b, -0.7, epsilon = 1e-12);
        let (a, b) = compose_euler_with_pauli((0.3, 0.7), Pauli::Y);
        assert_abs_diff_eq!(a, 0.3 + PI, epsilon = 1e-12);
        assert_abs_diff_eq!(b, -0.7 - PI, epsilon = 1e-12);
    }

    #[test]
    fn compose_respects_phase_free_equality_on_a_grid() {
        let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let gates = [
            Gate1Q::identity(),
            Gate1Q::pauli_x(),
            Gate1Q::pauli_y(),
            Gate1Q::pauli_z(),
        ];
        let mut checked = 0;
        for i in 0..11 {
            for j in 0..11 {
                let t1 = -2.0 * PI + 4.0 * PI * (i as f64) / 10.0;
                let t2 = -2.0 * PI + 4.0 * PI * (j as f64) / 10.0;
                for (p, g) in letters.iter().zip(&gates) {
                    let (a, b) = compose_euler_with_pauli((t1, t2), *p);
                    let out = EulerTriple::new(a, b, 0.0).unwrap().to_unitary();
                    let target = EulerTriple::new(t1, t2, 0.0).unwrap().to_unitary().mul(g);
                    assert!(
                        phase_free_equal(&out, &target, 1e-9),
                        "failed at ({t1},{t2}) with {p:?}"
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked >= 100);
    }

    #[test]
    fn composing_twice_returns_phase_equal_original() {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let (a, b) = compose_euler_with_pauli((1.2, -0.4), p);
            let (a2, b2) = compose_euler_with_pauli((a, b), p);
            let original = EulerTriple::new(1.2, -0.4, 0.0).unwrap().to_unitary();
            let twice = EulerTriple::new(a2, b2, 0.0).unwrap().to_unitary();
            assert!(phase_free_equal(&original, &twice, 1e-9), "{p:?}");
        }
    }
}
