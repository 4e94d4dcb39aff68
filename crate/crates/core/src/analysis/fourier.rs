//! Non-Abelian Fourier decomposition of covariant kernels for small
//! finite groups with explicit multiplication tables, character tables,
//! and representation matrices.
//!
//! The kernel restricted to one argument, l(g) = |⟨ψ|D_g†|ψ⟩|², equals
//! ⟨ψ,ψ̄| M_{g⁻¹} |ψ,ψ̄⟩ on the doubled space with M_g = D_g ⊗ D̄_g.
//! Isotypic projectors Π_J built from the characters give Fourier
//! coefficients l̂(J) = (|G|/d_J) Π_J |ψ,ψ̄⟩⟨ψ,ψ̄| Π_J, and the inverse
//! transform f(g) = (1/|G|) Σ_J d_J tr[l̂(J) M_{g⁻¹}] reconstructs l.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::ZpStarGroup;

/// Combined (doubled-space) dimension cap for the brute-force machinery.
const MAX_DOUBLED_DIM: usize = 1 << 12;
const MAX_ORDER: usize = 64;

/// A finite group given by tables: element names, multiplication table,
/// character table (rows are irreps), irrep dimensions, and one unitary
/// representation matrix per element.
#[derive(Clone, Debug)]
pub struct FiniteGroupModel {
    names: Vec<String>,
    mult: Vec<Vec<usize>>,
    inverses: Vec<usize>,
    identity: usize,
    characters: Vec<Vec<Complex64>>,
    irrep_dims: Vec<usize>,
    rep: Vec<DMatrix<Complex64>>,
}

impl FiniteGroupModel {
    /// Validate the tables: a real group (identity, inverses, associativity
    /// spot-checked), orthogonal character rows, and a homomorphic
    /// representation of matching order.
    pub fn from_parts(
        names: Vec<String>,
        mult: Vec<Vec<usize>>,
        characters: Vec<Vec<Complex64>>,
        irrep_dims: Vec<usize>,
        rep: Vec<DMatrix<Complex64>>,
    ) -> Result<Self> {
        let order = names.len();
        if order == 0 || order > MAX_ORDER {
            return Err(Error::validation(format!("group order must be in 1..={MAX_ORDER}")));
        }
        if mult.len() != order || mult.iter().any(|r| r.len() != order) {
            return Err(Error::dimension("multiplication table must be order×order"));
        }
        if mult.iter().flatten().any(|&e| e >= order) {
            return Err(Error::validation("multiplication table entry out of range"));
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| mult[e][x] == x && mult[x][e] == x))
            .ok_or_else(|| Error::validation("no identity element"))?;
        let inverses = (0..order)
            .map(|x| {
                (0..order)
                    .find(|&y| mult[x][y] == identity && mult[y][x] == identity)
                    .ok_or_else(|| Error::validation(format!("element {x} has no inverse")))
            })
            .collect::<Result<Vec<usize>>>()?;
        // associativity: exhaustive for small orders, sampled otherwise
        let check = |a: usize, b: usize, c: usize| mult[mult[a][b]][c] == mult[a][mult[b][c]];
        if order <= 12 {
            for a in 0..order {
                for b in 0..order {
                    for c in 0..order {
                        if !check(a, b, c) {
                            return Err(Error::validation("multiplication table not associative"));
                        }
                    }
                }
            }
        } else {
            let mut state = 0x243F_6A88_85A3_08D3u64;
            for _ in 0..500 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (state >> 33) as usize % order;
                let b = (state >> 13) as usize % order;
                let c = state as usize % order;
                if !check(a, b, c) {
                    return Err(Error::validation("multiplication table not associative"));
                }
            }
        }

        if characters.is_empty() || characters.iter().any(|r| r.len() != order) {
            return Err(Error::dimension("character rows must have one entry per element"));
        }
        if irrep_dims.len() != characters.len() || irrep_dims.iter().any(|&d| d == 0) {
            return Err(Error::validation("one positive dimension per irrep required"));
        }
        for (j, row) in characters.iter().enumerate() {
            for (j2, row2) in characters.iter().enumerate() {
                let inner: Complex64 =
                    (0..order).map(|g| row[g] * row2[g].conj()).sum();
                let expect = if j == j2 { order as f64 } else { 0.0 };
                if (inner - Complex64::new(expect, 0.0)).norm() > 1e-9 {
                    return Err(Error::validation(format!(
                        "character rows {j} and {j2} violate orthogonality"
                    )));
                }
            }
        }

        if rep.len() != order {
            return Err(Error::dimension("one representation matrix per element required"));
        }
        let dim = rep[0].nrows();
        if rep.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::dimension("representation matrices must share one square size"));
        }
        if dim * dim > MAX_DOUBLED_DIM {
            return Err(Error::validation(format!(
                "doubled dimension {} exceeds cap {MAX_DOUBLED_DIM}",
                dim * dim
            )));
        }
        // homomorphism spot-check
        for a in 0..order.min(8) {
            for b in 0..order.min(8) {
                let prod = &rep[a] * &rep[b];
                if (&prod - &rep[mult[a][b]]).map(|c| c.norm()).max() > 1e-9 {
                    return Err(Error::validation("representation is not a homomorphism"));
                }
            }
        }

        Ok(FiniteGroupModel { names, mult, inverses, identity, characters, irrep_dims, rep })
    }

    /// The cyclic group Z_m with its regular (shift) representation.
    pub fn cyclic(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::validation("cyclic group needs positive order"));
        }
        let names = (0..m).map(|t| t.to_string()).collect();
        let mult = (0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect();
        let omega = 2.0 * std::f64::consts::PI / m as f64;
        let characters = (0..m)
            .map(|j| (0..m).map(|t| Complex64::from_polar(1.0, omega * (j * t) as f64)).collect())
            .collect();
        let rep = (0..m)
            .map(|t| {
                DMatrix::from_fn(m, m, |r, c| {
                    if r == (c + t) % m {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        FiniteGroupModel::from_parts(names, mult, characters, vec![1; m], rep)
    }

    /// Z*_p under multiplication mod p with its regular representation;
    /// characters come from the discrete log base the validated generator.
    pub fn zp_star(p: u64, g: u64) -> Result<Self> {
        let grp = ZpStarGroup::new(p, g, 0)?;
        let order = (p - 1) as usize;
        let names = (1..p).map(|x| x.to_string()).collect();
        let mult = (1..p)
            .map(|a| (1..p).map(|b| (a * b % p - 1) as usize).collect())
            .collect();
        let dlogs: Vec<u64> =
            (1..p).map(|x| grp.dlog_brute(x)).collect::<Result<_>>()?;
        let omega = 2.0 * std::f64::consts::PI / order as f64;
        let characters = (0..order)
            .map(|j| {
                (0..order)
                    .map(|x| Complex64::from_polar(1.0, omega * (j as f64) * dlogs[x] as f64))
                    .collect()
            })
            .collect();
        let rep = (1..p)
            .map(|x| {
                DMatrix::from_fn(order, order, |r, c| {
                    if r as u64 == x * (c as u64 + 1) % p - 1 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        FiniteGroupModel::from_parts(names, mult, characters, vec![1; order], rep)
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn irrep_count(&self) -> usize {
        self.characters.len()
    }

    pub fn irrep_dim(&self, j: usize) -> usize {
        self.irrep_dims[j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn multiply(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn representation(&self, g: usize) -> &DMatrix<Complex64> {
        &self.rep[g]
    }

    pub fn rep_dim(&self) -> usize {
        self.rep[0].nrows()
    }

    /// M_g = D_g ⊗ D̄_g on the doubled space.
    pub fn doubled(&self, g: usize) -> DMatrix<Complex64> {
        let conj = self.rep[g].map(|c| c.conj());
        self.rep[g].kronecker(&conj)
    }

    /// |ψ, ψ̄⟩ = ψ ⊗ conj(ψ).
    pub fn doubled_vector(&self, psi: &[Complex64]) -> Result<DVector<Complex64>> {
        let d = self.rep_dim();
        if psi.len() != d {
            return Err(Error::dimension(format!(
                "fiducial has {} entries, representation dimension is {d}",
                psi.len()
            )));
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!("fiducial not normalized: |ψ|² = {norm}")));
        }
        let mut v = DVector::zeros(d * d);
        for i in 0..d {
            for j in 0..d {
                v[i * d + j] = psi[i] * psi[j].conj();
            }
        }
        Ok(v)
    }

    /// Direct evaluation of l(g) = |⟨ψ| D_g† |ψ⟩|², the oracle the
    /// Fourier round trip is checked against.
    pub fn direct_kernel_function(&self, psi: &[Complex64]) -> Result<Vec<f64>> {
        let d = self.rep_dim();
        if psi.len() != d {
            return Err(Error::dimension("fiducial length must match representation"));
        }
        Ok((0..self.order())
            .map(|g| {
                let mut amp = Complex64::new(0.0, 0.0);
                for r in 0..d {
                    for c in 0..d {
                        // ⟨ψ|D_g†|ψ⟩ = Σ ψ̄_r (D_g†)_{rc} ψ_c with D_g† = D_g conjugate-transposed
                        amp += psi[r].conj() * self.rep[g][(c, r)].conj() * psi[c];
                    }
                }
                amp.norm_sqr()
            })
            .collect())
    }
}

/// Π_J = (d_J/|G|) Σ_g χ̄_J(g) D_g ⊗ D̄_g.
pub fn irrep_projector(gm: &FiniteGroupModel, j: usize) -> Result<DMatrix<Complex64>> {
    if j >= gm.irrep_count() {
        return Err(Error::validation(format!("irrep index {j} out of range")));
    }
    let d2 = gm.rep_dim() * gm.rep_dim();
    let mut acc = DMatrix::<Complex64>::zeros(d2, d2);
    for g in 0..gm.order() {
        let chi = gm.characters[j][g].conj();
        acc += gm.doubled(g) * chi;
    }
    let scale = gm.irrep_dim(j) as f64 / gm.order() as f64;
    Ok(acc * Complex64::new(scale, 0.0))
}

/// Fourier coefficients l̂(J) = (|G|/d_J) Π_J |ψ,ψ̄⟩⟨ψ,ψ̄| Π_J, one matrix
/// per irrep.
pub fn kernel_fourier_coefficients(
    gm: &FiniteGroupModel,
    psi: &[Complex64],
) -> Result<Vec<DMatrix<Complex64>>> {
    let v = gm.doubled_vector(psi)?;
    (0..gm.irrep_count())
        .map(|j| {
            let pi = irrep_projector(gm, j)?;
            let w = &pi * &v;
            let scale = Complex64::new(gm.order() as f64 / gm.irrep_dim(j) as f64, 0.0);
            Ok((&w * w.adjoint()) * scale)
        })
        .collect()
}

/// Inverse transform f(g) = (1/|G|) Σ_J d_J tr[l̂(J) M_{g⁻¹}], returned as
/// one real value per group element.
pub fn fourier_invert(coeffs: &[DMatrix<Complex64>], gm: &FiniteGroupModel) -> Result<Vec<f64>> {
    if coeffs.len() != gm.irrep_count() {
        return Err(Error::validation(format!(
            "{} coefficient blocks for {} irreps",
            coeffs.len(),
            gm.irrep_count()
        )));
    }
    let d2 = gm.rep_dim() * gm.rep_dim();
    if coeffs.iter().any(|c| c.nrows() != d2 || c.ncols() != d2) {
        return Err(Error::dimension("coefficient blocks must live on the doubled space"));
    }
    let mut values = Vec::with_capacity(gm.order());
    for g in 0..gm.order() {
        let m_inv = gm.doubled(gm.inverse(g));
        let mut total = Complex64::new(0.0, 0.0);
        for (j, coeff) in coeffs.iter().enumerate() {
            // tr(A·B) without forming the product
            let mut tr = Complex64::new(0.0, 0.0);
            for r in 0..d2 {
                for c in 0..d2 {
                    tr += coeff[(r, c)] * m_inv[(c, r)];
                }
            }
            total += tr * Complex64::new(gm.irrep_dim(j) as f64, 0.0);
        }
        total /= Complex64::new(gm.order() as f64, 0.0);
        if total.im.abs() > 1e-9 {
            return Err(Error::numerical(format!(
                "reconstruction at element {g} has imaginary part {}",
                total.im
            )));
        }
        values.push(total.re);
    }
    Ok(values)
}

/// Uniform superposition fiducial of a given dimension.
pub fn uniform_fiducial(dim: usize) -> Vec<Complex64> {
    let a = 1.0 / (dim as f64).sqrt();
    vec![Complex64::new(a, 0.0); dim]
}

/// The subset-superposition fiducial 2^{−k/2} Σ_{v<2^k} |g^v⟩ of a Z*_p
/// group, over the basis that indexes element x at position x−1.
pub fn subset_fiducial(grp: &ZpStarGroup) -> Vec<Complex64> {
    let dim = grp.group_order() as usize;
    let a = 1.0 / (grp.subset().len() as f64).sqrt();
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    for &e in grp.subset() {
        psi[(e - 1) as usize] = Complex64::new(a, 0.0);
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn cyclic_model_is_a_valid_group() {
        let gm = FiniteGroupModel::cyclic(6).unwrap();
        assert_eq!(gm.order(), 6);
        assert_eq!(gm.identity_index(), 0);
        assert_eq!(gm.multiply(4, 5), 3);
        assert_eq!(gm.inverse(2), 4);
    }

    #[test]
    fn zp_star_model_matches_modular_arithmetic() {
        let gm = FiniteGroupModel::zp_star(7, 3).unwrap();
        assert_eq!(gm.order(), 6);
        // element index x−1; 3·5 = 15 ≡ 1 (mod 7)
        assert_eq!(gm.multiply(2, 4), 0);
        assert_eq!(gm.identity_index(), 0);
    }

    #[test]
    fn projectors_are_idempotent_orthogonal_and_complete() {
        for gm in [FiniteGroupModel::cyclic(5).unwrap(), FiniteGroupModel::zp_star(7, 3).unwrap()] {
            let projectors: Vec<_> =
                (0..gm.irrep_count()).map(|j| irrep_projector(&gm, j).unwrap()).collect();
            let d2 = gm.rep_dim() * gm.rep_dim();
            let mut sum = DMatrix::<Complex64>::zeros(d2, d2);
            for (j, p) in projectors.iter().enumerate() {
                assert!(max_abs(&(p * p - p)) < 1e-9, "Π_{j} not idempotent");
                sum += p;
                for (j2, q) in projectors.iter().enumerate() {
                    if j != j2 {
                        assert!(max_abs(&(p * q)) < 1e-9, "Π_{j} Π_{j2} ≠ 0");
                    }
                }
            }
            let eye = DMatrix::<Complex64>::identity(d2, d2);
            assert!(max_abs(&(sum - eye)) < 1e-9, "projectors do not sum to identity");
        }
    }

    #[test]
    fn z2_regular_projectors_have_equal_rank() {
        let gm = FiniteGroupModel::cyclic(2).unwrap();
        let p0 = irrep_projector(&gm, 0).unwrap();
        let p1 = irrep_projector(&gm, 1).unwrap();
        let rank = |p: &DMatrix<Complex64>| p.trace().re.round() as usize;
        assert_eq!(rank(&p0), 2);
        assert_eq!(rank(&p1), 2);
    }

    #[test]
    fn trivial_irrep_projector_by_brute_force_sum() {
        let gm = FiniteGroupModel::cyclic(4).unwrap();
        let p0 = irrep_projector(&gm, 0).unwrap();
        let d2 = gm.rep_dim() * gm.rep_dim();
        let mut brute = DMatrix::<Complex64>::zeros(d2, d2);
        for g in 0..gm.order() {
            brute += gm.doubled(g);
        }
        brute /= Complex64::new(gm.order() as f64, 0.0);
        assert!(max_abs(&(p0 - brute)) < 1e-12);
    }

    #[test]
    fn coefficients_are_positive_semidefinite() {
        let gm = FiniteGroupModel::cyclic(4).unwrap();
        let psi = uniform_fiducial(4);
        let coeffs = kernel_fourier_coefficients(&gm, &psi).unwrap();
        let mut state = 7u64;
        for c in &coeffs {
            // Hermitian
            assert!(max_abs(&(c.adjoint() - c)) < 1e-9);
            // random quadratic forms stay nonnegative
            for _ in 0..10 {
                let v = DVector::from_fn(c.nrows(), |_, _| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    Complex64::new(
                        ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5,
                        ((state >> 13) as f64 / (1u64 << 51) as f64) - 1.0,
                    )
                });
                let q = (v.adjoint() * c * &v)[(0, 0)];
                assert!(q.re >= -1e-9, "negative quadratic form {q}");
            }
        }
    }

    #[test]
    fn round_trip_reconstructs_the_kernel_for_cyclic_groups() {
        for m in 2..=8 {
            let gm = FiniteGroupModel::cyclic(m).unwrap();
            let psi = uniform_fiducial(m);
            let direct = gm.direct_kernel_function(&psi).unwrap();
            let coeffs = kernel_fourier_coefficients(&gm, &psi).unwrap();
            let rebuilt = fourier_invert(&coeffs, &gm).unwrap();
            for (a, b) in rebuilt.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-9, "m={m}: {a} vs {b}");
            }
            // uniform fiducial is invariant under the whole cyclic group
            assert!(direct.iter().all(|&v| (v - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn round_trip_matches_subset_kernel_for_zp_star() {
        let grp = ZpStarGroup::new(7, 3, 1).unwrap();
        let gm = FiniteGroupModel::zp_star(7, 3).unwrap();
        let psi = subset_fiducial(&grp);
        let direct = gm.direct_kernel_function(&psi).unwrap();
        let coeffs = kernel_fourier_coefficients(&gm, &psi).unwrap();
        let rebuilt = fourier_invert(&coeffs, &gm).unwrap();
        for g in 0..gm.order() {
            let elem = (g + 1) as u64;
            let closed = grp.dlog_kernel_entry(elem, 1).unwrap();
            assert!((rebuilt[g] - closed).abs() < 1e-9, "g={elem}");
            assert!((direct[g] - closed).abs() < 1e-12, "g={elem}");
        }
        // worked value: l(3) = 1/4
        assert!((rebuilt[2] - 0.25).abs() < 1e-9);
    }

    /// For an Abelian group every irrep is one-dimensional, so the
    /// coefficient block must reproduce the scalar Fourier component:
    /// tr[l̂(J) M_{g⁻¹}]/|G| = c_J χ̄_J(g) with c_J = (1/|G|) Σ_h l(h) χ_J(h).
    #[test]
    fn coefficient_blocks_match_scalar_fourier_components() {
        for m in [2usize, 3, 5, 8] {
            let gm = FiniteGroupModel::cyclic(m).unwrap();
            // a non-trivial fiducial so l is not constant
            let mut psi = vec![Complex64::new(0.0, 0.0); m];
            let a = 1.0 / 2.0f64.sqrt();
            psi[0] = Complex64::new(a, 0.0);
            psi[1 % m] = Complex64::new(a, 0.0);
            if m == 1 {
                continue;
            }
            let l = gm.direct_kernel_function(&psi).unwrap();
            let coeffs = kernel_fourier_coefficients(&gm, &psi).unwrap();
            let order = m as f64;
            for j in 0..m {
                let c_j: Complex64 = (0..m)
                    .map(|h| Complex64::new(l[h], 0.0) * gm.characters[j][h])
                    .sum::<Complex64>()
                    / Complex64::new(order, 0.0);
                for g in 0..m {
                    let m_inv = gm.doubled(gm.inverse(g));
                    let mut tr = Complex64::new(0.0, 0.0);
                    for r in 0..m * m {
                        for c in 0..m * m {
                            tr += coeffs[j][(r, c)] * m_inv[(c, r)];
                        }
                    }
                    let component = tr / Complex64::new(order, 0.0);
                    let expect = c_j * gm.characters[j][g].conj();
                    assert!(
                        (component - expect).norm() < 1e-9,
                        "m={m} J={j} g={g}: {component} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_coefficients_invert_to_zero() {
        let gm = FiniteGroupModel::cyclic(3).unwrap();
        let d2 = gm.rep_dim() * gm.rep_dim();
        let zeros = vec![DMatrix::<Complex64>::zeros(d2, d2); gm.irrep_count()];
        let values = fourier_invert(&zeros, &gm).unwrap();
        assert!(values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_kernel_from_basis_state_fiducial() {
        let gm = FiniteGroupModel::zp_star(7, 3).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); 6];
        psi[0] = Complex64::new(1.0, 0.0);
        let direct = gm.direct_kernel_function(&psi).unwrap();
        for (g, &v) in direct.iter().enumerate() {
            let expect = if g == gm.identity_index() { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_broken_tables() {
        // broken multiplication table (not associative / no identity)
        let bad = FiniteGroupModel::from_parts(
            vec!["a".into(), "b".into()],
            vec![vec![1, 1], vec![1, 1]],
            vec![vec![Complex64::new(1.0, 0.0); 2]],
            vec![1],
            vec![DMatrix::identity(2, 2), DMatrix::identity(2, 2)],
        );
        assert!(bad.is_err());

        // bad characters: two identical rows
        let bad = FiniteGroupModel::from_parts(
            vec!["0".into(), "1".into()],
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![Complex64::new(1.0, 0.0); 2]; 2],
            vec![1, 1],
            vec![
                DMatrix::identity(2, 2),
                DMatrix::from_fn(2, 2, |r, c| {
                    Complex64::new(if r != c { 1.0 } else { 0.0 }, 0.0)
                }),
            ],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn fiducial_validation() {
        let gm = FiniteGroupModel::cyclic(3).unwrap();
        assert!(gm.doubled_vector(&uniform_fiducial(2)).is_err());
        let unnormalized = vec![Complex64::new(1.0, 0.0); 3];
        assert!(gm.doubled_vector(&unnormalized).is_err());
    }
}
