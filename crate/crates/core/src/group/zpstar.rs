//! The multiplicative group Z*_p for small primes: brute-force discrete
//! logarithms and the covariant kernel induced by the regular
//! representation with a subset-superposition fiducial state.
//!
//! The kernel is evaluated by subset intersection rather than by
//! simulating the 2^n-dimensional regular representation: with
//! S = {g^v mod p : v < 2^k}, the fiducial maps x to the uniform
//! superposition over xS, so K(x,z) = (|xS ∩ zS| / 2^k)².

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest prime accepted; brute-force generator checks and DLOG scans
/// are linear in p.
pub const MAX_PRIME: u64 = 1 << 20;

#[derive(Clone, Debug)]
pub struct ZpStarGroup {
    p: u64,
    g: u64,
    k: u32,
    /// g^v mod p for v in 0..2^k, in exponent order.
    subset: Vec<u64>,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl ZpStarGroup {
    /// Validates p prime, g a generator of Z*_p (by brute force), and
    /// 2^k < p−1 so the subset elements are distinct.
    pub fn new(p: u64, g: u64, k: u32) -> Result<Self> {
        if p > MAX_PRIME {
            return Err(Error::validation(format!("p = {p} exceeds cap {MAX_PRIME}")));
        }
        if !is_prime(p) || p < 3 {
            return Err(Error::validation(format!("p = {p} is not an odd prime")));
        }
        if g < 2 || g >= p {
            return Err(Error::validation(format!("g = {g} is not in 2..{p}")));
        }
        // order of g must be exactly p−1
        let mut acc = g;
        let mut order = 1u64;
        while acc != 1 {
            acc = acc * g % p;
            order += 1;
            if order > p {
                return Err(Error::numerical("generator order scan did not terminate"));
            }
        }
        if order != p - 1 {
            return Err(Error::validation(format!(
                "g = {g} has order {order}, not {} — not a generator of Z*_{p}",
                p - 1
            )));
        }
        if k > 0 && (1u64 << k) >= p - 1 {
            return Err(Error::validation(format!("2^{k} must be < p−1 = {}", p - 1)));
        }
        let mut subset = Vec::with_capacity(1 << k);
        let mut e = 1u64;
        for _ in 0..(1u64 << k) {
            subset.push(e);
            e = e * g % p;
        }
        Ok(ZpStarGroup { p, g, k, subset })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    pub fn subset_exponent(&self) -> u32 {
        self.k
    }

    /// The subset S = {g^v : v < 2^k} defining the fiducial superposition.
    pub fn subset(&self) -> &[u64] {
        &self.subset
    }

    pub fn group_order(&self) -> u64 {
        self.p - 1
    }

    fn check_element(&self, x: u64) -> Result<()> {
        if x == 0 || x >= self.p {
            return Err(Error::validation(format!(
                "{x} is not an element of Z*_{}",
                self.p
            )));
        }
        Ok(())
    }

    /// K(x,z) = (|xS ∩ zS| / 2^k)², computed by explicit subset
    /// construction in integer arithmetic.
    pub fn dlog_kernel_entry(&self, x: u64, z: u64) -> Result<f64> {
        self.check_element(x)?;
        self.check_element(z)?;
        let xs: std::collections::HashSet<u64> =
            self.subset.iter().map(|s| x * s % self.p).collect();
        let overlap = self
            .subset
            .iter()
            .map(|s| z * s % self.p)
            .filter(|e| xs.contains(e))
            .count();
        let frac = overlap as f64 / self.subset.len() as f64;
        Ok(frac * frac)
    }

    /// Exhaustive-search discrete logarithm: the v with g^v ≡ x (mod p).
    pub fn dlog_brute(&self, x: u64) -> Result<u64> {
        self.check_element(x)?;
        let mut acc = 1u64;
        for v in 0..self.p - 1 {
            if acc == x {
                return Ok(v);
            }
            acc = acc * self.g % self.p;
        }
        Err(Error::numerical(format!(
            "no discrete log of {x} base {} mod {} — generator invariant broken",
            self.g, self.p
        )))
    }

    /// The full (p−1)×(p−1) kernel matrix over elements 1..p−1 in order.
    pub fn kernel_matrix(&self) -> DMatrix<f64> {
        let m = (self.p - 1) as usize;
        DMatrix::from_fn(m, m, |i, j| {
            self.dlog_kernel_entry(i as u64 + 1, j as u64 + 1)
                .expect("indices map to valid group elements")
        })
    }
}
