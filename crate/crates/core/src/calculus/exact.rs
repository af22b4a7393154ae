//! Exact rational evaluation of the linear operators.
//!
//! Every finite `f64` is a dyadic rational, so converting weights and values
//! with [`to_rational`] loses nothing. Used as a rounding-free ground truth on
//! small graphs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};

use super::ExtensionMode;
use crate::graph::Domain;

/// Exact image of a finite float.
pub fn to_rational(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite value")
}

/// A domain with exact rational weights and measures.
#[derive(Debug, Clone)]
pub struct ExactDomain {
    adjacency: Vec<Vec<(usize, BigRational)>>,
    measure: Vec<BigRational>,
    in_omega: Vec<bool>,
    omega: Vec<usize>,
    mode: ExtensionMode,
}

impl ExactDomain {
    pub fn new(domain: &Domain, mode: ExtensionMode) -> Self {
        let g = domain.graph();
        let n = g.vertex_count();
        let adjacency: Vec<Vec<(usize, BigRational)>> = (0..n)
            .map(|x| {
                g.neighbors(x)
                    .iter()
                    .map(|&(y, w)| (y, to_rational(w)))
                    .collect()
            })
            .collect();
        let measure = adjacency
            .iter()
            .map(|nbrs| nbrs.iter().fold(BigRational::zero(), |acc, (_, w)| acc + w))
            .collect();
        Self {
            adjacency,
            measure,
            in_omega: (0..n).map(|x| domain.contains_index(x)).collect(),
            omega: domain.omega_indices().to_vec(),
            mode,
        }
    }

    fn active(&self, y: usize) -> bool {
        self.mode == ExtensionMode::ZeroExtend || self.in_omega[y]
    }

    /// Converts a dense float field exactly.
    pub fn field(&self, u: &[f64]) -> Vec<BigRational> {
        u.iter().map(|&v| to_rational(v)).collect()
    }

    pub fn laplacian_at(&self, u: &[BigRational], x: usize) -> BigRational {
        let sum = self.adjacency[x]
            .iter()
            .filter(|(y, _)| self.active(*y))
            .fold(BigRational::zero(), |acc, (y, w)| acc + w * (&u[*y] - &u[x]));
        sum / &self.measure[x]
    }

    pub fn gradient_form_at(&self, u: &[BigRational], v: &[BigRational], x: usize) -> BigRational {
        let sum = self.adjacency[x]
            .iter()
            .filter(|(y, _)| self.active(*y))
            .fold(BigRational::zero(), |acc, (y, w)| {
                acc + w * (&u[*y] - &u[x]) * (&v[*y] - &v[x])
            });
        sum / (BigRational::from_integer(BigInt::from(2)) * &self.measure[x])
    }

    /// `Σ_{x∈Ω} u(x) m(x)`.
    pub fn integrate(&self, u: &[BigRational]) -> BigRational {
        self.omega
            .iter()
            .fold(BigRational::zero(), |acc, &x| acc + &u[x] * &self.measure[x])
    }

    /// `∫_Ω Γ(u,φ) dm`.
    pub fn dirichlet_pairing(&self, u: &[BigRational], phi: &[BigRational]) -> BigRational {
        let integrand: Vec<BigRational> = (0..u.len())
            .map(|x| {
                if self.in_omega[x] {
                    self.gradient_form_at(u, phi, x)
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        self.integrate(&integrand)
    }

    /// `∫_Ω Δu · φ dm`.
    pub fn laplacian_pairing(&self, u: &[BigRational], phi: &[BigRational]) -> BigRational {
        let integrand: Vec<BigRational> = (0..u.len())
            .map(|x| {
                if self.in_omega[x] {
                    self.laplacian_at(u, x) * &phi[x]
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        self.integrate(&integrand)
    }
}
