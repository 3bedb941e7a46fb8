//! Finite-dimensional environments: free Hamiltonian, per-pair coupling
//! operators and the initial environment state.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{embed, Operator, StateVector, C64, HILBERT_DIM_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathModel {
    /// Truncated oscillator: `V+ = a`, `Vz = a†a`, `H_B = ω a†a`.
    Ladder,
    /// Seeded random operators scaled to unit spectral norm.
    RandomHermitian,
    /// No environment; all couplings vanish.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathSpec {
    /// Levels per environment register.
    pub dim: usize,
    pub model: BathModel,
    pub omega: f64,
    pub seed: u64,
    /// Every pair couples through the same operators (imperfect collective
    /// decoherence) instead of independent ones.
    pub shared: bool,
}

impl Default for BathSpec {
    fn default() -> Self {
        BathSpec { dim: 2, model: BathModel::Ladder, omega: 1.0, seed: 0, shared: false }
    }
}

impl BathSpec {
    pub fn none() -> Self {
        BathSpec { dim: 1, model: BathModel::None, omega: 0.0, seed: 0, shared: true }
    }

    pub fn validate(&self) -> Result<()> {
        match self.model {
            BathModel::None if self.dim != 1 => {
                Err(Error::invalid("bath model `none` requires dim = 1"))
            }
            BathModel::Ladder | BathModel::RandomHermitian if self.dim < 2 => {
                Err(Error::invalid("bath dim must be at least 2"))
            }
            _ if !self.omega.is_finite() => Err(Error::invalid("bath omega must be finite")),
            _ => Ok(()),
        }
    }

    /// Total environment dimension when coupled to `n_pairs` pairs.
    pub fn total_dim(&self, n_pairs: usize) -> Result<usize> {
        self.validate()?;
        if self.model == BathModel::Ladder && !self.shared {
            let regs = n_pairs.max(1);
            let dim = u32::try_from(regs)
                .ok()
                .and_then(|r| self.dim.checked_pow(r))
                .unwrap_or(usize::MAX);
            if dim > HILBERT_DIM_CAP {
                return Err(Error::CapExceeded { dim, cap: HILBERT_DIM_CAP });
            }
            Ok(dim)
        } else if self.dim > HILBERT_DIM_CAP {
            Err(Error::CapExceeded { dim: self.dim, cap: HILBERT_DIM_CAP })
        } else {
            Ok(self.dim)
        }
    }
}

/// Environment operators one pair couples through. The lowering-side
/// partner is `v_plus†`.
#[derive(Debug, Clone)]
pub struct PairCoupling {
    pub v_z: Operator,
    pub v_plus: Operator,
}

impl PairCoupling {
    pub fn v_minus(&self) -> Operator {
        self.v_plus.adjoint()
    }
}

#[derive(Debug, Clone)]
pub struct BathOps {
    pub h_b: Operator,
    /// One entry per pair.
    pub couplings: Vec<PairCoupling>,
    pub psi_b0: StateVector,
}

impl BathOps {
    pub fn dim(&self) -> usize {
        self.h_b.dim()
    }
}

/// Lowering operator of a `d`-level ladder in (ground, excited, ...) order.
pub fn lowering(d: usize) -> Operator {
    let mut m = DMatrix::<C64>::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::new(m).expect("square")
}

pub fn number(d: usize) -> Operator {
    let diag: Vec<C64> = (0..d).map(|n| C64::new(n as f64, 0.0)).collect();
    Operator::diagonal(&diag)
}

fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

fn unit_norm(m: DMatrix<C64>) -> DMatrix<C64> {
    let s = spectral_norm(&m);
    if s > 0.0 {
        m.unscale(s)
    } else {
        m
    }
}

fn random_operator(rng: &mut ChaCha8Rng, d: usize) -> Result<Operator> {
    Operator::new(unit_norm(gaussian_matrix(rng, d)))
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> Result<Operator> {
    let g = gaussian_matrix(rng, d);
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    Operator::hermitian(unit_norm(h))
}

/// Builds the environment for `n_pairs` pairs.
pub fn bath_ops(spec: &BathSpec, n_pairs: usize) -> Result<BathOps> {
    let dim = spec.total_dim(n_pairs)?;
    let psi_b0 = StateVector::basis(0, vec![dim])?;
    match spec.model {
        BathModel::None => {
            let zero = PairCoupling { v_z: Operator::zeros(1), v_plus: Operator::zeros(1) };
            Ok(BathOps { h_b: Operator::zeros(1), couplings: vec![zero; n_pairs], psi_b0 })
        }
        BathModel::Ladder => {
            let d = spec.dim;
            let (a, n) = (lowering(d), number(d));
            if spec.shared {
                let coupling = PairCoupling { v_z: n.clone(), v_plus: a };
                let h_b = n.scale(C64::new(spec.omega, 0.0));
                return Ok(BathOps { h_b, couplings: vec![coupling; n_pairs], psi_b0 });
            }
            let regs = vec![d; n_pairs.max(1)];
            let mut h_b = Operator::zeros(dim);
            let mut couplings = Vec::with_capacity(n_pairs);
            for k in 0..regs.len() {
                let nk = embed(&n, &[k], &regs)?;
                h_b = h_b.add(&nk.scale(C64::new(spec.omega, 0.0)))?;
                if k < n_pairs {
                    couplings.push(PairCoupling { v_z: nk, v_plus: embed(&a, &[k], &regs)? });
                }
            }
            Ok(BathOps { h_b, couplings, psi_b0 })
        }
        BathModel::RandomHermitian => {
            let d = spec.dim;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let h_b = random_hermitian(&mut rng, d)?.scale(C64::new(spec.omega, 0.0));
            let mut draw = || -> Result<PairCoupling> {
                let v_plus = random_operator(&mut rng, d)?;
                let v_z = random_hermitian(&mut rng, d)?;
                Ok(PairCoupling { v_z, v_plus })
            };
            let couplings = if spec.shared {
                vec![draw()?; n_pairs]
            } else {
                (0..n_pairs).map(|_| draw()).collect::<Result<_>>()?
            };
            Ok(BathOps { h_b, couplings, psi_b0 })
        }
    }
}
