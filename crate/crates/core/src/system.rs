//! Qubit registers organized in pairs, the Pauli and exchange operators that
//! act on them, and the compiled total Hamiltonian
//! `H = H_S + H_B + H_SB + H_EX`.
//!
//! Pauli convention used throughout the crate:
//! `σz|0⟩ = -|0⟩`, `σz|1⟩ = +|1⟩`, `σ+|0⟩ = |1⟩`.

use serde::{Deserialize, Serialize};

use crate::bath::{BathOps, BathSpec};
use crate::error::{Error, Result};
use crate::linalg::{embed, kron, LocalSum, Operator, C64};

/// Qubit labels grouped into pairs, plus an optional test qubit.
///
/// Labels are free-form identifiers. The register factor order is fixed by
/// the layout: pair 0's two qubits, pair 1's two qubits, ..., then the test
/// qubit, then the environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairLayout {
    pairs: Vec<(usize, usize)>,
    test_qubit: Option<usize>,
}

impl PairLayout {
    pub fn new(pairs: Vec<(usize, usize)>, test_qubit: Option<usize>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("a layout needs at least one pair"));
        }
        let mut seen: Vec<usize> = Vec::new();
        for &q in pairs.iter().flat_map(|(a, b)| [a, b]).chain(test_qubit.iter()) {
            if seen.contains(&q) {
                return Err(Error::invalid(format!("qubit label {q} used twice")));
            }
            seen.push(q);
        }
        Ok(PairLayout { pairs, test_qubit })
    }

    /// Pairs `(0,1), (2,3), ...` with the test qubit labelled `2 n_pairs`.
    pub fn standard(n_pairs: usize, with_test: bool) -> Result<Self> {
        let pairs = (0..n_pairs).map(|k| (2 * k, 2 * k + 1)).collect();
        Self::new(pairs, with_test.then_some(2 * n_pairs))
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn test_qubit(&self) -> Option<usize> {
        self.test_qubit
    }

    pub fn n_data_qubits(&self) -> usize {
        2 * self.pairs.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_data_qubits() + usize::from(self.test_qubit.is_some())
    }

    pub fn pair_factors(&self, pair: usize) -> Result<(usize, usize)> {
        if pair >= self.pairs.len() {
            return Err(Error::SiteOutOfRange { index: pair, factors: self.pairs.len() });
        }
        Ok((2 * pair, 2 * pair + 1))
    }

    pub fn test_factor(&self) -> Option<usize> {
        self.test_qubit.map(|_| self.n_data_qubits())
    }

    pub fn data_factors(&self) -> Vec<usize> {
        (0..self.n_data_qubits()).collect()
    }

    /// Register factor holding the qubit with this label.
    pub fn factor_of(&self, label: usize) -> Option<usize> {
        self.pairs
            .iter()
            .enumerate()
            .find_map(|(k, &(a, b))| {
                (a == label).then_some(2 * k).or((b == label).then_some(2 * k + 1))
            })
            .or_else(|| (self.test_qubit == Some(label)).then(|| self.n_data_qubits()))
    }

    /// The same pairs without a test qubit.
    pub fn without_test(&self) -> PairLayout {
        PairLayout { pairs: self.pairs.clone(), test_qubit: None }
    }
}

/// A layout together with the environment dimension (if any).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    layout: PairLayout,
    bath_dim: Option<usize>,
}

impl Register {
    pub fn new(layout: PairLayout, bath_dim: Option<usize>) -> Self {
        Register { layout, bath_dim }
    }

    /// Data qubits only, the register codewords live on.
    pub fn data(n_pairs: usize) -> Result<Self> {
        Ok(Register { layout: PairLayout::standard(n_pairs, false)?, bath_dim: None })
    }

    pub fn layout(&self) -> &PairLayout {
        &self.layout
    }

    pub fn bath_factor(&self) -> Option<usize> {
        self.bath_dim.map(|_| self.layout.n_qubits())
    }

    pub fn bath_dim(&self) -> Option<usize> {
        self.bath_dim
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = vec![2; self.layout.n_qubits()];
        dims.extend(self.bath_dim);
        dims
    }

    pub fn dim(&self) -> usize {
        self.factor_dims().iter().product()
    }
}

// ---------------------------------------------------------------------------
// Single- and two-qubit operators

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn sigma_z() -> Operator {
    Operator::diagonal(&[c(-1.0), c(1.0)])
}

/// Raising operator, `σ+|0⟩ = |1⟩`.
pub fn sigma_plus() -> Operator {
    Operator::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).expect("2x2")
}

pub fn sigma_minus() -> Operator {
    sigma_plus().adjoint()
}

fn real_involution(rows: &[&[f64]]) -> Operator {
    let m = Operator::from_real_rows(rows).expect("square").into_matrix();
    Operator::checked(m, true, true).expect("real symmetric permutation")
}

pub fn pauli_x() -> Operator {
    real_involution(&[&[0.0, 1.0], &[1.0, 0.0]])
}

/// Two-qubit exchange `|ab⟩ → |ba⟩`.
pub fn swap() -> Operator {
    real_involution(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
}

/// Controlled-NOT with the first qubit as control.
pub fn cnot() -> Operator {
    real_involution(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PauliComponent {
    Z,
    Plus,
    Minus,
}

impl PauliComponent {
    fn local(self) -> Operator {
        match self {
            PauliComponent::Z => sigma_z(),
            PauliComponent::Plus => sigma_plus(),
            PauliComponent::Minus => sigma_minus(),
        }
    }
}

/// `σ^j_a + σ^j_b` on the two qubits of `pair`, as a matrix-free sum.
pub fn pair_sigma_terms(
    reg: &Register,
    pair: usize,
    component: PauliComponent,
) -> Result<LocalSum> {
    let (a, b) = reg.layout.pair_factors(pair)?;
    let mut sum = LocalSum::new(reg.factor_dims())?;
    sum.push(c(1.0), component.local(), vec![a])?;
    sum.push(c(1.0), component.local(), vec![b])?;
    Ok(sum)
}

pub fn pair_sigma(reg: &Register, pair: usize, component: PauliComponent) -> Result<Operator> {
    let sum = pair_sigma_terms(reg, pair, component)?;
    match component {
        PauliComponent::Z => sum.to_hermitian(),
        _ => sum.to_operator(),
    }
}

/// The exchange `E_kk'` on `pair`, identity elsewhere.
pub fn exchange_op(reg: &Register, pair: usize) -> Result<Operator> {
    let (a, b) = reg.layout.pair_factors(pair)?;
    embed(&swap(), &[a, b], &reg.factor_dims())
}

/// `Σ_k J_k E_kk'` as a matrix-free sum.
pub fn h_ex_terms(reg: &Register, j_per_pair: &[f64]) -> Result<LocalSum> {
    if j_per_pair.len() != reg.layout.n_pairs() {
        return Err(Error::DimensionMismatch {
            expected: reg.layout.n_pairs(),
            found: j_per_pair.len(),
        });
    }
    let mut sum = LocalSum::new(reg.factor_dims())?;
    for (k, &j) in j_per_pair.iter().enumerate() {
        let (a, b) = reg.layout.pair_factors(k)?;
        sum.push(c(j), swap(), vec![a, b])?;
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// Hamiltonian specification

/// Which parts of `H_S + H_B + H_SB + H_EX` are compiled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TermFlags {
    pub system: bool,
    pub bath: bool,
    pub interaction: bool,
    pub exchange: bool,
}

impl Default for TermFlags {
    fn default() -> Self {
        TermFlags { system: true, bath: true, interaction: true, exchange: true }
    }
}

impl TermFlags {
    pub fn none() -> Self {
        TermFlags { system: false, bath: false, interaction: false, exchange: false }
    }
}

/// Scalar couplings of the pair Hamiltonian. The lowering coupling of each
/// pair is `conj(lambda_plus)` with environment operator `V+†`, which keeps
/// `H_SB` hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub epsilon0: f64,
    pub lambda_z: Vec<f64>,
    pub lambda_plus: Vec<C64>,
    pub j_per_pair: Vec<f64>,
    pub bath: BathSpec,
    pub terms: TermFlags,
}

impl HamiltonianSpec {
    /// Weak-coupling defaults: ε0 = 1, λz = 0.3, λ+ = 0.1, J = 0.5, two-level
    /// ladder environment per pair with ω = 1.
    pub fn desk_scale(n_pairs: usize) -> Self {
        HamiltonianSpec {
            epsilon0: 1.0,
            lambda_z: vec![0.3; n_pairs],
            lambda_plus: vec![c(0.1); n_pairs],
            j_per_pair: vec![0.5; n_pairs],
            bath: BathSpec::default(),
            terms: TermFlags::default(),
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.j_per_pair.len()
    }

    pub fn validate(&self, n_pairs: usize) -> Result<()> {
        for (name, len) in [
            ("lambda_z", self.lambda_z.len()),
            ("lambda_plus", self.lambda_plus.len()),
            ("j_per_pair", self.j_per_pair.len()),
        ] {
            if len != n_pairs {
                return Err(Error::invalid(format!(
                    "{name} has {len} entries but the layout has {n_pairs} pairs"
                )));
            }
        }
        let finite = self.epsilon0.is_finite()
            && self.lambda_z.iter().all(|v| v.is_finite())
            && self.lambda_plus.iter().all(|v| v.is_finite())
            && self.j_per_pair.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("couplings must be finite"));
        }
        self.bath.validate()
    }
}

pub fn h_s_terms(spec: &HamiltonianSpec, reg: &Register) -> Result<LocalSum> {
    let mut sum = LocalSum::new(reg.factor_dims())?;
    for k in 0..reg.layout.n_pairs() {
        let (a, b) = reg.layout.pair_factors(k)?;
        sum.push(c(spec.epsilon0), sigma_z(), vec![a])?;
        sum.push(c(spec.epsilon0), sigma_z(), vec![b])?;
    }
    Ok(sum)
}

fn bath_site(reg: &Register, bath: &BathOps) -> Result<usize> {
    match (reg.bath_factor(), reg.bath_dim()) {
        (Some(site), Some(d)) if d == bath.dim() => Ok(site),
        (_, d) => Err(Error::DimensionMismatch { expected: bath.dim(), found: d.unwrap_or(0) }),
    }
}

pub fn h_sb_terms(spec: &HamiltonianSpec, reg: &Register, bath: &BathOps) -> Result<LocalSum> {
    let site = bath_site(reg, bath)?;
    let n_pairs = reg.layout.n_pairs();
    spec.validate(n_pairs)?;
    if bath.couplings.len() != n_pairs {
        return Err(Error::DimensionMismatch { expected: n_pairs, found: bath.couplings.len() });
    }
    let mut sum = LocalSum::new(reg.factor_dims())?;
    for (k, coupling) in bath.couplings.iter().enumerate() {
        let (a, b) = reg.layout.pair_factors(k)?;
        let lp = spec.lambda_plus[k];
        let parts = [
            (c(spec.lambda_z[k]), kron(&sigma_z(), &coupling.v_z)),
            (lp, kron(&sigma_plus(), &coupling.v_plus)),
            (lp.conj(), kron(&sigma_minus(), &coupling.v_minus())),
        ];
        for (coeff, local) in parts {
            sum.push(coeff, local.clone(), vec![a, site])?;
            sum.push(coeff, local, vec![b, site])?;
        }
    }
    Ok(sum)
}

pub fn h_b_terms(reg: &Register, bath: &BathOps) -> Result<LocalSum> {
    let site = bath_site(reg, bath)?;
    let mut sum = LocalSum::new(reg.factor_dims())?;
    sum.push(c(1.0), bath.h_b.clone(), vec![site])?;
    Ok(sum)
}

pub fn build_h_ex(spec: &HamiltonianSpec, reg: &Register) -> Result<Operator> {
    h_ex_terms(reg, &spec.j_per_pair)?.to_hermitian()
}

pub fn build_h_s(spec: &HamiltonianSpec, reg: &Register) -> Result<Operator> {
    h_s_terms(spec, reg)?.to_hermitian()
}

pub fn build_h_sb(spec: &HamiltonianSpec, reg: &Register, bath: &BathOps) -> Result<Operator> {
    h_sb_terms(spec, reg, bath)?.to_hermitian()
}

pub fn build_h_b(reg: &Register, bath: &BathOps) -> Result<Operator> {
    h_b_terms(reg, bath)?.to_hermitian()
}

/// Matrix-free sum of the terms selected by `spec.terms`.
pub fn h_total_terms(spec: &HamiltonianSpec, reg: &Register, bath: &BathOps) -> Result<LocalSum> {
    spec.validate(reg.layout.n_pairs())?;
    let mut sum = LocalSum::new(reg.factor_dims())?;
    if spec.terms.system {
        sum.extend(h_s_terms(spec, reg)?)?;
    }
    if spec.terms.bath {
        sum.extend(h_b_terms(reg, bath)?)?;
    }
    if spec.terms.interaction {
        sum.extend(h_sb_terms(spec, reg, bath)?)?;
    }
    if spec.terms.exchange {
        sum.extend(h_ex_terms(reg, &spec.j_per_pair)?)?;
    }
    Ok(sum)
}

pub fn build_h_total(spec: &HamiltonianSpec, reg: &Register, bath: &BathOps) -> Result<Operator> {
    h_total_terms(spec, reg, bath)?.to_hermitian()
}
