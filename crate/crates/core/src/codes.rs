//! Pair encodings and codebooks.
//!
//! Each pair stores one logical bit: `0 ↦ (|01⟩+|10⟩)/√2` (exchange
//! symmetric) and `1 ↦ (|01⟩-|10⟩)/√2` (the singlet, odd under exchange).
//! Both have zero total `σz`, so every product of them is immune to
//! collective dephasing. A product with `m` singlets over `p` pairs is an
//! eigenstate of the uniform collective exchange `J Σ E_kk'` with eigenvalue
//! `J (p - 2m)`; codebooks draw all logical states from one weight class.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Amplitudes, LinearMap, LocalSum, StateVector, C64};
use crate::system::{h_ex_terms, Register};

/// Logical-amplitude normalization tolerance for user-supplied coefficients.
pub const COEFF_NORM_TOL: f64 = 1e-10;
/// Residual below which a state counts as an exchange eigenstate.
pub const EIGEN_TOL: f64 = 1e-10;

fn check_bit(bit: u8) -> Result<()> {
    if bit > 1 {
        return Err(Error::invalid(format!("pair bit {bit} is not 0 or 1")));
    }
    Ok(())
}

/// Two-qubit state encoding one logical pair bit.
pub fn encode_pair(bit: u8) -> Result<StateVector> {
    check_bit(bit)?;
    let sign = if bit == 0 { 1.0 } else { -1.0 };
    let h = FRAC_1_SQRT_2;
    let amps = Amplitudes::from_vec(vec![
        C64::new(0.0, 0.0),
        C64::new(h, 0.0),
        C64::new(sign * h, 0.0),
        C64::new(0.0, 0.0),
    ]);
    StateVector::new(amps, vec![2, 2])
}

/// Product of pair encodings, pair 0 first.
pub fn codeword_state(pair_bits: &[u8]) -> Result<StateVector> {
    let pairs = pair_bits.iter().map(|&b| encode_pair(b)).collect::<Result<Vec<_>>>()?;
    StateVector::product(&pairs)
}

fn check_normalized(coeffs: impl IntoIterator<Item = C64>) -> Result<()> {
    let norm_sqr: f64 = coeffs.into_iter().map(|c| c.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > COEFF_NORM_TOL {
        return Err(Error::NotNormalized(norm_sqr.sqrt()));
    }
    Ok(())
}

fn superpose(terms: &[(C64, StateVector)]) -> Result<StateVector> {
    let (_, first) = terms.first().ok_or_else(|| Error::invalid("empty superposition"))?;
    let dims = first.factor_dims().to_vec();
    let mut acc = Amplitudes::zeros(first.dim());
    for (c, s) in terms {
        acc += s.amplitudes() * *c;
    }
    StateVector::normalized(acc, dims)
}

/// `α|0_L⟩ + β|1_L⟩` with `|0_L⟩ = |0⟩_I|1⟩_II` and `|1_L⟩ = |1⟩_I|0⟩_II`
/// in pair-bit notation.
pub fn encode_one_qubit(alpha: C64, beta: C64) -> Result<StateVector> {
    check_normalized([alpha, beta])?;
    superpose(&[(alpha, codeword_state(&[0, 1])?), (beta, codeword_state(&[1, 0])?)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub pair_bits: Vec<u8>,
    /// Number of singlet pairs.
    pub weight: usize,
    pub state: StateVector,
}

impl Codeword {
    pub fn new(pair_bits: Vec<u8>) -> Result<Self> {
        let state = codeword_state(&pair_bits)?;
        let weight = pair_bits.iter().filter(|&&b| b == 1).count();
        Ok(Codeword { pair_bits, weight, state })
    }

    pub fn bitstring(&self) -> String {
        bits_to_string(&self.pair_bits)
    }
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::invalid(format!("`{s}` is not a bitstring"))),
        })
        .collect()
}

/// All weight-`m` pair-bit strings of length `n_pairs`, lexicographic.
pub fn weight_class(n_pairs: usize, m: usize) -> Result<Vec<Vec<u8>>> {
    if m > n_pairs {
        return Err(Error::invalid(format!("weight {m} exceeds {n_pairs} pairs")));
    }
    if n_pairs >= usize::BITS as usize {
        return Err(Error::invalid("too many pairs to enumerate"));
    }
    Ok((0..1usize << n_pairs)
        .filter(|v| v.count_ones() as usize == m)
        .map(|v| (0..n_pairs).map(|k| ((v >> (n_pairs - 1 - k)) & 1) as u8).collect())
        .collect())
}

/// Every weight-`m` codeword over `n_pairs` pairs, lexicographic.
pub fn codeword_basis(n_pairs: usize, m: usize) -> Result<Vec<Codeword>> {
    crate::linalg::register_dim(&vec![2; 2 * n_pairs])?;
    weight_class(n_pairs, m)?.into_iter().map(Codeword::new).collect()
}

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    // Each partial product is itself a binomial coefficient, so the division
    // is exact.
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Singlet count maximizing `C(n+2, m)`: `(n+1)/2` for odd `n`, `n/2+1` for even.
pub fn m_star(n: usize) -> usize {
    if n % 2 == 1 {
        n.div_ceil(2)
    } else {
        n / 2 + 1
    }
}

/// Largest `n` for which [`count_and_bounds`] is computed exactly.
pub const MAX_COUNT_N: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountBounds {
    pub n: usize,
    pub m_star: usize,
    /// `C(n+2, m_star)`.
    pub count: u128,
    pub log2_count: f64,
    /// `n < log2(count) < n+1`, decided in exact integer arithmetic.
    pub bounds_hold: bool,
    /// `2^n ≤ count`.
    pub sufficient: bool,
    /// `max_m C(n+1, m) < 2^n`.
    pub n_plus_1_insufficient: bool,
}

pub fn count_and_bounds(n: usize) -> Result<CountBounds> {
    if n == 0 || n > MAX_COUNT_N {
        return Err(Error::invalid(format!("n must lie in 1..={MAX_COUNT_N}, got {n}")));
    }
    let m = m_star(n);
    let count = binomial(n as u32 + 2, m as u32);
    let two_n = 1u128 << n;
    let best_with_one_less =
        (0..=n as u32 + 1).map(|k| binomial(n as u32 + 1, k)).max().unwrap_or(0);
    Ok(CountBounds {
        n,
        m_star: m,
        count,
        log2_count: (count as f64).log2(),
        bounds_hold: two_n < count && count < 2 * two_n,
        sufficient: two_n <= count,
        n_plus_1_insufficient: best_with_one_less < two_n,
    })
}

/// How `n` logical qubits are spread over pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// `n + 2` pairs, except one logical qubit, which uses the two-pair code.
    #[default]
    Standard,
    /// Always `n + 2` pairs.
    General,
}

/// Assignment of logical basis states to pair-bit strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    pub n_logical: usize,
    pub n_pairs: usize,
    pub m_star: usize,
    /// Entry `i` encodes the logical basis state whose bits spell `i`.
    pub logical_map: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct CodebookRecord {
    n: usize,
    n_pairs: usize,
    m_star: usize,
    logical_map: Vec<String>,
}

impl Serialize for Codebook {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CodebookRecord {
            n: self.n_logical,
            n_pairs: self.n_pairs,
            m_star: self.m_star,
            logical_map: self.logical_map.iter().map(|b| bits_to_string(b)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Codebook {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = CodebookRecord::deserialize(d)?;
        let logical_map = rec
            .logical_map
            .iter()
            .map(|s| parse_bits(s))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let book =
            Codebook { n_logical: rec.n, n_pairs: rec.n_pairs, m_star: rec.m_star, logical_map };
        book.validate().map_err(D::Error::custom)?;
        Ok(book)
    }
}

pub fn build_codebook(n: usize) -> Result<Codebook> {
    build_codebook_with(n, Construction::Standard)
}

pub fn build_codebook_with(n: usize, construction: Construction) -> Result<Codebook> {
    let bounds = count_and_bounds(n)?;
    let (n_pairs, m) = match (n, construction) {
        (1, Construction::Standard) => (2, 1),
        _ => (n + 2, bounds.m_star),
    };
    if n_pairs >= usize::BITS as usize / 2 {
        return Err(Error::CapExceeded { dim: usize::MAX, cap: crate::linalg::HILBERT_DIM_CAP });
    }
    let mut strings = weight_class(n_pairs, m)?;
    let needed = 1usize << n;
    if strings.len() < needed {
        return Err(Error::invalid(format!(
            "only {} weight-{m} codewords for {needed} logical states",
            strings.len()
        )));
    }
    strings.truncate(needed);
    Ok(Codebook { n_logical: n, n_pairs, m_star: m, logical_map: strings })
}

impl Codebook {
    pub fn validate(&self) -> Result<()> {
        if self.logical_map.len() != 1 << self.n_logical {
            return Err(Error::invalid("codebook size does not match 2^n"));
        }
        for (i, bits) in self.logical_map.iter().enumerate() {
            if bits.len() != self.n_pairs {
                return Err(Error::invalid("codeword length does not match pair count"));
            }
            if bits.iter().filter(|&&b| b == 1).count() != self.m_star {
                return Err(Error::invalid("codeword weight differs from m_star"));
            }
            if self.logical_map[..i].contains(bits) {
                return Err(Error::invalid("duplicate codeword"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.logical_map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logical_map.is_empty()
    }

    /// Logical basis label of entry `i`, e.g. `"01"`.
    pub fn logical_label(&self, i: usize) -> String {
        (0..self.n_logical)
            .map(|k| if (i >> (self.n_logical - 1 - k)) & 1 == 0 { '0' } else { '1' })
            .collect()
    }

    pub fn codewords(&self) -> Result<Vec<Codeword>> {
        self.logical_map.iter().cloned().map(Codeword::new).collect()
    }

    /// Common eigenvalue of every entry under `J Σ E_kk'`.
    pub fn exchange_eigenvalue(&self, j: f64) -> f64 {
        j * (self.n_pairs as f64 - 2.0 * self.m_star as f64)
    }
}

/// `Σ c_{i} |i⟩_L` over a codebook; keys are logical bitstrings.
pub fn encode_n_qubit(coeffs: &BTreeMap<String, C64>, codebook: &Codebook) -> Result<StateVector> {
    check_normalized(coeffs.values().copied())?;
    let mut terms = Vec::with_capacity(coeffs.len());
    for (label, &c) in coeffs {
        let bits = parse_bits(label)?;
        if bits.len() != codebook.n_logical {
            return Err(Error::invalid(format!(
                "label `{label}` does not have {} bits",
                codebook.n_logical
            )));
        }
        let index = bits.iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
        terms.push((c, codeword_state(&codebook.logical_map[index])?));
    }
    superpose(&terms)
}

/// Dense form: `coeffs[i]` multiplies logical basis state `i`.
pub fn encode_n_qubit_dense(coeffs: &[C64], codebook: &Codebook) -> Result<StateVector> {
    if coeffs.len() != codebook.len() {
        return Err(Error::DimensionMismatch { expected: codebook.len(), found: coeffs.len() });
    }
    let map = coeffs.iter().enumerate().map(|(i, &c)| (codebook.logical_label(i), c)).collect();
    encode_n_qubit(&map, codebook)
}

/// The four-qubit comparison code built from Bell pairs:
/// `(|00⟩+|11⟩)(|00⟩+|11⟩)/2` and `(|00⟩-|11⟩)(|00⟩-|11⟩)/2`.
pub fn vaidman_codewords() -> (StateVector, StateVector) {
    let bell = |sign: f64| {
        let amps = Amplitudes::from_vec(vec![
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(sign * FRAC_1_SQRT_2, 0.0),
        ]);
        StateVector::new(amps, vec![2, 2]).expect("normalized")
    };
    let zero = bell(1.0).kron(&bell(1.0)).expect("small");
    let one = bell(-1.0).kron(&bell(-1.0)).expect("small");
    (zero, one)
}

/// Computational components of the W-class state on `n` qubits: index 0 is
/// `|0…0⟩|1⟩`, index `i ≥ 1` has its single excitation on qubit `i`.
pub fn w_components(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::with_capacity(n);
    let mut last = vec![0u8; n];
    last[n - 1] = 1;
    out.push(last);
    for i in 0..n - 1 {
        let mut bits = vec![0u8; n];
        bits[i] = 1;
        out.push(bits);
    }
    out
}

/// Pairwise encoding of `α0|0…0⟩|1⟩ + Σ_i αi |…1_i…⟩|0⟩`, one ancilla per
/// qubit.
pub fn encode_w(alphas: &[C64]) -> Result<StateVector> {
    let n = alphas.len();
    if n < 3 {
        return Err(Error::invalid(format!("W encoding needs n ≥ 3 qubits, got {n}")));
    }
    check_normalized(alphas.iter().copied())?;
    let terms = w_components(n)
        .iter()
        .zip(alphas)
        .map(|(bits, &a)| Ok((a, codeword_state(bits)?)))
        .collect::<Result<Vec<_>>>()?;
    superpose(&terms)
}

pub fn complement(bits: &[u8]) -> Vec<u8> {
    bits.iter().map(|b| 1 - b).collect()
}

/// Pairwise encoding of `α|i1…in⟩ + β|ī1…īn⟩`.
pub fn encode_ghz(alpha: C64, beta: C64, bits: &[u8]) -> Result<StateVector> {
    if bits.is_empty() {
        return Err(Error::invalid("GHZ encoding needs at least one qubit"));
    }
    check_normalized([alpha, beta])?;
    superpose(&[(alpha, codeword_state(bits)?), (beta, codeword_state(&complement(bits))?)])
}

/// Relative phase `t Σ_k [(-1)^{i_k} - (-1)^{ī_k}] J_k` accumulated between
/// the two GHZ components under `Σ J_k E_kk'`.
pub fn ghz_phase(t: f64, j_list: &[f64], bits: &[u8]) -> Result<f64> {
    if j_list.len() != bits.len() {
        return Err(Error::DimensionMismatch { expected: bits.len(), found: j_list.len() });
    }
    bits.iter().try_for_each(|&b| check_bit(b))?;
    let parity = |b: u8| if b == 0 { 1.0 } else { -1.0 };
    Ok(t * bits.iter().zip(j_list).map(|(&b, &j)| (parity(b) - parity(1 - b)) * j).sum::<f64>())
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = phi.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Evolves the encoded GHZ state under `Σ J_k E_kk'` for time `t` and reads
/// the relative phase of the second component against the first, in
/// `(-π, π]`. Both amplitudes must be nonzero.
pub fn ghz_phase_numeric(
    alpha: C64,
    beta: C64,
    t: f64,
    j_list: &[f64],
    bits: &[u8],
) -> Result<f64> {
    if alpha.norm() < COEFF_NORM_TOL || beta.norm() < COEFF_NORM_TOL {
        return Err(Error::invalid("relative phase needs both GHZ amplitudes nonzero"));
    }
    let psi = encode_ghz(alpha, beta, bits)?;
    let h = h_ex_terms(&Register::data(bits.len())?, j_list)?;
    let evolved = h.evolve_commuting(&psi, t)?;
    let first = codeword_state(bits)?.inner(&evolved)? / alpha;
    let second = codeword_state(&complement(bits))?.inner(&evolved)? / beta;
    Ok(wrap_phase((second / first).arg()))
}

/// Uniform collective exchange `J Σ_k E_kk'` on `n_pairs` bare pairs.
pub fn uniform_h_ex(n_pairs: usize, j: f64) -> Result<LocalSum> {
    h_ex_terms(&Register::data(n_pairs)?, &vec![j; n_pairs])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigencheck {
    pub is_eigenstate: bool,
    /// `⟨ψ|H|ψ⟩`.
    pub eigenvalue: f64,
    /// `‖Hψ - ⟨H⟩ψ‖`.
    pub residual: f64,
}

pub fn exchange_eigencheck<H: LinearMap + ?Sized>(
    psi: &StateVector,
    h_ex: &H,
) -> Result<Eigencheck> {
    if psi.dim() != h_ex.dim() {
        return Err(Error::DimensionMismatch { expected: h_ex.dim(), found: psi.dim() });
    }
    let v = psi.amplitudes();
    let hv = h_ex.apply(v);
    let eigenvalue = v.dotc(&hv).re;
    let residual = (hv - v * C64::new(eigenvalue, 0.0)).norm();
    Ok(Eigencheck { is_eigenstate: residual <= EIGEN_TOL, eigenvalue, residual })
}
