//! Dense complex linear algebra on tensor-product registers.
//!
//! A register is described by its `factor_dims`: factor 0 is the most
//! significant digit of a basis index, matching the usual Kronecker ordering.
//! Everything that addresses a subsystem does so by factor index.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Raw amplitude vector, not necessarily normalized.
pub type Amplitudes = DVector<C64>;

/// Allowed deviation of a stored state's norm from 1.
pub const NORM_TOL: f64 = 1e-12;
/// Allowed entrywise deviation of `M - M†` for hermitian operators.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed entrywise deviation of `M†M - I` for unitary operators.
pub const UNITARY_TOL: f64 = 1e-10;
/// Measurement branches below this probability carry no post-state.
pub const ZERO_BRANCH_TOL: f64 = 1e-14;
/// Largest Hilbert space a state vector may span.
pub const HILBERT_DIM_CAP: usize = 1 << 16;
/// Largest dimension for which dense operators are materialized.
pub const DENSE_DIM_CAP: usize = 1 << 12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

fn checked_dim(factor_dims: &[usize], cap: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for &d in factor_dims {
        if d == 0 {
            return Err(Error::invalid("factor dimensions must be positive"));
        }
        dim = dim
            .checked_mul(d)
            .filter(|&v| v <= cap)
            .ok_or(Error::CapExceeded { dim: usize::MAX, cap })?;
    }
    Ok(dim)
}

/// Total dimension of a register, subject to [`HILBERT_DIM_CAP`].
pub fn register_dim(factor_dims: &[usize]) -> Result<usize> {
    let dim =
        factor_dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
    if dim > HILBERT_DIM_CAP {
        return Err(Error::CapExceeded { dim, cap: HILBERT_DIM_CAP });
    }
    checked_dim(factor_dims, HILBERT_DIM_CAP)
}

fn strides(factor_dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; factor_dims.len()];
    for k in (0..factor_dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * factor_dims[k + 1];
    }
    strides
}

/// Label of a basis index as one digit per factor, e.g. `0110` for qubits.
/// Factors wider than ten levels are bracketed.
pub fn basis_label(index: usize, factor_dims: &[usize]) -> String {
    let st = strides(factor_dims);
    let mut out = String::new();
    for (k, &d) in factor_dims.iter().enumerate() {
        let digit = (index / st[k]) % d;
        if d <= 10 {
            out.push(char::from_digit(digit as u32, 10).unwrap());
        } else {
            out.push_str(&format!("[{digit}]"));
        }
    }
    out
}

/// Index bookkeeping for an operator acting on a subset of factors.
///
/// `offsets[l]` is the full-register offset of local basis state `l`, and
/// `bases` enumerates every full index whose selected digits are all zero.
/// Every full index is uniquely `bases[e] + offsets[l]`.
#[derive(Debug, Clone)]
pub(crate) struct SiteMap {
    pub offsets: Vec<usize>,
    pub bases: Vec<usize>,
}

impl SiteMap {
    pub fn new(sites: &[usize], factor_dims: &[usize]) -> Result<Self> {
        let n = factor_dims.len();
        for (i, &s) in sites.iter().enumerate() {
            if s >= n {
                return Err(Error::SiteOutOfRange { index: s, factors: n });
            }
            if sites[..i].contains(&s) {
                return Err(Error::DuplicateSite(s));
            }
        }
        let full = register_dim(factor_dims)?;
        let st = strides(factor_dims);
        let local_dims: Vec<usize> = sites.iter().map(|&s| factor_dims[s]).collect();
        let local: usize = local_dims.iter().product();
        let local_st = strides(&local_dims);

        let offsets = (0..local)
            .map(|l| {
                sites
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| ((l / local_st[i]) % local_dims[i]) * st[s])
                    .sum()
            })
            .collect();
        let bases = (0..full)
            .filter(|&idx| sites.iter().all(|&s| (idx / st[s]).is_multiple_of(factor_dims[s])))
            .collect();
        Ok(SiteMap { offsets, bases })
    }

    pub fn local_dim(&self) -> usize {
        self.offsets.len()
    }
}

// ---------------------------------------------------------------------------
// States

/// A unit-norm pure state on a tensor-product register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Amplitudes,
    factor_dims: Vec<usize>,
}

impl StateVector {
    /// Wraps amplitudes that must already be normalized within [`NORM_TOL`].
    pub fn new(amps: Amplitudes, factor_dims: Vec<usize>) -> Result<Self> {
        let dim = register_dim(&factor_dims)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amps.len() });
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector { amps, factor_dims })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amps: Amplitudes, factor_dims: Vec<usize>) -> Result<Self> {
        let norm = amps.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amps.unscale(norm), factor_dims)
    }

    pub fn basis(index: usize, factor_dims: Vec<usize>) -> Result<Self> {
        let dim = register_dim(&factor_dims)?;
        if index >= dim {
            return Err(Error::SiteOutOfRange { index, factors: dim });
        }
        let mut amps = Amplitudes::zeros(dim);
        amps[index] = ONE;
        Ok(StateVector { amps, factor_dims })
    }

    /// Computational basis state of qubits, most significant first.
    pub fn qubits(bits: &[u8]) -> Result<Self> {
        let index = bits.iter().try_fold(0usize, |acc, &b| match b {
            0 | 1 => Ok(acc * 2 + b as usize),
            _ => Err(Error::invalid(format!("qubit value {b} is not 0 or 1"))),
        })?;
        Self::basis(index, vec![2; bits.len()])
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        register_dim(&dims)?;
        let amps = self.amps.kronecker(&other.amps);
        Ok(StateVector { amps, factor_dims: dims })
    }

    pub fn product(states: &[StateVector]) -> Result<StateVector> {
        let (first, rest) =
            states.split_first().ok_or_else(|| Error::invalid("empty tensor product"))?;
        rest.iter().try_fold(first.clone(), |acc, s| acc.kron(s))
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn amplitudes(&self) -> &Amplitudes {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Amplitudes {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        inner(&self.amps, &other.amps)
    }
}

/// `⟨a|b⟩` for raw amplitude vectors.
pub fn inner(a: &Amplitudes, b: &Amplitudes) -> Result<C64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(a.dotc(b))
}

// ---------------------------------------------------------------------------
// Operators

/// Anything that maps amplitude vectors linearly.
pub trait LinearMap {
    fn dim(&self) -> usize;
    fn apply(&self, v: &Amplitudes) -> Amplitudes;
}

/// Dense square complex matrix with optional, checked structure flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
    hermitian: bool,
    unitary: bool,
}

impl Operator {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        if mat.nrows() > DENSE_DIM_CAP {
            return Err(Error::CapExceeded { dim: mat.nrows(), cap: DENSE_DIM_CAP });
        }
        Ok(Operator { mat, hermitian: false, unitary: false })
    }

    /// Wraps a matrix and asserts hermiticity within [`HERMITIAN_TOL`].
    pub fn hermitian(mat: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::new(mat)?;
        let dev = op.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        op.hermitian = true;
        Ok(op)
    }

    /// Wraps a matrix and asserts unitarity within [`UNITARY_TOL`].
    pub fn unitary(mat: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::new(mat)?;
        let dev = op.unitary_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        op.unitary = true;
        Ok(op)
    }

    /// Wraps a matrix, asserting each requested structure flag.
    pub fn checked(mat: DMatrix<C64>, hermitian: bool, unitary: bool) -> Result<Self> {
        let mut op = Self::new(mat)?;
        if hermitian {
            op = Self::hermitian(op.mat)?;
        }
        if unitary {
            let dev = op.unitary_deviation();
            if dev > UNITARY_TOL {
                return Err(Error::NotUnitary(dev));
            }
            op.unitary = true;
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Operator { mat: DMatrix::identity(dim, dim), hermitian: true, unitary: true }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator { mat: DMatrix::zeros(dim, dim), hermitian: true, unitary: false }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows must form a square"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mat = DMatrix::from_diagonal(&DVector::from_column_slice(entries));
        let hermitian = entries.iter().all(|e| e.im == 0.0);
        let unitary = entries.iter().all(|e| (e.norm() - 1.0).abs() <= UNITARY_TOL);
        Operator { mat, hermitian, unitary }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.mat - self.mat.adjoint()))
    }

    pub fn unitary_deviation(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.mat.adjoint() * &self.mat - DMatrix::<C64>::identity(n, n)))
    }

    pub fn adjoint(&self) -> Operator {
        Operator { mat: self.mat.adjoint(), hermitian: self.hermitian, unitary: self.unitary }
    }

    /// `c · self`; hermiticity survives real scalars, unitarity unit-modulus ones.
    pub fn scale(&self, c: C64) -> Operator {
        Operator {
            mat: &self.mat * c,
            hermitian: self.hermitian && c.im == 0.0,
            unitary: self.unitary && (c.norm() - 1.0).abs() <= UNITARY_TOL,
        }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.same_dim(other)?;
        Ok(Operator {
            mat: &self.mat + &other.mat,
            hermitian: self.hermitian && other.hermitian,
            unitary: false,
        })
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.same_dim(other)?;
        Ok(Operator {
            mat: &self.mat * &other.mat,
            hermitian: false,
            unitary: self.unitary && other.unitary,
        })
    }

    /// `self · ψ` as raw amplitudes.
    pub fn act(&self, psi: &StateVector) -> Result<Amplitudes> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        Ok(&self.mat * psi.amplitudes())
    }

    /// `self · ψ` for a unitary `self`, keeping the state wrapper.
    pub fn evolve(&self, psi: &StateVector) -> Result<StateVector> {
        if !self.unitary {
            return Err(Error::NotUnitary(self.unitary_deviation()));
        }
        let amps = self.act(psi)?;
        StateVector::normalized(amps, psi.factor_dims().to_vec())
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.same_dim(other)?;
        Ok(max_abs(&(&self.mat - &other.mat)))
    }

    fn same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

impl LinearMap for Operator {
    fn dim(&self) -> usize {
        Operator::dim(self)
    }

    fn apply(&self, v: &Amplitudes) -> Amplitudes {
        &self.mat * v
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator {
        mat: a.mat.kronecker(&b.mat),
        hermitian: a.hermitian && b.hermitian,
        unitary: a.unitary && b.unitary,
    }
}

/// Lifts `local` to the full register, acting on `sites` (in the given
/// order, adjacent or not) and as the identity on every other factor.
pub fn embed(local: &Operator, sites: &[usize], factor_dims: &[usize]) -> Result<Operator> {
    let map = SiteMap::new(sites, factor_dims)?;
    if map.local_dim() != local.dim() {
        return Err(Error::DimensionMismatch { expected: map.local_dim(), found: local.dim() });
    }
    let full = register_dim(factor_dims)?;
    if full > DENSE_DIM_CAP {
        return Err(Error::CapExceeded { dim: full, cap: DENSE_DIM_CAP });
    }
    let mut mat = DMatrix::<C64>::zeros(full, full);
    for &base in &map.bases {
        for (lc, &oc) in map.offsets.iter().enumerate() {
            for (lr, &or) in map.offsets.iter().enumerate() {
                mat[(base + or, base + oc)] = local.mat[(lr, lc)];
            }
        }
    }
    Ok(Operator { mat, hermitian: local.hermitian, unitary: local.unitary })
}

fn apply_mapped(
    local: &DMatrix<C64>,
    map: &SiteMap,
    coeff: C64,
    v: &Amplitudes,
    out: &mut Amplitudes,
) {
    let ld = map.local_dim();
    let mut x = vec![ZERO; ld];
    for &base in &map.bases {
        let mut any = false;
        for (l, &o) in map.offsets.iter().enumerate() {
            x[l] = v[base + o];
            any |= x[l] != ZERO;
        }
        if !any {
            continue;
        }
        for (lr, &or) in map.offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (lc, xc) in x.iter().enumerate() {
                acc += local[(lr, lc)] * xc;
            }
            out[base + or] += coeff * acc;
        }
    }
}

/// Applies `local` on `sites` to a full-register vector without building the
/// full matrix.
pub fn apply_local(
    local: &Operator,
    sites: &[usize],
    factor_dims: &[usize],
    v: &Amplitudes,
) -> Result<Amplitudes> {
    let map = SiteMap::new(sites, factor_dims)?;
    if map.local_dim() != local.dim() {
        return Err(Error::DimensionMismatch { expected: map.local_dim(), found: local.dim() });
    }
    let full = register_dim(factor_dims)?;
    if v.len() != full {
        return Err(Error::DimensionMismatch { expected: full, found: v.len() });
    }
    let mut out = Amplitudes::zeros(full);
    apply_mapped(&local.mat, &map, ONE, v, &mut out);
    Ok(out)
}

/// One `coeff · local` term of a [`LocalSum`].
#[derive(Debug, Clone)]
pub struct LocalTerm {
    pub coeff: C64,
    pub local: Operator,
    pub sites: Vec<usize>,
    map: SiteMap,
}

/// Matrix-free sum of few-body terms on a register. Used where the register
/// is too large for dense operators.
#[derive(Debug, Clone)]
pub struct LocalSum {
    factor_dims: Vec<usize>,
    dim: usize,
    terms: Vec<LocalTerm>,
}

impl LocalSum {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        let dim = register_dim(&factor_dims)?;
        Ok(LocalSum { factor_dims, dim, terms: Vec::new() })
    }

    pub fn push(&mut self, coeff: C64, local: Operator, sites: Vec<usize>) -> Result<()> {
        let map = SiteMap::new(&sites, &self.factor_dims)?;
        if map.local_dim() != local.dim() {
            return Err(Error::DimensionMismatch { expected: map.local_dim(), found: local.dim() });
        }
        self.terms.push(LocalTerm { coeff, local, sites, map });
        Ok(())
    }

    pub fn extend(&mut self, other: LocalSum) -> Result<()> {
        if other.factor_dims != self.factor_dims {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        self.terms.extend(other.terms);
        Ok(())
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    /// Dense matrix of the sum, without structure flags.
    pub fn to_operator(&self) -> Result<Operator> {
        let mut acc = Operator::new(DMatrix::zeros(self.dim, self.dim))?;
        for t in &self.terms {
            let full = embed(&t.local, &t.sites, &self.factor_dims)?;
            acc.mat += full.mat * t.coeff;
        }
        Ok(acc)
    }

    /// Dense matrix of the sum, checked hermitian.
    pub fn to_hermitian(&self) -> Result<Operator> {
        Operator::hermitian(self.to_operator()?.mat)
    }

    /// Exact `exp(-i t Σ terms) ψ` for terms on pairwise disjoint sites, each
    /// hermitian with a real coefficient. Disjoint terms commute, so the
    /// exponential factorizes into local exponentials.
    pub fn evolve_commuting(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.factor_dims() != self.factor_dims.as_slice() {
            return Err(Error::DimensionMismatch { expected: self.dim, found: psi.dim() });
        }
        for (i, a) in self.terms.iter().enumerate() {
            if self.terms[..i].iter().any(|b| b.sites.iter().any(|s| a.sites.contains(s))) {
                return Err(Error::invalid("terms act on overlapping sites"));
            }
        }
        let mut amps = psi.amplitudes().clone();
        for term in &self.terms {
            if term.coeff.im != 0.0 {
                return Err(Error::NotHermitian(term.coeff.im.abs()));
            }
            let u = expm_hermitian(&term.local.scale(term.coeff), t)?;
            let mut out = Amplitudes::zeros(self.dim);
            apply_mapped(&u.mat, &term.map, ONE, &amps, &mut out);
            amps = out;
        }
        StateVector::normalized(amps, self.factor_dims.clone())
    }
}

impl LocalSum {
    /// Upper bound on the operator norm: `Σ |c| ‖local‖_F`.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm() * t.local.mat.norm()).sum()
    }

    /// `exp(-i t Σ terms) v` by a truncated Taylor series, substepped so each
    /// step has `‖H‖ dt ≤ 1`. Matrix-free, so it works on registers too large
    /// for [`expm_hermitian`]. Accurate to roughly machine precision.
    pub fn evolve_series(&self, v: &Amplitudes, t: f64) -> Result<Amplitudes> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        let steps = (self.norm_bound() * t.abs()).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let mut out = v.clone();
        for _ in 0..steps {
            let mut term = out.clone();
            let mut acc = out.clone();
            for k in 1..=60 {
                term = self.apply(&term) * C64::new(0.0, -dt / k as f64);
                acc += &term;
                if term.norm() <= 1e-18 * acc.norm() {
                    break;
                }
            }
            out = acc;
        }
        Ok(out)
    }
}

impl LinearMap for LocalSum {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &Amplitudes) -> Amplitudes {
        let mut out = Amplitudes::zeros(self.dim);
        for t in &self.terms {
            apply_mapped(&t.local.mat, &t.map, t.coeff, v, &mut out);
        }
        out
    }
}

/// Eigendecomposition of a hermitian operator, kept so `exp(-i h t)` can be
/// formed for many `t` at the cost of one diagonalization.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl Spectrum {
    pub fn new(h: &Operator) -> Result<Self> {
        if !h.hermitian {
            let dev = h.hermitian_deviation();
            if dev > HERMITIAN_TOL {
                return Err(Error::NotHermitian(dev));
            }
        }
        let eig = SymmetricEigen::new(h.mat.clone());
        Ok(Spectrum {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `exp(-i h t)`.
    pub fn propagator(&self, t: f64) -> Result<Operator> {
        let mut scaled = self.vectors.clone();
        for (j, &e) in self.values.iter().enumerate() {
            let p = C64::from_polar(1.0, -e * t);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= p;
            }
        }
        Operator::unitary(scaled * self.vectors.adjoint())
    }
}

/// `exp(-i h t)` for hermitian `h`, from its eigendecomposition.
pub fn expm_hermitian(h: &Operator, t: f64) -> Result<Operator> {
    Spectrum::new(h)?.propagator(t)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

// ---------------------------------------------------------------------------
// Mixed states and measurement

/// Positive, unit-trace hermitian operator on a register.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: Operator,
    factor_dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let a = psi.amplitudes();
        let op = Operator::hermitian(a * a.adjoint())?;
        Ok(DensityMatrix { op, factor_dims: psi.factor_dims().to_vec() })
    }

    /// Wraps an arbitrary hermitian matrix (not checked for positivity).
    pub fn from_operator(op: Operator, factor_dims: Vec<usize>) -> Result<Self> {
        let dim = register_dim(&factor_dims)?;
        if op.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
        }
        let op = if op.hermitian { op } else { Operator::hermitian(op.mat)? };
        Ok(DensityMatrix { op, factor_dims })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.op.mat
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn trace(&self) -> f64 {
        self.op.mat.trace().re
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.op.dim() {
            return Err(Error::DimensionMismatch { expected: self.op.dim(), found: psi.dim() });
        }
        let a = psi.amplitudes();
        Ok(a.dotc(&(&self.op.mat * a)).re)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.op.mat.clone()).eigenvalues.iter().copied().collect()
    }

    /// Traces out every factor not listed in `keep`; kept factors appear in
    /// the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let map = SiteMap::new(keep, &self.factor_dims)?;
        let k = map.local_dim();
        let m = &self.op.mat;
        let reduced = DMatrix::from_fn(k, k, |i, j| {
            map.bases.iter().map(|&b| m[(b + map.offsets[i], b + map.offsets[j])]).sum::<C64>()
        });
        let dims = keep.iter().map(|&s| self.factor_dims[s]).collect();
        let op = Operator::hermitian(symmetrize(reduced))?;
        Ok(DensityMatrix { op, factor_dims: dims })
    }
}

fn symmetrize(m: DMatrix<C64>) -> DMatrix<C64> {
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Reduced state of `psi` on the factors in `keep` (in that order).
pub fn partial_trace(psi: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let map = SiteMap::new(keep, psi.factor_dims())?;
    let a = psi.amplitudes();
    let coeffs =
        DMatrix::from_fn(map.local_dim(), map.bases.len(), |k, e| a[map.bases[e] + map.offsets[k]]);
    let rho = symmetrize(&coeffs * coeffs.adjoint());
    let dims = keep.iter().map(|&s| psi.factor_dims()[s]).collect();
    Ok(DensityMatrix { op: Operator::hermitian(rho)?, factor_dims: dims })
}

/// One outcome of a projective measurement.
#[derive(Debug, Clone)]
pub struct Branch {
    pub outcome: usize,
    pub probability: f64,
    /// Renormalized post-measurement state; `None` when the branch
    /// probability is below [`ZERO_BRANCH_TOL`].
    pub state: Option<StateVector>,
}

/// Computational-basis measurement of a two-level factor.
pub fn measure_factor(psi: &StateVector, factor: usize) -> Result<Vec<Branch>> {
    let dims = psi.factor_dims();
    if factor >= dims.len() {
        return Err(Error::SiteOutOfRange { index: factor, factors: dims.len() });
    }
    if dims[factor] != 2 {
        return Err(Error::NotAQubit { factor, dim: dims[factor] });
    }
    let map = SiteMap::new(&[factor], dims)?;
    let a = psi.amplitudes();
    let total = a.norm_squared();
    (0..2)
        .map(|outcome| {
            let off = map.offsets[outcome];
            let mut amps = Amplitudes::zeros(a.len());
            for &b in &map.bases {
                amps[b + off] = a[b + off];
            }
            let probability = amps.norm_squared() / total;
            let state = if probability < ZERO_BRANCH_TOL {
                None
            } else {
                Some(StateVector::normalized(amps, dims.to_vec())?)
            };
            Ok(Branch { outcome, probability, state })
        })
        .collect()
}
