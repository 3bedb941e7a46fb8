//! Zeno protection of pair-encoded states.
//!
//! One round evolves the full register (data pairs, test qubit, environment)
//! for `T0 / N`, then tests each pair in turn: two CNOTs copy the pair's
//! parity onto the test qubit, the test qubit is measured, and outcome `1`
//! (odd parity, i.e. still inside `{|01⟩, |10⟩}`) accepts. The test qubit is
//! flipped back to `|0⟩` after an accept so the same ancilla serves every
//! test. Leakage out of the code per round is `O((T0/N)²)`, so over `N`
//! rounds the total rejection probability falls as `1/N`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bath::{bath_ops, BathOps};
use crate::codes::{
    build_codebook_with, codeword_state, encode_n_qubit, encode_one_qubit, parse_bits,
    uniform_h_ex, Codebook, Construction,
};
use crate::error::{Error, Result};
use crate::linalg::{
    embed, fidelity, partial_trace, register_dim, Amplitudes, DensityMatrix, Operator, SiteMap,
    Spectrum, StateVector, C64, DENSE_DIM_CAP, ZERO_BRANCH_TOL,
};
use crate::system::{
    build_h_total, cnot, h_total_terms, pauli_x, swap, HamiltonianSpec, PairLayout, Register,
};

/// Largest register for density-matrix (ensemble) runs.
pub const ENSEMBLE_DIM_CAP: usize = 1 << 10;

/// Tolerance on the test qubit starting in `|0⟩`.
const TEST_READY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Follow the all-accept branch deterministically.
    PostSelect,
    /// Sample measurement outcomes; trajectory `i` uses stream `i` of a
    /// ChaCha8 generator seeded with `seed`.
    Trajectories { count: usize, seed: u64 },
    /// Propagate the unselected mixture of all branches.
    Ensemble,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::PostSelect => "post_select",
            Mode::Trajectories { .. } => "trajectories",
            Mode::Ensemble => "ensemble",
        }
    }
}

/// Logical state to protect.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    /// `α|0_L⟩ + β|1_L⟩`.
    Qubit { alpha: C64, beta: C64 },
    /// Logical bitstring to amplitude, e.g. `{"01": 1}`.
    Logical(BTreeMap<String, C64>),
}

impl Initial {
    pub fn coefficients(&self) -> BTreeMap<String, C64> {
        match self {
            Initial::Qubit { alpha, beta } => {
                BTreeMap::from([("0".to_string(), *alpha), ("1".to_string(), *beta)])
            }
            Initial::Logical(map) => map.clone(),
        }
    }

    pub fn n_logical(&self) -> Result<usize> {
        let coeffs = self.coefficients();
        let mut lens = coeffs.keys().map(|k| k.len());
        let n = lens.next().ok_or_else(|| Error::invalid("no logical coefficients given"))?;
        if n == 0 || lens.any(|l| l != n) {
            return Err(Error::invalid("logical labels must be nonempty and of equal length"));
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZenoConfig {
    pub t0: f64,
    /// Number of test rounds.
    pub n: usize,
    pub mode: Mode,
    pub spec: HamiltonianSpec,
    /// Must carry a test qubit and as many pairs as the codebook needs.
    pub layout: PairLayout,
    pub initial: Initial,
    pub construction: Construction,
}

impl ZenoConfig {
    /// The four-qubit scheme at the weak-coupling defaults: two pairs, one
    /// test qubit, `T0 = 1`, 16 rounds, post-selection.
    pub fn desk_scale(alpha: C64, beta: C64) -> Self {
        ZenoConfig {
            t0: 1.0,
            n: 16,
            mode: Mode::PostSelect,
            spec: HamiltonianSpec::desk_scale(2),
            layout: PairLayout::standard(2, true).expect("two pairs"),
            initial: Initial::Qubit { alpha, beta },
            construction: Construction::Standard,
        }
    }

    /// Checks the invariants and returns the codebook in use.
    pub fn validate(&self) -> Result<Codebook> {
        if self.n == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return Err(Error::invalid("T0 must be positive and finite"));
        }
        if let Mode::Trajectories { count: 0, .. } = self.mode {
            return Err(Error::invalid("trajectory count must be at least 1"));
        }
        if self.layout.test_qubit().is_none() {
            return Err(Error::invalid("the layout has no test qubit"));
        }
        let book = build_codebook_with(self.initial.n_logical()?, self.construction)?;
        if book.n_pairs != self.layout.n_pairs() {
            return Err(Error::invalid(format!(
                "the code needs {} pairs but the layout has {}",
                book.n_pairs,
                self.layout.n_pairs()
            )));
        }
        self.spec.validate(book.n_pairs)?;
        let dim = self.register_dim()?;
        let cap = if self.mode == Mode::Ensemble { ENSEMBLE_DIM_CAP } else { DENSE_DIM_CAP };
        if dim > cap {
            return Err(Error::CapExceeded { dim, cap });
        }
        Ok(book)
    }

    /// Dimension of data pairs, test qubit and environment together.
    pub fn register_dim(&self) -> Result<usize> {
        let bath = self.spec.bath.total_dim(self.layout.n_pairs())?;
        let mut dims = vec![2; self.layout.n_qubits()];
        dims.push(bath);
        register_dim(&dims)
    }
}

// ---------------------------------------------------------------------------
// Parity test

/// A linear map that sends each output basis index to at most one input
/// index with unit weight. Both branches of a parity test have this form.
#[derive(Debug, Clone)]
struct Gather {
    src: Vec<Option<usize>>,
}

impl Gather {
    /// Reads off the gather from a local 0/1 matrix acting on `sites`.
    fn from_local(local: &Operator, sites: &[usize], factor_dims: &[usize]) -> Result<Self> {
        let map = SiteMap::new(sites, factor_dims)?;
        let m = local.matrix();
        let cols: Vec<Option<usize>> =
            (0..m.nrows()).map(|r| (0..m.ncols()).find(|&c| m[(r, c)].norm() > 0.5)).collect();
        let mut src = vec![None; register_dim(factor_dims)?];
        for &base in &map.bases {
            for (lr, col) in cols.iter().enumerate() {
                src[base + map.offsets[lr]] = col.map(|lc| base + map.offsets[lc]);
            }
        }
        Ok(Gather { src })
    }

    fn apply(&self, v: &Amplitudes) -> Amplitudes {
        Amplitudes::from_fn(self.src.len(), |i, _| self.src[i].map_or(C64::new(0.0, 0.0), |s| v[s]))
    }

    /// `K ρ K†`.
    fn conjugate(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.src.len();
        DMatrix::from_fn(n, n, |i, j| match (self.src[i], self.src[j]) {
            (Some(a), Some(b)) => rho[(a, b)],
            _ => C64::new(0.0, 0.0),
        })
    }

    /// `tr(K ρ K†)`.
    fn weight(&self, rho: &DMatrix<C64>) -> f64 {
        self.src.iter().flatten().map(|&s| rho[(s, s)].re).sum()
    }
}

fn projector(outcome: usize) -> Operator {
    let mut d = [C64::new(0.0, 0.0); 2];
    d[outcome] = C64::new(1.0, 0.0);
    Operator::diagonal(&d)
}

/// Compiled parity test of one pair: the accepting map `X_t P1_t C_bt C_at`
/// and the rejecting map `P0_t C_bt C_at`.
#[derive(Debug, Clone)]
pub struct PairTest {
    pub pair: usize,
    accept: Gather,
    reject: Gather,
    test_factor: usize,
    factor_dims: Vec<usize>,
}

impl PairTest {
    pub fn new(reg: &Register, pair: usize) -> Result<Self> {
        let layout = reg.layout();
        let t =
            layout.test_factor().ok_or_else(|| Error::invalid("the layout has no test qubit"))?;
        let (a, b) = layout.pair_factors(pair)?;
        // Local order: pair qubit a, pair qubit b, test qubit.
        let local = [2, 2, 2];
        let c = embed(&cnot(), &[1, 2], &local)?.compose(&embed(&cnot(), &[0, 2], &local)?)?;
        let p1 = embed(&projector(1), &[2], &local)?;
        let p0 = embed(&projector(0), &[2], &local)?;
        let x = embed(&pauli_x(), &[2], &local)?;
        let acc = x.compose(&p1)?.compose(&c)?;
        let rej = p0.compose(&c)?;
        let dims = reg.factor_dims();
        Ok(PairTest {
            pair,
            accept: Gather::from_local(&acc, &[a, b, t], &dims)?,
            reject: Gather::from_local(&rej, &[a, b, t], &dims)?,
            test_factor: t,
            factor_dims: dims,
        })
    }
}

/// Both branches of one parity test.
#[derive(Debug, Clone)]
pub struct TestOutcome {
    pub accept_prob: f64,
    pub reject_prob: f64,
    /// Renormalized, test qubit reset to `|0⟩`. `None` for a zero-probability
    /// branch.
    pub accepted: Option<StateVector>,
    /// Renormalized, test qubit left in `|0⟩`.
    pub rejected: Option<StateVector>,
}

/// Register matching `psi`: the layout's qubits followed by an optional
/// environment factor.
fn register_for(psi: &StateVector, layout: &PairLayout) -> Result<Register> {
    let dims = psi.factor_dims();
    let nq = layout.n_qubits();
    let bath = match dims.len() {
        l if l == nq => None,
        l if l == nq + 1 => Some(dims[nq]),
        l => return Err(Error::DimensionMismatch { expected: nq, found: l }),
    };
    if let Some(k) = dims[..nq].iter().position(|&d| d != 2) {
        return Err(Error::NotAQubit { factor: k, dim: dims[k] });
    }
    Ok(Register::new(layout.clone(), bath))
}

/// Parity test of `pair` on `psi`, whose test qubit must be in `|0⟩`.
pub fn test_step(psi: &StateVector, pair: usize, layout: &PairLayout) -> Result<TestOutcome> {
    let reg = register_for(psi, layout)?;
    let test = PairTest::new(&reg, pair)?;
    let excited = crate::linalg::measure_factor(psi, test.test_factor)?[1].probability;
    if excited > TEST_READY_TOL {
        return Err(Error::invalid(format!(
            "test qubit must start in |0⟩ (excited population {excited:e})"
        )));
    }
    let v = psi.amplitudes();
    let branch = |g: &Gather| -> Result<(f64, Option<StateVector>)> {
        let w = g.apply(v);
        let p = w.norm_squared();
        let state = if p < ZERO_BRANCH_TOL {
            None
        } else {
            Some(StateVector::normalized(w, test.factor_dims.clone())?)
        };
        Ok((p, state))
    };
    let (accept_prob, accepted) = branch(&test.accept)?;
    let (reject_prob, rejected) = branch(&test.reject)?;
    Ok(TestOutcome { accept_prob, reject_prob, accepted, rejected })
}

// ---------------------------------------------------------------------------
// Protocol runs

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    /// Acceptance probability of each pair's test, in pair order. In
    /// trajectory mode this is the acceptance frequency among trajectories
    /// that reached the test (0 when none did).
    pub accept: Vec<f64>,
    pub reject: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub mode: &'static str,
    pub n: usize,
    pub t0: f64,
    /// `⟨ψ_enc|ρ_data|ψ_enc⟩` of the accepted state (post-select, mean over
    /// accepted trajectories) or of the unselected mixture (ensemble).
    pub final_fidelity: f64,
    pub fidelity_std_err: Option<f64>,
    /// Probability that every test accepted.
    pub success_probability: f64,
    pub success_std_err: Option<f64>,
    /// `1 - success_probability`, except in ensemble mode where it is
    /// `1 - code_population`.
    pub leakage_probability: f64,
    /// Weight of the final data state inside the code space.
    pub code_population: f64,
    /// Largest `|accept + reject - 1|` over all tests.
    pub max_probability_defect: f64,
    pub per_round: Vec<RoundRecord>,
}

fn clamp01(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// Everything a run needs that does not depend on `N` or the mode. Shared
/// read-only between parallel runs.
#[derive(Debug, Clone)]
pub struct Protocol {
    reg: Register,
    codebook: Codebook,
    psi_enc: StateVector,
    psi0: StateVector,
    spectrum: Spectrum,
    tests: Vec<PairTest>,
    code_basis: Vec<StateVector>,
}

impl Protocol {
    pub fn compile(config: &ZenoConfig) -> Result<Self> {
        let codebook = config.validate()?;
        let bath = bath_ops(&config.spec.bath, codebook.n_pairs)?;
        let reg = Register::new(config.layout.clone(), Some(bath.dim()));
        let h = build_h_total(&config.spec, &reg, &bath)?;
        let psi_enc = encode_n_qubit(&config.initial.coefficients(), &codebook)?;
        let psi0 = psi_enc.kron(&StateVector::basis(0, vec![2])?)?.kron(&bath.psi_b0)?;
        let tests =
            (0..codebook.n_pairs).map(|k| PairTest::new(&reg, k)).collect::<Result<Vec<_>>>()?;
        let code_basis =
            codebook.logical_map.iter().map(|b| codeword_state(b)).collect::<Result<Vec<_>>>()?;
        Ok(Protocol {
            spectrum: Spectrum::new(&h)?,
            reg,
            codebook,
            psi_enc,
            psi0,
            tests,
            code_basis,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn encoded(&self) -> &StateVector {
        &self.psi_enc
    }

    /// Full initial state `|ψ_enc⟩|0⟩_t|ψ_b⟩`.
    pub fn initial_state(&self) -> &StateVector {
        &self.psi0
    }

    pub fn register(&self) -> &Register {
        &self.reg
    }

    pub fn run(&self, n: usize, t0: f64, mode: Mode) -> Result<RunResult> {
        if n == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        let u = self.spectrum.propagator(t0 / n as f64)?;
        let mut result = match mode {
            Mode::PostSelect => self.post_select(&u, n),
            Mode::Trajectories { count, seed } => self.trajectories(&u, n, count, seed),
            Mode::Ensemble => self.ensemble(&u, n),
        }?;
        result.t0 = t0;
        Ok(result)
    }

    /// `(fidelity, code population)` of the data part of a full-register
    /// density matrix.
    fn data_scores(&self, rho_data: &DensityMatrix) -> Result<(f64, f64)> {
        let fid = rho_data.expectation(&self.psi_enc)?;
        let pop = self.code_basis.iter().map(|c| rho_data.expectation(c)).sum::<Result<f64>>()?;
        Ok((clamp01(fid), clamp01(pop)))
    }

    fn pure_scores(&self, v: &Amplitudes) -> Result<(f64, f64)> {
        let psi = StateVector::normalized(v.clone(), self.reg.factor_dims())?;
        self.data_scores(&partial_trace(&psi, &self.reg.layout().data_factors())?)
    }

    fn post_select(&self, u: &Operator, n: usize) -> Result<RunResult> {
        let mut v = self.psi0.amplitudes().clone();
        let mut log_success = 0.0;
        let mut defect: f64 = 0.0;
        let mut per_round = Vec::with_capacity(n);
        for round in 1..=n {
            v = u.matrix() * &v;
            let mut rec = RoundRecord { round, accept: vec![], reject: vec![] };
            for test in &self.tests {
                let a = test.accept.apply(&v);
                let pa = a.norm_squared();
                let pr = test.reject.apply(&v).norm_squared();
                let total = v.norm_squared();
                defect = defect.max((pa + pr - total).abs());
                if pa < ZERO_BRANCH_TOL {
                    return Err(Error::ZeroProbabilityBranch { round, pair: test.pair });
                }
                rec.accept.push(clamp01(pa / total));
                rec.reject.push(clamp01(pr / total));
                log_success += (-pr / total).ln_1p();
                v = a.unscale(pa.sqrt());
            }
            per_round.push(rec);
        }
        let (fid, pop) = self.pure_scores(&v)?;
        let success = clamp01(log_success.exp());
        Ok(RunResult {
            mode: Mode::PostSelect.name(),
            n,
            t0: 0.0,
            final_fidelity: fid,
            fidelity_std_err: None,
            success_probability: success,
            success_std_err: None,
            leakage_probability: clamp01(-log_success.exp_m1()),
            code_population: pop,
            max_probability_defect: defect,
            per_round,
        })
    }

    /// One sampled trajectory: number of tests passed before the first
    /// reject, and the data scores if every test passed.
    fn trajectory(
        &self,
        u: &Operator,
        n: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<(usize, Option<(f64, f64)>)> {
        let mut v = self.psi0.amplitudes().clone();
        let mut passed = 0;
        for _ in 0..n {
            v = u.matrix() * &v;
            for test in &self.tests {
                let a = test.accept.apply(&v);
                let pa = a.norm_squared() / v.norm_squared();
                if rng.gen::<f64>() >= pa {
                    return Ok((passed, None));
                }
                passed += 1;
                v = a.unscale(a.norm());
            }
        }
        Ok((passed, Some(self.pure_scores(&v)?)))
    }

    fn trajectories(&self, u: &Operator, n: usize, count: usize, seed: u64) -> Result<RunResult> {
        if count == 0 {
            return Err(Error::invalid("trajectory count must be at least 1"));
        }
        let outcomes = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                self.trajectory(u, n, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;

        let pairs = self.tests.len();
        let per_round = (0..n)
            .map(|r| {
                let mut rec = RoundRecord { round: r + 1, accept: vec![], reject: vec![] };
                for k in 0..pairs {
                    let s = r * pairs + k;
                    let reached = outcomes.iter().filter(|(p, _)| *p >= s).count();
                    let passed = outcomes.iter().filter(|(p, _)| *p > s).count();
                    let freq = if reached == 0 { 0.0 } else { passed as f64 / reached as f64 };
                    rec.accept.push(freq);
                    rec.reject.push(if reached == 0 { 0.0 } else { 1.0 - freq });
                }
                rec
            })
            .collect();

        let accepted: Vec<(f64, f64)> = outcomes.iter().filter_map(|(_, f)| *f).collect();
        let fids: Vec<f64> = accepted.iter().map(|s| s.0).collect();
        let pops: Vec<f64> = accepted.iter().map(|s| s.1).collect();
        let p = accepted.len() as f64 / count as f64;
        let (mean, sem) = mean_and_sem(&fids);
        Ok(RunResult {
            mode: Mode::Trajectories { count, seed }.name(),
            n,
            t0: 0.0,
            final_fidelity: clamp01(mean),
            fidelity_std_err: Some(sem),
            success_probability: p,
            success_std_err: Some((p * (1.0 - p) / count as f64).sqrt()),
            leakage_probability: 1.0 - p,
            code_population: clamp01(mean_and_sem(&pops).0),
            max_probability_defect: 0.0,
            per_round,
        })
    }

    fn ensemble(&self, u: &Operator, n: usize) -> Result<RunResult> {
        let dim = self.reg.dim();
        if dim > ENSEMBLE_DIM_CAP {
            return Err(Error::CapExceeded { dim, cap: ENSEMBLE_DIM_CAP });
        }
        let a0 = self.psi0.amplitudes();
        let mut rho = a0 * a0.adjoint();
        let mut rho_acc = rho.clone();
        let um = u.matrix();
        let ud = um.adjoint();
        let mut defect: f64 = 0.0;
        let mut per_round = Vec::with_capacity(n);
        for round in 1..=n {
            rho = um * &rho * &ud;
            rho_acc = um * &rho_acc * &ud;
            let mut rec = RoundRecord { round, accept: vec![], reject: vec![] };
            for test in &self.tests {
                let total = rho.trace().re;
                let pa = test.accept.weight(&rho);
                let pr = test.reject.weight(&rho);
                defect = defect.max((pa + pr - 1.0).abs()).max((total - 1.0).abs());
                rec.accept.push(clamp01(pa));
                rec.reject.push(clamp01(pr));
                rho = test.accept.conjugate(&rho) + test.reject.conjugate(&rho);
                rho_acc = test.accept.conjugate(&rho_acc);
            }
            per_round.push(rec);
        }
        let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        let full = DensityMatrix::from_operator(Operator::hermitian(rho)?, self.reg.factor_dims())?;
        let (fid, pop) =
            self.data_scores(&full.partial_trace(&self.reg.layout().data_factors())?)?;
        Ok(RunResult {
            mode: Mode::Ensemble.name(),
            n,
            t0: 0.0,
            final_fidelity: fid,
            fidelity_std_err: None,
            success_probability: clamp01(rho_acc.trace().re),
            success_std_err: None,
            leakage_probability: clamp01(1.0 - pop),
            code_population: pop,
            max_probability_defect: defect,
            per_round,
        })
    }
}

fn mean_and_sem(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn zeno_run(config: &ZenoConfig) -> Result<RunResult> {
    Protocol::compile(config)?.run(config.n, config.t0, config.mode)
}

// ---------------------------------------------------------------------------
// Sweeps and fits

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub leakage: f64,
    pub success: f64,
    pub fidelity: f64,
}

/// One run per entry of `ns` (nonempty, strictly ascending), everything else
/// taken from `base`. Runs execute in parallel; rows come back in input
/// order.
pub fn zeno_sweep(base: &ZenoConfig, ns: &[usize]) -> Result<Vec<SweepRow>> {
    if ns.is_empty() {
        return Err(Error::invalid("the list of N values is empty"));
    }
    if ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("N values must be positive and strictly ascending"));
    }
    let protocol = Protocol::compile(base)?;
    ns.par_iter()
        .map(|&n| {
            let r = protocol.run(n, base.t0, base.mode)?;
            Ok(SweepRow {
                n,
                leakage: r.leakage_probability,
                success: r.success_probability,
                fidelity: r.final_fidelity,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::invalid("a power-law fit needs at least 3 points"));
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::invalid(format!("power-law fit needs positive values, got ({x}, {y})")));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("power-law fit needs at least two distinct x values"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLawFit { slope, intercept, r_squared })
}

pub fn fit_sweep(rows: &[SweepRow]) -> Result<PowerLawFit> {
    fit_power_law(&rows.iter().map(|r| (r.n as f64, r.leakage)).collect::<Vec<_>>())
}

// ---------------------------------------------------------------------------
// First-order structure of a single short step

/// One analytic leakage term: pair `pair` driven into `|11⟩` (through
/// `λ+ σ+ ⊗ V+`) or `|00⟩` (through `λ+* σ- ⊗ V+†`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakTerm {
    pub label: String,
    pub pair: usize,
    pub target: &'static str,
    /// Norm of the analytic term.
    pub norm: f64,
    /// Norm of the exact state inside the same sector.
    pub exact_norm: f64,
    /// `‖P_sector ψ_exact - term‖`.
    pub sector_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstOrderReport {
    pub dt: f64,
    /// `‖exp(-iH dt)ψ - analytic‖`, second order in `dt`.
    pub residual: f64,
    /// Every candidate sector, pair by pair, `|11⟩` before `|00⟩`.
    pub terms: Vec<LeakTerm>,
    /// Sectors whose analytic term exceeds `dt^{3/2}`.
    pub analytic_labels: Vec<String>,
    /// Sectors whose exact population amplitude exceeds `dt^{3/2}`.
    pub exact_labels: Vec<String>,
    pub labels_match: bool,
}

/// `(normalized amplitude, pair bits)` of every nonzero logical component.
fn components(initial: &Initial, book: &Codebook) -> Result<Vec<(C64, Vec<u8>)>> {
    let coeffs = initial.coefficients();
    let norm = coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    coeffs
        .iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(label, &c)| {
            let index = parse_bits(label)?.iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
            let bits = book
                .logical_map
                .get(index)
                .ok_or_else(|| Error::invalid(format!("label `{label}` is out of range")))?;
            Ok((c / norm, bits.clone()))
        })
        .collect()
}

/// Pair-product data state with pair `k` replaced by the product state
/// `|xx⟩`.
fn replaced_pair(bits: &[u8], k: usize, x: u8) -> Result<Amplitudes> {
    let pairs = bits
        .iter()
        .enumerate()
        .map(|(i, &b)| if i == k { StateVector::qubits(&[x, x]) } else { codeword_state(&[b]) })
        .collect::<Result<Vec<_>>>()?;
    Ok(StateVector::product(&pairs)?.into_amplitudes())
}

/// Components of `v` (on data qubits ⊗ environment) with pair `k` in `|xx⟩`.
fn sector(v: &Amplitudes, n_data: usize, bath_dim: usize, k: usize, x: u8) -> Amplitudes {
    let shift = |q: usize| n_data - 1 - q;
    Amplitudes::from_fn(v.len(), |i, _| {
        let d = i / bath_dim;
        let a = ((d >> shift(2 * k)) & 1) as u8;
        let b = ((d >> shift(2 * k + 1)) & 1) as u8;
        if a == x && b == x {
            v[i]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Compares one exact step of length `dt` from `|ψ_enc⟩|ψ_b⟩` against its
/// first-order expansion: the code part `(1 - iH_B dt)ψ_b` (plus the
/// exchange phase of each codeword), and for every triplet pair `k` the two
/// leakage terms `-i dt √2 λ+ |11⟩_k V+ψ_b` and `-i dt √2 λ+* |00⟩_k V+†ψ_b`.
/// Collective `σz` terms annihilate every codeword and contribute nothing.
pub fn first_order_check(config: &ZenoConfig, dt: f64) -> Result<FirstOrderReport> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::invalid("dt must be finite and nonnegative"));
    }
    let book = config.validate()?;
    let spec = &config.spec;
    let bath: BathOps = bath_ops(&spec.bath, book.n_pairs)?;
    let reg = Register::new(config.layout.without_test(), Some(bath.dim()));
    let h = h_total_terms(spec, &reg, &bath)?;
    let psi_enc = encode_n_qubit(&config.initial.coefficients(), &book)?;
    let psi_b = bath.psi_b0.amplitudes();
    let exact = h.evolve_series(psi_enc.kron(&bath.psi_b0)?.amplitudes(), dt)?;

    let mi_dt = C64::new(0.0, -dt);
    let sqrt2 = C64::new(std::f64::consts::SQRT_2, 0.0);
    let hb_psi =
        if spec.terms.bath { bath.h_b.matrix() * psi_b } else { psi_b * C64::new(0.0, 0.0) };
    let comps = components(&config.initial, &book)?;

    let mut analytic = Amplitudes::zeros(exact.len());
    for (a, bits) in &comps {
        let e: f64 = if spec.terms.exchange {
            bits.iter().zip(&spec.j_per_pair).map(|(&b, &j)| if b == 0 { j } else { -j }).sum()
        } else {
            0.0
        };
        let env = psi_b * (C64::new(1.0, 0.0) + mi_dt * e) + &hb_psi * mi_dt;
        analytic += codeword_state(bits)?.amplitudes().kronecker(&env) * *a;
    }

    let threshold = dt.powf(1.5);
    let n_data = reg.layout().n_data_qubits();
    let mut terms = Vec::new();
    for k in 0..book.n_pairs {
        let coupling = &bath.couplings[k];
        let channels = [
            ("11", 1u8, spec.lambda_plus[k], coupling.v_plus.clone()),
            ("00", 0u8, spec.lambda_plus[k].conj(), coupling.v_minus()),
        ];
        for (target, x, lambda, v_op) in channels {
            let mut term = Amplitudes::zeros(exact.len());
            if spec.terms.interaction {
                let env = v_op.matrix() * psi_b;
                for (a, bits) in comps.iter().filter(|(_, bits)| bits[k] == 0) {
                    term +=
                        replaced_pair(bits, k, x)?.kronecker(&env) * (mi_dt * *a * lambda * sqrt2);
                }
            }
            let exact_part = sector(&exact, n_data, bath.dim(), k, x);
            terms.push(LeakTerm {
                label: format!("pair {k} -> |{target}>"),
                pair: k,
                target,
                norm: term.norm(),
                exact_norm: exact_part.norm(),
                sector_residual: (&exact_part - &term).norm(),
            });
            analytic += term;
        }
    }
    let pick = |f: fn(&LeakTerm) -> f64| -> Vec<String> {
        terms.iter().filter(|t| f(t) > threshold).map(|t| t.label.clone()).collect()
    };
    let analytic_labels = pick(|t| t.norm);
    let exact_labels = pick(|t| t.exact_norm);
    Ok(FirstOrderReport {
        dt,
        residual: (exact - analytic).norm(),
        labels_match: analytic_labels == exact_labels,
        terms,
        analytic_labels,
        exact_labels,
    })
}

// ---------------------------------------------------------------------------
// Exchange demos

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemoPoint {
    pub t: f64,
    pub fidelity: f64,
}

/// `points` evenly spaced times from 0 to `t_max` inclusive.
pub fn time_grid(t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect(),
    }
}

fn check_pair_amplitudes(alpha: C64, beta: C64) -> Result<()> {
    let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
    if (norm_sqr - 1.0).abs() > crate::codes::COEFF_NORM_TOL {
        return Err(Error::NotNormalized(norm_sqr.sqrt()));
    }
    Ok(())
}

/// Fidelity of the two-qubit code `α|01⟩ + β|10⟩` with itself under `J E`.
pub fn demo_unprotected(alpha: C64, beta: C64, j: f64, times: &[f64]) -> Result<Vec<DemoPoint>> {
    check_pair_amplitudes(alpha, beta)?;
    let zero = C64::new(0.0, 0.0);
    let psi =
        StateVector::normalized(Amplitudes::from_vec(vec![zero, alpha, beta, zero]), vec![2, 2])?;
    let spectrum = Spectrum::new(&swap().scale(C64::new(j, 0.0)))?;
    times
        .iter()
        .map(|&t| {
            let out = spectrum.propagator(t)?.evolve(&psi)?;
            Ok(DemoPoint { t, fidelity: fidelity(&psi, &out)? })
        })
        .collect()
}

/// Fidelity of the four-qubit code with itself under `J (E_1 + E_2)`.
pub fn demo_protected(alpha: C64, beta: C64, j: f64, times: &[f64]) -> Result<Vec<DemoPoint>> {
    let psi = encode_one_qubit(alpha, beta)?;
    let h = uniform_h_ex(2, j)?;
    times
        .iter()
        .map(|&t| Ok(DemoPoint { t, fidelity: fidelity(&psi, &h.evolve_commuting(&psi, t)?)? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{BathModel, BathSpec};
    use crate::system::TermFlags;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn base() -> ZenoConfig {
        ZenoConfig::desk_scale(c(0.6), C64::new(0.0, 0.8))
    }

    /// `pair_states ⊗ |0⟩_t` on two pairs, no environment.
    fn with_test(data: StateVector) -> StateVector {
        data.kron(&StateVector::basis(0, vec![2]).unwrap()).unwrap()
    }

    fn layout() -> PairLayout {
        PairLayout::standard(2, true).unwrap()
    }

    #[test]
    fn parity_test_accepts_exactly_the_odd_pairs() {
        for bits in 0..4u8 {
            let pair = StateVector::qubits(&[bits >> 1, bits & 1]).unwrap();
            let psi = with_test(pair.kron(&codeword_state(&[1]).unwrap()).unwrap());
            let out = test_step(&psi, 0, &layout()).unwrap();
            let odd = bits == 1 || bits == 2;
            let want = if odd { 1.0 } else { 0.0 };
            assert!((out.accept_prob - want).abs() < 1e-15, "pair |{bits:02b}>");
            assert!((out.accept_prob + out.reject_prob - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn code_state_passes_unchanged() {
        let enc = encode_one_qubit(c(0.6), C64::new(0.0, 0.8)).unwrap();
        let psi = with_test(enc).kron(&StateVector::basis(0, vec![3]).unwrap()).unwrap();
        for pair in 0..2 {
            let out = test_step(&psi, pair, &layout()).unwrap();
            assert!((out.accept_prob - 1.0).abs() < 1e-15);
            assert!(out.rejected.is_none());
            let acc = out.accepted.unwrap();
            assert!((acc.amplitudes() - psi.amplitudes()).norm() < 1e-15);
        }
    }

    #[test]
    fn leaked_pair_is_rejected_with_test_qubit_in_zero() {
        let psi = with_test(
            StateVector::qubits(&[1, 1]).unwrap().kron(&codeword_state(&[0]).unwrap()).unwrap(),
        );
        let out = test_step(&psi, 0, &layout()).unwrap();
        assert_eq!(out.accept_prob, 0.0);
        assert!(out.accepted.is_none());
        assert!((out.rejected.unwrap().amplitudes() - psi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn half_leaked_superposition_accepts_half() {
        let code = codeword_state(&[0, 1]).unwrap();
        let leak =
            StateVector::qubits(&[0, 0]).unwrap().kron(&codeword_state(&[1]).unwrap()).unwrap();
        let amps = (code.amplitudes() + leak.amplitudes()) * c(FRAC_1_SQRT_2);
        let psi = with_test(StateVector::new(amps, vec![2; 4]).unwrap());
        let out = test_step(&psi, 0, &layout()).unwrap();
        assert!((out.accept_prob - 0.5).abs() < 1e-15);
        let acc = with_test(code);
        assert!((out.accepted.unwrap().amplitudes() - acc.amplitudes()).norm() < 1e-14);
        // Pair 1 is a singlet in both components.
        assert!((test_step(&psi, 1, &layout()).unwrap().accept_prob - 1.0).abs() < 1e-15);
    }

    #[test]
    fn test_step_preconditions() {
        let enc = encode_one_qubit(c(1.0), c(0.0)).unwrap();
        let no_test = PairLayout::standard(2, false).unwrap();
        assert!(test_step(&enc, 0, &no_test).is_err());
        let excited = enc.kron(&StateVector::basis(1, vec![2]).unwrap()).unwrap();
        assert!(test_step(&excited, 0, &layout()).is_err());
        assert!(test_step(&with_test(enc), 2, &layout()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ZenoConfig { n: 0, ..base() }.validate().is_err());
        assert!(ZenoConfig { t0: 0.0, ..base() }.validate().is_err());
        assert!(ZenoConfig { mode: Mode::Trajectories { count: 0, seed: 1 }, ..base() }
            .validate()
            .is_err());
        assert!(ZenoConfig { layout: PairLayout::standard(2, false).unwrap(), ..base() }
            .validate()
            .is_err());
        assert!(ZenoConfig { layout: PairLayout::standard(3, true).unwrap(), ..base() }
            .validate()
            .is_err());
        assert!(ZenoConfig { initial: Initial::Qubit { alpha: c(1.0), beta: c(1.0) }, ..base() }
            .validate()
            .is_ok());
        assert!(zeno_run(&ZenoConfig {
            initial: Initial::Qubit { alpha: c(1.0), beta: c(1.0) },
            ..base()
        })
        .is_err());
    }

    #[test]
    fn dephasing_and_exchange_alone_never_leak() {
        let mut spec = HamiltonianSpec::desk_scale(2);
        spec.lambda_plus = vec![c(0.0); 2];
        spec.j_per_pair = vec![0.9; 2];
        spec.bath.model = BathModel::RandomHermitian;
        for n in [1, 4, 16] {
            for mode in [Mode::PostSelect, Mode::Ensemble] {
                let r = zeno_run(&ZenoConfig { n, mode, spec: spec.clone(), ..base() }).unwrap();
                assert!((r.success_probability - 1.0).abs() < 1e-10, "{mode:?}");
                assert!(
                    (r.final_fidelity - 1.0).abs() < 1e-10,
                    "{mode:?} N={n}: {}",
                    r.final_fidelity
                );
                assert_eq!(r.per_round.len(), n);
            }
        }
    }

    #[test]
    fn post_select_and_ensemble_agree() {
        for n in [1, 3, 8] {
            let ps = zeno_run(&ZenoConfig { n, ..base() }).unwrap();
            let en = zeno_run(&ZenoConfig { n, mode: Mode::Ensemble, ..base() }).unwrap();
            assert!((ps.success_probability - en.success_probability).abs() < 1e-10);
            assert!(en.max_probability_defect < 1e-10);
            assert!(ps.max_probability_defect < 1e-12);
            for rec in &en.per_round {
                for (a, r) in rec.accept.iter().zip(&rec.reject) {
                    assert!((a + r - 1.0).abs() < 1e-10);
                }
            }
            assert!((ps.leakage_probability - (1.0 - ps.success_probability)).abs() < 1e-14);
        }
    }

    #[test]
    fn single_round_leakage_matches_first_order_amplitudes() {
        let t0 = 0.02;
        let cfg = ZenoConfig { t0, n: 1, ..base() };
        let leak = zeno_run(&cfg).unwrap().leakage_probability;
        let report = first_order_check(&cfg, t0).unwrap();
        let predicted: f64 = report.terms.iter().map(|t| t.norm * t.norm).sum();
        // 2 λ² T0² (|α|² + |β|²) for a ground-state ladder.
        assert!((predicted - 2.0 * 0.01 * t0 * t0).abs() < 1e-15);
        assert!((leak / predicted - 1.0).abs() < 0.02, "{leak} vs {predicted}");
    }

    #[test]
    fn sweep_is_ordered_deterministic_and_decreasing() {
        let mut cfg = base();
        cfg.spec.bath =
            BathSpec { model: BathModel::RandomHermitian, dim: 3, seed: 5, ..BathSpec::default() };
        let ns = [8, 16, 32, 64, 128];
        let rows = zeno_sweep(&cfg, &ns).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), ns);
        assert!(rows.windows(2).all(|w| w[1].leakage < w[0].leakage));
        assert_eq!(rows, zeno_sweep(&cfg, &ns).unwrap());
        let fit = fit_sweep(&rows).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.15, "{fit:?}");

        assert!(zeno_sweep(&cfg, &[]).is_err());
        assert!(zeno_sweep(&cfg, &[8, 8]).is_err());
        assert!(zeno_sweep(&cfg, &[16, 8]).is_err());
        assert!(zeno_sweep(&cfg, &[0, 8]).is_err());
    }

    #[test]
    fn fidelity_converges_at_large_n() {
        let mut cfg = ZenoConfig { n: 512, ..base() };
        cfg.spec.bath =
            BathSpec { model: BathModel::RandomHermitian, dim: 2, seed: 3, ..BathSpec::default() };
        let r = zeno_run(&cfg).unwrap();
        assert!(r.final_fidelity > 1.0 - 1e-3, "{}", r.final_fidelity);
    }

    #[test]
    fn trajectories_track_post_selection() {
        let cfg = ZenoConfig { t0: 3.0, n: 4, ..base() };
        let exact = zeno_run(&cfg).unwrap().success_probability;
        let mode = Mode::Trajectories { count: 400, seed: 17 };
        let r = zeno_run(&ZenoConfig { mode, ..cfg.clone() }).unwrap();
        let se = r.success_std_err.unwrap();
        assert!(
            (r.success_probability - exact).abs() <= 3.0 * se.max(1e-3),
            "{} vs {exact}",
            r.success_probability
        );
        assert_eq!(r, zeno_run(&ZenoConfig { mode, ..cfg }).unwrap());
    }

    #[test]
    fn ensemble_respects_cap() {
        let mut cfg = ZenoConfig { mode: Mode::Ensemble, ..base() };
        cfg.spec.bath.dim = 6;
        assert!(matches!(zeno_run(&cfg), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn zero_probability_accept_is_reported() {
        // Interaction only, no dephasing: the triplet pair and a ground-state
        // ladder form a two-level system {T|0⟩, |00⟩|1⟩} with coupling √2 λ,
        // fully transferred at √2 λ t = π/2.
        let mut cfg =
            ZenoConfig { n: 1, initial: Initial::Qubit { alpha: c(1.0), beta: c(0.0) }, ..base() };
        cfg.spec.terms = TermFlags { interaction: true, ..TermFlags::none() };
        cfg.spec.lambda_z = vec![0.0; 2];
        cfg.spec.lambda_plus = vec![c(1.0); 2];
        cfg.t0 = FRAC_PI_2 / std::f64::consts::SQRT_2;
        assert_eq!(zeno_run(&cfg), Err(Error::ZeroProbabilityBranch { round: 1, pair: 0 }));
        let en = zeno_run(&ZenoConfig { mode: Mode::Ensemble, ..cfg }).unwrap();
        assert!(en.success_probability < 1e-14);
        assert!(en.code_population < 1e-14);
    }

    #[test]
    fn power_law_fit_on_synthetic_data() {
        let pts = |p: i32| -> Vec<(f64, f64)> {
            [8.0, 16.0, 32.0, 64.0].iter().map(|&n: &f64| (n, 0.3 * n.powi(p))).collect()
        };
        let one = fit_power_law(&pts(-1)).unwrap();
        assert!((one.slope + 1.0).abs() < 1e-9);
        assert!((one.intercept - 0.3f64.ln()).abs() < 1e-9);
        assert!((one.r_squared - 1.0).abs() < 1e-12);
        assert!((fit_power_law(&pts(-2)).unwrap().slope + 2.0).abs() < 1e-9);
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.1)]).is_err());
        assert!(fit_power_law(&[(2.0, 1.0), (2.0, 0.5), (2.0, 0.1)]).is_err());
    }

    #[test]
    fn first_order_residual_is_second_order() {
        let zero = first_order_check(&base(), 0.0).unwrap();
        assert!(zero.residual < 1e-15);
        assert!(zero.analytic_labels.is_empty() && zero.exact_labels.is_empty());

        let a = first_order_check(&base(), 1e-3).unwrap();
        let b = first_order_check(&base(), 5e-4).unwrap();
        let ratio = a.residual / b.residual;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        assert!(a.labels_match);
        // The ladder starts in its ground state, so only lowering-side
        // leakage into |00⟩ appears.
        assert_eq!(a.analytic_labels, ["pair 0 -> |00>", "pair 1 -> |00>"]);
    }

    #[test]
    fn leakage_sectors_follow_the_triplet_pair() {
        let mut cfg = base();
        cfg.spec.bath =
            BathSpec { model: BathModel::RandomHermitian, dim: 3, seed: 2, ..BathSpec::default() };
        cfg.spec.lambda_plus = vec![C64::new(0.1, 0.05), c(0.2)];
        let r = first_order_check(
            &ZenoConfig { initial: Initial::Qubit { alpha: c(1.0), beta: c(0.0) }, ..cfg.clone() },
            1e-3,
        )
        .unwrap();
        assert!(r.labels_match);
        assert_eq!(r.analytic_labels, ["pair 0 -> |11>", "pair 0 -> |00>"]);
        let r = first_order_check(
            &ZenoConfig { initial: Initial::Qubit { alpha: c(0.0), beta: c(1.0) }, ..cfg.clone() },
            1e-3,
        )
        .unwrap();
        assert_eq!(r.analytic_labels, ["pair 1 -> |11>", "pair 1 -> |00>"]);
        let r = first_order_check(&cfg, 1e-3).unwrap();
        assert_eq!(r.analytic_labels.len(), 4);
        assert!(r.labels_match);
        for t in &r.terms {
            assert!(t.sector_residual < 1e-6, "{t:?}");
        }
    }

    #[test]
    fn dephasing_only_step_stays_in_code() {
        let mut cfg = base();
        cfg.spec.lambda_plus = vec![c(0.0); 2];
        let r = first_order_check(&cfg, 1e-3).unwrap();
        assert!(r.analytic_labels.is_empty() && r.exact_labels.is_empty());
        assert!(r.terms.iter().all(|t| t.exact_norm < 1e-12));
        assert!(r.residual < 1e-6);
    }

    #[test]
    fn general_codebook_runs() {
        let mut coeffs = BTreeMap::new();
        coeffs.insert("0".to_string(), c(FRAC_1_SQRT_2));
        coeffs.insert("1".to_string(), c(-FRAC_1_SQRT_2));
        let mut cfg = base();
        cfg.initial = Initial::Logical(coeffs);
        cfg.construction = Construction::General;
        cfg.layout = PairLayout::standard(3, true).unwrap();
        cfg.spec = HamiltonianSpec::desk_scale(3);
        cfg.spec.bath.shared = true;
        let r = zeno_run(&cfg).unwrap();
        assert!(r.success_probability > 0.99 && r.success_probability < 1.0);
        assert!((r.code_population - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exchange_demos() {
        let grid = [0.0, FRAC_PI_2 / 2.0, FRAC_PI_2];
        let flip = demo_unprotected(c(1.0), c(0.0), 1.0, &grid).unwrap();
        assert!((flip[0].fidelity - 1.0).abs() < 1e-15);
        assert!(flip[2].fidelity < 1e-10);
        let sym = demo_unprotected(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), 1.0, &grid).unwrap();
        assert!(sym.iter().all(|p| (p.fidelity - 1.0).abs() < 1e-12));
        let protected = demo_protected(c(1.0), c(0.0), 1.0, &time_grid(10.0, 41)).unwrap();
        assert!(protected.iter().all(|p| (p.fidelity - 1.0).abs() < 1e-10));
        assert!(demo_unprotected(c(1.0), c(1.0), 1.0, &grid).is_err());
    }

    #[test]
    fn time_grid_endpoints() {
        assert_eq!(time_grid(2.0, 3), vec![0.0, 1.0, 2.0]);
        assert_eq!(time_grid(2.0, 1), vec![0.0]);
        assert!(time_grid(2.0, 0).is_empty());
    }
}
