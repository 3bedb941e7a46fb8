//! One line per acceptance criterion, `[PASS]` or `[FAIL]`, with timings.
//!
//! Criterion 6 checks a counting claim that is false from n = 7 on
//! (`C(9, 4) = 126 < 2^7`). It prints `[FAIL]` with the counterexample. The
//! harness still exits 0 when that is the only failure and the oracle
//! reproduces the expected counterexamples exactly.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dfs_zeno::bath::{bath_ops, BathModel};
use dfs_zeno::codes::*;
use dfs_zeno::linalg::{expm_hermitian, partial_trace, LinearMap, StateVector, C64};
use dfs_zeno::system::{build_h_total, pair_sigma_terms, PairLayout, PauliComponent, Register};
use dfs_zeno::zeno::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    /// The claim is false and the oracle reproduces the expected counterexample.
    KnownFalse(String),
}

type Check = Result<Verdict, String>;
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_qubit(rng: &mut ChaCha8Rng) -> (C64, C64) {
    let theta: f64 = rng.gen_range(0.0..PI);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    (c((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phi))
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Free evolution (no tests) for T0 = 1 with the leakage couplings off.
fn dfs_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for model in [BathModel::Ladder, BathModel::RandomHermitian] {
        for _ in 0..5 {
            let (alpha, beta) = random_qubit(&mut rng);
            let mut spec = dfs_zeno::system::HamiltonianSpec::desk_scale(2);
            spec.lambda_plus = vec![c(0.0); 2];
            spec.lambda_z = vec![0.3, 0.7];
            spec.j_per_pair = vec![0.9; 2];
            spec.bath.model = model;
            spec.bath.seed = rng.gen();
            let bath = bath_ops(&spec.bath, 2).map_err(err)?;
            let reg = Register::new(PairLayout::standard(2, false).map_err(err)?, Some(bath.dim()));
            let h = build_h_total(&spec, &reg, &bath).map_err(err)?;
            let psi_enc = encode_one_qubit(alpha, beta).map_err(err)?;
            let psi0 = psi_enc.kron(&bath.psi_b0).map_err(err)?;
            let psi_t = expm_hermitian(&h, 1.0).map_err(err)?.evolve(&psi0).map_err(err)?;
            let rho = partial_trace(&psi_t, &reg.layout().data_factors()).map_err(err)?;
            worst = worst.max(1.0 - rho.expectation(&psi_enc).map_err(err)?);
        }
    }
    Ok(verdict(
        worst <= 1e-10,
        format!("worst infidelity {worst:.2e} over 10 states, two bath models"),
    ))
}

fn exchange_annihilation() -> Check {
    let h = uniform_h_ex(2, 1.0).map_err(err)?;
    let zero = codeword_state(&[0, 1]).map_err(err)?;
    let one = codeword_state(&[1, 0]).map_err(err)?;
    let n0 = h.apply(zero.amplitudes()).norm();
    let n1 = h.apply(one.amplitudes()).norm();
    Ok(verdict(n0 <= 1e-12 && n1 <= 1e-12, format!("|H_EX 0_L| = {n0:.1e}, |H_EX 1_L| = {n1:.1e}")))
}

fn zeno_scaling() -> Check {
    let config = ZenoConfig::desk_scale(c(0.6), C64::new(0.0, 0.8));
    let rows = zeno_sweep(&config, &[8, 16, 32, 64, 128, 256, 512]).map_err(err)?;
    let fit = fit_sweep(&rows).map_err(err)?;
    Ok(verdict(
        (fit.slope + 1.0).abs() <= 0.15 && fit.r_squared >= 0.98,
        format!(
            "slope {:.4}, r^2 {:.7}, leakage {:.3e} at N=8 to {:.3e} at N=512",
            fit.slope, fit.r_squared, rows[0].leakage, rows[6].leakage
        ),
    ))
}

fn first_order_structure() -> Check {
    let mut config = ZenoConfig::desk_scale(c(0.6), C64::new(0.0, 0.8));
    config.spec.bath.model = BathModel::RandomHermitian;
    config.spec.bath.seed = 3;
    let a = first_order_check(&config, 1e-3).map_err(err)?;
    let b = first_order_check(&config, 5e-4).map_err(err)?;
    let ratio = a.residual / b.residual;
    let all = ["pair 0 -> |11>", "pair 0 -> |00>", "pair 1 -> |11>", "pair 1 -> |00>"];
    let full_ok = a.labels_match && b.labels_match && a.analytic_labels == all;

    // Switching off pair 1's coupling removes exactly its two channels.
    config.spec.lambda_plus[1] = c(0.0);
    let only_first = first_order_check(&config, 1e-3).map_err(err)?;
    let first_ok = only_first.labels_match && only_first.analytic_labels == all[..2];
    // |0_L⟩ alone has its triplet on pair 0, so only pair 0 can leak.
    config.spec.lambda_plus[1] = c(0.1);
    config.initial = Initial::Qubit { alpha: c(1.0), beta: c(0.0) };
    let zero_l = first_order_check(&config, 1e-3).map_err(err)?;
    let zero_ok = zero_l.labels_match && zero_l.analytic_labels == all[..2];

    Ok(verdict(
        (3.5..=4.5).contains(&ratio) && full_ok && first_ok && zero_ok,
        format!(
            "residual {:.3e} -> {:.3e}, ratio {ratio:.3}; labels {:?}",
            a.residual, b.residual, a.analytic_labels
        ),
    ))
}

fn projection_semantics() -> Check {
    // Exactly in the code space the tests are transparent.
    let layout = PairLayout::standard(2, true).map_err(err)?;
    let psi = encode_one_qubit(c(0.6), C64::new(0.0, 0.8))
        .and_then(|p| p.kron(&StateVector::basis(0, vec![2])?))
        .map_err(err)?;
    let mut exact_ok = true;
    for pair in 0..2 {
        let out = test_step(&psi, pair, &layout).map_err(err)?;
        let kept =
            out.accepted.as_ref().map_or(0.0, |s| s.inner(&psi).map_or(0.0, |z| z.norm_sqr()));
        exact_ok &= (out.accept_prob - 1.0).abs() <= 1e-14 && (1.0 - kept) <= 1e-14;
    }

    // After short evolution each round accepts with 1 - O(dt^2).
    let config = ZenoConfig::desk_scale(c(0.6), C64::new(0.0, 0.8));
    let protocol = Protocol::compile(&config).map_err(err)?;
    let worst_reject = |dt: f64| -> Result<(f64, f64), String> {
        let rounds = 5;
        let r = protocol.run(rounds, dt * rounds as f64, Mode::PostSelect).map_err(err)?;
        let reject = r.per_round.iter().flat_map(|x| x.reject.iter().copied()).fold(0.0, f64::max);
        Ok((reject, r.final_fidelity))
    };
    let (rej, fid) = worst_reject(1e-3)?;
    let (rej_half, _) = worst_reject(5e-4)?;
    let order = rej / rej_half;
    let mut round_fid: f64 = 1.0;
    for n in 1..=5 {
        let r = protocol.run(n, 1e-3 * n as f64, Mode::PostSelect).map_err(err)?;
        round_fid = round_fid.min(r.final_fidelity);
    }
    Ok(verdict(
        exact_ok && rej <= 1e-4 && (3.5..=4.5).contains(&order) && fid >= 1.0 - 1e-8 && round_fid >= 1.0 - 1e-8,
        format!(
            "max reject {rej:.3e} at dt=1e-3 (x{order:.2} vs dt/2), min per-round fidelity 1-{:.1e}",
            1.0 - round_fid
        ),
    ))
}

fn counting_bounds() -> Check {
    let mut failing = Vec::new();
    for n in 1..=12 {
        let b = count_and_bounds(n).map_err(err)?;
        if !b.bounds_hold {
            failing.push(n);
        }
        let upper = b.count < 1u128 << (n + 1);
        let insufficient = n < 2 || b.n_plus_1_insufficient;
        if !upper || !insufficient {
            return Ok(Verdict::Fail(format!("unexpected failure at n = {n}: {b:?}")));
        }
    }
    let seven = count_and_bounds(7).map_err(err)?;
    if failing.is_empty() {
        return Ok(Verdict::Pass("n < log2 C(n+2, m*) < n+1 for n = 1..12".into()));
    }
    let detail = format!(
        "lower bound fails for n in {failing:?}; counterexample n=7: m*={}, C(9,{})={} < 2^7=128 \
         (log2 {:.4}); upper bound and n+1 insufficiency hold for all n",
        seven.m_star, seven.m_star, seven.count, seven.log2_count
    );
    // The claim is false exactly from n = 7, where the largest binomial
    // coefficient of n + 2 stops exceeding 2^n.
    let expected: Vec<usize> = (7..=12).collect();
    if failing == expected && seven.count == 126 {
        Ok(Verdict::KnownFalse(detail))
    } else {
        Ok(Verdict::Fail(detail))
    }
}

fn codebook_eigenstructure() -> Check {
    let j = 0.8;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for n in 1..=4 {
        for construction in [Construction::Standard, Construction::General] {
            let book = build_codebook_with(n, construction).map_err(err)?;
            let words = book.codewords().map_err(err)?;
            let h = uniform_h_ex(book.n_pairs, j).map_err(err)?;
            let want = j * (book.n_pairs as f64 - 2.0 * book.m_star as f64);
            let reg = Register::data(book.n_pairs).map_err(err)?;
            let sz = (0..book.n_pairs)
                .map(|k| pair_sigma_terms(&reg, k, PauliComponent::Z))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            for (i, a) in words.iter().enumerate() {
                let check = exchange_eigencheck(&a.state, &h).map_err(err)?;
                worst = worst.max(check.residual);
                ok &= check.residual <= 1e-12 && (check.eigenvalue - want).abs() <= 1e-12;
                for s in &sz {
                    ok &= s.apply(a.state.amplitudes()).norm() <= 1e-12;
                }
                for (k, b) in words.iter().enumerate() {
                    let g = a.state.inner(&b.state).map_err(err)?;
                    ok &= (g - c(if i == k { 1.0 } else { 0.0 })).norm() <= 1e-12;
                }
            }
        }
    }
    Ok(verdict(ok, format!("n = 1..4, both constructions; worst residual {worst:.1e}")))
}

fn w_encoding() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let j = 1.1;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for n in 3..=5 {
        let raw: Vec<C64> =
            (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let alphas: Vec<C64> = raw.iter().map(|z| z / norm).collect();
        let psi = encode_w(&alphas).map_err(err)?;
        let check = exchange_eigencheck(&psi, &uniform_h_ex(n, j).map_err(err)?).map_err(err)?;
        worst = worst.max(check.residual);
        ok &= check.residual <= 1e-12 && (check.eigenvalue - (n as f64 - 2.0) * j).abs() <= 1e-12;
    }
    Ok(verdict(ok, format!("n = 3, 4, 5 with random amplitudes; worst residual {worst:.1e}")))
}

fn ghz_phase_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=6);
        let t = rng.gen_range(0.0..3.0);
        let j: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
        let (alpha, beta) = random_qubit(&mut rng);
        let formula = ghz_phase(t, &j, &bits).map_err(err)?;
        let numeric = ghz_phase_numeric(alpha, beta, t, &j, &bits).map_err(err)?;
        worst = worst.max(wrap_phase(formula - numeric).abs());
    }
    let mut zero_ok = true;
    for n in [2usize, 4] {
        for v in 0u32..1 << n {
            if 2 * v.count_ones() as usize != n {
                continue;
            }
            let bits: Vec<u8> = (0..n).map(|k| ((v >> k) & 1) as u8).collect();
            let j = vec![0.7; n];
            zero_ok &= ghz_phase(1.9, &j, &bits).map_err(err)? == 0.0;
            zero_ok &=
                ghz_phase_numeric(c(0.6), c(0.8), 1.9, &j, &bits).map_err(err)?.abs() <= 1e-9;
        }
    }
    Ok(verdict(
        worst <= 1e-9 && zero_ok,
        format!("20 random cases, worst phase error {worst:.1e}; balanced patterns give 0"),
    ))
}

fn unprotected_failure() -> Check {
    let grid = time_grid(PI, 33);
    let bare = demo_unprotected(c(1.0), c(0.0), 1.0, &grid).map_err(err)?;
    let at_half = bare
        .iter()
        .find(|p| (p.t - FRAC_PI_2).abs() < 1e-12)
        .ok_or("grid misses Jt = pi/2")?
        .fidelity;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut protected_min: f64 = 1.0;
    for _ in 0..4 {
        let (alpha, beta) = random_qubit(&mut rng);
        for p in demo_protected(alpha, beta, 1.0, &grid).map_err(err)? {
            protected_min = protected_min.min(p.fidelity);
        }
    }
    let coded_zero = demo_protected(c(1.0), c(0.0), 1.0, &grid).map_err(err)?;
    protected_min = coded_zero.iter().map(|p| p.fidelity).fold(protected_min, f64::min);
    Ok(verdict(
        at_half <= 1e-10 && protected_min >= 1.0 - 1e-10,
        format!(
            "two-qubit code F(pi/2) = {at_half:.1e}; four-qubit code min F = 1-{:.1e}",
            1.0 - protected_min
        ),
    ))
}

fn estimator_consistency() -> Check {
    let mut config = ZenoConfig::desk_scale(c(0.6), C64::new(0.0, 0.8));
    config.spec.lambda_plus = vec![c(0.5); 2];
    config.n = 4;
    let protocol = Protocol::compile(&config).map_err(err)?;
    let exact = protocol.run(4, 1.0, Mode::PostSelect).map_err(err)?;
    let mut worst_z: f64 = 0.0;
    for seed in 0..10 {
        let r = protocol.run(4, 1.0, Mode::Trajectories { count: 200, seed }).map_err(err)?;
        let se = r.success_std_err.ok_or("trajectory run lacks a standard error")?;
        worst_z = worst_z.max((r.success_probability - exact.success_probability).abs() / se);
    }
    let ens = protocol.run(4, 1.0, Mode::Ensemble).map_err(err)?;
    let round_sum = ens
        .per_round
        .iter()
        .flat_map(|r| r.accept.iter().zip(&r.reject).map(|(a, b)| (a + b - 1.0).abs()))
        .fold(0.0, f64::max);
    let defect = ens.max_probability_defect.max(round_sum);
    let agree = (ens.success_probability - exact.success_probability).abs();
    Ok(verdict(
        worst_z <= 3.0 && defect <= 1e-10 && agree <= 1e-10,
        format!(
            "P_success {:.4}; worst |z| {worst_z:.2} over 10 seeds x 200; ensemble defect {defect:.1e}",
            exact.success_probability
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("DFS exactness under collective noise", dfs_exactness, Some(Duration::from_secs(1))),
        ("exchange annihilates the one-qubit codewords", exchange_annihilation, None),
        ("post-selected leakage falls as 1/N", zeno_scaling, Some(Duration::from_secs(60))),
        ("first-order expansion and leak labels", first_order_structure, None),
        ("parity tests accept and preserve the code", projection_semantics, None),
        ("codeword counting bounds", counting_bounds, Some(Duration::from_secs(1))),
        ("codebook eigenstructure", codebook_eigenstructure, None),
        ("W-class encoding eigenvalue", w_encoding, None),
        ("GHZ relative phase", ghz_phase_check, None),
        ("unprotected code fails, protected code holds", unprotected_failure, None),
        ("estimator consistency", estimator_consistency, None),
    ];
    let (mut passed, mut known_false, mut failed) = (0, 0, 0);
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let over = budget.filter(|b| elapsed > *b);
        let (tag, detail) = match (outcome, over) {
            (Err(e), _) => ("FAIL", format!("error: {e}")),
            (Ok(_), Some(b)) => ("FAIL", format!("took {elapsed:.2?}, budget {b:.0?}")),
            (Ok(Verdict::Pass(d)), None) => ("PASS", d),
            (Ok(Verdict::Fail(d)), None) => ("FAIL", d),
            (Ok(Verdict::KnownFalse(d)), None) => ("FAIL", format!("known false, verified: {d}")),
        };
        match (tag, detail.starts_with("known false")) {
            ("PASS", _) => passed += 1,
            (_, true) => known_false += 1,
            _ => failed += 1,
        }
        println!("[{tag}] {:>2} {name} ({elapsed:.2?}): {detail}", i + 1);
    }
    println!("{passed} passed, {known_false} known-false claims reproduced, {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
