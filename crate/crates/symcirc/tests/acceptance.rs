//! Acceptance gate. Each numbered criterion runs at its stated tolerance
//! and prints one verdict line; clause-level tests share the heavyweight
//! fixtures below. Three clauses fail deliberately on the pinned seed and
//! are kept red on purpose; README.md and the fit/gue module docs explain
//! the measured values behind them.

use std::process::Command;

use num::BigRational;
use once_cell::sync::Lazy;
use rand_core::RngCore;

use symcirc::circuit::{run_ensemble, EnsembleStats, SimConfig};
use symcirc::fit::{fit_front, front_profile_check, FrontFit};
use symcirc::gue::{ensemble_curves, GueConfig, GueRun};
use symcirc::haar::{compare, estimate_kernel, CompareReport, KernelEstimate};
use symcirc::kernels::{kernel, SymmetryClass};
use symcirc::rng::CounterRng;
use symcirc::walk::{
    chain_diffusion, closed_form_vb, four_state_front, persistent_embedding, persistent_walk,
    series_vb, FourStateProbs,
};

/// Master seed for every stochastic fixture. Pinned before the fixture
/// outcomes were known; results are reported as they fall.
const SEED: u64 = 0;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn ratf(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

fn verdict(criterion: &str, pass: bool, detail: &str) -> bool {
    let word = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion}: {word} - {detail}");
    pass
}

/// Monte Carlo front fixtures: n = 512, 150 layers, 20 000 trajectories,
/// fit window [50, 150].
static SIM: Lazy<Vec<(SymmetryClass, EnsembleStats, FrontFit)>> = Lazy::new(|| {
    SymmetryClass::ALL
        .into_iter()
        .map(|class| {
            let mut cfg = SimConfig::new(class, 512, 150, 20_000, SEED);
            cfg.fit_window = (50, 150);
            let stats = run_ensemble(&cfg).expect("ensemble run");
            let fit = fit_front(&stats, cfg.fit_window).expect("front fit");
            (class, stats, fit)
        })
        .collect()
});

/// Gate-sampling oracle fixtures: 100 000 gates per class.
static ORACLE: Lazy<Vec<(SymmetryClass, KernelEstimate, CompareReport)>> = Lazy::new(|| {
    SymmetryClass::ALL
        .into_iter()
        .map(|class| {
            let est = estimate_kernel(class, 100_000, SEED).expect("oracle estimate");
            let report = compare(&est, &kernel(class)).expect("oracle compare");
            (class, est, report)
        })
        .collect()
});

/// GUE fixture: 5 qubits, 200 samples, default grid.
static GUE: Lazy<GueRun> =
    Lazy::new(|| ensemble_curves(&GueConfig::new(5, 200, SEED)).expect("gue run"));

fn theory_vb(class: SymmetryClass) -> BigRational {
    closed_form_vb(class, 2).unwrap()
}

#[test]
fn acceptance_1_theory_velocities_and_expansions_exact() {
    let expected = [
        (SymmetryClass::Unitary, rat(3, 5)),
        (SymmetryClass::Coe, rat(153, 305)),
        (SymmetryClass::Cse, rat(11, 41)),
        (SymmetryClass::Orthogonal, rat(23, 39)),
        (SymmetryClass::Symplectic, rat(7, 15)),
    ];
    let mut ok = true;
    for (class, want) in &expected {
        ok &= &theory_vb(*class) == want;
    }
    let series: [(SymmetryClass, &[i64]); 5] = [
        (SymmetryClass::Unitary, &[1, 0, -2, 0, 2, 0, -2]),
        (SymmetryClass::Coe, &[1, 0, -2, 0, -2, 0, 14]),
        (SymmetryClass::Cse, &[1, 0, -2, 0, -2, 0, -2]),
        (SymmetryClass::Orthogonal, &[1, 0, -2, 0, 0, 6, -4]),
        (SymmetryClass::Symplectic, &[1, 0, -2, 0, 0, -2, 0, 4]),
    ];
    for (class, coeffs) in series {
        let got = series_vb(class, coeffs.len() - 1).unwrap();
        let want: Vec<BigRational> = coeffs.iter().map(|&c| rat(c, 1)).collect();
        ok &= got == want;
    }
    let pass = verdict(
        "1",
        ok,
        "q=2 velocities {3/5, 153/305, 11/41, 23/39, 7/15} and 1/q expansions, exact",
    );
    assert!(pass);
}

#[test]
fn acceptance_2_monte_carlo_velocities_absolute() {
    let mut detail = String::new();
    let mut worst = 0.0f64;
    for (class, _, fit) in SIM.iter() {
        let dev = (fit.right.v_b_hat - ratf(&theory_vb(*class))).abs();
        worst = worst.max(dev);
        detail.push_str(&format!("{} {:+.5} ", class.name(), dev));
    }
    let pass = verdict(
        "2a",
        worst < 0.01,
        &format!("|v_hat - v_B| per class: {detail}(tolerance 0.01)"),
    );
    assert!(pass, "worst deviation {worst}");
}

#[test]
fn acceptance_2_monte_carlo_velocities_within_stderr() {
    let mut detail = String::new();
    let mut worst = 0.0f64;
    for (class, _, fit) in SIM.iter() {
        let se = fit.right.v_b_stderr.expect("stderr");
        let z = (fit.right.v_b_hat - ratf(&theory_vb(*class))) / se;
        if z.abs() > worst.abs() {
            worst = z;
        }
        detail.push_str(&format!("{} {:+.1} ", class.name(), z));
    }
    let pass = verdict(
        "2b",
        worst.abs() <= 3.0,
        &format!("z per class: {detail}(gate 3 stderr)"),
    );
    assert!(
        pass,
        "worst z {worst:+.1}; the even/odd chain velocities carry a real \
         1e-3-scale finite-memory bias, see README"
    );
}

#[test]
fn acceptance_3_cse_arbitration() {
    let (_, _, fit) = SIM
        .iter()
        .find(|(c, _, _)| *c == SymmetryClass::Cse)
        .unwrap();
    let v = fit.right.v_b_hat;
    let se = fit.right.v_b_stderr.expect("stderr");
    let closed = ratf(&rat(11, 41));
    let recipe = ratf(&rat(3, 11));
    let z_closed = (v - closed) / se;
    let z_recipe = (v - recipe) / se;
    let resolves = se <= 0.002 && z_closed.abs() <= 3.0 && z_recipe.abs() > 3.0;
    let pass = verdict(
        "3",
        resolves,
        &format!(
            "v_hat = {v:.5} +- {se:.5}; 11/41 at {z_closed:+.1} sigma, 3/11 at {z_recipe:+.1} sigma; \
             the simulation supports 11/41"
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_4_diffusion_constants() {
    let targets = [0.32, 0.31, 0.22, 0.31, 0.31];
    let mut detail = String::new();
    let mut worst = 0.0f64;
    for ((class, _, fit), target) in SIM.iter().zip(targets) {
        let dev = (fit.right.d_hat - target).abs();
        worst = worst.max(dev);
        detail.push_str(&format!("{} {:.4}/{target} ", class.name(), fit.right.d_hat));
    }
    let pass = verdict(
        "4",
        worst < 0.03,
        &format!("D_hat/target per class: {detail}(tolerance 0.03)"),
    );
    assert!(pass, "worst deviation {worst}");
}

#[test]
fn acceptance_5_kernel_oracle() {
    let mut ok = true;
    let mut detail = String::new();
    for (class, _, report) in ORACLE.iter() {
        ok &= report.pass;
        detail.push_str(&format!("{} z={:.1} ", class.name(), report.max_z));
    }
    // The even-rate constant: IX -> IZ is an even-to-even entry whose rate
    // must land on 1/5 and exclude 2/15.
    let (_, est, _) = ORACLE
        .iter()
        .find(|(c, _, _)| *c == SymmetryClass::Symplectic)
        .unwrap();
    let (m, se) = (est.mean[1][3], est.stderr[1][3]);
    let resolved = (m - 0.2).abs() <= 4.0 * se && (m - 2.0 / 15.0).abs() > 4.0 * se;
    ok &= resolved;
    let pass = verdict(
        "5",
        ok,
        &format!(
            "{detail}(gate 4 sigma); symplectic even rate {m:.4} resolves 1/5 over 2/15: {resolved}"
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_6_walk_theory_internal_consistency() {
    let mut rng = CounterRng::keyed(&[6]);
    let mut checked = 0u32;
    let mut ok = true;
    while checked < 1000 {
        let p1 = rat((rng.next_u64() % 65) as i64, 64);
        let p2 = rat((rng.next_u64() % 65) as i64, 64);
        if p1 == rat(0, 1) || p2 == rat(1, 1) {
            continue;
        }
        let embedded: FourStateProbs = persistent_embedding(&p1, &p2);
        let via_chain = four_state_front(&embedded).unwrap();
        let direct = persistent_walk(&p1, &p2).unwrap();
        ok &= via_chain == direct;
        ok &= chain_diffusion(&embedded).unwrap() == direct.d;
        checked += 1;
    }
    // Series partial sums stay within the first omitted term at q = 100
    // (11/10 headroom for same-sign tails).
    let q = 100i64;
    for class in SymmetryClass::ALL {
        let coeffs = series_vb(class, 8).unwrap();
        let exact = closed_form_vb(class, q).unwrap();
        for k in 0..=6usize {
            let mut partial = rat(0, 1);
            for (j, c) in coeffs.iter().take(k + 1).enumerate() {
                partial += c / rat(q.pow(j as u32), 1);
            }
            let Some(m) = (k + 1..coeffs.len()).find(|&m| coeffs[m] != rat(0, 1)) else {
                continue;
            };
            let err = if exact >= partial {
                &exact - &partial
            } else {
                &partial - &exact
            };
            let bound_term = if coeffs[m] >= rat(0, 1) {
                coeffs[m].clone()
            } else {
                -coeffs[m].clone()
            };
            let bound = bound_term / rat(q.pow(m as u32), 1) * rat(11, 10);
            ok &= err <= bound;
        }
    }
    let pass = verdict(
        "6",
        ok,
        "1000 degenerate four-state tuples reduce exactly; series tails bounded at q = 100",
    );
    assert!(pass);
}

#[test]
fn acceptance_7_front_shape_supnorm() {
    let (_, stats, fit) = SIM
        .iter()
        .find(|(c, _, _)| *c == SymmetryClass::Unitary)
        .unwrap();
    let profile = front_profile_check(stats, fit, 100).unwrap();
    let pass = verdict(
        "7a",
        profile.sup_norm < 0.02,
        &format!(
            "unitary front at t = 100: sup-norm to fitted Gaussian {:.4} (tolerance 0.02)",
            profile.sup_norm
        ),
    );
    assert!(pass, "sup-norm {}", profile.sup_norm);
}

#[test]
fn acceptance_7_front_shape_skewness() {
    let (_, stats, fit) = SIM
        .iter()
        .find(|(c, _, _)| *c == SymmetryClass::Unitary)
        .unwrap();
    let profile = front_profile_check(stats, fit, 100).unwrap();
    let pass = verdict(
        "7b",
        profile.skewness.abs() < 0.1,
        &format!(
            "unitary front at t = 100: skewness {:+.4} (gate 0.1; the exact edge \
             distribution has skewness -0.150 at this depth)",
            profile.skewness
        ),
    );
    assert!(
        pass,
        "skewness {:+.4}: the front is genuinely skewed at t = 100, see README",
        profile.skewness
    );
}

fn window_average(run: &GueRun, curve: &[f64], lo: f64, hi: f64) -> f64 {
    let mut sum = 0.0;
    let mut count = 0u32;
    for (i, &t) in run.times.iter().enumerate() {
        if t >= lo && t <= hi {
            sum += curve[i];
            count += 1;
        }
    }
    sum / count as f64
}

#[test]
fn acceptance_8_gue_dip() {
    let run = &*GUE;
    let d2 = (run.d_h * run.d_h) as f64;
    let t_dip = run.times[run.dip_index()];
    let (lo, hi) = (0.8 * t_dip, 1.2 * t_dip);
    let gi = window_average(run, &run.g_initial, lo, hi) * d2;
    let gc = window_average(run, &run.g_commute, lo, hi) * d2;
    let ga = window_average(run, &run.g_anticommute, lo, hi) * d2;
    let ok = [gi, gc, ga].iter().all(|v| (v - 1.0).abs() < 0.2);
    let pass = verdict(
        "8a",
        ok,
        &format!(
            "dip near t = {t_dip}: group weights {gi:.3}, {gc:.3}, {ga:.3} in units of 1/d^2 \
             (tolerance 20%)"
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_8_gue_plateau_ratio() {
    let run = &*GUE;
    let lo = 2.5 * run.d_h as f64;
    let hi = *run.times.last().unwrap();
    let gi = window_average(run, &run.g_initial, lo, hi);
    let gc = window_average(run, &run.g_commute, lo, hi);
    let ga = window_average(run, &run.g_anticommute, lo, hi);
    // All 1022 non-initial, non-identity strings, weighted by group size.
    let other = (510.0 * gc + 512.0 * ga) / 1022.0;
    let ratio = gi / other;
    let pass = verdict(
        "8b",
        (ratio - 2.0).abs() <= 0.3,
        &format!(
            "plateau weight ratio initial/other = {ratio:.3} (gate 2 +- 15%; the GUE \
             unitary-invariance value is 3)"
        ),
    );
    assert!(
        pass,
        "ratio {ratio:.3}: fourth-moment factor 2 plus the diagonal square makes this 3, \
         see README"
    );
}

#[test]
fn acceptance_8_gue_ramp_ordering() {
    let run = &*GUE;
    let t_dip = run.times[run.dip_index()];
    let (lo, hi) = (1.2 * t_dip, 2.5 * run.d_h as f64);
    let ga = window_average(run, &run.g_anticommute, lo, hi);
    let gc = window_average(run, &run.g_commute, lo, hi);
    let pass = verdict(
        "8c",
        ga >= gc,
        &format!("ramp averages: anticommuting {ga:.6} vs commuting {gc:.6}"),
    );
    assert!(pass);
}

fn run_cli(args: &[&str], dir: &std::path::Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_symcirc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

/// Byte-compare two output trees, neutralizing the wall-clock field in
/// manifests.
fn assert_identical_outputs(a: &std::path::Path, b: &std::path::Path, names: &[&str]) {
    for name in names {
        let left = std::fs::read(a.join(name)).unwrap();
        let right = std::fs::read(b.join(name)).unwrap();
        if name.contains("manifest") {
            let mut l: serde_json::Value = serde_json::from_slice(&left).unwrap();
            let mut r: serde_json::Value = serde_json::from_slice(&right).unwrap();
            l["duration_seconds"] = 0.into();
            r["duration_seconds"] = 0.into();
            assert_eq!(l, r, "{name} differs beyond duration");
        } else {
            assert_eq!(left, right, "{name} differs between thread counts");
        }
    }
}

#[test]
fn acceptance_9_determinism_across_threads() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir4 = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &[
            "simulate", "--sites", "64", "--layers", "20", "--ensemble", "500", "--seed", "3",
            "--burn-in", "4", "--out", "sim",
        ],
        &["oracle", "--samples", "12000", "--seed", "3", "--out", "oracle.json"],
        &[
            "gue", "--qubits", "3", "--samples", "100", "--points", "21", "--seed", "3", "--out",
            "gue.csv",
        ],
    ];
    for args in runs {
        for (threads, dir) in [("1", dir1.path()), ("4", dir4.path())] {
            let mut full = args.to_vec();
            full.extend_from_slice(&["--threads", threads]);
            let out = run_cli(&full, dir);
            assert!(out.status.success(), "{args:?} failed: {out:?}");
        }
    }
    assert_identical_outputs(
        dir1.path(),
        dir4.path(),
        &[
            "sim_edges.csv",
            "sim_rho.csv",
            "sim_fit.json",
            "sim_manifest.json",
            "oracle.json",
            "oracle.manifest.json",
            "gue.csv",
            "gue.manifest.json",
        ],
    );
    let pass = verdict(
        "9",
        true,
        "simulate/oracle/gue outputs byte-identical across --threads 1 and 4",
    );
    assert!(pass);
}
