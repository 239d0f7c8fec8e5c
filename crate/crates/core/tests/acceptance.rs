//! Acceptance suite. Each test prints one `PASS`/`FAIL` line and then asserts.
//! The line goes straight to stdout so it shows without `--nocapture`.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::io::Write;
use std::process::Command;

use rand::Rng;
use tribell::bell::{self, derive_st, expectation_bell_fast, MeasurementSettings};
use tribell::optimize::{
    maximize_omega, planar_case_settings, planar_grid_max_abs_d, seesaw_max_abs_d, OptimizationResult,
    OptimizerConfig,
};
use tribell::pauli::{decompose, invariant_norms, q_norm};
use tribell::quantum_core::QubitIndex;
use tribell::states::{
    self, basis_state, canonical_biseparable, ghz, phi_plus_otimes_zero, random_in_class_with_rank, seeded_rng,
    to_density, Bipartition, DensityMatrix, FactorRank, SeparabilityClass,
};

const OPT_TOL: f64 = 1e-6;

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] criterion {n}: {name}: {detail}\n");
    let _ = std::io::stdout().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn cfg(seed: u64) -> OptimizerConfig {
    OptimizerConfig::with_seed(seed)
}

/// Mixture sampler alternating single pure products and full-rank mixtures.
fn class_sample(class: SeparabilityClass, k: u64) -> DensityMatrix {
    let (rank, n_mix) = if k.is_multiple_of(2) {
        (FactorRank::Pure, 1)
    } else {
        (FactorRank::Full, 1 + (k as usize / 2) % 3)
    };
    random_in_class_with_rank(class, n_mix, rank, 10_000 + k).unwrap()
}

fn random_state<R: Rng>(rng: &mut R) -> DensityMatrix {
    if rng.random_bool(0.5) {
        to_density(&states::random_pure_with(rng))
    } else {
        let rank = rng.random_range(1..=8);
        DensityMatrix::new(states::ginibre_density(8, rank, rng)).unwrap()
    }
}

fn random_index<R: Rng>(rng: &mut R) -> QubitIndex {
    QubitIndex::all()[rng.random_range(0..3)]
}

fn violations(runs: &[OptimizationResult]) -> usize {
    runs.iter().map(|r| r.telemetry.monotonicity_violations).sum()
}

#[test]
fn criterion_01_fully_separable_bound() {
    let mut worst = 0.0_f64;
    let mut runs = Vec::new();
    for k in 0..300 {
        let rho = class_sample(SeparabilityClass::FullySeparable, k);
        for i in QubitIndex::all() {
            let r = seesaw_max_abs_d(&rho, i, &cfg(k)).unwrap();
            worst = worst.max(r.value);
            runs.push(r);
        }
    }
    let over = runs.iter().filter(|r| r.value > 1.0 + OPT_TOL).count();
    let zero = to_density(&basis_state(0));
    let sat: Vec<f64> = QubitIndex::all()
        .iter()
        .map(|&i| seesaw_max_abs_d(&zero, i, &cfg(1)).unwrap().value)
        .collect();
    let sat_ok = sat.iter().all(|v| (v - 1.0).abs() < OPT_TOL);
    verdict(
        1,
        "fully separable |<D^(i)>| <= 1",
        over == 0 && sat_ok && violations(&runs) == 0,
        &format!("900 optimizations, {over} above 1+1e-6 (max {worst:.9}); |000> gives {sat:.9?}"),
    );
}

#[test]
fn criterion_02_biseparable_cuboids() {
    let mut over = 0;
    let mut worst = [0.0_f64; 3];
    let mut runs = Vec::new();
    for p in Bipartition::ALL {
        for k in 0..200 {
            let rho = class_sample(SeparabilityClass::Biseparable(p), k);
            for i in QubitIndex::all() {
                let r = seesaw_max_abs_d(&rho, i, &cfg(k)).unwrap();
                let bound = if i == p.separated() { SQRT_2 } else { 1.0 };
                if r.value > bound + OPT_TOL {
                    over += 1;
                }
                if i != p.separated() {
                    worst[p.separated().pos()] = worst[p.separated().pos()].max(r.value);
                }
                runs.push(r);
            }
        }
    }
    let m3 = seesaw_max_abs_d(&to_density(&phi_plus_otimes_zero()), QubitIndex::THREE, &cfg(2))
        .unwrap()
        .value;
    let sat_ok = (m3 - SQRT_2).abs() < OPT_TOL;
    verdict(
        2,
        "bi-separable cuboids",
        over == 0 && sat_ok && violations(&runs) == 0,
        &format!(
            "1800 optimizations, {over} violations; largest 1-bounded value per class {worst:.9?}; \
             phi-plus-otimes-0 m3 = {m3:.9}"
        ),
    );
}

#[test]
fn criterion_03_universal_sqrt2_bound() {
    let mut rng = seeded_rng(303);
    let mut worst = 0.0_f64;
    for _ in 0..2000 {
        let rho = random_state(&mut rng);
        let m = MeasurementSettings::random(&mut rng);
        let i = random_index(&mut rng);
        worst = worst.max(bell::expectation_bell(&rho, &m, i).unwrap().abs());
    }
    let g = to_density(&ghz());
    let sat: Vec<f64> = QubitIndex::all()
        .iter()
        .map(|&i| seesaw_max_abs_d(&g, i, &cfg(3)).unwrap().value)
        .collect();
    let sat_ok = sat.iter().all(|v| (v - SQRT_2).abs() < OPT_TOL);
    verdict(
        3,
        "|<D^(i)>| <= sqrt 2",
        worst <= SQRT_2 + 1e-9 && sat_ok,
        &format!("2000 random cases max {worst:.9}; GHZ optimizes to {sat:.9?}"),
    );
}

#[test]
fn criterion_04_sphere_bound() {
    let mut rng = seeded_rng(404);
    let mut worst = 0.0_f64;
    for _ in 0..2000 {
        let rho = random_state(&mut rng);
        let m = MeasurementSettings::random(&mut rng);
        worst = worst.max(bell::omega(&rho, &m).unwrap());
    }
    let g = maximize_omega(&to_density(&ghz()), &cfg(4)).unwrap();
    let z = maximize_omega(&to_density(&basis_state(0)), &cfg(4)).unwrap();
    let pass = worst <= 3.0 + 1e-9 && (g.value - 3.0).abs() < OPT_TOL && (z.value - 3.0).abs() < OPT_TOL;
    verdict(
        4,
        "omega <= 3",
        pass,
        &format!(
            "2000 random cases max {worst:.9}; maximize_omega: GHZ {:.9}, |000> {:.9}",
            g.value, z.value
        ),
    );
}

#[test]
fn criterion_05_pure_state_invariants() {
    let mut rng = seeded_rng(505);
    let mut worst_two = 0.0_f64;
    let mut worst_four = 0.0_f64;
    let mut q_range = (f64::MAX, f64::MIN);
    for _ in 0..500 {
        let d = decompose(&to_density(&states::random_pure_with(&mut rng)));
        let (two, four) = invariant_norms(&d);
        worst_two = worst_two.max((two - 3.0).abs());
        worst_four = worst_four.max((four - 4.0).abs());
        let q = q_norm(&d);
        q_range = (q_range.0.min(q), q_range.1.max(q));
    }
    let g = decompose(&to_density(&ghz()));
    let mut ghz_err = 0.0_f64;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let expected = match (a, b, c) {
                    (0, 0, 0) => 1.0,
                    (0, 1, 1) | (1, 0, 1) | (1, 1, 0) => -1.0,
                    _ => 0.0,
                };
                ghz_err = ghz_err.max((g.q[a][b][c] - expected).abs());
            }
        }
    }
    let pass = worst_two <= 1e-10
        && worst_four <= 1e-10
        && q_range.0 >= 1.0 - 1e-9
        && q_range.1 <= 2.0 + 1e-9
        && ghz_err <= 1e-12;
    verdict(
        5,
        "pure-state invariants",
        pass,
        &format!(
            "|R|^2+|S|^2+|T|^2 err {worst_two:.2e}, |Q|^2+locals err {worst_four:.2e}, \
             |Q| in [{:.9}, {:.9}], GHZ Q err {ghz_err:.2e}",
            q_range.0, q_range.1
        ),
    );
}

#[test]
fn criterion_06_local_unitary_invariance() {
    let mut rng = seeded_rng(606);
    let mut norm_err = 0.0_f64;
    let mut m1_err = 0.0_f64;
    for k in 0..100 {
        let psi = states::random_pure_with(&mut rng);
        let u = states::random_local_unitaries(&mut rng);
        let rho = to_density(&psi);
        let rho_u = to_density(&psi.apply_local(&u).unwrap());
        let (a2, a4) = invariant_norms(&decompose(&rho));
        let (b2, b4) = invariant_norms(&decompose(&rho_u));
        norm_err = norm_err.max((a2 - b2).abs()).max((a4 - b4).abs());
        let m = seesaw_max_abs_d(&rho, QubitIndex::ONE, &cfg(k)).unwrap().value;
        let m_u = seesaw_max_abs_d(&rho_u, QubitIndex::ONE, &cfg(k + 1000)).unwrap().value;
        m1_err = m1_err.max((m - m_u).abs());
    }
    verdict(
        6,
        "local-unitary invariance",
        norm_err <= 1e-10 && m1_err <= 1e-5,
        &format!("invariant norms err {norm_err:.2e}, optimized m1 err {m1_err:.2e}"),
    );
}

#[test]
fn criterion_07_dual_path_oracle() {
    let mut rng = seeded_rng(707);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let rho = random_state(&mut rng);
        let m = MeasurementSettings::random(&mut rng);
        let i = random_index(&mut rng);
        let direct = bell::expectation_bell(&rho, &m, i).unwrap();
        let fast = expectation_bell_fast(&decompose(&rho), &derive_st(&m), i);
        worst = worst.max((direct - fast).abs());
    }
    verdict(
        7,
        "matrix vs Pauli expectation",
        worst <= 1e-12,
        &format!("1000 cases max gap {worst:.2e}"),
    );
}

#[test]
fn criterion_08_angle_oracle() {
    let g = to_density(&ghz());
    let closed = |t: [f64; 3]| {
        let s = t[0] + t[1] + t[2];
        1.5 * (s.cos() - s.sin()).powi(2)
    };
    let mut rng = seeded_rng(808);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let t = [0; 3].map(|_| rng.random_range(0.0..2.0 * PI));
        let w = bell::omega(&g, &planar_case_settings(t)).unwrap();
        worst = worst.max((w - closed(t)).abs());
    }
    let n = 16;
    let mut sup = f64::MIN;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let t = [a, b, c].map(|k| 2.0 * PI * k as f64 / n as f64);
                sup = sup.max(bell::omega(&g, &planar_case_settings(t)).unwrap());
            }
        }
    }
    verdict(
        8,
        "planar angle oracle",
        worst <= 1e-10 && (sup - 3.0).abs() <= 1e-10,
        &format!("50 random angles max gap {worst:.2e}; grid supremum {sup:.12}"),
    );
}

#[test]
fn criterion_09_seesaw_properties() {
    let mut states_under_test = vec![("ghz".to_string(), to_density(&ghz()))];
    for p in Bipartition::ALL {
        for alpha in [0.3, FRAC_PI_4, 1.0] {
            states_under_test.push((
                format!("{}@{alpha:.3}", p.label()),
                to_density(&canonical_biseparable(p, alpha)),
            ));
        }
    }
    let mut worst_gap = f64::MIN;
    let mut runs = Vec::new();
    for (k, (_, rho)) in states_under_test.iter().enumerate() {
        for i in QubitIndex::all() {
            let r = seesaw_max_abs_d(rho, i, &cfg(k as u64)).unwrap();
            worst_gap = worst_gap.max(planar_grid_max_abs_d(rho, i, 16) - r.value);
            runs.push(r);
        }
    }
    let mut rng = seeded_rng(909);
    for k in 0..100 {
        let rho = random_state(&mut rng);
        runs.push(seesaw_max_abs_d(&rho, random_index(&mut rng), &cfg(k)).unwrap());
        if k % 10 == 0 {
            runs.push(maximize_omega(&rho, &cfg(k)).unwrap());
        }
    }
    let bad = violations(&runs);
    let max_decrease = runs.iter().map(|r| r.telemetry.max_decrease).fold(0.0, f64::max);
    verdict(
        9,
        "see-saw monotone and beats planar grid",
        bad == 0 && worst_gap <= 1e-6,
        &format!(
            "{} runs, {bad} decreases beyond slack (largest {max_decrease:.2e}); \
             grid minus see-saw at most {worst_gap:.2e}",
            runs.len()
        ),
    );
}

fn cli(args: &[&str], stdin: Option<&[u8]>) -> Vec<u8> {
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_tribell"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or_default()).unwrap();
    drop(pipe);
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "tribell {args:?} failed");
    out.stdout
}

fn regions(figure_csv: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(figure_csv)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().to_string())
        .collect()
}

#[test]
fn criterion_10_figure_reproduction() {
    let mut seen = std::collections::BTreeSet::new();
    let mut deterministic = true;
    for class in ["fully-separable", "1-23", "2-13", "12-3", "haar-pure", "ghz-family"] {
        let args = ["sample", "--class", class, "-n", "20", "--seed", "10", "--mode", "optimized"];
        let sample = cli(&args, None);
        deterministic &= sample == cli(&args, None);
        let fig = cli(&["figure", "--plane", "12"], Some(&sample));
        deterministic &= fig == cli(&["figure", "--plane", "12"], Some(&sample));
        seen.extend(regions(&fig));
    }
    let fixed = cli(&["sample", "--class", "fully-separable", "-n", "500", "--seed", "11"], None);
    let mut escaped = 0;
    for plane in ["12", "13", "23"] {
        escaped += regions(&cli(&["figure", "--plane", plane], Some(&fixed)))
            .iter()
            .filter(|r| *r != "I")
            .count();
    }
    let all = ["I", "II", "III", "corner"].iter().all(|r| seen.contains(*r));
    verdict(
        10,
        "figure regions",
        all && escaped == 0 && deterministic,
        &format!(
            "regions populated {seen:?}; fully-separable points outside I: {escaped}; deterministic: {deterministic}"
        ),
    );
}
