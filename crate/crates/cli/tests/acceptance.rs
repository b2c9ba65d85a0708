//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::cell::OnceCell;
use std::process::{Command, ExitCode};

use renyi_core::divergence::{classical_renyi, sandwiched_renyi, sandwiched_renyi_psd, umegaki};
use renyi_core::linalg::schatten_norm;
use renyi_core::optimize::{
    conditional_renyi_entropy, holevo_information, minimax_value, mutual_info_dual, mutual_info_primal, Ensemble,
    MinimaxOrder, OptimizerConfig,
};
use renyi_core::states::random::{random_channel, random_density, random_pure_with, rng_from_seed};
use renyi_core::states::{cq_embed, partial_trace_matrix};
use renyi_core::{AlphaOrder, CQState, Channel, ComplexMatrix, DensityMatrix, NormOrder};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_renyi");

struct Outcome {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn renyi(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().expect("run renyi");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf8 stdout"))
}

fn reports(text: &str) -> Vec<Value> {
    let v: Value = serde_json::from_str(text).expect("verify json");
    match v.get("checks") {
        Some(Value::Array(a)) => a.clone(),
        _ => vec![v],
    }
}

fn report<'a>(all: &'a [Value], check: &str) -> &'a Value {
    all.iter().find(|r| r["check"] == check).unwrap_or_else(|| panic!("no {check} report"))
}

fn count(r: &Value, key: &str) -> u64 {
    r[key].as_u64().unwrap_or(u64::MAX)
}

fn clean(r: &Value, trials: u64, max_inconclusive: u64) -> (bool, String) {
    let ok = count(r, "trials") == trials && count(r, "failures") == 0 && count(r, "inconclusive") <= max_inconclusive;
    let s = format!(
        "{}: {} trials, {} failures, {} inconclusive, worst margin {}",
        r["check"].as_str().unwrap_or("?"),
        r["trials"],
        r["failures"],
        r["inconclusive"],
        r["worst_margin"]
    );
    (ok, s)
}

fn timed(check: &str) -> (Value, f64) {
    let (code, text) = renyi(&["verify", check, "--seed", "42", "--timing"]);
    assert!(code == 0 || code == 1, "verify {check} exited {code}");
    let r = reports(&text).remove(0);
    let t = r["elapsed_s"].as_f64().unwrap_or(f64::INFINITY);
    (r, t)
}

fn within_time(check: &str, trials: u64, limit: f64, max_inconclusive: u64) -> (bool, String) {
    let (r, t) = timed(check);
    let (ok, s) = clean(&r, trials, max_inconclusive);
    (ok && t < limit, format!("{s}, {t:.1} s (limit {limit} s)"))
}

fn fin(a: f64) -> AlphaOrder {
    AlphaOrder::Finite(a)
}

fn qubits(rho: DensityMatrix) -> DensityMatrix {
    rho.with_dims(vec![2, 2]).unwrap()
}

// ---- Bloch-grid oracle ----

const STEP: f64 = 0.02;
const R_STEPS: i64 = 50;
const THETA_STEPS: i64 = 157;
const PHI_STEPS: i64 = 315;
const COARSE: i64 = 5;
const KEEP: usize = 3;
const NEAR_SPHERE: [f64; 3] = [0.99, 0.995, 0.999];

fn bloch(r: f64, theta: f64, phi: f64) -> DensityMatrix {
    let (x, y, z) = (r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos());
    let re = [(1.0 + z) / 2.0, x / 2.0, x / 2.0, (1.0 - z) / 2.0];
    let im = [0.0, -y / 2.0, y / 2.0, 0.0];
    DensityMatrix::from_psd(ComplexMatrix::from_parts(2, 2, &re, &im).unwrap(), None).unwrap()
}

/// Minimum of `f` over the (r, θ, φ) lattice of step 0.02, searched on the
/// every-fifth sublattice and then exhaustively around the best coarse
/// points. `r_max` caps the radial index; radii just inside the sphere are
/// added next to the outermost shell.
fn grid_min(f: &dyn Fn(&DensityMatrix) -> f64, r_max: i64) -> f64 {
    let eval = |i: i64, j: i64, k: i64| f(&bloch(i as f64 * STEP, j as f64 * STEP, k as f64 * STEP));
    let mut coarse = Vec::new();
    for i in (0..=r_max).step_by(COARSE as usize) {
        for j in (0..=THETA_STEPS).step_by(COARSE as usize) {
            for k in (0..PHI_STEPS).step_by(COARSE as usize) {
                coarse.push((eval(i, j, k), i, j, k));
            }
        }
    }
    coarse.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = coarse[0].0;
    let w = COARSE + 1;
    for &(_, i0, j0, k0) in coarse.iter().take(KEEP) {
        for i in (i0 - w).max(0)..=(i0 + w).min(r_max) {
            for j in (j0 - w).max(0)..=(j0 + w).min(THETA_STEPS) {
                for k in k0 - w..=k0 + w {
                    let k = k.rem_euclid(PHI_STEPS);
                    best = best.min(eval(i, j, k));
                    if i >= r_max - 1 {
                        for r in NEAR_SPHERE {
                            best = best.min(f(&bloch(r, j as f64 * STEP, k as f64 * STEP)));
                        }
                    }
                }
            }
        }
    }
    best
}

fn divergence(rho: &DensityMatrix, sigma: &ComplexMatrix, a: f64) -> f64 {
    sandwiched_renyi_psd(rho, sigma, fin(a)).unwrap().value
}

/// `‖tr_B[(σ^{-s/2} ⊗ I) ρ (σ^{-s/2} ⊗ I)]‖_α`, the exact supremum over `τ`
/// of `tr[ρ (σ^{-s} ⊗ τ^s)]` with `s = 1 - 1/α`, by Hölder's inequality.
fn sup_over_tau(rho: &DensityMatrix, sigma: &DensityMatrix, a: f64) -> f64 {
    let s = 1.0 - 1.0 / a;
    let k = sigma.power(-s / 2.0).kron(&ComplexMatrix::identity(2));
    let m = partial_trace_matrix(&(&(&k * rho.matrix()) * &k), &[2, 2], &[1]).unwrap();
    schatten_norm(&m.hermitian_part(), NormOrder::Finite(a)).unwrap()
}

fn bell() -> DensityMatrix {
    let mut re = [0.0; 16];
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        re[4 * i + j] = 0.5;
    }
    DensityMatrix::new(ComplexMatrix::from_real(4, 4, &re).unwrap(), Some(vec![2, 2])).unwrap()
}

fn classically_correlated() -> DensityMatrix {
    qubits(DensityMatrix::from_diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap())
}

fn oracle_agreement() -> Outcome {
    let tol = 2e-3;
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    let mut record = |name: String, opt: f64, oracle: f64| {
        let gap = (opt - oracle).abs();
        worst = worst.max(gap);
        if !(gap <= tol) {
            lines.push(format!("{name}: optimizer {opt} vs grid {oracle}"));
        }
    };

    let rand_state = |seed: u64| qubits(random_density(4, 1 + (seed as usize) % 4, seed).unwrap());
    let alphas = [2.0, 1.5, 3.0, 0.75, 2.0];

    let mut conditional = vec![bell(), {
        let rb = random_density(2, 2, 31).unwrap();
        renyi_core::states::tensor(&DensityMatrix::maximally_mixed(2), &rb)
    }];
    conditional.extend((0..3).map(|i| rand_state(100 + i)));
    for (i, rho) in conditional.iter().enumerate() {
        let a = alphas[i];
        let opt = conditional_renyi_entropy(rho, fin(a), &OptimizerConfig::with_seed(i as u64)).unwrap().value;
        let f = |s: &DensityMatrix| divergence(rho, &ComplexMatrix::identity(2).kron(s.matrix()), a);
        record(format!("conditional entropy #{i} alpha={a}"), opt, -grid_min(&f, R_STEPS));
    }

    let mut mutual = vec![classically_correlated(), bell()];
    mutual.extend((0..3).map(|i| rand_state(200 + i)));
    for (i, rho) in mutual.iter().enumerate() {
        let a = alphas[i];
        let opt = mutual_info_primal(rho, fin(a), &OptimizerConfig::with_seed(i as u64)).unwrap().value;
        let rho_a = partial_trace_matrix(rho.matrix(), &[2, 2], &[0]).unwrap();
        let f = |s: &DensityMatrix| divergence(rho, &rho_a.kron(s.matrix()), a);
        record(format!("mutual information #{i} alpha={a}"), opt, grid_min(&f, R_STEPS));
    }

    for i in 0..5u64 {
        let rho = qubits(random_density(4, 4, 300 + i).unwrap());
        let a = [1.5, 2.0, 3.0, 2.0, 1.5][i as usize];
        let opt = minimax_value(&rho, fin(a), MinimaxOrder::InfSup, &OptimizerConfig::with_seed(i)).unwrap().value;
        let f = |s: &DensityMatrix| sup_over_tau(&rho, s, a);
        record(format!("minimax #{i} alpha={a}"), opt, grid_min(&f, R_STEPS - 1));
    }

    for i in 0..5u64 {
        let a = [2.0, 1.5, 3.0, 0.75, 2.0][i as usize];
        let channel = if i == 0 { Channel::identity(2) } else { random_channel(2, 2, 2, 400 + i).unwrap() };
        let rng = &mut rng_from_seed(500 + i);
        let k = 2 + (i as usize) % 2;
        let states: Vec<_> = (0..k).map(|_| random_pure_with(&[2], rng).unwrap()).collect();
        let probs: Vec<f64> = (0..k).map(|j| (j + 1) as f64).collect();
        let total: f64 = probs.iter().sum();
        let ensemble = Ensemble::new(probs.iter().map(|p| p / total).collect(), states.clone()).unwrap();
        let opt = holevo_information(&channel, &ensemble, fin(a), &OptimizerConfig::with_seed(i)).unwrap().value;
        let outputs: Vec<DensityMatrix> = states.iter().map(|s| channel.apply(&s.density()).unwrap()).collect();
        let weights: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let rho_xb = cq_embed(&CQState::new(weights.clone(), outputs).unwrap());
        let rho_x = ComplexMatrix::from_diagonal(&weights);
        let f = |s: &DensityMatrix| divergence(&rho_xb, &rho_x.kron(s.matrix()), a);
        record(format!("holevo information #{i} alpha={a}"), opt, grid_min(&f, R_STEPS));
    }

    let mut detail = format!("20 instances, worst |optimizer - grid| {worst:.2e}");
    if !lines.is_empty() {
        detail = format!("{detail}; {}", lines.join("; "));
    }
    verdict(lines.is_empty(), detail)
}

fn primal_dual() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..30u64 {
        let rho = qubits(random_density(4, 1 + (i as usize) % 4, 700 + i).unwrap());
        for a in [1.5, 2.0, 3.0] {
            let cfg = OptimizerConfig::with_seed(i);
            let p = mutual_info_primal(&rho, fin(a), &cfg).unwrap().value;
            let d = mutual_info_dual(&rho, fin(a), &cfg).unwrap().value;
            worst = worst.max((p - d).abs());
        }
    }
    verdict(worst <= 2e-5, format!("30 states x 3 orders, worst gap {worst:.2e}"))
}

fn classical_reduction() -> Outcome {
    let alphas = [fin(0.5), fin(0.75), fin(1.5), fin(2.0), fin(3.0), AlphaOrder::Infinity];
    let mut worst: f64 = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..100u64 {
        let d = 2 + (i as usize) % 5;
        let diag = |rho: DensityMatrix| (0..d).map(|j| rho.matrix().get(j, j).re).collect::<Vec<f64>>();
        let mut p = diag(random_density(d, d, 900 + 2 * i).unwrap());
        let q = diag(random_density(d, d, 901 + 2 * i).unwrap());
        if i % 3 == 0 {
            p[0] = 0.0;
            let t: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= t);
        }
        let (rho, sigma) = (DensityMatrix::from_diagonal(&p).unwrap(), DensityMatrix::from_diagonal(&q).unwrap());
        for a in alphas {
            let s = sandwiched_renyi(&rho, &sigma, a).unwrap().value;
            let c = classical_renyi(&p, &q, a).unwrap().value;
            worst = worst.max((s - c).abs());
        }
        let d1 = umegaki(&rho, &sigma).unwrap().value;
        let gaps: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|h| (sandwiched_renyi(&rho, &sigma, fin(1.0 + h)).unwrap().value - d1).abs())
            .collect();
        for w in gaps.windows(2) {
            if w[0] > 1e-12 {
                lo = lo.min(w[1] / w[0]);
                hi = hi.max(w[1] / w[0]);
            }
        }
    }
    verdict(
        worst <= 1e-9 && lo >= 0.3 && hi <= 0.7,
        format!("100 pairs x 6 orders, worst difference {worst:.2e}; gap ratios in [{lo:.4}, {hi:.4}]"),
    )
}

/// Criteria to run: numbers given on the command line, or all of them.
fn selected() -> Vec<u32> {
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if picked.is_empty() {
        (1..=12).collect()
    } else {
        picked
    }
}

fn main() -> ExitCode {
    let runs = OnceCell::new();
    let all = || {
        &runs
            .get_or_init(|| {
                let (c1, first) = renyi(&["verify", "all", "--seed", "42"]);
                let (c2, second) = renyi(&["verify", "all", "--seed", "42"]);
                (reports(&first), c1, c2, first, second)
            })
            .0
    };
    let from_all = |check: &str, trials| clean(report(all(), check), trials, 0);

    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    for n in selected() {
        let (name, outcome) = match n {
            1 => ("positivity", within_time("positivity", 500, 60.0, 0)),
            2 => ("data processing", within_time("dpi", 200, 120.0, 0)),
            3 => ("contraction certificates", from_all("contraction", 100)),
            4 => ("monotonicity in alpha", from_all("monotonicity_alpha", 100)),
            5 => ("convexity in 1/alpha", from_all("convexity", 100)),
            6 => {
                let (ok1, s1) = from_all("interpolation", 200);
                let (ok2, s2) = from_all("holder_family", 200);
                ("interpolation and Holder family", (ok1 && ok2, format!("{s1}; {s2}")))
            }
            7 => ("entropy duality and minimax", within_time("duality", 30, 600.0, 3)),
            8 => {
                let o = primal_dual();
                ("primal-dual mutual information", (o.pass, o.detail))
            }
            9 => {
                let (ok1, s1) = from_all("mi_additivity", 20);
                let (ok2, s2) = from_all("chi_superadditivity", 10);
                ("additivity and superadditivity", (ok1 && ok2, format!("{s1}; {s2}")))
            }
            10 => {
                let o = oracle_agreement();
                ("grid oracle agreement", (o.pass, o.detail))
            }
            11 => {
                let o = classical_reduction();
                ("classical reduction", (o.pass, o.detail))
            }
            12 => {
                all();
                let (_, c1, c2, first, second) = runs.get().unwrap();
                let same = first == second;
                (
                    "determinism",
                    (
                        *c1 == 0 && *c2 == 0 && same,
                        format!("exit codes {c1}, {c2}; {} bytes; identical: {same}", first.len()),
                    ),
                )
            }
            _ => continue,
        };
        results.push((n, name, verdict(outcome.0, outcome.1)));
    }

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} criterion {n:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
