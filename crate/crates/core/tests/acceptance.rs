//! Acceptance suite. Prints one PASS/FAIL line per criterion, then the
//! failing sub-checks. Runs without the libtest harness.
//!
//! A few sub-checks compare against published numbers that the design
//! equations do not reproduce. They are listed in `KNOWN_FAILURES`, still
//! print FAIL, and flip the exit code if they ever start passing.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use marx_core::analysis::{condition_of_f, select_regular};
use marx_core::circuit::{build_a0, idx_load_voltage, modal_report, simulate, verify_transfer_with, StateModel};
use marx_core::polysys::{system_k, DesignSpec};
use marx_core::solver::{bf_matrix, enumerate, refine, validate, DesignSolution, EnumerateOptions, SolutionSet};
use marx_core::Tolerances;

/// Published design table: `(n, row, n^2 c_i / c, cond)`.
const TABLE: &[(usize, usize, &[f64], f64)] = &[
    (1, 1, &[1.5], 1.0),
    (2, 1, &[1.50213, 0.47340], 1.1102),
    (2, 2, &[0.63120, 1.12660], 1.0266),
    (3, 1, &[1.49303, 1.49229, 0.41548], 1.1557),
    (3, 2, &[0.84408, 0.77662, 1.41217], 1.0387),
    (4, 1, &[1.71070, 1.29555, 1.54667, 0.38529], 1.1849),
    (4, 2, &[1.62637, 0.62519, 1.73498, 0.74862], 1.0917),
    (4, 3, &[1.06181, 2.10211, 0.66491, 0.89099], 1.121),
    (4, 4, &[1.13210, 0.78731, 0.92450, 1.60306], 1.0440),
    (5, 1, &[2.04567, 1.23900, 1.35694, 1.57111, 0.36796], 1.2018),
    (5, 2, &[2.14782, 0.63778, 1.24610, 1.70028, 0.68506], 1.1092),
    (5, 3, &[0.99720, 1.69936, 1.57266, 0.64267, 1.16088], 1.0558),
    (5, 4, &[1.47480, 0.86342, 0.84481, 1.07344, 1.72179], 1.0448),
    (6, 1, &[2.49095, 1.25588, 1.20240, 1.49359, 1.53290, 0.35987], 1.2065),
    (6, 2, &[1.92537, 1.79971, 1.80083, 0.90696, 1.45858, 0.37545], 1.1954),
    (6, 3, &[1.67555, 1.98118, 2.05786, 0.66667, 1.30433, 0.52174], 1.112),
    (6, 4, &[2.65073, 1.01602, 0.68610, 1.82261, 1.42150, 0.64738], 1.1506),
    (6, 5, &[1.34706, 2.18478, 0.92044, 1.84208, 0.65432, 0.94921], 1.0971),
    (6, 6, &[1.95229, 0.93587, 1.53272, 0.63062, 1.76898, 0.99206], 1.0844),
    (6, 7, &[2.46541, 0.73028, 0.99423, 0.93809, 1.85839, 0.99314], 1.1223),
    (6, 8, &[1.79820, 0.94167, 1.74742, 0.62528, 1.59040, 1.05327], 1.0884),
    (6, 9, &[1.43355, 1.89698, 0.60976, 1.73302, 1.02388, 1.05334], 1.1009),
    (6, 10, &[1.50458, 1.00778, 2.04896, 1.05339, 0.68756, 1.37732], 1.0686),
    (6, 11, &[1.38734, 1.13092, 1.48392, 1.32482, 0.63764, 1.57578], 1.0617),
    (6, 12, &[1.87892, 0.96056, 0.85587, 0.91518, 1.23619, 1.77345], 1.0592),
];

const PRINTED_7: [f64; 7] = [2.07061, 1.05669, 1.04940, 1.05715, 1.06861, 1.08449, 1.85298];
const PRINTED_8: [f64; 8] = [2.39407, 1.17326, 1.12475, 1.11221, 1.10440, 1.09960, 1.09985, 1.87282];
const PRINTED_COND: [(usize, f64); 2] = [(7, 1.0502), (8, 1.0617)];
const MINIMIZER_K3: [f64; 3] = [9.3786e-2, 8.6296e-2, 1.5690e-1];

/// Sub-checks known to fail against the published numbers, by `(criterion, name)`.
const KNOWN_FAILURES: &[(u8, &str)] = &[
    // rows whose printed values are not roots to five decimals
    (1, "n=4 row 1 values"),
    (1, "n=4 row 2 values"),
    (1, "n=4 row 3 values"),
    // d_1 = 1/2 exactly when there is a single stage
    (6, "d_i > 1/2 at n=1"),
    // the printed vectors refine to different roots
    (8, "n=7 condition"),
    (8, "n=8 condition"),
];

struct Check {
    criterion: u8,
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Report {
    checks: Vec<Check>,
}

impl Report {
    fn check(&mut self, criterion: u8, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            criterion,
            name: name.into(),
            ok,
            detail: detail.into(),
        });
    }
}

fn table_rows(n: usize) -> Vec<(usize, &'static [f64], f64)> {
    TABLE.iter().filter(|r| r.0 == n).map(|r| (r.1, r.2, r.3)).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn nearest<'a>(set: &'a SolutionSet, scaled: &[f64]) -> (usize, &'a DesignSolution, f64) {
    set.solutions
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s, max_abs_diff(&s.scaled, scaled)))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("non-empty solution set")
}

// ---------- independent oracles ----------

/// Exact diagonal of `B^{-1}` from leading and trailing continuants.
fn exact_inverse_diagonal(n: usize) -> Vec<BigRational> {
    let diag: Vec<BigRational> = (0..n)
        .map(|i| {
            if i + 1 == n {
                BigRational::new(BigInt::from(n + 1), BigInt::from(n))
            } else {
                BigRational::from_integer(BigInt::from(2))
            }
        })
        .collect();
    // theta[i] = det of leading i x i block, phi[i] = det of trailing block from i
    let mut theta = vec![BigRational::one(); n + 1];
    for i in 0..n {
        let prev2 = if i >= 1 { theta[i - 1].clone() } else { BigRational::zero() };
        theta[i + 1] = &diag[i] * &theta[i] - prev2;
    }
    let mut phi = vec![BigRational::one(); n + 2];
    phi[n + 1] = BigRational::zero();
    for i in (0..n).rev() {
        phi[i] = &diag[i] * &phi[i + 1] - phi[i + 2].clone();
    }
    (0..n).map(|i| &theta[i] * &phi[i + 1] / &theta[n]).collect()
}

fn exact_inverse_target_sum(alpha: &[u32]) -> BigRational {
    alpha
        .iter()
        .map(|&a| BigRational::new(BigInt::one(), BigInt::from(u64::from(a) * u64::from(a) - 1)))
        .fold(BigRational::zero(), |acc, v| acc + v)
}

/// Eigenvalues of the symmetric `sqrt(F) B sqrt(F)`, ascending.
fn symmetric_spectrum(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let b = DMatrix::from_fn(n, n, |i, j| match (i, j) {
        _ if i == j && i + 1 == n => (n as f64 + 1.0) / n as f64,
        _ if i == j => 2.0,
        _ if i.abs_diff(j) == 1 => -1.0,
        _ => 0.0,
    });
    let m = DMatrix::from_fn(n, n, |i, j| f[i].sqrt() * b[(i, j)] * f[j].sqrt());
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `x(T)` by classical RK4 with `steps` uniform steps.
fn rk4_endpoint(model: &StateModel, x0: &[f64], steps: usize) -> Vec<f64> {
    let a = DMatrix::from_fn(model.dim(), model.dim(), |i, j| model.a0[(i, j)]);
    let h = model.transfer_time / steps as f64;
    let mut x = DVector::from_column_slice(x0);
    for _ in 0..steps {
        let k1 = &a * &x;
        let k2 = &a * (&x + &k1 * (h / 2.0));
        let k3 = &a * (&x + &k2 * (h / 2.0));
        let k4 = &a * (&x + &k3 * h);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    x.as_slice().to_vec()
}

/// Closed-form two-stage roots `(k1, k2)` from the linear and product
/// conditions on `B^{-1}`.
fn two_stage_closed_form() -> Vec<[f64; 2]> {
    // B = [[2, -1], [-1, 3/2]]; B^{-1} = [[3/4, 1/2], [1/2, 1]]
    let (d1, d2, det): (f64, f64, f64) = (0.75, 1.0, 0.5);
    let s1 = 1.0 / 3.0 + 1.0 / 15.0;
    let s2 = 1.0 / 45.0;
    // d1 k1 + d2 k2 = s1, det k1 k2 = s2  =>  d1 k1^2 - s1 k1 + d2 s2 / det = 0
    let (a, b, c) = (d1, -s1, d2 * s2 / det);
    let disc = (b * b - 4.0 * a * c).sqrt();
    [(-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a)]
        .into_iter()
        .map(|k1| [k1, (s1 - d1 * k1) / d2])
        .collect()
}

// ---------- criteria ----------

fn criterion_1_and_2(r: &mut Report, sets: &BTreeMap<usize, SolutionSet>, n6_time: Duration) {
    let expected_counts = [(2, 2), (3, 2), (4, 4), (5, 4), (6, 12)];
    for (n, want) in expected_counts {
        let got = sets[&n].solutions.len();
        r.check(1, format!("n={n} count"), got == want, format!("{got} solutions, expected {want}"));
    }
    for n in 2..=6 {
        let set = &sets[&n];
        let mut used = vec![false; set.solutions.len()];
        for (row, values, cond) in table_rows(n) {
            let (i, sol, dist) = nearest(set, values);
            let fresh = !used[i];
            used[i] = true;
            r.check(
                1,
                format!("n={n} row {row} values"),
                dist <= 1e-4 && fresh,
                format!("max |diff| {dist:.2e} against solution {}", i + 1),
            );
            let dc = (sol.condition - cond).abs();
            r.check(2, format!("n={n} row {row} cond"), dc <= 1e-3, format!("{:.5} vs {cond}, diff {dc:.1e}", sol.condition));
        }
    }
    let (_, _, cond1) = table_rows(1)[0];
    let c1 = sets[&1].solutions[0].condition;
    r.check(2, "n=1 row 1 cond", (c1 - cond1).abs() <= 1e-3, format!("{c1:.5}"));
    r.check(1, "n=6 runtime", n6_time <= Duration::from_secs(600), format!("{:.2?}", n6_time));
}

fn criterion_3(r: &mut Report, sets: &BTreeMap<usize, SolutionSet>) {
    for (n, set) in sets {
        let spec = DesignSpec::standard(*n).unwrap();
        let mut targets = spec.targets_f64();
        targets.sort_by(f64::total_cmp);
        for (i, sol) in set.solutions.iter().enumerate() {
            let report = validate(sol, &spec).unwrap();
            let bf = marx_core::numkernel::eig(&bf_matrix(&sol.f).unwrap()).unwrap();
            let mut ev = bf.eigenvalues.clone();
            ev.sort_by(|a, b| a.re.total_cmp(&b.re));
            let err = ev.iter().zip(&targets).map(|(z, t)| (z - t).norm()).fold(0.0, f64::max);
            r.check(3, format!("n={n} #{} spectrum", i + 1), err <= 1e-6 && report.eig_error <= 1e-6, format!("{err:.2e}"));
            let sym = symmetric_spectrum(&sol.f);
            let agree = ev.iter().zip(&sym).map(|(z, s)| (z - s).norm()).fold(0.0, f64::max);
            r.check(3, format!("n={n} #{} symmetric form", i + 1), agree <= 1e-8, format!("{agree:.2e}"));
        }
    }
}

fn transfer_checks(r: &mut Report, label: &str, spec: &DesignSpec, sol: &DesignSolution) {
    let tol = Tolerances::default();
    let n = spec.n();
    let model = build_a0(spec, &sol.f).unwrap();
    let trace = simulate(&model, 1.0, 1000).unwrap();
    let t = verify_transfer_with(&trace, &tol);
    let mut target = vec![0.0; model.dim()];
    target[idx_load_voltage(n)] = 1.0;
    let end_lib = max_abs_diff(trace.final_state(), &target);
    let end_rk4 = max_abs_diff(&rk4_endpoint(&model, &model.initial_state(1.0), 20_000), &target);
    let e0 = model.energy(&trace.states[0]);
    let drift = trace.states.iter().map(|x| (model.energy(x) - e0).abs() / e0).fold(0.0, f64::max);
    r.check(
        4,
        format!("{label} endpoint"),
        end_lib <= 1e-5 && end_rk4 <= 1e-5,
        format!("exp {end_lib:.2e}, rk4 {end_rk4:.2e}"),
    );
    r.check(
        4,
        format!("{label} load voltage"),
        (t.load_voltage - n as f64).abs() <= 1e-5,
        format!("{:.9}", t.load_voltage),
    );
    r.check(4, format!("{label} energy drift"), drift <= 1e-8 && t.energy_drift <= 1e-8, format!("{drift:.2e}"));
}

fn criterion_4(r: &mut Report, sets: &BTreeMap<usize, SolutionSet>, refined: &BTreeMap<usize, DesignSolution>) {
    for (n, set) in sets {
        let spec = DesignSpec::standard(*n).unwrap();
        let regular: Vec<&DesignSolution> = set.regular().collect();
        r.check(4, format!("n={n} has a regular solution"), !regular.is_empty(), format!("{}", regular.len()));
        for sol in regular {
            transfer_checks(r, &format!("n={n} regular"), &spec, sol);
        }
    }
    for (n, sol) in refined {
        transfer_checks(r, &format!("n={n} refined"), &DesignSpec::standard(*n).unwrap(), sol);
    }
}

fn criterion_5(r: &mut Report, sets: &BTreeMap<usize, SolutionSet>, refined: &BTreeMap<usize, DesignSolution>) {
    let tol = Tolerances::default();
    let all = sets
        .iter()
        .flat_map(|(n, s)| s.solutions.iter().enumerate().map(move |(i, sol)| (*n, format!("#{}", i + 1), sol)))
        .chain(refined.iter().map(|(n, sol)| (*n, "refined".to_string(), sol)));
    for (n, label, sol) in all {
        let spec = DesignSpec::standard(n).unwrap();
        let model = build_a0(&spec, &sol.f).unwrap();
        let a = DMatrix::from_fn(model.dim(), model.dim(), |i, j| model.a0[(i, j)]);
        let mut got: Vec<num_complex::Complex64> = a.complex_eigenvalues().iter().copied().collect();
        got.sort_by(|x, y| x.im.total_cmp(&y.im).then(x.re.total_cmp(&y.re)));
        let w0 = spec.omega0();
        let mut want = vec![num_complex::Complex64::new(0.0, 0.0); n];
        for &al in std::iter::once(&1u32).chain(spec.alpha()) {
            want.push(num_complex::Complex64::new(0.0, w0 * f64::from(al)));
            want.push(num_complex::Complex64::new(0.0, -w0 * f64::from(al)));
        }
        want.sort_by(|x, y| x.im.total_cmp(&y.im).then(x.re.total_cmp(&y.re)));
        let dev = got.iter().zip(&want).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let rank = a.clone().svd(false, false).rank(1e-9 * a.norm());
        let lib = modal_report(&model, &tol).unwrap();
        r.check(
            5,
            format!("n={n} {label} poles"),
            dev <= 1e-6 && lib.design_deviation <= 1e-6,
            format!("{dev:.2e}"),
        );
        r.check(
            5,
            format!("n={n} {label} rank"),
            rank == 2 * n + 2 && lib.rank == 2 * n + 2,
            format!("{rank}"),
        );
    }
}

fn criterion_6(r: &mut Report, sets: &BTreeMap<usize, SolutionSet>) {
    for (n, set) in sets {
        let ok = set.solutions.iter().all(|s| {
            s.k.iter().all(|&k| k > 0.0 && k < 1.0) && s.k.iter().sum::<f64>() < 1.0 && s.f.iter().all(|&f| f > 0.0)
        });
        r.check(6, format!("n={n} box and positivity"), ok, format!("{} solutions", set.solutions.len()));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for n in 1..=8 {
        let d = exact_inverse_diagonal(n);
        let lib = marx_core::polysys::build_b_inverse(n).unwrap().diagonal();
        let agree = d.iter().zip(&lib).all(|(a, b)| a == b);
        let min = d.iter().min().unwrap().clone();
        r.check(6, format!("d_i > 1/2 at n={n}"), agree && min > half, format!("min d_i = {min}"));
        let alpha = marx_core::polysys::default_alpha(n);
        let s = exact_inverse_target_sum(&alpha);
        r.check(6, format!("target sum at n={n}"), s < half, format!("{s}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = BigRational::zero();
    let mut all_ok = true;
    for _ in 0..50 {
        let n = rng.gen_range(1..=8);
        let mut pool: Vec<u32> = (1..=40).map(|i| 2 * i).collect();
        pool.shuffle(&mut rng);
        let alpha = &pool[..n];
        let s = exact_inverse_target_sum(alpha);
        all_ok &= s < half && s == marx_core::polysys::inverse_target_sum(alpha);
        if s > worst {
            worst = s;
        }
    }
    r.check(6, "target sum for 50 random sets", all_ok, format!("largest {worst}"));
}

fn criterion_7(r: &mut Report, sets: &BTreeMap<usize, SolutionSet>) {
    let roots = two_stage_closed_form();
    for (j, root) in roots.iter().enumerate() {
        let dist = sets[&2]
            .solutions
            .iter()
            .map(|s| max_abs_diff(&s.k, root))
            .fold(f64::INFINITY, f64::min);
        r.check(7, format!("n=2 closed-form root {}", j + 1), dist <= 1e-10, format!("{dist:.2e}"));
    }
    let one = &sets[&1].solutions;
    let k_ok = one.len() == 1 && (one[0].k[0] - 2.0 / 3.0).abs() <= 1e-12;
    r.check(7, "n=1 k = 2/3", k_ok, format!("{:?}", one.iter().map(|s| s.k[0]).collect::<Vec<_>>()));
    let spec = DesignSpec::standard(1).unwrap();
    let direct = refine(&system_k(&spec).unwrap(), &[2.0 / 3.0]).unwrap();
    let ev = marx_core::numkernel::eig(&bf_matrix(&direct.f).unwrap()).unwrap().sorted_real();
    r.check(7, "n=1 spectrum {3}", (ev[0] - 3.0).abs() <= 1e-12 && direct.residual_inf == 0.0, format!("{ev:?}"));
}

fn criterion_8(r: &mut Report, refined: &BTreeMap<usize, DesignSolution>) {
    let tol = Tolerances::default();
    for (n, cond) in PRINTED_COND {
        let sol = &refined[&n];
        r.check(8, format!("n={n} residual"), sol.residual_inf <= 1e-12, format!("{:.2e}", sol.residual_inf));
        let c = condition_of_f(&sol.f, &tol).unwrap().max_condition;
        r.check(
            8,
            format!("n={n} condition"),
            (c - cond).abs() <= 2e-3,
            format!("{c:.4} vs {cond}, refined to {:?}", sol.scaled.iter().map(|v| (v * 1e5).round() / 1e5).collect::<Vec<_>>()),
        );
    }
}

fn criterion_9(r: &mut Report, sets: &BTreeMap<usize, SolutionSet>) {
    for (n, set) in sets {
        let rows = table_rows(*n);
        let chosen = select_regular(set);
        let (ok, detail) = match &chosen {
            Ok(sel) if *n == 1 => (sel.len() == 1 && (sel[0].k[0] - 2.0 / 3.0).abs() <= 1e-4, format!("{:?}", sel[0].k)),
            Ok(sel) => {
                let last = rows.last().unwrap().1;
                let d = sel.iter().map(|s| max_abs_diff(&s.scaled, last)).fold(f64::INFINITY, f64::min);
                (sel.len() == 1 && d <= 1e-4, format!("{} selected, distance {d:.2e}", sel.len()))
            }
            Err(e) => (false, e.to_string()),
        };
        r.check(9, format!("n={n} selection"), ok, detail);
    }
    let sel = select_regular(&sets[&3]).unwrap();
    let d = max_abs_diff(&sel[0].k, &MINIMIZER_K3);
    r.check(9, "n=3 minimizer", d <= 1e-4, format!("{d:.2e}"));
}

fn main() -> ExitCode {
    let options = EnumerateOptions::default();
    let mut sets = BTreeMap::new();
    let mut n6_time = Duration::ZERO;
    for n in 1..=6 {
        let start = Instant::now();
        let set = enumerate(&DesignSpec::standard(n).unwrap(), &options).expect("enumeration");
        if n == 6 {
            n6_time = start.elapsed();
        }
        sets.insert(n, set);
    }
    let mut refined = BTreeMap::new();
    for printed in [&PRINTED_7[..], &PRINTED_8[..]] {
        let n = printed.len();
        let spec = DesignSpec::standard(n).unwrap();
        let guess: Vec<f64> = printed.iter().map(|v| v / (n * n) as f64).collect();
        refined.insert(n, refine(&system_k(&spec).unwrap(), &guess).expect("refinement"));
    }

    let mut r = Report::default();
    criterion_1_and_2(&mut r, &sets, n6_time);
    criterion_3(&mut r, &sets);
    criterion_4(&mut r, &sets, &refined);
    criterion_5(&mut r, &sets, &refined);
    criterion_6(&mut r, &sets);
    criterion_7(&mut r, &sets);
    criterion_8(&mut r, &refined);
    criterion_9(&mut r, &sets);

    let known = |c: &Check| KNOWN_FAILURES.contains(&(c.criterion, c.name.as_str()));
    let mut unexpected = 0;
    for crit in 1..=9u8 {
        let checks: Vec<&Check> = r.checks.iter().filter(|c| c.criterion == crit).collect();
        let failed: Vec<&&Check> = checks.iter().filter(|c| !c.ok).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {crit}: {verdict} ({}/{} sub-checks)", checks.len() - failed.len(), checks.len());
        for c in &failed {
            let tag = if known(c) { "known" } else { "unexpected" };
            println!("    FAIL [{tag}] {}: {}", c.name, c.detail);
        }
        unexpected += failed.iter().filter(|c| !known(c)).count();
        for c in checks.iter().filter(|c| c.ok && known(c)) {
            println!("    PASS [listed as known failure] {}: {}", c.name, c.detail);
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        println!("acceptance: all failures are the listed known ones");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} unexpected result(s)");
        ExitCode::FAILURE
    }
}
