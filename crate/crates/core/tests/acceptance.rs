//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use redcbc::*;

const TABLE_TOLERANCE: f64 = 0.05;
const ORACLE_RELATIVE: f64 = 1e-10;
const OMEGA_RELATIVE: f64 = 1e-12;
const MEAN_RELATIVE: f64 = 1e-12;
const WALSH_ORACLE_ABSOLUTE: f64 = 1e-10;
/// Fitted once over b = 2, m = 8..=14, both schedules, s ∈ {1, 10, 50, 100, 200}:
/// measured multiply-adds / predicted ∈ [2.07, 6.21].
const COST_CONSTANT: f64 = 8.0;
const COST_FLOOR: f64 = 1.0;
const DUAL_H: u64 = 1_000_000;
/// Rows of the naive Ω product evaluated when the full product is too large.
const OMEGA_MIN_ROWS: u64 = 16;
const OMEGA_FULL_LIMIT: u64 = 1 << 22;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn log_reduced(s: usize, p: &SpaceParams) -> ReductionSchedule {
    let spec = ReductionSpec::parse("floor(1.5*log2(j))").unwrap();
    ReductionSchedule::from_spec(&spec, s, p).unwrap()
}

fn log10_error(e2: f64) -> f64 {
    0.5 * e2.log10()
}

fn table_one() -> Outcome {
    let published: [(u32, [f64; 7]); 3] = [
        (10, [-1.89, -1.85, -1.79, -1.74, -1.67, -1.65, -1.65]),
        (12, [-2.39, -2.35, -2.31, -2.27, -2.19, -2.10, -2.08]),
        (14, [-2.88, -2.84, -2.79, -2.76, -2.72, -2.62, -2.53]),
    ];
    let dims = [10usize, 20, 50, 100, 200, 500, 1000];
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (m, row) in published {
        let p = SpaceParams::new(2, m, 2.0).unwrap();
        let prof = phi_korobov_table(&p).unwrap();
        // CBC is greedy, so the run at s = 1000 contains every smaller s
        let w = Weights::from_rule("j^-3", 1000).unwrap();
        let sched = log_reduced(1000, &p);
        let (v, _) = reduced_cbc_fast(&p, &w, &sched, 1000, &prof).unwrap();
        for (&s, &target) in dims.iter().zip(&row) {
            let got = log10_error(v.trace[s - 1]);
            let dev = (got - target).abs();
            worst = worst.max(dev);
            if dev > TABLE_TOLERANCE {
                failures.push(format!("(m={m}, s={s}) {got:.3} vs {target}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("max |Δlog10 e| = {worst:.4} (tol {TABLE_TOLERANCE}) {}", failures.join("; ")),
    )
}

fn table_two() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for (m, s, target) in [(10u32, 10usize, -1.90), (12, 20, -2.37), (16, 50, -3.35)] {
        let p = SpaceParams::new(2, m, 2.0).unwrap();
        let prof = phi_korobov_table(&p).unwrap();
        let w = Weights::from_rule("j^-3", s).unwrap();
        let (v, _) = reduced_cbc_fast(&p, &w, &ReductionSchedule::zero(s, &p), s, &prof).unwrap();
        let got = log10_error(v.trace[s - 1]);
        worst = worst.max((got - target).abs());
        cells.push(format!("(m={m}, s={s}) {got:.3}"));
    }
    outcome(
        worst <= TABLE_TOLERANCE,
        format!("{} max |Δ| = {worst:.4}", cells.join(", ")),
    )
}

fn fast_naive_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut worst: f64 = 0.0;
    let mut mismatched = 0;
    for _ in 0..20 {
        let b = if rng.random_bool(0.5) { 2 } else { 3 };
        let m = rng.random_range(1..=6u32);
        let s = rng.random_range(1..=6usize);
        let p = SpaceParams::new(b, m, 2.0).unwrap();
        let gammas: Vec<f64> = (0..s).map(|_| rng.random_range(0.05..1.0)).collect();
        let mut w: Vec<u32> = (0..s).map(|_| rng.random_range(0..=m + 1)).collect();
        w.sort_unstable();
        let weights = Weights::product(gammas).unwrap();
        let sched = ReductionSchedule::new(w, &p).unwrap();
        let prof = phi_korobov_table(&p).unwrap();
        let (naive, _) = reduced_cbc_naive(&p, &weights, &sched, s).unwrap();
        let (fast, _) = reduced_cbc_fast(&p, &weights, &sched, s, &prof).unwrap();
        if naive.components != fast.components {
            mismatched += 1;
        }
        for d in 0..s {
            let rel = (naive.trace[d] - fast.trace[d]).abs() / naive.trace[d].abs();
            worst = worst.max(rel);
        }
        // the final trace entry is the exact error of the vector
        let exact = wce_product(&p, &weights, &fast, &prof).unwrap().squared_error;
        worst = worst.max((exact - fast.trace[s - 1]).abs() / exact);
    }
    outcome(
        mismatched == 0 && worst <= ORACLE_RELATIVE,
        format!("20 configurations, {mismatched} vector mismatches, max relative trace gap {worst:.2e}"),
    )
}

fn omega_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut sampled = Vec::new();
    for b in [2u64, 3, 5] {
        let kmax = 10u32;
        let p = SpaceParams::new(b, kmax, 2.0).unwrap();
        let prof = phi_korobov_table(&p).unwrap();
        let op = OmegaOperator::new(&prof, kmax).unwrap();
        for k in 1..=kmax {
            let n = b.pow(k);
            let units = op.units(k);
            let full = units.len() as u64 * n <= OMEGA_FULL_LIMIT;
            let sampled_rows = (OMEGA_FULL_LIMIT / n).max(OMEGA_MIN_ROWS);
            if !full {
                sampled.push(format!("{b}^{k}: {sampled_rows}"));
            }
            let stride = b.pow(kmax - k) as usize;
            let phi = prof.values();
            for _ in 0..50 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let fast = op.apply_fast(k, &x).unwrap();
                let rows: Vec<usize> = if full {
                    (0..units.len()).collect()
                } else {
                    (0..sampled_rows).map(|_| rng.random_range(0..units.len())).collect()
                };
                let mut dev: f64 = 0.0;
                let mut norm: f64 = 0.0;
                for r in rows {
                    let z = units[r];
                    let mut acc = 0.0;
                    let mut zn = 0u64;
                    for &xn in &x {
                        acc += phi[zn as usize * stride] * xn;
                        zn += z;
                        if zn >= n {
                            zn -= n;
                        }
                    }
                    dev = dev.max((acc - fast[r]).abs());
                    norm = norm.max(acc.abs());
                }
                worst = worst.max(dev / norm);
            }
        }
    }
    outcome(
        worst <= OMEGA_RELATIVE,
        format!(
            "b ∈ {{2,3,5}}, k ≤ 10, 50 vectors each: max relative sup deviation {worst:.2e}; \
             rows sampled per vector for {}",
            sampled.join(", ")
        ),
    )
}

fn bound_compliance() -> Outcome {
    let mut checks = 0usize;
    let mut violations = Vec::new();
    let spec = ReductionSpec::parse("floor(1.5*log2(j))").unwrap();
    for b in [2u64, 3] {
        for alpha in [2.0, 4.0] {
            for m in [3u32, 5, 7] {
                let p = SpaceParams::new(b, m, alpha).unwrap();
                let prof = phi_korobov_table(&p).unwrap();
                for rule in ["j^-2", "j^-3", "0.5*j^-1"] {
                    let s = 12;
                    let w = Weights::from_rule(rule, s).unwrap();
                    let schedules = [
                        ReductionSchedule::zero(s, &p),
                        ReductionSchedule::from_spec(&spec, s, &p).unwrap_or_else(|_| {
                            // the log2 rule only applies to b = 2
                            let w: Vec<u32> = (1..=s as u32).map(|j| (j - 1) / 3).collect();
                            ReductionSchedule::new(w, &p).unwrap()
                        }),
                    ];
                    for sched in schedules {
                        let (v, _) = reduced_cbc_fast(&p, &w, &sched, s, &prof).unwrap();
                        for lambda in [1.0, (1.0 + 1.0 / alpha) / 2.0] {
                            let bounds = theorem_bound_prefixes(&p, &w, &sched, s, lambda).unwrap();
                            for (d, (e2, bound)) in v.trace.iter().zip(&bounds).enumerate() {
                                checks += 1;
                                if e2 > bound {
                                    violations.push(format!("korobov b={b} a={alpha} m={m} d={}", d + 1));
                                }
                            }
                        }
                        for delta in [0.1, (alpha - 1.0) / 2.0] {
                            let c = corollary_constants(&p, &w, &sched, delta, 0.0, s).unwrap();
                            let rhs = c.c_sadw * (p.n_points() as f64).powf(-alpha / 2.0 + delta);
                            checks += 1;
                            if v.trace[s - 1].sqrt() > rhs {
                                violations.push(format!("corollary b={b} a={alpha} m={m} δ={delta}"));
                            }
                        }
                    }
                }
            }
        }
        for alpha in [1.5, 2.0, 3.0] {
            for m in [3u32, 5] {
                let p = SpaceParams::new(b, m, alpha).unwrap();
                let prof = walsh_kernel_table(&p).unwrap();
                let s = 8;
                let w = Weights::from_rule("j^-2", s).unwrap();
                let wv: Vec<u32> = (1..=s as u32).map(|j| (j - 1) / 2).collect();
                for sched in [ReductionSchedule::zero(s, &p), ReductionSchedule::new(wv, &p).unwrap()] {
                    let (v, _) = reduced_cbc_poly(&p, &w, &sched, s, &prof).unwrap();
                    for lambda in [1.0, (1.0 + 1.0 / alpha) / 2.0] {
                        let bounds = theorem_bound_walsh_prefixes(&p, &w, &sched, s, lambda).unwrap();
                        for (d, (e2, bound)) in v.trace.iter().zip(&bounds).enumerate() {
                            checks += 1;
                            if e2 > bound {
                                violations.push(format!("walsh b={b} a={alpha} m={m} d={}", d + 1));
                            }
                        }
                    }
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!("{checks} inequalities, {} violations {}", violations.len(), violations.join("; ")),
    )
}

/// Direct sum over `h < b^{m+1}` of `b^{−αψ(h)} wal_h(n/b^m)` plus the exact
/// remainder, which is nonzero only at the origin.
fn walsh_oracle(b: u64, m: u32, alpha: f64) -> Vec<f64> {
    let n_points = b.pow(m);
    let cos: Vec<f64> = (0..b)
        .map(|j| (2.0 * std::f64::consts::PI * j as f64 / b as f64).cos())
        .collect();
    let weights: Vec<f64> = (0..=m + 1).map(|k| (b as f64).powf(-alpha * k as f64)).collect();
    (0..n_points)
        .map(|n| {
            let digits: Vec<u64> = (0..=m)
                .map(|k| if k < m { (n / b.pow(m - 1 - k)) % b } else { 0 })
                .collect();
            let mut total = 0.0;
            for h in 1..n_points * b {
                let (mut rest, mut phase, mut psi) = (h, 0u64, 0usize);
                for &x in &digits {
                    phase += (rest % b) * x;
                    rest /= b;
                }
                let mut top = h;
                while top >= b {
                    top /= b;
                    psi += 1;
                }
                total += weights[psi] * cos[(phase % b) as usize];
            }
            if n == 0 {
                let r = (b as f64).powf(1.0 - alpha);
                total += (b - 1) as f64 * r.powi(m as i32 + 1) / (1.0 - r);
            }
            total
        })
        .collect()
}

fn kernel_identities() -> Outcome {
    let mut worst_mean: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for b in [2u64, 3] {
        for m in 1..=10u32 {
            for alpha in [2.0, 4.0] {
                let p = SpaceParams::new(b, m, alpha).unwrap();
                let t = phi_korobov_table(&p).unwrap();
                let expected = 2.0 * riemann_zeta(alpha).unwrap() / (p.n_points() as f64).powf(alpha);
                worst_mean = worst_mean.max((t.mean() - expected).abs() / expected);
            }
            for alpha in [1.5, 2.0, 3.0] {
                let p = SpaceParams::new(b, m, alpha).unwrap();
                let t = walsh_kernel_table(&p).unwrap();
                let expected = mu_b(b, alpha).unwrap() * (b as f64).powf(-alpha * m as f64);
                worst_mean = worst_mean.max((t.mean() - expected).abs() / expected);
                if m <= 8 {
                    let oracle = walsh_oracle(b, m, alpha);
                    for (u, v) in t.values().iter().zip(&oracle) {
                        worst_oracle = worst_oracle.max((u - v).abs());
                    }
                }
            }
        }
    }
    outcome(
        worst_mean <= MEAN_RELATIVE && worst_oracle <= WALSH_ORACLE_ABSOLUTE,
        format!("max relative mean error {worst_mean:.2e}, max Walsh oracle gap {worst_oracle:.2e}"),
    )
}

fn cost_scaling() -> Outcome {
    let mut problems = Vec::new();
    let (mut lo, mut hi) = (f64::MAX, 0.0f64);
    for m in 8u32..=14 {
        let p = SpaceParams::new(2, m, 2.0).unwrap();
        let prof = phi_korobov_table(&p).unwrap();
        for s in [10usize, 50, 100, 200] {
            let w = Weights::from_rule("j^-3", s).unwrap();
            let mut counts = Vec::new();
            for sched in [ReductionSchedule::zero(s, &p), log_reduced(s, &p)] {
                let expected: u64 = (0..s).map(|d| sched.candidate_count(d)).sum();
                let (_, c) = reduced_cbc_fast(&p, &w, &sched, s, &prof).unwrap();
                if c.candidate_evaluations != expected {
                    problems.push(format!("fast evals m={m} s={s}"));
                }
                if m <= 10 && s <= 50 {
                    let (_, cn) = reduced_cbc_naive(&p, &w, &sched, s).unwrap();
                    if cn.candidate_evaluations != expected {
                        problems.push(format!("naive evals m={m} s={s}"));
                    }
                }
                let ratio = c.multiply_adds as f64 / cost_model(&sched, s).predicted as f64;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                counts.push(c.multiply_adds);
            }
            if s >= 50 && counts[1] >= counts[0] {
                problems.push(format!("reduced not cheaper at m={m} s={s}"));
            }
        }
    }
    if !(lo >= COST_FLOOR && hi <= COST_CONSTANT) {
        problems.push(format!("ratio outside [{COST_FLOOR}, {COST_CONSTANT}]"));
    }
    outcome(
        problems.is_empty(),
        format!(
            "multiply-adds / model ∈ [{lo:.3}, {hi:.3}] with C = {COST_CONSTANT}; {}",
            if problems.is_empty() { "evaluation counts exact".to_string() } else { problems.join("; ") }
        ),
    )
}

fn dual_oracle() -> Outcome {
    let mut checks = 0;
    let mut failures = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for b in [2u64, 3] {
        for m in 1..=5u32 {
            let p = SpaceParams::new(b, m, 2.0).unwrap();
            let prof = phi_korobov_table(&p).unwrap();
            for s in 1..=2usize {
                let w = Weights::product(vec![1.0, 0.5][..s].to_vec()).unwrap();
                let sched = ReductionSchedule::new(vec![0, 1][..s].to_vec(), &p).unwrap();
                let (v, _) = reduced_cbc_naive(&p, &w, &sched, s).unwrap();
                let exact = wce_product(&p, &w, &v, &prof).unwrap().squared_error;
                let dual = wce_dual_oracle(&p, &w, &v, DUAL_H).unwrap();
                let gap = (exact - dual.value).abs();
                worst_ratio = worst_ratio.max(gap / dual.tail_bound);
                checks += 1;
                if gap > dual.tail_bound {
                    failures.push(format!("b={b} m={m} s={s}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checks} cases at H = {DUAL_H}, max gap / tail bound = {worst_ratio:.3} {}", failures.join("; ")),
    )
}

fn unit_group_lemma() -> Outcome {
    let mut failures = Vec::new();
    let mut max_count = 0;
    for b in [2u64, 3] {
        for k in 1..=8u32 {
            let c = check_unit_group_lemma(b, k).unwrap();
            max_count = max_count.max(c.factor_count);
            if c.order != (b - 1) * b.pow(k - 1) || c.factor_count > k {
                failures.push(format!("b={b} k={k}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("b ∈ {{2,3}}, k ≤ 8: orders match, largest factor count {max_count} {}", failures.join("; ")),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 reduced fast CBC errors, b=2 log schedule", table_one),
        ("2 classic fast CBC errors, w = 0", table_two),
        ("3 fast and naive constructions agree", fast_naive_equivalence),
        ("4 fast structured matrix product", omega_correctness),
        ("5 error bounds hold", bound_compliance),
        ("6 kernel identities", kernel_identities),
        ("7 cost scaling", cost_scaling),
        ("8 dual-lattice sum", dual_oracle),
        ("9 unit groups of F_b[x]/(x^k)", unit_group_lemma),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = std::time::Instant::now();
        let o = check();
        eprintln!("criterion {name}: {:.1} s", start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail.trim_end());
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
