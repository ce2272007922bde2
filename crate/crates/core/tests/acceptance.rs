//! Acceptance suite: one test per criterion, each printing a single
//! `PASS`/`FAIL` line to stderr (uncaptured, so it shows in a plain
//! `cargo test` run).
//!
//! Criterion 9 audits the error inequality `logdet <= mmse_z - dim` on every
//! set evaluated by criteria 3–8; those criteria therefore route their
//! evaluations through [`Audit`].

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sensor_place_core::bounds::mmse_bounds;
use sensor_place_core::estimation::{error_covariance_direct, error_covariance_direct_zero_noise};
use sensor_place_core::generators::{diffusion_grid, integrator_chain, random_system, RandomSystemConfig};
use sensor_place_core::linalg::logdet_spd;
use sensor_place_core::placement::guarantee_factor_p1;
use sensor_place_core::*;

const ERROR_INEQUALITY_SLACK: f64 = 1e-9;

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Self { ok, detail: detail.into() }
    }
}

fn verdict(id: u32, title: &str, outcome: Outcome) {
    let line =
        format!("{} criterion {id:>2} ({title}): {}\n", if outcome.ok { "PASS" } else { "FAIL" }, outcome.detail);
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(outcome.ok, "criterion {id} failed: {}", outcome.detail);
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

/// Records the error inequality on every evaluated set.
#[derive(Default)]
struct Audit {
    checks: AtomicUsize,
    violations: Mutex<Vec<String>>,
}

impl Audit {
    fn value(&self, obj: &LogDetObjective, set: &SensorSet) -> f64 {
        let rep = obj.report(set).expect("evaluation succeeds");
        self.checks.fetch_add(1, Ordering::Relaxed);
        let rhs = rep.mmse_z - obj.dim() as f64;
        if rep.logdet_error > rhs + ERROR_INEQUALITY_SLACK * (1.0 + rhs.abs()) {
            self.violations.lock().unwrap().push(format!("{set}: logdet {} > {}", rep.logdet_error, rhs));
        }
        rep.logdet_error
    }

    fn table(&self, obj: &LogDetObjective) -> OracleTable {
        let values = (0..1u64 << obj.n()).map(|m| self.value(obj, &SensorSet::from_mask(m))).collect();
        OracleTable::from_values(obj.n(), values).unwrap()
    }

    /// Audits every prefix of a greedy selection.
    fn greedy(&self, obj: &LogDetObjective, res: &PlacementResult) {
        let mut set = SensorSet::empty();
        self.value(obj, &set);
        for &s in &res.selection_order {
            set.insert(s);
            self.value(obj, &set);
        }
    }
}

fn chain() -> LtvSystem {
    LtvSystem::with_identity_covariances(integrator_chain(5), 5).unwrap()
}

fn grid() -> LtvSystem {
    LtvSystem::with_identity_covariances(diffusion_grid(3, 3, 0.2).unwrap(), 20)
        .unwrap()
        .with_process_noise(ProcessNoise::Zero)
        .unwrap()
}

/// Random instances small enough for the exhaustive oracle.
fn oracle_instances() -> Vec<LtvSystem> {
    let mut out = vec![chain()];
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0000 + seed);
        let mut cfg = RandomSystemConfig::new(rng.random_range(1..=6), rng.random_range(0..=4));
        cfg.time_varying = seed % 3 == 1;
        cfg.zero_process_noise = seed % 5 == 2;
        out.push(random_system(&mut rng, &cfg).unwrap());
    }
    out
}

fn c1(audit: &Audit) -> Outcome {
    let start = Instant::now();
    let s = chain();
    let obj = LogDetObjective::new(&s).unwrap();
    let budget = audit.value(&obj, &SensorSet::from_one_based(&[2, 4], 5).unwrap());
    let res = greedy_p1(&obj, budget, GreedyOptions::lazy()).unwrap();
    let elapsed = start.elapsed();
    let chosen = res.chosen.one_based();
    Outcome::new(
        chosen == vec![3, 5] && res.status == PlacementStatus::Ok && within(elapsed, 1.0),
        format!("R = {budget:.6}, chosen {:?}, {:.3} s (limit 1 s)", chosen, elapsed.as_secs_f64()),
    )
}

fn c2(audit: &Audit) -> Outcome {
    let start = Instant::now();
    let obj = LogDetObjective::new(&chain()).unwrap();
    let table = audit.table(&obj);
    let mut mismatches = Vec::new();
    for r in 1..=5 {
        let res = greedy_p2(&obj, r, r, GreedyOptions::lazy()).unwrap();
        audit.greedy(&obj, &res);
        let best = table.optimal_exact(r);
        if res.chosen != best {
            mismatches.push(format!("r={r}: greedy {} vs optimum {best}", res.chosen));
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        mismatches.is_empty() && within(elapsed, 5.0),
        format!("mismatches {mismatches:?}, {:.3} s (limit 5 s)", elapsed.as_secs_f64()),
    )
}

fn c3(audit: &Audit) -> Outcome {
    let obj = LogDetObjective::new(&chain()).unwrap();
    let empty = audit.value(&obj, &SensorSet::empty());
    let full = audit.value(&obj, &SensorSet::full(5));
    let mut sweep = vec![empty];
    for r in 1..=5 {
        let res = greedy_p2(&obj, r, r, GreedyOptions::lazy()).unwrap();
        audit.greedy(&obj, &res);
        sweep.push(res.achieved_logdet);
    }
    let non_increasing = sweep.windows(2).all(|w| w[1] <= w[0]);
    let drop = sweep[0] - sweep[5];
    let max_dev =
        sweep.iter().enumerate().map(|(r, &v)| (v - (sweep[0] - drop * r as f64 / 5.0)).abs()).fold(0.0, f64::max);
    let linear = max_dev <= 0.15 * drop;
    Outcome::new(
        empty == 0.0 && (full + 31.0).abs() <= 0.5 && non_increasing && linear,
        format!(
            "h(empty) = {empty}, h(all) = {full:.4}, sweep {:?}, non-increasing {non_increasing}, \
             chord deviation {max_dev:.3} vs limit {:.3}",
            sweep.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>(),
            0.15 * drop
        ),
    )
}

fn c4(audit: &Audit) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..100 {
        let mut cfg = RandomSystemConfig::new(rng.random_range(1..=4), rng.random_range(0..=4));
        cfg.time_varying = rng.random_bool(0.5);
        let s = random_system(&mut rng, &cfg).unwrap();
        let picks: Vec<usize> = (0..s.n()).filter(|_| rng.random_bool(0.5)).collect();
        let set = SensorSet::from_zero_based(&picks, s.n()).unwrap();
        let obj = LogDetObjective::new(&s).unwrap();
        let closed = audit.value(&obj, &set);
        let direct = logdet_spd(&error_covariance_direct(&s, &set).unwrap(), "direct").unwrap();
        let rel = (direct - closed).abs() / (1.0 + closed.abs());
        worst = worst.max(rel);
        if rel > 1e-8 {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        failures == 0 && within(elapsed, 30.0),
        format!("100 systems, worst scaled gap {worst:.2e} (tol 1e-8), {:.3} s (limit 30 s)", elapsed.as_secs_f64()),
    )
}

fn c5(audit: &Audit) -> Outcome {
    let start = Instant::now();
    let mut supermod = 0;
    let mut mono = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC5_00 + seed);
        let mut cfg = RandomSystemConfig::new(4, rng.random_range(0..=4));
        cfg.time_varying = seed % 2 == 1;
        let obj = LogDetObjective::new(&random_system(&mut rng, &cfg).unwrap()).unwrap();
        let table = audit.table(&obj);
        supermod += table.verify_supermodularity().len();
        mono += table.verify_monotonicity().len();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5_FF);
    let mut triple_failures = 0;
    for _ in 0..10 {
        let mut cfg = RandomSystemConfig::new(6, rng.random_range(0..=4));
        cfg.time_varying = rng.random_bool(0.5);
        let obj = LogDetObjective::new(&random_system(&mut rng, &cfg).unwrap()).unwrap();
        for _ in 0..100 {
            let a = rng.random_range(0..6);
            let sup_mask = rng.random_range(0..64u64) & !(1 << a);
            let sub_mask = sup_mask & rng.random_range(0..64u64);
            let h = |m: u64| audit.value(&obj, &SensorSet::from_mask(m));
            let (sub, sub_a, sup, sup_a) = (h(sub_mask), h(sub_mask | 1 << a), h(sup_mask), h(sup_mask | 1 << a));
            if (sup - sup_a) - (sub - sub_a) > 1e-9 || sub_a - sub > 1e-9 || sup_a - sup > 1e-9 {
                triple_failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        supermod + mono + triple_failures == 0 && within(elapsed, 60.0),
        format!(
            "n=4 x20 exhaustive: {supermod} supermodularity / {mono} monotonicity violations; \
             n=6 1000 triples: {triple_failures} failures; {:.3} s (limit 60 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn c6(audit: &Audit) -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC6_00 + seed);
        let mut cfg = RandomSystemConfig::new(rng.random_range(1..=5), rng.random_range(0..=5));
        cfg.mu = Some(rng.random_range(0.05..0.99));
        cfg.time_varying = seed % 2 == 0;
        let s = random_system(&mut rng, &cfg).unwrap();
        let obj = LogDetObjective::new(&s).unwrap();
        let maps = StackedMaps::build(&s);
        let summary = s.noise_prior_summary().unwrap();
        for mask in 0..1u64 << s.n() {
            let set = SensorSet::from_mask(mask);
            audit.value(&obj, &set);
            let mmse = obj.report(&set).unwrap().mmse_x0;
            let b = mmse_bounds(&s, &summary, &maps, set.len(), BoundTarget::X0).unwrap();
            if b.lower > mmse + 1e-9 || mmse > b.upper + 1e-9 {
                failures.push(format!("seed {seed} {set}: {} <= {mmse} <= {}", b.lower, b.upper));
            }
        }
    }
    let sigma0_sq = 2.5;
    let s = LtvSystem::new(
        3,
        Dynamics::TimeInvariant(DMatrix::identity(3, 3) * 0.6),
        DMatrix::identity(3, 3) * sigma0_sq,
        ProcessNoise::Constant(DMatrix::identity(3, 3)),
        0.8,
    )
    .unwrap();
    let obj = LogDetObjective::new(&s).unwrap();
    audit.value(&obj, &SensorSet::empty());
    let mmse = obj.report(&SensorSet::empty()).unwrap().mmse_x0;
    let b = mmse_bounds(&s, &s.noise_prior_summary().unwrap(), &StackedMaps::build(&s), 0, BoundTarget::X0).unwrap();
    let expected = 3.0 * sigma0_sq;
    let collapse = [b.lower, b.upper, mmse].iter().all(|v| (v - expected).abs() < 1e-12);
    Outcome::new(
        failures.is_empty() && collapse,
        format!(
            "50 systems with mu < 1, {} sandwich failures; |S|=0 gives lower {} = mmse {} = upper {} (n sigma0^2 = {expected})",
            failures.len(),
            b.lower,
            mmse,
            b.upper
        ),
    )
}

fn c7(audit: &Audit) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut worst_ratio = 0.0f64;
    for (i, s) in oracle_instances().iter().enumerate() {
        let obj = LogDetObjective::new(s).unwrap();
        let table = audit.table(&obj);
        let empty = table.value(0);
        let full = table.value((1 << s.n()) - 1);
        for _ in 0..20 {
            let budget = full + rng.random_range(1e-6..=1.0) * (empty - full);
            let res = greedy_p1(&obj, budget, GreedyOptions::lazy()).unwrap();
            audit.greedy(&obj, &res);
            let optimum = table.optimal_p1(budget).unwrap().len();
            let factor = guarantee_factor_p1(empty, full, budget).unwrap();
            runs += 1;
            if optimum > 0 {
                worst_ratio = worst_ratio.max(res.chosen.len() as f64 / (factor * optimum as f64));
            }
            let size_ok = res.chosen.len() as f64 <= factor * optimum as f64 + 1e-12;
            if !size_ok || res.achieved_logdet > budget || res.status != PlacementStatus::Ok {
                failures.push(format!(
                    "instance {i}, R = {budget}: |S| = {}, |S*| = {optimum}, F = {factor}",
                    res.chosen.len()
                ));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{runs} runs on {} instances; max |S|/(F |S*|) = {worst_ratio:.3}; failures {failures:?}",
            oracle_instances().len()
        ),
    )
}

fn c8(audit: &Audit) -> Outcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut tightened = 0;
    for (i, s) in oracle_instances().iter().enumerate() {
        let obj = LogDetObjective::new(s).unwrap();
        let table = audit.table(&obj);
        let empty = table.value(0);
        for r in 1..=s.n() {
            let optimum = table.get(&table.optimal_p2(r));
            let res = greedy_p2(&obj, r, r, GreedyOptions::lazy()).unwrap();
            audit.greedy(&obj, &res);
            runs += 1;
            let e = (-1.0f64).exp();
            if res.achieved_logdet > (1.0 - e) * optimum + e * empty + 1e-9 {
                failures.push(format!("instance {i}, r={r}: {} vs optimum {optimum}", res.achieved_logdet));
            }
            if 5 * r <= s.n() {
                let wide = greedy_p2(&obj, r, 5 * r, GreedyOptions::lazy()).unwrap();
                audit.greedy(&obj, &wide);
                tightened += 1;
                if wide.achieved_logdet - optimum > (-5.0f64).exp() * (empty - optimum) + 1e-9 {
                    failures.push(format!("instance {i}, r={r}, l={}: {}", 5 * r, wide.achieved_logdet));
                }
            }
        }
    }
    Outcome::new(
        failures.is_empty() && tightened > 0,
        format!("{runs} runs with l = r, {tightened} with l = 5r; failures {failures:?}"),
    )
}

fn c10(audit: &Audit) -> Outcome {
    let start = Instant::now();
    let s = grid();
    let obj = LogDetObjective::new(&s).unwrap();
    let table = audit.table(&obj);
    let mut sweep = vec![table.value(0)];
    let mut mismatches = Vec::new();
    for r in 1..=9 {
        let res = greedy_p2(&obj, r, r, GreedyOptions::lazy()).unwrap();
        audit.greedy(&obj, &res);
        sweep.push(res.achieved_logdet);
        if r <= 4 {
            // Grid symmetry produces tied optima, so compare values.
            let best = table.get(&table.optimal_exact(r));
            if (res.achieved_logdet - best).abs() > 1e-9 * (1.0 + best.abs()) {
                mismatches.push(format!("r={r}: {} vs {best}", res.achieved_logdet));
            }
        }
    }
    let non_increasing = sweep.windows(2).all(|w| w[1] <= w[0]);
    let mut worst = 0.0f64;
    for (mask, v) in table.iter() {
        let set = SensorSet::from_mask(mask);
        let direct = logdet_spd(&error_covariance_direct_zero_noise(&s, &set).unwrap(), "direct").unwrap();
        worst = worst.max((direct - v).abs());
    }
    let elapsed = start.elapsed();
    Outcome::new(
        obj.path() == EstimationPath::ReducedZeroProcessNoise
            && non_increasing
            && mismatches.is_empty()
            && worst <= 1e-8
            && within(elapsed, 60.0),
        format!(
            "path {:?}, non-increasing {non_increasing}, oracle mismatches {mismatches:?}, \
             max |reduced - direct| = {worst:.2e} (tol 1e-8), {:.3} s (limit 60 s)",
            obj.path(),
            elapsed.as_secs_f64()
        ),
    )
}

fn c11() -> Outcome {
    let mut mismatches = 0;
    let mut large = 0;
    let mut cheaper = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1100 + seed);
        let n = rng.random_range(2..=8);
        let mut cfg = RandomSystemConfig::new(n, rng.random_range(0..=3));
        cfg.time_varying = rng.random_bool(0.3);
        let obj = LogDetObjective::new(&random_system(&mut rng, &cfg).unwrap()).unwrap();
        let eager = greedy_p2(&obj, n, n, GreedyOptions::eager()).unwrap();
        let lazy = greedy_p2(&obj, n, n, GreedyOptions::lazy()).unwrap();
        let empty = obj.value(&SensorSet::empty()).unwrap();
        let full = obj.value(&SensorSet::full(n)).unwrap();
        let budget = full + rng.random_range(0.05..0.95) * (empty - full);
        let eager_p1 = greedy_p1(&obj, budget, GreedyOptions::eager()).unwrap();
        let lazy_p1 = greedy_p1(&obj, budget, GreedyOptions::lazy()).unwrap();
        if eager.chosen != lazy.chosen
            || eager.trace != lazy.trace
            || eager_p1.chosen != lazy_p1.chosen
            || eager_p1.trace != lazy_p1.trace
        {
            mismatches += 1;
        }
        if n >= 6 {
            large += 1;
            if lazy.evaluations < eager.evaluations {
                cheaper += 1;
            }
        }
    }
    let share = cheaper as f64 / large.max(1) as f64;
    Outcome::new(
        mismatches == 0 && large > 0 && share >= 0.9,
        format!("50 instances, {mismatches} mismatches; lazy cheaper on {cheaper}/{large} instances with n >= 6"),
    )
}

#[test]
fn criterion_01_chain_min_set_reproduction() {
    verdict(1, "chain P1 returns {3,5}", c1(&Audit::default()));
}

#[test]
fn criterion_02_chain_budgeted_matches_oracle() {
    verdict(2, "chain P2 equals oracle for r = 1..5", c2(&Audit::default()));
}

#[test]
fn criterion_03_chain_endpoint_values() {
    verdict(3, "chain endpoints and near-linear sweep", c3(&Audit::default()));
}

#[test]
fn criterion_04_woodbury_consistency() {
    verdict(4, "covariance form equals information form", c4(&Audit::default()));
}

#[test]
fn criterion_05_supermodularity_and_monotonicity() {
    verdict(5, "supermodular and non-increasing", c5(&Audit::default()));
}

#[test]
fn criterion_06_mmse_sandwich() {
    verdict(6, "mmse(x0) bounds sandwich", c6(&Audit::default()));
}

#[test]
fn criterion_07_min_set_guarantee() {
    verdict(7, "P1 cardinality guarantee and feasibility", c7(&Audit::default()));
}

#[test]
fn criterion_08_budgeted_guarantee() {
    verdict(8, "P2 value guarantee and l = 5r tightening", c8(&Audit::default()));
}

#[test]
fn criterion_09_logdet_below_mmse() {
    let audit = Audit::default();
    for run in [c3, c4, c5, c6, c7, c8] {
        run(&audit);
    }
    let checks = audit.checks.load(Ordering::Relaxed);
    let violations = audit.violations.into_inner().unwrap();
    verdict(
        9,
        "logdet <= mmse - dim on criteria 3-8",
        Outcome::new(
            checks > 0 && violations.is_empty(),
            format!(
                "{checks} evaluations, {} violations {:?}",
                violations.len(),
                violations.iter().take(3).collect::<Vec<_>>()
            ),
        ),
    );
}

#[test]
fn criterion_10_grid_stand_in() {
    verdict(10, "3x3 diffusion grid, zero process noise", c10(&Audit::default()));
}

#[test]
fn criterion_11_lazy_eager_equivalence() {
    verdict(11, "lazy and eager greedy agree", c11());
}
