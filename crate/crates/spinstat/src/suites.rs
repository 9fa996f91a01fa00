//! Aggregated verification suites behind the CLI `verify` command.
//!
//! Each runner sweeps a family of identities over `two_s <= max_two_s` and
//! folds the outcomes into a [`SuiteResult`]. Results are deterministic for a
//! fixed seed; wall-clock duration is carried for logging but excluded from
//! serialized output so byte-identical reruns stay byte-identical.

use serde::Serialize;
use std::time::Instant;

use crate::cgc::{
    build_table, check_closed_form, check_coefficient_symmetry, check_ladder_annihilation,
    check_oracle_equivalence, check_orthogonality, check_ratio_reciprocity,
};
use crate::exchange::{exchange, expected_sign, parity, spin_swap, verify_spin_statistics};
use crate::rng::SplitMix64;
use crate::rotations::{
    d_matrix, d_matrix_pi, d_pi_entry, exchange_by_rotation_opposite_spin,
    exchange_by_rotation_same_spin, singlet_rotation_invariance, EulerRotation,
};
use crate::spin_space::{random_state, SpinPair};

/// Exact-table identities are cheap at any spin, but the closed-form oracle
/// grows factorially; the suite compares against it only up to this bound.
pub const ORACLE_SWEEP_CAP: u32 = 12;

/// Floating d-matrix checks stop here; beyond it the exact pi-path identities
/// still run.
pub const FLOAT_D_CAP: u32 = 20;

/// Singlet invariance is sampled for two_s up to this bound.
pub const SINGLET_CAP: u32 = 4;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub cases: usize,
    pub failures: usize,
    #[serde(skip)]
    pub duration_ms: u128,
    pub details: Vec<String>,
}

impl SuiteResult {
    pub fn is_pass(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    cases: usize,
    failures: usize,
    details: Vec<String>,
}

impl Tally {
    fn new() -> Tally {
        Tally { cases: 0, failures: 0, details: Vec::new() }
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            self.details.push(describe());
        }
    }

    fn absorb(&mut self, verdict: crate::cgc::Verdict, label: &str) {
        self.cases += verdict.checked;
        self.failures += verdict.violations.len();
        self.details.extend(verdict.violations.into_iter().map(|v| format!("{label}: {v}")));
    }

    fn finish(self, suite: &str, started: Instant) -> SuiteResult {
        SuiteResult {
            suite: suite.to_string(),
            cases: self.cases,
            failures: self.failures,
            duration_ms: started.elapsed().as_millis(),
            details: self.details,
        }
    }
}

/// Recurrence reciprocity, row mirror and label-swap symmetries, both
/// orthogonality relations, raising-operator annihilation, the closed-form
/// product for highest-weight rows, and (up to [`ORACLE_SWEEP_CAP`])
/// agreement with the factorial oracle.
pub fn run_cgc_suite(max_two_s: u32) -> SuiteResult {
    let started = Instant::now();
    let mut tally = Tally::new();
    for two_s in 0..=max_two_s {
        let table = match build_table(two_s) {
            Ok(table) => table,
            Err(err) => {
                tally.case(false, || format!("two_s={two_s}: table construction failed: {err}"));
                continue;
            }
        };
        for j in table.pair().coupled_j_values() {
            match check_ratio_reciprocity(two_s, j) {
                Ok(v) => tally.absorb(v, "reciprocity"),
                Err(err) => tally.case(false, || format!("reciprocity two_s={two_s}: {err}")),
            }
        }
        tally.absorb(check_coefficient_symmetry(&table), "symmetry");
        match check_orthogonality(&table) {
            Ok(v) => tally.absorb(v, "orthogonality"),
            Err(err) => tally.case(false, || format!("orthogonality two_s={two_s}: {err}")),
        }
        match check_ladder_annihilation(&table) {
            Ok(v) => tally.absorb(v, "ladder"),
            Err(err) => tally.case(false, || format!("ladder two_s={two_s}: {err}")),
        }
        match check_closed_form(&table) {
            Ok(v) => tally.absorb(v, "closed-form"),
            Err(err) => tally.case(false, || format!("closed-form two_s={two_s}: {err}")),
        }
        if two_s <= ORACLE_SWEEP_CAP {
            match check_oracle_equivalence(&table) {
                Ok(v) => tally.absorb(v, "oracle"),
                Err(err) => tally.case(false, || format!("oracle two_s={two_s}: {err}")),
            }
        }
    }
    tally.finish("cgc", started)
}

/// Spin-statistics sign on random states plus involution checks for parity,
/// spin swap, and exchange.
pub fn run_exchange_suite(max_two_s: u32, trials: u32, seed: u64) -> SuiteResult {
    let started = Instant::now();
    let mut tally = Tally::new();
    let mut seeder = SplitMix64::new(seed);
    for two_s in 0..=max_two_s {
        let suite_seed = seeder.next_u64();
        let report = verify_spin_statistics(two_s, trials, suite_seed);
        tally.case(report.is_pass(), || {
            format!(
                "two_s={two_s}: observed sign {} over {} states, expected {:+}",
                report.sign_observed, report.states_tested, expected_sign(two_s)
            )
        });

        let table = build_table(two_s).expect("table builds for any two_s");
        let mut involutions_hold = true;
        for _ in 0..trials.min(10) {
            let psi = random_state(two_s, seeder.next_u64());
            let p_ok = parity(&psi, &table)
                .and_then(|once| parity(&once, &table))
                .map(|twice| twice == psi)
                .unwrap_or(false);
            let s_ok = spin_swap(&spin_swap(&psi)) == psi;
            let e_ok = exchange(&psi, &table)
                .and_then(|once| exchange(&once, &table))
                .map(|twice| twice == psi)
                .unwrap_or(false);
            if !(p_ok && s_ok && e_ok) {
                involutions_hold = false;
            }
        }
        tally.case(involutions_hold, || {
            format!("two_s={two_s}: an involution P*P, Es*Es, or E*E moved a state")
        });
    }
    tally.finish("exchange", started)
}

/// Rotation-route exchange signs, exact pi-matrix identities, floating
/// orthogonality, and singlet invariance under sampled rotations.
pub fn run_rotation_suite(max_two_s: u32, seed: u64) -> SuiteResult {
    let started = Instant::now();
    let mut tally = Tally::new();
    let mut rng = SplitMix64::new(seed);

    for two_s in 0..=max_two_s {
        let want = expected_sign(two_s);
        let same_ok = SpinPair::new(two_s)
            .projections()
            .all(|m| exchange_by_rotation_same_spin(two_s, m) == Ok(want));
        tally.case(same_ok, || format!("two_s={two_s}: z-rotation sign differs from {want:+}"));
        let opposite_ok = SpinPair::new(two_s)
            .projections()
            .all(|m| exchange_by_rotation_opposite_spin(two_s, m) == Ok(want));
        tally.case(opposite_ok, || format!("two_s={two_s}: y-rotation sign differs from {want:+}"));
    }

    for two_j in 0..=max_two_s {
        let two_j_i = two_j as i64;
        let antidiagonal_ok = (-two_j_i..=two_j_i).step_by(2).all(|two_m| {
            let expect = if (two_j_i - two_m) % 4 == 0 { 1 } else { -1 };
            d_pi_entry(two_j, -two_m, two_m) == expect
        });
        tally.case(antidiagonal_ok, || format!("two_j={two_j}: d(pi) antidiagonal value wrong"));

        let sign = if two_j % 2 == 0 { 1 } else { -1 };
        let labels: Vec<i64> = (-two_j_i..=two_j_i).step_by(2).collect();
        let square_ok = labels.iter().all(|&mp| {
            labels.iter().all(|&m| {
                let acc: i64 = labels.iter().map(|&mid| d_pi_entry(two_j, mp, mid) * d_pi_entry(two_j, mid, m)).sum();
                acc == if mp == m { sign } else { 0 }
            })
        });
        tally.case(square_ok, || format!("two_j={two_j}: d(pi)^2 != (-1)^(2j) I"));
    }

    for two_j in 0..=max_two_s.min(FLOAT_D_CAP) {
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let theta = rng.next_f64() * std::f64::consts::TAU;
            worst = worst.max(d_matrix(two_j, theta).orthogonality_defect());
        }
        worst = worst.max({
            let float = d_matrix(two_j, std::f64::consts::PI);
            let exact = d_matrix_pi(two_j);
            let n = float.dim();
            let mut diff = 0.0f64;
            for r in 0..n {
                for c in 0..n {
                    diff = diff.max((float.entry_at(r, c) - exact.entry_at(r, c)).abs());
                }
            }
            diff
        });
        tally.case(worst < 1e-12, || format!("two_j={two_j}: floating d-matrix defect {worst:e}"));
    }

    for two_s in 1..=max_two_s.min(SINGLET_CAP) {
        let mut invariant = true;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let verdict = singlet_rotation_invariance(two_s, EulerRotation::sample(&mut rng));
            worst = worst.max(verdict.max_deviation);
            invariant &= verdict.is_invariant() && verdict.rotation_sign() == 1;
        }
        tally.case(invariant, || format!("two_s={two_s}: singlet moved under rotation ({worst:e})"));
    }

    tally.finish("rotation", started)
}

/// 0 when every suite passed, 1 otherwise (the `verify` exit code).
pub fn exit_code(results: &[SuiteResult]) -> i32 {
    if results.iter().all(SuiteResult::is_pass) {
        0
    } else {
        1
    }
}
