//! Named verification suites over randomly generated automorphisms.
//!
//! Every suite runs a fixed configuration grid — commutative and free
//! variables, displacement levels 1 and 2, variable counts cycling through
//! 1..=3 at `max_z_degree = 6`, `max_t_degree = 4` — with all randomness
//! derived from one master seed by fixed offsets, so reports are
//! byte-reproducible regardless of thread scheduling.

use std::str::FromStr;

use rayon::prelude::*;

use crate::autgroup::{
    random_automorphism, random_graded_automorphism, Automorphism, Profile,
};
use crate::diffop::{MonomialBasis, OpAction};
use crate::error::Error;
use crate::ncs::{
    action_hopf_checks, build_omega, derive_seed, graded_check, group_hom_check, specialize,
    verify_ncs, CheckEntry, VerifyReport,
};
use crate::nsym::{solve_pi, PiSystem};
use crate::series::RingContext;
use rand_chacha::ChaCha8Rng;

use rand::SeedableRng;

/// Selection of checks for [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Five defining equations for random automorphisms.
    Ncs,
    /// Specialization images match the built operator families.
    Correspondence,
    /// Group homomorphism identities for the `g` family.
    Group,
    /// Operator grading agrees with the displacement shape test.
    Graded,
    /// Divided-powers and Leibniz action checks.
    HopfAction,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "ncs" => Ok(Suite::Ncs),
            "correspondence" => Ok(Suite::Correspondence),
            "group" => Ok(Suite::Group),
            "graded" => Ok(Suite::Graded),
            "hopf-action" => Ok(Suite::HopfAction),
            "all" => Ok(Suite::All),
            other => Err(Error::Schema(format!(
                "unknown suite {other:?} (expected ncs, correspondence, group, graded, hopf-action or all)"
            ))),
        }
    }
}

/// Ring bounds and the variable-count ceiling for the suite grid. The
/// defaults are the published acceptance configuration.
#[derive(Debug, Clone, Copy)]
pub struct SuiteGrid {
    pub max_n: usize,
    pub max_z_degree: u32,
    pub max_t_degree: u32,
}

impl Default for SuiteGrid {
    fn default() -> Self {
        Self { max_n: 3, max_z_degree: 6, max_t_degree: 4 }
    }
}

/// The four (commutativity, alpha) cases.
fn case(idx: u32) -> (bool, u32) {
    let commutative = idx % 2 == 0;
    let alpha = 1 + (idx / 2) % 2;
    (commutative, alpha)
}

fn case_label(commutative: bool, alpha: u32, n: usize) -> String {
    format!("[{} a{alpha} n{n}]", if commutative { "comm" } else { "free" })
}

fn trial_ring(grid: &SuiteGrid, trial: u32, commutative: bool) -> RingContext {
    let n = 1 + (trial as usize % grid.max_n.max(1));
    RingContext::new(n, commutative, grid.max_z_degree, grid.max_t_degree)
        .expect("grid parameters are valid")
}

fn merged<F>(count: u32, body: F) -> VerifyReport
where
    F: Fn(u32) -> VerifyReport + Sync + Send,
{
    let parts: Vec<VerifyReport> = (0..count).into_par_iter().map(body).collect();
    let mut out = VerifyReport::default();
    for p in parts {
        out.merge(p);
    }
    out
}

/// Runs a suite with `trials` repetitions per configuration case on the
/// default grid.
pub fn run_suite(suite: Suite, seed: u64, trials: u32) -> VerifyReport {
    run_suite_on(suite, seed, trials, &SuiteGrid::default())
}

/// Runs a suite on an explicit grid.
pub fn run_suite_on(suite: Suite, seed: u64, trials: u32, grid: &SuiteGrid) -> VerifyReport {
    match suite {
        Suite::Ncs => ncs_suite_on(seed, trials, false, grid),
        Suite::Correspondence => correspondence_suite(seed, trials, grid),
        Suite::Group => group_suite(seed, trials, grid),
        Suite::Graded => graded_suite(seed, trials, grid),
        Suite::HopfAction => hopf_action_suite(seed, trials, grid),
        Suite::All => {
            let mut out = VerifyReport::default();
            out.merge(ncs_suite_on(seed, trials, false, grid));
            out.merge(correspondence_suite(seed, trials.min(10), grid));
            out.merge(group_suite(seed, trials.min(10), grid));
            out.merge(graded_suite(seed, trials, grid));
            out.merge(hopf_action_suite(seed, trials.min(5), grid));
            out
        }
    }
}

/// Five-axiom suite on the default grid; `tamper` flips the negative-control
/// hook on every trial.
pub fn ncs_suite(seed: u64, trials: u32, tamper: bool) -> VerifyReport {
    ncs_suite_on(seed, trials, tamper, &SuiteGrid::default())
}

pub fn ncs_suite_on(seed: u64, trials: u32, tamper: bool, grid: &SuiteGrid) -> VerifyReport {
    let grid = *grid;
    merged(4 * trials, move |i| {
        let case_idx = i / trials;
        let trial = i % trials;
        let (commutative, alpha) = case(case_idx);
        let ctx = trial_ring(&grid, trial, commutative);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1 + case_idx as u64, trial as u64));
        let profile = if trial % 2 == 0 { Profile::General } else { Profile::LinearInT };
        let aut = random_automorphism(&ctx, alpha, profile, &mut rng)
            .expect("grid admits random automorphisms");
        let mut sys = build_omega(&aut);
        if tamper {
            sys.tamper_h();
        }
        let label = format!("ncs{} t{trial}", case_label(commutative, alpha, ctx.n()));
        verify_ncs(&sys).prefixed(&label)
    })
}

/// Images of the four solved families under specialization match the built
/// operator coefficients.
fn correspondence_suite(seed: u64, trials: u32, grid: &SuiteGrid) -> VerifyReport {
    let pi = solve_pi(grid.max_t_degree);
    let grid = *grid;
    merged(4 * trials, move |i| {
        let case_idx = i / trials;
        let trial = i % trials;
        let (commutative, alpha) = case(case_idx);
        let ctx = trial_ring(&grid, trial, commutative);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 11 + case_idx as u64, trial as u64));
        let aut = random_automorphism(&ctx, alpha, Profile::General, &mut rng)
            .expect("grid admits random automorphisms");
        let label = format!("correspondence{} t{trial}", case_label(commutative, alpha, ctx.n()));
        correspondence_entries(&pi, &aut).prefixed(&label)
    })
}

fn correspondence_entries(pi: &PiSystem, aut: &Automorphism) -> VerifyReport {
    let ctx = aut.context();
    let basis = MonomialBasis::new(ctx);
    let sys = build_omega(aut);
    let mut report = VerifyReport::default();
    for m in 1..=ctx.max_t_degree() {
        let pairs = [
            ("S", pi.s_m(m), sys.s_m(m)),
            ("Psi", pi.psi_m(m), sys.psi_m(m)),
            ("Phi", pi.phi_m(m), sys.phi_m(m)),
            ("Xi", pi.xi_m(m), sys.xi_m(m)),
        ];
        for (family, elem, want) in pairs {
            let got = specialize(&elem, aut).expect("weight fits the t bound");
            let diff = OpAction::from_op(&got, &basis)
                .first_difference(&OpAction::from_op(&want, &basis));
            report.push(CheckEntry {
                check: format!("{family}_{m} image"),
                pass: diff.is_none(),
                counterexample: diff.map(|i| format!("monomial {}", basis.mono_series(i))),
            });
        }
    }
    report
}

fn group_suite(seed: u64, trials: u32, grid: &SuiteGrid) -> VerifyReport {
    let grid = *grid;
    merged(2 * trials, move |i| {
        let case_idx = i / trials; // commutative, then free
        let trial = i % trials;
        let commutative = case_idx == 0;
        let ctx = trial_ring(&grid, trial, commutative);
        let alpha = 1 + trial % 2;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 21 + case_idx as u64, trial as u64));
        let u = random_automorphism(&ctx, alpha, Profile::General, &mut rng)
            .expect("grid admits random automorphisms");
        let v = random_automorphism(&ctx, alpha, Profile::LinearInT, &mut rng)
            .expect("grid admits random automorphisms");
        let label = format!("group{} t{trial}", case_label(commutative, alpha, ctx.n()));
        group_hom_check(&u, &v)
            .expect("contexts match by construction")
            .prefixed(&label)
    })
}

fn graded_suite(seed: u64, trials: u32, grid: &SuiteGrid) -> VerifyReport {
    let grid = *grid;
    merged(2 * trials, move |i| {
        let case_idx = i / trials; // graded profile, then general profile
        let trial = i % trials;
        let commutative = trial % 2 == 0;
        let ctx = trial_ring(&grid, trial, commutative);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 31 + case_idx as u64, trial as u64));
        let (aut, which) = if case_idx == 0 {
            (
                random_graded_automorphism(&ctx, 2, &mut rng)
                    .expect("grid admits graded automorphisms"),
                "graded profile",
            )
        } else {
            (
                random_automorphism(&ctx, 2, Profile::General, &mut rng)
                    .expect("grid admits random automorphisms"),
                "general profile",
            )
        };
        let by_operators = graded_check(&aut).expect("alpha = 2");
        let by_form = aut.is_graded_form();
        let mut report = VerifyReport::default();
        report.push(CheckEntry {
            check: format!(
                "graded{} t{trial}: operator grading agrees with the form test ({which})",
                case_label(commutative, 2, ctx.n())
            ),
            pass: by_operators == by_form,
            counterexample: (by_operators != by_form)
                .then(|| format!("operators: {by_operators}, form: {by_form}")),
        });
        report
    })
}

fn hopf_action_suite(seed: u64, trials: u32, grid: &SuiteGrid) -> VerifyReport {
    let grid = *grid;
    merged(2 * trials, move |i| {
        let case_idx = i / trials;
        let trial = i % trials;
        let commutative = case_idx == 0;
        let ctx = trial_ring(&grid, trial, commutative);
        let alpha = 1 + trial % 2;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 41 + case_idx as u64, trial as u64));
        let aut = random_automorphism(&ctx, alpha, Profile::General, &mut rng)
            .expect("grid admits random automorphisms");
        let label = format!("hopf-action{} t{trial}", case_label(commutative, alpha, ctx.n()));
        action_hopf_checks(&aut, derive_seed(seed, 43, i as u64), 2).prefixed(&label)
    })
}
