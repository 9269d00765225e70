use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{ScenarioConfig, ScenarioKind};
use super::output::CheckResult;
use super::run::simulate;
use crate::dilation::{demonstrate_4dim_impossibility, project_postselect, propagate_m, Dilation};
use crate::error::{Error, Result};
use crate::evolution::{
    closed_form_case, evolve_normalized, evolve_state_normalized, incoherent_sum_demo,
    integrate_lindblad, DensityMatrix, LindbladSpec, StepControl,
};
use crate::hamiltonians::{build_case, build_switched_two_level, Case, Hamiltonian, Sign};
use crate::observables::{
    entropy, fs_distance_states, partial_trace_ancilla, partial_trace_system,
    phase_aligned_distance,
};
use crate::{pauli, CMatrix, CVector, C64};

type CheckFn = fn(u64) -> Result<CheckResult>;

/// Every registered invariant, in report order.
pub const CHECKS: [(&str, CheckFn); 11] = [
    ("closed_form_cases", closed_form_cases),
    ("dilation_invariants", dilation_invariants),
    ("subspace_equivalence_4dim", subspace_equivalence_4dim),
    ("constraint_law_case_c", constraint_law_case_c),
    ("case_a_constraint_violation", case_a_constraint_violation),
    ("gamma_zero_entanglement_free", gamma_zero_entanglement_free),
    ("impossibility", impossibility),
    ("incoherent_sum", incoherent_sum),
    ("lindblad_populations", lindblad_populations),
    ("random_schmidt_symmetry", random_schmidt_symmetry),
    ("random_fs_triangle", random_fs_triangle),
];

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub filter: Option<String>,
    pub registered: usize,
    pub selected: usize,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Runs the checks whose name contains `filter` (all when `None`). A check
/// that errors is reported as failed with the error text.
pub fn verify(filter: Option<&str>, seed: u64) -> Result<VerifyReport> {
    let selected: Vec<_> = CHECKS
        .iter()
        .filter(|(name, _)| filter.is_none_or(|f| name.contains(f)))
        .collect();
    if selected.is_empty() {
        return Err(Error::Config {
            field: "filter".into(),
            message: format!("no check matches `{}`", filter.unwrap_or("")),
        });
    }
    let checks: Vec<CheckResult> = {
        use rayon::prelude::*;
        selected
            .par_iter()
            .map(|(name, f)| match f(seed) {
                Ok(mut c) => {
                    c.name = name.to_string();
                    c
                }
                Err(e) => CheckResult::flag(name, false, format!("error: {e}")),
            })
            .collect()
    };
    let failed = checks.iter().filter(|c| !c.pass).count();
    Ok(VerifyReport {
        seed,
        filter: filter.map(String::from),
        registered: CHECKS.len(),
        selected: checks.len(),
        passed: checks.len() - failed,
        failed,
        checks,
    })
}

fn plus() -> CVector {
    CVector::from_real(&[1.0, 1.0])
        .normalized()
        .expect("non-zero")
}

fn closed_form_cases(_: u64) -> Result<CheckResult> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (c1, c2) = (C64::new(s, 0.0), C64::new(s, 0.0));
    let ctrl = StepControl::new(1e-3, 5.0, 1)?;
    let mut worst: f64 = 0.0;
    for gamma in [0.5, 1.5] {
        for case in [Case::A, Case::B, Case::C] {
            let h = build_case(case, 1.0, -1.0, gamma);
            for snap in evolve_normalized(&DensityMatrix::from_pure(&plus())?, &h, &ctrl)? {
                let exact = closed_form_case(case, c1, c2, 1.0, -1.0, gamma, snap.t)?;
                worst = worst.max((snap.state.matrix() - exact.matrix()).max_abs());
            }
        }
    }
    Ok(CheckResult::at_most(
        "",
        worst,
        1e-6,
        "max entry error of Cases A, B, C against the closed forms",
    ))
}

fn dilation_invariants(_: u64) -> Result<CheckResult> {
    let out = simulate(&ScenarioConfig::defaults(ScenarioKind::Fig2))?;
    let bad: Vec<&str> = out
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    Ok(CheckResult::flag(
        "",
        bad.is_empty(),
        format!("fig2 defaults; failing: {bad:?}"),
    ))
}

fn subspace_equivalence_4dim(_: u64) -> Result<CheckResult> {
    let cfg = ScenarioConfig {
        t_max: 8.0,
        ..ScenarioConfig::defaults(ScenarioKind::Fig2)
    };
    let h = Arc::new(build_switched_two_level(
        Sign::Minus,
        cfg.gamma,
        cfg.t_i,
        cfg.t_f,
    )?);
    let ctrl = cfg.step_control()?;
    let run = Dilation::four_dim(h.clone(), cfg.effective_m0())?.run(&[plus()], &ctrl)?;
    let direct = evolve_state_normalized(&plus(), h.as_ref(), &ctrl)?;
    let mut worst: f64 = 0.0;
    for (s, d) in run.samples.iter().zip(&direct) {
        worst = worst.max(phase_aligned_distance(
            &project_postselect(&s.state, 0)?,
            &d.state,
        )?);
    }
    Ok(CheckResult::at_most(
        "",
        worst,
        1e-5,
        "phase-aligned distance, post-selected vs direct",
    ))
}

fn constraint_law_case_c(_: u64) -> Result<CheckResult> {
    let m0 = 1.0005;
    let h = build_switched_two_level(Sign::Minus, 1.5, 3.0, 7.0)?;
    let frames = propagate_m(
        &h,
        &CMatrix::identity(2).scale_real(m0),
        &StepControl::new(1e-3, 12.0, 10)?,
    )?;
    let worst = frames
        .iter()
        .map(|f| (f.min_eig_m - m0).abs())
        .fold(0.0, f64::max);
    Ok(CheckResult::at_most(
        "",
        worst,
        1e-8,
        "max |min eig M(t) − m₀|",
    ))
}

fn case_a_constraint_violation(_: u64) -> Result<CheckResult> {
    let h: Arc<dyn Hamiltonian> = Arc::new(build_case(Case::A, 1.0, -1.0, 1.0));
    let outcome = Dilation::four_dim(h, 1.0005)
        .and_then(|d| d.run(&[plus()], &StepControl::new(1e-3, 1.0, 10)?));
    Ok(match outcome {
        Err(Error::ConstraintViolation { t, eigenvalue }) => CheckResult::flag(
            "",
            true,
            format!("rejected at t = {t} (eigenvalue {eigenvalue})"),
        ),
        Err(e) => CheckResult::flag("", false, format!("wrong error: {e}")),
        Ok(_) => CheckResult::flag("", false, "Case A input was accepted"),
    })
}

fn gamma_zero_entanglement_free(_: u64) -> Result<CheckResult> {
    let cfg = ScenarioConfig {
        gamma: 0.0,
        t_max: 8.0,
        ..ScenarioConfig::defaults(ScenarioKind::Fig2)
    };
    let out = simulate(&cfg)?;
    let worst = out.records.iter().map(|r| r.entropy).fold(0.0, f64::max);
    Ok(CheckResult::at_most(
        "",
        worst,
        1e-8,
        "max entropy with γ = 0",
    ))
}

fn impossibility(_: u64) -> Result<CheckResult> {
    let ctrl = StepControl::new(1e-3, 2.0, 10)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for gamma in [0.0, 0.5, 1.0, 1.5] {
        let h: Arc<dyn Hamiltonian> = Arc::new(build_case(Case::C, 1.0, -1.0, gamma));
        let r = demonstrate_4dim_impossibility(h, &plus(), 1.0005, &ctrl)?;
        ok &= if gamma == 0.0 {
            r.max_overlap <= 1e-10
        } else {
            r.first_exceed_time.is_some() && !r.persists_orthogonal
        };
        detail.push(format!("γ={gamma}: max {:.3e}", r.max_overlap));
    }
    Ok(CheckResult::flag("", ok, detail.join("; ")))
}

fn incoherent_sum(_: u64) -> Result<CheckResult> {
    let (c1, c2) = (
        C64::new((2.0f64 / 3.0).sqrt(), 0.0),
        C64::new(0.0, (1.0f64 / 3.0).sqrt()),
    );
    let mut worst_trace: f64 = 0.0;
    for gamma in [0.5, 1.5] {
        for k in 0..=500 {
            let rho = incoherent_sum_demo(c1, c2, gamma, k as f64 * 0.1 / gamma)?;
            worst_trace = worst_trace.max((rho.trace() - 1.0).abs());
        }
    }
    let end = incoherent_sum_demo(c1, c2, 1.0, 50.0)?;
    let diag = (end.get(0, 0).re - 2.0 / 3.0)
        .abs()
        .max((end.get(1, 1).re - 1.0 / 3.0).abs());
    let c = CheckResult::at_most(
        "",
        worst_trace,
        1e-12,
        format!("max trace error; diagonal error at t = 50/γ is {diag:.3e} (limit 1e-6)"),
    );
    Ok(CheckResult {
        pass: c.pass && diag <= 1e-6,
        ..c
    })
}

fn lindblad_populations(_: u64) -> Result<CheckResult> {
    let psi = CVector::from_real(&[(2.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt()]);
    let spec = LindbladSpec::new(pauli::z(), vec![(pauli::z(), 0.3)])?;
    let traj = integrate_lindblad(
        &DensityMatrix::from_pure(&psi)?,
        &spec,
        &StepControl::new(1e-3, 30.0, 100)?,
    )?;
    let worst = traj
        .iter()
        .map(|s| (s.state.get(0, 0).re - 2.0 / 3.0).abs())
        .fold(0.0, f64::max);
    Ok(CheckResult::at_most(
        "",
        worst,
        1e-8,
        "max |ρ₀₀(t) − 2/3| under σ_z dephasing",
    ))
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    CVector::from_vec(v)
        .normalized()
        .unwrap_or_else(|_| CVector::basis(n, 0))
}

fn random_schmidt_symmetry(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let psi = random_state(&mut rng, 8);
        let a = entropy(&partial_trace_ancilla(&psi, 2, 4)?)?;
        let b = entropy(&partial_trace_system(&psi, 2, 4)?)?;
        worst = worst.max((a - b).abs());
    }
    Ok(CheckResult::at_most(
        "",
        worst,
        1e-8,
        "max |S(ρ_s) − S(ρ_a)| over 200 random 2x4 states",
    ))
}

fn random_fs_triangle(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..500 {
        let (a, b, c) = (
            random_state(&mut rng, 3),
            random_state(&mut rng, 3),
            random_state(&mut rng, 3),
        );
        worst = worst.max(
            fs_distance_states(&a, &c) - fs_distance_states(&a, &b) - fs_distance_states(&b, &c),
        );
    }
    Ok(CheckResult::at_most(
        "",
        worst,
        1e-8,
        "max δ(a,c) − δ(a,b) − δ(b,c) over 500 random triples",
    ))
}
