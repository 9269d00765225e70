use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde_json::{json, Map, Value};

use super::config::{ScenarioConfig, ScenarioKind};
use super::output::{CheckResult, RunManifest, Table};
use crate::dilation::{
    demonstrate_4dim_impossibility, project_measurement, project_postselect, Dilation, FullRun,
};
use crate::error::{Error, Result};
use crate::evolution::{
    evolve_normalized, integrate_lindblad, DensityMatrix, LindbladSpec, StepControl,
};
use crate::hamiltonians::{
    build_case, build_switched_two_level, build_target_hamiltonian, Case, Hamiltonian, Sign,
    SwitchedHamiltonian,
};
use crate::observables::{
    bloch, bloch_of_state, entropy, fs_distance, mean_speed, BlochVector, TrajectoryRecord,
};
use crate::{pauli, CMatrix, CVector, C64};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const NORM_DRIFT_TOL: f64 = 1e-8;
pub const CONSTRAINT_FLOOR: f64 = 1.0 - 1e-8;
pub const PROB_SUM_TOL: f64 = 1e-8;

/// In-memory result of a scenario, before anything is written.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub table: Table,
    pub records: Vec<TrajectoryRecord>,
    pub registered: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub summary: Map<String, Value>,
}

impl RunOutput {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Invariants every dilation run registers.
pub const DILATION_CHECKS: [&str; 4] =
    ["hermiticity", "unitarity", "constraint", "probs_normalized"];

/// Runs the scenario without touching the filesystem.
pub fn simulate(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.scenario {
        ScenarioKind::Fig2 | ScenarioKind::Fig3 => run_switched_single(
            cfg,
            Arc::new(build_switched_two_level(
                Sign::Minus,
                cfg.gamma,
                cfg.t_i,
                cfg.t_f,
            )?),
        ),
        ScenarioKind::Custom => {
            let h = SwitchedHamiltonian::new(
                CMatrix::from_real_diagonal(&cfg.h_h_diag),
                CMatrix::from_real_diagonal(&cfg.h_m_diag),
                cfg.gamma,
                cfg.t_i,
                cfg.t_f,
            )?;
            run_switched_single(cfg, Arc::new(h))
        }
        ScenarioKind::Fig5 => run_fig5(cfg),
        ScenarioKind::Fig6 => run_fig6(cfg),
        ScenarioKind::NLevel => run_n_level(cfg),
        ScenarioKind::Fig4Sweep => run_speed_sweep(cfg),
        ScenarioKind::Impossibility => run_impossibility(cfg),
    }
}

/// Runs the scenario, writes `<name>.csv` and `<name>.manifest.json` into
/// `out_dir` and returns the manifest.
pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let out = simulate(cfg)?;
    let name = cfg.scenario.name();
    let csv = out_dir.join(format!("{name}.csv"));
    let manifest_path = out_dir.join(format!("{name}.manifest.json"));
    out.table.write(&csv)?;
    let manifest = manifest_for(
        cfg,
        out,
        start.elapsed().as_secs_f64(),
        vec![csv, manifest_path.clone()],
    );
    manifest.write(&manifest_path)?;
    Ok(manifest)
}

pub(crate) fn manifest_for(
    cfg: &ScenarioConfig,
    out: RunOutput,
    wall: f64,
    paths: Vec<PathBuf>,
) -> RunManifest {
    let failed = out.checks.iter().filter(|c| !c.pass).count();
    RunManifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: wall,
        registered_checks: out.registered,
        passed: out.checks.len() - failed,
        failed,
        checks: out.checks,
        summary: out.summary,
        paths,
    }
}

fn two_level_bloch(psi: &CVector) -> Result<BlochVector> {
    if psi.dim() == 2 {
        bloch_of_state(psi)
    } else {
        Ok(BlochVector::nan())
    }
}

fn probs(psi: &CVector) -> Vec<f64> {
    psi.as_slice().iter().map(|z| z.norm_sqr()).collect()
}

/// Checks shared by every dilation run.
fn dilation_checks(run: &FullRun, records: &[TrajectoryRecord]) -> Vec<CheckResult> {
    let (worst_t, min_eig) = records
        .iter()
        .map(|r| (r.t, r.min_eig_n.map_or(r.min_eig_m, |n| n.min(r.min_eig_m))))
        .fold(
            (0.0, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    let (prob_t, prob_dev) = records
        .iter()
        .map(|r| (r.t, (r.probs.iter().sum::<f64>() - 1.0).abs()))
        .fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    vec![
        CheckResult::at_most(
            "hermiticity",
            run.max_hermiticity_defect,
            HERMITICITY_TOL,
            "max ‖H_sa − H_sa†‖ over all sampled times",
        ),
        CheckResult::at_most(
            "unitarity",
            run.max_norm_drift,
            NORM_DRIFT_TOL,
            "max |‖Ψ(t)‖ − ‖Ψ(0)‖|",
        ),
        CheckResult::at_least(
            "constraint",
            min_eig,
            CONSTRAINT_FLOOR,
            format!("lowest metric eigenvalue, at t = {worst_t}"),
        ),
        CheckResult::at_most(
            "probs_normalized",
            prob_dev,
            PROB_SUM_TOL,
            format!("max |Σp − 1|, at t = {prob_t}"),
        ),
    ]
}

fn registered(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn last(records: &[TrajectoryRecord]) -> Result<&TrajectoryRecord> {
    records
        .last()
        .ok_or_else(|| Error::InsufficientData("empty trajectory".into()))
}

/// Value of `column` at the recorded time closest to `t`.
fn at_time(
    records: &[TrajectoryRecord],
    t: f64,
    column: impl Fn(&TrajectoryRecord) -> f64,
) -> Option<f64> {
    records
        .iter()
        .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
        .filter(|r| (r.t - t).abs() <= 0.5 * t.max(1.0))
        .map(column)
}

fn run_switched_single(cfg: &ScenarioConfig, h: Arc<dyn Hamiltonian>) -> Result<RunOutput> {
    let ctrl = cfg.step_control()?;
    let dil = Dilation::four_dim(h, cfg.effective_m0())?;
    let run = dil.run(&[cfg.initial_vector()?], &ctrl)?;
    let mut records = Vec::with_capacity(run.samples.len());
    for s in &run.samples {
        let psi = project_postselect(&s.state, 0)?;
        records.push(TrajectoryRecord {
            t: s.t,
            bloch: vec![two_level_bloch(&psi)?],
            entropy: entropy(&s.state.reduced_system()?)?,
            probs: probs(&psi),
            norm: s.state.norm(),
            min_eig_m: s.min_eigs[0],
            min_eig_n: None,
        });
    }
    let checks = dilation_checks(&run, &records);
    let end = last(&records)?;
    let max_before = records
        .iter()
        .filter(|r| r.t < cfg.t_i)
        .map(|r| r.entropy)
        .fold(0.0, f64::max);
    let mut summary = Map::new();
    summary.insert("final_p0".into(), json!(end.probs[0]));
    summary.insert("final_entropy".into(), json!(end.entropy));
    summary.insert("max_entropy_before_t_i".into(), json!(max_before));
    summary.insert(
        "entropy_at_t_f".into(),
        json!(at_time(&records, cfg.t_f, |r| r.entropy)),
    );
    summary.insert(
        "entropy_at_1.5_t_f".into(),
        json!(at_time(&records, 1.5 * cfg.t_f, |r| r.entropy)),
    );
    summary.insert("magnus_substeps".into(), json!(run.substeps));
    Ok(RunOutput {
        table: Table::from_records(&records)?,
        records,
        registered: registered(&DILATION_CHECKS),
        checks,
        summary,
    })
}

fn pair_sources(cfg: &ScenarioConfig) -> Result<(Arc<dyn Hamiltonian>, Arc<dyn Hamiltonian>)> {
    Ok((
        Arc::new(build_switched_two_level(
            Sign::Minus,
            cfg.gamma,
            cfg.t_i,
            cfg.t_f,
        )?),
        Arc::new(build_switched_two_level(
            Sign::Plus,
            cfg.gamma,
            cfg.t_i,
            cfg.t_f,
        )?),
    ))
}

fn run_fig5(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let ctrl = cfg.step_control()?;
    let (minus, plus) = pair_sources(cfg)?;
    let dil = Dilation::eight_dim(minus, plus, cfg.effective_m0())?;
    let psi0 = cfg.initial_vector()?;
    let run = dil.run(&[psi0.clone(), psi0], &ctrl)?;
    let mut records = Vec::with_capacity(run.samples.len());
    let mut overlap = f64::NAN;
    for s in &run.samples {
        let psi = project_postselect(&s.state, dil.branch_index(0))?;
        let chi = project_postselect(&s.state, dil.branch_index(1))?;
        overlap = psi.inner(&chi).norm();
        records.push(TrajectoryRecord {
            t: s.t,
            bloch: vec![bloch_of_state(&psi)?, bloch_of_state(&chi)?],
            entropy: entropy(&s.state.reduced_system()?)?,
            probs: probs(&psi),
            norm: s.state.norm(),
            min_eig_m: s.min_eigs[0],
            min_eig_n: Some(s.min_eigs[1]),
        });
    }
    let checks = dilation_checks(&run, &records);
    let end = last(&records)?;
    let mut summary = Map::new();
    summary.insert("final_p0_psi".into(), json!(end.probs[0]));
    summary.insert("final_p1_chi".into(), json!((1.0 - end.bloch[1].z) / 2.0));
    summary.insert("final_overlap_psi_chi".into(), json!(overlap));
    summary.insert("final_entropy".into(), json!(end.entropy));
    summary.insert("magnus_substeps".into(), json!(run.substeps));
    Ok(RunOutput {
        table: Table::from_records(&records)?,
        records,
        registered: registered(&DILATION_CHECKS),
        checks,
        summary,
    })
}

/// Coefficients of `|0⟩|0⟩` and `|1⟩|2⟩` in an eight-dimensional full state.
pub fn measurement_coefficients(state: &crate::dilation::FullState) -> (C64, C64) {
    let v = state.vector();
    let n_anc = state.n_anc();
    (v[0], v[n_anc + 2])
}

fn run_fig6(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let ctrl = cfg.step_control()?;
    let (minus, plus) = pair_sources(cfg)?;
    let dil = Dilation::eight_dim(minus, plus, cfg.effective_m0())?;
    let psi0 = cfg.initial_vector()?;
    let run = dil.run(&[psi0.clone(), psi0.clone()], &ctrl)?;

    let spec = LindbladSpec::new(pauli::z(), vec![(pauli::z(), cfg.lindblad_gamma)])?;
    let lind = integrate_lindblad(&DensityMatrix::from_pure(&psi0)?, &spec, &ctrl)?;
    if lind.len() != run.samples.len() {
        return Err(Error::InternalConsistency(format!(
            "{} Lindblad samples vs {} dilation samples",
            lind.len(),
            run.samples.len()
        )));
    }

    let keep = [dil.branch_index(0), dil.branch_index(1)];
    let mut records = Vec::with_capacity(run.samples.len());
    let mut rho_end = CMatrix::zeros(2);
    for (s, l) in run.samples.iter().zip(&lind) {
        let rho = project_measurement(&s.state, &keep)?.reduced_system()?;
        records.push(TrajectoryRecord {
            t: s.t,
            bloch: vec![bloch(&rho)?, bloch(l.state.matrix())?],
            entropy: entropy(&rho)?,
            probs: (0..2).map(|k| rho[(k, k)].re).collect(),
            norm: s.state.norm(),
            min_eig_m: s.min_eigs[0],
            min_eig_n: Some(s.min_eigs[1]),
        });
        rho_end = rho;
    }
    let checks = dilation_checks(&run, &records);
    let end = last(&records)?;
    let last_sample = run.samples.last().expect("non-empty run");

    let (c1, c2) = (psi0[0], psi0[1]);
    let (p1, p2) = measurement_coefficients(&last_sample.state);
    // remove the σ_z dynamical phase e^{∓it} carried by |0⟩ and |1⟩
    let frame = C64::from_polar(1.0, 2.0 * last_sample.t);
    let ratio_err = ((p1 / p2) * frame - c1 / c2).norm() / (c1 / c2).norm();
    let target = CMatrix::from_real_diagonal(&[c1.norm_sqr(), c2.norm_sqr()]);

    let mut summary = Map::new();
    summary.insert("final_bloch_embedding".into(), json!(end.bloch[0]));
    summary.insert("final_bloch_lindblad".into(), json!(end.bloch[1]));
    summary.insert(
        "final_bloch_distance".into(),
        json!(end.bloch[0].distance(&end.bloch[1])),
    );
    summary.insert(
        "reduced_rho_deviation".into(),
        json!((&rho_end - &target).max_abs()),
    );
    summary.insert("coefficient_ratio_error".into(), json!(ratio_err));
    summary.insert("c1_prime_over_c1".into(), json!((p1 / c1).norm()));
    summary.insert("c2_prime_over_c2".into(), json!((p2 / c2).norm()));
    Ok(RunOutput {
        table: Table::from_records(&records)?,
        records,
        registered: registered(&DILATION_CHECKS),
        checks,
        summary,
    })
}

fn run_n_level(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let ctrl = cfg.step_control()?;
    let n = cfg.n_levels;
    let sources = (1..=n)
        .map(|i| {
            build_target_hamiltonian(n, i, cfg.gamma, cfg.t_i, cfg.t_f)
                .map(|h| Arc::new(h) as Arc<dyn Hamiltonian>)
        })
        .collect::<Result<Vec<_>>>()?;
    let dil = Dilation::general(sources, cfg.effective_m0())?;
    let psi0 = cfg.initial_vector()?;
    let run = dil.run(&vec![psi0; n], &ctrl)?;
    let mut records = Vec::with_capacity(run.samples.len());
    let mut overlaps = vec![f64::NAN; n];
    for s in &run.samples {
        let psi = project_postselect(&s.state, dil.branch_index(0))?;
        for (k, o) in overlaps.iter_mut().enumerate() {
            *o = project_postselect(&s.state, dil.branch_index(k))?[k].norm_sqr();
        }
        records.push(TrajectoryRecord {
            t: s.t,
            bloch: vec![two_level_bloch(&psi)?],
            entropy: entropy(&s.state.reduced_system()?)?,
            probs: probs(&psi),
            norm: s.state.norm(),
            min_eig_m: s.min_eigs.iter().cloned().fold(f64::INFINITY, f64::min),
            min_eig_n: None,
        });
    }
    let checks = dilation_checks(&run, &records);
    let mut summary = Map::new();
    summary.insert("final_target_overlaps".into(), json!(overlaps));
    summary.insert("full_dimension".into(), json!(2 * n * n));
    summary.insert("final_entropy".into(), json!(last(&records)?.entropy));
    summary.insert("magnus_substeps".into(), json!(run.substeps));
    Ok(RunOutput {
        table: Table::from_records(&records)?,
        records,
        registered: registered(&DILATION_CHECKS),
        checks,
        summary,
    })
}

/// Mean speeds of the approach to `|0⟩` under `diag(1, −1 − iγ)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ConvergenceSpeeds {
    /// Fubini-Study distance per unit time.
    pub fs: f64,
    /// Angle between consecutive Bloch vectors per unit time.
    pub bloch_angle: f64,
    /// Change of the Bloch polar angle per unit time, ignoring the precession.
    pub polar: f64,
}

/// Speeds from the polar angle in `cfg`, averaged over the steps that start
/// farther than `cfg.speed_cutoff` (Fubini-Study) from `|0⟩`.
pub fn convergence_speeds(cfg: &ScenarioConfig, gamma: f64) -> Result<ConvergenceSpeeds> {
    let h = build_case(Case::C, 1.0, -1.0, gamma);
    let theta = cfg.polar_angle;
    let psi0 = CVector::from_vec(vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::new((theta / 2.0).sin(), 0.0),
    ]);
    let ctrl = StepControl::new(cfg.dt, cfg.t_max, 1)?;
    let traj = evolve_normalized(&DensityMatrix::from_pure(&psi0)?, &h, &ctrl)?;
    let target = CMatrix::from_real_diagonal(&[1.0, 0.0]);
    let fs = mean_speed(&traj, Some(&target), cfg.speed_cutoff)?;

    let blochs = traj
        .iter()
        .map(|s| bloch(s.state.matrix()))
        .collect::<Result<Vec<_>>>()?;
    let polar = |b: &BlochVector| (b.z / b.length()).clamp(-1.0, 1.0).acos();
    let (mut angle_sum, mut polar_sum, mut count) = (0.0, 0.0, 0usize);
    for (k, w) in traj.windows(2).enumerate() {
        if fs_distance(w[0].state.matrix(), &target) > cfg.speed_cutoff {
            let (a, b) = (&blochs[k], &blochs[k + 1]);
            let dt = w[1].t - w[0].t;
            let cos = (a.x * b.x + a.y * b.y + a.z * b.z) / (a.length() * b.length());
            angle_sum += cos.clamp(-1.0, 1.0).acos() / dt;
            polar_sum += (polar(a) - polar(b)).abs() / dt;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InsufficientData(
            "no steps before the convergence cutoff".into(),
        ));
    }
    Ok(ConvergenceSpeeds {
        fs,
        bloch_angle: angle_sum / count as f64,
        polar: polar_sum / count as f64,
    })
}

/// Ordinary least-squares slope and intercept.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} x values, {} y values",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all x values coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

fn run_speed_sweep(cfg: &ScenarioConfig) -> Result<RunOutput> {
    use rayon::prelude::*;
    let speeds = cfg
        .gammas
        .par_iter()
        .map(|&g| convergence_speeds(cfg, g))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(
        ["gamma", "mean_speed", "bloch_angle_speed", "polar_speed"]
            .map(String::from)
            .to_vec(),
    );
    for (&g, s) in cfg.gammas.iter().zip(&speeds) {
        table.push(vec![g, s.fs, s.bloch_angle, s.polar])?;
    }
    let column = |f: fn(&ConvergenceSpeeds) -> f64| speeds.iter().map(f).collect::<Vec<f64>>();
    let (fs, ang, pol) = (
        column(|s| s.fs),
        column(|s| s.bloch_angle),
        column(|s| s.polar),
    );
    let mut summary = Map::new();
    for (name, ys) in [("", &fs), ("_bloch_angle", &ang), ("_polar", &pol)] {
        let (slope, intercept) = least_squares(&cfg.gammas, ys)?;
        summary.insert(format!("slope{name}"), json!(slope));
        summary.insert(format!("intercept{name}"), json!(intercept));
    }
    let finite = fs
        .iter()
        .chain(&ang)
        .chain(&pol)
        .all(|v| v.is_finite() && *v >= 0.0);
    let checks = vec![CheckResult::flag(
        "speeds_finite",
        finite,
        "every mean speed is finite and non-negative",
    )];
    Ok(RunOutput {
        table,
        records: Vec::new(),
        registered: registered(&["speeds_finite"]),
        checks,
        summary,
    })
}

fn run_impossibility(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let h: Arc<dyn Hamiltonian> = Arc::new(build_case(Case::C, 1.0, -1.0, cfg.gamma));
    let report = demonstrate_4dim_impossibility(
        h,
        &cfg.initial_vector()?,
        cfg.effective_m0(),
        &cfg.step_control()?,
    )?;
    let mut table = Table::new(["t", "overlap"].map(String::from).to_vec());
    for (&t, &o) in report.times.iter().zip(&report.overlaps) {
        table.push(vec![t, o])?;
    }
    let start = report.overlaps.first().copied().unwrap_or(f64::NAN);
    let checks = vec![CheckResult::at_most(
        "initially_orthogonal",
        start,
        1e-12,
        "|⟨ψ(0)|η(0)ψ(0)⟩|",
    )];
    let mut summary = Map::new();
    summary.insert("max_overlap".into(), json!(report.max_overlap));
    summary.insert("first_exceed_time".into(), json!(report.first_exceed_time));
    summary.insert(
        "persists_orthogonal".into(),
        json!(report.persists_orthogonal),
    );
    summary.insert(
        "max_metric_mismatch".into(),
        json!(report.max_metric_mismatch),
    );
    Ok(RunOutput {
        table,
        records: Vec::new(),
        registered: registered(&["initially_orthogonal"]),
        checks,
        summary,
    })
}
