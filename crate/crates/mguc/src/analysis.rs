//! The study layer: solve one case under either commitment mode, account
//! for ex-post carbon-tax billing, and sweep the tax rate.
//!
//! Every reported cost comes from exact quadratic evaluation of the
//! extracted schedule; MILP objective values appear only as solver
//! statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::{solve_mip_with, BnbError, BnbOptions, MipStatus};
use crate::formulation::{build_uc_mip, extract_schedule, BuildError, ExtractError, PwlConfig, UcMode};
use crate::model::{
    evaluate_schedule, validate_schedule, CostBreakdown, EvalError, MicrogridCase, Schedule,
};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Search(#[from] BnbError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{mode} solve ended {status:?} without a usable schedule")]
    NoSolution { mode: UcMode, status: MipStatus },
    #[error("sweep aborted at tax rate {psi}: solve ended {status:?}")]
    SweepSolve { psi: f64, status: MipStatus },
    #[error("invalid tax-rate grid: {0}")]
    BadPsiValues(String),
}

/// Solver knobs for one study run.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions<T> {
    pub pwl: PwlConfig,
    pub bnb: BnbOptions<T>,
}

impl<T: Scalar> Default for RunOptions<T> {
    fn default() -> Self {
        Self {
            pwl: PwlConfig::default(),
            bnb: BnbOptions::default(),
        }
    }
}

/// Solver statistics carried alongside a run for observability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverStats<T> {
    pub status: MipStatus,
    pub milp_objective: T,
    pub best_bound: T,
    pub gap: T,
    pub nodes: usize,
    pub pwl_segments: usize,
}

/// Outcome of solving one case in one mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport<T> {
    pub mode: UcMode,
    /// Carbon-tax rate in force ($/kg). For the classical mode this is the
    /// rate used for ex-post billing.
    pub psi: T,
    pub schedule: Schedule<T>,
    /// Exact quadratic cost/emission accounting (never MILP values).
    pub breakdown: CostBreakdown<T>,
    /// Energy produced per thermal unit over the study period (kWh).
    pub tgr_energy_kwh: Vec<T>,
    pub emissions_kg: T,
    pub solver: SolverStats<T>,
}

impl<T: Scalar> RunReport<T> {
    /// Study-period total as billed: operating cost plus the carbon tax at
    /// the report's rate, whether the mode priced it ex-ante or not.
    pub fn total_with_tax_usd(&self) -> T {
        self.breakdown.objective_euc_usd
    }
}

/// Carbon-tax payment for a run re-billed at an arbitrary rate,
/// independent of the mode that produced the schedule.
pub fn expost_tax<T: Scalar>(report: &RunReport<T>, psi: T) -> T {
    psi * report.emissions_kg
}

/// Build, solve, extract, and exactly evaluate one case.
///
/// The incumbent filter hands every integral relaxation through schedule
/// extraction and full constraint validation before it may become the
/// incumbent. A solve that ends without a usable schedule is an error;
/// non-optimal-but-usable terminations surface in `solver.status`.
pub fn run_case<T: Scalar>(
    case: &MicrogridCase<T>,
    mode: UcMode,
    opts: &RunOptions<T>,
) -> Result<RunReport<T>, AnalysisError> {
    let mip = build_uc_mip(case, mode, opts.pwl)?;
    let tol = opts.bnb.integer_tol;
    let accept = |x: &[T]| -> bool {
        extract_schedule(case, &mip, x, tol)
            .ok()
            .and_then(|s| validate_schedule(case, &s, T::c(1e-6)).ok().map(|v| v.is_empty()))
            .unwrap_or(false)
    };
    let result = solve_mip_with(&mip.instance, &opts.bnb, Some(&accept), None)?;
    if result.x.is_empty() {
        return Err(AnalysisError::NoSolution {
            mode,
            status: result.status,
        });
    }
    let schedule = extract_schedule(case, &mip, &result.x, tol)?;
    let breakdown = evaluate_schedule(case, &schedule)?;
    Ok(RunReport {
        mode,
        psi: case.emission.tax_usd_per_kg,
        tgr_energy_kwh: schedule.tgr_energy_kwh(),
        emissions_kg: breakdown.emissions_total_kg,
        solver: SolverStats {
            status: result.status,
            milp_objective: result.objective,
            best_bound: result.best_bound,
            gap: result.objective - result.best_bound,
            nodes: result.nodes,
            pwl_segments: opts.pwl.segments,
        },
        schedule,
        breakdown,
    })
}

/// One row of the tax-rate sensitivity table. Field names match the CSV
/// header exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub psi: T,
    pub euc_total_usd: T,
    pub cuc_total_usd: T,
    pub differential_cents: T,
    pub euc_tgr_kwh: T,
    pub cuc_tgr_kwh: T,
    pub euc_emissions_kg: T,
    pub cuc_emissions_kg: T,
}

/// Full sweep outcome: plot-ready rows plus the underlying reports.
#[derive(Debug, Clone)]
pub struct Sweep<T> {
    pub rows: Vec<SweepRow<T>>,
    /// The single classical solve every row is re-billed from.
    pub cuc: RunReport<T>,
    /// One emissions-aware solve per tax rate, in rate order.
    pub euc: Vec<RunReport<T>>,
}

/// Sweep the carbon-tax rate: the classical problem is solved once (its
/// objective never sees the rate) and re-billed per rate; the
/// emissions-aware problem is solved per rate. Rates must be nonnegative
/// and strictly increasing. Solves run concurrently; rows come back in
/// rate order.
pub fn sweep_carbon_tax<T: Scalar>(
    case: &MicrogridCase<T>,
    psi_values: &[T],
    opts: &RunOptions<T>,
) -> Result<Sweep<T>, AnalysisError> {
    if psi_values.is_empty() {
        return Err(AnalysisError::BadPsiValues("no tax rates given".into()));
    }
    if psi_values.iter().any(|&p| p < T::zero()) {
        return Err(AnalysisError::BadPsiValues(
            "tax rates must be nonnegative".into(),
        ));
    }
    if psi_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::BadPsiValues(
            "tax rates must be strictly increasing".into(),
        ));
    }

    let cuc = run_case(case, UcMode::Cuc, opts).map_err(|e| sweep_error(e, psi_values[0]))?;
    require_optimal(&cuc, psi_values[0])?;

    let euc: Vec<RunReport<T>> = psi_values
        .par_iter()
        .map(|&psi| {
            let mut tuned = case.clone();
            tuned.emission.tax_usd_per_kg = psi;
            let report = run_case(&tuned, UcMode::Euc, opts)
                .map_err(|e| sweep_error(e, psi))?;
            require_optimal(&report, psi)?;
            Ok(report)
        })
        .collect::<Result<_, AnalysisError>>()?;

    let cuc_operating = cuc.breakdown.objective_cuc_usd;
    let cuc_kwh: T = cuc.tgr_energy_kwh.iter().copied().sum();
    let rows = psi_values
        .iter()
        .zip(&euc)
        .map(|(&psi, e)| {
            let cuc_total = cuc_operating + expost_tax(&cuc, psi);
            let euc_total = e.total_with_tax_usd();
            SweepRow {
                psi,
                euc_total_usd: euc_total,
                cuc_total_usd: cuc_total,
                differential_cents: (cuc_total - euc_total) * T::c(100.0),
                euc_tgr_kwh: e.tgr_energy_kwh.iter().copied().sum(),
                cuc_tgr_kwh: cuc_kwh,
                euc_emissions_kg: e.emissions_kg,
                cuc_emissions_kg: cuc.emissions_kg,
            }
        })
        .collect();
    Ok(Sweep { rows, cuc, euc })
}

fn require_optimal<T: Scalar>(report: &RunReport<T>, psi: T) -> Result<(), AnalysisError> {
    if report.solver.status != MipStatus::Optimal {
        return Err(AnalysisError::SweepSolve {
            psi: psi.to_f64_lossy(),
            status: report.solver.status,
        });
    }
    Ok(())
}

fn sweep_error<T: Scalar>(err: AnalysisError, psi: T) -> AnalysisError {
    match err {
        AnalysisError::NoSolution { status, .. } => AnalysisError::SweepSolve {
            psi: psi.to_f64_lossy(),
            status,
        },
        other => other,
    }
}
