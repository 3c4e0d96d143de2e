//! Independent brute-force reference for small horizons: enumerate every
//! feasible on/off pattern, solve each continuous subproblem with the LP
//! engine, and keep the best. Certifies the branch-and-bound search (not
//! the LP itself, which has its own certificates).

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::formulation::{build_uc_mip, extract_schedule, BuildError, PwlConfig, UcMode};
use crate::model::{
    EmissionPolicy, GridInterface, Horizon, LoadProfile, MicrogridCase, QuadCurve, ReservePolicy,
    Schedule, SocConvention, StorageResource, ThermalGenerator, VariableResource,
};
use crate::scalar::Scalar;
use crate::simplex::{solve_lp, LpError, LpOptions, LpStatus};

/// Hard ceiling on the number of binary decisions the oracle enumerates.
pub const ORACLE_MAX_BINARIES: usize = 24;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{binaries} binary decisions exceed the enumeration guard of {ORACLE_MAX_BINARIES}")]
    GuardExceeded { binaries: usize },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("relaxation failed on pattern {pattern}: {source}")]
    Lp { pattern: usize, source: LpError },
}

/// Result of an exhaustive solve.
#[derive(Debug, Clone)]
pub struct OracleReport<T> {
    /// Best objective over all feasible patterns; `None` when infeasible.
    pub best_objective: Option<T>,
    pub best_schedule: Option<Schedule<T>>,
    pub patterns_enumerated: usize,
    pub patterns_feasible: usize,
}

/// One on/off assignment in instance binary-column order: thermal
/// commitments first, then storage inject statuses, then withdraw statuses,
/// each resource-major and hour-minor.
pub type CommitmentPattern = Vec<bool>;

fn binary_count<T: Scalar>(case: &MicrogridCase<T>) -> usize {
    case.horizon.hours * (case.tgrs.len() + 2 * case.esrs.len())
}

/// Does `on` respect the unit's minimum up/down windows given its hour-0
/// state?
fn up_down_feasible<T: Scalar>(gen: &ThermalGenerator<T>, on: &[bool]) -> bool {
    let h_count = on.len();
    let at = |h: usize| if h == 0 { gen.initially_on } else { on[h - 1] };
    for h in 1..=h_count {
        if at(h) && !at(h - 1) {
            for nu in h..=(h - 1 + gen.min_up_hours).min(h_count) {
                if !at(nu) {
                    return false;
                }
            }
        }
        if !at(h) && at(h - 1) {
            for nu in h..=(h - 1 + gen.min_down_hours).min(h_count) {
                if at(nu) {
                    return false;
                }
            }
        }
    }
    true
}

/// Enumerate every binary assignment that satisfies the transition windows
/// and the storage exclusivity constraint, in lexicographic order (`false`
/// before `true`, first column most significant).
pub fn enumerate_commitments<T: Scalar>(
    case: &MicrogridCase<T>,
) -> Result<Vec<CommitmentPattern>, OracleError> {
    let bits = binary_count(case);
    if bits > ORACLE_MAX_BINARIES {
        return Err(OracleError::GuardExceeded { binaries: bits });
    }
    let h_count = case.horizon.hours;
    let n_tgr = case.tgrs.len();
    let n_esr = case.esrs.len();
    let mut out = Vec::new();
    let mut scratch_on = vec![false; h_count];
    'mask: for mask in 0u64..(1u64 << bits) {
        let bit = |i: usize| (mask >> (bits - 1 - i)) & 1 == 1;
        for (g, gen) in case.tgrs.iter().enumerate() {
            for (h, slot) in scratch_on.iter_mut().enumerate() {
                *slot = bit(g * h_count + h);
            }
            if !up_down_feasible(gen, &scratch_on) {
                continue 'mask;
            }
        }
        let esr_base = n_tgr * h_count;
        for s in 0..n_esr {
            for h in 0..h_count {
                let inj = bit(esr_base + s * h_count + h);
                let wdr = bit(esr_base + (n_esr + s) * h_count + h);
                if inj && wdr {
                    continue 'mask;
                }
            }
        }
        out.push((0..bits).map(bit).collect());
    }
    Ok(out)
}

/// Exhaustively solve `case` by fixing each feasible pattern in the MILP
/// and running the LP on the rest. Uses the same formulation as the search
/// it certifies, at `fine_k` chords per curve.
pub fn oracle_solve<T: Scalar>(
    case: &MicrogridCase<T>,
    mode: UcMode,
    fine_k: usize,
) -> Result<OracleReport<T>, OracleError> {
    let patterns = enumerate_commitments(case)?;
    let mip = build_uc_mip(case, mode, PwlConfig { segments: fine_k })?;
    let binary_cols: Vec<usize> = mip.instance.binary_cols().collect();
    debug_assert_eq!(binary_cols.len(), patterns.first().map_or(0, Vec::len));
    let h_count = case.horizon.hours;
    let lp_opts = LpOptions::default();

    // A pattern that leaves an hour with positive reserve requirement and
    // no committed thermal unit can never be feasible; skip its LP.
    let n_tgr = case.tgrs.len();
    let hopeless = |pattern: &CommitmentPattern| {
        (0..h_count).any(|h| {
            case.reserve.min_kw[h] > T::zero()
                && (0..n_tgr).all(|g| !pattern[g * h_count + h])
        })
    };

    // Patterns are independent; the min-reduction keyed on (objective,
    // pattern index) makes the parallel merge order-independent.
    let solved: Result<Vec<Option<(T, usize, Vec<T>)>>, OracleError> = patterns
        .par_iter()
        .enumerate()
        .map(|(idx, pattern)| {
            if hopeless(pattern) {
                return Ok(None);
            }
            let overrides: Vec<(usize, T, T)> = binary_cols
                .iter()
                .zip(pattern)
                .map(|(&col, &on)| {
                    let v = if on { T::one() } else { T::zero() };
                    (col, v, v)
                })
                .collect();
            let res = solve_lp(&mip.instance, &overrides, &lp_opts)
                .map_err(|source| OracleError::Lp { pattern: idx, source })?;
            Ok(match res.status {
                LpStatus::Optimal => Some((res.objective, idx, res.x)),
                _ => None,
            })
        })
        .collect();

    let mut patterns_feasible = 0usize;
    let mut best: Option<(T, usize, Vec<T>)> = None;
    for entry in solved?.into_iter().flatten() {
        patterns_feasible += 1;
        best = match best {
            Some(cur) if (cur.0, cur.1) <= (entry.0, entry.1) => Some(cur),
            _ => Some(entry),
        };
    }

    let (best_objective, best_schedule) = match best {
        Some((obj, _, x)) => {
            let schedule = extract_schedule(case, &mip, &x, T::c(1e-6))
                .expect("oracle optimum must round-trip into a schedule");
            (Some(obj), Some(schedule))
        }
        None => (None, None),
    };
    Ok(OracleReport {
        best_objective,
        best_schedule,
        patterns_enumerated: patterns.len(),
        patterns_feasible,
    })
}

/// Draw a small randomized study case around the reference data set:
/// one thermal unit, one storage unit, three to six hours, and every
/// coefficient within ±50% of its base value. Cases are always feasible
/// (the grid tie is unbounded). Short horizons occasionally drop the
/// reserve requirement so richer commitment patterns get exercised.
pub fn random_small_case<R: Rng>(rng: &mut R) -> MicrogridCase<f64> {
    let hours = rng.gen_range(3..=6usize);
    let jitter = |rng: &mut R, base: f64| base * rng.gen_range(0.5..=1.5);
    let zero_reserve = hours <= 4 && rng.gen_bool(0.3);

    let p_min = jitter(rng, 5.0);
    let p_max = jitter(rng, 50.0);
    let tgr = ThermalGenerator {
        id: "g1".into(),
        power_min_kw: p_min,
        power_max_kw: p_max,
        min_up_hours: rng.gen_range(1..=2usize),
        min_down_hours: rng.gen_range(1..=2usize),
        startup_cost_usd: jitter(rng, 1.0),
        fuel_cost: QuadCurve::new(jitter(rng, 1.2e-3), jitter(rng, 0.208), jitter(rng, 3.2)),
        emission_rate: QuadCurve::new(
            jitter(rng, 3.03e-3),
            jitter(rng, 0.53),
            jitter(rng, 8.09),
        ),
        initially_on: rng.gen_bool(0.5),
        initial_state_hours: 0,
    };
    let energy_max = jitter(rng, 30.0);
    let esr = StorageResource {
        id: "b1".into(),
        inject_min_kw: 0.0,
        inject_max_kw: jitter(rng, 12.0),
        withdraw_min_kw: 0.0,
        withdraw_max_kw: jitter(rng, 12.0),
        energy_min_kwh: 0.0,
        energy_max_kwh: energy_max,
        eta_inject: rng.gen_range(0.85..=1.0),
        eta_withdraw: rng.gen_range(0.85..=1.0),
        initial_energy_kwh: rng.gen_range(0.0..=energy_max / 2.0),
        soc_convention: if rng.gen_bool(0.5) {
            SocConvention::Physical
        } else {
            SocConvention::Paper
        },
    };
    let tariff = (0..hours)
        .map(|_| {
            let base = if rng.gen_bool(0.5) { 0.0155 } else { 0.2197 };
            jitter(rng, base)
        })
        .collect();
    let reserve = (0..hours)
        .map(|_| if zero_reserve { 0.0 } else { jitter(rng, 5.55) })
        .collect();
    let pv = (0..hours).map(|_| jitter(rng, 6.0)).collect();
    let load = (0..hours).map(|_| jitter(rng, 18.0)).collect();

    MicrogridCase {
        horizon: Horizon::new(hours).unwrap(),
        tgrs: vec![tgr],
        vers: vec![VariableResource {
            id: "pv".into(),
            profile_kw: pv,
            curtailable: false,
        }],
        esrs: vec![esr],
        grid: GridInterface {
            tariff_usd_per_kwh: tariff,
            exchange_limit_kw: None,
        },
        reserve: ReservePolicy { min_kw: reserve },
        emission: EmissionPolicy {
            tax_usd_per_kg: jitter(rng, 0.07),
            cap_kg: None,
        },
        load: LoadProfile { demand_kw: load },
    }
    .validated()
    .expect("randomized case must satisfy the structural invariants")
}
