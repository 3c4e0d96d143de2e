//! Exact (quadratic, non-linearized) evaluation of every cost and emission
//! term on a given schedule. These are the reporting-grade numbers; the MILP
//! in `formulation` only ever sees chord approximations of them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EmissionPolicy, GridInterface, MicrogridCase, QuadCurve, Schedule, ThermalGenerator};
use crate::scalar::Scalar;

/// Evaluation failure: the inputs do not describe a meaningful schedule.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("sequence length mismatch: {context} has {got} entries, expected {want}")]
    LengthMismatch {
        context: &'static str,
        got: usize,
        want: usize,
    },
    #[error("unit `{id}` dispatched {power} kW in hour {hour} while off")]
    OutputWhileOff {
        id: String,
        hour: usize,
        power: f64,
    },
    #[error("schedule shape does not match the case")]
    ShapeMismatch,
}

fn check_len(context: &'static str, got: usize, want: usize) -> Result<(), EvalError> {
    if got != want {
        return Err(EvalError::LengthMismatch { context, got, want });
    }
    Ok(())
}

/// Sum of `curve(p[h]) · on[h] · (1 hr)` over the study period. Shared
/// kernel behind both the fuel-cost and the emission totals.
fn committed_curve_total<T: Scalar>(
    gen: &ThermalGenerator<T>,
    curve: &QuadCurve<T>,
    on: &[bool],
    power_kw: &[T],
) -> Result<T, EvalError> {
    check_len("commitment", on.len(), power_kw.len())?;
    let mut total = T::zero();
    for (hour, (&on_h, &p)) in on.iter().zip(power_kw).enumerate() {
        if on_h {
            total += curve.at(p);
        } else if p != T::zero() {
            return Err(EvalError::OutputWhileOff {
                id: gen.id.clone(),
                hour: hour + 1,
                power: p.to_f64_lossy(),
            });
        }
    }
    Ok(total)
}

/// Study-period greenhouse-gas emissions of one thermal unit (kg CO2e).
pub fn tgr_emissions<T: Scalar>(
    gen: &ThermalGenerator<T>,
    on: &[bool],
    power_kw: &[T],
) -> Result<T, EvalError> {
    committed_curve_total(gen, &gen.emission_rate, on, power_kw)
}

/// Study-period fuel cost of one thermal unit ($).
pub fn fuel_cost<T: Scalar>(
    gen: &ThermalGenerator<T>,
    on: &[bool],
    power_kw: &[T],
) -> Result<T, EvalError> {
    committed_curve_total(gen, &gen.fuel_cost, on, power_kw)
}

/// Total start-up cost over the study period: one `startup_cost_usd` charge
/// per off→on transition, with the hour-0 state taken from the generator.
pub fn startup_cost<T: Scalar>(gen: &ThermalGenerator<T>, on: &[bool]) -> T {
    let mut prev = gen.initially_on;
    let mut total = T::zero();
    for &on_h in on {
        if on_h && !prev {
            total += gen.startup_cost_usd;
        }
        prev = on_h;
    }
    total
}

/// Net cost of grid exchange under net metering ($): positive net imports
/// are billed and exports are credited at the same hourly rate.
pub fn grid_exchange_cost<T: Scalar>(
    grid: &GridInterface<T>,
    net_import_kw: &[T],
) -> Result<T, EvalError> {
    check_len(
        "net grid exchange",
        net_import_kw.len(),
        grid.tariff_usd_per_kwh.len(),
    )?;
    Ok(grid
        .tariff_usd_per_kwh
        .iter()
        .zip(net_import_kw)
        .map(|(&rate, &p)| rate * p)
        .sum())
}

/// Carbon-tax payment ($) for `emissions_kg` of CO2e.
pub fn carbon_tax_payment<T: Scalar>(policy: &EmissionPolicy<T>, emissions_kg: T) -> T {
    policy.tax_usd_per_kg * emissions_kg
}

/// Emissions summed over every thermal unit in the case (kg CO2e).
pub fn total_emissions<T: Scalar>(
    case: &MicrogridCase<T>,
    schedule: &Schedule<T>,
) -> Result<T, EvalError> {
    if !schedule.matches_shape(case) {
        return Err(EvalError::ShapeMismatch);
    }
    let mut total = T::zero();
    for (gen, sched) in case.tgrs.iter().zip(&schedule.tgrs) {
        total += tgr_emissions(gen, &sched.on, &sched.power_kw)?;
    }
    Ok(total)
}

/// Net storage injection per hour: discharge minus charge (kW).
pub fn net_storage_injection<T: Scalar>(
    inject_kw: &[T],
    withdraw_kw: &[T],
) -> Result<Vec<T>, EvalError> {
    check_len("storage withdrawal", withdraw_kw.len(), inject_kw.len())?;
    Ok(inject_kw
        .iter()
        .zip(withdraw_kw)
        .map(|(&i, &w)| i - w)
        .collect())
}

/// Exact cost and emission accounting for one schedule. All money in $,
/// emissions in kg CO2e; per-unit vectors align with `case.tgrs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown<T> {
    pub fuel_usd: Vec<T>,
    pub startup_usd: Vec<T>,
    pub grid_net_usd: T,
    pub carbon_tax_usd: T,
    pub emissions_kg: Vec<T>,
    pub emissions_total_kg: T,
    /// Total including the carbon tax (the emissions-aware objective).
    pub objective_euc_usd: T,
    /// Total excluding the carbon tax (the classical objective).
    pub objective_cuc_usd: T,
}

/// Assemble the full exact breakdown for a schedule. Deterministic; both
/// objective variants are always populated.
pub fn evaluate_schedule<T: Scalar>(
    case: &MicrogridCase<T>,
    schedule: &Schedule<T>,
) -> Result<CostBreakdown<T>, EvalError> {
    if !schedule.matches_shape(case) {
        return Err(EvalError::ShapeMismatch);
    }
    let mut fuel_usd = Vec::with_capacity(case.tgrs.len());
    let mut startup_usd = Vec::with_capacity(case.tgrs.len());
    let mut emissions_kg = Vec::with_capacity(case.tgrs.len());
    for (gen, sched) in case.tgrs.iter().zip(&schedule.tgrs) {
        fuel_usd.push(fuel_cost(gen, &sched.on, &sched.power_kw)?);
        startup_usd.push(startup_cost(gen, &sched.on));
        emissions_kg.push(tgr_emissions(gen, &sched.on, &sched.power_kw)?);
    }
    let grid_net_usd = grid_exchange_cost(&case.grid, &schedule.net_import_kw)?;
    let emissions_total_kg = emissions_kg.iter().copied().sum();
    let carbon_tax_usd = carbon_tax_payment(&case.emission, emissions_total_kg);
    let operating: T = fuel_usd.iter().copied().sum::<T>()
        + startup_usd.iter().copied().sum::<T>()
        + grid_net_usd;
    Ok(CostBreakdown {
        fuel_usd,
        startup_usd,
        grid_net_usd,
        carbon_tax_usd,
        emissions_kg,
        emissions_total_kg,
        objective_euc_usd: operating + carbon_tax_usd,
        objective_cuc_usd: operating,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Horizon, LoadProfile, ReservePolicy, Schedule};
    use approx::assert_relative_eq;

    fn gamma1() -> ThermalGenerator<f64> {
        ThermalGenerator {
            id: "g1".into(),
            power_min_kw: 5.0,
            power_max_kw: 50.0,
            min_up_hours: 2,
            min_down_hours: 2,
            startup_cost_usd: 1.0,
            fuel_cost: QuadCurve::new(1.2e-3, 0.208, 3.2),
            emission_rate: QuadCurve::new(3.03e-3, 0.53, 8.09),
            initially_on: false,
            initial_state_hours: 0,
        }
    }

    #[test]
    fn emissions_zero_when_never_committed() {
        let g = gamma1();
        let total = tgr_emissions(&g, &[false; 6], &[0.0; 6]).unwrap();
        assert_eq!(total, 0.0);
    }

    #[test]
    fn emissions_single_hour_at_minimum_output() {
        let g = gamma1();
        // 3.03e-3 * 25 + 0.53 * 5 + 8.09
        let total = tgr_emissions(&g, &[true], &[5.0]).unwrap();
        assert_relative_eq!(total, 10.81575, max_relative = 1e-12);
    }

    #[test]
    fn emissions_two_equal_hours_double_the_single_hour() {
        let g = gamma1();
        let total = tgr_emissions(&g, &[true, true], &[5.0, 5.0]).unwrap();
        assert_relative_eq!(total, 21.6315, max_relative = 1e-12);
    }

    #[test]
    fn emissions_reject_output_while_off() {
        let g = gamma1();
        let err = tgr_emissions(&g, &[false, true], &[5.0, 5.0]).unwrap_err();
        assert!(matches!(err, EvalError::OutputWhileOff { hour: 1, .. }));
    }

    #[test]
    fn emissions_reject_length_mismatch() {
        let g = gamma1();
        assert!(tgr_emissions(&g, &[true, true], &[5.0]).is_err());
    }

    #[test]
    fn fuel_cost_examples() {
        let g = gamma1();
        assert_eq!(fuel_cost(&g, &[false; 4], &[0.0; 4]).unwrap(), 0.0);
        assert_relative_eq!(
            fuel_cost(&g, &[true], &[5.0]).unwrap(),
            4.27,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            fuel_cost(&g, &[true], &[50.0]).unwrap(),
            16.60,
            max_relative = 1e-12
        );
    }

    #[test]
    fn startup_cost_counts_off_to_on_transitions() {
        let g = gamma1(); // initially off, mu = $1
        assert_eq!(startup_cost(&g, &[true, true, true, true]), 1.0);
        assert_eq!(startup_cost(&g, &[true, true, false, true]), 2.0);
        let mut warm = gamma1();
        warm.initially_on = true;
        assert_eq!(startup_cost(&warm, &[true, true]), 0.0);
    }

    #[test]
    fn grid_cost_bills_imports_and_credits_exports() {
        let grid = GridInterface {
            tariff_usd_per_kwh: vec![0.0155],
            exchange_limit_kw: None,
        };
        assert_eq!(grid_exchange_cost(&grid, &[0.0]).unwrap(), 0.0);
        assert_relative_eq!(
            grid_exchange_cost(&grid, &[10.765]).unwrap(),
            0.1668575,
            max_relative = 1e-12
        );
        let peak = GridInterface {
            tariff_usd_per_kwh: vec![0.2197],
            exchange_limit_kw: None,
        };
        assert_relative_eq!(
            grid_exchange_cost(&peak, &[-10.0]).unwrap(),
            -2.197,
            max_relative = 1e-12
        );
    }

    #[test]
    fn carbon_tax_is_rate_times_mass() {
        let p = |psi: f64| EmissionPolicy {
            tax_usd_per_kg: psi,
            cap_kg: None,
        };
        assert_eq!(carbon_tax_payment(&p(0.0), 100.0), 0.0);
        assert_relative_eq!(carbon_tax_payment(&p(0.07), 100.0), 7.0, max_relative = 1e-12);
        assert_relative_eq!(carbon_tax_payment(&p(0.139), 200.0), 27.8, max_relative = 1e-12);
    }

    #[test]
    fn net_storage_injection_examples() {
        assert_eq!(net_storage_injection(&[0.0], &[0.0]).unwrap(), vec![0.0]);
        assert_eq!(net_storage_injection(&[3.0], &[0.0]).unwrap(), vec![3.0]);
        assert_eq!(
            net_storage_injection(&[0.0], &[4.265]).unwrap(),
            vec![-4.265]
        );
        assert!(net_storage_injection(&[0.0, 1.0], &[0.0]).is_err());
    }

    fn single_hour_case() -> MicrogridCase<f64> {
        MicrogridCase {
            horizon: Horizon::new(1).unwrap(),
            tgrs: vec![gamma1()],
            vers: vec![],
            esrs: vec![],
            grid: GridInterface {
                tariff_usd_per_kwh: vec![0.0155],
                exchange_limit_kw: None,
            },
            reserve: ReservePolicy { min_kw: vec![0.0] },
            emission: EmissionPolicy {
                tax_usd_per_kg: 0.07,
                cap_kg: None,
            },
            load: LoadProfile {
                demand_kw: vec![15.765],
            },
        }
    }

    #[test]
    fn evaluate_zero_case_is_all_zero() {
        let mut case = single_hour_case();
        case.load.demand_kw = vec![0.0];
        let schedule = Schedule::all_off(&case);
        let b = evaluate_schedule(&case, &schedule).unwrap();
        assert_eq!(b.objective_euc_usd, 0.0);
        assert_eq!(b.objective_cuc_usd, 0.0);
        assert_eq!(b.emissions_total_kg, 0.0);
        assert_eq!(b.grid_net_usd, 0.0);
    }

    #[test]
    fn evaluate_single_hour_composition() {
        let case = single_hour_case();
        let mut schedule = Schedule::all_off(&case);
        schedule.tgrs[0].on = vec![true];
        schedule.tgrs[0].power_kw = vec![5.0];
        schedule.net_import_kw = vec![10.765];
        let b = evaluate_schedule(&case, &schedule).unwrap();
        assert_relative_eq!(b.fuel_usd[0], 4.27, max_relative = 1e-12);
        assert_eq!(b.startup_usd[0], 1.0);
        assert_relative_eq!(b.emissions_total_kg, 10.81575, max_relative = 1e-12);
        // objective identity and the tax gap
        assert_relative_eq!(
            b.objective_euc_usd - b.objective_cuc_usd,
            0.07 * 10.81575,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            b.objective_euc_usd,
            b.fuel_usd[0] + b.startup_usd[0] + b.grid_net_usd + b.carbon_tax_usd,
            epsilon = 1e-12
        );
    }

    #[test]
    fn tax_scales_linearly_and_leaves_operating_costs_alone() {
        let case = single_hour_case();
        let mut schedule = Schedule::all_off(&case);
        schedule.tgrs[0].on = vec![true];
        schedule.tgrs[0].power_kw = vec![7.5];
        schedule.net_import_kw = vec![8.265];
        let base = evaluate_schedule(&case, &schedule).unwrap();
        let mut scaled_case = case.clone();
        scaled_case.emission.tax_usd_per_kg *= 3.0;
        let scaled = evaluate_schedule(&scaled_case, &schedule).unwrap();
        assert_relative_eq!(scaled.carbon_tax_usd, 3.0 * base.carbon_tax_usd, epsilon = 1e-12);
        assert_eq!(scaled.fuel_usd, base.fuel_usd);
        assert_eq!(scaled.startup_usd, base.startup_usd);
        assert_eq!(scaled.grid_net_usd, base.grid_net_usd);
        assert_eq!(scaled.objective_cuc_usd, base.objective_cuc_usd);
    }

    #[test]
    fn committed_costs_monotone_in_output() {
        let g = gamma1();
        let mut prev_fuel = f64::NEG_INFINITY;
        let mut prev_em = f64::NEG_INFINITY;
        for step in 0..=20 {
            let p = 5.0 + 45.0 * (step as f64) / 20.0;
            let f = fuel_cost(&g, &[true], &[p]).unwrap();
            let e = tgr_emissions(&g, &[true], &[p]).unwrap();
            assert!(f >= prev_fuel && e >= prev_em);
            prev_fuel = f;
            prev_em = e;
        }
    }
}
