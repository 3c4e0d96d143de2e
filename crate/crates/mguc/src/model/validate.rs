//! Hour-by-hour feasibility check of a schedule against every operating
//! constraint of the case. Violations are returned, not raised; an empty
//! list means the schedule is feasible within the given tolerance.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{total_emissions, EvalError, MicrogridCase, Schedule};
use crate::scalar::Scalar;

/// Which constraint family a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// Committed output outside `[power_min, power_max]`, or output while off.
    TgrOutputBounds,
    /// Output plus reserve exceeds committed capacity.
    TgrReserveHeadroom,
    /// Unit shut down before its minimum uptime elapsed.
    TgrMinUptime,
    /// Unit restarted before its minimum downtime elapsed.
    TgrMinDowntime,
    /// Storage injecting and withdrawing in the same hour.
    EsrExclusivity,
    /// Injection outside its status-gated bounds.
    EsrInjectBounds,
    /// Withdrawal outside its status-gated bounds.
    EsrWithdrawBounds,
    /// Stored energy does not follow the charge/discharge recursion.
    EsrEnergyRecursion,
    /// Stored energy outside `[energy_min, energy_max]`.
    EsrEnergyBounds,
    /// Renewable dispatch outside `[0, profile]`.
    VerOutputBounds,
    /// Hourly generation + storage + grid exchange does not meet load.
    PowerBalance,
    /// Committed reserve below the hourly requirement.
    ReserveRequirement,
    /// Study-period emissions above the cap.
    EmissionCap,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::TgrOutputBounds => "tgr-output-bounds",
            Self::TgrReserveHeadroom => "tgr-reserve-headroom",
            Self::TgrMinUptime => "tgr-min-uptime",
            Self::TgrMinDowntime => "tgr-min-downtime",
            Self::EsrExclusivity => "esr-exclusivity",
            Self::EsrInjectBounds => "esr-inject-bounds",
            Self::EsrWithdrawBounds => "esr-withdraw-bounds",
            Self::EsrEnergyRecursion => "esr-energy-recursion",
            Self::EsrEnergyBounds => "esr-energy-bounds",
            Self::VerOutputBounds => "ver-output-bounds",
            Self::PowerBalance => "power-balance",
            Self::ReserveRequirement => "reserve-requirement",
            Self::EmissionCap => "emission-cap",
        };
        f.write_str(name)
    }
}

/// One constraint violation: which constraint, where, and by how much
/// (kW, kWh, or kg depending on the constraint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation<T> {
    pub constraint: ConstraintKind,
    /// Hour 1..=H; `None` for study-period constraints.
    pub hour: Option<usize>,
    /// Resource id; `None` for system-wide constraints.
    pub resource: Option<String>,
    pub magnitude: T,
}

impl<T: fmt::Display> fmt::Display for Violation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constraint)?;
        if let Some(r) = &self.resource {
            write!(f, " [{r}]")?;
        }
        if let Some(h) = self.hour {
            write!(f, " hour {h}")?;
        }
        write!(f, ": exceeded by {}", self.magnitude)
    }
}

/// Check every operating constraint of `case` on `schedule`.
///
/// `tol` is the slack (kW / kWh / kg) allowed on each equality and
/// inequality; solver output is typically checked at the solver's own
/// feasibility tolerance. Returns an empty vector iff feasible within
/// `tol`. A schedule of the wrong shape is an error, not a violation.
pub fn validate_schedule<T: Scalar>(
    case: &MicrogridCase<T>,
    schedule: &Schedule<T>,
    tol: T,
) -> Result<Vec<Violation<T>>, EvalError> {
    if !schedule.matches_shape(case) {
        return Err(EvalError::ShapeMismatch);
    }
    let h_count = case.horizon.hours;
    let mut out: Vec<Violation<T>> = Vec::new();
    let mut push = |constraint, hour, resource: Option<&str>, magnitude: T| {
        if magnitude > tol {
            out.push(Violation {
                constraint,
                hour,
                resource: resource.map(str::to_owned),
                magnitude,
            });
        }
    };

    for (gen, sched) in case.tgrs.iter().zip(&schedule.tgrs) {
        let id = gen.id.as_str();
        for h in 1..=h_count {
            let i = h - 1;
            let on = sched.on[i];
            let p = sched.power_kw[i];
            let r = sched.reserve_kw[i];
            let cap = if on { gen.power_max_kw } else { T::zero() };
            let floor = if on { gen.power_min_kw } else { T::zero() };
            push(ConstraintKind::TgrOutputBounds, Some(h), Some(id), p - cap);
            push(ConstraintKind::TgrOutputBounds, Some(h), Some(id), floor - p);
            push(ConstraintKind::TgrReserveHeadroom, Some(h), Some(id), p + r - cap);
            push(ConstraintKind::TgrReserveHeadroom, Some(h), Some(id), -r);
        }
        // Transition windows: a start in hour h pins the unit on through
        // min(h-1+Tup, H); a stop pins it off through min(h-1+Tdown, H).
        let on_at = |h: usize| if h == 0 { gen.initially_on } else { sched.on[h - 1] };
        for h in 1..=h_count {
            if on_at(h) && !on_at(h - 1) {
                for nu in h..=(h - 1 + gen.min_up_hours).min(h_count) {
                    if !on_at(nu) {
                        push(ConstraintKind::TgrMinUptime, Some(nu), Some(id), T::one());
                    }
                }
            }
            if !on_at(h) && on_at(h - 1) {
                for nu in h..=(h - 1 + gen.min_down_hours).min(h_count) {
                    if on_at(nu) {
                        push(ConstraintKind::TgrMinDowntime, Some(nu), Some(id), T::one());
                    }
                }
            }
        }
    }

    for (esr, sched) in case.esrs.iter().zip(&schedule.esrs) {
        let id = esr.id.as_str();
        let (charge_gain, discharge_drain) = esr.soc_coefficients();
        for h in 1..=h_count {
            let i = h - 1;
            if sched.injecting[i] && sched.withdrawing[i] {
                push(ConstraintKind::EsrExclusivity, Some(h), Some(id), T::one());
            }
            let pi = sched.inject_kw[i];
            let pw = sched.withdraw_kw[i];
            let (pi_lo, pi_hi) = if sched.injecting[i] {
                (esr.inject_min_kw, esr.inject_max_kw)
            } else {
                (T::zero(), T::zero())
            };
            push(ConstraintKind::EsrInjectBounds, Some(h), Some(id), pi - pi_hi);
            push(ConstraintKind::EsrInjectBounds, Some(h), Some(id), pi_lo - pi);
            let (pw_lo, pw_hi) = if sched.withdrawing[i] {
                (esr.withdraw_min_kw, esr.withdraw_max_kw)
            } else {
                (T::zero(), T::zero())
            };
            push(ConstraintKind::EsrWithdrawBounds, Some(h), Some(id), pw - pw_hi);
            push(ConstraintKind::EsrWithdrawBounds, Some(h), Some(id), pw_lo - pw);

            let prev = if h == 1 {
                esr.initial_energy_kwh
            } else {
                sched.energy_kwh[i - 1]
            };
            let expected = prev + charge_gain * pw - discharge_drain * pi;
            push(
                ConstraintKind::EsrEnergyRecursion,
                Some(h),
                Some(id),
                (sched.energy_kwh[i] - expected).abs(),
            );
            push(
                ConstraintKind::EsrEnergyBounds,
                Some(h),
                Some(id),
                sched.energy_kwh[i] - esr.energy_max_kwh,
            );
            push(
                ConstraintKind::EsrEnergyBounds,
                Some(h),
                Some(id),
                esr.energy_min_kwh - sched.energy_kwh[i],
            );
        }
    }

    for (ver, dispatched) in case.vers.iter().zip(&schedule.ver_kw) {
        for h in 1..=h_count {
            let p = dispatched[h - 1];
            push(
                ConstraintKind::VerOutputBounds,
                Some(h),
                Some(&ver.id),
                p - ver.profile_kw[h - 1],
            );
            push(ConstraintKind::VerOutputBounds, Some(h), Some(&ver.id), -p);
        }
    }

    for h in 1..=h_count {
        let i = h - 1;
        let mut injected = schedule.net_import_kw[i];
        for t in &schedule.tgrs {
            injected += t.power_kw[i];
        }
        for v in &schedule.ver_kw {
            injected += v[i];
        }
        for s in &schedule.esrs {
            injected += s.inject_kw[i] - s.withdraw_kw[i];
        }
        push(
            ConstraintKind::PowerBalance,
            Some(h),
            None,
            (injected - case.load.demand_kw[i]).abs(),
        );

        let reserve: T = schedule.tgrs.iter().map(|t| t.reserve_kw[i]).sum();
        push(
            ConstraintKind::ReserveRequirement,
            Some(h),
            None,
            case.reserve.min_kw[i] - reserve,
        );
    }

    if let Some(cap) = case.emission.cap_kg {
        let total = total_emissions(case, schedule)?;
        push(ConstraintKind::EmissionCap, None, None, total - cap);
    }

    Ok(out)
}
