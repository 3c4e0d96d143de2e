//! Domain types for a grid-connected microgrid and its hourly schedule.
//!
//! Everything here is plain data: immutable after construction, `Clone`,
//! serializable, and safe to share across threads. The exact (quadratic,
//! non-linearized) cost and emission arithmetic lives in [`eval`], the
//! constraint checker in [`validate`].

mod eval;
mod validate;

pub use eval::{
    carbon_tax_payment, evaluate_schedule, fuel_cost, grid_exchange_cost, net_storage_injection,
    startup_cost, tgr_emissions, total_emissions, CostBreakdown, EvalError,
};
pub use validate::{validate_schedule, ConstraintKind, Violation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

// serde's derive would demand `T: Default` for `#[serde(default)]` on
// `Option<T>` fields; an explicit constructor sidesteps that.
fn no_value<T>() -> Option<T> {
    None
}

/// Study period: `hours` consecutive one-hour steps, indexed 1..=hours.
/// Hour 1 is 00:00–01:00 of the study day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    pub hours: usize,
}

impl Horizon {
    pub fn new(hours: usize) -> Result<Self, CaseError> {
        if hours == 0 {
            return Err(CaseError::EmptyHorizon);
        }
        Ok(Self { hours })
    }

    /// Iterate hour indices 1..=H.
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        1..=self.hours
    }
}

/// Quadratic per-hour curve `quad·p² + lin·p + fixed`, used for both fuel
/// cost ($/h) and emission rate (kg/h) as a function of output p (kW).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadCurve<T> {
    pub quad: T,
    pub lin: T,
    pub fixed: T,
}

impl<T: Scalar> QuadCurve<T> {
    pub fn new(quad: T, lin: T, fixed: T) -> Self {
        Self { quad, lin, fixed }
    }

    /// Curve value at output `p`.
    pub fn at(&self, p: T) -> T {
        self.quad * p * p + self.lin * p + self.fixed
    }
}

/// Dispatchable fuel-burning unit (diesel genset, microturbine, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalGenerator<T> {
    pub id: String,
    /// Output bounds while committed (kW).
    pub power_min_kw: T,
    pub power_max_kw: T,
    /// Minimum number of consecutive committed hours once started.
    pub min_up_hours: usize,
    /// Minimum number of consecutive off hours once shut down.
    pub min_down_hours: usize,
    /// Cost of each off→on transition ($).
    pub startup_cost_usd: T,
    /// Fuel cost curve ($/h at output p kW).
    pub fuel_cost: QuadCurve<T>,
    /// Greenhouse-gas emission curve (kg CO2e/h at output p kW).
    pub emission_rate: QuadCurve<T>,
    /// Commitment status in hour 0 (just before the study period).
    pub initially_on: bool,
    /// Hours already spent in the `initially_on` state before hour 1.
    /// Carried for reporting; the hour-1 transition constraints use only
    /// the hour-0 status.
    #[serde(default)]
    pub initial_state_hours: usize,
}

/// Non-dispatchable renewable (PV, wind) with a fixed per-hour injection
/// profile. When `curtailable` is set the solver may dispatch anywhere in
/// `[0, profile]`; by default the injection is pinned to the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableResource<T> {
    pub id: String,
    pub profile_kw: Vec<T>,
    #[serde(default)]
    pub curtailable: bool,
}

/// Which sign convention the stored-energy recursion uses.
///
/// * `Paper`: E[h] = E[h-1] + (1/η_w)·withdraw − η_i·inject. Round-trip
///   *gains* energy for η < 1; kept for compatibility with data sets that
///   use it (it coincides with `Physical` at η = 1).
/// * `Physical`: E[h] = E[h-1] + η_w·withdraw − (1/η_i)·inject. Losses on
///   both legs; the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SocConvention {
    Paper,
    #[default]
    Physical,
}

/// Battery / storage unit. "Inject" is discharge into the microgrid,
/// "withdraw" is charging from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageResource<T> {
    pub id: String,
    pub inject_min_kw: T,
    pub inject_max_kw: T,
    pub withdraw_min_kw: T,
    pub withdraw_max_kw: T,
    pub energy_min_kwh: T,
    pub energy_max_kwh: T,
    /// Discharging efficiency η_i ∈ (0, 1].
    pub eta_inject: T,
    /// Charging efficiency η_w ∈ (0, 1].
    pub eta_withdraw: T,
    /// Stored energy at the start of hour 1 (kWh).
    pub initial_energy_kwh: T,
    #[serde(default)]
    pub soc_convention: SocConvention,
}

impl<T: Scalar> StorageResource<T> {
    /// Coefficients (a, b) of the recursion E[h] = E[h-1] + a·withdraw − b·inject.
    pub fn soc_coefficients(&self) -> (T, T) {
        match self.soc_convention {
            SocConvention::Paper => (T::one() / self.eta_withdraw, self.eta_inject),
            SocConvention::Physical => (self.eta_withdraw, T::one() / self.eta_inject),
        }
    }
}

/// Point of common coupling with the distribution company.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridInterface<T> {
    /// Time-of-use rate ($/kWh); both imports and exports settle at this
    /// rate (net metering), so exports earn negative cost.
    pub tariff_usd_per_kwh: Vec<T>,
    /// Optional bound on |net exchange| (kW). Absent means unbounded.
    #[serde(default = "no_value")]
    pub exchange_limit_kw: Option<T>,
}

/// Per-hour spinning-reserve floor (kW) that committed thermal units must
/// jointly cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservePolicy<T> {
    pub min_kw: Vec<T>,
}

/// Carbon-tax rate and optional hard cap on study-period emissions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionPolicy<T> {
    /// Tax rate ($/kg CO2e).
    pub tax_usd_per_kg: T,
    /// Upper limit on total study-period emissions (kg CO2e); absent = no cap.
    #[serde(default = "no_value")]
    pub cap_kg: Option<T>,
}

/// Total microgrid demand per hour (kW).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadProfile<T> {
    pub demand_kw: Vec<T>,
}

/// Immutable description of one unit-commitment study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicrogridCase<T> {
    pub horizon: Horizon,
    pub tgrs: Vec<ThermalGenerator<T>>,
    pub vers: Vec<VariableResource<T>>,
    pub esrs: Vec<StorageResource<T>>,
    pub grid: GridInterface<T>,
    pub reserve: ReservePolicy<T>,
    pub emission: EmissionPolicy<T>,
    pub load: LoadProfile<T>,
}

/// Construction-time validation failure for a [`MicrogridCase`].
#[derive(Debug, Error)]
pub enum CaseError {
    #[error("horizon must cover at least one hour")]
    EmptyHorizon,
    #[error("{kind} profile for `{id}` has {got} entries, expected horizon length {want}")]
    ProfileLength {
        kind: &'static str,
        id: String,
        got: usize,
        want: usize,
    },
    #[error("duplicate resource id `{0}`")]
    DuplicateId(String),
    #[error("resource `{id}`: {message}")]
    BadResource { id: String, message: String },
    #[error("{0}")]
    BadPolicy(String),
}

impl<T: Scalar> MicrogridCase<T> {
    /// Check every structural invariant; returns the case unchanged on
    /// success. Solvers and evaluators assume a validated case.
    pub fn validated(self) -> Result<Self, CaseError> {
        let h = self.horizon.hours;
        if h == 0 {
            return Err(CaseError::EmptyHorizon);
        }
        let mut ids: Vec<&str> = self
            .tgrs
            .iter()
            .map(|g| g.id.as_str())
            .chain(self.vers.iter().map(|v| v.id.as_str()))
            .chain(self.esrs.iter().map(|s| s.id.as_str()))
            .collect();
        ids.sort_unstable();
        if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(CaseError::DuplicateId(dup[0].to_string()));
        }

        for g in &self.tgrs {
            let bad = |m: &str| CaseError::BadResource {
                id: g.id.clone(),
                message: m.to_string(),
            };
            if !(T::zero() <= g.power_min_kw && g.power_min_kw <= g.power_max_kw) {
                return Err(bad("need 0 <= power_min_kw <= power_max_kw"));
            }
            if g.min_up_hours < 1 || g.min_down_hours < 1 {
                return Err(bad("min up/down times must be at least 1 hour"));
            }
            if g.startup_cost_usd < T::zero() {
                return Err(bad("startup cost must be nonnegative"));
            }
            if g.fuel_cost.quad < T::zero() || g.emission_rate.quad < T::zero() {
                return Err(bad("quadratic coefficients must be nonnegative (convexity)"));
            }
        }
        for v in &self.vers {
            if v.profile_kw.len() != h {
                return Err(CaseError::ProfileLength {
                    kind: "injection",
                    id: v.id.clone(),
                    got: v.profile_kw.len(),
                    want: h,
                });
            }
            if v.profile_kw.iter().any(|&p| p < T::zero()) {
                return Err(CaseError::BadResource {
                    id: v.id.clone(),
                    message: "injection profile must be nonnegative".into(),
                });
            }
        }
        for s in &self.esrs {
            let bad = |m: &str| CaseError::BadResource {
                id: s.id.clone(),
                message: m.to_string(),
            };
            if !(T::zero() <= s.inject_min_kw && s.inject_min_kw <= s.inject_max_kw) {
                return Err(bad("need 0 <= inject_min_kw <= inject_max_kw"));
            }
            if !(T::zero() <= s.withdraw_min_kw && s.withdraw_min_kw <= s.withdraw_max_kw) {
                return Err(bad("need 0 <= withdraw_min_kw <= withdraw_max_kw"));
            }
            if !(s.energy_min_kwh <= s.initial_energy_kwh
                && s.initial_energy_kwh <= s.energy_max_kwh)
            {
                return Err(bad("initial energy must lie within the energy bounds"));
            }
            let eta_ok = |e: T| e > T::zero() && e <= T::one();
            if !eta_ok(s.eta_inject) || !eta_ok(s.eta_withdraw) {
                return Err(bad("efficiencies must lie in (0, 1]"));
            }
        }
        let profile = |kind: &'static str, len: usize| -> Result<(), CaseError> {
            if len != h {
                return Err(CaseError::ProfileLength {
                    kind,
                    id: String::new(),
                    got: len,
                    want: h,
                });
            }
            Ok(())
        };
        profile("tariff", self.grid.tariff_usd_per_kwh.len())?;
        profile("reserve", self.reserve.min_kw.len())?;
        profile("load", self.load.demand_kw.len())?;
        if self.grid.tariff_usd_per_kwh.iter().any(|&t| t < T::zero()) {
            return Err(CaseError::BadPolicy("tariff must be nonnegative".into()));
        }
        if self.reserve.min_kw.iter().any(|&r| r < T::zero()) {
            return Err(CaseError::BadPolicy(
                "reserve requirement must be nonnegative".into(),
            ));
        }
        if self.load.demand_kw.iter().any(|&d| d < T::zero()) {
            return Err(CaseError::BadPolicy("load must be nonnegative".into()));
        }
        if self.emission.tax_usd_per_kg < T::zero() {
            return Err(CaseError::BadPolicy(
                "carbon tax rate must be nonnegative".into(),
            ));
        }
        if let Some(cap) = self.emission.cap_kg {
            if cap < T::zero() {
                return Err(CaseError::BadPolicy("emission cap must be nonnegative".into()));
            }
        }
        Ok(self)
    }
}

/// Hourly decisions for one thermal unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TgrSchedule<T> {
    pub on: Vec<bool>,
    pub power_kw: Vec<T>,
    pub reserve_kw: Vec<T>,
}

/// Hourly decisions for one storage unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EsrSchedule<T> {
    pub injecting: Vec<bool>,
    pub withdrawing: Vec<bool>,
    pub inject_kw: Vec<T>,
    pub withdraw_kw: Vec<T>,
    /// Stored energy at the end of each hour (kWh).
    pub energy_kwh: Vec<T>,
}

/// A full solution: commitment, dispatch, reserve, storage, and grid
/// exchange for every hour of the study period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule<T> {
    pub tgrs: Vec<TgrSchedule<T>>,
    pub esrs: Vec<EsrSchedule<T>>,
    /// Dispatched renewable injection per resource (kW). Equals the case
    /// profile unless the resource is curtailable.
    pub ver_kw: Vec<Vec<T>>,
    /// Signed net grid exchange (kW); positive imports into the microgrid.
    pub net_import_kw: Vec<T>,
}

impl<T: Scalar> Schedule<T> {
    /// All-off schedule shaped after `case`, with renewables at forecast
    /// and storage flat at its initial energy.
    pub fn all_off(case: &MicrogridCase<T>) -> Self {
        let h = case.horizon.hours;
        Self {
            tgrs: case
                .tgrs
                .iter()
                .map(|_| TgrSchedule {
                    on: vec![false; h],
                    power_kw: vec![T::zero(); h],
                    reserve_kw: vec![T::zero(); h],
                })
                .collect(),
            esrs: case
                .esrs
                .iter()
                .map(|s| EsrSchedule {
                    injecting: vec![false; h],
                    withdrawing: vec![false; h],
                    inject_kw: vec![T::zero(); h],
                    withdraw_kw: vec![T::zero(); h],
                    energy_kwh: vec![s.initial_energy_kwh; h],
                })
                .collect(),
            ver_kw: case.vers.iter().map(|v| v.profile_kw.clone()).collect(),
            net_import_kw: vec![T::zero(); h],
        }
    }

    /// Shape check against a case (lengths and resource counts).
    pub fn matches_shape(&self, case: &MicrogridCase<T>) -> bool {
        let h = case.horizon.hours;
        self.tgrs.len() == case.tgrs.len()
            && self.esrs.len() == case.esrs.len()
            && self.ver_kw.len() == case.vers.len()
            && self.net_import_kw.len() == h
            && self.tgrs.iter().all(|t| {
                t.on.len() == h && t.power_kw.len() == h && t.reserve_kw.len() == h
            })
            && self.esrs.iter().all(|s| {
                s.injecting.len() == h
                    && s.withdrawing.len() == h
                    && s.inject_kw.len() == h
                    && s.withdraw_kw.len() == h
                    && s.energy_kwh.len() == h
            })
            && self.ver_kw.iter().all(|v| v.len() == h)
    }

    /// Energy produced by each thermal unit over the study period (kWh).
    pub fn tgr_energy_kwh(&self) -> Vec<T> {
        self.tgrs
            .iter()
            .map(|t| t.power_kw.iter().copied().sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_case() -> MicrogridCase<f64> {
        MicrogridCase {
            horizon: Horizon::new(2).unwrap(),
            tgrs: vec![ThermalGenerator {
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
            }],
            vers: vec![VariableResource {
                id: "pv".into(),
                profile_kw: vec![0.5, 1.0],
                curtailable: false,
            }],
            esrs: vec![StorageResource {
                id: "b1".into(),
                inject_min_kw: 0.0,
                inject_max_kw: 12.0,
                withdraw_min_kw: 0.0,
                withdraw_max_kw: 12.0,
                energy_min_kwh: 0.0,
                energy_max_kwh: 30.0,
                eta_inject: 1.0,
                eta_withdraw: 1.0,
                initial_energy_kwh: 0.0,
                soc_convention: SocConvention::Physical,
            }],
            grid: GridInterface {
                tariff_usd_per_kwh: vec![0.0155, 0.2197],
                exchange_limit_kw: None,
            },
            reserve: ReservePolicy { min_kw: vec![0.0, 0.0] },
            emission: EmissionPolicy {
                tax_usd_per_kg: 0.07,
                cap_kg: None,
            },
            load: LoadProfile { demand_kw: vec![10.0, 12.0] },
        }
    }

    #[test]
    fn validated_accepts_consistent_case() {
        assert!(tiny_case().validated().is_ok());
    }

    #[test]
    fn validated_rejects_profile_length_mismatch() {
        let mut case = tiny_case();
        case.load.demand_kw.pop();
        assert!(matches!(
            case.validated(),
            Err(CaseError::ProfileLength { kind: "load", .. })
        ));
    }

    #[test]
    fn validated_rejects_duplicate_ids() {
        let mut case = tiny_case();
        case.vers[0].id = "g1".into();
        assert!(matches!(case.validated(), Err(CaseError::DuplicateId(_))));
    }

    #[test]
    fn validated_rejects_bad_efficiency() {
        let mut case = tiny_case();
        case.esrs[0].eta_inject = 0.0;
        assert!(case.validated().is_err());
    }

    #[test]
    fn soc_coefficients_follow_convention() {
        let mut s = tiny_case().esrs[0].clone();
        s.eta_inject = 0.9;
        s.eta_withdraw = 0.8;
        s.soc_convention = SocConvention::Paper;
        let (a, b) = s.soc_coefficients();
        assert!((a - 1.25).abs() < 1e-12 && (b - 0.9).abs() < 1e-12);
        s.soc_convention = SocConvention::Physical;
        let (a, b) = s.soc_coefficients();
        assert!((a - 0.8).abs() < 1e-12 && (b - 1.0 / 0.9).abs() < 1e-12);
    }

    #[test]
    fn all_off_schedule_matches_shape() {
        let case = tiny_case();
        let s = Schedule::all_off(&case);
        assert!(s.matches_shape(&case));
        assert_eq!(s.ver_kw[0], vec![0.5, 1.0]);
    }
}
