//! Deterministic assembly of the unit-commitment MILP from a case, and the
//! mapping of solver points back to schedules.
//!
//! The quadratic fuel and emission curves enter through per-hour epigraph
//! variables bounded below by chord cuts, so the linearized objective and
//! any emission cap over-approximate the exact quadratics. Start-up costs
//! use a continuous indicator `s ≥ u[h] − u[h−1]`, valid because start-up
//! costs are nonnegative and the objective is minimized.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mip::{MipInstance, Row, Sense, VarFamily, VarKey, VariableMap};
use crate::model::{MicrogridCase, Schedule, EsrSchedule, TgrSchedule};
use crate::pwl::{chord_cuts, Chord, PwlError};
pub use crate::pwl::PwlConfig;
use crate::scalar::Scalar;

/// Which objective the instance encodes.
///
/// `Euc` prices emissions ex-ante (carbon tax in the objective, emission cap
/// enforced when configured); `Cuc` is the classical commitment that ignores
/// both at decision time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UcMode {
    Euc,
    Cuc,
}

impl UcMode {
    pub fn as_str(self) -> &'static str {
        match self {
            UcMode::Euc => "euc",
            UcMode::Cuc => "cuc",
        }
    }
}

impl std::fmt::Display for UcMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UcMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euc" => Ok(UcMode::Euc),
            "cuc" => Ok(UcMode::Cuc),
            other => Err(format!("unknown mode `{other}` (expected euc or cuc)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("piecewise linearization failed for `{id}`: {source}")]
    Pwl { id: String, source: PwlError },
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("solution has {got} values, instance has {want} columns")]
    LengthMismatch { got: usize, want: usize },
    #[error("column {name} = {value} is fractional beyond the integer tolerance")]
    FractionalBinary { name: String, value: f64 },
    #[error("column {name} = {value} violates its bounds [{lo}, {hi}] beyond tolerance")]
    BoundViolation {
        name: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

/// The assembled program: instance, symbol map, and any structural warnings
/// raised during the build (e.g. a reserve requirement with no thermal
/// units to supply it).
#[derive(Debug, Clone)]
pub struct UcMip<T> {
    pub instance: MipInstance<T>,
    pub vars: VariableMap,
    pub warnings: Vec<String>,
}

struct RowBuilder<T> {
    name: String,
    terms: Vec<(usize, T)>,
    sense: Sense,
    rhs: T,
}

impl<T: Scalar> RowBuilder<T> {
    fn new(name: String, sense: Sense, rhs: T) -> Self {
        Self {
            name,
            terms: Vec::new(),
            sense,
            rhs,
        }
    }

    /// Accumulate `coef` onto column `col` (columns may repeat).
    fn add(mut self, col: usize, coef: T) -> Self {
        self.terms.push((col, coef));
        self
    }

    fn finish(mut self) -> Row<T> {
        self.terms.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(self.terms.len());
        for (c, v) in self.terms {
            match merged.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|&(_, v)| v != T::zero());
        Row {
            name: self.name,
            terms: merged,
            sense: self.sense,
            rhs: self.rhs,
        }
    }
}

/// Epigraph bounds and cuts for one committed-hour quadratic curve.
struct Epigraph<T> {
    cuts: Vec<Chord<T>>,
    fixed: T,
    lo: T,
    hi: T,
}

fn epigraph<T: Scalar>(
    id: &str,
    quad: T,
    lin: T,
    fixed: T,
    p_lo: T,
    p_hi: T,
    segments: usize,
) -> Result<Epigraph<T>, BuildError> {
    let cuts = chord_cuts(quad, lin, p_lo, p_hi, segments).map_err(|source| BuildError::Pwl {
        id: id.to_string(),
        source,
    })?;
    let phi = |p: T| quad * p * p + lin * p;
    // The curve minimum over [p_lo, p_hi] (interior vertex or endpoint)
    // lower-bounds every cut value the solver can settle on; committed
    // values never exceed the larger endpoint.
    let vertex = if quad > T::zero() {
        (-(lin) / (T::c(2.0) * quad)).max(p_lo).min(p_hi)
    } else {
        p_lo
    };
    let lo = (phi(vertex) + fixed).min(T::zero());
    let hi = (phi(p_lo).max(phi(p_hi)) + fixed).max(T::zero());
    Ok(Epigraph {
        cuts,
        fixed,
        lo,
        hi,
    })
}

/// Build the commitment MILP for `case` in the given mode.
///
/// Deterministic: identical inputs produce byte-identical instances
/// (see [`MipInstance::dump`]). Renewable columns are pinned to the
/// forecast profile by bounds unless the resource is curtailable.
pub fn build_uc_mip<T: Scalar>(
    case: &MicrogridCase<T>,
    mode: UcMode,
    pwl: PwlConfig,
) -> Result<UcMip<T>, BuildError> {
    let h_count = case.horizon.hours;
    let psi = case.emission.tax_usd_per_kg;
    let mut warnings = Vec::new();

    if case.tgrs.is_empty()
        && case.reserve.min_kw.iter().any(|&r| r > T::zero())
    {
        warnings.push(
            "reserve requirement is positive but the case has no thermal units; \
             the instance is structurally infeasible"
                .to_string(),
        );
    }

    // Finite stand-in for an unbounded grid tie: no feasible exchange can
    // exceed peak load plus every nameplate rating.
    let mut big = T::one();
    for &d in &case.load.demand_kw {
        big = big.max(d);
    }
    for g in &case.tgrs {
        big = big + g.power_max_kw;
    }
    for v in &case.vers {
        let peak = v.profile_kw.iter().copied().fold(T::zero(), T::max);
        big = big + peak;
    }
    for s in &case.esrs {
        big = big + s.inject_max_kw.max(s.withdraw_max_kw);
    }

    let fuel_epi: Vec<Epigraph<T>> = case
        .tgrs
        .iter()
        .map(|g| {
            epigraph(
                &g.id,
                g.fuel_cost.quad,
                g.fuel_cost.lin,
                g.fuel_cost.fixed,
                g.power_min_kw,
                g.power_max_kw,
                pwl.segments,
            )
        })
        .collect::<Result<_, _>>()?;
    let emis_epi: Vec<Epigraph<T>> = case
        .tgrs
        .iter()
        .map(|g| {
            epigraph(
                &g.id,
                g.emission_rate.quad,
                g.emission_rate.lin,
                g.emission_rate.fixed,
                g.power_min_kw,
                g.power_max_kw,
                pwl.segments,
            )
        })
        .collect::<Result<_, _>>()?;

    // Columns: family -> resource -> hour.
    let mut vars = VariableMap::new();
    let mut objective = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut binary = Vec::new();
    let mut branch_priority = Vec::new();
    let mut col_names = Vec::new();
    let mut add_col = |vars: &mut VariableMap,
                       key: VarKey,
                       lo: T,
                       hi: T,
                       bin: bool,
                       obj: T| {
        vars.push(key);
        objective.push(obj);
        lower.push(lo);
        upper.push(hi);
        binary.push(bin);
        // Thermal commitments drive the relaxation bound (window rows
        // cascade, off-fixings hit the reserve); storage statuses are
        // cost-free and branch last.
        branch_priority.push(if key.family == VarFamily::TgrOn { 1 } else { 0 });
        col_names.push(key.name());
    };

    for family in VarFamily::ALL {
        match family {
            VarFamily::TgrOn => {
                for (g, _) in case.tgrs.iter().enumerate() {
                    for h in 1..=h_count {
                        add_col(
                            &mut vars,
                            VarKey::new(family, g, h),
                            T::zero(),
                            T::one(),
                            true,
                            T::zero(),
                        );
                    }
                }
            }
            VarFamily::EsrInjectOn | VarFamily::EsrWithdrawOn => {
                for (s, _) in case.esrs.iter().enumerate() {
                    for h in 1..=h_count {
                        add_col(
                            &mut vars,
                            VarKey::new(family, s, h),
                            T::zero(),
                            T::one(),
                            true,
                            T::zero(),
                        );
                    }
                }
            }
            VarFamily::TgrPower => {
                for (g, gen) in case.tgrs.iter().enumerate() {
                    for h in 1..=h_count {
                        add_col(
                            &mut vars,
                            VarKey::new(family, g, h),
                            T::zero(),
                            gen.power_max_kw,
                            false,
                            T::zero(),
                        );
                    }
                }
            }
            VarFamily::TgrReserve => {
                for (g, gen) in case.tgrs.iter().enumerate() {
                    let hi = (gen.power_max_kw - gen.power_min_kw).max(T::zero());
                    for h in 1..=h_count {
                        add_col(
                            &mut vars,
                            VarKey::new(family, g, h),
                            T::zero(),
                            hi,
                            false,
                            T::zero(),
                        );
                    }
                }
            }
            VarFamily::TgrStartup => {
                for (g, gen) in case.tgrs.iter().enumerate() {
                    for h in 1..=h_count {
                        add_col(
                            &mut vars,
                            VarKey::new(family, g, h),
                            T::zero(),
                            T::one(),
                            false,
                            gen.startup_cost_usd,
                        );
                    }
                }
            }
            VarFamily::TgrFuelCost => {
                for (g, _) in case.tgrs.iter().enumerate() {
                    let epi = &fuel_epi[g];
                    for h in 1..=h_count {
                        add_col(
                            &mut vars,
                            VarKey::new(family, g, h),
                            epi.lo,
                            epi.hi,
                            false,
                            T::one(),
                        );
                    }
                }
            }
            VarFamily::TgrEmission => {
                let price = match mode {
                    UcMode::Euc => psi,
                    UcMode::Cuc => T::zero(),
                };
                for (g, _) in case.tgrs.iter().enumerate() {
                    let epi = &emis_epi[g];
                    for h in 1..=h_count {
                        add_col(
                            &mut vars,
                            VarKey::new(family, g, h),
                            epi.lo,
                            epi.hi,
                            false,
                            price,
                        );
                    }
                }
            }
            VarFamily::EsrInject => {
                for (s, esr) in case.esrs.iter().enumerate() {
                    for h in 1..=h_count {
                        add_col(
                            &mut vars,
                            VarKey::new(family, s, h),
                            T::zero(),
                            esr.inject_max_kw,
                            false,
                            T::zero(),
                        );
                    }
                }
            }
            VarFamily::EsrWithdraw => {
                for (s, esr) in case.esrs.iter().enumerate() {
                    for h in 1..=h_count {
                        add_col(
                            &mut vars,
                            VarKey::new(family, s, h),
                            T::zero(),
                            esr.withdraw_max_kw,
                            false,
                            T::zero(),
                        );
                    }
                }
            }
            VarFamily::EsrEnergy => {
                for (s, esr) in case.esrs.iter().enumerate() {
                    for h in 1..=h_count {
                        add_col(
                            &mut vars,
                            VarKey::new(family, s, h),
                            esr.energy_min_kwh,
                            esr.energy_max_kwh,
                            false,
                            T::zero(),
                        );
                    }
                }
            }
            VarFamily::VerPower => {
                for (v, ver) in case.vers.iter().enumerate() {
                    for h in 1..=h_count {
                        let forecast = ver.profile_kw[h - 1];
                        let lo = if ver.curtailable { T::zero() } else { forecast };
                        add_col(
                            &mut vars,
                            VarKey::new(family, v, h),
                            lo,
                            forecast,
                            false,
                            T::zero(),
                        );
                    }
                }
            }
            VarFamily::GridExchange => {
                let limit = case.grid.exchange_limit_kw.unwrap_or(big);
                for h in 1..=h_count {
                    add_col(
                        &mut vars,
                        VarKey::new(family, 0, h),
                        -limit,
                        limit,
                        false,
                        case.grid.tariff_usd_per_kwh[h - 1],
                    );
                }
            }
        }
    }

    // Rows: constraint family -> resource -> hour (-> window/cut index).
    let mut rows: Vec<Row<T>> = Vec::new();
    let col = |f: VarFamily, r: usize, h: usize| vars.col_req(f, r, h);

    for (g, gen) in case.tgrs.iter().enumerate() {
        for h in 1..=h_count {
            rows.push(
                RowBuilder::new(format!("p_lb_g{g}_h{h}"), Sense::Le, T::zero())
                    .add(col(VarFamily::TgrOn, g, h), gen.power_min_kw)
                    .add(col(VarFamily::TgrPower, g, h), -T::one())
                    .finish(),
            );
        }
    }
    for (g, gen) in case.tgrs.iter().enumerate() {
        for h in 1..=h_count {
            rows.push(
                RowBuilder::new(format!("p_ub_g{g}_h{h}"), Sense::Le, T::zero())
                    .add(col(VarFamily::TgrPower, g, h), T::one())
                    .add(col(VarFamily::TgrOn, g, h), -gen.power_max_kw)
                    .finish(),
            );
        }
    }
    for (g, gen) in case.tgrs.iter().enumerate() {
        for h in 1..=h_count {
            rows.push(
                RowBuilder::new(format!("headroom_g{g}_h{h}"), Sense::Le, T::zero())
                    .add(col(VarFamily::TgrPower, g, h), T::one())
                    .add(col(VarFamily::TgrReserve, g, h), T::one())
                    .add(col(VarFamily::TgrOn, g, h), -gen.power_max_kw)
                    .finish(),
            );
        }
    }
    // Minimum-uptime windows, one row per (h, ν) pair:
    // u[h] − u[h−1] ≤ u[ν] for ν in h ..= min(h−1+Tup, H).
    for (g, gen) in case.tgrs.iter().enumerate() {
        let u0 = if gen.initially_on { T::one() } else { T::zero() };
        for h in 1..=h_count {
            for nu in h..=(h - 1 + gen.min_up_hours).min(h_count) {
                let rhs = if h == 1 { u0 } else { T::zero() };
                let mut b = RowBuilder::new(format!("minup_g{g}_h{h}_n{nu}"), Sense::Le, rhs)
                    .add(col(VarFamily::TgrOn, g, h), T::one())
                    .add(col(VarFamily::TgrOn, g, nu), -T::one());
                if h > 1 {
                    b = b.add(col(VarFamily::TgrOn, g, h - 1), -T::one());
                }
                rows.push(b.finish());
            }
        }
    }
    // Minimum-downtime windows: u[h−1] − u[h] ≤ 1 − u[ν].
    for (g, gen) in case.tgrs.iter().enumerate() {
        let u0 = if gen.initially_on { T::one() } else { T::zero() };
        for h in 1..=h_count {
            for nu in h..=(h - 1 + gen.min_down_hours).min(h_count) {
                let rhs = if h == 1 { T::one() - u0 } else { T::one() };
                let mut b = RowBuilder::new(format!("mindown_g{g}_h{h}_n{nu}"), Sense::Le, rhs)
                    .add(col(VarFamily::TgrOn, g, h), -T::one())
                    .add(col(VarFamily::TgrOn, g, nu), T::one());
                if h > 1 {
                    b = b.add(col(VarFamily::TgrOn, g, h - 1), T::one());
                }
                rows.push(b.finish());
            }
        }
    }
    // Start-up linearization: s[h] ≥ u[h] − u[h−1].
    for (g, gen) in case.tgrs.iter().enumerate() {
        let u0 = if gen.initially_on { T::one() } else { T::zero() };
        for h in 1..=h_count {
            let rhs = if h == 1 { u0 } else { T::zero() };
            let mut b = RowBuilder::new(format!("startup_g{g}_h{h}"), Sense::Le, rhs)
                .add(col(VarFamily::TgrOn, g, h), T::one())
                .add(col(VarFamily::TgrStartup, g, h), -T::one());
            if h > 1 {
                b = b.add(col(VarFamily::TgrOn, g, h - 1), -T::one());
            }
            rows.push(b.finish());
        }
    }
    // Fuel epigraph cuts: t ≥ slope·p + (intercept + fixed)·u.
    for (g, _) in case.tgrs.iter().enumerate() {
        let epi = &fuel_epi[g];
        for h in 1..=h_count {
            for (k, cut) in epi.cuts.iter().enumerate() {
                rows.push(
                    RowBuilder::new(format!("fuel_g{g}_h{h}_k{k}"), Sense::Le, T::zero())
                        .add(col(VarFamily::TgrPower, g, h), cut.slope)
                        .add(col(VarFamily::TgrOn, g, h), cut.intercept + epi.fixed)
                        .add(col(VarFamily::TgrFuelCost, g, h), -T::one())
                        .finish(),
                );
            }
        }
    }
    // Emission epigraph cuts: e ≥ slope·p + (intercept + fixed)·u.
    for (g, _) in case.tgrs.iter().enumerate() {
        let epi = &emis_epi[g];
        for h in 1..=h_count {
            for (k, cut) in epi.cuts.iter().enumerate() {
                rows.push(
                    RowBuilder::new(format!("emis_g{g}_h{h}_k{k}"), Sense::Le, T::zero())
                        .add(col(VarFamily::TgrPower, g, h), cut.slope)
                        .add(col(VarFamily::TgrOn, g, h), cut.intercept + epi.fixed)
                        .add(col(VarFamily::TgrEmission, g, h), -T::one())
                        .finish(),
                );
            }
        }
    }
    // Storage exclusivity, flow bounds, and the energy recursion.
    for (s, _) in case.esrs.iter().enumerate() {
        for h in 1..=h_count {
            rows.push(
                RowBuilder::new(format!("excl_s{s}_h{h}"), Sense::Le, T::one())
                    .add(col(VarFamily::EsrInjectOn, s, h), T::one())
                    .add(col(VarFamily::EsrWithdrawOn, s, h), T::one())
                    .finish(),
            );
        }
    }
    for (s, esr) in case.esrs.iter().enumerate() {
        for h in 1..=h_count {
            rows.push(
                RowBuilder::new(format!("pi_lb_s{s}_h{h}"), Sense::Le, T::zero())
                    .add(col(VarFamily::EsrInjectOn, s, h), esr.inject_min_kw)
                    .add(col(VarFamily::EsrInject, s, h), -T::one())
                    .finish(),
            );
            rows.push(
                RowBuilder::new(format!("pi_ub_s{s}_h{h}"), Sense::Le, T::zero())
                    .add(col(VarFamily::EsrInject, s, h), T::one())
                    .add(col(VarFamily::EsrInjectOn, s, h), -esr.inject_max_kw)
                    .finish(),
            );
        }
    }
    for (s, esr) in case.esrs.iter().enumerate() {
        for h in 1..=h_count {
            rows.push(
                RowBuilder::new(format!("pw_lb_s{s}_h{h}"), Sense::Le, T::zero())
                    .add(col(VarFamily::EsrWithdrawOn, s, h), esr.withdraw_min_kw)
                    .add(col(VarFamily::EsrWithdraw, s, h), -T::one())
                    .finish(),
            );
            rows.push(
                RowBuilder::new(format!("pw_ub_s{s}_h{h}"), Sense::Le, T::zero())
                    .add(col(VarFamily::EsrWithdraw, s, h), T::one())
                    .add(col(VarFamily::EsrWithdrawOn, s, h), -esr.withdraw_max_kw)
                    .finish(),
            );
        }
    }
    for (s, esr) in case.esrs.iter().enumerate() {
        let (charge_gain, discharge_drain) = esr.soc_coefficients();
        for h in 1..=h_count {
            let rhs = if h == 1 {
                esr.initial_energy_kwh
            } else {
                T::zero()
            };
            let mut b = RowBuilder::new(format!("soc_s{s}_h{h}"), Sense::Eq, rhs)
                .add(col(VarFamily::EsrEnergy, s, h), T::one())
                .add(col(VarFamily::EsrWithdraw, s, h), -charge_gain)
                .add(col(VarFamily::EsrInject, s, h), discharge_drain);
            if h > 1 {
                b = b.add(col(VarFamily::EsrEnergy, s, h - 1), -T::one());
            }
            rows.push(b.finish());
        }
    }
    // Hourly power balance: generation + storage net + grid = load.
    for h in 1..=h_count {
        let mut b = RowBuilder::new(
            format!("balance_h{h}"),
            Sense::Eq,
            case.load.demand_kw[h - 1],
        );
        for (g, _) in case.tgrs.iter().enumerate() {
            b = b.add(col(VarFamily::TgrPower, g, h), T::one());
        }
        for (v, _) in case.vers.iter().enumerate() {
            b = b.add(col(VarFamily::VerPower, v, h), T::one());
        }
        for (s, _) in case.esrs.iter().enumerate() {
            b = b
                .add(col(VarFamily::EsrInject, s, h), T::one())
                .add(col(VarFamily::EsrWithdraw, s, h), -T::one());
        }
        b = b.add(col(VarFamily::GridExchange, 0, h), T::one());
        rows.push(b.finish());
    }
    // Hourly spinning-reserve requirement.
    for h in 1..=h_count {
        let mut b = RowBuilder::new(
            format!("reserve_h{h}"),
            Sense::Ge,
            case.reserve.min_kw[h - 1],
        );
        for (g, _) in case.tgrs.iter().enumerate() {
            b = b.add(col(VarFamily::TgrReserve, g, h), T::one());
        }
        rows.push(b.finish());
    }
    // Study-period emission cap (ex-ante mode only), on the conservative
    // linearized emissions.
    if mode == UcMode::Euc {
        if let Some(cap) = case.emission.cap_kg {
            let mut b = RowBuilder::new("emission_cap".to_string(), Sense::Le, cap);
            for (g, _) in case.tgrs.iter().enumerate() {
                for h in 1..=h_count {
                    b = b.add(col(VarFamily::TgrEmission, g, h), T::one());
                }
            }
            rows.push(b.finish());
        }
    }

    let instance = MipInstance {
        objective,
        rows,
        lower,
        upper,
        binary,
        branch_priority,
        col_names,
    };
    debug_assert!(instance.check().is_ok(), "{:?}", instance.check());
    debug_assert!(vars.is_bijective(instance.num_cols()));
    Ok(UcMip {
        instance,
        vars,
        warnings,
    })
}

/// Map a solver point back to a [`Schedule`].
///
/// Binaries are rounded (an error if fractional beyond `tol`), continuous
/// values are copied and clamped to their static bounds (an error if the
/// violation exceeds `tol` scaled by the bound magnitude), and stored
/// energy is re-telescoped from the initial level so reports are internally
/// consistent.
pub fn extract_schedule<T: Scalar>(
    case: &MicrogridCase<T>,
    mip: &UcMip<T>,
    x: &[T],
    tol: T,
) -> Result<Schedule<T>, ExtractError> {
    let inst = &mip.instance;
    if x.len() != inst.num_cols() {
        return Err(ExtractError::LengthMismatch {
            got: x.len(),
            want: inst.num_cols(),
        });
    }
    let scale = |j: usize| T::one().max(inst.upper[j].abs().min(T::c(1e6)));
    for j in 0..inst.num_cols() {
        let v = x[j];
        let slack = tol * scale(j);
        if v < inst.lower[j] - slack || v > inst.upper[j] + slack {
            return Err(ExtractError::BoundViolation {
                name: inst.col_names[j].clone(),
                value: v.to_f64_lossy(),
                lo: inst.lower[j].to_f64_lossy(),
                hi: inst.upper[j].to_f64_lossy(),
            });
        }
        if inst.binary[j] {
            let nearest = v.round();
            if (v - nearest).abs() > tol {
                return Err(ExtractError::FractionalBinary {
                    name: inst.col_names[j].clone(),
                    value: v.to_f64_lossy(),
                });
            }
        }
    }

    let h_count = case.horizon.hours;
    let vars = &mip.vars;
    let bin = |f: VarFamily, r: usize, h: usize| x[vars.col_req(f, r, h)] > T::c(0.5);
    let val = |f: VarFamily, r: usize, h: usize| {
        let j = vars.col_req(f, r, h);
        x[j].max(inst.lower[j]).min(inst.upper[j])
    };

    let mut tgrs = Vec::with_capacity(case.tgrs.len());
    for (g, _) in case.tgrs.iter().enumerate() {
        let mut t = TgrSchedule {
            on: Vec::with_capacity(h_count),
            power_kw: Vec::with_capacity(h_count),
            reserve_kw: Vec::with_capacity(h_count),
        };
        for h in 1..=h_count {
            let on = bin(VarFamily::TgrOn, g, h);
            t.on.push(on);
            t.power_kw.push(if on {
                val(VarFamily::TgrPower, g, h)
            } else {
                T::zero()
            });
            t.reserve_kw.push(if on {
                val(VarFamily::TgrReserve, g, h)
            } else {
                T::zero()
            });
        }
        tgrs.push(t);
    }

    let mut esrs = Vec::with_capacity(case.esrs.len());
    for (s, esr) in case.esrs.iter().enumerate() {
        let (charge_gain, discharge_drain) = esr.soc_coefficients();
        let mut e = EsrSchedule {
            injecting: Vec::with_capacity(h_count),
            withdrawing: Vec::with_capacity(h_count),
            inject_kw: Vec::with_capacity(h_count),
            withdraw_kw: Vec::with_capacity(h_count),
            energy_kwh: Vec::with_capacity(h_count),
        };
        let mut energy = esr.initial_energy_kwh;
        for h in 1..=h_count {
            let inj = bin(VarFamily::EsrInjectOn, s, h);
            let wdr = bin(VarFamily::EsrWithdrawOn, s, h);
            let pi = if inj { val(VarFamily::EsrInject, s, h) } else { T::zero() };
            let pw = if wdr { val(VarFamily::EsrWithdraw, s, h) } else { T::zero() };
            energy = energy + charge_gain * pw - discharge_drain * pi;
            e.injecting.push(inj);
            e.withdrawing.push(wdr);
            e.inject_kw.push(pi);
            e.withdraw_kw.push(pw);
            e.energy_kwh.push(energy);
        }
        esrs.push(e);
    }

    let ver_kw = case
        .vers
        .iter()
        .enumerate()
        .map(|(v, _)| {
            (1..=h_count)
                .map(|h| val(VarFamily::VerPower, v, h))
                .collect()
        })
        .collect();
    let net_import_kw = (1..=h_count)
        .map(|h| val(VarFamily::GridExchange, 0, h))
        .collect();

    Ok(Schedule {
        tgrs,
        esrs,
        ver_kw,
        net_import_kw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::VarFamily;
    use crate::model::{
        EmissionPolicy, GridInterface, Horizon, LoadProfile, MicrogridCase, QuadCurve,
        ReservePolicy, StorageResource, ThermalGenerator, VariableResource,
    };

    pub(crate) fn paperlike_case(hours: usize) -> MicrogridCase<f64> {
        let cheap = 8.min(hours);
        let mut tariff = vec![0.0155; cheap];
        tariff.extend(vec![0.2197; hours - cheap]);
        MicrogridCase {
            horizon: Horizon::new(hours).unwrap(),
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
                profile_kw: vec![1.0; hours],
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
                soc_convention: Default::default(),
            }],
            grid: GridInterface {
                tariff_usd_per_kwh: tariff,
                exchange_limit_kw: None,
            },
            reserve: ReservePolicy {
                min_kw: vec![5.55; hours],
            },
            emission: EmissionPolicy {
                tax_usd_per_kg: 0.07,
                cap_kg: None,
            },
            load: LoadProfile {
                demand_kw: vec![12.0; hours],
            },
        }
        .validated()
        .unwrap()
    }

    #[test]
    fn column_census_on_the_full_case() {
        let mip = build_uc_mip(&paperlike_case(24), UcMode::Euc, PwlConfig::default()).unwrap();
        let inst = &mip.instance;
        let binaries = inst.binary.iter().filter(|&&b| b).count();
        assert_eq!(binaries, 72); // 24 commitment + 24 inject + 24 withdraw
        // 72 binaries + 24 each of p, r, s, t, e, pi, pw, E, ver, grid
        assert_eq!(inst.num_cols(), 72 + 10 * 24);
        assert!(mip.vars.is_bijective(inst.num_cols()));
        assert!(inst.check().is_ok());
    }

    #[test]
    fn cuc_drops_the_cap_row_and_zeroes_emission_prices() {
        let mut case = paperlike_case(6);
        case.emission.cap_kg = Some(100.0);
        let euc = build_uc_mip(&case, UcMode::Euc, PwlConfig::default()).unwrap();
        let cuc = build_uc_mip(&case, UcMode::Cuc, PwlConfig::default()).unwrap();
        assert_eq!(euc.instance.num_rows(), cuc.instance.num_rows() + 1);
        assert!(euc.instance.rows.iter().any(|r| r.name == "emission_cap"));
        assert!(!cuc.instance.rows.iter().any(|r| r.name == "emission_cap"));
        for (g, h) in [(0usize, 1usize), (0, 6)] {
            let j = cuc.vars.col_req(VarFamily::TgrEmission, g, h);
            assert_eq!(cuc.instance.objective[j], 0.0);
            assert!(euc.instance.objective[j] > 0.0);
        }
        // Row sets otherwise identical.
        for (a, b) in euc
            .instance
            .rows
            .iter()
            .filter(|r| r.name != "emission_cap")
            .zip(&cuc.instance.rows)
        {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn single_hour_unit_up_down_windows_degenerate() {
        let mut case = paperlike_case(1);
        case.tgrs[0].min_up_hours = 1;
        case.tgrs[0].min_down_hours = 1;
        case.esrs.clear();
        case.reserve.min_kw = vec![0.0];
        case.tgrs[0].initially_on = true;
        let case = case.validated().unwrap();
        let mip = build_uc_mip(&case, UcMode::Euc, PwlConfig::default()).unwrap();
        // windows collapse to the single (h=1, ν=1) pair each
        let minup: Vec<_> = mip
            .instance
            .rows
            .iter()
            .filter(|r| r.name.starts_with("minup"))
            .collect();
        let mindown: Vec<_> = mip
            .instance
            .rows
            .iter()
            .filter(|r| r.name.starts_with("mindown"))
            .collect();
        assert_eq!(minup.len(), 1);
        assert_eq!(mindown.len(), 1);
        // u[1] − u[0] ≤ u[1] ⇒ empty row with rhs u0 = 1
        assert!(minup[0].terms.is_empty());
        assert_eq!(minup[0].rhs, 1.0);
    }

    #[test]
    fn builds_are_byte_identical() {
        let case = paperlike_case(24);
        let a = build_uc_mip(&case, UcMode::Euc, PwlConfig::default()).unwrap();
        let b = build_uc_mip(&case, UcMode::Euc, PwlConfig::default()).unwrap();
        assert_eq!(a.instance.dump(), b.instance.dump());
    }

    #[test]
    fn warns_when_reserve_cannot_be_served() {
        let mut case = paperlike_case(3);
        case.tgrs.clear();
        let mip = build_uc_mip(&case, UcMode::Euc, PwlConfig::default()).unwrap();
        assert_eq!(mip.warnings.len(), 1);
    }

    #[test]
    fn extract_rejects_fractional_binaries_and_bad_bounds() {
        let case = paperlike_case(2);
        let mip = build_uc_mip(&case, UcMode::Euc, PwlConfig::default()).unwrap();
        let n = mip.instance.num_cols();
        let mut x = vec![0.0; n];
        // make the fixed-bound renewable columns consistent
        for h in 1..=2 {
            x[mip.vars.col_req(VarFamily::VerPower, 0, h)] = 1.0;
        }
        let u1 = mip.vars.col_req(VarFamily::TgrOn, 0, 1);
        x[u1] = 0.4999;
        let err = extract_schedule(&case, &mip, &x, 1e-6).unwrap_err();
        assert!(matches!(err, ExtractError::FractionalBinary { ref name, .. } if name == "u_0_h1"));
        x[u1] = 0.0;
        let p1 = mip.vars.col_req(VarFamily::TgrPower, 0, 1);
        x[p1] = 75.0;
        assert!(matches!(
            extract_schedule(&case, &mip, &x, 1e-6).unwrap_err(),
            ExtractError::BoundViolation { .. }
        ));
    }

    #[test]
    fn extract_all_zero_point_gives_clean_all_off_schedule() {
        let mut case = paperlike_case(2);
        case.load.demand_kw = vec![1.0; 2]; // matches the pv profile
        case.reserve.min_kw = vec![0.0; 2];
        let case = case.validated().unwrap();
        let mip = build_uc_mip(&case, UcMode::Euc, PwlConfig::default()).unwrap();
        let mut x = vec![0.0; mip.instance.num_cols()];
        for h in 1..=2 {
            x[mip.vars.col_req(VarFamily::VerPower, 0, h)] = 1.0;
        }
        let schedule = extract_schedule(&case, &mip, &x, 1e-6).unwrap();
        let violations =
            crate::model::validate_schedule(&case, &schedule, 1e-9).unwrap();
        assert!(violations.is_empty(), "{violations:?}");
    }
}
