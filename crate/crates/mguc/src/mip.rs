//! Generic mixed-integer linear program container plus the symbol→column
//! map that ties instance columns back to schedule quantities.
//!
//! Column and row order is fully deterministic: columns are grouped by
//! symbol family, then resource, then hour; rows by constraint family, then
//! resource, then hour. Two builds of the same case are identical down to
//! the canonical text dump.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Row comparison sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

/// One linear row: sparse terms, sense, right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row<T> {
    pub name: String,
    /// (column index, coefficient), strictly increasing column index.
    pub terms: Vec<(usize, T)>,
    pub sense: Sense,
    pub rhs: T,
}

/// A mixed-integer linear program in minimize form with explicit finite or
/// infinite column bounds and a binary-integrality mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipInstance<T> {
    /// Objective coefficients (minimize), one per column.
    pub objective: Vec<T>,
    pub rows: Vec<Row<T>>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    /// `true` for binary columns; their bounds lie within [0, 1].
    pub binary: Vec<bool>,
    /// Branching tier per column (higher branches first). Setting this for
    /// the columns that actually move the relaxation bound keeps the search
    /// off cost-free degenerate plateaus.
    pub branch_priority: Vec<i32>,
    pub col_names: Vec<String>,
}

impl<T: Scalar> MipInstance<T> {
    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Indices of the binary columns, ascending.
    pub fn binary_cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.binary
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    /// Objective value of a full assignment.
    pub fn objective_value(&self, x: &[T]) -> T {
        self.objective
            .iter()
            .zip(x)
            .map(|(&c, &v)| c * v)
            .sum()
    }

    /// Structural sanity: index ranges, bound order, binary bounds in [0,1].
    pub fn check(&self) -> Result<(), String> {
        let n = self.num_cols();
        if self.lower.len() != n
            || self.upper.len() != n
            || self.binary.len() != n
            || self.branch_priority.len() != n
            || self.col_names.len() != n
        {
            return Err("column attribute lengths disagree".into());
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return Err(format!("column {} has crossed bounds", self.col_names[j]));
            }
            if self.binary[j]
                && (self.lower[j] < T::zero() || self.upper[j] > T::one())
            {
                return Err(format!(
                    "binary column {} has bounds outside [0, 1]",
                    self.col_names[j]
                ));
            }
        }
        for row in &self.rows {
            let mut prev = None;
            for &(j, _) in &row.terms {
                if j >= n {
                    return Err(format!("row {} references column {j}", row.name));
                }
                if prev.is_some_and(|p| p >= j) {
                    return Err(format!("row {} terms not strictly ascending", row.name));
                }
                prev = Some(j);
            }
        }
        Ok(())
    }

    /// Canonical plain-text form: one column header line per column, one
    /// row per line. Byte-identical dumps mean identical instances.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "columns {}", self.num_cols());
        for j in 0..self.num_cols() {
            let kind = if self.binary[j] { "bin" } else { "cont" };
            let _ = writeln!(
                s,
                "{} {} {} [{},{}] obj={}",
                j, self.col_names[j], kind, self.lower[j], self.upper[j], self.objective[j]
            );
        }
        let _ = writeln!(s, "rows {}", self.num_rows());
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(s, "{} {} {} {} :", i, row.name, row.sense.symbol(), row.rhs);
            for &(j, c) in &row.terms {
                let _ = write!(s, " {j}:{c}");
            }
            s.push('\n');
        }
        s
    }
}

/// Symbol families of the unit-commitment formulation, in column-layout
/// order (binaries first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarFamily {
    /// Thermal commitment status (binary).
    TgrOn,
    /// Storage discharging status (binary).
    EsrInjectOn,
    /// Storage charging status (binary).
    EsrWithdrawOn,
    /// Thermal output (kW).
    TgrPower,
    /// Thermal spinning reserve (kW).
    TgrReserve,
    /// Start-up indicator (continuous in [0, 1]; 0/1 at any optimum).
    TgrStartup,
    /// Fuel-cost epigraph value ($/h).
    TgrFuelCost,
    /// Emission epigraph value (kg/h).
    TgrEmission,
    /// Storage discharge (kW).
    EsrInject,
    /// Storage charge (kW).
    EsrWithdraw,
    /// Stored energy at end of hour (kWh).
    EsrEnergy,
    /// Renewable injection (kW).
    VerPower,
    /// Net grid import (kW, signed).
    GridExchange,
}

impl VarFamily {
    pub const ALL: [VarFamily; 13] = [
        VarFamily::TgrOn,
        VarFamily::EsrInjectOn,
        VarFamily::EsrWithdrawOn,
        VarFamily::TgrPower,
        VarFamily::TgrReserve,
        VarFamily::TgrStartup,
        VarFamily::TgrFuelCost,
        VarFamily::TgrEmission,
        VarFamily::EsrInject,
        VarFamily::EsrWithdraw,
        VarFamily::EsrEnergy,
        VarFamily::VerPower,
        VarFamily::GridExchange,
    ];

    fn tag(self) -> &'static str {
        match self {
            VarFamily::TgrOn => "u",
            VarFamily::EsrInjectOn => "ui",
            VarFamily::EsrWithdrawOn => "uw",
            VarFamily::TgrPower => "p",
            VarFamily::TgrReserve => "r",
            VarFamily::TgrStartup => "s",
            VarFamily::TgrFuelCost => "t",
            VarFamily::TgrEmission => "e",
            VarFamily::EsrInject => "pi",
            VarFamily::EsrWithdraw => "pw",
            VarFamily::EsrEnergy => "en",
            VarFamily::VerPower => "pv",
            VarFamily::GridExchange => "px",
        }
    }
}

/// (family, resource index, hour) key of one column. The grid interface is
/// a single resource with index 0; hours are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarKey {
    pub family: VarFamily,
    pub resource: usize,
    pub hour: usize,
}

impl VarKey {
    pub fn new(family: VarFamily, resource: usize, hour: usize) -> Self {
        Self {
            family,
            resource,
            hour,
        }
    }

    pub fn name(&self) -> String {
        format!("{}_{}_h{}", self.family.tag(), self.resource, self.hour)
    }
}

/// Bijective map between schedule symbols and instance columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VariableMap {
    forward: BTreeMap<VarKey, usize>,
    reverse: Vec<VarKey>,
}

impl VariableMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register the next column for `key`, returning its index.
    pub fn push(&mut self, key: VarKey) -> usize {
        let idx = self.reverse.len();
        let prev = self.forward.insert(key, idx);
        assert!(prev.is_none(), "duplicate variable key {key:?}");
        self.reverse.push(key);
        idx
    }

    pub fn col(&self, family: VarFamily, resource: usize, hour: usize) -> Option<usize> {
        self.forward
            .get(&VarKey::new(family, resource, hour))
            .copied()
    }

    /// Column index for a key that must exist.
    pub fn col_req(&self, family: VarFamily, resource: usize, hour: usize) -> usize {
        self.col(family, resource, hour)
            .unwrap_or_else(|| panic!("no column for {family:?} r{resource} h{hour}"))
    }

    pub fn key_of(&self, col: usize) -> VarKey {
        self.reverse[col]
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    /// True if every column of 0..n maps to exactly one key and back.
    pub fn is_bijective(&self, n: usize) -> bool {
        self.reverse.len() == n
            && self.forward.len() == n
            && self
                .forward
                .iter()
                .all(|(k, &i)| self.reverse.get(i) == Some(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_map_round_trips() {
        let mut map = VariableMap::new();
        let a = map.push(VarKey::new(VarFamily::TgrOn, 0, 1));
        let b = map.push(VarKey::new(VarFamily::TgrOn, 0, 2));
        let c = map.push(VarKey::new(VarFamily::GridExchange, 0, 1));
        assert_eq!((a, b, c), (0, 1, 2));
        assert_eq!(map.col(VarFamily::TgrOn, 0, 2), Some(1));
        assert_eq!(map.key_of(2).family, VarFamily::GridExchange);
        assert!(map.is_bijective(3));
    }

    #[test]
    fn instance_check_catches_bad_rows() {
        let inst = MipInstance::<f64> {
            objective: vec![1.0],
            rows: vec![Row {
                name: "r".into(),
                terms: vec![(2, 1.0)],
                sense: Sense::Le,
                rhs: 0.0,
            }],
            lower: vec![0.0],
            upper: vec![1.0],
            binary: vec![false],
            branch_priority: vec![0],
            col_names: vec!["x".into()],
        };
        assert!(inst.check().is_err());
    }

    #[test]
    fn dump_is_deterministic() {
        let inst = MipInstance::<f64> {
            objective: vec![1.0, -0.5],
            rows: vec![Row {
                name: "cap".into(),
                terms: vec![(0, 1.0), (1, 2.0)],
                sense: Sense::Le,
                rhs: 3.5,
            }],
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 10.0],
            binary: vec![true, false],
            branch_priority: vec![0, 0],
            col_names: vec!["u".into(), "p".into()],
        };
        assert_eq!(inst.dump(), inst.clone().dump());
        assert!(inst.dump().contains("cap <= 3.5 : 0:1 1:2"));
    }
}
