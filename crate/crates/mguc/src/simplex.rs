//! Bounded-variable two-phase primal simplex over a dense tableau.
//!
//! This is the single LP engine behind branch-and-bound and the brute-force
//! oracle. Dense and deliberately simple: instances here stay within a few
//! thousand columns, so auditability wins over sparse machinery.
//!
//! Mechanics: every row gets a slack column (`<=`: [0, ∞), `>=`: (−∞, 0],
//! `=`: fixed at 0); structural columns start at a finite bound (or 0 when
//! free); rows whose initial residual violates the slack bounds get an
//! artificial column, and phase 1 minimizes the total artificial mass.
//! Pricing is Dantzig with Bland's rule engaged after a stall, entering
//! ties broken by lowest column index, ratio ties by lowest row index.

use thiserror::Error;

use crate::mip::{MipInstance, Sense};
use crate::scalar::Scalar;

/// Tolerances and limits for one LP solve.
#[derive(Debug, Clone, Copy)]
pub struct LpOptions<T> {
    /// Feasibility slack on bounds and rows.
    pub feas_tol: T,
    /// Reduced-cost threshold for optimality.
    pub opt_tol: T,
    /// Smallest tableau entry accepted as a pivot.
    pub pivot_tol: T,
    /// Iterations without objective progress before Bland's rule engages.
    pub stall_threshold: usize,
    /// Hard iteration cap; 0 means scale with the instance size.
    pub max_iterations: usize,
}

impl<T: Scalar> Default for LpOptions<T> {
    fn default() -> Self {
        Self {
            feas_tol: T::c(1e-7),
            opt_tol: T::c(1e-9),
            pivot_tol: T::c(1e-9),
            stall_threshold: 64,
            max_iterations: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of a solve. `x` and `objective` are meaningful at
/// `LpStatus::Optimal`; otherwise they carry the last iterate for
/// debugging. `reduced_costs` holds the final pricing row per structural
/// column (zero for basic columns).
#[derive(Debug, Clone)]
pub struct LpResult<T> {
    pub status: LpStatus,
    pub x: Vec<T>,
    pub objective: T,
    pub iterations: usize,
    pub reduced_costs: Vec<T>,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("instance is malformed: {0}")]
    BadInstance(String),
    #[error("override on column {col} is outside the original bounds")]
    BadOverride { col: usize },
    #[error("iteration limit of {limit} exceeded after {phase} phase")]
    IterationLimit { limit: usize, phase: &'static str },
    #[error("numerically singular basis at row {row}, column {col}")]
    SingularBasis { row: usize, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free column parked at zero.
    Parked,
}

struct Tableau<T> {
    /// Row-major m × ncols.
    tab: Vec<T>,
    ncols: usize,
    m: usize,
    lower: Vec<T>,
    upper: Vec<T>,
    state: Vec<VarState>,
    /// Values of nonbasic columns (basic values live in `beta`).
    value: Vec<T>,
    /// Value of the basic variable of each row.
    beta: Vec<T>,
    basis: Vec<usize>,
    /// Phase-2 reduced-cost row.
    obj2: Vec<T>,
    /// Phase-1 reduced-cost row (artificial mass).
    obj1: Vec<T>,
    z1: T,
    z2: T,
    /// Columns `art_start..ncols` are artificials.
    art_start: usize,
    iterations: usize,
    opts: LpOptions<T>,
    /// Scratch: nonzeros of the scaled pivot row.
    pivot_nz: Vec<(usize, T)>,
}

enum StepOutcome {
    Moved,
    PhaseOptimal,
    Unbounded,
}

impl<T: Scalar> Tableau<T> {
    #[inline]
    fn at(&self, r: usize, j: usize) -> T {
        self.tab[r * self.ncols + j]
    }

    fn current_value(&self, j: usize) -> T {
        match self.state[j] {
            VarState::Basic(r) => self.beta[r],
            _ => self.value[j],
        }
    }

    /// One simplex iteration against the given objective row.
    fn step(&mut self, phase1: bool, bland: bool) -> Result<StepOutcome, LpError> {
        let active_cols = if phase1 { self.ncols } else { self.art_start };
        let opt_tol = self.opts.opt_tol;

        // Entering column.
        let mut enter: Option<(T, usize, bool)> = None; // (score, col, increase)
        for j in 0..active_cols {
            let (eligible, increase, score) = match self.state[j] {
                VarState::Basic(_) => continue,
                VarState::AtLower => {
                    if self.upper[j] - self.lower[j] <= T::zero() {
                        continue; // fixed column
                    }
                    let d = if phase1 { self.obj1[j] } else { self.obj2[j] };
                    (d < -opt_tol, true, -d)
                }
                VarState::AtUpper => {
                    if self.upper[j] - self.lower[j] <= T::zero() {
                        continue;
                    }
                    let d = if phase1 { self.obj1[j] } else { self.obj2[j] };
                    (d > opt_tol, false, d)
                }
                VarState::Parked => {
                    let d = if phase1 { self.obj1[j] } else { self.obj2[j] };
                    (d.abs() > opt_tol, d < T::zero(), d.abs())
                }
            };
            if !eligible {
                continue;
            }
            if bland {
                enter = Some((score, j, increase));
                break; // lowest eligible index
            }
            match enter {
                Some((best, _, _)) if best >= score => {}
                _ => enter = Some((score, j, increase)),
            }
        }
        let Some((_, jc, increase)) = enter else {
            return Ok(StepOutcome::PhaseOptimal);
        };
        let dir = if increase { T::one() } else { -T::one() };

        // Ratio test: how far can column jc move?
        let pivot_tol = self.opts.pivot_tol;
        let mut t_best = T::infinity();
        let mut leave: Option<usize> = None;
        for r in 0..self.m {
            let a = self.at(r, jc);
            let rate = dir * a; // basic value changes at −rate per unit step
            let b = self.basis[r];
            let limit = if rate > pivot_tol {
                let lo = self.lower[b];
                if lo.is_finite() {
                    ((self.beta[r] - lo) / rate).max(T::zero())
                } else {
                    continue;
                }
            } else if rate < -pivot_tol {
                let hi = self.upper[b];
                if hi.is_finite() {
                    ((hi - self.beta[r]) / -rate).max(T::zero())
                } else {
                    continue;
                }
            } else {
                continue;
            };
            if limit < t_best {
                t_best = limit;
                leave = Some(r);
            } else if bland && limit == t_best {
                // Bland: among tied rows leave the lowest variable index.
                if let Some(cur) = leave {
                    if self.basis[r] < self.basis[cur] {
                        leave = Some(r);
                    }
                }
            }
        }
        let t_flip = if self.lower[jc].is_finite() && self.upper[jc].is_finite() {
            self.upper[jc] - self.lower[jc]
        } else {
            T::infinity()
        };

        if t_flip <= t_best {
            if !t_flip.is_finite() {
                return Ok(StepOutcome::Unbounded);
            }
            // Bound flip: no basis change.
            let delta = dir * t_flip;
            for r in 0..self.m {
                let a = self.at(r, jc);
                if a != T::zero() {
                    self.beta[r] -= delta * a;
                }
            }
            self.z1 += self.obj1[jc] * delta;
            self.z2 += self.obj2[jc] * delta;
            self.state[jc] = if increase {
                VarState::AtUpper
            } else {
                VarState::AtLower
            };
            self.value[jc] = if increase {
                self.upper[jc]
            } else {
                self.lower[jc]
            };
            self.iterations += 1;
            return Ok(StepOutcome::Moved);
        }

        let Some(rpiv) = leave else {
            return Ok(StepOutcome::Unbounded);
        };
        let t = t_best;
        let entering_value = self.current_value(jc) + dir * t;
        let delta = dir * t;

        // Update values before rewriting the tableau.
        let a_pivot = self.at(rpiv, jc);
        for r in 0..self.m {
            if r != rpiv {
                let a = self.at(r, jc);
                if a != T::zero() {
                    self.beta[r] -= delta * a;
                }
            }
        }
        self.z1 += self.obj1[jc] * delta;
        self.z2 += self.obj2[jc] * delta;

        let leaving = self.basis[rpiv];
        let leaving_rate = dir * a_pivot;
        let (leaving_state, leaving_value) = if leaving_rate > T::zero() {
            (VarState::AtLower, self.lower[leaving])
        } else {
            (VarState::AtUpper, self.upper[leaving])
        };
        self.state[leaving] = leaving_state;
        self.value[leaving] = leaving_value;
        self.beta[rpiv] = entering_value;
        self.basis[rpiv] = jc;
        self.state[jc] = VarState::Basic(rpiv);

        self.eliminate(rpiv, jc)?;
        self.iterations += 1;
        Ok(StepOutcome::Moved)
    }

    /// Gaussian elimination around pivot (rpiv, jc). Skipping the exact
    /// zeros of the pivot row changes nothing numerically (the subtracted
    /// terms would be `f·0`) and keeps the cost proportional to fill-in
    /// instead of the full tableau width.
    fn eliminate(&mut self, rpiv: usize, jc: usize) -> Result<(), LpError> {
        let n = self.ncols;
        let piv = self.tab[rpiv * n + jc];
        if piv.abs() <= self.opts.pivot_tol {
            return Err(LpError::SingularBasis { row: rpiv, col: jc });
        }
        let inv = T::one() / piv;
        let (start, end) = (rpiv * n, (rpiv + 1) * n);
        for v in &mut self.tab[start..end] {
            *v *= inv;
        }
        self.pivot_nz.clear();
        for (idx, &v) in self.tab[start..end].iter().enumerate() {
            if v != T::zero() {
                self.pivot_nz.push((idx, v));
            }
        }
        for r in 0..self.m {
            if r == rpiv {
                continue;
            }
            let f = self.tab[r * n + jc];
            if f == T::zero() {
                continue;
            }
            let row = &mut self.tab[r * n..(r + 1) * n];
            for &(idx, p) in &self.pivot_nz {
                row[idx] -= f * p;
            }
            row[jc] = T::zero();
        }
        let f1 = self.obj1[jc];
        if f1 != T::zero() {
            for &(idx, p) in &self.pivot_nz {
                self.obj1[idx] -= f1 * p;
            }
            self.obj1[jc] = T::zero();
        }
        let f2 = self.obj2[jc];
        if f2 != T::zero() {
            for &(idx, p) in &self.pivot_nz {
                self.obj2[idx] -= f2 * p;
            }
            self.obj2[jc] = T::zero();
        }
        Ok(())
    }

    /// Run one phase to optimality / unboundedness.
    fn run_phase(&mut self, phase1: bool, limit: usize) -> Result<StepOutcome, LpError> {
        let mut bland = false;
        let mut stall = 0usize;
        let mut last = if phase1 { self.z1 } else { self.z2 };
        loop {
            if self.iterations >= limit {
                return Err(LpError::IterationLimit {
                    limit,
                    phase: if phase1 { "infeasibility" } else { "optimality" },
                });
            }
            match self.step(phase1, bland)? {
                StepOutcome::PhaseOptimal => return Ok(StepOutcome::PhaseOptimal),
                StepOutcome::Unbounded => return Ok(StepOutcome::Unbounded),
                StepOutcome::Moved => {}
            }
            let z = if phase1 { self.z1 } else { self.z2 };
            let progressed = last - z > T::c(1e-12) * (T::one() + z.abs());
            if progressed {
                stall = 0;
                bland = false;
                last = z;
            } else {
                stall += 1;
                if stall > self.opts.stall_threshold {
                    bland = true;
                }
            }
        }
    }

    /// Total artificial mass, recomputed from current values.
    fn infeasibility(&self) -> T {
        let mut total = T::zero();
        for j in self.art_start..self.ncols {
            total += self.current_value(j).abs();
        }
        total
    }

    /// Degenerate-pivot artificials out of the basis where possible;
    /// redundant rows keep their artificial pinned at zero.
    fn expel_artificials(&mut self) -> Result<(), LpError> {
        for r in 0..self.m {
            let b = self.basis[r];
            if b < self.art_start {
                continue;
            }
            let mut entering = None;
            for j in 0..self.art_start {
                if matches!(self.state[j], VarState::Basic(_)) {
                    continue;
                }
                if self.at(r, j).abs() > self.opts.pivot_tol {
                    entering = Some(j);
                    break;
                }
            }
            if let Some(j) = entering {
                // Degenerate swap: the point does not move.
                let v = self.current_value(j);
                self.state[b] = if self.lower[b] == T::zero() {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                self.value[b] = T::zero();
                self.basis[r] = j;
                self.state[j] = VarState::Basic(r);
                self.beta[r] = v;
                self.eliminate(r, j)?;
            }
            // else: row is redundant under the current basis; the artificial
            // stays basic at zero and no phase-2 pivot can move it.
        }
        Ok(())
    }
}

/// Solve the continuous relaxation of `instance` with optional per-column
/// bound overrides (used by branch-and-bound to fix binaries). Overrides
/// must stay within the original bounds.
pub fn solve_lp<T: Scalar>(
    instance: &MipInstance<T>,
    overrides: &[(usize, T, T)],
    opts: &LpOptions<T>,
) -> Result<LpResult<T>, LpError> {
    instance.check().map_err(LpError::BadInstance)?;
    let n_struct = instance.num_cols();
    let m = instance.num_rows();

    let mut lower = instance.lower.clone();
    let mut upper = instance.upper.clone();
    for &(col, lo, hi) in overrides {
        if col >= n_struct
            || lo > hi
            || lo < instance.lower[col] - T::c(1e-12)
            || hi > instance.upper[col] + T::c(1e-12)
        {
            return Err(LpError::BadOverride { col });
        }
        lower[col] = lo;
        upper[col] = hi;
    }

    // Park structural columns at a bound (prefer lower), free ones at zero.
    let mut state = Vec::with_capacity(n_struct + m);
    let mut value = Vec::with_capacity(n_struct + m);
    for j in 0..n_struct {
        if lower[j].is_finite() {
            state.push(VarState::AtLower);
            value.push(lower[j]);
        } else if upper[j].is_finite() {
            state.push(VarState::AtUpper);
            value.push(upper[j]);
        } else {
            state.push(VarState::Parked);
            value.push(T::zero());
        }
    }

    // Slack bounds per row and initial residuals.
    let mut residual = vec![T::zero(); m];
    for (r, row) in instance.rows.iter().enumerate() {
        let mut lhs = T::zero();
        for &(j, a) in &row.terms {
            lhs += a * value[j];
        }
        residual[r] = row.rhs - lhs;
    }

    #[derive(Clone, Copy)]
    enum ArtKind {
        None,
        Positive,
        Negative,
    }
    let mut art_kind = vec![ArtKind::None; m];
    let mut basis = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut n_art = 0usize;
    let slack_bounds = |sense: Sense| match sense {
        Sense::Le => (T::zero(), T::infinity()),
        Sense::Ge => (T::neg_infinity(), T::zero()),
        Sense::Eq => (T::zero(), T::zero()),
    };
    for (r, row) in instance.rows.iter().enumerate() {
        let (slo, shi) = slack_bounds(row.sense);
        lower.push(slo);
        upper.push(shi);
        let res = residual[r];
        if res >= slo && res <= shi {
            // Slack basic at the residual: row feasible from the start.
            state.push(VarState::Basic(r));
            value.push(T::zero());
            basis.push(n_struct + r);
            beta.push(res);
        } else {
            // Park the slack at the nearest bound; an artificial absorbs
            // the remaining (signed) violation.
            let parked = if res > shi { shi } else { slo };
            state.push(if parked == shi && shi.is_finite() && slo < shi {
                VarState::AtUpper
            } else {
                VarState::AtLower
            });
            value.push(parked);
            art_kind[r] = if res - parked > T::zero() {
                ArtKind::Positive
            } else {
                ArtKind::Negative
            };
            basis.push(usize::MAX); // patched below once indices are known
            beta.push(res - parked);
            n_art += 1;
        }
    }

    let art_start = n_struct + m;
    let ncols = art_start + n_art;
    let mut c1 = vec![T::zero(); ncols];
    {
        let mut next = art_start;
        for r in 0..m {
            match art_kind[r] {
                ArtKind::None => {}
                ArtKind::Positive => {
                    lower.push(T::zero());
                    upper.push(T::infinity());
                    c1[next] = T::one();
                    state.push(VarState::Basic(r));
                    value.push(T::zero());
                    basis[r] = next;
                    next += 1;
                }
                ArtKind::Negative => {
                    lower.push(T::neg_infinity());
                    upper.push(T::zero());
                    c1[next] = -T::one();
                    state.push(VarState::Basic(r));
                    value.push(T::zero());
                    basis[r] = next;
                    next += 1;
                }
            }
        }
    }

    // Dense initial tableau: structural coefficients, slack identity,
    // artificial identity on their rows.
    let mut tab = vec![T::zero(); m * ncols];
    for (r, row) in instance.rows.iter().enumerate() {
        for &(j, a) in &row.terms {
            tab[r * ncols + j] = a;
        }
        tab[r * ncols + n_struct + r] = T::one();
        if basis[r] >= art_start {
            tab[r * ncols + basis[r]] = T::one();
        }
    }

    // Reduced costs for the slack/artificial starting basis.
    let mut obj2 = vec![T::zero(); ncols];
    obj2[..n_struct].copy_from_slice(&instance.objective);
    let mut obj1 = c1.clone();
    for r in 0..m {
        let cb = c1[basis[r]];
        if cb != T::zero() {
            for j in 0..ncols {
                let a = tab[r * ncols + j];
                if a != T::zero() {
                    obj1[j] -= cb * a;
                }
            }
        }
    }
    let z2 = (0..n_struct)
        .map(|j| instance.objective[j] * value[j])
        .sum();
    let z1 = beta
        .iter()
        .enumerate()
        .filter(|(r, _)| basis[*r] >= art_start)
        .map(|(_, v)| v.abs())
        .sum();

    let mut t = Tableau {
        tab,
        ncols,
        m,
        lower,
        upper,
        state,
        value,
        beta,
        basis,
        obj2,
        obj1,
        z1,
        z2,
        art_start,
        iterations: 0,
        opts: *opts,
        pivot_nz: Vec::new(),
    };
    let limit = if opts.max_iterations > 0 {
        opts.max_iterations
    } else {
        100 * (m + ncols) + 10_000
    };

    let collect = |t: &Tableau<T>| -> (Vec<T>, Vec<T>) {
        let x: Vec<T> = (0..n_struct).map(|j| t.current_value(j)).collect();
        let d: Vec<T> = t.obj2[..n_struct].to_vec();
        (x, d)
    };

    // Phase 1: drive the artificial mass to zero (skipped when the start
    // point is already feasible).
    if n_art > 0 {
        match t.run_phase(true, limit)? {
            StepOutcome::Unbounded => {
                // The artificial objective is bounded below by zero; an
                // unbounded ray here is a numerical failure.
                return Err(LpError::SingularBasis { row: 0, col: 0 });
            }
            _ => {}
        }
        if t.infeasibility() > opts.feas_tol {
            let (x, reduced_costs) = collect(&t);
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                x,
                objective: t.z2,
                iterations: t.iterations,
                reduced_costs,
            });
        }
        t.expel_artificials()?;
        // Pin expelled artificials at zero so phase 2 cannot disturb them.
        for j in t.art_start..t.ncols {
            if !matches!(t.state[j], VarState::Basic(_)) {
                t.value[j] = T::zero();
            }
        }
    }

    let outcome = t.run_phase(false, limit)?;
    let (mut x, reduced_costs) = collect(&t);
    let status = match outcome {
        StepOutcome::Unbounded => LpStatus::Unbounded,
        _ => LpStatus::Optimal,
    };
    if status == LpStatus::Optimal {
        polish_binaries(
            instance,
            &t.lower[..n_struct],
            &t.upper[..n_struct],
            &mut x,
            opts.feas_tol,
        );
    }
    let objective = instance.objective_value(&x);
    Ok(LpResult {
        status,
        x,
        objective,
        iterations: t.iterations,
        reduced_costs,
    })
}

/// Deterministic integral polish of an optimal point.
///
/// Degenerate optima routinely leave zero-objective binary columns (status
/// indicators whose cost lives elsewhere) basic at fractional values; any
/// bound value is equally optimal as long as the rows stay feasible. Moving
/// them to a bound keeps the point optimal, keeps every row satisfied, and
/// spares branch-and-bound an exponential plateau of cost-free branches.
fn polish_binaries<T: Scalar>(
    instance: &MipInstance<T>,
    lower: &[T],
    upper: &[T],
    x: &mut [T],
    feas_tol: T,
) {
    let n = instance.num_cols();
    let frac_tol = T::c(1e-9);
    let mut candidates: Vec<usize> = instance
        .binary_cols()
        .filter(|&j| {
            instance.objective[j] == T::zero()
                && upper[j] > lower[j]
                && (x[j] - x[j].round()).abs() > frac_tol
        })
        .collect();
    if candidates.is_empty() {
        return;
    }
    // Row activities and a column → rows index, maintained incrementally.
    let mut activity: Vec<T> = instance
        .rows
        .iter()
        .map(|row| row.terms.iter().map(|&(j, a)| a * x[j]).sum())
        .collect();
    let mut touching: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    for (r, row) in instance.rows.iter().enumerate() {
        for &(j, a) in &row.terms {
            if candidates.binary_search(&j).is_ok() {
                touching[j].push((r, a));
            }
        }
    }
    for j in std::mem::take(&mut candidates) {
        let near = if x[j].round() >= upper[j] {
            upper[j]
        } else if x[j].round() <= lower[j] {
            lower[j]
        } else {
            x[j].round()
        };
        let far = if near == upper[j] { lower[j] } else { upper[j] };
        'target: for target in [near, far] {
            let delta = target - x[j];
            for &(r, a) in &touching[j] {
                let lhs = activity[r] + a * delta;
                let row = &instance.rows[r];
                let ok = match row.sense {
                    Sense::Le => lhs <= row.rhs + feas_tol,
                    Sense::Ge => lhs >= row.rhs - feas_tol,
                    Sense::Eq => (lhs - row.rhs).abs() <= feas_tol,
                };
                if !ok {
                    continue 'target;
                }
            }
            for &(r, a) in &touching[j] {
                activity[r] += a * delta;
            }
            x[j] = target;
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::{MipInstance, Row, Sense};
    use approx::assert_relative_eq;

    fn inst(
        objective: Vec<f64>,
        bounds: Vec<(f64, f64)>,
        rows: Vec<(Vec<(usize, f64)>, Sense, f64)>,
    ) -> MipInstance<f64> {
        let n = objective.len();
        MipInstance {
            objective,
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(i, (terms, sense, rhs))| Row {
                    name: format!("r{i}"),
                    terms,
                    sense,
                    rhs,
                })
                .collect(),
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            binary: vec![false; n],
            branch_priority: vec![0; n],
            col_names: (0..n).map(|j| format!("x{j}")).collect(),
        }
    }

    /// Reduced costs must certify optimality: ≥ −opt_tol at lower bound,
    /// ≤ opt_tol at upper bound.
    fn assert_certificate(instance: &MipInstance<f64>, res: &LpResult<f64>) {
        let tol = 1e-9;
        for j in 0..instance.num_cols() {
            let d = res.reduced_costs[j];
            let at_lower = (res.x[j] - instance.lower[j]).abs() < 1e-6;
            let at_upper = (res.x[j] - instance.upper[j]).abs() < 1e-6;
            if at_lower && !at_upper {
                assert!(d >= -tol, "col {j}: reduced cost {d} at lower bound");
            } else if at_upper && !at_lower {
                assert!(d <= tol, "col {j}: reduced cost {d} at upper bound");
            }
        }
    }

    #[test]
    fn two_variable_box_lp() {
        // minimize −2x1 − x2 s.t. x1 + x2 ≤ 1, x ∈ [0,1]²
        let i = inst(
            vec![-2.0, -1.0],
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0)],
        );
        let r = solve_lp(&i, &[], &LpOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert_relative_eq!(r.objective, -2.0, epsilon = 1e-9);
        assert_relative_eq!(r.x[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(r.x[1], 0.0, epsilon = 1e-9);
        assert_certificate(&i, &r);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let i = inst(
            vec![1.0],
            vec![(0.0, 10.0)],
            vec![
                (vec![(0, 1.0)], Sense::Ge, 2.0),
                (vec![(0, 1.0)], Sense::Le, 1.0),
            ],
        );
        let r = solve_lp(&i, &[], &LpOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
    }

    #[test]
    fn missing_upper_bound_is_unbounded() {
        let i = inst(vec![-1.0], vec![(0.0, f64::INFINITY)], vec![]);
        let r = solve_lp(&i, &[], &LpOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_upper_bound_start() {
        // minimize x1 + x2 s.t. x1 + x2 = 3, x1 ∈ [0, 2], x2 ∈ [0, 2]
        let i = inst(
            vec![1.0, 1.0],
            vec![(0.0, 2.0), (0.0, 2.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 3.0)],
        );
        let r = solve_lp(&i, &[], &LpOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert_relative_eq!(r.objective, 3.0, epsilon = 1e-9);
        assert_relative_eq!(r.x[0] + r.x[1], 3.0, epsilon = 1e-9);
        assert_certificate(&i, &r);
    }

    #[test]
    fn free_variable_equality() {
        // minimize x2 with x1 free: x1 + x2 = 5, x2 ≥ 0 → x2 = 0, x1 = 5
        let i = inst(
            vec![0.0, 1.0],
            vec![(f64::NEG_INFINITY, f64::INFINITY), (0.0, 10.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 5.0)],
        );
        let r = solve_lp(&i, &[], &LpOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert_relative_eq!(r.x[0], 5.0, epsilon = 1e-9);
        assert_relative_eq!(r.x[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn overrides_tighten_bounds() {
        let i = inst(
            vec![-1.0, -1.0],
            vec![(0.0, 4.0), (0.0, 4.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Le, 6.0)],
        );
        let free = solve_lp(&i, &[], &LpOptions::default()).unwrap();
        assert_relative_eq!(free.objective, -6.0, epsilon = 1e-9);
        let fixed = solve_lp(&i, &[(0, 0.0, 0.0)], &LpOptions::default()).unwrap();
        assert_relative_eq!(fixed.objective, -4.0, epsilon = 1e-9);
        assert_relative_eq!(fixed.x[0], 0.0, epsilon = 1e-12);
        assert!(matches!(
            solve_lp(&i, &[(0, -1.0, 2.0)], &LpOptions::default()),
            Err(LpError::BadOverride { col: 0 })
        ));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Classic cycling instance (Beale); loops forever under pure
        // Dantzig with naive tie-breaking, must terminate with the stall
        // fallback. Optimum is −0.05 at x = (1/25, 0, 1, 0).
        let i = inst(
            vec![-0.75, 150.0, -0.02, 6.0],
            vec![
                (0.0, f64::INFINITY),
                (0.0, f64::INFINITY),
                (0.0, f64::INFINITY),
                (0.0, f64::INFINITY),
            ],
            vec![
                (
                    vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)],
                    Sense::Le,
                    0.0,
                ),
                (
                    vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)],
                    Sense::Le,
                    0.0,
                ),
                (vec![(2, 1.0)], Sense::Le, 1.0),
            ],
        );
        let r = solve_lp(&i, &[], &LpOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert_relative_eq!(r.objective, -0.05, epsilon = 1e-9);
        assert_certificate(&i, &r);
    }

    #[test]
    fn weak_duality_against_sampled_feasible_points() {
        // minimize x1 − 2x2 + 0.5x3 over a small polytope; every feasible
        // point must score at least the reported optimum.
        let i = inst(
            vec![1.0, -2.0, 0.5],
            vec![(0.0, 3.0), (0.0, 3.0), (0.0, 3.0)],
            vec![
                (vec![(0, 1.0), (1, 1.0), (2, 1.0)], Sense::Le, 5.0),
                (vec![(0, -1.0), (1, 1.0)], Sense::Le, 2.0),
            ],
        );
        let r = solve_lp(&i, &[], &LpOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        let feasible = |x: &[f64]| {
            x.iter().all(|&v| (0.0..=3.0).contains(&v))
                && x[0] + x[1] + x[2] <= 5.0
                && -x[0] + x[1] <= 2.0
        };
        for a in 0..=6 {
            for b in 0..=6 {
                for c in 0..=6 {
                    let x = [a as f64 * 0.5, b as f64 * 0.5, c as f64 * 0.5];
                    if feasible(&x) {
                        let val = i.objective_value(&x);
                        assert!(val >= r.objective - 1e-7, "{x:?} beats the optimum");
                    }
                }
            }
        }
        assert_certificate(&i, &r);
    }

    #[test]
    fn deterministic_repeat_solves() {
        let i = inst(
            vec![-1.0, -3.0, 2.0, 0.0],
            vec![(0.0, 5.0), (0.0, 5.0), (-2.0, 2.0), (0.0, 1.0)],
            vec![
                (vec![(0, 1.0), (1, 2.0), (2, 1.0)], Sense::Le, 8.0),
                (vec![(0, 1.0), (1, -1.0), (3, 4.0)], Sense::Ge, -1.0),
                (vec![(1, 1.0), (2, 1.0), (3, 1.0)], Sense::Eq, 3.0),
            ],
        );
        let a = solve_lp(&i, &[], &LpOptions::default()).unwrap();
        let b = solve_lp(&i, &[], &LpOptions::default()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.x, b.x);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let i = inst(
            vec![-1.0, -1.0],
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0)],
        );
        let opts = LpOptions {
            max_iterations: 1,
            ..LpOptions::default()
        };
        assert!(matches!(
            solve_lp(&i, &[], &opts),
            Err(LpError::IterationLimit { .. })
        ));
    }
}
