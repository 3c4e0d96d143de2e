//! Best-first branch-and-bound over the binary columns of a
//! [`MipInstance`], using the bounded-variable simplex for relaxations.
//!
//! Deliberately plain: no cuts, no heuristics, no presolve. Nodes are
//! explored in bound order (FIFO on ties), branching picks the most
//! fractional binary (lowest column index on ties), and children fix the
//! variable to 0 then 1. The search is single-threaded and fully
//! deterministic; independent solves can run concurrently.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::mip::MipInstance;
use crate::scalar::Scalar;
use crate::simplex::{solve_lp, LpError, LpOptions, LpStatus};

/// Search options. `abs_gap` drives pruning; a node whose relaxation bound
/// comes within `abs_gap` of the incumbent cannot improve it and is cut.
/// `rel_gap` is carried for API symmetry but never loosens the search: the
/// absolute rule already certifies the gap the result reports.
#[derive(Debug, Clone, Copy)]
pub struct BnbOptions<T> {
    pub abs_gap: T,
    pub rel_gap: T,
    pub integer_tol: T,
    /// Maximum number of relaxations solved; 0 = unlimited.
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    pub lp: LpOptions<T>,
}

impl<T: Scalar> Default for BnbOptions<T> {
    fn default() -> Self {
        Self {
            abs_gap: T::c(1e-6),
            rel_gap: T::c(1e-6),
            integer_tol: T::c(1e-6),
            node_limit: 0,
            time_limit: None,
            lp: LpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MipStatus {
    /// Tree exhausted or gap closed: the incumbent is optimal within the
    /// configured gap.
    Optimal,
    /// Reserved for terminations where only the loose relative gap closed.
    GapLimit,
    NodeLimit,
    TimeLimit,
    Infeasible,
}

/// Search outcome. `x`/`objective` describe the incumbent (empty/infinite
/// when none was found), `best_bound` is a certified lower bound on the
/// optimum.
#[derive(Debug, Clone)]
pub struct MipResult<T> {
    pub status: MipStatus,
    pub x: Vec<T>,
    pub objective: T,
    pub best_bound: T,
    pub nodes: usize,
    /// Integral relaxations rejected by the caller's incumbent filter.
    pub filtered: usize,
}

#[derive(Debug, Error)]
pub enum BnbError {
    #[error("relaxation failed at node {node}: {source}")]
    Lp { node: usize, source: LpError },
    #[error("relaxation unbounded at node {node}; MIP instances need finite bounds")]
    Unbounded { node: usize },
}

struct Node<T> {
    bound: T,
    seq: usize,
    depth: usize,
    fixings: Vec<(usize, T, T)>,
    x: Vec<T>,
}

impl<T: Scalar> PartialEq for Node<T> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<T: Scalar> Eq for Node<T> {}
impl<T: Scalar> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Node<T> {
    // BinaryHeap is a max-heap; order reversed so the lowest bound (then
    // the oldest node) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Most fractional binary of `x` within the highest branching tier that
/// still has fractional columns; ties broken by lowest column index.
fn most_fractional_binary<T: Scalar>(
    instance: &MipInstance<T>,
    x: &[T],
    integer_tol: T,
) -> Option<usize> {
    let half = T::c(0.5);
    // (priority, closeness-to-half, index); higher priority wins outright.
    let mut best: Option<(i32, T, usize)> = None;
    for j in instance.binary_cols() {
        let frac_dist = (x[j] - x[j].round()).abs();
        if frac_dist <= integer_tol {
            continue;
        }
        let tier = instance.branch_priority[j];
        let score = (x[j] - half).abs();
        let better = match best {
            None => true,
            Some((bt, bs, _)) => tier > bt || (tier == bt && score < bs),
        };
        if better {
            best = Some((tier, score, j));
        }
    }
    best.map(|(_, _, j)| j)
}

/// Solve `instance` to proven optimality within the configured gap.
pub fn solve_mip<T: Scalar>(
    instance: &MipInstance<T>,
    opts: &BnbOptions<T>,
) -> Result<MipResult<T>, BnbError> {
    solve_mip_with(instance, opts, None, None)
}

/// [`solve_mip`] with an incumbent filter and a node-log sink.
///
/// The filter can veto integral relaxations that fail domain-level
/// feasibility checks (vetoed nodes are dropped and counted). The log gets
/// one line per node: id, parent, depth, bound, fractional binary count,
/// disposition.
pub fn solve_mip_with<T: Scalar>(
    instance: &MipInstance<T>,
    opts: &BnbOptions<T>,
    accept: Option<&dyn Fn(&[T]) -> bool>,
    mut node_log: Option<&mut dyn Write>,
) -> Result<MipResult<T>, BnbError> {
    let started = Instant::now();
    let mut nodes = 0usize;
    let mut filtered = 0usize;
    let mut next_seq = 0usize;
    let mut incumbent: Option<(T, Vec<T>)> = None;
    // Lowest bound among gap-pruned nodes: the honest final bound.
    let mut prune_floor = T::infinity();
    let mut heap: BinaryHeap<Node<T>> = BinaryHeap::new();

    macro_rules! log_node {
        ($id:expr, $parent:expr, $depth:expr, $bound:expr, $frac:expr, $disp:expr) => {
            if let Some(log) = node_log.as_deref_mut() {
                let _ = writeln!(
                    log,
                    "node {} parent {} depth {} bound {} frac {} {}",
                    $id, $parent, $depth, $bound, $frac, $disp
                );
            }
        };
    }

    // Solve one node's relaxation and classify it. Returns Some(node) if it
    // should enter the heap.
    let explore = |seq: usize,
                       parent: isize,
                       depth: usize,
                       fixings: Vec<(usize, T, T)>,
                       nodes: &mut usize,
                       filtered: &mut usize,
                       incumbent: &mut Option<(T, Vec<T>)>,
                       prune_floor: &mut T,
                       node_log: &mut Option<&mut dyn Write>|
     -> Result<Option<Node<T>>, BnbError> {
        *nodes += 1;
        let res = solve_lp(instance, &fixings, &opts.lp)
            .map_err(|source| BnbError::Lp { node: seq, source })?;
        macro_rules! log_node {
            ($bound:expr, $frac:expr, $disp:expr) => {
                if let Some(log) = node_log.as_deref_mut() {
                    let _ = writeln!(
                        log,
                        "node {} parent {} depth {} bound {} frac {} {}",
                        seq, parent, depth, $bound, $frac, $disp
                    );
                }
            };
        }
        match res.status {
            LpStatus::Infeasible => {
                log_node!("inf", 0, "infeasible");
                Ok(None)
            }
            LpStatus::Unbounded => Err(BnbError::Unbounded { node: seq }),
            LpStatus::Optimal => {
                let bound = res.objective;
                let frac = instance
                    .binary_cols()
                    .filter(|&j| (res.x[j] - res.x[j].round()).abs() > opts.integer_tol)
                    .count();
                if let Some((inc_obj, _)) = incumbent {
                    if bound >= *inc_obj - opts.abs_gap {
                        *prune_floor = prune_floor.min(bound);
                        log_node!(bound, frac, "pruned");
                        return Ok(None);
                    }
                }
                if frac == 0 {
                    if accept.map_or(true, |f| f(&res.x)) {
                        log_node!(bound, 0, "incumbent");
                        *incumbent = Some((bound, res.x));
                    } else {
                        *filtered += 1;
                        log_node!(bound, 0, "filtered");
                    }
                    return Ok(None);
                }
                log_node!(bound, frac, "open");
                Ok(Some(Node {
                    bound,
                    seq,
                    depth,
                    fixings,
                    x: res.x,
                }))
            }
        }
    };

    // Root.
    let root = explore(
        next_seq,
        -1,
        0,
        Vec::new(),
        &mut nodes,
        &mut filtered,
        &mut incumbent,
        &mut prune_floor,
        &mut node_log,
    )?;
    next_seq += 1;
    if let Some(node) = root {
        heap.push(node);
    } else if incumbent.is_none() && prune_floor.is_infinite() {
        return Ok(MipResult {
            status: MipStatus::Infeasible,
            x: Vec::new(),
            objective: T::infinity(),
            best_bound: T::infinity(),
            nodes,
            filtered,
        });
    }

    let mut interrupted: Option<MipStatus> = None;
    while let Some(node) = heap.pop() {
        if let Some((inc_obj, _)) = &incumbent {
            if node.bound >= *inc_obj - opts.abs_gap {
                prune_floor = prune_floor.min(node.bound);
                log_node!(node.seq, "-", node.depth, node.bound, "-", "pruned-late");
                continue;
            }
        }
        if opts.node_limit > 0 && nodes >= opts.node_limit {
            prune_floor = prune_floor.min(node.bound);
            interrupted = Some(MipStatus::NodeLimit);
            break;
        }
        if let Some(limit) = opts.time_limit {
            if started.elapsed() >= limit {
                prune_floor = prune_floor.min(node.bound);
                interrupted = Some(MipStatus::TimeLimit);
                break;
            }
        }
        let branch = most_fractional_binary(instance, &node.x, opts.integer_tol)
            .expect("open node must have a fractional binary");
        for fix_to in [T::zero(), T::one()] {
            let mut fixings = node.fixings.clone();
            fixings.push((branch, fix_to, fix_to));
            let child = explore(
                next_seq,
                node.seq as isize,
                node.depth + 1,
                fixings,
                &mut nodes,
                &mut filtered,
                &mut incumbent,
                &mut prune_floor,
                &mut node_log,
            )?;
            next_seq += 1;
            if let Some(c) = child {
                heap.push(c);
            }
        }
    }

    let open_floor = heap
        .iter()
        .map(|n| n.bound)
        .fold(T::infinity(), T::min)
        .min(prune_floor);
    match incumbent {
        Some((objective, x)) => {
            let best_bound = open_floor.min(objective);
            Ok(MipResult {
                status: interrupted.unwrap_or(MipStatus::Optimal),
                x,
                objective,
                best_bound,
                nodes,
                filtered,
            })
        }
        None => Ok(MipResult {
            status: interrupted.unwrap_or(MipStatus::Infeasible),
            x: Vec::new(),
            objective: T::infinity(),
            best_bound: open_floor,
            nodes,
            filtered,
        }),
    }
}
