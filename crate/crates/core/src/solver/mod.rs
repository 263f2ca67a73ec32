//! LP and MILP solving.
//!
//! LP relaxations are scaled and solved by a bounded-variable simplex
//! backend (`microlp`). [`solve_milp`] runs branch-and-bound over the binary
//! variables on top of it; [`brute_force_binaries`] enumerates every binary
//! assignment and serves as an oracle for tiny models.

mod engine;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::rc::Rc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builder::{structure_violations, StructureViolation, VariableIndex};
use crate::lp::{evaluate, Evaluation, LpError, MilpModel, Sense, VarId, VarKind};
use crate::model_data::Instance;
use engine::{LpEngine, LpResult};

/// Largest binary count [`brute_force_binaries`] accepts by default.
pub const BRUTE_FORCE_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BranchRule {
    #[default]
    MostFractional,
    FirstIndex,
    /// Branch on the variable whose observed per-unit bound changes predict
    /// the largest improvement in both children.
    Pseudocost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NodeOrder {
    #[default]
    BestBound,
    DepthFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub feasibility_tol: f64,
    pub integrality_tol: f64,
    /// Relative gap `(incumbent - bound) / max(1, |incumbent|)` at which the
    /// search stops.
    pub mip_gap: f64,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub branching: BranchRule,
    pub node_order: NodeOrder,
    /// Run the rounding heuristic every this many nodes (0 = root only).
    pub heuristic_interval: u64,
    pub scaling: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            integrality_tol: 1e-6,
            mip_gap: 1e-6,
            node_limit: None,
            time_limit: None,
            branching: BranchRule::MostFractional,
            node_order: NodeOrder::BestBound,
            heuristic_interval: 50,
            scaling: true,
        }
    }
}

impl SolveOptions {
    fn check(&self) -> Result<(), SolveError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.feasibility_tol) || !positive(self.integrality_tol) {
            return Err(SolveError::InvalidOptions("tolerances must be positive".into()));
        }
        if self.integrality_tol >= 0.5 {
            return Err(SolveError::InvalidOptions("integrality tolerance must be below 0.5".into()));
        }
        if !self.mip_gap.is_finite() || self.mip_gap < 0.0 {
            return Err(SolveError::InvalidOptions("mip gap must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// Proven optimal within the gap target.
    Optimal,
    /// A limit stopped the search with an incumbent in hand.
    FeasibleGap,
    Infeasible,
    Unbounded,
    /// A limit stopped the search before any incumbent was found.
    LimitHit,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::FeasibleGap)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleGap => "feasible-gap",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::LimitHit => "limit-hit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    /// Values indexed by variable id; empty without an incumbent.
    pub values: Vec<f64>,
    /// Incumbent objective, `+inf` without an incumbent.
    pub objective: f64,
    /// Best proven lower bound.
    pub bound: f64,
    /// Relative gap, `+inf` without an incumbent.
    pub gap: f64,
    pub nodes: u64,
    pub wall_time: Duration,
}

impl Solution {
    fn without_incumbent(status: SolveStatus, bound: f64, nodes: u64, started: Instant) -> Self {
        Self {
            status,
            values: Vec::new(),
            objective: f64::INFINITY,
            bound,
            gap: f64::INFINITY,
            nodes,
            wall_time: started.elapsed(),
        }
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("invalid solve options: {0}")]
    InvalidOptions(String),
    #[error("model has {count} binaries, enumeration cap is {cap}")]
    TooManyBinaries { count: usize, cap: usize },
    #[error("LP backend failure: {0}")]
    Numerical(String),
}

/// One branch-and-bound log record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeLog {
    pub node: u64,
    pub depth: u32,
    pub bound: f64,
    pub incumbent: f64,
    pub gap: f64,
}

impl fmt::Display for NodeLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node={} depth={} bound={:.9e} incumbent={:.9e} gap={:.3e}",
            self.node, self.depth, self.bound, self.incumbent, self.gap
        )
    }
}

fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() {
        return f64::INFINITY;
    }
    ((incumbent - bound) / incumbent.abs().max(1.0)).max(0.0)
}

/// Solves the continuous relaxation (binaries treated as `[0, 1]`).
pub fn solve_lp(model: &MilpModel, opts: &SolveOptions) -> Result<Solution, SolveError> {
    opts.check()?;
    let started = Instant::now();
    let engine = LpEngine::new(model, opts.scaling);
    match engine.solve(opts.time_limit) {
        LpResult::Optimal(sol) => {
            let values = engine.values(&sol);
            let objective = model.objective_value(&values);
            Ok(Solution {
                status: SolveStatus::Optimal,
                values,
                objective,
                bound: objective,
                gap: 0.0,
                nodes: 1,
                wall_time: started.elapsed(),
            })
        }
        LpResult::Infeasible => Ok(Solution::without_incumbent(
            SolveStatus::Infeasible,
            f64::INFINITY,
            1,
            started,
        )),
        LpResult::Unbounded => Ok(Solution::without_incumbent(
            SolveStatus::Unbounded,
            f64::NEG_INFINITY,
            1,
            started,
        )),
        LpResult::Interrupted => Ok(Solution::without_incumbent(
            SolveStatus::LimitHit,
            f64::NEG_INFINITY,
            1,
            started,
        )),
        LpResult::Failed(msg) => Err(SolveError::Numerical(msg)),
    }
}

struct Node {
    id: u64,
    depth: u32,
    bound: f64,
    parent: Rc<microlp::Solution>,
    fix: (usize, f64),
    /// Distance the branching variable moves from its parent LP value.
    step: f64,
}

/// Heap key: lower bound first, then deeper, then older.
struct Ranked(Node);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap pops the maximum, so every key is reversed
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then(self.0.depth.cmp(&other.0.depth))
            .then(other.0.id.cmp(&self.0.id))
    }
}

enum Frontier {
    Best(BinaryHeap<Ranked>),
    Depth(Vec<Node>),
}

impl Frontier {
    fn push(&mut self, n: Node) {
        match self {
            Frontier::Best(h) => h.push(Ranked(n)),
            Frontier::Depth(s) => s.push(n),
        }
    }
    fn pop(&mut self) -> Option<Node> {
        match self {
            Frontier::Best(h) => h.pop().map(|r| r.0),
            Frontier::Depth(s) => s.pop(),
        }
    }
    fn min_bound(&self) -> f64 {
        match self {
            Frontier::Best(h) => h.peek().map_or(f64::INFINITY, |r| r.0.bound),
            Frontier::Depth(s) => s.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min),
        }
    }
    fn is_empty(&self) -> bool {
        match self {
            Frontier::Best(h) => h.is_empty(),
            Frontier::Depth(s) => s.is_empty(),
        }
    }
}

struct Search<'a> {
    model: &'a MilpModel,
    opts: &'a SolveOptions,
    binaries: Vec<usize>,
    /// Rows touching each variable, as `(row index, coefficient)`.
    columns: Vec<Vec<(usize, f64)>>,
    incumbent: Option<(f64, Vec<f64>)>,
    /// Per-variable `[down, up]` sums of bound change per unit step, and
    /// observation counts.
    pseudo: Vec<[(f64, u32); 2]>,
}

impl<'a> Search<'a> {
    fn new(model: &'a MilpModel, opts: &'a SolveOptions) -> Self {
        let mut columns = vec![Vec::new(); model.num_vars()];
        for (r, row) in model.rows().iter().enumerate() {
            for &(v, a) in &row.terms {
                columns[v.0].push((r, a));
            }
        }
        Self {
            model,
            opts,
            binaries: model.binaries().map(|v| v.0).collect(),
            columns,
            incumbent: None,
            pseudo: vec![[(0.0, 0); 2]; model.num_vars()],
        }
    }

    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |i| i.0)
    }

    fn cutoff(&self) -> f64 {
        let inc = self.incumbent_value();
        if inc.is_finite() {
            inc - self.opts.mip_gap * inc.abs().max(1.0) - 1e-9 * inc.abs().max(1.0)
        } else {
            f64::INFINITY
        }
    }

    fn is_fractional(&self, x: f64) -> bool {
        (x - x.round()).abs() > self.opts.integrality_tol
    }

    fn record_pseudocost(&mut self, j: usize, up: bool, step: f64, change: f64) {
        if step > 0.0 && change.is_finite() {
            let e = &mut self.pseudo[j][usize::from(up)];
            e.0 += change.max(0.0) / step;
            e.1 += 1;
        }
    }

    /// Pseudocost score of branching on `j` at value `x`; unobserved
    /// directions use the mean over observed variables.
    fn pseudocost_score(&self, j: usize, x: f64, mean: [f64; 2]) -> f64 {
        let per_unit = |dir: usize| {
            let (sum, n) = self.pseudo[j][dir];
            if n > 0 {
                sum / n as f64
            } else {
                mean[dir]
            }
        };
        let down = per_unit(0) * (x - x.floor());
        let up = per_unit(1) * (x.ceil() - x);
        down.max(1e-6) * up.max(1e-6)
    }

    fn pseudocost_means(&self) -> [f64; 2] {
        let mut out = [1.0; 2];
        for (dir, slot) in out.iter_mut().enumerate() {
            let (sum, n) = self
                .pseudo
                .iter()
                .filter(|p| p[dir].1 > 0)
                .fold((0.0, 0u32), |(s, n), p| (s + p[dir].0 / p[dir].1 as f64, n + 1));
            if n > 0 {
                *slot = sum / n as f64;
            }
        }
        out
    }

    fn branch_variable(&self, values: &[f64]) -> Option<usize> {
        let mean = match self.opts.branching {
            BranchRule::Pseudocost => self.pseudocost_means(),
            _ => [1.0; 2],
        };
        let mut best: Option<(i32, f64, usize)> = None;
        for &j in &self.binaries {
            let x = values[j];
            if !self.is_fractional(x) {
                continue;
            }
            let prio = self.model.branch_priority(VarId(j));
            let score = match self.opts.branching {
                BranchRule::MostFractional => (x - x.floor()).min(x.ceil() - x),
                BranchRule::FirstIndex => 0.0,
                BranchRule::Pseudocost => self.pseudocost_score(j, x, mean),
            };
            let better = match best {
                None => true,
                Some((bp, bs, _)) => prio > bp || (prio == bp && score > bs),
            };
            if better {
                best = Some((prio, score, j));
            }
        }
        best.map(|b| b.2)
    }

    /// Accepts `values` as the new incumbent when it is feasible and better.
    fn offer(&mut self, mut values: Vec<f64>) -> bool {
        for &j in &self.binaries {
            values[j] = values[j].round();
        }
        let eval = match evaluate(self.model, &values, self.opts.feasibility_tol) {
            Ok(e) => e,
            Err(_) => return false,
        };
        if !eval.is_feasible() || eval.objective >= self.incumbent_value() {
            return false;
        }
        log::debug!("new incumbent {:.9e}", eval.objective);
        self.incumbent = Some((eval.objective, values));
        true
    }

    /// Solves the LP with every binary fixed as in `fixed`.
    fn fixed_lp(&self, fixed: &[f64]) -> Option<Vec<f64>> {
        let mut bounds: Vec<(f64, f64)> = self
            .model
            .variables()
            .iter()
            .map(|v| (v.lower, v.upper))
            .collect();
        for &j in &self.binaries {
            bounds[j] = (fixed[j], fixed[j]);
        }
        let engine = LpEngine::with_bounds(self.model, self.opts.scaling, &bounds);
        match engine.solve(self.opts.time_limit) {
            LpResult::Optimal(sol) => {
                let mut v = engine.values(&sol);
                for &j in &self.binaries {
                    v[j] = fixed[j];
                }
                Some(v)
            }
            _ => None,
        }
    }

    /// Whether lowering binary `j` from 1 to 0 keeps every row it appears in
    /// satisfied at `values`.
    fn can_drop(&self, j: usize, values: &[f64]) -> bool {
        let tol = self.opts.feasibility_tol;
        self.columns[j].iter().all(|&(r, a)| {
            let row = &self.model.rows()[r];
            let lhs = row.activity(values) - a;
            let scale = row.rhs.abs().max(1.0);
            match row.sense {
                Sense::Le => lhs <= row.rhs + tol * scale,
                Sense::Ge => lhs >= row.rhs - tol * scale,
                Sense::Eq => (lhs - row.rhs).abs() <= tol * scale,
            }
        })
    }

    /// Closes binaries that cost something and carry nothing.
    fn drop_pass(&self, values: &mut [f64]) -> bool {
        let mut changed = false;
        for &j in &self.binaries {
            if values[j] > 0.5 && self.model.objective()[j] > 0.0 && self.can_drop(j, values) {
                values[j] = 0.0;
                changed = true;
            }
        }
        changed
    }

    /// Rounds the binaries of an LP point, re-solves for the continuous part
    /// and then closes idle binaries.
    fn rounding_heuristic(&mut self, lp_values: &[f64]) {
        let tol = self.opts.integrality_tol;
        let round_up = |x: f64| if x > tol { 1.0 } else { 0.0 };
        let nearest = |x: f64| x.round();
        for rule in [&round_up as &dyn Fn(f64) -> f64, &nearest] {
            let mut fixed = lp_values.to_vec();
            for &j in &self.binaries {
                fixed[j] = rule(lp_values[j]);
            }
            let Some(mut v) = self.fixed_lp(&fixed) else {
                continue;
            };
            for _ in 0..3 {
                if !self.drop_pass(&mut v) {
                    break;
                }
                match self.fixed_lp(&v) {
                    Some(next) => v = next,
                    None => break,
                }
            }
            self.offer(v);
            return;
        }
    }
}

/// Branch-and-bound over the binary variables.
/// Log line with the global bound: the best open, gap-pruned or incumbent
/// value, falling back to `bound` while none of those is finite.
fn node_log(node: u64, depth: u32, bound: f64, frontier: &Frontier, gap_pruned: f64, incumbent: f64) -> NodeLog {
    let global = frontier.min_bound().min(gap_pruned).min(incumbent);
    let global = if global.is_finite() { global } else { bound };
    NodeLog {
        node,
        depth,
        bound: global,
        incumbent,
        gap: relative_gap(incumbent, global),
    }
}

pub fn solve_milp(model: &MilpModel, opts: &SolveOptions) -> Result<Solution, SolveError> {
    solve_milp_logged(model, opts, &mut |_| {})
}

/// [`solve_milp`] reporting one [`NodeLog`] per evaluated node.
pub fn solve_milp_logged(
    model: &MilpModel,
    opts: &SolveOptions,
    log: &mut dyn FnMut(&NodeLog),
) -> Result<Solution, SolveError> {
    opts.check()?;
    let started = Instant::now();
    let deadline = opts.time_limit.map(|d| started + d);
    let engine = LpEngine::new(model, opts.scaling);
    let mut search = Search::new(model, opts);

    let root = match engine.solve(opts.time_limit) {
        LpResult::Optimal(sol) => sol,
        LpResult::Infeasible => {
            return Ok(Solution::without_incumbent(SolveStatus::Infeasible, f64::INFINITY, 1, started))
        }
        LpResult::Unbounded => {
            return Ok(Solution::without_incumbent(SolveStatus::Unbounded, f64::NEG_INFINITY, 1, started))
        }
        LpResult::Interrupted => {
            return Ok(Solution::without_incumbent(SolveStatus::LimitHit, f64::NEG_INFINITY, 1, started))
        }
        LpResult::Failed(msg) => return Err(SolveError::Numerical(msg)),
    };

    let mut frontier = match opts.node_order {
        NodeOrder::BestBound => Frontier::Best(BinaryHeap::new()),
        NodeOrder::DepthFirst => Frontier::Depth(Vec::new()),
    };
    let mut next_id = 1u64;
    let mut nodes = 0u64;
    // smallest bound among nodes discarded only because of the gap target
    let mut gap_pruned = f64::INFINITY;
    let mut limit_hit = false;
    let mut pending: VecDeque<(microlp::Solution, u32)> = VecDeque::from([(root, 0)]);

    loop {
        // evaluate LPs already solved (the root, or a freshly fixed child)
        while let Some((sol, depth)) = pending.pop_front() {
            nodes += 1;
            let bound = engine.bound(&sol);
            if bound >= search.cutoff() {
                if bound < search.incumbent_value() {
                    gap_pruned = gap_pruned.min(bound);
                }
                log(&node_log(nodes, depth, bound, &frontier, gap_pruned, search.incumbent_value()));
                continue;
            }
            let values = engine.values(&sol);
            let branch = search.branch_variable(&values);
            let heuristic_due = nodes == 1
                || (opts.heuristic_interval > 0 && nodes % opts.heuristic_interval == 0);
            match branch {
                None => {
                    if !search.offer(values.clone()) {
                        let mut snapped = values.clone();
                        for &j in &search.binaries {
                            snapped[j] = snapped[j].round();
                        }
                        if let Some(v) = search.fixed_lp(&snapped) {
                            search.offer(v);
                        }
                    }
                }
                Some(j) => {
                    if heuristic_due && !search.binaries.is_empty() {
                        search.rounding_heuristic(&values);
                    }
                    let first = if values[j] >= 0.5 { 1.0 } else { 0.0 };
                    let parent = Rc::new(sol);
                    let children = [first, 1.0 - first];
                    // depth-first pops the last pushed child first
                    let order: Vec<f64> = match opts.node_order {
                        NodeOrder::BestBound => children.to_vec(),
                        NodeOrder::DepthFirst => children.iter().rev().copied().collect(),
                    };
                    for value in order {
                        frontier.push(Node {
                            id: next_id,
                            depth: depth + 1,
                            bound,
                            parent: Rc::clone(&parent),
                            fix: (j, value),
                            step: (value - values[j]).abs(),
                        });
                        next_id += 1;
                    }
                }
            }
            log(&node_log(nodes, depth, bound, &frontier, gap_pruned, search.incumbent_value()));
        }

        let limit = opts.node_limit.is_some_and(|l| nodes >= l)
            || deadline.is_some_and(|d| Instant::now() >= d);
        let Some(node) = frontier.pop() else { break };
        if node.bound >= search.cutoff() {
            if node.bound < search.incumbent_value() {
                gap_pruned = gap_pruned.min(node.bound);
            }
            continue;
        }
        if limit {
            frontier.push(node);
            limit_hit = true;
            break;
        }
        let parent = Rc::try_unwrap(node.parent).unwrap_or_else(|rc| (*rc).clone());
        let (j, value) = node.fix;
        match engine.fix(parent, j, value) {
            LpResult::Optimal(sol) => {
                let change = engine.bound(&sol) - node.bound;
                search.record_pseudocost(j, value > 0.5, node.step, change);
                pending.push_back((sol, node.depth));
            }
            LpResult::Infeasible => {
                nodes += 1;
                let inc = search.incumbent_value();
                log(&node_log(nodes, node.depth, node.bound, &frontier, gap_pruned, inc));
            }
            LpResult::Unbounded => {
                return Ok(Solution::without_incumbent(
                    SolveStatus::Unbounded,
                    f64::NEG_INFINITY,
                    nodes + 1,
                    started,
                ))
            }
            LpResult::Interrupted => {
                limit_hit = true;
                break;
            }
            LpResult::Failed(msg) => return Err(SolveError::Numerical(msg)),
        }
    }

    let open = if frontier.is_empty() && !limit_hit {
        f64::INFINITY
    } else {
        frontier.min_bound()
    };
    match search.incumbent.take() {
        Some((objective, values)) => {
            let bound = objective.min(open).min(gap_pruned);
            let gap = relative_gap(objective, bound);
            Ok(Solution {
                status: if limit_hit && gap > opts.mip_gap {
                    SolveStatus::FeasibleGap
                } else {
                    SolveStatus::Optimal
                },
                values,
                objective,
                bound,
                gap,
                nodes,
                wall_time: started.elapsed(),
            })
        }
        None if limit_hit => Ok(Solution::without_incumbent(
            SolveStatus::LimitHit,
            open.min(gap_pruned),
            nodes,
            started,
        )),
        None => Ok(Solution::without_incumbent(SolveStatus::Infeasible, f64::INFINITY, nodes, started)),
    }
}

/// Enumerates every binary assignment, solving the LP over the continuous
/// variables for each, and keeps the best.
pub fn brute_force_binaries(
    model: &MilpModel,
    opts: &SolveOptions,
    cap: usize,
) -> Result<Solution, SolveError> {
    opts.check()?;
    let started = Instant::now();
    let binaries: Vec<usize> = model.binaries().map(|v| v.0).collect();
    if binaries.len() > cap {
        return Err(SolveError::TooManyBinaries {
            count: binaries.len(),
            cap,
        });
    }
    let base: Vec<(f64, f64)> = model.variables().iter().map(|v| (v.lower, v.upper)).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut solved = 0u64;
    for mask in 0u64..(1u64 << binaries.len()) {
        let mut bounds = base.clone();
        let mut admissible = true;
        for (bit, &j) in binaries.iter().enumerate() {
            let value = ((mask >> bit) & 1) as f64;
            admissible &= value >= base[j].0 && value <= base[j].1;
            bounds[j] = (value, value);
        }
        if !admissible {
            continue;
        }
        solved += 1;
        let engine = LpEngine::with_bounds(model, opts.scaling, &bounds);
        match engine.solve(opts.time_limit) {
            LpResult::Optimal(sol) => {
                let mut values = engine.values(&sol);
                for (bit, &j) in binaries.iter().enumerate() {
                    values[j] = ((mask >> bit) & 1) as f64;
                }
                let objective = model.objective_value(&values);
                if best.as_ref().map_or(true, |b| objective < b.0) {
                    best = Some((objective, values));
                }
            }
            LpResult::Infeasible => {}
            LpResult::Unbounded => {
                return Ok(Solution::without_incumbent(
                    SolveStatus::Unbounded,
                    f64::NEG_INFINITY,
                    solved,
                    started,
                ))
            }
            LpResult::Interrupted => {
                return Ok(Solution::without_incumbent(
                    SolveStatus::LimitHit,
                    f64::NEG_INFINITY,
                    solved,
                    started,
                ))
            }
            LpResult::Failed(msg) => return Err(SolveError::Numerical(msg)),
        }
    }
    Ok(match best {
        Some((objective, values)) => Solution {
            status: SolveStatus::Optimal,
            values,
            objective,
            bound: objective,
            gap: 0.0,
            nodes: solved,
            wall_time: started.elapsed(),
        },
        None => Solution::without_incumbent(SolveStatus::Infeasible, f64::INFINITY, solved, started),
    })
}

/// Row, bound and integrality checks plus, when the instance and index are
/// supplied, the planning-rule checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub evaluation: Evaluation,
    pub structure: Vec<StructureViolation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.evaluation.is_feasible() && self.structure.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.evaluation.row_violations.len()
            + self.evaluation.bound_violations.len()
            + self.evaluation.integrality_violations.len()
            + self.structure.len()
    }
}

pub fn check_solution(
    model: &MilpModel,
    values: &[f64],
    tol: f64,
    domain: Option<(&Instance, &VariableIndex)>,
) -> Result<ValidationReport, LpError> {
    let evaluation = evaluate(model, values, tol)?;
    let structure = match domain {
        Some((inst, index)) => structure_violations(inst, index, values, tol),
        None => Vec::new(),
    };
    Ok(ValidationReport {
        evaluation,
        structure,
    })
}

/// Number of binary variables of a model.
pub fn count_binaries(model: &MilpModel) -> usize {
    model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .count()
}

#[cfg(test)]
mod tests;
