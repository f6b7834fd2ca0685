//! Spatial branch-and-bound over the McCormick relaxation.
//!
//! Nodes are explored best-bound first. Each node is tightened by interval
//! propagation, bounded by its LP relaxation and then either pruned or split,
//! on a fractional orientation binary when there is one and otherwise on a
//! coordinate of the worst-approximated product. The LP point's coordinates
//! always yield a candidate configuration, so the incumbent improves as the
//! relaxation tightens.

use crate::exact::{self, AlgebraicExpr, ExactError};
use crate::geometry::{min_triangle_area, Configuration, Point};
use crate::model::ModelInstance;
use crate::relax::{xc, yc, BinDomain, Interval, LpPoint, NodeBounds, Relaxation};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Binaries with LP value this close to 0 or 1 count as integral.
const INTEGRALITY_TOL: f64 = 1e-6;
/// Product violations below this do not justify a spatial split.
const VIOLATION_TOL: f64 = 1e-10;
const SPLIT_OFFSET: f64 = 0.2;
const TRACE_EVERY: u64 = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BnbError {
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
    #[error("warm start has {got} points, model has {expected}")]
    WarmStartSize { expected: usize, got: usize },
    #[error("the root relaxation is infeasible and no warm start was given")]
    NoFeasiblePoint,
    #[error("certificate is not gap-closed")]
    NotClosed,
    #[error("node is prunable, nothing to branch on")]
    Prunable,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    /// Absolute gap at which the search stops.
    pub epsilon: f64,
    /// Optional relative gap `(z_ub - z_lb) / z_ub` stopping rule.
    pub relative_gap: Option<f64>,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    pub workers: usize,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            epsilon: 1e-6,
            relative_gap: None,
            time_limit: None,
            node_limit: None,
            workers: 1,
            seed: 0,
        }
    }
}

impl SearchParams {
    fn validate(&self) -> Result<(), BnbError> {
        if !(self.epsilon > 0.0) {
            return Err(BnbError::InvalidParams(format!("epsilon {}", self.epsilon)));
        }
        if self.workers == 0 {
            return Err(BnbError::InvalidParams("zero workers".into()));
        }
        if let Some(r) = self.relative_gap {
            if !(r > 0.0) {
                return Err(BnbError::InvalidParams(format!("relative gap {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GapClosed,
    NodeLimit,
    TimeLimit,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::GapClosed => "gap-closed",
            Termination::NodeLimit => "node-limit",
            Termination::TimeLimit => "time-limit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub wall_time: f64,
    pub nodes: u64,
    pub z_lb: f64,
    pub z_ub: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnBCertificate {
    pub incumbent: Configuration,
    pub z_lb: f64,
    pub z_ub: f64,
    pub gap: f64,
    pub nodes: u64,
    pub wall_time: Duration,
    pub termination: Termination,
    pub trace: Vec<TracePoint>,
}

impl BnBCertificate {
    pub fn is_closed(&self) -> bool {
        self.termination == Termination::GapClosed
    }

    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "wall_time,nodes,z_lb,z_ub")?;
        for p in &self.trace {
            writeln!(out, "{:.6},{},{:.12},{:.12}", p.wall_time, p.nodes, p.z_lb, p.z_ub)?;
        }
        Ok(())
    }
}

/// How to split a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchDecision {
    /// Orientation binary of the triangle with this model index.
    Binary(usize),
    /// Coordinate index (see [`xc`], [`yc`]) and split value.
    Spatial { coord: usize, split: f64 },
}

/// Branching rule: the most fractional free binary, else the wider factor
/// of the product with the largest envelope violation, split at its LP value
/// kept at least a fifth of the width away from either end.
pub fn select_branch(
    relax: &Relaxation,
    node: &NodeBounds,
    lp: &LpPoint,
) -> Result<BranchDecision, BnbError> {
    let mut best: Option<(usize, f64)> = None;
    for (t, d) in node.binary.iter().enumerate() {
        if *d != BinDomain::Both {
            continue;
        }
        let v = lp.binary[t];
        if v <= INTEGRALITY_TOL || v >= 1.0 - INTEGRALITY_TOL {
            continue;
        }
        let dist = (v - 0.5).abs();
        if best.is_none_or(|(_, b)| dist < b) {
            best = Some((t, dist));
        }
    }
    if let Some((t, _)) = best {
        return Ok(BranchDecision::Binary(t));
    }
    let mut worst: Option<(usize, f64)> = None;
    for p in &relax.products {
        let (x, y) = (node.coords[xc(p.i)], node.coords[yc(p.j)]);
        if x.is_degenerate() || y.is_degenerate() {
            continue;
        }
        let viol = (lp.w[p.index] - lp.coords[xc(p.i)] * lp.coords[yc(p.j)]).abs();
        if viol > VIOLATION_TOL && worst.is_none_or(|(_, v)| viol > v) {
            let c = if x.width() >= y.width() { xc(p.i) } else { yc(p.j) };
            worst = Some((c, viol));
        }
    }
    let coord = match worst {
        Some((c, _)) => c,
        None => {
            // relaxation is exact at the LP point; bisect the widest coordinate
            let (c, iv) = node
                .coords
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.width().total_cmp(&b.1.width()).then(b.0.cmp(&a.0)))
                .expect("nonempty");
            if iv.is_degenerate() {
                return Err(BnbError::Prunable);
            }
            return Ok(BranchDecision::Spatial {
                coord: c,
                split: iv.mid(),
            });
        }
    };
    let iv = node.coords[coord];
    Ok(BranchDecision::Spatial {
        coord,
        split: clamp_split(iv, lp.coords[coord]),
    })
}

/// Split value clamped into `[lo + 0.2 w, hi - 0.2 w]`.
pub fn clamp_split(iv: Interval, value: f64) -> f64 {
    let w = iv.width();
    value.clamp(iv.lo + SPLIT_OFFSET * w, iv.hi - SPLIT_OFFSET * w)
}

fn children(node: &NodeBounds, decision: BranchDecision) -> [NodeBounds; 2] {
    let mut a = node.clone();
    let mut b = node.clone();
    match decision {
        BranchDecision::Binary(t) => {
            a.binary[t] = BinDomain::Zero;
            b.binary[t] = BinDomain::One;
        }
        BranchDecision::Spatial { coord, split } => {
            a.coords[coord].hi = split;
            b.coords[coord].lo = split;
        }
    }
    [a, b]
}

struct OpenNode {
    bound: f64,
    seq: u64,
    bounds: NodeBounds,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenNode {}

impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenNode {
    // max-heap: larger bound first, then older node first
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Shared {
    open: BinaryHeap<OpenNode>,
    seq: u64,
    /// Nodes currently being processed by some worker.
    active: usize,
    nodes: u64,
    z_lb: f64,
    incumbent: Configuration,
    /// Largest bound among nodes discarded by bound.
    pruned_max: f64,
    /// Bounds of nodes being processed, by worker.
    in_flight: Vec<Option<f64>>,
    z_ub: f64,
    trace: Vec<TracePoint>,
    stop: Option<Termination>,
}

impl Shared {
    fn current_ub(&self) -> f64 {
        let mut ub = self.z_lb.max(self.pruned_max);
        if let Some(top) = self.open.peek() {
            ub = ub.max(top.bound);
        }
        for b in self.in_flight.iter().flatten() {
            ub = ub.max(*b);
        }
        ub
    }

    fn refresh_ub(&mut self) {
        self.z_ub = self.z_ub.min(self.current_ub()).max(self.z_lb);
    }

    fn record(&mut self, start: Instant) {
        self.trace.push(TracePoint {
            wall_time: start.elapsed().as_secs_f64(),
            nodes: self.nodes,
            z_lb: self.z_lb,
            z_ub: self.z_ub,
        });
    }

    fn offer(&mut self, config: Configuration, value: f64) -> bool {
        if value > self.z_lb {
            self.z_lb = value;
            self.incumbent = config;
            true
        } else {
            false
        }
    }

    fn push(&mut self, bound: f64, bounds: NodeBounds) {
        self.seq += 1;
        self.open.push(OpenNode {
            bound,
            seq: self.seq,
            bounds,
        });
    }
}

/// Outcome of processing one node.
enum Processed {
    Pruned { bound: f64 },
    Infeasible,
    Branched { bound: f64, kids: [NodeBounds; 2] },
}

fn config_from_coords(coords: &[f64]) -> Configuration {
    let pts: Vec<Point> = coords
        .chunks(2)
        .map(|c| (c[0].clamp(0.0, 1.0), c[1].clamp(0.0, 1.0)))
        .collect();
    Configuration::new(pts).expect("clamped points")
}

fn process(
    relax: &Relaxation,
    mut nb: NodeBounds,
    parent_bound: f64,
    z_lb: f64,
    epsilon: f64,
    candidate: &mut Option<(Configuration, f64)>,
) -> Processed {
    nb.z.lo = z_lb;
    nb.z.hi = nb.z.hi.min(parent_bound);
    let nb = relax.fbbt(&nb);
    if nb.infeasible {
        return Processed::Infeasible;
    }
    let point = match relax.solve_node(&nb) {
        Ok(Some(p)) => p,
        Ok(None) => return Processed::Infeasible,
        Err(_) => {
            // no usable relaxation here: split without tightening the bound
            let bound = parent_bound.min(nb.z.hi);
            return match widest_split(&nb) {
                Some(d) => Processed::Branched {
                    bound,
                    kids: children(&nb, d),
                },
                None => Processed::Pruned { bound },
            };
        }
    };
    let bound = point.bound.min(nb.z.hi).min(parent_bound);
    let config = config_from_coords(&point.coords);
    let (value, _) = min_triangle_area(&config);
    *candidate = Some((config, value));
    if bound <= z_lb.max(value) + epsilon {
        return Processed::Pruned { bound };
    }
    match select_branch(relax, &nb, &point) {
        Ok(d) => Processed::Branched {
            bound,
            kids: children(&nb, d),
        },
        Err(_) => Processed::Pruned { bound },
    }
}

fn widest_split(nb: &NodeBounds) -> Option<BranchDecision> {
    if let Some(t) = nb.binary.iter().position(|d| *d == BinDomain::Both) {
        return Some(BranchDecision::Binary(t));
    }
    let (c, iv) = nb
        .coords
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.width().total_cmp(&b.1.width()).then(b.0.cmp(&a.0)))?;
    if iv.is_degenerate() {
        None
    } else {
        Some(BranchDecision::Spatial {
            coord: c,
            split: iv.mid(),
        })
    }
}

/// Runs the search on `model`.
pub fn solve(
    model: &ModelInstance,
    params: &SearchParams,
    warm_start: Option<&Configuration>,
) -> Result<BnBCertificate, BnbError> {
    params.validate()?;
    let start = Instant::now();
    let relax = Relaxation::new(model);
    let root = NodeBounds::root(model);
    let mut incumbent: Option<(Configuration, f64)> = None;
    if let Some(ws) = warm_start {
        if ws.n() != model.n {
            return Err(BnbError::WarmStartSize {
                expected: model.n,
                got: ws.n(),
            });
        }
        incumbent = Some((ws.clone(), min_triangle_area(ws).0));
    }
    if incumbent.is_none() {
        // seed with the root LP projection
        let nb = relax.fbbt(&root);
        if nb.infeasible {
            return Err(BnbError::NoFeasiblePoint);
        }
        match relax.solve_node(&nb) {
            Ok(Some(p)) => {
                let config = config_from_coords(&p.coords);
                let v = min_triangle_area(&config).0;
                incumbent = Some((config, v));
            }
            _ => {
                let pts: Vec<f64> = root.coords.iter().map(|iv| iv.mid()).collect();
                let config = config_from_coords(&pts);
                let v = min_triangle_area(&config).0;
                incumbent = Some((config, v));
            }
        }
    }
    let (config, z_lb) = incumbent.expect("seeded");
    let z_top = model.z_upper();
    let mut shared = Shared {
        open: BinaryHeap::new(),
        seq: 0,
        active: 0,
        nodes: 0,
        z_lb,
        incumbent: config,
        pruned_max: f64::NEG_INFINITY,
        in_flight: vec![None; params.workers],
        z_ub: z_top.max(z_lb),
        trace: Vec::new(),
        stop: None,
    };
    shared.push(z_top, root);
    shared.refresh_ub();
    shared.record(start);
    let state = Mutex::new(shared);
    let cv = Condvar::new();
    if params.workers == 1 {
        worker(0, &relax, params, &state, &cv, start);
    } else {
        std::thread::scope(|s| {
            for id in 0..params.workers {
                let (relax, state, cv) = (&relax, &state, &cv);
                s.spawn(move || worker(id, relax, params, state, cv, start));
            }
        });
    }
    let mut sh = state.into_inner().expect("worker panicked");
    sh.refresh_ub();
    let termination = sh.stop.unwrap_or(Termination::GapClosed);
    if termination == Termination::GapClosed && sh.open.is_empty() {
        sh.z_ub = sh.z_ub.min(sh.z_lb.max(sh.pruned_max)).max(sh.z_lb);
    }
    sh.record(start);
    Ok(BnBCertificate {
        incumbent: sh.incumbent,
        z_lb: sh.z_lb,
        z_ub: sh.z_ub,
        gap: sh.z_ub - sh.z_lb,
        nodes: sh.nodes,
        wall_time: start.elapsed(),
        termination,
        trace: sh.trace,
    })
}

fn gap_closed(sh: &Shared, params: &SearchParams) -> bool {
    let gap = sh.z_ub - sh.z_lb;
    gap <= params.epsilon || params.relative_gap.is_some_and(|r| gap <= r * sh.z_ub.abs())
}

fn worker(
    id: usize,
    relax: &Relaxation,
    params: &SearchParams,
    state: &Mutex<Shared>,
    cv: &Condvar,
    start: Instant,
) {
    let mut guard = state.lock().expect("poisoned");
    loop {
        if guard.stop.is_some() {
            cv.notify_all();
            return;
        }
        if gap_closed(&guard, params) && guard.active == 0 {
            guard.stop = Some(Termination::GapClosed);
            continue;
        }
        if params.time_limit.is_some_and(|t| start.elapsed() >= t) {
            guard.stop = Some(Termination::TimeLimit);
            continue;
        }
        if params.node_limit.is_some_and(|l| guard.nodes >= l) {
            guard.stop = Some(Termination::NodeLimit);
            continue;
        }
        let Some(node) = guard.open.pop() else {
            if guard.active == 0 {
                guard.stop = Some(Termination::GapClosed);
                continue;
            }
            guard = cv.wait(guard).expect("poisoned");
            continue;
        };
        let z_lb = guard.z_lb;
        if node.bound <= z_lb + params.epsilon {
            guard.pruned_max = guard.pruned_max.max(node.bound);
            guard.refresh_ub();
            continue;
        }
        guard.active += 1;
        guard.nodes += 1;
        guard.in_flight[id] = Some(node.bound);
        drop(guard);

        let mut candidate = None;
        let out = process(relax, node.bounds, node.bound, z_lb, params.epsilon, &mut candidate);

        guard = state.lock().expect("poisoned");
        guard.active -= 1;
        guard.in_flight[id] = None;
        let mut improved = false;
        if let Some((config, value)) = candidate {
            improved = guard.offer(config, value);
        }
        match out {
            Processed::Infeasible => {}
            Processed::Pruned { bound } => {
                guard.pruned_max = guard.pruned_max.max(bound.min(guard.z_lb + params.epsilon));
            }
            Processed::Branched { bound, kids } => {
                let [a, b] = kids;
                guard.push(bound, a);
                guard.push(bound, b);
            }
        }
        guard.refresh_ub();
        if improved || guard.nodes % TRACE_EVERY == 0 {
            guard.record(start);
        }
        cv.notify_all();
    }
}

/// Whether the claimed closed form lies in the certified interval widened by
/// `tol`.
pub fn certify_value(
    cert: &BnBCertificate,
    claimed: &AlgebraicExpr,
    tol: f64,
) -> Result<bool, BnbError> {
    if !cert.is_closed() {
        return Err(BnbError::NotClosed);
    }
    let iv = exact::interval_eval(claimed, 64)?;
    let (lo, hi) = (iv.lo_f64(), iv.hi_f64());
    Ok(lo >= cert.z_lb - tol && hi <= cert.z_ub + tol)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_baseline, build_final};

    fn lp_point(n: usize, coords: Vec<f64>, w: Vec<f64>, binary: Vec<f64>) -> LpPoint {
        assert_eq!(coords.len(), 2 * n);
        LpPoint {
            bound: 0.3,
            coords,
            w,
            binary,
        }
    }

    #[test]
    fn most_fractional_binary_first() {
        let model = build_baseline(3).unwrap();
        let relax = Relaxation::new(&model);
        let mut nb = NodeBounds::root(&model);
        nb.binary = vec![BinDomain::Both];
        let pt = lp_point(3, vec![0.5; 6], vec![0.25; 9], vec![0.5]);
        assert_eq!(select_branch(&relax, &nb, &pt).unwrap(), BranchDecision::Binary(0));

        let model = build_baseline(4).unwrap();
        let relax = Relaxation::new(&model);
        let nb = NodeBounds::root(&model);
        let pt = lp_point(4, vec![0.5; 8], vec![0.25; 16], vec![0.9, 0.5, 0.0, 1.0]);
        assert_eq!(select_branch(&relax, &nb, &pt).unwrap(), BranchDecision::Binary(1));
    }

    #[test]
    fn spatial_branch_on_wider_factor() {
        let model = build_final(5, 0.5).unwrap();
        let relax = Relaxation::new(&model);
        let mut nb = NodeBounds::root(&model);
        nb.coords[yc(3)] = Interval::new(0.2, 0.4);
        let mut coords = vec![0.5; 10];
        coords[xc(2)] = 0.5;
        coords[yc(3)] = 0.3;
        let mut w = vec![f64::NAN; 25];
        for p in &relax.products {
            w[p.index] = coords[xc(p.i)] * coords[yc(p.j)];
        }
        let k = crate::model::product_index(5, 2, 3);
        w[k] += 0.1;
        let pt = lp_point(5, coords, w, vec![1.0; 10]);
        assert_eq!(
            select_branch(&relax, &nb, &pt).unwrap(),
            BranchDecision::Spatial {
                coord: xc(2),
                split: 0.5
            }
        );
    }

    #[test]
    fn split_is_clamped() {
        let iv = Interval::new(0.2, 0.7);
        assert!((clamp_split(iv, 0.2) - 0.3).abs() < 1e-15);
        assert!((clamp_split(iv, 0.7) - 0.6).abs() < 1e-15);
        assert_eq!(clamp_split(iv, 0.45), 0.45);
    }

    #[test]
    fn invalid_params() {
        let model = build_final(5, 0.5).unwrap();
        let p = SearchParams {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(matches!(solve(&model, &p, None), Err(BnbError::InvalidParams(_))));
        let p = SearchParams {
            workers: 0,
            ..Default::default()
        };
        assert!(matches!(solve(&model, &p, None), Err(BnbError::InvalidParams(_))));
    }

    #[test]
    fn four_points_fallback() {
        let model = build_final(4, 0.5).unwrap();
        let cert = solve(&model, &SearchParams::default(), None).unwrap();
        assert!(cert.is_closed());
        assert!((cert.z_lb - 0.5).abs() < 1e-6, "{cert:?}");
        assert!((cert.z_ub - 0.5).abs() < 1e-6);
    }

    #[test]
    fn node_limit_is_reported() {
        let model = build_final(6, 3f64.sqrt() / 9.0).unwrap();
        let p = SearchParams {
            node_limit: Some(5),
            ..Default::default()
        };
        let cert = solve(&model, &p, None).unwrap();
        assert_eq!(cert.termination, Termination::NodeLimit);
        assert_eq!(cert.nodes, 5);
        assert!(cert.z_lb <= cert.z_ub);
    }
}
