//! Convex relaxation of the max-min area models.
//!
//! Products `x_i * y_j` are relaxed by McCormick envelopes, the sign
//! coupling `z <= (2b - 1) A` through an auxiliary product `u = b * A`, and
//! node bounds are tightened by interval propagation ([`fbbt`]). Coordinates
//! that the model pins to an edge are substituted before anything else, so
//! a product with one pinned factor is linear and never needs an envelope.

pub mod lp;

use crate::geometry::TriangleId;
use crate::model::{area_terms, product_index, ModelInstance, VarKind};
use lp::{LinearProgram, LpError, LpStatus, Relation, Sense};
use thiserror::Error;

/// Coordinates narrower than this are treated as constants.
const DEGENERATE_WIDTH: f64 = 1e-12;
const FBBT_SWEEPS: usize = 10;
const FBBT_CHANGE_TOL: f64 = 1e-12;
/// Outward padding applied to every tightened bound.
const PAD: f64 = 1e-12;
const EMPTY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelaxError {
    #[error("empty interval [{0}, {1}]")]
    EmptyInterval(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_empty(self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_degenerate(self) -> bool {
        self.width() <= DEGENERATE_WIDTH
    }

    pub fn intersect(self, other: Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn add(self, other: Interval) -> Interval {
        Interval::new(self.lo + other.lo, self.hi + other.hi)
    }

    pub fn scale(self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval::new(c * self.lo, c * self.hi)
        } else {
            Interval::new(c * self.hi, c * self.lo)
        }
    }

    pub fn mul(self, other: Interval) -> Interval {
        let p = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        Interval::new(
            p.iter().copied().fold(f64::INFINITY, f64::min),
            p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Domain of an orientation binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinDomain {
    Zero,
    One,
    Both,
}

impl BinDomain {
    pub fn is_fixed(self) -> bool {
        self != BinDomain::Both
    }

    /// Orientation sign `2b - 1` of a fixed binary.
    pub fn sign(self) -> Option<f64> {
        match self {
            BinDomain::Zero => Some(-1.0),
            BinDomain::One => Some(1.0),
            BinDomain::Both => None,
        }
    }
}

/// Index of `x_i` in [`NodeBounds::coords`].
pub fn xc(i: usize) -> usize {
    2 * (i - 1)
}

/// Index of `y_i` in [`NodeBounds::coords`].
pub fn yc(i: usize) -> usize {
    2 * (i - 1) + 1
}

/// Human-readable name of a coordinate index.
pub fn coord_name(c: usize) -> String {
    let axis = if c % 2 == 0 { 'x' } else { 'y' };
    format!("{axis}{}", c / 2 + 1)
}

/// Bounds of one branch-and-bound node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeBounds {
    /// `x_1, y_1, x_2, y_2, ...`; see [`xc`] and [`yc`].
    pub coords: Vec<Interval>,
    /// Products indexed by [`product_index`].
    pub w: Vec<Interval>,
    /// Signed areas in model triangle order.
    pub area: Vec<Interval>,
    pub binary: Vec<BinDomain>,
    /// `z.lo` doubles as the incumbent value the node has to beat.
    pub z: Interval,
    pub infeasible: bool,
}

impl NodeBounds {
    pub fn root(model: &ModelInstance) -> Self {
        let n = model.n;
        let mut coords = Vec::with_capacity(2 * n);
        for i in 1..=n {
            for v in [model.x(i), model.y(i)] {
                let var = model.var(v);
                coords.push(Interval::new(var.lo, var.hi));
            }
        }
        let binary = (0..model.triangles.len())
            .map(|t| {
                let var = model.var(model.binary_by_index(t));
                debug_assert_eq!(var.kind, VarKind::Binary);
                match (var.lo, var.hi) {
                    (lo, hi) if lo == hi && lo == 0.0 => BinDomain::Zero,
                    (lo, hi) if lo == hi => BinDomain::One,
                    _ => BinDomain::Both,
                }
            })
            .collect();
        NodeBounds {
            coords,
            w: vec![Interval::new(0.0, 1.0); n * n],
            area: vec![Interval::new(-0.5, 0.5); model.triangles.len()],
            binary,
            z: Interval::new(0.0, model.z_upper()),
            infeasible: false,
        }
    }

    pub fn x(&self, i: usize) -> Interval {
        self.coords[xc(i)]
    }

    pub fn y(&self, i: usize) -> Interval {
        self.coords[yc(i)]
    }
}

/// `cw * w + cx * x + cy * y (rel) rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeRow {
    pub cw: f64,
    pub cx: f64,
    pub cy: f64,
    pub rel: Relation,
    pub rhs: f64,
}

impl EnvelopeRow {
    pub fn holds(&self, w: f64, x: f64, y: f64, tol: f64) -> bool {
        let lhs = self.cw * w + self.cx * x + self.cy * y;
        match self.rel {
            Relation::Le => lhs <= self.rhs + tol,
            Relation::Ge => lhs >= self.rhs - tol,
            Relation::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// The four McCormick inequalities for `w = x * y` over a box.
pub fn mccormick_rows(x: Interval, y: Interval) -> Result<[EnvelopeRow; 4], RelaxError> {
    for iv in [x, y] {
        if iv.is_empty() || !iv.lo.is_finite() || !iv.hi.is_finite() {
            return Err(RelaxError::EmptyInterval(iv.lo, iv.hi));
        }
    }
    let (xl, xu, yl, yu) = (x.lo, x.hi, y.lo, y.hi);
    let row = |cx: f64, cy: f64, rel, rhs| EnvelopeRow {
        cw: 1.0,
        cx,
        cy,
        rel,
        rhs,
    };
    Ok([
        row(-yl, -xl, Relation::Ge, -xl * yl),
        row(-yu, -xu, Relation::Ge, -xu * yu),
        row(-yl, -xu, Relation::Le, -xu * yl),
        row(-yu, -xl, Relation::Le, -xl * yu),
    ])
}

/// `cz * z + cb * b + ca * A + cu * u (rel) rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRow {
    pub cz: f64,
    pub cb: f64,
    pub ca: f64,
    pub cu: f64,
    pub rel: Relation,
    pub rhs: f64,
}

impl CouplingRow {
    pub fn holds(&self, z: f64, b: f64, a: f64, u: f64, tol: f64) -> bool {
        let lhs = self.cz * z + self.cb * b + self.ca * a + self.cu * u;
        match self.rel {
            Relation::Le => lhs <= self.rhs + tol,
            Relation::Ge => lhs >= self.rhs - tol,
            Relation::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// Linear rows relaxing `z <= (2b - 1) A` for one triangle.
///
/// A fixed binary gives a single row. A free one introduces `u = b * A`
/// with its McCormick envelope over `b in [0, 1]`, `A in a`, and the row
/// `z <= 2u - A`.
pub fn linearize_sign_coupling(b: BinDomain, a: Interval) -> Vec<CouplingRow> {
    let row = |cz, cb, ca, cu, rel, rhs| CouplingRow {
        cz,
        cb,
        ca,
        cu,
        rel,
        rhs,
    };
    match b {
        BinDomain::One => vec![row(1.0, 0.0, -1.0, 0.0, Relation::Le, 0.0)],
        BinDomain::Zero => vec![row(1.0, 0.0, 1.0, 0.0, Relation::Le, 0.0)],
        BinDomain::Both => {
            let (al, au) = (a.lo, a.hi);
            vec![
                // u >= b*al
                row(0.0, -al, 0.0, 1.0, Relation::Ge, 0.0),
                // u >= A + b*au - au
                row(0.0, -au, -1.0, 1.0, Relation::Ge, -au),
                // u <= A + b*al - al
                row(0.0, -al, -1.0, 1.0, Relation::Le, -al),
                // u <= b*au
                row(0.0, -au, 0.0, 1.0, Relation::Le, 0.0),
                row(1.0, 0.0, 1.0, -2.0, Relation::Le, 0.0),
            ]
        }
    }
}

/// A signed area after substituting the model's pinned coordinates:
/// `constant + sum c * coord + sum c * w`.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaForm {
    pub constant: f64,
    pub linear: Vec<(usize, f64)>,
    /// `(product_index, coefficient)`.
    pub products: Vec<(usize, f64)>,
}

impl AreaForm {
    fn eval(&self, nb: &NodeBounds) -> Interval {
        self.eval_except(nb, usize::MAX)
    }

    /// Interval of the form without its `skip`-th term (linear terms first).
    fn eval_except(&self, nb: &NodeBounds, skip: usize) -> Interval {
        let mut acc = Interval::point(self.constant);
        for (idx, &(c, k)) in self.linear.iter().enumerate() {
            if idx != skip {
                acc = acc.add(nb.coords[c].scale(k));
            }
        }
        let off = self.linear.len();
        for (idx, &(p, k)) in self.products.iter().enumerate() {
            if idx + off != skip {
                acc = acc.add(nb.w[p].scale(k));
            }
        }
        acc
    }
}

/// One relaxed product `w_ij = x_i * y_j` with both factors free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Product {
    pub i: usize,
    pub j: usize,
    pub index: usize,
}

/// Model data shared by every node: area forms, relaxed products and the
/// coordinate ordering.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub n: usize,
    pub triangles: Vec<TriangleId>,
    pub forms: Vec<AreaForm>,
    pub products: Vec<Product>,
    /// Coordinate-index pairs `lhs <= rhs`.
    pub ordering: Vec<(usize, usize)>,
}

impl Relaxation {
    pub fn new(model: &ModelInstance) -> Self {
        let n = model.n;
        let mut var_to_coord = vec![usize::MAX; model.variables.len()];
        let mut pinned = vec![None; 2 * n];
        for i in 1..=n {
            var_to_coord[model.x(i).0] = xc(i);
            var_to_coord[model.y(i).0] = yc(i);
            for (v, c) in [(model.x(i), xc(i)), (model.y(i), yc(i))] {
                if model.is_fixed(v) {
                    pinned[c] = Some(model.var(v).lo);
                }
            }
        }
        let mut used = vec![false; n * n];
        let mut forms = Vec::with_capacity(model.triangles.len());
        for &t in &model.triangles {
            let mut form = AreaForm {
                constant: 0.0,
                linear: Vec::new(),
                products: Vec::new(),
            };
            for (k, i, j) in area_terms(t) {
                match (pinned[xc(i)], pinned[yc(j)]) {
                    (Some(a), Some(b)) => form.constant += k * a * b,
                    (Some(a), None) => push_term(&mut form.linear, yc(j), k * a),
                    (None, Some(b)) => push_term(&mut form.linear, xc(i), k * b),
                    (None, None) => {
                        let p = product_index(n, i, j);
                        used[p] = true;
                        push_term(&mut form.products, p, k);
                    }
                }
            }
            form.linear.retain(|&(_, k)| k != 0.0);
            form.products.retain(|&(_, k)| k != 0.0);
            forms.push(form);
        }
        let mut products = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                let index = product_index(n, i, j);
                if used[index] {
                    products.push(Product { i, j, index });
                }
            }
        }
        let ordering = model
            .ordering
            .iter()
            .map(|&(a, b)| (var_to_coord[a.0], var_to_coord[b.0]))
            .collect();
        Relaxation {
            n,
            triangles: model.triangles.clone(),
            forms,
            products,
            ordering,
        }
    }

    /// Interval propagation to a fixpoint (at most ten sweeps).
    pub fn fbbt(&self, nb: &NodeBounds) -> NodeBounds {
        let mut nb = nb.clone();
        if nb.infeasible {
            return nb;
        }
        for _ in 0..FBBT_SWEEPS {
            let mut tracker = Tracker::default();
            self.sweep(&mut nb, &mut tracker);
            if tracker.empty {
                nb.infeasible = true;
                return nb;
            }
            if tracker.change <= FBBT_CHANGE_TOL {
                break;
            }
        }
        nb
    }

    fn sweep(&self, nb: &mut NodeBounds, tr: &mut Tracker) {
        // forward: products and areas
        for p in &self.products {
            let prod = nb.coords[xc(p.i)].mul(nb.coords[yc(p.j)]);
            tr.tighten(&mut nb.w[p.index], prod);
        }
        for (t, form) in self.forms.iter().enumerate() {
            let a = form.eval(nb);
            tr.tighten(&mut nb.area[t], a);
        }
        // sign coupling
        let zlo = nb.z.lo;
        let mut zhi = nb.z.hi;
        for t in 0..self.forms.len() {
            let a = nb.area[t];
            if nb.binary[t] == BinDomain::Both {
                let neg_ok = a.lo <= -zlo;
                let pos_ok = a.hi >= zlo;
                nb.binary[t] = match (neg_ok, pos_ok) {
                    (false, false) => {
                        tr.empty = true;
                        return;
                    }
                    (true, false) => BinDomain::Zero,
                    (false, true) => BinDomain::One,
                    (true, true) => BinDomain::Both,
                };
                if nb.binary[t] != BinDomain::Both {
                    tr.change = tr.change.max(1.0);
                }
            }
            let side = match nb.binary[t] {
                BinDomain::One => {
                    tr.tighten(&mut nb.area[t], Interval::new(zlo, 0.5));
                    nb.area[t].hi
                }
                BinDomain::Zero => {
                    tr.tighten(&mut nb.area[t], Interval::new(-0.5, -zlo));
                    -nb.area[t].lo
                }
                BinDomain::Both => nb.area[t].hi.max(-nb.area[t].lo),
            };
            zhi = zhi.min(side);
        }
        tr.tighten(&mut nb.z, Interval::new(zlo, zhi));
        if tr.empty {
            return;
        }
        // backward: areas onto their terms
        for (t, form) in self.forms.iter().enumerate() {
            let target = nb.area[t];
            for term in 0..form.linear.len() + form.products.len() {
                let rest = form.eval_except(nb, term);
                let free = Interval::new(target.lo - rest.hi, target.hi - rest.lo);
                if term < form.linear.len() {
                    let (c, k) = form.linear[term];
                    tr.tighten(&mut nb.coords[c], free.scale(1.0 / k));
                } else {
                    let (p, k) = form.products[term - form.linear.len()];
                    tr.tighten(&mut nb.w[p], free.scale(1.0 / k));
                }
            }
            if tr.empty {
                return;
            }
        }
        // products onto their factors (all coordinates are nonnegative)
        for p in &self.products {
            let w = nb.w[p.index];
            let (xi, yj) = (xc(p.i), yc(p.j));
            for (a, b) in [(xi, yj), (yj, xi)] {
                let other = nb.coords[b];
                let mut new = Interval::new(0.0, f64::INFINITY);
                if other.hi > 0.0 {
                    new.lo = w.lo / other.hi;
                }
                if other.lo > 0.0 {
                    new.hi = w.hi / other.lo;
                }
                tr.tighten(&mut nb.coords[a], new);
            }
        }
        for &(a, b) in &self.ordering {
            let (la, hb) = (nb.coords[a].lo, nb.coords[b].hi);
            tr.tighten(&mut nb.coords[b], Interval::new(la, f64::INFINITY));
            tr.tighten(&mut nb.coords[a], Interval::new(f64::NEG_INFINITY, hb));
        }
    }

    /// Builds and solves the node LP. `None` means the node is infeasible.
    pub fn solve_node(&self, nb: &NodeBounds) -> Result<Option<LpPoint>, LpError> {
        let node = self.node_lp(nb);
        let sol = lp::solve_lp(&node.lp)?;
        if sol.status == LpStatus::Infeasible {
            return Ok(None);
        }
        let coord = |c: usize| match node.coord_col[c] {
            Some(col) => sol.x[col],
            None => nb.coords[c].mid(),
        };
        let coords: Vec<f64> = (0..2 * self.n).map(coord).collect();
        let mut w = vec![f64::NAN; self.n * self.n];
        for (k, p) in self.products.iter().enumerate() {
            w[p.index] = node.product_expr[k].value(&sol.x);
        }
        let binary = nb
            .binary
            .iter()
            .enumerate()
            .map(|(t, d)| match d {
                BinDomain::Zero => 0.0,
                BinDomain::One => 1.0,
                BinDomain::Both => sol.x[node.binary_col[t].expect("free binary column")],
            })
            .collect();
        Ok(Some(LpPoint {
            bound: sol.objective,
            coords,
            w,
            binary,
        }))
    }

    /// The node LP: maximise `z` over the McCormick relaxation.
    pub fn node_lp(&self, nb: &NodeBounds) -> NodeLp {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let mut coord_col = vec![None; 2 * self.n];
        let coord_expr: Vec<LinExpr> = (0..2 * self.n)
            .map(|c| {
                let iv = nb.coords[c];
                if iv.is_degenerate() {
                    LinExpr::constant(iv.mid())
                } else {
                    let col = lp.add_var(iv.lo, iv.hi, 0.0);
                    coord_col[c] = Some(col);
                    LinExpr::var(col)
                }
            })
            .collect();
        let mut product_expr = Vec::with_capacity(self.products.len());
        let mut w_expr = vec![None; self.n * self.n];
        for p in &self.products {
            let (x, y) = (nb.coords[xc(p.i)], nb.coords[yc(p.j)]);
            let expr = match (x.is_degenerate(), y.is_degenerate()) {
                (true, _) => coord_expr[yc(p.j)].scaled(x.mid()),
                (false, true) => coord_expr[xc(p.i)].scaled(y.mid()),
                (false, false) => {
                    let env = x.mul(y).intersect(nb.w[p.index]);
                    let (lo, hi) = if env.is_empty() {
                        (env.hi, env.hi)
                    } else {
                        (env.lo, env.hi)
                    };
                    let col = lp.add_var(lo, hi, 0.0);
                    let (xcol, ycol) = (
                        coord_col[xc(p.i)].unwrap(),
                        coord_col[yc(p.j)].unwrap(),
                    );
                    for r in mccormick_rows(x, y).expect("nonempty node box") {
                        lp.add_row(vec![(col, r.cw), (xcol, r.cx), (ycol, r.cy)], r.rel, r.rhs);
                    }
                    LinExpr::var(col)
                }
            };
            w_expr[p.index] = Some(expr.clone());
            product_expr.push(expr);
        }
        let z = lp.add_var(0.0, nb.z.hi.max(0.0), 1.0);
        let mut binary_col = vec![None; self.forms.len()];
        for (t, form) in self.forms.iter().enumerate() {
            let mut area = LinExpr::constant(form.constant);
            for &(c, k) in &form.linear {
                area.add_scaled(&coord_expr[c], k);
            }
            for &(p, k) in &form.products {
                area.add_scaled(w_expr[p].as_ref().expect("relaxed product"), k);
            }
            let rows = linearize_sign_coupling(nb.binary[t], nb.area[t]);
            let (b, u) = if nb.binary[t] == BinDomain::Both {
                let a = nb.area[t];
                let b = lp.add_var(0.0, 1.0, 0.0);
                let u = lp.add_var(a.lo.min(0.0), a.hi.max(0.0), 0.0);
                binary_col[t] = Some(b);
                (Some(b), Some(u))
            } else {
                (None, None)
            };
            for r in rows {
                let mut e = area.scaled(r.ca);
                e.add_scaled(&LinExpr::var(z), r.cz);
                if let Some(b) = b {
                    e.add_scaled(&LinExpr::var(b), r.cb);
                }
                if let Some(u) = u {
                    e.add_scaled(&LinExpr::var(u), r.cu);
                }
                e.push_row(&mut lp, r.rel, r.rhs);
            }
        }
        for &(a, b) in &self.ordering {
            let mut e = coord_expr[a].clone();
            e.add_scaled(&coord_expr[b], -1.0);
            if !e.terms.is_empty() {
                e.push_row(&mut lp, Relation::Le, 0.0);
            }
        }
        NodeLp {
            lp,
            coord_col,
            product_expr,
            binary_col,
            z_col: z,
        }
    }
}

fn push_term(terms: &mut Vec<(usize, f64)>, key: usize, k: f64) {
    match terms.iter_mut().find(|(c, _)| *c == key) {
        Some(e) => e.1 += k,
        None => terms.push((key, k)),
    }
}

#[derive(Default)]
struct Tracker {
    change: f64,
    empty: bool,
}

impl Tracker {
    /// Intersects `iv` with `new` (padded outward) and records the change.
    fn tighten(&mut self, iv: &mut Interval, new: Interval) {
        let lo = new.lo - PAD * (1.0 + new.lo.abs());
        let hi = new.hi + PAD * (1.0 + new.hi.abs());
        if lo > iv.lo {
            self.change = self.change.max(lo - iv.lo);
            iv.lo = lo;
        }
        if hi < iv.hi {
            self.change = self.change.max(iv.hi - hi);
            iv.hi = hi;
        }
        if iv.lo > iv.hi {
            if iv.lo > iv.hi + EMPTY_TOL {
                self.empty = true;
            } else {
                let m = iv.mid();
                *iv = Interval::point(m);
            }
        }
    }
}

/// `constant + sum coef * column`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl LinExpr {
    fn constant(c: f64) -> Self {
        LinExpr {
            constant: c,
            terms: Vec::new(),
        }
    }

    fn var(col: usize) -> Self {
        LinExpr {
            constant: 0.0,
            terms: vec![(col, 1.0)],
        }
    }

    fn scaled(&self, k: f64) -> Self {
        LinExpr {
            constant: self.constant * k,
            terms: self.terms.iter().map(|&(c, v)| (c, v * k)).collect(),
        }
    }

    fn add_scaled(&mut self, other: &LinExpr, k: f64) {
        if k == 0.0 {
            return;
        }
        self.constant += other.constant * k;
        for &(c, v) in &other.terms {
            push_term(&mut self.terms, c, v * k);
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(c, v)| v * x[c]).sum::<f64>()
    }

    fn push_row(mut self, lp: &mut LinearProgram, rel: Relation, rhs: f64) {
        self.terms.retain(|&(_, v)| v != 0.0);
        lp.add_row(self.terms, rel, rhs - self.constant);
    }
}

/// A node LP with the column of every model quantity it represents.
#[derive(Debug, Clone)]
pub struct NodeLp {
    pub lp: LinearProgram,
    pub coord_col: Vec<Option<usize>>,
    /// Value of each relaxed product, in [`Relaxation::products`] order.
    pub product_expr: Vec<LinExpr>,
    pub binary_col: Vec<Option<usize>>,
    pub z_col: usize,
}

/// Optimal point of a node LP.
#[derive(Debug, Clone, PartialEq)]
pub struct LpPoint {
    pub bound: f64,
    pub coords: Vec<f64>,
    /// Product values by [`product_index`]; NaN for unrelaxed pairs.
    pub w: Vec<f64>,
    pub binary: Vec<f64>,
}

/// Interval propagation for one node of `model`.
pub fn fbbt(model: &ModelInstance, nb: &NodeBounds) -> NodeBounds {
    Relaxation::new(model).fbbt(nb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{signed_area, Configuration};
    use crate::model::{build_baseline, build_final};

    fn unit() -> Interval {
        Interval::new(0.0, 1.0)
    }

    #[test]
    fn unit_box_envelope() {
        let rows = mccormick_rows(unit(), unit()).unwrap();
        // w >= 0, w >= x + y - 1, w <= y, w <= x
        assert_eq!((rows[0].cx, rows[0].cy, rows[0].rhs), (0.0, 0.0, 0.0));
        assert_eq!((rows[1].cx, rows[1].cy, rows[1].rhs), (-1.0, -1.0, -1.0));
        assert_eq!((rows[2].cx, rows[2].cy, rows[2].rhs), (0.0, -1.0, 0.0));
        assert_eq!((rows[3].cx, rows[3].cy, rows[3].rhs), (-1.0, 0.0, 0.0));
    }

    #[test]
    fn degenerate_factor_pins_product() {
        let a = 0.3;
        let rows = mccormick_rows(Interval::point(a), unit()).unwrap();
        for y in [0.0, 0.25, 0.8, 1.0] {
            assert!(rows.iter().all(|r| r.holds(a * y, a, y, 1e-15)));
            assert!(!rows.iter().all(|r| r.holds(a * y + 1e-6, a, y, 1e-12)));
            assert!(!rows.iter().all(|r| r.holds(a * y - 1e-6, a, y, 1e-12)));
        }
    }

    #[test]
    fn envelope_width_at_center() {
        // independent oracle: grid over w for the widest gap
        let rows = mccormick_rows(unit(), unit()).unwrap();
        let mut best: f64 = 0.0;
        let steps = 100;
        for a in 0..=steps {
            for b in 0..=steps {
                let (x, y) = (a as f64 / steps as f64, b as f64 / steps as f64);
                let hi = x.min(y);
                let lo = (x + y - 1.0).max(0.0);
                assert!(rows.iter().all(|r| r.holds(hi, x, y, 1e-12) && r.holds(lo, x, y, 1e-12)));
                best = best.max(hi - lo);
            }
        }
        assert!((best - 0.5).abs() < 1e-12);
        // at the centre the envelope spans [0, 1/2] around the product 1/4
        assert!(rows.iter().all(|r| r.holds(0.0, 0.5, 0.5, 1e-12)));
        assert!(rows.iter().all(|r| r.holds(0.5, 0.5, 0.5, 1e-12)));
        assert!(!rows.iter().all(|r| r.holds(0.51, 0.5, 0.5, 1e-12)));
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(mccormick_rows(Interval::new(1.0, 0.0), unit()).is_err());
    }

    #[test]
    fn fixed_sign_couplings() {
        let one = linearize_sign_coupling(BinDomain::One, Interval::new(-0.5, 0.5));
        assert_eq!(one.len(), 1);
        assert!(one[0].holds(0.2, 1.0, 0.2, 0.0, 0.0));
        assert!(!one[0].holds(0.2, 1.0, 0.1, 0.0, 1e-12));
        let zero = linearize_sign_coupling(BinDomain::Zero, Interval::new(-0.5, 0.5));
        assert!(zero[0].holds(0.2, 0.0, -0.2, 0.0, 0.0));
        assert!(!zero[0].holds(0.2, 0.0, -0.1, 0.0, 1e-12));
    }

    #[test]
    fn free_coupling_contains_both_branches() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let iv = Interval::new(-0.5, 0.5);
        let rows = linearize_sign_coupling(BinDomain::Both, iv);
        for _ in 0..1000 {
            let a: f64 = rng.random_range(-0.5..=0.5);
            let b = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
            let z = rng.random_range(0.0..=((2.0 * b - 1.0) * a).max(0.0));
            if z > (2.0 * b - 1.0) * a {
                continue;
            }
            let u = b * a;
            assert!(rows.iter().all(|r| r.holds(z, b, a, u, 1e-12)));
        }
    }

    #[test]
    fn point_box_gives_exact_areas() {
        let config = Configuration::new(vec![
            (0.1, 0.2),
            (0.9, 0.1),
            (0.6, 0.7),
            (0.2, 0.95),
            (0.45, 0.4),
            (0.8, 0.55),
        ])
        .unwrap();
        let model = build_baseline(6).unwrap();
        let mut nb = NodeBounds::root(&model);
        for i in 1..=6 {
            nb.coords[xc(i)] = Interval::point(config.x(i));
            nb.coords[yc(i)] = Interval::point(config.y(i));
        }
        let out = fbbt(&model, &nb);
        assert!(!out.infeasible);
        for (t, &tri) in model.triangles.iter().enumerate() {
            let a = signed_area(&config, tri).unwrap();
            assert!((out.area[t].lo - a).abs() < 1e-9 && (out.area[t].hi - a).abs() < 1e-9);
        }
    }

    #[test]
    fn crossed_ordering_is_infeasible() {
        let model = build_final(5, 0.5).unwrap();
        let mut nb = NodeBounds::root(&model);
        nb.coords[xc(2)] = Interval::new(0.6, 1.0);
        nb.coords[xc(4)] = Interval::new(0.0, 0.5);
        assert!(fbbt(&model, &nb).infeasible);
    }

    #[test]
    fn incumbent_bound_pulls_y1_down() {
        let model = build_final(5, 0.5).unwrap();
        let mut nb = NodeBounds::root(&model);
        nb.z.lo = 0.19;
        let out = fbbt(&model, &nb);
        assert!(!out.infeasible);
        assert!(out.y(1).hi < 1.0);
        // triangle (1,3,5) has area (y5 - y1)/2 >= 0.19
        assert!(out.y(1).hi <= 0.62 + 1e-9);
    }

    #[test]
    fn root_relaxation_n5() {
        let model = build_final(5, 0.5).unwrap();
        let relax = Relaxation::new(&model);
        let nb = relax.fbbt(&NodeBounds::root(&model));
        let pt = relax.solve_node(&nb).unwrap().unwrap();
        let delta5 = 3f64.sqrt() / 9.0;
        assert!(pt.bound >= delta5 - 1e-9 && pt.bound <= 0.5 + 1e-9, "{}", pt.bound);
    }

    #[test]
    fn pinned_coordinates_make_products_linear() {
        let model = build_final(6, 0.5).unwrap();
        let relax = Relaxation::new(&model);
        // x free for 2, 4, 6 and y free for 1, 3, 5, 6, minus (6, 6)
        assert_eq!(relax.products.len(), 11);
        let baseline = Relaxation::new(&build_baseline(6).unwrap());
        assert_eq!(baseline.products.len(), 30);
    }
}
