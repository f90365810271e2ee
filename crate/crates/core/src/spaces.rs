//! Graph spaces decorated by computed S-bimodules with general (matrix)
//! symmetric-group actions: per-shape coinvariants under the shape's
//! automorphism group, with Koszul signs for the decoration degrees.
//!
//! This is the carrier for every chain group in barkoszul and for the
//! general-representation composition products (replacement-rule models,
//! the Ψ functional). Basis elements are pure decorated graphs: the
//! complement columns of the coinvariant relations are single decoration
//! tuples, so differentials can be computed on representatives and
//! projected back.

use crate::graphcore::{self, Graph, Iso, Vertex};
use crate::ratlin::{qi, Echelon, RatMatrix, SparseVec, Q};
use crate::sbimod::CellKey;
use crate::symgroup::{koszul_sign, Permutation};
use num::Zero;
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

/// A computed S-bimodule: finite cells with exact-rational actions.
pub trait BimodSource {
    fn cells(&self) -> Vec<CellKey>;
    fn dim(&self, key: CellKey) -> usize;
    /// Matrix of the leg relabeling (θ on outputs, ω on inputs) on the
    /// cell basis: column e is the image of basis element e.
    fn act(&self, key: CellKey, theta: &Permutation, omega: &Permutation) -> RatMatrix;
}

/// Monomial source backed by an sbimod::SBimodule.
pub struct MonomialSource {
    pub module: crate::sbimod::SBimodule,
    table: crate::sbimod::CellTable,
    colors: BTreeMap<CellKey, u32>,
}

impl MonomialSource {
    pub fn new(module: crate::sbimod::SBimodule) -> Self {
        let mut table = crate::sbimod::CellTable::new();
        let colors = table.add_module(0, &module);
        MonomialSource { module, table, colors }
    }
}

impl BimodSource for MonomialSource {
    fn cells(&self) -> Vec<CellKey> {
        self.colors.keys().copied().collect()
    }

    fn dim(&self, key: CellKey) -> usize {
        self.colors.get(&key).map_or(0, |c| self.table.cell(*c).dim)
    }

    fn act(&self, key: CellKey, theta: &Permutation, omega: &Permutation) -> RatMatrix {
        let color = self.colors[&key];
        let dim = self.table.cell(color).dim;
        let mut m = RatMatrix::zero(dim, dim);
        for e in 0..dim {
            let (e2, s) = self.table.transport_one(color, theta, omega, e);
            m.set(e2, e, qi(s));
        }
        m
    }
}

/// The registry of decoration cells for one space family: colors combine
/// a side tag with a cell of the side's source.
pub struct SpaceCtx {
    sides: Vec<Rc<dyn BimodSource>>,
    pub cells: Vec<(u32, CellKey)>,
    pub colors: BTreeMap<(u32, CellKey), u32>,
    act_cache: RefCell<HashMap<(u32, Vec<usize>, Vec<usize>), Rc<RatMatrix>>>,
}

impl SpaceCtx {
    pub fn new(sides: Vec<Rc<dyn BimodSource>>) -> Self {
        let mut cells = Vec::new();
        let mut colors = BTreeMap::new();
        for (si, src) in sides.iter().enumerate() {
            for key in src.cells() {
                colors.insert((si as u32, key), cells.len() as u32);
                cells.push((si as u32, key));
            }
        }
        SpaceCtx { sides, cells, colors, act_cache: RefCell::new(HashMap::new()) }
    }

    pub fn cell(&self, color: u32) -> (u32, CellKey) {
        self.cells[color as usize]
    }

    pub fn dim(&self, color: u32) -> usize {
        let (s, key) = self.cell(color);
        self.sides[s as usize].dim(key)
    }

    pub fn degree(&self, color: u32) -> i64 {
        self.cell(color).1 .3
    }

    pub fn weight(&self, color: u32) -> usize {
        self.cell(color).1 .2
    }

    pub fn act(&self, color: u32, theta: &Permutation, omega: &Permutation) -> Rc<RatMatrix> {
        let key = (color, theta.one_line(), omega.one_line());
        if let Some(m) = self.act_cache.borrow().get(&key) {
            return m.clone();
        }
        let (s, cell) = self.cell(color);
        let m = Rc::new(self.sides[s as usize].act(cell, theta, omega));
        self.act_cache.borrow_mut().insert(key, m.clone());
        m
    }

    /// Apply a graph isomorphism to a sparse vector over decoration
    /// tuples of `g` (tuple index = mixed-radix over vertices in order):
    /// permutes tensor positions with Koszul signs and acts by the
    /// per-vertex port-relabeling matrices.
    pub fn act_iso(&self, g: &Graph, iso: &Iso, vec: &SparseVec, strides_src: &[usize],
                   strides_dst: &[usize], dims: &[usize]) -> SparseVec {
        let nv = g.nv();
        let degrees: Vec<i64> = g.verts.iter().map(|v| self.degree(v.color)).collect();
        let ksign = koszul_sign(&degrees, &iso.vmap);
        let mats: Vec<Rc<RatMatrix>> = (0..nv)
            .map(|v| {
                let pi_out = Permutation::from_images0(iso.out_port[v].clone());
                let pi_in = Permutation::from_images0(iso.in_port[v].clone());
                self.act(g.verts[v].color, &pi_out, &pi_in)
            })
            .collect();
        let mut acc: HashMap<usize, Q> = HashMap::new();
        for (tidx, coeff) in vec {
            let mut digits = vec![0usize; nv];
            let mut rest = *tidx;
            for v in 0..nv {
                digits[v] = rest / strides_src[v];
                rest %= strides_src[v];
            }
            // expand the tensor image: product over vertices of matrix
            // columns
            let mut terms: Vec<(usize, Q)> = vec![(0, coeff * qi(ksign))];
            for v in 0..nv {
                let col = digits[v];
                let mat = &mats[v];
                let mut next = Vec::new();
                for r in 0..dims[v] {
                    let entry = mat.get(r, col);
                    if entry.is_zero() {
                        continue;
                    }
                    let add = r * strides_dst[iso.vmap[v]];
                    for (base, c) in &terms {
                        next.push((base + add, c * entry));
                    }
                }
                terms = next;
                if terms.is_empty() {
                    break;
                }
            }
            for (i, c) in terms {
                let e = acc.entry(i).or_insert_with(Q::zero);
                *e += c;
            }
        }
        let mut out: SparseVec =
            acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        out.sort_by_key(|(i, _)| *i);
        out
    }
}

/// One shape with its coinvariant structure.
pub struct ShapeSlot {
    pub graph: Graph,
    pub dims: Vec<usize>,
    pub strides: Vec<usize>,
    pub tsize: usize,
    pub rel: Echelon,
    /// tuple indices forming the coinvariant basis
    pub cols: Vec<usize>,
    pub pos: HashMap<usize, usize>,
}

impl ShapeSlot {
    pub fn tuple_of(&self, col: usize) -> Vec<usize> {
        let mut digits = vec![0usize; self.dims.len()];
        let mut rest = col;
        for v in 0..self.dims.len() {
            digits[v] = rest / self.strides[v];
            rest %= self.strides[v];
        }
        digits
    }

    pub fn index_of(&self, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Reduce a tensor vector modulo the coinvariant relations and read
    /// off the basis coordinates.
    pub fn project(&self, vec: SparseVec) -> Vec<(usize, Q)> {
        let r = self.rel.reduce(vec);
        r.into_iter().map(|(i, c)| (self.pos[&i], c)).collect()
    }
}

/// A chain-group carrier: decorated-graph space over a SpaceCtx.
pub struct GraphSpace {
    pub ctx: Rc<SpaceCtx>,
    pub shapes: Vec<ShapeSlot>,
    pub offsets: Vec<usize>,
    pub dim: usize,
    serial_index: HashMap<Vec<u32>, usize>,
}

/// Coinvariant structure over one canonical shape; None when a
/// decoration cell is zero-dimensional.
pub fn build_slot(ctx: &SpaceCtx, g: &Graph) -> Option<ShapeSlot> {
    let nv = g.nv();
    let dims: Vec<usize> = g.verts.iter().map(|v| ctx.dim(v.color)).collect();
    if dims.iter().any(|&d| d == 0) {
        return None;
    }
    let mut strides = vec![1usize; nv];
    for v in (0..nv.saturating_sub(1)).rev() {
        strides[v] = strides[v + 1] * dims[v + 1];
    }
    let tsize: usize = dims.iter().product();
    let canon = graphcore::canonical_form(g);
    let auts = graphcore::automorphisms(&canon.graph);
    let mut rel = Echelon::new();
    if auts.len() > 1 {
        for a in &auts {
            if a.vmap.iter().enumerate().all(|(i, &v)| i == v)
                && a.out_port.iter().all(|p| p.iter().enumerate().all(|(i, &x)| i == x))
                && a.in_port.iter().all(|p| p.iter().enumerate().all(|(i, &x)| i == x))
            {
                continue;
            }
            for t in 0..tsize {
                let v: SparseVec = vec![(t, qi(1))];
                let img = ctx.act_iso(&canon.graph, a, &v, &strides, &strides, &dims);
                let mut row = crate::ratlin::sparse_axpy(
                    &v,
                    &qi(-1),
                    &img.iter().map(|(i, c)| (*i, c.clone())).collect(),
                );
                row.retain(|(_, c)| !c.is_zero());
                rel.insert(row);
            }
        }
    }
    let cols = rel.complement(tsize);
    let pos: HashMap<usize, usize> = cols.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    Some(ShapeSlot { graph: canon.graph, dims, strides, tsize, rel, cols, pos })
}

impl GraphSpace {
    /// Build the space over the given canonical shapes.
    pub fn new(ctx: Rc<SpaceCtx>, shape_graphs: Vec<Graph>) -> Self {
        let mut shapes = Vec::new();
        let mut offsets = Vec::new();
        let mut dim = 0;
        let mut serial_index = HashMap::new();
        for g in shape_graphs {
            let Some(slot) = build_slot(&ctx, &g) else {
                continue;
            };
            serial_index.insert(graphcore::serialize(&slot.graph), shapes.len());
            offsets.push(dim);
            dim += slot.cols.len();
            shapes.push(slot);
        }
        GraphSpace { ctx, shapes, offsets, dim, serial_index }
    }

    /// Locate the slot of a canonical shape serialization.
    pub fn slot_of(&self, serial: &[u32]) -> Option<usize> {
        self.serial_index.get(serial).copied()
    }

    /// Resolve a rigid decorated graph (colors from this space's ctx,
    /// one decoration index per vertex) to coordinates in the basis.
    pub fn resolve(&self, g: &Graph, decor: &[usize], coeff: &Q) -> Vec<(usize, Q)> {
        let canon = graphcore::canonical_form(g);
        let Some(si) = self.slot_of(&canon.serial) else {
            panic!("shape not present in this graph space");
        };
        let slot = &self.shapes[si];
        // transport the pure tuple through the iso
        let src_dims: Vec<usize> = g.verts.iter().map(|v| self.ctx.dim(v.color)).collect();
        let mut src_strides = vec![1usize; g.nv()];
        for v in (0..g.nv().saturating_sub(1)).rev() {
            src_strides[v] = src_strides[v + 1] * src_dims[v + 1];
        }
        let tidx: usize = decor.iter().zip(&src_strides).map(|(d, s)| d * s).sum();
        let vec: SparseVec = vec![(tidx, coeff.clone())];
        let moved = self.ctx.act_iso(g, &canon.iso, &vec, &src_strides, &slot.strides, &src_dims);
        let proj = slot.project(moved);
        proj.into_iter().map(|(k, c)| (self.offsets[si] + k, c)).collect()
    }

    /// The (shape, tuple) representative of a global basis index.
    pub fn rep(&self, idx: usize) -> (usize, Vec<usize>) {
        let si = match self.offsets.binary_search(&idx) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let slot = &self.shapes[si];
        let col = slot.cols[idx - self.offsets[si]];
        (si, slot.tuple_of(col))
    }
}

/// On-demand shape slots: resolve decorated graphs against lazily built
/// coinvariant slots (used by the cluster-expansion machinery, where the
/// shape universe is not known in advance).
pub struct DynSpace {
    pub ctx: Rc<SpaceCtx>,
    slots: std::cell::RefCell<HashMap<Vec<u32>, Rc<ShapeSlot>>>,
}

impl DynSpace {
    pub fn new(ctx: Rc<SpaceCtx>) -> Self {
        DynSpace { ctx, slots: std::cell::RefCell::new(HashMap::new()) }
    }

    pub fn slot_for(&self, canon_graph: &Graph, serial: &[u32]) -> Rc<ShapeSlot> {
        if let Some(s) = self.slots.borrow().get(serial) {
            return s.clone();
        }
        let slot = Rc::new(
            build_slot(&self.ctx, canon_graph).expect("expansion slot with nonzero cells"),
        );
        self.slots.borrow_mut().insert(serial.to_vec(), slot.clone());
        slot
    }

    /// Resolve a rigid decorated graph into (serial, coordinates over the
    /// slot's coinvariant basis).
    pub fn resolve(&self, g: &Graph, decor: &[usize], coeff: &Q) -> (Vec<u32>, Vec<(usize, Q)>) {
        let canon = graphcore::canonical_form(g);
        let slot = self.slot_for(&canon.graph, &canon.serial);
        let src_dims: Vec<usize> = g.verts.iter().map(|v| self.ctx.dim(v.color)).collect();
        let mut src_strides = vec![1usize; g.nv()];
        for v in (0..g.nv().saturating_sub(1)).rev() {
            src_strides[v] = src_strides[v + 1] * src_dims[v + 1];
        }
        let tidx: usize = decor.iter().zip(&src_strides).map(|(d, s)| d * s).sum();
        let vec: SparseVec = vec![(tidx, coeff.clone())];
        let moved =
            self.ctx.act_iso(g, &canon.iso, &vec, &src_strides, &slot.strides, &src_dims);
        (canon.serial, slot.project(moved))
    }

    /// Project a raw tuple-coordinate vector on an already-known slot.
    pub fn project_raw(&self, serial: &[u32], vec: SparseVec) -> Vec<(usize, Q)> {
        let slot = self.slots.borrow()[serial].clone();
        slot.project(vec)
    }

    pub fn slot_for_serial(&self, serial: &[u32]) -> Rc<ShapeSlot> {
        self.slots.borrow()[serial].clone()
    }
}

/// Enumerate the shapes of connected graphs whose vertices are decorated
/// by cells of `ctx` with the given side multiplicity constraints, total
/// weight w and degree deg; two_level restricts to bottom(side 0) →
/// top(side 1) graphs.
pub struct ShapeQuery {
    pub m: usize,
    pub n: usize,
    pub weight: usize,
    pub degree: i64,
    pub two_level: bool,
    /// when set, side-1 vertices must have all outputs global (used for
    /// the module row of the augmented bar construction)
    pub top_outputs_global: bool,
    /// when set, side-0 vertices must have no output legs (every bar
    /// output is wired into the graph; global outputs pass through the
    /// module row)
    pub bottom_outputs_internal: bool,
}

pub fn enumerate_space_shapes(ctx: &SpaceCtx, q: &ShapeQuery) -> Vec<Graph> {
    // multisets of colors with the prescribed total weight and degree,
    // bounded by leg counts: every vertex uses at least one port and
    // weight-0 cells are unit-like (1,1): bound the number of vertices by
    // n + m + weight (crude but finite: each unit vertex consumes a leg
    // path; each positive-weight vertex is counted by the weight).
    let colors: Vec<u32> = (0..ctx.cells.len() as u32).collect();
    let max_units = q.m + q.n;
    let mut out: Vec<Graph> = Vec::new();
    let mut ms: Vec<u32> = Vec::new();
    enumerate_multisets(ctx, &colors, q, 0, q.weight, max_units, &mut ms, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate_multisets(
    ctx: &SpaceCtx,
    colors: &[u32],
    q: &ShapeQuery,
    start: usize,
    weight_left: usize,
    units_left: usize,
    cur: &mut Vec<u32>,
    out: &mut Vec<Graph>,
) {
    if weight_left == 0 {
        // optionally pad with weight-0 cells is handled through units_left
        try_emit(ctx, q, cur, out);
    }
    for i in start..colors.len() {
        let c = colors[i];
        let (_, key) = ctx.cell(c);
        let w = key.2;
        if ctx.dim(c) == 0 {
            continue;
        }
        if w == 0 {
            if units_left == 0 {
                continue;
            }
            cur.push(c);
            enumerate_multisets(ctx, colors, q, i, weight_left, units_left - 1, cur, out);
            cur.pop();
        } else if w <= weight_left {
            cur.push(c);
            enumerate_multisets(ctx, colors, q, i, weight_left - w, units_left, cur, out);
            cur.pop();
        }
    }
}

fn try_emit(ctx: &SpaceCtx, q: &ShapeQuery, colors: &[u32], out: &mut Vec<Graph>) {
    if colors.is_empty() {
        return;
    }
    let deg: i64 = colors.iter().map(|&c| ctx.degree(c)).sum();
    if deg != q.degree {
        return;
    }
    let specs: Vec<Vertex> = colors
        .iter()
        .map(|&c| {
            let (_, key) = ctx.cell(c);
            Vertex { outs: key.0, ins: key.1, color: c }
        })
        .collect();
    let tags: Vec<usize> = colors.iter().map(|&c| ctx.cell(c).0 as usize).collect();
    if q.two_level {
        // strict rows: the bottom row carries all global inputs, the top
        // row all global outputs, and every bottom output feeds the top
        let n_bot: usize =
            specs.iter().zip(&tags).filter(|(_, t)| **t == 0).map(|(s, _)| s.ins).sum();
        let m_top: usize =
            specs.iter().zip(&tags).filter(|(_, t)| **t == 1).map(|(s, _)| s.outs).sum();
        let out_bot: usize =
            specs.iter().zip(&tags).filter(|(_, t)| **t == 0).map(|(s, _)| s.outs).sum();
        let in_top: usize =
            specs.iter().zip(&tags).filter(|(_, t)| **t == 1).map(|(s, _)| s.ins).sum();
        if n_bot != q.n || m_top != q.m || out_bot != in_top {
            return;
        }
    }
    let shapes = if q.two_level {
        graphcore::enumerate_shapes(&specs, q.m, q.n, Some(&tags))
    } else {
        graphcore::enumerate_shapes(&specs, q.m, q.n, None)
    };
    for g in shapes {
        if q.top_outputs_global {
            let ok = (0..g.nv()).all(|v| {
                ctx.cell(g.verts[v].color).0 != 1
                    || g.out_hook[v].iter().all(|h| matches!(h, graphcore::Hook::Leg(_)))
            });
            if !ok {
                continue;
            }
        }
        if q.bottom_outputs_internal {
            let ok = (0..g.nv()).all(|v| {
                ctx.cell(g.verts[v].color).0 != 0
                    || g.out_hook[v].iter().all(|h| matches!(h, graphcore::Hook::Port(..)))
            });
            if !ok {
                continue;
            }
        }
        out.push(g);
    }
}

/// dim of the connected 2-level composition (top ⊠_c bottom) in one cell,
/// split by (top weight, bottom weight).
pub fn two_level_dim(
    top: Rc<dyn BimodSource>,
    bot: Rc<dyn BimodSource>,
    m: usize,
    n: usize,
    top_weight: usize,
    bot_weight: usize,
    degree: i64,
) -> usize {
    two_level_space(top, bot, m, n, top_weight, bot_weight, Some(degree)).dim
}

/// The basis space of the split two-level composition; `degree` = None
/// sums over all homological degrees.
pub fn two_level_space(
    top: Rc<dyn BimodSource>,
    bot: Rc<dyn BimodSource>,
    m: usize,
    n: usize,
    top_weight: usize,
    bot_weight: usize,
    degree: Option<i64>,
) -> GraphSpace {
    let ctx = Rc::new(SpaceCtx::new(vec![bot, top]));
    let mut shapes = Vec::new();
    // candidate degrees: sums over source cells are bounded; enumerate
    // the achievable total degrees when unconstrained
    let degs: Vec<i64> = match degree {
        Some(d) => vec![d],
        None => {
            let lo: i64 = ctx.cells.iter().map(|(_, k)| k.3.min(0)).sum::<i64>()
                * (top_weight + bot_weight).max(1) as i64;
            let hi: i64 = ctx
                .cells
                .iter()
                .map(|(_, k)| k.3.max(0))
                .max()
                .unwrap_or(0)
                * (top_weight + bot_weight).max(1) as i64;
            (lo..=hi).collect()
        }
    };
    for d in degs {
        let q = ShapeQuery {
            m,
            n,
            weight: top_weight + bot_weight,
            degree: d,
            two_level: true,
            top_outputs_global: false,
            bottom_outputs_internal: false,
        };
        for g in enumerate_space_shapes(&ctx, &q) {
            let wt: usize = g
                .verts
                .iter()
                .filter(|v| ctx.cell(v.color).0 == 1)
                .map(|v| ctx.weight(v.color))
                .sum();
            if wt == top_weight {
                shapes.push(g);
            }
        }
    }
    GraphSpace::new(ctx, shapes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbimod::{ActionSpec, Component, SBimodule};

    fn comp(name: &str, m: usize, n: usize, out: ActionSpec, inn: ActionSpec) -> Component {
        Component {
            name: name.into(),
            m,
            n,
            weight: 1,
            degree: 0,
            out_action: out,
            in_action: inn,
            czech_out: false,
            czech_in: false,
        }
    }

    #[test]
    fn stabilizer_cell_counted_correctly() {
        // (sgn ⊠_c sgn)(1,1): the double edge has a port-swap stabilizer;
        // the class survives (sign (+1)) and the dimension is 1, which no
        // dims-only formula reproduces.
        let top = Rc::new(MonomialSource::new(SBimodule::new(vec![comp(
            "l",
            1,
            2,
            ActionSpec::Trivial,
            ActionSpec::Sign,
        )])));
        let bot = Rc::new(MonomialSource::new(SBimodule::new(vec![comp(
            "d",
            2,
            1,
            ActionSpec::Sign,
            ActionSpec::Trivial,
        )])));
        assert_eq!(two_level_dim(top, bot, 1, 1, 1, 1, 0), 1);
        // the mixed-sign variant dies: trivial ⊠ sgn gives sign -1 on the
        // stabilizer
        let top = Rc::new(MonomialSource::new(SBimodule::new(vec![comp(
            "l",
            1,
            2,
            ActionSpec::Trivial,
            ActionSpec::Trivial,
        )])));
        let bot = Rc::new(MonomialSource::new(SBimodule::new(vec![comp(
            "d",
            2,
            1,
            ActionSpec::Sign,
            ActionSpec::Trivial,
        )])));
        assert_eq!(two_level_dim(top, bot, 1, 1, 1, 1, 0), 0);
    }

    #[test]
    fn matches_monomial_compose_connected() {
        // the coinvariant route agrees with the canonicalization route
        let q = SBimodule::new(vec![comp("q", 1, 2, ActionSpec::Trivial, ActionSpec::Regular)]);
        let mut pc = vec![comp("p", 2, 1, ActionSpec::Sign, ActionSpec::Trivial)];
        pc.extend(SBimodule::unit().components);
        let p = SBimodule::new(pc);
        for (m, n, w) in [(1usize, 1usize, 2usize), (2, 2, 2), (1, 2, 2), (2, 1, 1)] {
            let graph_route = crate::sbimod::compose_connected(&q, &p, m, n, w, 0).basis.len();
            let mut total = 0;
            for wt in 0..=w {
                total += two_level_dim(
                    Rc::new(MonomialSource::new(q.clone())),
                    Rc::new(MonomialSource::new(p.clone())),
                    m,
                    n,
                    wt,
                    w - wt,
                    0,
                );
            }
            assert_eq!(graph_route, total, "cell ({},{},{})", m, n, w);
        }
    }
}
