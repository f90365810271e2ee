//! Quadratic presentations P = F(V)/(R): ideal expansion, quotient bases
//! with their symmetric-group actions and products, Koszul dual
//! presentations through R-perp with the Czech twist, reversal, and the
//! replacement-rule dimension model.

use crate::freeprop::{combo_add, Combo, FreeCtx};
use crate::graphcore::{self, Graph, GraphJson, Hook};
use crate::ratlin::{self, qi, Echelon, RatMatrix, SparseVec, Q};
use crate::sbimod::{CellKey, DimTable, SBimodule};
use crate::symgroup::Permutation;
use num::Zero;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

/// A relation: a linear combination inside one cell F_(2)(V)(m,n).
#[derive(Clone, Debug)]
pub struct Relation {
    pub m: usize,
    pub n: usize,
    pub combo: Combo,
}

/// A quadratic presentation with its free-properad context.
pub struct Presentation {
    pub name: String,
    pub ctx: FreeCtx,
    pub relations: Vec<Relation>,
    quotients: RefCell<HashMap<(usize, usize, usize), Rc<QuotientCell>>>,
    closed: RefCell<HashMap<(usize, usize), Rc<Vec<SparseVec>>>>,
}

/// One quotient cell P_(d)(m,n): the ideal echelon inside the free basis
/// and the complement columns forming the quotient basis.
pub struct QuotientCell {
    pub weight: usize,
    pub m: usize,
    pub n: usize,
    pub free: Rc<crate::freeprop::FreeBasis>,
    pub ideal: Echelon,
    /// free-basis indices forming the quotient basis (non-pivot columns)
    pub cols: Vec<usize>,
    pub pos: HashMap<usize, usize>,
}

impl QuotientCell {
    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// Reduce a free-cell combo modulo the ideal; coordinates in the
    /// quotient basis.
    pub fn reduce(&self, combo: &Combo) -> Vec<Q> {
        let v: SparseVec = combo.iter().map(|(i, c)| (*i, c.clone())).collect();
        let r = self.ideal.reduce(v);
        let mut out = vec![Q::zero(); self.cols.len()];
        for (i, c) in r {
            out[self.pos[&i]] = c;
        }
        out
    }

    /// The free-basis representative of quotient basis element k.
    pub fn rep(&self, k: usize) -> (&Graph, &[usize]) {
        let (g, d) = &self.free.elems[self.cols[k]];
        (g, d)
    }
}

impl Presentation {
    pub fn new(name: &str, generators: SBimodule, relations: Vec<Relation>) -> Self {
        for c in &generators.components {
            assert_eq!(c.weight, 1, "quadratic presentations have weight-1 generators");
        }
        Presentation {
            name: name.into(),
            ctx: FreeCtx::new(generators),
            relations,
            quotients: RefCell::new(HashMap::new()),
            closed: RefCell::new(HashMap::new()),
        }
    }

    pub fn generators(&self) -> &SBimodule {
        &self.ctx.v
    }

    /// Replace the relation list (used by preset constructors that need
    /// the context to build their relation combos first).
    pub fn with_relations(self, relations: Vec<Relation>) -> Presentation {
        Presentation { relations, ..self }
    }

    /// Relabel the global legs of a basis element: out-leg l ↦ θ(l),
    /// in-leg l ↦ ω(l). Returns the resolved combo.
    pub fn act_legs(
        ctx: &FreeCtx,
        g: &Graph,
        decor: &[usize],
        theta: &Permutation,
        omega: &Permutation,
    ) -> Combo {
        let g2 = relabel_legs(g, theta, omega);
        ctx.resolve_combo(&g2, decor, &qi(1))
    }

    /// The S-closure of the relations in one cell, as an echelon basis of
    /// sparse vectors over the free F_(2) cell basis.
    pub fn closed_relations(&self, m: usize, n: usize) -> Rc<Vec<SparseVec>> {
        if let Some(v) = self.closed.borrow().get(&(m, n)) {
            return v.clone();
        }
        let mut ech = Echelon::new();
        let mut rows: Vec<SparseVec> = Vec::new();
        for rel in self.relations.iter().filter(|r| r.m == m && r.n == n) {
            let basis = self.ctx.basis(2, m, n);
            for theta in Permutation::all(m) {
                for omega in Permutation::all(n) {
                    let mut img = Combo::new();
                    for (i, c) in &rel.combo {
                        let (g, d) = &basis.elems[*i];
                        let moved = Self::act_legs(&self.ctx, g, d, &theta, &omega);
                        for (j, cc) in moved {
                            combo_add(&mut img, j, cc * c);
                        }
                    }
                    let v: SparseVec = img.into_iter().collect();
                    if ech.insert(v.clone()) {
                        rows.push(v);
                    }
                }
            }
        }
        let rc = Rc::new(rows);
        self.closed.borrow_mut().insert((m, n), rc.clone());
        rc
    }

    /// The quotient cell P_(d)(m,n) with its ideal echelon.
    pub fn quotient(&self, d: usize, m: usize, n: usize) -> Rc<QuotientCell> {
        assert!(d >= 1, "weight 0 is the unit cell");
        if let Some(c) = self.quotients.borrow().get(&(d, m, n)) {
            return c.clone();
        }
        let free = self.ctx.basis(d, m, n);
        let mut ideal = Echelon::new();
        let mut seen_ctx: std::collections::HashSet<(Vec<u32>, Vec<usize>)> =
            std::collections::HashSet::new();
        if d >= 2 {
            for bi in 0..free.elems.len() {
                let (g, dec) = &free.elems[bi];
                for (lo, hi) in g.adjacent_pairs() {
                    let (ambient, amb_dec, hole, cell) = contract_pair(g, dec, lo, hi);
                    if !seen_ctx.insert((graphcore::serialize(&ambient), amb_dec.clone())) {
                        continue;
                    }
                    let rels = self.closed_relations(cell.0, cell.1);
                    let rel_basis = self.ctx.basis(2, cell.0, cell.1);
                    for r in rels.iter() {
                        let mut img = Combo::new();
                        for (i, c) in r {
                            let (h, hdec) = &rel_basis.elems[*i];
                            let glued = graphcore::graft(&ambient, hole, h);
                            let mut gdec = amb_dec.clone();
                            gdec.extend_from_slice(hdec);
                            for (j, cc) in self.ctx.resolve_combo(&glued, &gdec, c) {
                                combo_add(&mut img, j, cc);
                            }
                        }
                        ideal.insert(img.into_iter().collect());
                    }
                }
            }
        }
        let cols = ideal.complement(free.elems.len());
        let pos = cols.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let cell = Rc::new(QuotientCell { weight: d, m, n, free, ideal, cols, pos });
        self.quotients.borrow_mut().insert((d, m, n), cell.clone());
        cell
    }

    /// dim F_(d)(V)(m,n) − rank(ideal); d = 0 gives the unit.
    pub fn quotient_dim(&self, d: usize, m: usize, n: usize) -> usize {
        if d == 0 {
            return if m == 1 && n == 1 { 1 } else { 0 };
        }
        if self.ctx.dim(d, m, n) == 0 {
            return 0;
        }
        self.quotient(d, m, n).dim()
    }

    /// Rank of the weight-d ideal cell.
    pub fn ideal_rank(&self, d: usize, m: usize, n: usize) -> usize {
        if d < 2 || self.ctx.dim(d, m, n) == 0 {
            return 0;
        }
        self.quotient(d, m, n).ideal.rank()
    }

    /// Quotient dims for all cells with weight ≤ max_w and m+n ≤ max_mn,
    /// including the unit cell (1,1,0,0).
    pub fn dims_table(&self, max_w: usize, max_mn: usize) -> DimTable {
        let mut out = DimTable::new();
        out.insert((1, 1, 0, 0), 1);
        for w in 1..=max_w {
            for m in 1..max_mn {
                for n in 1..max_mn {
                    if m + n > max_mn {
                        continue;
                    }
                    let d = self.quotient_dim(w, m, n);
                    if d > 0 {
                        out.insert((m, n, w, 0), d);
                    }
                }
            }
        }
        out
    }

    /// Matrix of the leg-relabeling action (θ on outputs, ω on inputs) on
    /// the quotient basis of a cell.
    pub fn quotient_action(
        &self,
        cell: &QuotientCell,
        theta: &Permutation,
        omega: &Permutation,
    ) -> RatMatrix {
        let mut mtx = RatMatrix::zero(cell.dim(), cell.dim());
        for k in 0..cell.dim() {
            let (g, d) = cell.rep(k);
            let moved = Self::act_legs(&self.ctx, g, d, theta, omega);
            let col = cell.reduce(&moved);
            for (i, v) in col.into_iter().enumerate() {
                if !v.is_zero() {
                    mtx.set(i, k, v);
                }
            }
        }
        mtx
    }

    /// The (m,n) cells that can carry 2-vertex graphs over the
    /// generators.
    fn two_vertex_cells(&self) -> Vec<(usize, usize)> {
        let mut cells: Vec<(usize, usize)> = Vec::new();
        for c1 in &self.ctx.v.components {
            for c2 in &self.ctx.v.components {
                // glue k >= 1 outputs of c1 into inputs of c2
                let kmax = c1.m.min(c2.n);
                for k in 1..=kmax {
                    let m = c2.m + c1.m - k;
                    let n = c1.n + c2.n - k;
                    if !cells.contains(&(m, n)) {
                        cells.push((m, n));
                    }
                }
            }
        }
        cells.sort_unstable();
        cells
    }

    /// Koszul dual presentation: Czech-twisted dual generators; the
    /// relations annihilate P^i_(2) = ker(F_(2)(ΣV) → P̄_(2)) under the
    /// diagonal pairing between F_(2)(V^∨) and F_(2)(ΣV) whose per-class
    /// signs are propagated from the leg actions (the suspension carries
    /// the Koszul-sign twist that a plain Kronecker pairing misses).
    pub fn koszul_dual_presentation(&self) -> Presentation {
        let dual = Presentation::new(
            &format!("{}!", self.name),
            self.ctx.v.czech_dual(),
            Vec::new(),
        );
        let susp_ctx = FreeCtx::new(suspend_module(&self.ctx.v));
        let mut relations = Vec::new();
        for (m, n) in self.two_vertex_cells() {
            let bd = dual.ctx.basis(2, m, n);
            let bs = susp_ctx.basis(2, m, n);
            if bd.dim() == 0 && bs.dim() == 0 {
                continue;
            }
            // match classes between the dual and the suspended bases
            let (pairs, eps) = matched_pairing(&dual.ctx, &bd, &susp_ctx, &bs, m, n);
            // K2 = kernel of the quotient projection on the suspended
            // classes read as unsuspended free classes
            let quot = if self.ctx.dim(2, m, n) > 0 { Some(self.quotient(2, m, n)) } else { None };
            let mut rows: Vec<SparseVec> = Vec::new();
            for si in 0..bs.dim() {
                let (g, t) = &bs.elems[si];
                let remapped = remap_colors(&susp_ctx, &self.ctx, g);
                let combo = self.ctx.resolve_combo(&remapped, t, &qi(1));
                let col: Vec<Q> = match &quot {
                    Some(qc) if !combo.is_empty() => qc.reduce(&combo),
                    _ => Vec::new(),
                };
                for (r, c) in col.into_iter().enumerate() {
                    if !c.is_zero() {
                        while rows.len() <= r {
                            rows.push(Vec::new());
                        }
                        rows[r].push((si, c));
                    }
                }
            }
            let k2 = ratlin::kernel_of_rows(&rows, bs.dim());
            if std::env::var("PROPERADS_DEBUG_DUAL").is_ok() {
                eprintln!("cell ({},{}): pairs {:?} eps {:?}", m, n, pairs, eps);
                for xi in &k2 {
                    eprintln!("  k2: {:?}", xi.iter().map(|(i, c)| (*i, c.to_string())).collect::<Vec<_>>());
                }
            }
            // annihilator: w over dual classes with Σ ε_i w_{d(i)} ξ_{s(i)} = 0
            let mut ann_rows: Vec<SparseVec> = Vec::new();
            for xi in &k2 {
                let mut row: SparseVec = Vec::new();
                for (pi, &(di, si)) in pairs.iter().enumerate() {
                    if let Some(c) = xi.iter().find(|(j, _)| *j == si).map(|(_, c)| c) {
                        row.push((di, c * qi(eps[pi])));
                    }
                }
                row.sort_by_key(|(i, _)| *i);
                ann_rows.push(row);
            }
            let span: Vec<Vec<Q>> =
                ann_rows.iter().map(|v| ratlin::sparse_to_dense(v, bd.dim())).collect();
            for w in ratlin::orthogonal_complement(&span, bd.dim()) {
                let combo: Combo =
                    w.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
                relations.push(Relation { m, n, combo });
            }
        }
        let dual = Presentation {
            relations,
            ..Presentation::new(&format!("{}!", self.name), self.ctx.v.czech_dual(), vec![])
        };
        // the dual relation space must be stable under the leg actions
        for (m, n) in dual
            .relations
            .iter()
            .map(|r| (r.m, r.n))
            .collect::<std::collections::BTreeSet<_>>()
        {
            let closed = dual.closed_relations(m, n);
            let direct: usize = dual.relations.iter().filter(|r| r.m == m && r.n == n).count();
            if std::env::var("PROPERADS_SKIP_STABILITY").is_err() {
                assert_eq!(
                    closed.len(),
                    direct,
                    "dual relations not stable under the symmetric-group actions"
                );
            }
        }
        dual
    }

    /// The reversed presentation P^op: swap inputs and outputs everywhere.
    pub fn reverse(&self) -> Presentation {
        let rev_gens = self.ctx.v.reverse();
        let rev = Presentation::new(&format!("{}'", self.name), rev_gens, Vec::new());
        let mut relations = Vec::new();
        for rel in &self.relations {
            let basis = self.ctx.basis(2, rel.m, rel.n);
            let mut combo = Combo::new();
            for (i, c) in &rel.combo {
                let (g, d) = &basis.elems[*i];
                let (fg, fd) = flip_graph(&self.ctx, &rev.ctx, g, d);
                for (j, cc) in rev.ctx.resolve_combo(&fg, &fd, c) {
                    combo_add(&mut combo, j, cc);
                }
            }
            relations.push(Relation { m: rel.n, n: rel.m, combo });
        }
        Presentation { relations, ..rev }
    }

    /// dim Σ_k (A-quotient weight k) ⊠_c (B-quotient weight d−k) at (m,n):
    /// the replacement-rule model P ≅ A ⊠_c B (A on the output side),
    /// computed over the quotients' actual symmetric-group actions.
    pub fn replacement_model_dim(
        a: &Rc<Presentation>,
        b: &Rc<Presentation>,
        d: usize,
        m: usize,
        n: usize,
    ) -> usize {
        assert!(
            a.ctx.v.components.iter().all(|c| c.m == 1),
            "A must be generated by operations"
        );
        assert!(
            b.ctx.v.components.iter().all(|c| c.n == 1),
            "B must be generated by cooperations"
        );
        // interface edges let factor cells exceed the global arity: a
        // weight-w cluster of binary generators reaches arity w + 1
        let bound = m + n + 2 * d;
        let top: Rc<dyn crate::spaces::BimodSource> =
            Rc::new(QuotientSource::new(a.clone(), d, bound, true));
        let bot: Rc<dyn crate::spaces::BimodSource> =
            Rc::new(QuotientSource::new(b.clone(), d, bound, true));
        let mut total = 0;
        for k in 0..=d {
            total += crate::spaces::two_level_dim(top.clone(), bot.clone(), m, n, k, d - k, 0);
        }
        total
    }
}

/// The quotient properad of a presentation as a computed S-bimodule:
/// cells (m, n, w, 0) with w ≤ max_w and m + n ≤ max_mn, optionally with
/// the unit cell adjoined.
pub struct QuotientSource {
    pub pres: Rc<Presentation>,
    pub max_w: usize,
    pub max_mn: usize,
    pub with_unit: bool,
}

impl QuotientSource {
    pub fn new(pres: Rc<Presentation>, max_w: usize, max_mn: usize, with_unit: bool) -> Self {
        QuotientSource { pres, max_w, max_mn, with_unit }
    }
}

impl crate::spaces::BimodSource for QuotientSource {
    fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        if self.with_unit {
            out.push((1, 1, 0, 0));
        }
        for w in 1..=self.max_w {
            for m in 1..self.max_mn {
                for n in 1..self.max_mn {
                    if m + n > self.max_mn {
                        continue;
                    }
                    if self.pres.quotient_dim(w, m, n) > 0 {
                        out.push((m, n, w, 0));
                    }
                }
            }
        }
        out
    }

    fn dim(&self, key: CellKey) -> usize {
        let (m, n, w, d) = key;
        if d != 0 {
            return 0;
        }
        self.pres.quotient_dim(w, m, n)
    }

    fn act(&self, key: CellKey, theta: &Permutation, omega: &Permutation) -> RatMatrix {
        let (m, n, w, _) = key;
        if w == 0 {
            return RatMatrix::identity(1);
        }
        let cell = self.pres.quotient(w, m, n);
        self.pres.quotient_action(&cell, theta, omega)
    }
}

/// The same generators in homological degree 1 (one suspension each).
fn suspend_module(v: &SBimodule) -> SBimodule {
    SBimodule::new(
        v.components
            .iter()
            .map(|c| crate::sbimod::Component { degree: 1, name: format!("s{}", c.name), ..c.clone() })
            .collect(),
    )
}

/// Reinterpret a graph built over `from`'s cell colors in `to`'s colors,
/// matching cells by (m, n, weight) and ignoring the degree.
fn remap_colors(from: &FreeCtx, to: &FreeCtx, g: &Graph) -> Graph {
    let mut g2 = g.clone();
    for v in &mut g2.verts {
        let (m, n, w, _) = from.table.cell(v.color).key;
        let color = to
            .colors
            .iter()
            .find(|(k, _)| k.0 == m && k.1 == n && k.2 == w)
            .map(|(_, c)| *c)
            .expect("matching cell in target context");
        v.color = color;
    }
    g2
}

/// Match the canonical classes of F_(2)(V^∨) and F_(2)(ΣV) by underlying
/// shape and decoration tuple, and propagate the per-class pairing signs
/// ε along the leg actions: for each transposition move g with
/// sign character c(g) = sgn(θ)sgn(ω), consistency demands
/// ε_k = c(g) · sign_∨(i→k) · sign_Σ(i→k) · ε_i. The propagation must
/// close consistently (this is the content of P^{i∨} being a twisted
/// dual); inconsistency panics.
fn matched_pairing(
    dual_ctx: &FreeCtx,
    bd: &crate::freeprop::FreeBasis,
    susp_ctx: &FreeCtx,
    bs: &crate::freeprop::FreeBasis,
    m: usize,
    n: usize,
) -> (Vec<(usize, usize)>, Vec<i64>) {
    // serials agree between the two contexts because cells enumerate in
    // the same order on both sides
    let mut skey: HashMap<(Vec<u32>, Vec<usize>), usize> = HashMap::new();
    for (i, (g, t)) in bs.elems.iter().enumerate() {
        skey.insert((graphcore::serialize(g), t.clone()), i);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut pair_of_dual: HashMap<usize, usize> = HashMap::new();
    for (i, (g, t)) in bd.elems.iter().enumerate() {
        if let Some(&si) = skey.get(&(graphcore::serialize(g), t.clone())) {
            pair_of_dual.insert(i, pairs.len());
            pairs.push((i, si));
        }
    }
    // single-term action of a transposition move on a basis element
    let act_one = |ctx: &FreeCtx,
                   basis: &crate::freeprop::FreeBasis,
                   i: usize,
                   theta: &Permutation,
                   omega: &Permutation|
     -> Option<(usize, i64)> {
        let (g, t) = &basis.elems[i];
        let moved = relabel_legs(g, theta, omega);
        let (_, idx, sign) = ctx.resolve(&moved, t)?;
        Some((idx, sign))
    };
    let mut eps: Vec<Option<i64>> = vec![None; pairs.len()];
    let mut moves: Vec<(Permutation, Permutation, i64)> = Vec::new();
    for a in 0..m.saturating_sub(1) {
        let mut im: Vec<usize> = (1..=m).collect();
        im.swap(a, a + 1);
        moves.push((Permutation::from_one_line(&im).unwrap(), Permutation::identity(n), -1));
    }
    for a in 0..n.saturating_sub(1) {
        let mut im: Vec<usize> = (1..=n).collect();
        im.swap(a, a + 1);
        moves.push((Permutation::identity(m), Permutation::from_one_line(&im).unwrap(), -1));
    }
    for start in 0..pairs.len() {
        if eps[start].is_some() {
            continue;
        }
        eps[start] = Some(1);
        let mut queue = vec![start];
        while let Some(p) = queue.pop() {
            let (di, si) = pairs[p];
            let e = eps[p].unwrap();
            for (theta, omega, ch) in &moves {
                let dmove = act_one(dual_ctx, bd, di, theta, omega);
                let smove = act_one(susp_ctx, bs, si, theta, omega);
                let (Some((dk, dsign)), Some((sk, ssign))) = (dmove, smove) else {
                    continue;
                };
                let Some(&pk) = pair_of_dual.get(&dk) else {
                    continue;
                };
                if pairs[pk].1 != sk {
                    // the permutation parts of the two actions agree on
                    // matched classes; a mismatch would break the pairing
                    panic!("matched classes diverge under the leg actions");
                }
                let want = ch * dsign * ssign * e;
                match eps[pk] {
                    None => {
                        eps[pk] = Some(want);
                        queue.push(pk);
                    }
                    Some(have) => {
                        assert_eq!(
                            have, want,
                            "pairing sign propagation inconsistent in cell ({},{})",
                            m, n
                        );
                    }
                }
            }
        }
    }
    (pairs, eps.into_iter().map(|e| e.unwrap()).collect())
}

/// Relabel global legs: out-leg l ↦ θ(l), in-leg l ↦ ω(l).
pub fn relabel_legs(g: &Graph, theta: &Permutation, omega: &Permutation) -> Graph {
    let mut g2 = g.clone();
    for (l, &(v, p)) in g.out_legs.iter().enumerate() {
        let nl = theta.apply0(l);
        g2.out_legs[nl] = (v, p);
        g2.out_hook[v][p] = Hook::Leg(nl);
    }
    for (l, &(v, q)) in g.in_legs.iter().enumerate() {
        let nl = omega.apply0(l);
        g2.in_legs[nl] = (v, q);
        g2.in_hook[v][q] = Hook::Leg(nl);
    }
    g2
}

/// Turn a graph upside down: edges reverse, ports and legs swap sides,
/// decorations swap their tensor factors. Colors are remapped into the
/// reversed context's cell table.
pub fn flip_graph(
    ctx: &FreeCtx,
    rev_ctx: &FreeCtx,
    g: &Graph,
    decor: &[usize],
) -> (Graph, Vec<usize>) {
    let flip_hook = |h: &Hook| match *h {
        Hook::Leg(l) => Hook::Leg(l),
        Hook::Port(v, p) => Hook::Port(v, p),
    };
    let verts: Vec<graphcore::Vertex> = g
        .verts
        .iter()
        .map(|v| {
            let (m, n, w, d) = ctx.table.cell(v.color).key;
            let color = rev_ctx.colors[&(n, m, w, d)];
            graphcore::Vertex { outs: v.ins, ins: v.outs, color }
        })
        .collect();
    let graph = Graph {
        verts,
        out_hook: g.in_hook.iter().map(|hs| hs.iter().map(flip_hook).collect()).collect(),
        in_hook: g.out_hook.iter().map(|hs| hs.iter().map(flip_hook).collect()).collect(),
        out_legs: g.in_legs.clone(),
        in_legs: g.out_legs.clone(),
    };
    let mut dec = Vec::with_capacity(decor.len());
    for (v, &e) in decor.iter().enumerate() {
        let cell = ctx.table.cell(g.verts[v].color);
        assert_eq!(cell.comps.len(), 1, "flip expects single-component cells per color");
        let din = cell.comps[0].in_action.dim(cell.comps[0].n);
        let (eo, ei) = (e / din, e % din);
        // reversed component: out/in tensor factors swap
        let rev_din = cell.comps[0].out_action.dim(cell.comps[0].m);
        dec.push(ei * rev_din + eo);
    }
    (graph, dec)
}

/// Contract the adjacent pair (lo, hi) of g into a single hole vertex.
/// Returns the ambient graph (kept vertices in original order, hole
/// last), the ambient decoration list, the hole index, and the hole's
/// (m', n') cell. The hole's ports follow the boundary order of
/// `induced_subgraph` on {lo, hi}, so grafting a 2-vertex cell basis
/// element of that cell back in is leg-for-leg consistent.
pub fn contract_pair(
    g: &Graph,
    decor: &[usize],
    lo: usize,
    hi: usize,
) -> (Graph, Vec<usize>, usize, (usize, usize)) {
    let mut keep: Vec<usize> = (0..g.nv()).filter(|&v| v != lo && v != hi).collect();
    keep.sort_unstable();
    let pair = graphcore::induced_subgraph(g, &[lo.min(hi), lo.max(hi)]);
    let mprime = pair.graph.m();
    let nprime = pair.graph.n();

    let nv = keep.len() + 1;
    let hole = nv - 1;
    let mut inv = vec![usize::MAX; g.nv()];
    for (i, &v) in keep.iter().enumerate() {
        inv[v] = i;
    }
    let mut verts: Vec<graphcore::Vertex> =
        keep.iter().map(|&v| g.verts[v]).collect();
    verts.push(graphcore::Vertex { outs: mprime, ins: nprime, color: u32::MAX });
    let mut out_hook: Vec<Vec<Hook>> =
        verts.iter().map(|s| vec![Hook::Leg(usize::MAX); s.outs]).collect();
    let mut in_hook: Vec<Vec<Hook>> =
        verts.iter().map(|s| vec![Hook::Leg(usize::MAX); s.ins]).collect();
    let mut out_legs = vec![(0usize, 0usize); g.m()];
    let mut in_legs = vec![(0usize, 0usize); g.n()];

    // hole port semantics from the pair part's boundary descriptors
    for (pp, desc) in pair.out_desc.iter().enumerate() {
        match desc {
            graphcore::PartBoundary::Out(l) => {
                out_hook[hole][pp] = Hook::Leg(*l);
                out_legs[*l] = (hole, pp);
            }
            graphcore::PartBoundary::CutEdge((_, _, v, q)) => {
                out_hook[hole][pp] = Hook::Port(inv[*v], *q);
                in_hook[inv[*v]][*q] = Hook::Port(hole, pp);
            }
            graphcore::PartBoundary::In(_) => unreachable!(),
        }
    }
    for (qq, desc) in pair.in_desc.iter().enumerate() {
        match desc {
            graphcore::PartBoundary::In(l) => {
                in_hook[hole][qq] = Hook::Leg(*l);
                in_legs[*l] = (hole, qq);
            }
            graphcore::PartBoundary::CutEdge((u, p, _, _)) => {
                in_hook[hole][qq] = Hook::Port(inv[*u], *p);
                out_hook[inv[*u]][*p] = Hook::Port(hole, qq);
            }
            graphcore::PartBoundary::Out(_) => unreachable!(),
        }
    }
    // edges and legs among kept vertices
    for (u, p, v, q) in g.edges() {
        if inv[u] != usize::MAX && inv[v] != usize::MAX {
            out_hook[inv[u]][p] = Hook::Port(inv[v], q);
            in_hook[inv[v]][q] = Hook::Port(inv[u], p);
        }
    }
    for (l, &(v, p)) in g.out_legs.iter().enumerate() {
        if inv[v] != usize::MAX {
            out_hook[inv[v]][p] = Hook::Leg(l);
            out_legs[l] = (inv[v], p);
        }
    }
    for (l, &(v, q)) in g.in_legs.iter().enumerate() {
        if inv[v] != usize::MAX {
            in_hook[inv[v]][q] = Hook::Leg(l);
            in_legs[l] = (inv[v], q);
        }
    }
    let ambient = Graph { verts, out_hook, in_hook, out_legs, in_legs };
    let amb_dec: Vec<usize> = keep.iter().map(|&v| decor[v]).collect();
    (ambient, amb_dec, hole, (mprime, nprime))
}

/// JSON form of a presentation: generators plus relations as coefficient
/// lists over an explicitly serialized 2-vertex graph basis.
#[derive(Serialize, Deserialize)]
pub struct PresentationJson {
    pub name: String,
    pub generators: Vec<crate::sbimod::Component>,
    pub relations: Vec<RelationJson>,
}

#[derive(Serialize, Deserialize)]
pub struct RelationJson {
    pub m: usize,
    pub n: usize,
    /// the full canonical basis of F_(2)(V)(m,n): graphs with decorations
    pub basis: Vec<(GraphJson, Vec<usize>)>,
    /// coefficients over that basis, as exact rational strings
    pub coefficients: Vec<String>,
}

impl Presentation {
    pub fn to_json(&self) -> PresentationJson {
        let mut relations = Vec::new();
        for rel in &self.relations {
            let basis = self.ctx.basis(2, rel.m, rel.n);
            let bjson: Vec<(GraphJson, Vec<usize>)> = basis
                .elems
                .iter()
                .map(|(g, d)| (GraphJson::from(g), d.clone()))
                .collect();
            let mut coeffs = vec!["0".to_string(); basis.dim()];
            for (i, c) in &rel.combo {
                coeffs[*i] = c.to_string();
            }
            relations.push(RelationJson { m: rel.m, n: rel.n, basis: bjson, coefficients: coeffs });
        }
        PresentationJson {
            name: self.name.clone(),
            generators: self.ctx.v.components.clone(),
            relations,
        }
    }

    pub fn from_json(j: &PresentationJson) -> Result<Presentation, String> {
        let gens = SBimodule::new(j.generators.clone());
        let pres = Presentation::new(&j.name, gens, Vec::new());
        let mut relations = Vec::new();
        for rj in &j.relations {
            let basis = pres.ctx.basis(2, rj.m, rj.n);
            if rj.coefficients.len() != basis.dim() {
                return Err(format!(
                    "relation basis size mismatch in cell ({},{}): {} vs {}",
                    rj.m,
                    rj.n,
                    rj.coefficients.len(),
                    basis.dim()
                ));
            }
            let mut combo = Combo::new();
            for (i, s) in rj.coefficients.iter().enumerate() {
                let c: Q = s.parse().map_err(|e| format!("bad rational {}: {:?}", s, e))?;
                if !c.is_zero() {
                    // check the serialized basis element matches ours
                    let (gj, dec) = &rj.basis[i];
                    let g = gj.to_graph()?;
                    let (_, idx, sign) = pres
                        .ctx
                        .resolve(&g, dec)
                        .ok_or_else(|| "serialized basis element is a zero class".to_string())?;
                    combo_add(&mut combo, idx, c * qi(sign));
                }
            }
            relations.push(Relation { m: rj.m, n: rj.n, combo });
        }
        Ok(Presentation { relations, ..pres })
    }
}

/// Dimension table of the free properad on the generators of `pres`
/// (ignoring relations), including the unit.
pub fn free_dims_table(ctx: &FreeCtx, max_w: usize, max_mn: usize) -> DimTable {
    let mut out = DimTable::new();
    out.insert((1, 1, 0, 0), 1);
    for w in 1..=max_w {
        for m in 1..max_mn {
            for n in 1..max_mn {
                if m + n > max_mn {
                    continue;
                }
                let d = ctx.dim(w, m, n);
                if d > 0 {
                    out.insert((m, n, w, 0), d);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDims(pub BTreeMap<String, usize>);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn associative_quotients() {
        let a = presets::get("as").unwrap();
        assert_eq!(a.quotient_dim(1, 1, 2), 2);
        assert_eq!(a.ideal_rank(2, 1, 3), 6);
        assert_eq!(a.quotient_dim(2, 1, 3), 6);
        assert_eq!(a.quotient_dim(3, 1, 4), 24);
    }

    #[test]
    fn lie_and_com_quotients() {
        let lie = presets::get("lie").unwrap();
        assert_eq!(lie.quotient_dim(2, 1, 3), 2);
        assert_eq!(lie.quotient_dim(3, 1, 4), 6);
        let com = presets::get("com").unwrap();
        assert_eq!(com.quotient_dim(2, 1, 3), 1);
        assert_eq!(com.quotient_dim(3, 1, 4), 1);
    }

    #[test]
    fn bilie_mixed_cell() {
        // the 5-term cocycle relation closes to a 1-dimensional space in
        // the (2,2) cell; the quotient matches Lie ⊠_c Lie^op there
        let b = presets::get("bilie").unwrap();
        assert_eq!(b.ctx.dim(2, 2, 2), 5);
        assert_eq!(b.ideal_rank(2, 2, 2), 1);
        assert_eq!(b.quotient_dim(2, 2, 2), 4);
        assert_eq!(b.quotient_dim(2, 1, 3), 2);
        assert_eq!(b.quotient_dim(2, 3, 1), 2);
    }

    #[test]
    fn bilie0_kills_the_loop() {
        let b0 = presets::get("bilie0").unwrap();
        assert_eq!(b0.quotient_dim(2, 1, 1), 0);
        let b = presets::get("bilie").unwrap();
        assert_eq!(b.quotient_dim(2, 1, 1), 1);
    }

    #[test]
    fn dual_of_dualnumbers_is_free() {
        let dn = presets::get("dualnumbers").unwrap();
        assert_eq!(dn.quotient_dim(2, 1, 1), 0);
        let dual = dn.koszul_dual_presentation();
        for d in 0..=4 {
            assert_eq!(dual.quotient_dim(d, 1, 1), 1, "free algebra has dim 1 in weight {}", d);
        }
    }

    #[test]
    fn reverse_is_involutive() {
        let b = presets::get("bilie").unwrap();
        let rr = b.reverse().reverse();
        for (d, m, n) in [(1, 1, 2), (1, 2, 1), (2, 2, 2), (2, 1, 3)] {
            assert_eq!(b.quotient_dim(d, m, n), rr.quotient_dim(d, m, n));
        }
        // Lie^op generator sits in (2,1) with left sgn action
        let lie = presets::get("lie").unwrap();
        let lop = lie.reverse();
        assert_eq!(lop.generators().dim(2, 1), 1);
        assert_eq!(lop.quotient_dim(2, 3, 1), 2);
    }

    #[test]
    fn replacement_model_bilie() {
        // Lemma 8.1: BiLie ≅ Lie ⊠_c Lie^op at the dimension level
        let b = presets::get("bilie").unwrap();
        let lie = Rc::new(presets::get("lie").unwrap());
        let lop = Rc::new(lie.reverse());
        for d in 1..=2usize {
            for m in 1..=2usize {
                for n in 1..=2usize {
                    let model = Presentation::replacement_model_dim(&lie, &lop, d, m, n);
                    assert_eq!(
                        b.quotient_dim(d, m, n),
                        model,
                        "cell d={} ({},{})",
                        d,
                        m,
                        n
                    );
                }
            }
        }
    }

    #[test]
    fn classical_dualities_at_dimension_level() {
        // Com^! = Lie, Lie^! = Com, As^! = As
        let com = presets::get("com").unwrap();
        let lie = presets::get("lie").unwrap();
        let as_ = presets::get("as").unwrap();
        let comd = com.koszul_dual_presentation();
        let lied = lie.koszul_dual_presentation();
        let asd = as_.koszul_dual_presentation();
        for d in 1..=3usize {
            let n = d + 1;
            assert_eq!(comd.quotient_dim(d, 1, n), lie.quotient_dim(d, 1, n), "com! vs lie d={}", d);
            assert_eq!(lied.quotient_dim(d, 1, n), com.quotient_dim(d, 1, n), "lie! vs com d={}", d);
            assert_eq!(asd.quotient_dim(d, 1, n), as_.quotient_dim(d, 1, n), "as! vs as d={}", d);
        }
    }

    #[test]
    fn bilie_dual_matches_frob() {
        let b = presets::get("bilie").unwrap();
        let bd = b.koszul_dual_presentation();
        let f = presets::get("frob").unwrap();
        for d in 1..=2usize {
            for m in 1..=2usize {
                for n in 1..=2usize {
                    assert_eq!(
                        bd.quotient_dim(d, m, n),
                        f.quotient_dim(d, m, n),
                        "cell d={} ({},{})",
                        d,
                        m,
                        n
                    );
                }
            }
        }
        // Cor 8.3: BiLie^!(m,n) = k in weight m+n-2
        assert_eq!(bd.quotient_dim(2, 1, 3), 1);
        assert_eq!(bd.quotient_dim(2, 2, 2), 1);
        assert_eq!(bd.quotient_dim(2, 1, 1), 0);
        assert_eq!(bd.quotient_dim(1, 1, 2), 1);
    }

    #[test]
    fn presentation_round_trips_through_json() {
        let b = presets::get("bilie").unwrap();
        let j = b.to_json();
        let s = serde_json::to_string(&j).unwrap();
        let j2: PresentationJson = serde_json::from_str(&s).unwrap();
        let b2 = Presentation::from_json(&j2).unwrap();
        for (d, m, n) in [(1, 1, 2), (2, 2, 2), (2, 1, 3)] {
            assert_eq!(b.quotient_dim(d, m, n), b2.quotient_dim(d, m, n));
        }
    }
}
