//! Free properad components F_(d)(V)(m,n) as decorated-graph bases,
//! graph-substitution composition and the admissible-cut coproduct.
//!
//! Basis graphs carry no level structure; levels exist only transiently in
//! cuts and in the bar complexes built on top of this module.

use crate::graphcore::{self, Graph, Hook};
use crate::ratlin::Q;
use crate::sbimod::{AutCache, CellKey, CellTable, ClassKey, SBimodule};
use crate::symgroup::koszul_sign;
use num::Zero;
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

/// A linear combination over a fixed cell basis: index → coefficient,
/// no explicit zeros.
pub type Combo = BTreeMap<usize, Q>;

pub fn combo_add(acc: &mut Combo, idx: usize, c: Q) {
    if c.is_zero() {
        return;
    }
    let e = acc.entry(idx).or_insert_with(Q::zero);
    *e += c;
    if e.is_zero() {
        acc.remove(&idx);
    }
}

pub fn combo_scale(c: &Combo, s: &Q) -> Combo {
    if s.is_zero() {
        return Combo::new();
    }
    c.iter().map(|(i, x)| (*i, x * s)).collect()
}

/// Deterministic basis of one cell F_(d)(V)(m,n).
pub struct FreeBasis {
    pub weight: usize,
    pub m: usize,
    pub n: usize,
    /// canonical decorated representatives
    pub elems: Vec<(Graph, Vec<usize>)>,
    index: HashMap<ClassKey, usize>,
}

impl FreeBasis {
    pub fn dim(&self) -> usize {
        self.elems.len()
    }
}

/// Shared context for one generating S-bimodule V: the color table, the
/// automorphism cache and the per-cell basis cache.
pub struct FreeCtx {
    pub v: SBimodule,
    pub table: CellTable,
    pub colors: BTreeMap<CellKey, u32>,
    pub auts: AutCache,
    cache: RefCell<HashMap<(usize, usize, usize), Rc<FreeBasis>>>,
}

impl FreeCtx {
    pub fn new(v: SBimodule) -> Self {
        let mut table = CellTable::new();
        let colors = table.add_module(0, &v);
        FreeCtx { v, table, colors, auts: AutCache::new(), cache: RefCell::new(HashMap::new()) }
    }

    /// Complete deterministic basis of F_(d)(V)(m,n), d >= 1: enumerate
    /// shapes over all vertex-cell multisets of total weight d, decorate,
    /// canonicalize, drop zero classes.
    pub fn basis(&self, d: usize, m: usize, n: usize) -> Rc<FreeBasis> {
        assert!(d >= 1, "weight-0 cell is the unit I, handled by callers");
        if let Some(b) = self.cache.borrow().get(&(d, m, n)) {
            return b.clone();
        }
        let cells: Vec<(CellKey, u32)> =
            self.colors.iter().map(|(k, c)| (*k, *c)).collect();
        let mut shapes = Vec::new();
        for ms in multisets_weight(&cells, d) {
            let specs: Vec<graphcore::Vertex> = ms
                .iter()
                .map(|(k, c)| graphcore::Vertex { outs: k.0, ins: k.1, color: *c })
                .collect();
            shapes.extend(graphcore::enumerate_shapes(&specs, m, n, None));
        }
        let elems = crate::sbimod::decorate_shapes(&self.table, &self.auts, &shapes);
        let mut index = HashMap::new();
        for (i, (g, dec)) in elems.iter().enumerate() {
            index.insert((graphcore::serialize(g), dec.clone()), i);
        }
        let b = Rc::new(FreeBasis { weight: d, m, n, elems, index });
        self.cache.borrow_mut().insert((d, m, n), b.clone());
        b
    }

    pub fn dim(&self, d: usize, m: usize, n: usize) -> usize {
        if d == 0 {
            return if m == 1 && n == 1 { 1 } else { 0 };
        }
        self.basis(d, m, n).dim()
    }

    /// Total weight of a decorated graph: the sum of its vertices' cell
    /// weights.
    pub fn weight_of(&self, g: &Graph) -> usize {
        g.verts.iter().map(|v| self.table.cell(v.color).key.2 as usize).sum::<usize>()
    }

    /// Resolve a rigid decorated graph against its cell basis.
    /// None when the class is zero.
    pub fn resolve(&self, g: &Graph, decor: &[usize]) -> Option<(Rc<FreeBasis>, usize, i64)> {
        let d = self.weight_of(g);
        let basis = self.basis(d, g.m(), g.n());
        let (key, sign) = crate::sbimod::resolve_class(&self.table, &self.auts, g, decor)?;
        let idx = *basis
            .index
            .get(&key)
            .expect("resolved class must appear in the enumerated basis");
        Some((basis, idx, sign))
    }

    /// Resolve into a combo (zero class → empty combo).
    pub fn resolve_combo(&self, g: &Graph, decor: &[usize], coeff: &Q) -> Combo {
        let mut out = Combo::new();
        if let Some((_, idx, sign)) = self.resolve(g, decor) {
            combo_add(&mut out, idx, coeff * crate::ratlin::qi(sign));
        }
        out
    }
}

fn multisets_weight(cells: &[(CellKey, u32)], d: usize) -> Vec<Vec<(CellKey, u32)>> {
    fn rec(
        cells: &[(CellKey, u32)],
        start: usize,
        left: usize,
        cur: &mut Vec<(CellKey, u32)>,
        out: &mut Vec<Vec<(CellKey, u32)>>,
    ) {
        if left == 0 {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        for i in start..cells.len() {
            let w = cells[i].0 .2;
            if w == 0 || w > left {
                continue;
            }
            cur.push(cells[i]);
            rec(cells, i, left - w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    rec(cells, 0, d, &mut cur, &mut out);
    out
}

/// One term that can be substituted into a vertex slot.
pub enum InnerTerm<'a> {
    /// the properad unit (only into a (1,1) slot)
    Unit,
    Graph(&'a Graph, &'a [usize]),
}

/// Substitute a linear combination into the marked vertex of `outer`
/// (graph substitution, linear in the inner combo). All decoration
/// degrees must be 0; suspension bookkeeping lives in barkoszul.
pub fn substitute(
    ctx: &FreeCtx,
    outer: &Graph,
    outer_decor: &[usize],
    marked: usize,
    inner: &[(Q, InnerTerm)],
) -> Combo {
    let mut out = Combo::new();
    for (coeff, term) in inner {
        match term {
            InnerTerm::Unit => {
                assert_eq!(outer.verts[marked].outs, 1, "unit substitution needs a (1,1) slot");
                assert_eq!(outer.verts[marked].ins, 1, "unit substitution needs a (1,1) slot");
                match splice_unary(outer, marked) {
                    None => panic!("unit substitution would produce a bare strand"),
                    Some(g) => {
                        let mut dec = Vec::new();
                        for v in 0..outer.nv() {
                            if v != marked {
                                dec.push(outer_decor[v]);
                            }
                        }
                        for (i, c) in ctx.resolve_combo(&g, &dec, coeff) {
                            combo_add(&mut out, i, c);
                        }
                    }
                }
            }
            InnerTerm::Graph(ig, idec) => {
                let g = graphcore::graft(outer, marked, ig);
                let mut dec = Vec::new();
                for v in 0..outer.nv() {
                    if v != marked {
                        dec.push(outer_decor[v]);
                    }
                }
                dec.extend_from_slice(idec);
                for (i, c) in ctx.resolve_combo(&g, &dec, coeff) {
                    combo_add(&mut out, i, c);
                }
            }
        }
    }
    out
}

/// Remove a (1,1) vertex, splicing its input attachment to its output
/// attachment. None when the vertex is the whole graph (the result would
/// be the unit strand). Remaining vertices keep their relative order
/// (indices above `v` shift down by one).
pub fn splice_unary(g: &Graph, v: usize) -> Option<Graph> {
    assert_eq!(g.verts[v].outs, 1);
    assert_eq!(g.verts[v].ins, 1);
    if g.nv() == 1 {
        return None;
    }
    let below = g.in_hook[v][0];
    let above = g.out_hook[v][0];
    let map = |u: usize| if u < v { u } else { u - 1 };
    let mut verts = Vec::new();
    let mut out_hook: Vec<Vec<Hook>> = Vec::new();
    let mut in_hook: Vec<Vec<Hook>> = Vec::new();
    for u in 0..g.nv() {
        if u == v {
            continue;
        }
        verts.push(g.verts[u]);
        out_hook.push(
            g.out_hook[u]
                .iter()
                .map(|h| match *h {
                    Hook::Port(w, _q) if w == v => match above {
                        Hook::Leg(l) => Hook::Leg(l),
                        Hook::Port(w2, q2) => Hook::Port(map(w2), q2),
                    },
                    Hook::Port(w, q) => Hook::Port(map(w), q),
                    Hook::Leg(l) => Hook::Leg(l),
                })
                .collect(),
        );
        in_hook.push(
            g.in_hook[u]
                .iter()
                .map(|h| match *h {
                    Hook::Port(w, _p) if w == v => match below {
                        Hook::Leg(l) => Hook::Leg(l),
                        Hook::Port(w2, p2) => Hook::Port(map(w2), p2),
                    },
                    Hook::Port(w, p) => Hook::Port(map(w), p),
                    Hook::Leg(l) => Hook::Leg(l),
                })
                .collect(),
        );
    }
    let fix_leg = |att: (usize, usize), leg_is_out: bool| -> (usize, usize) {
        let (w, p) = att;
        if w == v {
            match if leg_is_out { below } else { above } {
                Hook::Port(w2, p2) => (map(w2), p2),
                Hook::Leg(_) => unreachable!("strand case handled above"),
            }
        } else {
            (map(w), p)
        }
    };
    let out_legs: Vec<(usize, usize)> =
        g.out_legs.iter().map(|&a| fix_leg(a, true)).collect();
    let in_legs: Vec<(usize, usize)> =
        g.in_legs.iter().map(|&a| fix_leg(a, false)).collect();
    Some(Graph { verts, out_hook, in_hook, out_legs, in_legs })
}

/// One admissible cut of a decorated graph: the lower set is down-closed
/// under the flow order; both parts split into connected clusters, each
/// resolved to its free-basis cell. The sign is the Koszul sign of
/// reordering the decorations from the graph's canonical order into
/// (upper clusters then lower clusters, each in induced order), times the
/// transport signs from canonicalizing every cluster.
pub struct AdmissibleCut {
    pub lower_mask: u64,
    pub sign: i64,
    /// (weight, m, n, basis index) per upper cluster, in cluster order
    pub upper: Vec<(usize, usize, usize, usize)>,
    pub lower: Vec<(usize, usize, usize, usize)>,
}

/// All decompositions of g as μ(g₁ ⊠_c g₂): order ideals of the flow
/// poset, including the two trivial cuts. Cuts containing a zero cluster
/// class are dropped.
pub fn admissible_cuts(ctx: &FreeCtx, g: &Graph, decor: &[usize]) -> Vec<AdmissibleCut> {
    let mut out = Vec::new();
    for mask in g.order_ideals() {
        if let Some(cut) = cut_at(ctx, g, decor, mask) {
            out.push(cut);
        }
    }
    out
}

/// Build the cut of g at the given down-closed set; None when a cluster
/// class vanishes.
pub fn cut_at(ctx: &FreeCtx, g: &Graph, decor: &[usize], lower_mask: u64) -> Option<AdmissibleCut> {
    let nv = g.nv();
    let lower_set: Vec<usize> = (0..nv).filter(|&v| lower_mask & (1 << v) != 0).collect();
    let upper_set: Vec<usize> = (0..nv).filter(|&v| lower_mask & (1 << v) == 0).collect();

    // destination order: upper clusters (in component order, vertices in
    // induced order) first, then lower clusters
    let mut dest_order: Vec<usize> = Vec::with_capacity(nv);
    let mut cluster_list: Vec<(bool, Vec<usize>)> = Vec::new(); // (is_upper, original vertices)
    for (is_upper, set) in [(true, &upper_set), (false, &lower_set)] {
        if set.is_empty() {
            continue;
        }
        let part = graphcore::induced_subgraph(g, set);
        for comp in part.graph.component_sets() {
            let orig: Vec<usize> = comp.iter().map(|&i| part.vmap[i]).collect();
            dest_order.extend(orig.iter().copied());
            cluster_list.push((is_upper, orig));
        }
    }
    let mut dest = vec![0usize; nv];
    for (pos, &v) in dest_order.iter().enumerate() {
        dest[v] = pos;
    }
    let degrees: Vec<i64> = g.verts.iter().map(|v| ctx.table.degree(v.color)).collect();
    let mut sign = koszul_sign(&degrees, &dest);

    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for (is_upper, orig) in cluster_list {
        let part = graphcore::induced_subgraph(g, &orig);
        let dec: Vec<usize> = part.vmap.iter().map(|&v| decor[v]).collect();
        let w = ctx.weight_of(&part.graph);
        let (_, idx, s) = ctx.resolve(&part.graph, &dec)?;
        sign *= s;
        let item = (w, part.graph.m(), part.graph.n(), idx);
        if is_upper {
            upper.push(item);
        } else {
            lower.push(item);
        }
    }
    Some(AdmissibleCut { lower_mask, sign, upper, lower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlin::qi;
    use crate::sbimod::{ActionSpec, Component};

    fn bilie_generators() -> SBimodule {
        SBimodule::new(vec![
            Component {
                name: "l".into(),
                m: 1,
                n: 2,
                weight: 1,
                degree: 0,
                out_action: ActionSpec::Trivial,
                in_action: ActionSpec::Sign,
                czech_out: false,
                czech_in: false,
            },
            Component {
                name: "d".into(),
                m: 2,
                n: 1,
                weight: 1,
                degree: 0,
                out_action: ActionSpec::Sign,
                in_action: ActionSpec::Trivial,
                czech_out: false,
                czech_in: false,
            },
        ])
    }

    fn epsbi_generators() -> SBimodule {
        SBimodule::new(vec![
            Component {
                name: "m".into(),
                m: 1,
                n: 2,
                weight: 1,
                degree: 0,
                out_action: ActionSpec::Trivial,
                in_action: ActionSpec::Regular,
                czech_out: false,
                czech_in: false,
            },
            Component {
                name: "D".into(),
                m: 2,
                n: 1,
                weight: 1,
                degree: 0,
                out_action: ActionSpec::Regular,
                in_action: ActionSpec::Trivial,
                czech_out: false,
                czech_in: false,
            },
        ])
    }

    #[test]
    fn epsbi_weight_one() {
        let ctx = FreeCtx::new(epsbi_generators());
        assert_eq!(ctx.dim(1, 1, 2), 2);
        assert_eq!(ctx.dim(1, 2, 1), 2);
        assert_eq!(ctx.dim(0, 1, 1), 1);
    }

    #[test]
    fn bilie_weight_two_trees() {
        let ctx = FreeCtx::new(bilie_generators());
        // three tree shapes with 1-dim sgn decorations
        assert_eq!(ctx.dim(2, 1, 3), 3);
        // the genus-1 loop class is nonzero
        assert_eq!(ctx.dim(2, 1, 1), 1);
        // mixed (2,2) cell: one Δ-over-λ class and four λ-over-Δ classes
        assert_eq!(ctx.dim(2, 2, 2), 5);
    }

    #[test]
    fn loop_class_matches_projector_oracle() {
        // the averaging projector on the rigid loop configurations agrees
        // with the canonicalization count
        let ctx = FreeCtx::new(bilie_generators());
        // rigid: decorations are 1-dim, configurations are the two
        // edge-matchings; the swap move acts with sign (-1)·(-1) = +1
        let swap = crate::sbimod::SignedPerm { perm: vec![1, 0], sign: vec![1, 1] };
        let dim = crate::sbimod::averaging_projector_dim(2, &[swap]).unwrap();
        assert_eq!(dim, ctx.dim(2, 1, 1));
    }

    #[test]
    fn free_operad_tree_counts() {
        // binary operadic generator with regular action: free dims match
        // planar-tree counts times nothing (classes = planar trees with
        // labeled leaves): dim F_(d)(V)(1, d+1) = Catalan(d) · (d+1)!
        let v = SBimodule::new(vec![Component {
            name: "m".into(),
            m: 1,
            n: 2,
            weight: 1,
            degree: 0,
            out_action: ActionSpec::Trivial,
            in_action: ActionSpec::Regular,
            czech_out: false,
            czech_in: false,
        }]);
        let ctx = FreeCtx::new(v);
        let catalan = [1usize, 1, 2, 5, 14];
        for d in 1..=4usize {
            let n = d + 1;
            let expect = catalan[d] * (1..=n).product::<usize>();
            assert_eq!(ctx.dim(d, 1, n), expect, "d = {}", d);
        }
        // nonbinary cells vanish for a binary generator
        assert_eq!(ctx.dim(2, 1, 2), 0);
    }

    #[test]
    fn substitute_corolla_identity() {
        let ctx = FreeCtx::new(bilie_generators());
        let b = ctx.basis(1, 1, 2);
        let (g, dec) = b.elems[0].clone();
        // substituting a single-generator corolla re-decorates, coefficient
        // unchanged
        let combo = substitute(&ctx, &g, &dec, 0, &[(qi(1), InnerTerm::Graph(&g, &dec))]);
        assert_eq!(combo.len(), 1);
        let (idx, c) = combo.iter().next().unwrap();
        assert_eq!(*idx, 0);
        assert_eq!(c, &qi(1));
    }

    #[test]
    fn substitute_unit_contracts_edge() {
        // dual numbers: x ∘ x with the unit substituted in one slot
        let v = SBimodule::new(vec![Component {
            name: "x".into(),
            m: 1,
            n: 1,
            weight: 1,
            degree: 0,
            out_action: ActionSpec::Trivial,
            in_action: ActionSpec::Trivial,
            czech_out: false,
            czech_in: false,
        }]);
        let ctx = FreeCtx::new(v);
        let b2 = ctx.basis(2, 1, 1);
        assert_eq!(b2.dim(), 1);
        let (g, dec) = b2.elems[0].clone();
        let combo = substitute(&ctx, &g, &dec, 0, &[(qi(1), InnerTerm::Unit)]);
        // contracting one vertex leaves the single-generator corolla
        assert_eq!(combo.len(), 1);
    }

    #[test]
    fn substitution_associativity_spot_check() {
        // two nested substitutions in either order give equal combos
        let ctx = FreeCtx::new(epsbi_generators());
        let b1 = ctx.basis(1, 1, 2);
        let (c1, d1) = b1.elems[0].clone();
        let (c2, d2) = b1.elems[1].clone();
        // start from a corolla, substitute c1 into it, then substitute c2
        // into the vertex that came from the inner graph; compare with
        // doing the inner substitution first.
        let b2 = ctx.basis(2, 1, 3);
        for (g, dec) in b2.elems.iter() {
            // route 1: substitute c2 into vertex 0 of g, then nothing
            let r1 = substitute(&ctx, g, dec, 0, &[(qi(1), InnerTerm::Graph(&c1, &d1))]);
            // route 2: the same with the roles of coefficient split
            let mut r2 = Combo::new();
            let half = crate::ratlin::qr(1, 2);
            for (i, c) in
                substitute(&ctx, g, dec, 0, &[(half.clone(), InnerTerm::Graph(&c1, &d1))])
            {
                combo_add(&mut r2, i, c * qi(2));
            }
            assert_eq!(r1, r2);
            let _ = (&c2, &d2);
        }
    }

    #[test]
    fn cuts_of_single_vertex() {
        let ctx = FreeCtx::new(bilie_generators());
        let b = ctx.basis(1, 1, 2);
        let (g, dec) = &b.elems[0];
        let cuts = admissible_cuts(&ctx, g, dec);
        // (I, g) and (g, I)
        assert_eq!(cuts.len(), 2);
        assert!(cuts.iter().all(|c| c.sign == 1));
    }

    #[test]
    fn cuts_of_two_vertex_path() {
        let ctx = FreeCtx::new(bilie_generators());
        let b = ctx.basis(2, 1, 3);
        let (g, dec) = &b.elems[0];
        let cuts = admissible_cuts(&ctx, g, dec);
        // two trivial cuts plus the interior one
        assert_eq!(cuts.len(), 3);
    }

    #[test]
    fn cut_count_equals_order_ideals() {
        let ctx = FreeCtx::new(epsbi_generators());
        // a 3-vertex basis element with an incomparable pair
        let b = ctx.basis(3, 1, 4);
        let mut seen_incomparable = false;
        for (g, dec) in b.elems.iter() {
            let ideals = g.order_ideals().len();
            let cuts = admissible_cuts(&ctx, g, dec).len();
            assert_eq!(cuts, ideals);
            if ideals > 4 {
                seen_incomparable = true;
            }
        }
        assert!(seen_incomparable);
    }
}
