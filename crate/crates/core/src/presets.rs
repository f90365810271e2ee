//! Built-in quadratic presentations.
//!
//! Leg-numbering convention for the relation graphs: generator inputs and
//! outputs are numbered left-to-right as drawn, flow runs upward, and a
//! composite like m(m,1) places the inner generator below the outer one.
//! An input relabeling f·σ attaches global input σ(s) to the port
//! carrying slot s of f, and dually on outputs.

use crate::freeprop::{combo_add, Combo, FreeCtx};
use crate::graphcore::{Graph, Hook, Vertex};
use crate::quadratic::{Presentation, Relation};
use crate::ratlin::qi;
use crate::sbimod::{ActionSpec, CellKey, Component, SBimodule};
use crate::symgroup::Permutation;

pub const NAMES: [&str; 10] = [
    "lie", "com", "as", "bilie", "bilie0", "epsbi", "halfbi", "frob", "dualnumbers",
    "free_polyadic",
];

fn gen(name: &str, m: usize, n: usize, out: ActionSpec, inn: ActionSpec) -> Component {
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

/// Rigid 2-vertex graph: vertex 0 below vertex 1.
/// `edges`: (bot out port, top in port); `outs[l]` / `ins[l]`: (vertex,
/// port) carrying global label l.
struct G2<'a> {
    ctx: &'a FreeCtx,
    bot: (CellKey, usize),
    top: (CellKey, usize),
    edges: Vec<(usize, usize)>,
    outs: Vec<(usize, usize)>,
    ins: Vec<(usize, usize)>,
}

impl<'a> G2<'a> {
    fn build(&self) -> (Graph, Vec<usize>) {
        let (bk, be) = self.bot;
        let (tk, te) = self.top;
        let verts = vec![
            Vertex { outs: bk.0, ins: bk.1, color: self.ctx.colors[&bk] },
            Vertex { outs: tk.0, ins: tk.1, color: self.ctx.colors[&tk] },
        ];
        let mut out_hook = vec![
            vec![Hook::Leg(usize::MAX); bk.0],
            vec![Hook::Leg(usize::MAX); tk.0],
        ];
        let mut in_hook = vec![
            vec![Hook::Leg(usize::MAX); bk.1],
            vec![Hook::Leg(usize::MAX); tk.1],
        ];
        for &(p, q) in &self.edges {
            out_hook[0][p] = Hook::Port(1, q);
            in_hook[1][q] = Hook::Port(0, p);
        }
        for (l, &(v, p)) in self.outs.iter().enumerate() {
            out_hook[v][p] = Hook::Leg(l);
        }
        for (l, &(v, q)) in self.ins.iter().enumerate() {
            in_hook[v][q] = Hook::Leg(l);
        }
        let g = Graph {
            verts,
            out_hook,
            in_hook,
            out_legs: self.outs.clone(),
            in_legs: self.ins.clone(),
        };
        g.validate().expect("relation graph must be valid");
        (g, vec![be, te])
    }

    fn combo(&self, coeff: i64) -> Combo {
        let (g, dec) = self.build();
        self.ctx.resolve_combo(&g, &dec, &qi(coeff))
    }
}

fn merge(target: &mut Combo, src: Combo) {
    for (i, c) in src {
        combo_add(target, i, c);
    }
}

/// λ(λ,1)·σ in the (1,3) cell: inner generator below slot 1 of the outer
/// one; global input σ(s) attaches to the port carrying slot s.
fn op_left_comb(ctx: &FreeCtx, cell: CellKey, e: usize, sigma: &Permutation, coeff: i64) -> Combo {
    // slots: 1 = bot.in0, 2 = bot.in1, 3 = top.in1
    let slots = [(0usize, 0usize), (0, 1), (1, 1)];
    let mut ins = vec![(0, 0); 3];
    for (s, port) in slots.iter().enumerate() {
        ins[sigma.apply0(s)] = *port;
    }
    G2 {
        ctx,
        bot: (cell, e),
        top: (cell, e),
        edges: vec![(0, 0)],
        outs: vec![(1, 0)],
        ins,
    }
    .combo(coeff)
}

/// m(1,m)·σ: inner generator below slot 2.
fn op_right_comb(ctx: &FreeCtx, cell: CellKey, e: usize, sigma: &Permutation, coeff: i64) -> Combo {
    // slots: 1 = top.in0, 2 = bot.in0, 3 = bot.in1
    let slots = [(1usize, 0usize), (0, 0), (0, 1)];
    let mut ins = vec![(0, 0); 3];
    for (s, port) in slots.iter().enumerate() {
        ins[sigma.apply0(s)] = *port;
    }
    G2 {
        ctx,
        bot: (cell, e),
        top: (cell, e),
        edges: vec![(0, 1)],
        outs: vec![(1, 0)],
        ins,
    }
    .combo(coeff)
}

/// σ·(Δ,1)Δ in the (3,1) cell: outer cogenerator above output slot 1.
fn coop_left_comb(ctx: &FreeCtx, cell: CellKey, e: usize, sigma: &Permutation, coeff: i64) -> Combo {
    // out slots: 1 = top.out0, 2 = top.out1, 3 = bot.out1
    let slots = [(1usize, 0usize), (1, 1), (0, 1)];
    let mut outs = vec![(0, 0); 3];
    for (s, port) in slots.iter().enumerate() {
        outs[sigma.apply0(s)] = *port;
    }
    G2 {
        ctx,
        bot: (cell, e),
        top: (cell, e),
        edges: vec![(0, 0)],
        outs,
        ins: vec![(0, 0)],
    }
    .combo(coeff)
}

/// σ·(1,Δ)Δ: outer cogenerator above output slot 2.
fn coop_right_comb(
    ctx: &FreeCtx,
    cell: CellKey,
    e: usize,
    sigma: &Permutation,
    coeff: i64,
) -> Combo {
    // out slots: 1 = bot.out0, 2 = top.out0, 3 = top.out1
    let slots = [(0usize, 0usize), (1, 0), (1, 1)];
    let mut outs = vec![(0, 0); 3];
    for (s, port) in slots.iter().enumerate() {
        outs[sigma.apply0(s)] = *port;
    }
    G2 {
        ctx,
        bot: (cell, e),
        top: (cell, e),
        edges: vec![(1, 0)],
        outs,
        ins: vec![(0, 0)],
    }
    .combo(coeff)
}

fn cyclic3() -> Vec<Permutation> {
    vec![
        Permutation::identity(3),
        Permutation::from_one_line(&[2, 3, 1]).unwrap(),
        Permutation::from_one_line(&[3, 1, 2]).unwrap(),
    ]
}

/// The quadratic presentation catalog.
pub fn get(name: &str) -> Result<Presentation, String> {
    match name {
        "lie" => Ok(lie()),
        "com" => Ok(com()),
        "as" => Ok(as_op()),
        "bilie" => Ok(bilie(false)),
        "bilie0" => Ok(bilie(true)),
        "epsbi" => Ok(epsbi()),
        "halfbi" => Ok(halfbi()),
        "frob" => Ok(frob()),
        "dualnumbers" => Ok(dualnumbers()),
        "free_polyadic" => Ok(free_polyadic(6)),
        _ => Err(format!("unknown preset '{}' (known: {})", name, NAMES.join(", "))),
    }
}

pub fn lie() -> Presentation {
    let v = SBimodule::new(vec![gen("l", 1, 2, ActionSpec::Trivial, ActionSpec::Sign)]);
    let pres = Presentation::new("lie", v, Vec::new());
    let cell = (1, 2, 1, 0);
    let mut jacobi = Combo::new();
    for s in cyclic3() {
        merge(&mut jacobi, op_left_comb(&pres.ctx, cell, 0, &s, 1));
    }
    with_relations(pres, vec![Relation { m: 1, n: 3, combo: jacobi }])
}

pub fn com() -> Presentation {
    let v = SBimodule::new(vec![gen("m", 1, 2, ActionSpec::Trivial, ActionSpec::Trivial)]);
    let pres = Presentation::new("com", v, Vec::new());
    let cell = (1, 2, 1, 0);
    let id = Permutation::identity(3);
    let mut assoc = op_left_comb(&pres.ctx, cell, 0, &id, 1);
    merge(&mut assoc, op_right_comb(&pres.ctx, cell, 0, &id, -1));
    with_relations(pres, vec![Relation { m: 1, n: 3, combo: assoc }])
}

pub fn as_op() -> Presentation {
    let v = SBimodule::new(vec![gen("m", 1, 2, ActionSpec::Trivial, ActionSpec::Regular)]);
    let pres = Presentation::new("as", v, Vec::new());
    let cell = (1, 2, 1, 0);
    let id = Permutation::identity(3);
    let mut assoc = op_left_comb(&pres.ctx, cell, 0, &id, 1);
    merge(&mut assoc, op_right_comb(&pres.ctx, cell, 0, &id, -1));
    with_relations(pres, vec![Relation { m: 1, n: 3, combo: assoc }])
}

fn bilie(with_loop: bool) -> Presentation {
    let v = SBimodule::new(vec![
        gen("l", 1, 2, ActionSpec::Trivial, ActionSpec::Sign),
        gen("d", 2, 1, ActionSpec::Sign, ActionSpec::Trivial),
    ]);
    let name = if with_loop { "bilie0" } else { "bilie" };
    let pres = Presentation::new(name, v, Vec::new());
    let l = (1, 2, 1, 0);
    let d = (2, 1, 1, 0);
    let ctx = &pres.ctx;

    let mut jacobi = Combo::new();
    for s in cyclic3() {
        merge(&mut jacobi, op_left_comb(ctx, l, 0, &s, 1));
    }
    let mut cojacobi = Combo::new();
    for s in cyclic3() {
        merge(&mut cojacobi, coop_left_comb(ctx, d, 0, &s, 1));
    }

    // Drinfeld cocycle: Δλ − [a,b(1)]⊗b(2) − b(1)⊗[a,b(2)]
    //                      + [b,a(1)]⊗a(2) + a(1)⊗[b,a(2)]
    let mut mixed = G2 {
        ctx,
        bot: (l, 0),
        top: (d, 0),
        edges: vec![(0, 0)],
        outs: vec![(1, 0), (1, 1)],
        ins: vec![(0, 0), (0, 1)],
    }
    .combo(1);
    // t1: λ(a, b(1)) ⊗ b(2)
    merge(
        &mut mixed,
        G2 {
            ctx,
            bot: (d, 0),
            top: (l, 0),
            edges: vec![(0, 1)],
            outs: vec![(1, 0), (0, 1)],
            ins: vec![(1, 0), (0, 0)],
        }
        .combo(-1),
    );
    // t2: b(1) ⊗ λ(a, b(2))
    merge(
        &mut mixed,
        G2 {
            ctx,
            bot: (d, 0),
            top: (l, 0),
            edges: vec![(1, 1)],
            outs: vec![(0, 0), (1, 0)],
            ins: vec![(1, 0), (0, 0)],
        }
        .combo(-1),
    );
    // t3: λ(b, a(1)) ⊗ a(2)
    merge(
        &mut mixed,
        G2 {
            ctx,
            bot: (d, 0),
            top: (l, 0),
            edges: vec![(0, 1)],
            outs: vec![(1, 0), (0, 1)],
            ins: vec![(0, 0), (1, 0)],
        }
        .combo(1),
    );
    // t4: a(1) ⊗ λ(b, a(2))
    merge(
        &mut mixed,
        G2 {
            ctx,
            bot: (d, 0),
            top: (l, 0),
            edges: vec![(1, 1)],
            outs: vec![(0, 0), (1, 0)],
            ins: vec![(0, 0), (1, 0)],
        }
        .combo(1),
    );

    let mut relations = vec![
        Relation { m: 1, n: 3, combo: jacobi },
        Relation { m: 3, n: 1, combo: cojacobi },
        Relation { m: 2, n: 2, combo: mixed },
    ];
    if with_loop {
        let lp = G2 {
            ctx,
            bot: (d, 0),
            top: (l, 0),
            edges: vec![(0, 0), (1, 1)],
            outs: vec![(1, 0)],
            ins: vec![(0, 0)],
        }
        .combo(1);
        relations.push(Relation { m: 1, n: 1, combo: lp });
    }
    with_relations(pres, relations)
}

fn epsbi() -> Presentation {
    let v = SBimodule::new(vec![
        gen("m", 1, 2, ActionSpec::Trivial, ActionSpec::Regular),
        gen("d", 2, 1, ActionSpec::Regular, ActionSpec::Trivial),
    ]);
    let pres = Presentation::new("epsbi", v, Vec::new());
    let (relations, _) = bialgebra_relations(&pres, BialgebraKind::Epsilon);
    with_relations(pres, relations)
}

fn halfbi() -> Presentation {
    let v = SBimodule::new(vec![
        gen("m", 1, 2, ActionSpec::Trivial, ActionSpec::Regular),
        gen("d", 2, 1, ActionSpec::Regular, ActionSpec::Trivial),
    ]);
    let pres = Presentation::new("halfbi", v, Vec::new());
    let (relations, _) = bialgebra_relations(&pres, BialgebraKind::Half);
    with_relations(pres, relations)
}

fn frob() -> Presentation {
    let v = SBimodule::new(vec![
        gen("b", 1, 2, ActionSpec::Trivial, ActionSpec::Trivial),
        gen("c", 2, 1, ActionSpec::Trivial, ActionSpec::Trivial),
    ]);
    let pres = Presentation::new("frob", v, Vec::new());
    let (mut relations, cells) = bialgebra_relations(&pres, BialgebraKind::Frobenius);
    // the loop ◊ is a relation of the dual side
    let lp = G2 {
        ctx: &pres.ctx,
        bot: (cells.1, 0),
        top: (cells.0, 0),
        edges: vec![(0, 0), (1, 1)],
        outs: vec![(1, 0)],
        ins: vec![(0, 0)],
    }
    .combo(1);
    relations.push(Relation { m: 1, n: 1, combo: lp });
    with_relations(pres, relations)
}

enum BialgebraKind {
    /// Δm = ab(1) ⊗ b(2) + a(1) ⊗ a(2)b (infinitesimal)
    Epsilon,
    /// Δm = 0
    Half,
    /// Δm = ab(1) ⊗ b(2) and Δm = a(1) ⊗ a(2)b, separately
    Frobenius,
}

/// Associativity + coassociativity + the chosen compatibility, for a
/// product generator at (1,2) and a coproduct generator at (2,1).
fn bialgebra_relations(
    pres: &Presentation,
    kind: BialgebraKind,
) -> (Vec<Relation>, (CellKey, CellKey)) {
    let ctx = &pres.ctx;
    let mc = (1, 2, 1, 0);
    let dc = (2, 1, 1, 0);
    let id3 = Permutation::identity(3);
    let mut assoc = op_left_comb(ctx, mc, 0, &id3, 1);
    merge(&mut assoc, op_right_comb(ctx, mc, 0, &id3, -1));
    let mut coassoc = coop_left_comb(ctx, dc, 0, &id3, 1);
    merge(&mut coassoc, coop_right_comb(ctx, dc, 0, &id3, -1));

    let dm = |coeff: i64| {
        G2 {
            ctx,
            bot: (mc, 0),
            top: (dc, 0),
            edges: vec![(0, 0)],
            outs: vec![(1, 0), (1, 1)],
            ins: vec![(0, 0), (0, 1)],
        }
        .combo(coeff)
    };
    // s1: m(a, b(1)) ⊗ b(2)
    let s1 = |coeff: i64| {
        G2 {
            ctx,
            bot: (dc, 0),
            top: (mc, 0),
            edges: vec![(0, 1)],
            outs: vec![(1, 0), (0, 1)],
            ins: vec![(1, 0), (0, 0)],
        }
        .combo(coeff)
    };
    // s2: a(1) ⊗ m(a(2), b)
    let s2 = |coeff: i64| {
        G2 {
            ctx,
            bot: (dc, 0),
            top: (mc, 0),
            edges: vec![(1, 0)],
            outs: vec![(0, 0), (1, 0)],
            ins: vec![(0, 0), (1, 1)],
        }
        .combo(coeff)
    };

    let mut relations = vec![
        Relation { m: 1, n: 3, combo: assoc },
        Relation { m: 3, n: 1, combo: coassoc },
    ];
    match kind {
        BialgebraKind::Epsilon => {
            let mut mixed = dm(1);
            merge(&mut mixed, s1(-1));
            merge(&mut mixed, s2(-1));
            relations.push(Relation { m: 2, n: 2, combo: mixed });
        }
        BialgebraKind::Half => {
            relations.push(Relation { m: 2, n: 2, combo: dm(1) });
        }
        BialgebraKind::Frobenius => {
            let mut r1 = dm(1);
            merge(&mut r1, s1(-1));
            let mut r2 = dm(1);
            merge(&mut r2, s2(-1));
            relations.push(Relation { m: 2, n: 2, combo: r1 });
            relations.push(Relation { m: 2, n: 2, combo: r2 });
        }
    }
    (relations, (mc, dc))
}

pub fn dualnumbers() -> Presentation {
    let v = SBimodule::new(vec![gen("x", 1, 1, ActionSpec::Trivial, ActionSpec::Trivial)]);
    let pres = Presentation::new("dualnumbers", v, Vec::new());
    let x = (1, 1, 1, 0);
    let xx = G2 {
        ctx: &pres.ctx,
        bot: (x, 0),
        top: (x, 0),
        edges: vec![(0, 0)],
        outs: vec![(1, 0)],
        ins: vec![(0, 0)],
    }
    .combo(1);
    with_relations(pres, vec![Relation { m: 1, n: 1, combo: xx }])
}

/// The free operad on one n-ary operation for every 2 ≤ n ≤ max_arity
/// (regular representations, no relations).
pub fn free_polyadic(max_arity: usize) -> Presentation {
    let comps: Vec<Component> = (2..=max_arity)
        .map(|k| gen(&format!("g{}", k), 1, k, ActionSpec::Trivial, ActionSpec::Regular))
        .collect();
    Presentation::new("free_polyadic", SBimodule::new(comps), Vec::new())
}

fn with_relations(pres: Presentation, relations: Vec<Relation>) -> Presentation {
    for r in &relations {
        assert!(!r.combo.is_empty(), "relation must be nonzero");
    }
    pres.with_relations(relations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_dimensions() {
        let b = get("bilie").unwrap();
        assert_eq!(b.generators().dim(1, 2), 1);
        assert_eq!(b.generators().dim(2, 1), 1);
        let e = get("epsbi").unwrap();
        assert_eq!(e.generators().dim(1, 2), 2);
        assert_eq!(e.generators().dim(2, 1), 2);
    }

    #[test]
    fn every_preset_is_quadratic_and_round_trips() {
        for name in NAMES {
            let p = get(name).unwrap();
            p.generators().validate().unwrap();
            for r in &p.relations {
                // relations live in single F_(2) cells by construction;
                // check they are nonzero there
                assert!(!r.combo.is_empty(), "{name}: empty relation");
                assert!(p.ctx.dim(2, r.m, r.n) > 0);
            }
            let j = p.to_json();
            let s = serde_json::to_string(&j).unwrap();
            let j2: crate::quadratic::PresentationJson = serde_json::from_str(&s).unwrap();
            let p2 = Presentation::from_json(&j2).unwrap();
            assert_eq!(p.relations.len(), p2.relations.len());
            for (a, b) in p.relations.iter().zip(p2.relations.iter()) {
                assert_eq!(a.combo, b.combo, "{name}: relation drift through JSON");
            }
        }
    }

    #[test]
    fn bilie0_has_extra_loop_relation() {
        let b = get("bilie").unwrap();
        let b0 = get("bilie0").unwrap();
        assert_eq!(b0.relations.len(), b.relations.len() + 1);
        let lp = b0.relations.last().unwrap();
        assert_eq!((lp.m, lp.n), (1, 1));
    }

    #[test]
    fn halfbi_differs_from_epsbi_only_in_compatibility() {
        let e = get("epsbi").unwrap();
        let h = get("halfbi").unwrap();
        assert_eq!(e.quotient_dim(2, 1, 3), h.quotient_dim(2, 1, 3));
        // Δm = 0 kills the four composite classes
        assert_eq!(h.ideal_rank(2, 2, 2), 4);
        assert_eq!(e.ideal_rank(2, 2, 2), 4);
        assert_eq!(h.quotient_dim(2, 2, 2), 16);
        assert_eq!(e.quotient_dim(2, 2, 2), 16);
    }
}
