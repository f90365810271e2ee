//! Directed connected graphs with labeled legs: canonical forms,
//! automorphism groups, exhaustive enumeration, adjacency, grafting and
//! cuts.
//!
//! Flow runs upward: global inputs attach at the bottom, global outputs at
//! the top, every edge goes from an out-port of its source to an in-port
//! of a vertex strictly above in the flow order. Directed cycles (wheels)
//! are excluded everywhere; parallel edges and genus > 0 are allowed.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Vertex of a decorated-shape graph. `color` identifies the decoration
/// cell (interpretation is up to the caller); it must be preserved by
/// isomorphisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub outs: usize,
    pub ins: usize,
    pub color: u32,
}

/// What a port is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hook {
    /// Global leg with 0-based label.
    Leg(usize),
    /// Port of another vertex: (vertex, port index on that vertex).
    /// For an out-port hook this names an in-port; for an in-port hook an
    /// out-port.
    Port(usize, usize),
}

/// A directed graph with labeled global legs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    pub verts: Vec<Vertex>,
    /// out_hook[v][p]: attachment of out-port p of vertex v.
    pub out_hook: Vec<Vec<Hook>>,
    /// in_hook[v][q]: attachment of in-port q of vertex v.
    pub in_hook: Vec<Vec<Hook>>,
    /// out_legs[l] = (vertex, out port) carrying global output l.
    pub out_legs: Vec<(usize, usize)>,
    /// in_legs[l] = (vertex, in port) carrying global input l.
    pub in_legs: Vec<(usize, usize)>,
}

/// Edge (u, p, v, q): out-port p of u feeds in-port q of v.
pub type Edge = (usize, usize, usize, usize);

impl Graph {
    pub fn nv(&self) -> usize {
        self.verts.len()
    }

    pub fn m(&self) -> usize {
        self.out_legs.len()
    }

    pub fn n(&self) -> usize {
        self.in_legs.len()
    }

    /// Edges sorted by (src vertex, src port).
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for v in 0..self.nv() {
            for (p, h) in self.out_hook[v].iter().enumerate() {
                if let Hook::Port(w, q) = h {
                    out.push((v, p, *w, *q));
                }
            }
        }
        out
    }

    /// Checks port consistency, leg bijections, acyclicity and
    /// connectivity.
    pub fn validate(&self) -> Result<(), String> {
        let nv = self.nv();
        if self.out_hook.len() != nv || self.in_hook.len() != nv {
            return Err("hook tables do not match vertex count".into());
        }
        for v in 0..nv {
            if self.out_hook[v].len() != self.verts[v].outs
                || self.in_hook[v].len() != self.verts[v].ins
            {
                return Err(format!("vertex {} hook arity mismatch", v));
            }
        }
        let mut out_leg_seen = vec![false; self.m()];
        let mut in_leg_seen = vec![false; self.n()];
        for v in 0..nv {
            for (p, h) in self.out_hook[v].iter().enumerate() {
                match *h {
                    Hook::Leg(l) => {
                        if l >= self.m() || self.out_legs[l] != (v, p) {
                            return Err("out leg table inconsistent".into());
                        }
                        if out_leg_seen[l] {
                            return Err("out leg used twice".into());
                        }
                        out_leg_seen[l] = true;
                    }
                    Hook::Port(w, q) => {
                        if w >= nv || q >= self.verts[w].ins
                            || self.in_hook[w][q] != Hook::Port(v, p)
                        {
                            return Err("edge mirror inconsistent".into());
                        }
                    }
                }
            }
            for (q, h) in self.in_hook[v].iter().enumerate() {
                match *h {
                    Hook::Leg(l) => {
                        if l >= self.n() || self.in_legs[l] != (v, q) {
                            return Err("in leg table inconsistent".into());
                        }
                        if in_leg_seen[l] {
                            return Err("in leg used twice".into());
                        }
                        in_leg_seen[l] = true;
                    }
                    Hook::Port(w, p) => {
                        if w >= nv || p >= self.verts[w].outs
                            || self.out_hook[w][p] != Hook::Port(v, q)
                        {
                            return Err("edge mirror inconsistent".into());
                        }
                    }
                }
            }
        }
        if !out_leg_seen.iter().all(|x| *x) || !in_leg_seen.iter().all(|x| *x) {
            return Err("unattached global leg".into());
        }
        if self.flow_levels().is_none() {
            return Err("directed cycle in flow".into());
        }
        if !self.is_connected() {
            return Err("graph not connected".into());
        }
        Ok(())
    }

    /// Longest-path flow level per vertex, or None when the flow has a
    /// directed cycle.
    pub fn flow_levels(&self) -> Option<Vec<usize>> {
        let nv = self.nv();
        let mut indeg = vec![0usize; nv];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (u, _, v, _) in self.edges() {
            indeg[v] += 1;
            succ[u].push(v);
        }
        let mut level = vec![0usize; nv];
        let mut queue: Vec<usize> = (0..nv).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(u) = queue.pop() {
            seen += 1;
            for &v in &succ[u] {
                level[v] = level[v].max(level[u] + 1);
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        if seen == nv {
            Some(level)
        } else {
            None
        }
    }

    pub fn is_connected(&self) -> bool {
        let nv = self.nv();
        if nv <= 1 {
            return true;
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (u, _, v, _) in self.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; nv];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == nv
    }

    /// Vertex sets of the connected components (each sorted; list sorted by
    /// minimum element).
    pub fn component_sets(&self) -> Vec<Vec<usize>> {
        let nv = self.nv();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (u, _, v, _) in self.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut comp = vec![usize::MAX; nv];
        let mut next = 0;
        for s in 0..nv {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = next;
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        let mut out = vec![Vec::new(); next];
        for v in 0..nv {
            out[comp[v]].push(v);
        }
        out
    }

    /// First Betti number of the underlying undirected graph.
    pub fn genus(&self) -> usize {
        let e = self.edges().len();
        let c = self.component_sets().len();
        e + c - self.nv()
    }

    /// Pairs (lower, upper) joined by at least one edge with no vertex
    /// between: contracting them is a valid weight-2 sub-composition.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let nv = self.nv();
        let mut direct = vec![vec![false; nv]; nv];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (u, _, v, _) in self.edges() {
            direct[u][v] = true;
            if !succ[u].contains(&v) {
                succ[u].push(v);
            }
        }
        // reach2[u][v]: path of length >= 2 from u to v
        let mut pairs = Vec::new();
        for u in 0..nv {
            for v in 0..nv {
                if !direct[u][v] {
                    continue;
                }
                // look for u -> w -> ... -> v avoiding the direct edge
                let mut stack: Vec<usize> =
                    succ[u].iter().copied().filter(|&w| w != v).collect();
                let mut seen = vec![false; nv];
                let mut between = false;
                while let Some(w) = stack.pop() {
                    if seen[w] {
                        continue;
                    }
                    seen[w] = true;
                    if direct[w][v] || succ[w].contains(&v) {
                        between = true;
                        break;
                    }
                    for &x in &succ[w] {
                        stack.push(x);
                    }
                }
                if !between {
                    pairs.push((u, v));
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }

    /// All down-closed vertex subsets of the flow order (order ideals),
    /// as bit masks, including the empty set and the full set.
    pub fn order_ideals(&self) -> Vec<u64> {
        let nv = self.nv();
        assert!(nv <= 60, "order ideal enumeration capped at 60 vertices");
        let mut below = vec![0u64; nv]; // direct predecessors
        for (u, _, v, _) in self.edges() {
            below[v] |= 1 << u;
        }
        let mut out = Vec::new();
        'outer: for mask in 0..(1u64 << nv) {
            for v in 0..nv {
                if mask & (1 << v) != 0 && below[v] & !mask != 0 {
                    continue 'outer;
                }
            }
            out.push(mask);
        }
        out
    }
}

/// Isomorphism data: vertex relabeling together with per-vertex port
/// relabelings (original → image).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iso {
    pub vmap: Vec<usize>,
    pub out_port: Vec<Vec<usize>>,
    pub in_port: Vec<Vec<usize>>,
}

impl Iso {
    /// self after other: apply `other` first.
    pub fn compose(&self, other: &Iso) -> Iso {
        let nv = other.vmap.len();
        let mut vmap = vec![0; nv];
        let mut out_port = vec![Vec::new(); nv];
        let mut in_port = vec![Vec::new(); nv];
        for v in 0..nv {
            let w = other.vmap[v];
            vmap[v] = self.vmap[w];
            out_port[v] = other.out_port[v].iter().map(|&p| self.out_port[w][p]).collect();
            in_port[v] = other.in_port[v].iter().map(|&q| self.in_port[w][q]).collect();
        }
        Iso { vmap, out_port, in_port }
    }
}

/// Result of canonicalization: the canonical graph and one isomorphism
/// from the input onto it.
#[derive(Clone, Debug)]
pub struct Canon {
    pub graph: Graph,
    pub iso: Iso,
    pub serial: Vec<u32>,
}

/// Serialize a graph whose labeling is already canonical.
pub fn serialize(g: &Graph) -> Vec<u32> {
    let mut s = Vec::new();
    s.push(g.nv() as u32);
    s.push(g.m() as u32);
    s.push(g.n() as u32);
    for v in &g.verts {
        s.push(v.color);
        s.push(v.outs as u32);
        s.push(v.ins as u32);
    }
    let mut edges = g.edges();
    edges.sort_unstable();
    for (u, p, v, q) in edges {
        s.extend_from_slice(&[u as u32, p as u32, v as u32, q as u32]);
    }
    for &(v, p) in &g.out_legs {
        s.extend_from_slice(&[v as u32, p as u32]);
    }
    for &(v, q) in &g.in_legs {
        s.extend_from_slice(&[v as u32, q as u32]);
    }
    s
}

/// Apply an isomorphism, producing the relabeled graph.
pub fn apply_iso(g: &Graph, iso: &Iso) -> Graph {
    let nv = g.nv();
    let mut verts = vec![Vertex { outs: 0, ins: 0, color: 0 }; nv];
    let mut out_hook: Vec<Vec<Hook>> = vec![Vec::new(); nv];
    let mut in_hook: Vec<Vec<Hook>> = vec![Vec::new(); nv];
    for v in 0..nv {
        let w = iso.vmap[v];
        verts[w] = g.verts[v];
        out_hook[w] = vec![Hook::Leg(usize::MAX); g.verts[v].outs];
        in_hook[w] = vec![Hook::Leg(usize::MAX); g.verts[v].ins];
    }
    let mut out_legs = vec![(0, 0); g.m()];
    let mut in_legs = vec![(0, 0); g.n()];
    for v in 0..nv {
        let w = iso.vmap[v];
        for (p, h) in g.out_hook[v].iter().enumerate() {
            let np = iso.out_port[v][p];
            out_hook[w][np] = match *h {
                Hook::Leg(l) => {
                    out_legs[l] = (w, np);
                    Hook::Leg(l)
                }
                Hook::Port(u, q) => Hook::Port(iso.vmap[u], iso.in_port[u][q]),
            };
        }
        for (q, h) in g.in_hook[v].iter().enumerate() {
            let nq = iso.in_port[v][q];
            in_hook[w][nq] = match *h {
                Hook::Leg(l) => {
                    in_legs[l] = (w, nq);
                    Hook::Leg(l)
                }
                Hook::Port(u, p) => Hook::Port(iso.vmap[u], iso.out_port[u][p]),
            };
        }
    }
    Graph { verts, out_hook, in_hook, out_legs, in_legs }
}

/// Canonical labeling by exhaustive refinement over level-respecting
/// vertex orders and parallel-bundle matchings.
pub fn canonical_form(g: &Graph) -> Canon {
    let mut best: Option<(Vec<u32>, Iso)> = None;
    search_labelings(g, &mut |serial, iso| match &best {
        Some((b, _)) if b <= &serial => {}
        _ => best = Some((serial, iso)),
    });
    let (serial, iso) = best.expect("graph has at least one labeling");
    let graph = apply_iso(g, &iso);
    debug_assert_eq!(serialize(&graph), serial);
    Canon { graph, iso, serial }
}

/// All self-isomorphisms of a canonically labeled graph (the maps that
/// reproduce the canonical serialization), identity included.
pub fn automorphisms(canon: &Graph) -> Vec<Iso> {
    let target = serialize(canon);
    let mut out = Vec::new();
    search_labelings(canon, &mut |serial, iso| {
        if serial == target {
            out.push(iso);
        }
    });
    out
}

/// Enumerate labeling candidates: all level-respecting vertex orders
/// (pruned by an iso-invariant refinement key) times all parallel-bundle
/// matchings; reports (serialization, iso) for each.
fn search_labelings(g: &Graph, report: &mut dyn FnMut(Vec<u32>, Iso)) {
    let nv = g.nv();
    let levels = g.flow_levels().expect("flow must be acyclic");
    let mut order: Vec<usize> = Vec::with_capacity(nv); // order[i] = original vertex at rank i
    let mut placed = vec![false; nv];

    // group vertices by level
    let max_level = levels.iter().copied().max().unwrap_or(0);
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); max_level + 1];
    for v in 0..nv {
        by_level[levels[v]].push(v);
    }

    fn refine_key(g: &Graph, v: usize, rank: &[usize], placed: &[bool]) -> Vec<u32> {
        // iso-invariant key relative to the placed prefix
        let mut key = vec![g.verts[v].color, g.verts[v].outs as u32, g.verts[v].ins as u32];
        let mut attach: Vec<(u32, u32)> = Vec::new();
        for h in g.in_hook[v].iter().chain(g.out_hook[v].iter()) {
            attach.push(match *h {
                Hook::Leg(l) => (0, l as u32),
                Hook::Port(u, _) if placed[u] => (1, rank[u] as u32),
                Hook::Port(_, _) => (2, 0),
            });
        }
        attach.sort_unstable();
        for (a, b) in attach {
            key.push(a);
            key.push(b);
        }
        key
    }

    struct Ctx<'a> {
        g: &'a Graph,
        by_level: Vec<Vec<usize>>,
        report: &'a mut dyn FnMut(Vec<u32>, Iso),
    }

    fn rec(ctx: &mut Ctx, order: &mut Vec<usize>, placed: &mut Vec<bool>, rank: &mut Vec<usize>) {
        let nv = ctx.g.nv();
        if order.len() == nv {
            emit(ctx.g, order, ctx.report);
            return;
        }
        // current level = level of the first unplaced group
        let lvl = ctx
            .by_level
            .iter()
            .position(|grp| grp.iter().any(|&v| !placed[v]))
            .unwrap();
        let cands: Vec<usize> =
            ctx.by_level[lvl].iter().copied().filter(|&v| !placed[v]).collect();
        let keys: Vec<Vec<u32>> =
            cands.iter().map(|&v| refine_key(ctx.g, v, rank, placed)).collect();
        let min_key = keys.iter().min().unwrap().clone();
        for (i, &v) in cands.iter().enumerate() {
            if keys[i] != min_key {
                continue;
            }
            rank[v] = order.len();
            order.push(v);
            placed[v] = true;
            rec(ctx, order, placed, rank);
            placed[v] = false;
            order.pop();
        }
    }

    fn emit(g: &Graph, order: &[usize], report: &mut dyn FnMut(Vec<u32>, Iso)) {
        let nv = g.nv();
        let mut rank = vec![0usize; nv];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i;
        }
        // parallel bundles: edges grouped by (src, dst)
        let mut bundles: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (u, p, v, q) in g.edges() {
            bundles.entry((u, v)).or_default().push((p, q));
        }
        let bundle_keys: Vec<(usize, usize)> = bundles.keys().copied().collect();
        let sizes: Vec<usize> = bundle_keys.iter().map(|k| bundles[k].len()).collect();
        // iterate over all products of permutations of each bundle
        let mut perm_state: Vec<Vec<usize>> = sizes.iter().map(|&s| (0..s).collect()).collect();
        loop {
            // edge ranks within bundles, for this matching state
            let mut edge_rank: HashMap<(usize, usize), usize> = HashMap::new();
            for (bi, k) in bundle_keys.iter().enumerate() {
                for (slot, &ei) in perm_state[bi].iter().enumerate() {
                    let (p, _q) = bundles[k][ei];
                    edge_rank.insert((k.0, p), slot);
                }
            }
            // port numbering per vertex
            let mut out_port: Vec<Vec<usize>> = Vec::with_capacity(nv);
            let mut in_port: Vec<Vec<usize>> = Vec::with_capacity(nv);
            for v in 0..nv {
                let mut keyed: Vec<((u32, u32, u32), usize)> = g.out_hook[v]
                    .iter()
                    .enumerate()
                    .map(|(p, h)| {
                        let key = match *h {
                            Hook::Leg(l) => (0, l as u32, 0),
                            Hook::Port(w, _) => {
                                (1, rank[w] as u32, edge_rank[&(v, p)] as u32)
                            }
                        };
                        (key, p)
                    })
                    .collect();
                keyed.sort_unstable();
                let mut map = vec![0usize; keyed.len()];
                for (new, (_, p)) in keyed.into_iter().enumerate() {
                    map[p] = new;
                }
                out_port.push(map);

                let mut keyed: Vec<((u32, u32, u32), usize)> = g.in_hook[v]
                    .iter()
                    .enumerate()
                    .map(|(q, h)| {
                        let key = match *h {
                            Hook::Leg(l) => (0, l as u32, 0),
                            Hook::Port(u, p) => {
                                (1, rank[u] as u32, edge_rank[&(u, p)] as u32)
                            }
                        };
                        (key, q)
                    })
                    .collect();
                keyed.sort_unstable();
                let mut map = vec![0usize; keyed.len()];
                for (new, (_, q)) in keyed.into_iter().enumerate() {
                    map[q] = new;
                }
                in_port.push(map);
            }
            let iso = Iso { vmap: rank.clone(), out_port, in_port };
            let relabeled = apply_iso(g, &iso);
            report(serialize(&relabeled), iso);

            // next product state
            let mut bi = 0;
            loop {
                if bi == perm_state.len() {
                    return;
                }
                if next_permutation(&mut perm_state[bi]) {
                    break;
                }
                perm_state[bi] = (0..sizes[bi]).collect();
                bi += 1;
            }
        }
    }

    let mut rank = vec![0usize; nv];
    let mut ctx = Ctx { g, by_level, report };
    rec(&mut ctx, &mut order, &mut placed, &mut rank);
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Enumerate all connected, acyclic-flow shapes with the given vertex
/// specs, m labeled outputs and n labeled inputs, up to isomorphism.
/// `level_tags`, when present, restricts edges to go from tag-0 vertices
/// to tag-1 vertices (two-level graphs).
pub fn enumerate_shapes(
    specs: &[Vertex],
    m: usize,
    n: usize,
    level_tags: Option<&[usize]>,
) -> Vec<Graph> {
    let nv = specs.len();
    let total_out: usize = specs.iter().map(|v| v.outs).sum();
    let total_in: usize = specs.iter().map(|v| v.ins).sum();
    if total_out < m || total_in < n || total_out - m != total_in - n {
        return Vec::new();
    }
    if nv == 0 {
        return Vec::new();
    }
    let ne = total_out - m;

    // flat lists of slots
    let mut out_slots: Vec<(usize, usize)> = Vec::new();
    let mut in_slots: Vec<(usize, usize)> = Vec::new();
    for (v, s) in specs.iter().enumerate() {
        for p in 0..s.outs {
            out_slots.push((v, p));
        }
        for q in 0..s.ins {
            in_slots.push((v, q));
        }
    }

    let mut found: BTreeMap<Vec<u32>, Graph> = BTreeMap::new();

    // choose, for each in-slot in order, either a global input label or a
    // source out-slot; afterwards distribute output labels over the
    // remaining out-slots.
    #[allow(clippy::too_many_arguments)]
    fn rec(
        specs: &[Vertex],
        level_tags: Option<&[usize]>,
        in_slots: &[(usize, usize)],
        out_slots: &[(usize, usize)],
        idx: usize,
        in_assign: &mut Vec<Hook>,
        out_used: &mut Vec<bool>,
        in_labels_left: &mut Vec<bool>,
        ne_left: usize,
        found: &mut BTreeMap<Vec<u32>, Graph>,
    ) {
        if idx == in_slots.len() {
            if ne_left != 0 {
                return;
            }
            finish(specs, in_slots, out_slots, in_assign, out_used, found);
            return;
        }
        let (v, _q) = in_slots[idx];
        let slots_after = in_slots.len() - idx - 1;
        // option: global input with any unused label
        if slots_after >= ne_left {
            for l in 0..in_labels_left.len() {
                if in_labels_left[l] {
                    in_labels_left[l] = false;
                    in_assign.push(Hook::Leg(l));
                    rec(
                        specs, level_tags, in_slots, out_slots, idx + 1, in_assign, out_used,
                        in_labels_left, ne_left, found,
                    );
                    in_assign.pop();
                    in_labels_left[l] = true;
                }
            }
        }
        // option: edge from an unused out-slot
        if ne_left > 0 {
            for (si, &(u, p)) in out_slots.iter().enumerate() {
                if out_used[si] || u == v {
                    continue;
                }
                if let Some(tags) = level_tags {
                    if !(tags[u] == 0 && tags[v] == 1) {
                        continue;
                    }
                }
                out_used[si] = true;
                in_assign.push(Hook::Port(u, p));
                rec(
                    specs, level_tags, in_slots, out_slots, idx + 1, in_assign, out_used,
                    in_labels_left, ne_left - 1, found,
                );
                in_assign.pop();
                out_used[si] = false;
            }
        }
    }

    fn finish(
        specs: &[Vertex],
        in_slots: &[(usize, usize)],
        out_slots: &[(usize, usize)],
        in_assign: &[Hook],
        out_used: &[bool],
        found: &mut BTreeMap<Vec<u32>, Graph>,
    ) {
        let free_outs: Vec<usize> =
            (0..out_slots.len()).filter(|&si| !out_used[si]).collect();
        let m = free_outs.len();
        // all bijections free out-slots -> labels
        let mut labeling: Vec<usize> = (0..m).collect();
        loop {
            let mut g = Graph {
                verts: specs.to_vec(),
                out_hook: specs.iter().map(|s| vec![Hook::Leg(usize::MAX); s.outs]).collect(),
                in_hook: specs.iter().map(|s| vec![Hook::Leg(usize::MAX); s.ins]).collect(),
                out_legs: vec![(0, 0); m],
                in_legs: vec![(0, 0); in_assign.iter().filter(|h| matches!(h, Hook::Leg(_))).count()],
            };
            for (idx, h) in in_assign.iter().enumerate() {
                let (v, q) = in_slots[idx];
                match *h {
                    Hook::Leg(l) => {
                        g.in_hook[v][q] = Hook::Leg(l);
                        g.in_legs[l] = (v, q);
                    }
                    Hook::Port(u, p) => {
                        g.in_hook[v][q] = Hook::Port(u, p);
                        g.out_hook[u][p] = Hook::Port(v, q);
                    }
                }
            }
            for (k, &si) in free_outs.iter().enumerate() {
                let (u, p) = out_slots[si];
                let l = labeling[k];
                g.out_hook[u][p] = Hook::Leg(l);
                g.out_legs[l] = (u, p);
            }
            if g.is_connected() && g.flow_levels().is_some() {
                let canon = canonical_form(&g);
                found.entry(canon.serial.clone()).or_insert(canon.graph);
            }
            if !next_permutation(&mut labeling) {
                break;
            }
        }
    }

    let mut in_assign = Vec::new();
    let mut out_used = vec![false; out_slots.len()];
    let mut in_labels_left = vec![true; n];
    rec(
        specs,
        level_tags,
        &in_slots,
        &out_slots,
        0,
        &mut in_assign,
        &mut out_used,
        &mut in_labels_left,
        ne,
        &mut found,
    );
    found.into_values().collect()
}

/// Replace vertex `v` of `ambient` by `inner`; inner's global legs are
/// spliced onto the attachments of v's ports (out leg l of inner takes the
/// attachment of v's out-port l, and dually). Arity must match.
pub fn graft(ambient: &Graph, v: usize, inner: &Graph) -> Graph {
    assert_eq!(inner.m(), ambient.verts[v].outs, "arity mismatch in graft (outputs)");
    assert_eq!(inner.n(), ambient.verts[v].ins, "arity mismatch in graft (inputs)");
    let nv_a = ambient.nv();
    // new indices: ambient vertices except v keep order (shifted), inner
    // vertices appended
    let map_a = |u: usize| -> usize {
        if u < v {
            u
        } else {
            u - 1
        }
    };
    let base = nv_a - 1;
    let mut verts: Vec<Vertex> = Vec::with_capacity(base + inner.nv());
    for (u, s) in ambient.verts.iter().enumerate() {
        if u != v {
            verts.push(*s);
        }
    }
    verts.extend_from_slice(&inner.verts);

    let mut out_hook: Vec<Vec<Hook>> =
        verts.iter().map(|s| vec![Hook::Leg(usize::MAX); s.outs]).collect();
    let mut in_hook: Vec<Vec<Hook>> =
        verts.iter().map(|s| vec![Hook::Leg(usize::MAX); s.ins]).collect();
    let mut out_legs = vec![(0usize, 0usize); ambient.m()];
    let mut in_legs = vec![(0usize, 0usize); ambient.n()];

    // resolve: what does out-port (x) of the new graph attach to?
    // ambient hooks touching v get rerouted into inner.
    // inner leg l corresponds to ambient port (v, l).
    let resolve_up = |h: &Hook| -> ResolvedUp {
        // attachment seen from an out-port, in ambient coordinates
        match *h {
            Hook::Leg(l) => ResolvedUp::GlobalOut(l),
            Hook::Port(u, q) if u != v => ResolvedUp::AmbIn(map_a(u), q),
            Hook::Port(_, q) => {
                // enters inner at inner's in-leg q
                let (iv, iq) = inner.in_legs[q];
                ResolvedUp::InnerIn(base + iv, iq)
            }
        }
    };
    let resolve_down = |h: &Hook| -> ResolvedDown {
        match *h {
            Hook::Leg(l) => ResolvedDown::GlobalIn(l),
            Hook::Port(u, p) if u != v => ResolvedDown::AmbOut(map_a(u), p),
            Hook::Port(_, p) => {
                let (iv, ip) = inner.out_legs[p];
                ResolvedDown::InnerOut(base + iv, ip)
            }
        }
    };

    enum ResolvedUp {
        GlobalOut(usize),
        AmbIn(usize, usize),
        InnerIn(usize, usize),
    }
    enum ResolvedDown {
        GlobalIn(usize),
        AmbOut(usize, usize),
        InnerOut(usize, usize),
    }

    fn connect(
        out_hook: &mut [Vec<Hook>],
        in_hook: &mut [Vec<Hook>],
        src: (usize, usize),
        dst: (usize, usize),
    ) {
        out_hook[src.0][src.1] = Hook::Port(dst.0, dst.1);
        in_hook[dst.0][dst.1] = Hook::Port(src.0, src.1);
    }

    // ambient edges and legs not touching v
    for u in 0..nv_a {
        if u == v {
            continue;
        }
        for (p, h) in ambient.out_hook[u].iter().enumerate() {
            match resolve_up(h) {
                ResolvedUp::GlobalOut(l) => {
                    out_hook[map_a(u)][p] = Hook::Leg(l);
                    out_legs[l] = (map_a(u), p);
                }
                ResolvedUp::AmbIn(w, q) => connect(&mut out_hook, &mut in_hook, (map_a(u), p), (w, q)),
                ResolvedUp::InnerIn(w, q) => connect(&mut out_hook, &mut in_hook, (map_a(u), p), (w, q)),
            }
        }
        for (q, h) in ambient.in_hook[u].iter().enumerate() {
            match resolve_down(h) {
                ResolvedDown::GlobalIn(l) => {
                    in_hook[map_a(u)][q] = Hook::Leg(l);
                    in_legs[l] = (map_a(u), q);
                }
                ResolvedDown::AmbOut(..) | ResolvedDown::InnerOut(..) => {
                    // handled from the out side
                }
            }
        }
    }
    // inner edges
    for (u, p, w, q) in inner.edges() {
        connect(&mut out_hook, &mut in_hook, (base + u, p), (base + w, q));
    }
    // inner out legs -> ambient attachments of v's out ports
    for (l, &(iv, ip)) in inner.out_legs.iter().enumerate() {
        match resolve_up(&ambient.out_hook[v][l]) {
            ResolvedUp::GlobalOut(gl) => {
                out_hook[base + iv][ip] = Hook::Leg(gl);
                out_legs[gl] = (base + iv, ip);
            }
            ResolvedUp::AmbIn(w, q) => connect(&mut out_hook, &mut in_hook, (base + iv, ip), (w, q)),
            ResolvedUp::InnerIn(w, q) => connect(&mut out_hook, &mut in_hook, (base + iv, ip), (w, q)),
        }
    }
    // inner in legs -> ambient attachments of v's in ports
    for (l, &(iv, iq)) in inner.in_legs.iter().enumerate() {
        match resolve_down(&ambient.in_hook[v][l]) {
            ResolvedDown::GlobalIn(gl) => {
                in_hook[base + iv][iq] = Hook::Leg(gl);
                in_legs[gl] = (base + iv, iq);
            }
            ResolvedDown::AmbOut(w, p) => connect(&mut out_hook, &mut in_hook, (w, p), (base + iv, iq)),
            ResolvedDown::InnerOut(w, p) => connect(&mut out_hook, &mut in_hook, (w, p), (base + iv, iq)),
        }
    }

    Graph { verts, out_hook, in_hook, out_legs, in_legs }
}

/// Where a leg of an induced part came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartBoundary {
    /// Original global output label.
    Out(usize),
    /// Original global input label.
    In(usize),
    /// A cut edge (u, p, v, q) of the original graph.
    CutEdge(Edge),
}

/// An induced subgraph with boundary descriptors.
#[derive(Clone, Debug)]
pub struct InducedPart {
    pub graph: Graph,
    /// part vertex -> original vertex
    pub vmap: Vec<usize>,
    pub out_desc: Vec<PartBoundary>,
    pub in_desc: Vec<PartBoundary>,
}

/// Extract the subgraph induced on `keep` (sorted vertex list). Cut edges
/// become part legs; out legs are numbered original-outs first (by label)
/// then outgoing cut edges (by edge order); in legs the same with
/// original-ins and incoming cut edges.
pub fn induced_subgraph(g: &Graph, keep: &[usize]) -> InducedPart {
    let mut inv = vec![usize::MAX; g.nv()];
    for (i, &v) in keep.iter().enumerate() {
        inv[v] = i;
    }
    let verts: Vec<Vertex> = keep.iter().map(|&v| g.verts[v]).collect();
    let mut out_hook: Vec<Vec<Hook>> =
        verts.iter().map(|s| vec![Hook::Leg(usize::MAX); s.outs]).collect();
    let mut in_hook: Vec<Vec<Hook>> =
        verts.iter().map(|s| vec![Hook::Leg(usize::MAX); s.ins]).collect();

    let mut out_desc: Vec<PartBoundary> = Vec::new();
    let mut in_desc: Vec<PartBoundary> = Vec::new();
    let mut out_leg_src: Vec<(usize, usize)> = Vec::new();
    let mut in_leg_src: Vec<(usize, usize)> = Vec::new();

    // original global legs on kept vertices, by label
    for (l, &(v, p)) in g.out_legs.iter().enumerate() {
        if inv[v] != usize::MAX {
            out_desc.push(PartBoundary::Out(l));
            out_leg_src.push((inv[v], p));
        }
    }
    for (l, &(v, q)) in g.in_legs.iter().enumerate() {
        if inv[v] != usize::MAX {
            in_desc.push(PartBoundary::In(l));
            in_leg_src.push((inv[v], q));
        }
    }
    // cut edges, in deterministic edge order
    for e in g.edges() {
        let (u, p, v, q) = e;
        let ku = inv[u] != usize::MAX;
        let kv = inv[v] != usize::MAX;
        if ku && kv {
            out_hook[inv[u]][p] = Hook::Port(inv[v], q);
            in_hook[inv[v]][q] = Hook::Port(inv[u], p);
        } else if ku {
            out_desc.push(PartBoundary::CutEdge(e));
            out_leg_src.push((inv[u], p));
        } else if kv {
            in_desc.push(PartBoundary::CutEdge(e));
            in_leg_src.push((inv[v], q));
        }
    }
    let mut out_legs = vec![(0, 0); out_leg_src.len()];
    let mut in_legs = vec![(0, 0); in_leg_src.len()];
    for (l, &(v, p)) in out_leg_src.iter().enumerate() {
        out_hook[v][p] = Hook::Leg(l);
        out_legs[l] = (v, p);
    }
    for (l, &(v, q)) in in_leg_src.iter().enumerate() {
        in_hook[v][q] = Hook::Leg(l);
        in_legs[l] = (v, q);
    }
    InducedPart {
        graph: Graph { verts, out_hook, in_hook, out_legs, in_legs },
        vmap: keep.to_vec(),
        out_desc,
        in_desc,
    }
}

/// JSON image of a graph with a stable field order.
#[derive(Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<[usize; 4]>,
    pub out_legs: Vec<[usize; 2]>,
    pub in_legs: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        GraphJson {
            vertices: g.verts.clone(),
            edges: g.edges().into_iter().map(|(a, b, c, d)| [a, b, c, d]).collect(),
            out_legs: g.out_legs.iter().map(|&(v, p)| [v, p]).collect(),
            in_legs: g.in_legs.iter().map(|&(v, q)| [v, q]).collect(),
        }
    }
}

impl GraphJson {
    pub fn to_graph(&self) -> Result<Graph, String> {
        let verts = self.vertices.clone();
        let mut out_hook: Vec<Vec<Hook>> =
            verts.iter().map(|s| vec![Hook::Leg(usize::MAX); s.outs]).collect();
        let mut in_hook: Vec<Vec<Hook>> =
            verts.iter().map(|s| vec![Hook::Leg(usize::MAX); s.ins]).collect();
        for &[u, p, v, q] in &self.edges {
            out_hook[u][p] = Hook::Port(v, q);
            in_hook[v][q] = Hook::Port(u, p);
        }
        for (l, &[v, p]) in self.out_legs.iter().enumerate() {
            out_hook[v][p] = Hook::Leg(l);
        }
        for (l, &[v, q]) in self.in_legs.iter().enumerate() {
            in_hook[v][q] = Hook::Leg(l);
        }
        let g = Graph {
            verts,
            out_hook,
            in_hook,
            out_legs: self.out_legs.iter().map(|&[v, p]| (v, p)).collect(),
            in_legs: self.in_legs.iter().map(|&[v, q]| (v, q)).collect(),
        };
        g.validate()?;
        Ok(g)
    }
}

/// Convenience constructor: a single-vertex corolla.
pub fn corolla(outs: usize, ins: usize, color: u32) -> Graph {
    Graph {
        verts: vec![Vertex { outs, ins, color }],
        out_hook: vec![(0..outs).map(Hook::Leg).collect()],
        in_hook: vec![(0..ins).map(Hook::Leg).collect()],
        out_legs: (0..outs).map(|p| (0, p)).collect(),
        in_legs: (0..ins).map(|q| (0, q)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level_pair() -> Graph {
        // bottom vertex (1,2) color 0 feeding top vertex (2,1) color 1
        let verts = vec![
            Vertex { outs: 1, ins: 2, color: 0 },
            Vertex { outs: 2, ins: 1, color: 1 },
        ];
        Graph {
            verts,
            out_hook: vec![vec![Hook::Port(1, 0)], vec![Hook::Leg(0), Hook::Leg(1)]],
            in_hook: vec![vec![Hook::Leg(0), Hook::Leg(1)], vec![Hook::Port(0, 0)]],
            out_legs: vec![(1, 0), (1, 1)],
            in_legs: vec![(0, 0), (0, 1)],
        }
    }

    #[test]
    fn validate_and_canon_roundtrip() {
        let g = two_level_pair();
        g.validate().unwrap();
        let c = canonical_form(&g);
        c.graph.validate().unwrap();
        // idempotent: canonicalizing the canonical graph is the identity
        let c2 = canonical_form(&c.graph);
        assert_eq!(c2.serial, c.serial);
        assert!(c2.iso.vmap.iter().enumerate().all(|(i, &v)| i == v));
    }

    #[test]
    fn corolla_is_single_class() {
        let shapes = enumerate_shapes(&[Vertex { outs: 1, ins: 2, color: 0 }], 1, 2, None);
        assert_eq!(shapes.len(), 1);
    }

    #[test]
    fn two_binary_vertices_give_three_trees() {
        let v = Vertex { outs: 1, ins: 2, color: 0 };
        let shapes = enumerate_shapes(&[v, v], 1, 3, None);
        assert_eq!(shapes.len(), 3);
        assert!(shapes.iter().all(|g| g.genus() == 0));
    }

    #[test]
    fn genus_one_double_edge() {
        let a = Vertex { outs: 2, ins: 1, color: 0 };
        let b = Vertex { outs: 1, ins: 2, color: 1 };
        let shapes = enumerate_shapes(&[a, b], 1, 1, None);
        assert_eq!(shapes.len(), 1);
        assert_eq!(shapes[0].genus(), 1);
        // the double edge is a single adjacent pair
        assert_eq!(shapes[0].adjacent_pairs().len(), 1);
        // and its automorphism group has order 2 (swapping the parallel edges)
        assert_eq!(automorphisms(&shapes[0]).len(), 2);
    }

    #[test]
    fn adjacent_pairs_on_path() {
        // path a -> b -> c of unary vertices
        let u = Vertex { outs: 1, ins: 1, color: 0 };
        let g = Graph {
            verts: vec![u, u, u],
            out_hook: vec![vec![Hook::Port(1, 0)], vec![Hook::Port(2, 0)], vec![Hook::Leg(0)]],
            in_hook: vec![vec![Hook::Leg(0)], vec![Hook::Port(0, 0)], vec![Hook::Port(1, 0)]],
            out_legs: vec![(2, 0)],
            in_legs: vec![(0, 0)],
        };
        g.validate().unwrap();
        assert_eq!(g.adjacent_pairs(), vec![(0, 1), (1, 2)]);
        // order ideals: {}, {a}, {a,b}, {a,b,c}
        assert_eq!(g.order_ideals().len(), 4);
    }

    #[test]
    fn single_vertex_has_no_pairs() {
        let g = corolla(1, 2, 0);
        assert!(g.adjacent_pairs().is_empty());
    }

    #[test]
    fn graft_replaces_vertex() {
        let g = two_level_pair();
        // replace the bottom (1,2) vertex by a 2-vertex chain of (1,2) over (1,1)
        let inner = Graph {
            verts: vec![
                Vertex { outs: 1, ins: 1, color: 7 },
                Vertex { outs: 1, ins: 2, color: 8 },
            ],
            out_hook: vec![vec![Hook::Port(1, 0)], vec![Hook::Leg(0)]],
            in_hook: vec![vec![Hook::Leg(0)], vec![Hook::Port(0, 0), Hook::Leg(1)]],
            out_legs: vec![(1, 0)],
            in_legs: vec![(0, 0), (1, 1)],
        };
        inner.validate().unwrap();
        let out = graft(&g, 0, &inner);
        out.validate().unwrap();
        assert_eq!(out.nv(), 3);
        assert_eq!(out.m(), 2);
        assert_eq!(out.n(), 2);
    }

    #[test]
    fn induced_subgraph_boundaries() {
        let g = two_level_pair();
        let part = induced_subgraph(&g, &[0]);
        part.graph.validate().unwrap();
        assert_eq!(part.out_desc, vec![PartBoundary::CutEdge((0, 0, 1, 0))]);
        assert_eq!(part.in_desc, vec![PartBoundary::In(0), PartBoundary::In(1)]);
    }

    #[test]
    fn enumeration_round_trip_small_shapes() {
        // every explicitly generated labeled representative canonicalizes
        // into one of the enumerated classes
        let v = Vertex { outs: 1, ins: 2, color: 0 };
        let shapes = enumerate_shapes(&[v, v], 1, 3, None);
        let serials: Vec<Vec<u32>> = shapes.iter().map(serialize).collect();
        for g in &shapes {
            let c = canonical_form(g);
            assert!(serials.contains(&c.serial));
            // no directed cycles in any enumerated class
            assert!(g.flow_levels().is_some());
        }
    }

    #[test]
    fn two_level_enumeration_respects_tags() {
        // bottom (1,2) under top (2,1): the single edge forces one class
        let bot = Vertex { outs: 1, ins: 2, color: 0 };
        let top = Vertex { outs: 2, ins: 1, color: 1 };
        let shapes = enumerate_shapes(&[bot, top], 2, 2, Some(&[0, 1]));
        assert_eq!(shapes.len(), 1);
        // bottom (2,1) under top (1,2): a free leg on each vertex on both
        // sides gives 2x2 label distributions
        let bot = Vertex { outs: 2, ins: 1, color: 0 };
        let top = Vertex { outs: 1, ins: 2, color: 1 };
        let shapes = enumerate_shapes(&[bot, top], 2, 2, Some(&[0, 1]));
        assert_eq!(shapes.len(), 4);
        for g in &shapes {
            for (u, _, v, _) in g.edges() {
                assert_eq!((g.verts[u].color, g.verts[v].color), (0, 1));
            }
        }
    }
}
