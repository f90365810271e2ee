//! Truncated Poincaré series, the Ψ composition functional, the
//! functional-equation checks of Koszul duality, and the associahedra
//! generating function.
//!
//! All checks are exact: a residual is a rational number that must vanish
//! on the nose. Ψ is implemented as the true generating functional of the
//! connected composition product — the coefficient at (m, n, d) of
//! Ψ(f_Q, f_P) is dim(Q ⊠_c P)_(d)(m,n)/(m!·n!), computed over the actual
//! symmetric-group actions. Dimension tables alone do not determine these
//! numbers (cells with wiring stabilizers see the actions), so a series
//! carries a handle to its equivariant source; the literal closed formula
//! printed for Ψ (profile sums weighted by connected-permutation counts)
//! is recovered exactly on stabilizer-free cells.

use crate::barkoszul::{BarCtx, KernelSource};
use crate::quadratic::{Presentation, QuotientSource};
use crate::ratlin::{factorial, qi, Q};
use crate::spaces::{two_level_space, BimodSource};
use num::Zero;
use serde::Serialize;
use std::collections::BTreeMap;
use std::rc::Rc;

/// Truncation bounds for three-variable series.
#[derive(Clone, Copy, Debug)]
pub struct Bounds3 {
    pub max_m: usize,
    pub max_n: usize,
    pub max_d: usize,
    /// optional joint cap on m + n
    pub max_mn: Option<usize>,
}

impl Bounds3 {
    pub fn contains(&self, m: usize, n: usize, d: usize) -> bool {
        m >= 1
            && n >= 1
            && m <= self.max_m
            && n <= self.max_n
            && d <= self.max_d
            && self.max_mn.map_or(true, |c| m + n <= c)
    }

    pub fn cells(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for m in 1..=self.max_m {
            for n in 1..=self.max_n {
                for d in 0..=self.max_d {
                    if self.contains(m, n, d) {
                        out.push((m, n, d));
                    }
                }
            }
        }
        out
    }
}

/// Rational coefficients c[m][n][d] of a Poincaré series
/// f(y,x,z) = Σ dim_(d)(m,n)/(m!·n!)·y^m x^n z^d, with an optional handle
/// to the equivariant data behind the dimensions.
pub struct TruncatedSeries3 {
    pub bounds: Bounds3,
    coeffs: BTreeMap<(usize, usize, usize), Q>,
    pub equiv: Option<Rc<dyn BimodSource>>,
    /// true when the stored coefficients carry the z ↦ −z twist
    pub z_negated: bool,
}

impl TruncatedSeries3 {
    pub fn coeff(&self, m: usize, n: usize, d: usize) -> Q {
        assert!(self.bounds.contains(m, n, d) || (m == 1 && n == 1), "coefficient out of bounds");
        self.coeffs.get(&(m, n, d)).cloned().unwrap_or_else(Q::zero)
    }

    /// f(y, x, −z): negate the odd-z coefficients.
    pub fn negate_z(&self) -> TruncatedSeries3 {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&(m, n, d), c)| ((m, n, d), if d % 2 == 1 { -c } else { c.clone() }))
            .collect();
        TruncatedSeries3 {
            bounds: self.bounds,
            coeffs,
            equiv: self.equiv.clone(),
            z_negated: !self.z_negated,
        }
    }
}

/// The Poincaré series of a quadratic presentation's quotient properad.
pub fn series_of(pres: &Rc<Presentation>, bounds: Bounds3) -> TruncatedSeries3 {
    let mut coeffs = BTreeMap::new();
    for (m, n, d) in bounds.cells() {
        let dim = pres.quotient_dim(d, m, n);
        if dim > 0 {
            coeffs.insert((m, n, d), qi(dim as i64) / (factorial(m) * factorial(n)));
        }
    }
    let arity = bounds.max_m.max(bounds.max_n) + 2 * bounds.max_d;
    let src: Rc<dyn BimodSource> =
        Rc::new(QuotientSource::new(pres.clone(), bounds.max_d, arity, true));
    TruncatedSeries3 { bounds, coeffs, equiv: Some(src), z_negated: false }
}

/// The Poincaré series of the Koszul dual P^i (kernel route).
pub fn series_of_dual(bar: &Rc<BarCtx>, bounds: Bounds3) -> TruncatedSeries3 {
    let mut coeffs = BTreeMap::new();
    for (m, n, d) in bounds.cells() {
        let dim = bar.koszul_dual_dim(d, m, n);
        if dim > 0 {
            coeffs.insert((m, n, d), qi(dim as i64) / (factorial(m) * factorial(n)));
        }
    }
    let arity = bounds.max_m.max(bounds.max_n) + 2 * bounds.max_d;
    let src: Rc<dyn BimodSource> = Rc::new(KernelSource {
        bar: bar.clone(),
        max_w: bounds.max_d,
        max_mn: arity.min(bar.max_mn),
        with_unit: true,
    });
    TruncatedSeries3 { bounds, coeffs, equiv: Some(src), z_negated: false }
}

/// A series over an explicit monomial S-bimodule (used by the Ψ-vs-⊠_c
/// oracle and available to callers building their own bimodules).
pub fn series_of_bimodule(module: &crate::sbimod::SBimodule, bounds: Bounds3) -> TruncatedSeries3 {
    let mut coeffs = BTreeMap::new();
    let mut with_unit = module.components.clone();
    if !with_unit.iter().any(|c| c.weight == 0) {
        with_unit.extend(crate::sbimod::SBimodule::unit().components);
    }
    for (m, n, d) in bounds.cells() {
        let dim: usize = module
            .components
            .iter()
            .filter(|c| c.m == m && c.n == n && c.weight == d)
            .map(|c| c.dim())
            .sum::<usize>()
            + usize::from(d == 0 && m == 1 && n == 1);
        if dim > 0 {
            coeffs.insert((m, n, d), qi(dim as i64) / (factorial(m) * factorial(n)));
        }
    }
    let src: Rc<dyn BimodSource> = Rc::new(crate::spaces::MonomialSource::new(
        crate::sbimod::SBimodule::new(with_unit),
    ));
    TruncatedSeries3 { bounds, coeffs, equiv: Some(src), z_negated: false }
}

/// Ψ(g, f): the connected-composition functional, with g's bimodule on
/// the output side. Coefficient (m,n,d) = Σ_{k+l=d} ±dim(G_k ⊠_c F_l)(m,n)
/// / (m!·n!), the sign pattern carrying each factor's z-twist.
/// Every referenced coefficient must be within both inputs' bounds.
pub fn psi(g: &TruncatedSeries3, f: &TruncatedSeries3, bounds: Bounds3) -> TruncatedSeries3 {
    let gsrc = g.equiv.clone().expect("psi needs the equivariant source of g");
    let fsrc = f.equiv.clone().expect("psi needs the equivariant source of f");
    assert!(
        bounds.max_d <= g.bounds.max_d && bounds.max_d <= f.bounds.max_d,
        "bound overflow: output weight exceeds input truncation"
    );
    let mut coeffs = BTreeMap::new();
    for (m, n, d) in bounds.cells() {
        let mut total = Q::zero();
        for k in 0..=d {
            let dim =
                two_level_space(gsrc.clone(), fsrc.clone(), m, n, k, d - k, None).dim;
            if dim == 0 {
                continue;
            }
            let mut sign = 1i64;
            if g.z_negated && k % 2 == 1 {
                sign = -sign;
            }
            if f.z_negated && (d - k) % 2 == 1 {
                sign = -sign;
            }
            total += qi(sign * dim as i64);
        }
        if !total.is_zero() {
            coeffs.insert((m, n, d), total / (factorial(m) * factorial(n)));
        }
    }
    TruncatedSeries3 { bounds, coeffs, equiv: None, z_negated: false }
}

/// Per-cell residual report for the functional equations.
#[derive(Serialize)]
pub struct EquationReport {
    pub name: String,
    pub cells: Vec<CellResidual>,
    pub max_deviation: String,
    pub worst_cell: Option<(usize, usize, usize)>,
    pub pass: bool,
    /// the literal Ψ display in the source material lacks the multiset
    /// normalizations and is blind to wiring stabilizers; the engine
    /// computes the exact composition functional instead
    pub psi_display_correction: &'static str,
}

#[derive(Serialize)]
pub struct CellResidual {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub lhs: String,
    pub rhs: String,
    pub residual: String,
}

/// Thm 9.1: Ψ(f_{P^i}(y,X,−z), f_P(Y,x,z)) = xy, exactly, cell-wise.
pub fn verify_koszul_equation(
    pres: &Rc<Presentation>,
    bar: &Rc<BarCtx>,
    bounds: Bounds3,
) -> EquationReport {
    let fp = series_of(pres, bounds);
    let fpi = series_of_dual(bar, bounds).negate_z();
    let lhs = psi(&fpi, &fp, bounds);
    let mut cells = Vec::new();
    let mut max_dev = Q::zero();
    let mut worst = None;
    for (m, n, d) in bounds.cells() {
        let l = lhs.coeff(m, n, d);
        let r = if m == 1 && n == 1 && d == 0 { qi(1) } else { Q::zero() };
        let res = &l - &r;
        if !res.is_zero() {
            if abs(&res) > max_dev {
                max_dev = abs(&res);
                worst = Some((m, n, d));
            }
        }
        cells.push(CellResidual {
            m,
            n,
            d,
            lhs: l.to_string(),
            rhs: r.to_string(),
            residual: res.to_string(),
        });
    }
    EquationReport {
        name: format!("thm-9.1[{}]", pres.name),
        cells,
        max_deviation: max_dev.to_string(),
        worst_cell: worst,
        pass: max_dev.is_zero(),
        psi_display_correction: PSI_NOTE,
    }
}

const PSI_NOTE: &str = "psi computed as the exact generating functional of the connected \
composition product (multiset factors 1/(a!b!) included; stabilizer cells counted through \
the actions, not from dimensions alone)";

fn abs(x: &Q) -> Q {
    if x < &Q::zero() {
        -x
    } else {
        x.clone()
    }
}

/// One-variable truncated series with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries1 {
    pub c: Vec<Q>,
}

impl TruncatedSeries1 {
    pub fn zero(max_d: usize) -> Self {
        TruncatedSeries1 { c: vec![Q::zero(); max_d + 1] }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn mul(&self, other: &TruncatedSeries1) -> TruncatedSeries1 {
        let mut out = TruncatedSeries1::zero(self.order().min(other.order()));
        for d in 0..=out.order() {
            let mut acc = Q::zero();
            for i in 0..=d {
                acc += &self.c[i] * &other.c[d - i];
            }
            out.c[d] = acc;
        }
        out
    }
}

/// §9.2: f_A(x)·f_{A^i}(−x) = 1 to order D, for an algebra-shaped
/// presentation (generators concentrated in (1,1)).
pub fn algebra_equation(pres: &Rc<Presentation>, max_d: usize) -> EquationReport {
    assert!(
        pres.generators().components.iter().all(|c| c.m == 1 && c.n == 1),
        "algebra-shaped presentation required"
    );
    let dual = pres.koszul_dual_presentation();
    let mut fa = TruncatedSeries1::zero(max_d);
    let mut fai = TruncatedSeries1::zero(max_d);
    for d in 0..=max_d {
        fa.c[d] = qi(pres.quotient_dim(d, 1, 1) as i64);
        let s = if d % 2 == 1 { -1 } else { 1 };
        fai.c[d] = qi(s * dual.quotient_dim(d, 1, 1) as i64);
    }
    let prod = fa.mul(&fai);
    let mut cells = Vec::new();
    let mut max_dev = Q::zero();
    let mut worst = None;
    for d in 0..=max_d {
        let r = if d == 0 { qi(1) } else { Q::zero() };
        let res = &prod.c[d] - &r;
        if abs(&res) > max_dev {
            max_dev = abs(&res);
            worst = Some((1, 1, d));
        }
        cells.push(CellResidual {
            m: 1,
            n: 1,
            d,
            lhs: prod.c[d].to_string(),
            rhs: r.to_string(),
            residual: res.to_string(),
        });
    }
    EquationReport {
        name: format!("sec-9.2[{}]", pres.name),
        cells,
        max_deviation: max_dev.to_string(),
        worst_cell: worst,
        pass: max_dev.is_zero(),
        psi_display_correction: PSI_NOTE,
    }
}

/// Two-variable series Σ c[n][d] x^n z^d used for the operadic equation.
#[derive(Clone, Debug)]
pub struct Series2 {
    pub max_n: usize,
    pub max_d: usize,
    pub c: Vec<Vec<Q>>, // c[n][d], n = 0..max_n
}

impl Series2 {
    pub fn zero(max_n: usize, max_d: usize) -> Self {
        Series2 { max_n, max_d, c: vec![vec![Q::zero(); max_d + 1]; max_n + 1] }
    }

    pub fn mul(&self, other: &Series2) -> Series2 {
        let mut out = Series2::zero(self.max_n, self.max_d);
        for n1 in 0..=self.max_n {
            for d1 in 0..=self.max_d {
                if self.c[n1][d1].is_zero() {
                    continue;
                }
                for n2 in 0..=(out.max_n - n1).min(other.max_n) {
                    for d2 in 0..=(out.max_d - d1).min(other.max_d) {
                        if other.c[n2][d2].is_zero() {
                            continue;
                        }
                        let v = &self.c[n1][d1] * &other.c[n2][d2];
                        out.c[n1 + n2][d1 + d2] += v;
                    }
                }
            }
        }
        out
    }

    /// substitute x ↦ inner (inner must have zero constant term), z ↦ ±z
    pub fn compose(&self, inner: &Series2, negate_z: bool) -> Series2 {
        assert!(inner.c[0].iter().all(|x| x.is_zero()), "inner series needs no constant term");
        let mut out = Series2::zero(inner.max_n, inner.max_d);
        // powers of inner
        let mut pw = Series2::zero(inner.max_n, inner.max_d);
        pw.c[0][0] = qi(1);
        for nn in 0..=self.max_n {
            if nn > 0 {
                pw = pw.mul(inner);
            }
            for dd in 0..=self.max_d {
                let mut coef = self.c[nn][dd].clone();
                if coef.is_zero() {
                    continue;
                }
                if negate_z && dd % 2 == 1 {
                    coef = -coef;
                }
                for n in 0..=out.max_n {
                    for d in 0..=(out.max_d.saturating_sub(dd)) {
                        if pw.c[n][d].is_zero() {
                            continue;
                        }
                        let v = &coef * &pw.c[n][d];
                        out.c[n][d + dd] += v;
                    }
                }
            }
        }
        out
    }
}

/// Cor 9.2: f_{P^i}(f_P(x,z), −z) = x to the given truncation, for an
/// operad-shaped presentation (generators concentrated in m = 1).
pub fn operad_equation(
    pres: &Rc<Presentation>,
    bar: &Rc<BarCtx>,
    max_n: usize,
    max_d: usize,
) -> EquationReport {
    assert!(
        pres.generators().components.iter().all(|c| c.m == 1),
        "operad-shaped presentation required"
    );
    let mut fp = Series2::zero(max_n, max_d);
    let mut fpi = Series2::zero(max_n, max_d);
    for n in 1..=max_n {
        for d in 0..=max_d {
            let dim = pres.quotient_dim(d, 1, n);
            if dim > 0 {
                fp.c[n][d] = qi(dim as i64) / factorial(n);
            }
            let dimi = bar.koszul_dual_dim(d, 1, n);
            if dimi > 0 {
                fpi.c[n][d] = qi(dimi as i64) / factorial(n);
            }
        }
    }
    let lhs = fpi.compose(&fp, true);
    report_equals_x("cor-9.2", &pres.name, &lhs, max_n, max_d)
}

fn report_equals_x(
    tag: &str,
    name: &str,
    lhs: &Series2,
    max_n: usize,
    max_d: usize,
) -> EquationReport {
    let mut cells = Vec::new();
    let mut max_dev = Q::zero();
    let mut worst = None;
    for n in 0..=max_n {
        for d in 0..=max_d {
            let r = if n == 1 && d == 0 { qi(1) } else { Q::zero() };
            let res = &lhs.c[n][d] - &r;
            if abs(&res) > max_dev {
                max_dev = abs(&res);
                worst = Some((1, n, d));
            }
            if !res.is_zero() || (n == 1 && d == 0) {
                cells.push(CellResidual {
                    m: 1,
                    n,
                    d,
                    lhs: lhs.c[n][d].to_string(),
                    rhs: r.to_string(),
                    residual: res.to_string(),
                });
            }
        }
    }
    EquationReport {
        name: format!("{}[{}]", tag, name),
        cells,
        max_deviation: max_dev.to_string(),
        worst_cell: worst,
        pass: max_dev.is_zero(),
        psi_display_correction: PSI_NOTE,
    }
}

/// Polynomials in z as coefficient vectors, ascending.
pub type ZPoly = Vec<Q>;

fn zp_add(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let mut out = vec![Q::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

fn zp_mul(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn zp_trim(mut a: ZPoly) -> ZPoly {
    while a.last().map_or(false, |x| x.is_zero()) {
        a.pop();
    }
    a
}

/// The §9.3 report: the free operad on one n-ary generator per arity,
/// its Poincaré series, the quadratic relation, the associahedra
/// polynomials and the closed-form expansion.
#[derive(Serialize)]
pub struct AssocReport {
    /// P_n(z) for n = 0..=max_n, ascending z-coefficients as strings
    pub polynomials: Vec<Vec<String>>,
    pub closed_form_matches: bool,
    pub tree_oracle_matches: bool,
    pub dims_route_matches_oracle: bool,
    /// residual coefficients of (z+1)f² − (1+x)f + x, per x-order
    pub relation_residuals: Vec<String>,
    pub relation_residual_zero: bool,
    pub pass: bool,
}

/// Planar trees with every internal vertex of arity ≥ 2, counted by
/// (leaves, internal vertices) via the operadic fixed point
/// f = x + z·f²/(1−f).
pub fn planar_tree_dims(max_leaves: usize) -> Vec<Vec<usize>> {
    // t[n][d], 1 ≤ n ≤ max_leaves, 0 ≤ d < n
    let mut t = vec![vec![0usize; max_leaves]; max_leaves + 1];
    if max_leaves >= 1 {
        t[1][0] = 1;
    }
    for n in 2..=max_leaves {
        // root of arity k ≥ 2: forests of k subtrees
        // f_k[m][e] = #ordered forests of k trees with m leaves, e vertices
        let mut fk = vec![vec![0usize; max_leaves]; max_leaves + 1];
        fk[0][0] = 1; // empty forest
        for k in 1..=n {
            let mut next = vec![vec![0usize; max_leaves]; max_leaves + 1];
            for m in 0..=max_leaves {
                for e in 0..max_leaves {
                    if fk[m][e] == 0 {
                        continue;
                    }
                    for m2 in 1..=(max_leaves - m) {
                        for e2 in 0..(max_leaves - e) {
                            if t[m2][e2] == 0 {
                                continue;
                            }
                            if e + e2 < max_leaves {
                                next[m + m2][e + e2] += fk[m][e] * t[m2][e2];
                            }
                        }
                    }
                }
            }
            fk = next;
            if k >= 2 && k <= n {
                for e in 0..max_leaves - 1 {
                    t[n][e + 1] += fk[n][e];
                }
            }
        }
    }
    t
}

/// Explicit recursive enumeration of planar trees (the independent
/// oracle): returns the same table as `planar_tree_dims` by generating
/// the trees one by one.
pub fn planar_tree_oracle(max_leaves: usize) -> Vec<Vec<usize>> {
    fn gen(leaves: usize, table: &mut Vec<Vec<usize>>, max_leaves: usize) -> Vec<(usize, usize)> {
        // returns the multiset of (leaves, vertices) of all planar trees
        // with exactly `leaves` leaves, one entry per tree
        let mut out = Vec::new();
        if leaves == 1 {
            out.push((1, 0));
            return out;
        }
        // root arity k: compositions of leaves into k parts
        for k in 2..=leaves {
            for parts in compositions_k(leaves, k) {
                // cartesian product over subtree choices
                let mut choices: Vec<Vec<(usize, usize)>> = Vec::new();
                for p in &parts {
                    choices.push(gen(*p, table, max_leaves));
                }
                let mut acc: Vec<usize> = vec![0]; // vertex counts so far
                for ch in &choices {
                    let mut next = Vec::new();
                    for &base in &acc {
                        for &(_, v) in ch {
                            next.push(base + v);
                        }
                    }
                    acc = next;
                }
                for v in acc {
                    out.push((leaves, v + 1));
                }
            }
        }
        out
    }
    fn compositions_k(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 1 {
            return vec![vec![n]];
        }
        let mut out = Vec::new();
        for first in 1..=(n - k + 1) {
            for rest in compositions_k(n - first, k - 1) {
                let mut v = vec![first];
                v.extend(rest);
                out.push(v);
            }
        }
        out
    }
    let mut table = vec![vec![0usize; max_leaves]; max_leaves + 1];
    for n in 1..=max_leaves {
        for (leaves, verts) in gen(n, &mut table, max_leaves) {
            if verts < max_leaves {
                table[leaves][verts] += 1;
            }
        }
    }
    table
}

/// Build the §9.3 report to x^order.
pub fn associahedra(order: usize) -> AssocReport {
    assert!(order <= 10, "associahedra report capped at order 10");
    let max_leaves = order;
    let dims = planar_tree_dims(max_leaves);
    let oracle = planar_tree_oracle(max_leaves.min(7));

    let mut dims_route_matches_oracle = true;
    let ocap = max_leaves.min(7);
    for n in 1..=ocap {
        for d in 0..ocap {
            if dims[n][d] != oracle[n][d] {
                dims_route_matches_oracle = false;
            }
        }
    }

    // f_P(x,z) = Σ t[n][d] z^d x^n as polynomials in z per x-order
    let mut fp: Vec<ZPoly> = vec![Vec::new(); max_leaves + 1];
    for n in 1..=max_leaves {
        fp[n] = zp_trim(dims[n].iter().map(|&v| qi(v as i64)).collect());
    }

    // residual of (z+1)f² − (1+x)f + x per x-order
    let mut f2: Vec<ZPoly> = vec![Vec::new(); max_leaves + 1];
    for n in 0..=max_leaves {
        let mut acc: ZPoly = Vec::new();
        for i in 0..=n {
            if i < fp.len() && n - i < fp.len() {
                acc = zp_add(&acc, &zp_mul(&fp[i], &fp[n - i]));
            }
        }
        f2[n] = acc;
    }
    let zp1 = vec![qi(1), qi(1)]; // 1 + z
    let mut residuals = Vec::new();
    let mut relation_residual_zero = true;
    for n in 0..=max_leaves {
        let mut r = zp_mul(&zp1, &f2[n]);
        // −(1+x)f: −f[n] − f[n−1]
        r = zp_add(&r, &fp[n].iter().map(|c| -c).collect::<ZPoly>());
        if n >= 1 {
            r = zp_add(&r, &fp[n - 1].iter().map(|c| -c).collect::<ZPoly>());
        }
        if n == 1 {
            r = zp_add(&r, &vec![qi(1)]);
        }
        r = zp_trim(r);
        if !r.is_empty() {
            relation_residual_zero = false;
        }
        residuals.push(format!("{:?}", r.iter().map(|c| c.to_string()).collect::<Vec<_>>()));
    }

    // P_n(z) = Σ_k #Cel_k^n z^k with #Cel_k^n = t[n+2][n+1−k]
    let max_poly = max_leaves.saturating_sub(2);
    let mut polys: Vec<ZPoly> = Vec::new();
    for n in 0..=max_poly {
        let mut p: ZPoly = Vec::new();
        for k in 0..=n {
            let verts = n + 1 - k;
            let v = if n + 2 <= max_leaves && verts < max_leaves {
                dims[n + 2][verts]
            } else {
                0
            };
            p.push(qi(v as i64));
        }
        polys.push(zp_trim(p));
    }

    // closed form via its defining relation:
    // P_N = (2+z)P_{N−1} + (1+z)·Σ_{i+j=N−2} P_i P_j, P_0 = 1
    let mut closed: Vec<ZPoly> = vec![vec![qi(1)]];
    for nn in 1..=max_poly {
        let mut p = zp_mul(&vec![qi(2), qi(1)], &closed[nn - 1]);
        if nn >= 2 {
            let mut s: ZPoly = Vec::new();
            for i in 0..=nn - 2 {
                s = zp_add(&s, &zp_mul(&closed[i], &closed[nn - 2 - i]));
            }
            p = zp_add(&p, &zp_mul(&zp1, &s));
        }
        closed.push(zp_trim(p));
    }
    let closed_form_matches = polys == closed;

    // tree oracle comparison for the polynomials themselves
    let mut tree_oracle_matches = true;
    for n in 0..=max_poly.min(5) {
        let mut p: ZPoly = Vec::new();
        for k in 0..=n {
            let verts = n + 1 - k;
            let v = if n + 2 <= 7 && verts < 7 { oracle[n + 2][verts] } else { 0 };
            p.push(qi(v as i64));
        }
        if zp_trim(p) != polys[n] {
            tree_oracle_matches = false;
        }
    }

    let pass = relation_residual_zero
        && closed_form_matches
        && tree_oracle_matches
        && dims_route_matches_oracle;
    AssocReport {
        polynomials: polys
            .iter()
            .map(|p| p.iter().map(|c| c.to_string()).collect())
            .collect(),
        closed_form_matches,
        tree_oracle_matches,
        dims_route_matches_oracle,
        relation_residuals: residuals,
        relation_residual_zero,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn b3(max_m: usize, max_n: usize, max_d: usize, mn: Option<usize>) -> Bounds3 {
        Bounds3 { max_m, max_n, max_d, max_mn: mn }
    }

    #[test]
    fn series_coefficients() {
        let bounds = b3(2, 2, 1, None);
        let bilie = Rc::new(presets::get("bilie").unwrap());
        let s = series_of(&bilie, bounds);
        assert_eq!(s.coeff(1, 1, 0), qi(1));
        assert_eq!(s.coeff(1, 2, 1), crate::ratlin::qr(1, 2));
        let eps = Rc::new(presets::get("epsbi").unwrap());
        let s = series_of(&eps, bounds);
        assert_eq!(s.coeff(1, 2, 1), qi(1));
    }

    #[test]
    fn psi_unit_on_units() {
        let bounds = b3(1, 1, 0, None);
        let i = crate::sbimod::SBimodule::new(vec![]);
        let s = series_of_bimodule(&i, bounds);
        let p = psi(&s, &s, bounds);
        assert_eq!(p.coeff(1, 1, 0), qi(1));
    }

    #[test]
    fn psi_matches_compose_connected_on_monomials() {
        use crate::sbimod::{compose_connected, ActionSpec, Component, SBimodule};
        let q = SBimodule::new(vec![Component {
            name: "q".into(),
            m: 1,
            n: 2,
            weight: 1,
            degree: 0,
            out_action: ActionSpec::Trivial,
            in_action: ActionSpec::Sign,
            czech_out: false,
            czech_in: false,
        }]);
        let p = SBimodule::new(vec![Component {
            name: "p".into(),
            m: 2,
            n: 1,
            weight: 1,
            degree: 0,
            out_action: ActionSpec::Sign,
            in_action: ActionSpec::Trivial,
            czech_out: false,
            czech_in: false,
        }]);
        let bounds = b3(2, 2, 2, None);
        let sq = series_of_bimodule(&q, bounds);
        let sp = series_of_bimodule(&p, bounds);
        let out = psi(&sq, &sp, bounds);
        // compare coefficient-wise with the canonicalization route,
        // units adjoined on both sides
        let mut qq = q.components.clone();
        qq.extend(SBimodule::unit().components);
        let qq = SBimodule::new(qq);
        let mut pp = p.components.clone();
        pp.extend(SBimodule::unit().components);
        let pp = SBimodule::new(pp);
        for (m, n, d) in bounds.cells() {
            let dim = compose_connected(&qq, &pp, m, n, d, 0).basis.len();
            let expect = qi(dim as i64) / (factorial(m) * factorial(n));
            assert_eq!(out.coeff(m, n, d), expect, "cell ({},{},{})", m, n, d);
        }
    }

    #[test]
    fn algebra_equation_examples() {
        let dn = Rc::new(presets::get("dualnumbers").unwrap());
        let rep = algebra_equation(&dn, 8);
        assert!(rep.pass, "dual numbers: {:?}", rep.max_deviation);
    }

    #[test]
    fn associahedra_small() {
        let rep = associahedra(8);
        assert!(rep.relation_residual_zero);
        assert!(rep.closed_form_matches);
        assert!(rep.tree_oracle_matches);
        assert!(rep.dims_route_matches_oracle);
        // P_1(z) = z + 2, P_2(z) = z² + 5z + 5
        assert_eq!(rep.polynomials[1], vec!["2", "1"]);
        assert_eq!(rep.polynomials[2], vec!["5", "5", "1"]);
    }

    #[test]
    fn free_operad_dims_match_planar_trees() {
        // the general machinery agrees with the planar-tree fast path on
        // small cells of the free polyadic operad
        let fp = presets::free_polyadic(4);
        let t = planar_tree_dims(5);
        for (n, d) in [(2usize, 1usize), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3)] {
            let dim = fp.quotient_dim(d, 1, n);
            let expect = t[n][d] * (1..=n).product::<usize>();
            assert_eq!(dim, expect, "cell ({},{})", n, d);
        }
    }
}
