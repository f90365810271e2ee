//! Symmetric-group arithmetic, block permutations and connected
//! permutations.
//!
//! Permutations are stored 0-indexed internally; one-line notation in the
//! paper's 1-indexed convention `(σ(1), …, σ(n))` is used for all
//! serialization and display.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A permutation of {1..n} in one-line image form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    images: Vec<usize>, // images[i] = σ(i+1) - 1
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    /// From 1-indexed one-line notation; checks bijectivity.
    pub fn from_one_line(images: &[usize]) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in images {
            if v < 1 || v > n || seen[v - 1] {
                return None;
            }
            seen[v - 1] = true;
        }
        Some(Permutation { images: images.iter().map(|v| v - 1).collect() })
    }

    pub fn from_images0(images: Vec<usize>) -> Self {
        let p = Permutation { images };
        debug_assert!(p.is_valid());
        p
    }

    fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.images.len()];
        for &v in &self.images {
            if v >= self.images.len() || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        true
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// σ(s) for 0-indexed s.
    pub fn apply0(&self, s: usize) -> usize {
        self.images[s]
    }

    /// 1-indexed one-line form `(σ(1), …, σ(n))`.
    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|v| v + 1).collect()
    }

    /// (p ∘ q)(s) = p(q(s)). Degrees must agree.
    pub fn compose(&self, q: &Permutation) -> Permutation {
        assert_eq!(self.degree(), q.degree(), "degree mismatch in permutation composition");
        Permutation { images: q.images.iter().map(|&s| self.images[s]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { images: inv }
    }

    /// +1 for even, -1 for odd.
    pub fn sign(&self) -> i64 {
        let mut seen = vec![false; self.images.len()];
        let mut sign = 1i64;
        for i in 0..self.images.len() {
            if seen[i] {
                continue;
            }
            let mut j = i;
            let mut len = 0;
            while !seen[j] {
                seen[j] = true;
                j = self.images[j];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        sign
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// All permutations of S_n in lexicographic one-line order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur = (0..n).collect::<Vec<_>>();
        loop {
            out.push(Permutation { images: cur.clone() });
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        if n == 0 {
            // the empty permutation
            return vec![Permutation { images: vec![] }];
        }
        out
    }

    /// Textual form used by the CLI: "(1 3 2 4)".
    pub fn text(&self) -> String {
        let parts: Vec<String> = self.one_line().iter().map(|v| v.to_string()).collect();
        format!("({})", parts.join(" "))
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text())
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.one_line().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Permutation::from_one_line(&v)
            .ok_or_else(|| serde::de::Error::custom("not a bijection in one-line notation"))
    }
}

/// A tuple of positive block sizes (ī, j̄, k̄, l̄ in the conventions).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockProfile {
    parts: Vec<usize>,
}

impl BlockProfile {
    pub fn new(parts: Vec<usize>) -> Self {
        assert!(parts.iter().all(|&p| p >= 1), "block profile parts must be >= 1");
        BlockProfile { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Index of the block containing 0-indexed position s.
    pub fn block_of(&self, s: usize) -> usize {
        let mut acc = 0;
        for (b, &p) in self.parts.iter().enumerate() {
            acc += p;
            if s < acc {
                return b;
            }
        }
        panic!("position {} outside profile of total {}", s, self.total());
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.parts.len());
        let mut acc = 0;
        for &p in &self.parts {
            off.push(acc);
            acc += p;
        }
        off
    }
}

/// The block permutation τ_ī of S_{|ī|} induced by τ ∈ S_b on contiguous
/// blocks of sizes ī: the one-line form is the concatenation, for
/// s = 1..b, of the integer interval of block τ⁻¹(s).
pub fn block_permutation(tau: &Permutation, profile: &BlockProfile) -> Permutation {
    assert_eq!(tau.degree(), profile.len(), "length mismatch: τ degree vs block count");
    let off = profile.offsets();
    let inv = tau.inverse();
    let mut images = Vec::with_capacity(profile.total());
    for s in 0..profile.len() {
        let b = inv.apply0(s);
        for t in 0..profile.parts[b] {
            images.push(off[b] + t);
        }
    }
    Permutation { images }
}

/// Is σ (k̄, j̄)-connected? Builds the bipartite multigraph with one edge
/// {input block of s, output block of σ(s)} per point s and checks
/// connectivity.
pub fn is_connected(sigma: &Permutation, kbar: &BlockProfile, jbar: &BlockProfile) -> bool {
    let n = sigma.degree();
    assert_eq!(kbar.total(), n, "output profile total must equal the degree");
    assert_eq!(jbar.total(), n, "input profile total must equal the degree");
    let a = jbar.len();
    let b = kbar.len();
    if a + b == 0 {
        return true;
    }
    let mut uf = UnionFind::new(a + b);
    for s in 0..n {
        let jb = jbar.block_of(s);
        let kb = kbar.block_of(sigma.apply0(s));
        uf.union(jb, a + kb);
    }
    let root = uf.find(0);
    (0..a + b).all(|x| uf.find(x) == root)
}

/// Maximum degree accepted by `enumerate_connected`; the exhaustive filter
/// over S_N is only meant for desk scale.
pub const MAX_ENUM_DEGREE: usize = 8;

/// All (k̄, j̄)-connected permutations in lexicographic one-line order.
pub fn enumerate_connected(
    kbar: &BlockProfile,
    jbar: &BlockProfile,
) -> Result<Vec<Permutation>, String> {
    if kbar.total() != jbar.total() {
        return Err(format!(
            "profile totals differ: |kbar| = {} vs |jbar| = {}",
            kbar.total(),
            jbar.total()
        ));
    }
    let n = kbar.total();
    if n > MAX_ENUM_DEGREE {
        return Err(format!("degree {} exceeds the enumeration cap {}", n, MAX_ENUM_DEGREE));
    }
    Ok(Permutation::all(n).into_iter().filter(|s| is_connected(s, kbar, jbar)).collect())
}

/// Number of (k̄, j̄)-connected permutations, by exhaustive filter.
pub fn count_connected(kbar: &BlockProfile, jbar: &BlockProfile) -> Result<usize, String> {
    Ok(enumerate_connected(kbar, jbar)?.len())
}

/// |S^c_{k̄,j̄}| without enumerating S_N: peel off the connected component
/// of the first output block,
/// N! = Σ_{S∋1, T, |k_S|=|j_T|=s} c(k̄_S, j̄_T) · (N−s)!.
pub fn count_connected_big(kbar: &[usize], jbar: &[usize]) -> num::BigInt {
    fn big_factorial(n: usize) -> num::BigInt {
        let mut acc = num::BigInt::from(1u32);
        for k in 2..=n {
            acc *= num::BigInt::from(k);
        }
        acc
    }
    fn rec(
        kbar: &[usize],
        jbar: &[usize],
        memo: &mut std::collections::HashMap<(Vec<usize>, Vec<usize>), num::BigInt>,
    ) -> num::BigInt {
        let n: usize = kbar.iter().sum();
        assert_eq!(n, jbar.iter().sum::<usize>());
        if kbar.is_empty() {
            return num::BigInt::from(1u32);
        }
        let mut ks = kbar.to_vec();
        ks.sort_unstable();
        let mut js = jbar.to_vec();
        js.sort_unstable();
        let key = (ks, js);
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let (b, a) = (kbar.len(), jbar.len());
        let mut total = big_factorial(n);
        // subtract all configurations where block 1's component is proper
        for smask in 0u64..(1 << (b - 1)) {
            let smask = (smask << 1) | 1; // always contains output block 0
            for tmask in 0u64..(1 << a) {
                if smask == ((1u64 << b) - 1) && tmask == ((1u64 << a) - 1) {
                    continue; // the full split is the connected case itself
                }
                let ssum: usize =
                    (0..b).filter(|i| smask >> i & 1 == 1).map(|i| kbar[i]).sum();
                let tsum: usize =
                    (0..a).filter(|i| tmask >> i & 1 == 1).map(|i| jbar[i]).sum();
                if ssum != tsum || tsum == 0 {
                    continue;
                }
                let ksub: Vec<usize> =
                    (0..b).filter(|i| smask >> i & 1 == 1).map(|i| kbar[i]).collect();
                let jsub: Vec<usize> =
                    (0..a).filter(|i| tmask >> i & 1 == 1).map(|i| jbar[i]).collect();
                let c = rec(&ksub, &jsub, memo);
                total -= c * big_factorial(n - ssum);
            }
        }
        memo.insert(key, total.clone());
        total
    }
    let mut memo = std::collections::HashMap::new();
    rec(kbar, jbar, &mut memo)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Koszul sign of sorting elements with the given degrees by `order`,
/// where `order[i]` is the destination position of element i: the sign
/// accumulated when moving odd-degree elements past each other.
pub fn koszul_sign(degrees: &[i64], dest: &[usize]) -> i64 {
    // Equivalent to the sign of the permutation restricted to odd elements.
    let mut sign = 1i64;
    let k = degrees.len();
    for i in 0..k {
        for j in i + 1..k {
            if dest[i] > dest[j] && degrees[i] % 2 != 0 && degrees[j] % 2 != 0 {
                sign = -sign;
            }
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_identity_and_involution() {
        let id3 = Permutation::identity(3);
        let s = Permutation::from_one_line(&[2, 3, 1]).unwrap();
        assert_eq!(id3.compose(&s), s);
        let t = Permutation::from_one_line(&[2, 1]).unwrap();
        assert!(t.compose(&t).is_identity());
    }

    #[test]
    fn compose_direct_evaluation() {
        // (p∘q)(s) = p(q(s)) evaluated by hand for p = q = (1 3 2 4)
        let p = Permutation::from_one_line(&[1, 3, 2, 4]).unwrap();
        let mut expect = Vec::new();
        for s in 0..4 {
            expect.push(p.apply0(p.apply0(s)) + 1);
        }
        assert_eq!(p.compose(&p).one_line(), expect);
        assert!(p.compose(&p).is_identity());
    }

    #[test]
    fn block_permutation_examples() {
        let id2 = Permutation::identity(2);
        assert!(block_permutation(&id2, &BlockProfile::new(vec![2, 3])).is_identity());
        // hand evaluation of the displayed formula
        let t = Permutation::from_one_line(&[2, 1]).unwrap();
        assert_eq!(
            block_permutation(&t, &BlockProfile::new(vec![1, 2])).one_line(),
            vec![2, 3, 1]
        );
        assert_eq!(
            block_permutation(&t, &BlockProfile::new(vec![2, 2])).one_line(),
            vec![3, 4, 1, 2]
        );
    }

    #[test]
    fn connectivity_paper_examples() {
        let s = Permutation::from_one_line(&[1, 3, 2, 4]).unwrap();
        let p22 = BlockProfile::new(vec![2, 2]);
        assert!(is_connected(&s, &p22, &p22));
        let k = BlockProfile::new(vec![1, 1, 2]);
        let j = BlockProfile::new(vec![2, 1, 1]);
        assert!(!is_connected(&s, &k, &j));
        // single output block: every permutation is connected
        for sigma in Permutation::all(4) {
            assert!(is_connected(
                &sigma,
                &BlockProfile::new(vec![4]),
                &BlockProfile::new(vec![1, 2, 1])
            ));
        }
    }

    #[test]
    fn enumerate_connected_examples() {
        let all3 = enumerate_connected(
            &BlockProfile::new(vec![3]),
            &BlockProfile::new(vec![1, 1, 1]),
        )
        .unwrap();
        assert_eq!(all3.len(), 6);
        let none = enumerate_connected(
            &BlockProfile::new(vec![1, 1]),
            &BlockProfile::new(vec![1, 1]),
        )
        .unwrap();
        assert!(none.is_empty());
        let p22 = BlockProfile::new(vec![2, 2]);
        let conn = enumerate_connected(&p22, &p22).unwrap();
        // brute-force recount over all 24 elements of S_4
        let brute = Permutation::all(4)
            .into_iter()
            .filter(|s| is_connected(s, &p22, &p22))
            .count();
        assert_eq!(conn.len(), brute);
        assert!(conn.contains(&Permutation::from_one_line(&[1, 3, 2, 4]).unwrap()));
    }

    #[test]
    fn full_output_block_gives_factorial() {
        // |S^c_{(N), j̄}| = N! for all j̄, N <= 5
        for n in 1..=5usize {
            for jbar in compositions(n) {
                let c = count_connected(
                    &BlockProfile::new(vec![n]),
                    &BlockProfile::new(jbar),
                )
                .unwrap();
                assert_eq!(c, (1..=n).product::<usize>());
            }
        }
    }

    #[test]
    fn stability_under_block_action() {
        // if σ is (k̄, j̄)-connected then τ_k̄ ∘ σ ∘ ν_j̄ is (k̄', j̄')-connected
        let kbar = BlockProfile::new(vec![2, 1]);
        let jbar = BlockProfile::new(vec![1, 2]);
        for sigma in Permutation::all(3) {
            if !is_connected(&sigma, &kbar, &jbar) {
                continue;
            }
            for tau in Permutation::all(2) {
                for nu in Permutation::all(2) {
                    let tinv = tau.inverse();
                    let ninv = nu.inverse();
                    let kprime = BlockProfile::new(
                        (0..2).map(|i| kbar.parts()[tinv.apply0(i)]).collect(),
                    );
                    let jprime = BlockProfile::new(
                        (0..2).map(|i| jbar.parts()[ninv.apply0(i)]).collect(),
                    );
                    // relabel output blocks by τ (block b lands in the b'-th
                    // interval of k̄' with b' = τ(b)) and input blocks by ν
                    let tk = block_permutation(&tinv, &kprime);
                    let nj = block_permutation(&nu, &jbar);
                    let moved = tk.compose(&sigma).compose(&nj);
                    assert!(is_connected(&moved, &kprime, &jprime));
                }
            }
        }
    }

    #[test]
    fn inclusion_exclusion_count_matches_enumeration() {
        use num::ToPrimitive;
        for n in 1..=5usize {
            for kbar in compositions(n) {
                for jbar in compositions(n) {
                    let brute = count_connected(
                        &BlockProfile::new(kbar.clone()),
                        &BlockProfile::new(jbar.clone()),
                    )
                    .unwrap();
                    let fast = count_connected_big(&kbar, &jbar).to_usize().unwrap();
                    assert_eq!(brute, fast, "kbar={:?} jbar={:?}", kbar, jbar);
                }
            }
        }
    }

    #[test]
    fn sign_is_multiplicative() {
        for p in Permutation::all(4) {
            for q in Permutation::all(4) {
                assert_eq!(p.compose(&q).sign(), p.sign() * q.sign());
            }
        }
    }

    /// All compositions (ordered tuples of positive parts) of n.
    pub fn compositions(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in 1..=n {
            for rest in compositions(n - first) {
                let mut v = vec![first];
                v.extend(rest);
                out.push(v);
            }
        }
        out
    }
}
