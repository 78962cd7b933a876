//! Concrete induced posets: balls, spheres and other sublayer families as
//! explicit set systems, plus arbitrary user-supplied orders.

use std::collections::{BTreeMap, HashMap, VecDeque};

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Deserialize;

use crate::combinatorics::{build_table, Family, GroundParams, SublayerCoord};
use crate::error::{Error, Result};

pub mod quotient;

pub use quotient::{quotient_dag, QuotientDag};

pub const DEFAULT_ELEMENT_BUDGET: u64 = 200_000;

/// Widest side supported by the bit-set representation.
pub const MAX_SIDE: u32 = 128;

/// A set `([p] \ removal) ∪ (p + addition)`, stored as two bit sets over
/// `{1..p}` and `{1..q}` (bit `k - 1` stands for index `k`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PosetElement {
    pub removal: u128,
    pub addition: u128,
}

impl PosetElement {
    pub fn new(removal: u128, addition: u128) -> Self {
        PosetElement { removal, addition }
    }

    pub fn coord(&self) -> SublayerCoord {
        SublayerCoord::new(self.removal.count_ones(), self.addition.count_ones())
    }

    /// Members of the represented subset of `[p + q]`, ascending, 1-based.
    pub fn to_subset(&self, p: u32) -> Vec<u32> {
        let mut out: Vec<u32> = (1..=p)
            .filter(|k| self.removal & (1u128 << (k - 1)) == 0)
            .collect();
        out.extend(bits(self.addition).map(|k| p + k));
        out
    }

    pub fn leq(&self, other: &PosetElement) -> bool {
        leq(self, other)
    }
}

/// `x ≤ y` iff `y` removes a subset of what `x` removes and adds a superset
/// of what `x` adds.
pub fn leq(x: &PosetElement, y: &PosetElement) -> bool {
    y.removal & !x.removal == 0 && x.addition & !y.addition == 0
}

/// 1-based indices of the set bits.
fn bits(mut mask: u128) -> impl Iterator<Item = u32> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let k = mask.trailing_zeros();
            mask &= mask - 1;
            Some(k + 1)
        }
    })
}

/// All `k`-subsets of `{1..n}` as masks, in increasing numeric order.
fn subsets(n: u32, k: u32) -> Vec<u128> {
    let mut out = Vec::new();
    let mut stack: Vec<(u32, u32, u128)> = vec![(0, k, 0)];
    while let Some((start, left, mask)) = stack.pop() {
        if left == 0 {
            out.push(mask);
            continue;
        }
        for b in (start..=n - left).rev() {
            stack.push((b + 1, left - 1, mask | (1u128 << b)));
        }
    }
    out.sort_unstable();
    out
}

#[derive(Clone, Debug)]
enum Order {
    /// Order read off the bit sets.
    Sets,
    /// Strict up-sets of an explicit order.
    Explicit(Vec<FixedBitSet>),
}

/// A finite poset with covers and longest-path heights.
///
/// Built families list their elements canonically by
/// `(height, i, j, removal, addition)`; custom posets keep the ids of the
/// input document.
#[derive(Clone, Debug)]
pub struct PosetInstance {
    elements: Vec<PosetElement>,
    order: Order,
    covers: Vec<Vec<usize>>,
    heights: Vec<u32>,
    sublayers: Option<Vec<SublayerCoord>>,
    meta: Option<(GroundParams, Family)>,
    index: HashMap<PosetElement, usize>,
    len: usize,
}

impl PosetInstance {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Strict order `a < b`.
    pub fn less(&self, a: usize, b: usize) -> bool {
        match &self.order {
            Order::Sets => a != b && leq(&self.elements[a], &self.elements[b]),
            Order::Explicit(up) => up[a].contains(b),
        }
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        a == b || self.less(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.less(b, a)
    }

    pub fn upper_covers(&self, a: usize) -> &[usize] {
        &self.covers[a]
    }

    pub fn height(&self, a: usize) -> u32 {
        self.heights[a]
    }

    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    pub fn sublayer(&self, a: usize) -> Option<SublayerCoord> {
        self.sublayers.as_ref().map(|s| s[a])
    }

    /// Set representation of element `a`; `None` for custom posets.
    pub fn element(&self, a: usize) -> Option<&PosetElement> {
        self.elements.get(a)
    }

    pub fn elements(&self) -> &[PosetElement] {
        &self.elements
    }

    pub fn params(&self) -> Option<&GroundParams> {
        self.meta.as_ref().map(|(p, _)| p)
    }

    pub fn family(&self) -> Option<&Family> {
        self.meta.as_ref().map(|(_, f)| f)
    }

    pub fn has_sublayers(&self) -> bool {
        self.sublayers.is_some()
    }

    pub fn index_of(&self, x: &PosetElement) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// Element ids grouped by height.
    pub fn layers(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (a, &h) in self.heights.iter().enumerate() {
            out.entry(h).or_default().push(a);
        }
        out
    }

    /// Strict up-set of every element, as ascending id lists.
    pub fn strict_upsets(&self) -> Vec<Vec<u32>> {
        match &self.order {
            Order::Explicit(up) => up.iter().map(|s| s.ones().map(|b| b as u32).collect()).collect(),
            Order::Sets => {
                let n = self.len;
                // canonical order is sorted by height, so everything above `a`
                // sits after the first element of greater height
                let mut first_above = vec![n; n];
                let mut k = n;
                for a in (0..n).rev() {
                    while k > 0 && self.heights[k - 1] > self.heights[a] {
                        k -= 1;
                    }
                    first_above[a] = k;
                }
                (0..n)
                    .map(|a| {
                        let x = &self.elements[a];
                        (first_above[a]..n)
                            .filter(|&b| leq(x, &self.elements[b]))
                            .map(|b| b as u32)
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

/// Budget check shared by the builders.
fn check_budget(required: &BigUint, budget: u64) -> Result<usize> {
    match required.to_u64() {
        Some(n) if n <= budget => Ok(n as usize),
        _ => Err(Error::BudgetExceeded {
            what: "element",
            required: required.to_string(),
            budget,
        }),
    }
}

pub fn build_ball(params: &GroundParams) -> Result<PosetInstance> {
    build_family(params, Family::Ball, DEFAULT_ELEMENT_BUDGET)
}

pub fn build_sphere(params: &GroundParams, m: u32) -> Result<PosetInstance> {
    build_family(params, Family::Sphere(m), DEFAULT_ELEMENT_BUDGET)
}

/// Materialize every set of a sublayer family with its induced order.
pub fn build_family(params: &GroundParams, family: Family, budget: u64) -> Result<PosetInstance> {
    if params.p > MAX_SIDE || params.q > MAX_SIDE {
        return Err(Error::Domain(format!(
            "p and q must not exceed {MAX_SIDE} for explicit construction"
        )));
    }
    let table = build_table(params, family.clone());
    let count = check_budget(&table.total(), budget)?;

    let mut elements = Vec::with_capacity(count);
    for c in table.sizes.keys() {
        let adds = subsets(params.q, c.j);
        for rem in subsets(params.p, c.i) {
            elements.extend(adds.iter().map(|&add| PosetElement::new(rem, add)));
        }
    }
    // j - i strictly increases along the order, giving a linear extension
    elements.sort_by_key(|e| {
        let c = e.coord();
        (c.j as i64 - c.i as i64, *e)
    });
    let index: HashMap<PosetElement, usize> =
        elements.iter().enumerate().map(|(k, e)| (*e, k)).collect();

    let covers: Vec<Vec<usize>> = match &family {
        Family::Ball => elements
            .iter()
            .map(|e| ball_covers(e, params, &index))
            .collect(),
        Family::Sphere(_) => elements
            .iter()
            .map(|e| sphere_covers(e, params, &index))
            .collect(),
        Family::Custom(_) => brute_force_covers(&elements),
    };

    let mut heights = vec![0u32; elements.len()];
    for a in 0..elements.len() {
        for &b in &covers[a] {
            heights[b] = heights[b].max(heights[a] + 1);
        }
    }

    // canonical renumbering
    let mut perm: Vec<usize> = (0..elements.len()).collect();
    perm.sort_by_key(|&a| {
        let c = elements[a].coord();
        (heights[a], c.i, c.j, elements[a].removal, elements[a].addition)
    });
    let mut new_id = vec![0usize; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        new_id[old] = new;
    }
    let elements: Vec<PosetElement> = perm.iter().map(|&a| elements[a]).collect();
    let heights: Vec<u32> = perm.iter().map(|&a| heights[a]).collect();
    let covers: Vec<Vec<usize>> = perm
        .iter()
        .map(|&a| {
            let mut v: Vec<usize> = covers[a].iter().map(|&b| new_id[b]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let sublayers = elements.iter().map(|e| e.coord()).collect();
    let index = elements.iter().enumerate().map(|(k, e)| (*e, k)).collect();

    Ok(PosetInstance {
        len: elements.len(),
        elements,
        order: Order::Sets,
        covers,
        heights,
        sublayers: Some(sublayers),
        meta: Some((*params, family)),
        index,
    })
}

fn ball_covers(
    e: &PosetElement,
    params: &GroundParams,
    index: &HashMap<PosetElement, usize>,
) -> Vec<usize> {
    let c = e.coord();
    let mut out: Vec<usize> = bits(e.removal)
        .map(|k| index[&PosetElement::new(e.removal & !(1u128 << (k - 1)), e.addition)])
        .collect();
    if c.i + c.j < params.r {
        let free = full_mask(params.q) & !e.addition;
        out.extend(
            bits(free).map(|k| index[&PosetElement::new(e.removal, e.addition | (1u128 << (k - 1)))]),
        );
    }
    out
}

fn sphere_covers(
    e: &PosetElement,
    params: &GroundParams,
    index: &HashMap<PosetElement, usize>,
) -> Vec<usize> {
    let free = full_mask(params.q) & !e.addition;
    let mut out = Vec::new();
    for k in bits(e.removal) {
        for l in bits(free) {
            let y = PosetElement::new(e.removal & !(1u128 << (k - 1)), e.addition | (1u128 << (l - 1)));
            out.push(index[&y]);
        }
    }
    out
}

fn full_mask(n: u32) -> u128 {
    if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// Covers of an induced family by exhaustive comparison. Elements must be
/// listed in a linear extension.
fn brute_force_covers(elements: &[PosetElement]) -> Vec<Vec<usize>> {
    let n = elements.len();
    (0..n)
        .map(|a| {
            let above: Vec<usize> = (a + 1..n)
                .filter(|&b| leq(&elements[a], &elements[b]))
                .collect();
            above
                .iter()
                .copied()
                .filter(|&b| !above.iter().any(|&z| z != b && leq(&elements[z], &elements[b])))
                .collect()
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomDoc {
    elements: usize,
    relations: Vec<(usize, usize)>,
}

/// Parse `{"elements": n, "relations": [[u, v], ...]}` (0-based ids, `u < v`).
///
/// The order is the transitive closure of the relations; a cycle is a
/// [`Error::MalformedOrder`].
pub fn load_custom_poset(document: &str) -> Result<PosetInstance> {
    let doc: CustomDoc =
        serde_json::from_str(document).map_err(|e| Error::Format(format!("custom poset: {e}")))?;
    let n = doc.elements;
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &(u, v)) in doc.relations.iter().enumerate() {
        for id in [u, v] {
            if id >= n {
                return Err(Error::Format(format!(
                    "relation #{k} [{u}, {v}]: id {id} out of range for {n} elements"
                )));
            }
        }
        if u == v {
            return Err(Error::MalformedOrder(format!(
                "relation #{k} [{u}, {v}] relates an element to itself"
            )));
        }
        succ[u].push(v);
    }

    // Kahn's algorithm; leftovers sit on a cycle
    let mut indeg = vec![0usize; n];
    for vs in &succ {
        for &v in vs {
            indeg[v] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&a| indeg[a] == 0).collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(a) = queue.pop_front() {
        topo.push(a);
        for &v in &succ[a] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    if topo.len() < n {
        let stuck: Vec<usize> = (0..n).filter(|&a| indeg[a] > 0).collect();
        return Err(Error::MalformedOrder(format!(
            "relations contain a cycle through elements {stuck:?}"
        )));
    }

    let mut up = vec![FixedBitSet::with_capacity(n); n];
    for &a in topo.iter().rev() {
        let mut set = FixedBitSet::with_capacity(n);
        for &v in &succ[a] {
            set.insert(v);
            set.union_with(&up[v]);
        }
        up[a] = set;
    }

    let covers: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            let mut reach2 = FixedBitSet::with_capacity(n);
            for w in up[a].ones() {
                reach2.union_with(&up[w]);
            }
            up[a].difference(&reach2).collect()
        })
        .collect();

    let mut heights = vec![0u32; n];
    for &a in &topo {
        for &b in &covers[a] {
            heights[b] = heights[b].max(heights[a] + 1);
        }
    }

    Ok(PosetInstance {
        elements: Vec::new(),
        order: Order::Explicit(up),
        covers,
        heights,
        sublayers: None,
        meta: None,
        index: HashMap::new(),
        len: n,
    })
}
