//! Exact widths and maximum antichains.
//!
//! Two independent routes: Dilworth via maximum bipartite matching on the
//! comparability relation, and a minimum flow with node lower bounds on the
//! cover graph, which also handles weights.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::poset::PosetInstance;

pub mod matching;

use matching::hopcroft_karp;

pub const DEFAULT_MATCHING_BUDGET: usize = 20_000;
pub const DEFAULT_FLOW_BUDGET: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineOptions {
    /// Largest element count for matching-based computations.
    pub matching_budget: usize,
    /// Largest element count for flow-based computations.
    pub flow_budget: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            matching_budget: DEFAULT_MATCHING_BUDGET,
            flow_budget: DEFAULT_FLOW_BUDGET,
        }
    }
}

impl EngineOptions {
    fn check(&self, what: &'static str, n: usize, budget: usize) -> Result<()> {
        if n > budget {
            return Err(Error::BudgetExceeded {
                what,
                required: n.to_string(),
                budget: budget as u64,
            });
        }
        Ok(())
    }
}

/// A set of pairwise incomparable element ids, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AntichainWitness {
    pub elements: Vec<usize>,
    pub size: usize,
}

impl AntichainWitness {
    pub fn new(mut elements: Vec<usize>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        let size = elements.len();
        AntichainWitness { elements, size }
    }

    pub fn verify(&self, instance: &PosetInstance) -> Result<()> {
        if self.size != self.elements.len() {
            return Err(Error::Consistency("witness size mismatch".into()));
        }
        for (k, &a) in self.elements.iter().enumerate() {
            if a >= instance.len() {
                return Err(Error::Consistency(format!("witness id {a} out of range")));
            }
            if let Some(&b) = self.elements[k + 1..].iter().find(|&&b| instance.comparable(a, b)) {
                return Err(Error::Consistency(format!(
                    "witness elements {a} and {b} are comparable"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainPartition {
    pub chains: Vec<Vec<usize>>,
}

impl ChainPartition {
    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// Chains are disjoint, cover `0..n` and are strictly increasing under `less`.
    pub fn verify(&self, n: usize, less: impl Fn(usize, usize) -> bool) -> Result<()> {
        let mut seen = vec![false; n];
        for chain in &self.chains {
            for &a in chain {
                if a >= n || std::mem::replace(&mut seen[a], true) {
                    return Err(Error::Consistency(format!("element {a} repeated or out of range")));
                }
            }
            if let Some(w) = chain.windows(2).find(|w| !less(w[0], w[1])) {
                return Err(Error::Consistency(format!(
                    "chain step {} -> {} is not increasing",
                    w[0], w[1]
                )));
            }
        }
        if let Some(a) = seen.iter().position(|s| !s) {
            return Err(Error::Consistency(format!("element {a} not covered")));
        }
        Ok(())
    }
}

/// Nonnegative per-element weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector(pub Vec<BigUint>);

impl WeightVector {
    pub fn unit(n: usize) -> Self {
        WeightVector(vec![BigUint::one(); n])
    }
}

/// Comparability restricted to `subset` (ids in ascending order), as local
/// adjacency lists `a -> b` for `a < b`.
fn local_comparability(upsets: &[Vec<u32>], subset: &[usize], n: usize) -> Vec<Vec<u32>> {
    let mut local = vec![u32::MAX; n];
    for (k, &a) in subset.iter().enumerate() {
        local[a] = k as u32;
    }
    subset
        .iter()
        .map(|&a| {
            upsets[a]
                .iter()
                .filter_map(|&b| (local[b as usize] != u32::MAX).then(|| local[b as usize]))
                .collect()
        })
        .collect()
}

struct DilworthSolution {
    matching: matching::Matching,
    antichain: Vec<usize>,
}

/// Maximum matching plus the König antichain, on local ids.
fn dilworth(adj: &[Vec<u32>]) -> DilworthSolution {
    let n = adj.len();
    let m = hopcroft_karp(adj, n);
    // alternating search from unmatched left vertices
    let mut z_left = vec![false; n];
    let mut z_right = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&u| m.left_partner(u).is_none()).collect();
    for &u in &queue {
        z_left[u] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            let v = v as usize;
            if !z_right[v] {
                z_right[v] = true;
                if let Some(w) = m.right_partner(v) {
                    if !z_left[w] {
                        z_left[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    // complement of the cover (L \ Z) ∪ (R ∩ Z)
    let antichain = (0..n).filter(|&x| z_left[x] && !z_right[x]).collect();
    DilworthSolution {
        matching: m,
        antichain,
    }
}

pub fn width(instance: &PosetInstance) -> Result<(usize, AntichainWitness)> {
    width_with(instance, &EngineOptions::default())
}

/// Width as `n - |maximum matching|`, with a verified maximum antichain.
pub fn width_with(instance: &PosetInstance, opts: &EngineOptions) -> Result<(usize, AntichainWitness)> {
    opts.check("matching", instance.len(), opts.matching_budget)?;
    let n = instance.len();
    let upsets = instance.strict_upsets();
    let all: Vec<usize> = (0..n).collect();
    let sol = dilworth(&local_comparability(&upsets, &all, n));
    let w = n - sol.matching.size;
    let witness = AntichainWitness::new(sol.antichain);
    witness.verify(instance)?;
    if witness.size != w {
        return Err(Error::Consistency(format!(
            "König antichain has {} elements, matching bound is {w}",
            witness.size
        )));
    }
    Ok((w, witness))
}

pub fn min_chain_partition(instance: &PosetInstance) -> Result<ChainPartition> {
    min_chain_partition_with(instance, &EngineOptions::default())
}

/// Minimum chain cover read off the maximum matching: `a` is followed by its
/// right partner.
pub fn min_chain_partition_with(instance: &PosetInstance, opts: &EngineOptions) -> Result<ChainPartition> {
    opts.check("matching", instance.len(), opts.matching_budget)?;
    let n = instance.len();
    let upsets = instance.strict_upsets();
    let all: Vec<usize> = (0..n).collect();
    let sol = dilworth(&local_comparability(&upsets, &all, n));
    let m = &sol.matching;
    let chains: Vec<Vec<usize>> = (0..n)
        .filter(|&b| m.right_partner(b).is_none())
        .map(|start| {
            let mut chain = vec![start];
            let mut cur = start;
            while let Some(next) = m.left_partner(cur) {
                chain.push(next);
                cur = next;
            }
            chain
        })
        .collect();
    let partition = ChainPartition { chains };
    partition.verify(n, |a, b| instance.less(a, b))?;
    if partition.len() != n - m.size {
        return Err(Error::Consistency("chain count differs from n - |matching|".into()));
    }
    Ok(partition)
}

pub fn max_weight_antichain(
    instance: &PosetInstance,
    weights: &WeightVector,
) -> Result<(BigUint, AntichainWitness)> {
    max_weight_antichain_with(instance, weights, &EngineOptions::default())
}

/// Maximum total weight of an antichain, as the minimum flow through the
/// cover graph that carries at least `weight(x)` through every element.
pub fn max_weight_antichain_with(
    instance: &PosetInstance,
    weights: &WeightVector,
    opts: &EngineOptions,
) -> Result<(BigUint, AntichainWitness)> {
    let n = instance.len();
    opts.check("flow", n, opts.flow_budget)?;
    if weights.0.len() != n {
        return Err(Error::Precondition(format!(
            "{} weights for {n} elements",
            weights.0.len()
        )));
    }
    let (s, t) = (2 * n, 2 * n + 1);
    let mut net = FlowNetwork::new(2 * n + 2);
    let mut has_lower = vec![false; n];
    for a in 0..n {
        net.add_arc(2 * a, 2 * a + 1, weights.0[a].clone(), None);
        for &b in instance.upper_covers(a) {
            net.add_arc(2 * a + 1, 2 * b, BigUint::zero(), None);
            has_lower[b] = true;
        }
        if instance.upper_covers(a).is_empty() {
            net.add_arc(2 * a + 1, t, BigUint::zero(), None);
        }
    }
    for a in (0..n).filter(|&a| !has_lower[a]) {
        net.add_arc(s, 2 * a, BigUint::zero(), None);
    }
    let min = net
        .min_flow(s, t)?
        .map_err(|_| Error::Consistency("node lower bounds on a DAG are always feasible".into()))?;
    let witness = AntichainWitness::new(
        (0..n)
            .filter(|&a| !min.sink_side[2 * a] && min.sink_side[2 * a + 1])
            .collect(),
    );
    witness.verify(instance)?;
    let total: BigUint = witness.elements.iter().map(|&a| &weights.0[a]).sum();
    if total != min.flow.value {
        return Err(Error::Consistency(format!(
            "cut antichain weighs {total}, minimum flow is {}",
            min.flow.value
        )));
    }
    Ok((min.flow.value, witness))
}

/// Result of testing the LYM inequality on every antichain at once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KlymReport {
    pub holds: bool,
    /// Largest `Σ 1/|L_h(x)|` over antichains, in lowest terms.
    pub max_lym_sum: BigRational,
    pub witness: AntichainWitness,
    /// The common multiple `M` that makes the LYM weights integral.
    pub scale: BigUint,
}

/// Integral LYM weights `M / |L_h(x)|` with `M` the lcm of the layer sizes.
pub fn klym_weights(instance: &PosetInstance) -> (BigUint, WeightVector) {
    let sizes: BTreeMap<u32, BigUint> = instance
        .layers()
        .into_iter()
        .map(|(h, ids)| (h, BigUint::from(ids.len())))
        .collect();
    let scale = sizes.values().fold(BigUint::one(), |acc, s| acc.lcm(s));
    let weights = instance
        .heights()
        .iter()
        .map(|h| &scale / &sizes[h])
        .collect();
    (scale, WeightVector(weights))
}

pub fn check_klym(instance: &PosetInstance) -> Result<KlymReport> {
    check_klym_with(instance, &EngineOptions::default())
}

pub fn check_klym_with(instance: &PosetInstance, opts: &EngineOptions) -> Result<KlymReport> {
    let (scale, weights) = klym_weights(instance);
    let (value, witness) = max_weight_antichain_with(instance, &weights, opts)?;
    let holds = value <= scale;
    let max_lym_sum = BigRational::new(BigInt::from(value), BigInt::from(scale.clone()));
    Ok(KlymReport {
        holds,
        max_lym_sum,
        witness,
        scale,
    })
}

pub fn is_unique_max_antichain(instance: &PosetInstance, candidate: &AntichainWitness) -> Result<bool> {
    is_unique_max_antichain_with(instance, candidate, &EngineOptions::default())
}

/// Whether `candidate` is the only maximum antichain.
///
/// Another maximum antichain would contain some `x` outside the candidate,
/// so it suffices that `1 + width(elements incomparable to x) < width` for
/// every such `x`. When the candidate is a union of whole sublayers, one
/// representative per sublayer is enough: relabelings inside `[p]` and the
/// far side are automorphisms fixing the candidate and acting transitively
/// on each sublayer.
pub fn is_unique_max_antichain_with(
    instance: &PosetInstance,
    candidate: &AntichainWitness,
    opts: &EngineOptions,
) -> Result<bool> {
    candidate.verify(instance)?;
    let (w, _) = width_with(instance, opts)?;
    if candidate.size != w {
        return Err(Error::Precondition(format!(
            "candidate has {} elements but the width is {w}",
            candidate.size
        )));
    }
    let n = instance.len();
    let mut inside = vec![false; n];
    for &a in &candidate.elements {
        inside[a] = true;
    }
    let probes = probe_elements(instance, &inside, true);
    let upsets = instance.strict_upsets();
    let any_rival = probes.par_iter().any(|&x| {
        let rest: Vec<usize> = (0..n).filter(|&y| !instance.comparable(x, y)).collect();
        let sub = dilworth(&local_comparability(&upsets, &rest, n));
        1 + rest.len() - sub.matching.size >= w
    });
    Ok(!any_rival)
}

/// Elements outside the candidate to test; one per sublayer when symmetry
/// allows and `use_orbits` is set.
fn probe_elements(instance: &PosetInstance, inside: &[bool], use_orbits: bool) -> Vec<usize> {
    let n = instance.len();
    let outside = (0..n).filter(|&a| !inside[a]);
    if !use_orbits || !instance.has_sublayers() {
        return outside.collect();
    }
    let mut per_coord: BTreeMap<_, (usize, usize, usize)> = BTreeMap::new();
    for a in 0..n {
        let e = per_coord.entry(instance.sublayer(a).expect("sublayers")).or_insert((0, 0, a));
        e.0 += 1;
        if inside[a] {
            e.1 += 1;
        } else {
            e.2 = a;
        }
    }
    let whole = per_coord.values().all(|&(total, chosen, _)| chosen == 0 || chosen == total);
    if !whole {
        return outside.collect();
    }
    per_coord
        .values()
        .filter(|&&(_, chosen, _)| chosen == 0)
        .map(|&(_, _, rep)| rep)
        .collect()
}
