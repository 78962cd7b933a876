//! The sublayer quotient: one node per `X(i, j)`, with an edge wherever
//! sublayers are adjacent in the induced order.

use std::collections::{BTreeMap, BTreeSet};

use crate::combinatorics::{Family, GroundParams, SublayerCoord};
use crate::error::{Error, Result};
use crate::poset::PosetInstance;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientDag {
    pub coords: Vec<SublayerCoord>,
    pub edges: Vec<(SublayerCoord, SublayerCoord)>,
    pub sources: Vec<SublayerCoord>,
    pub sinks: Vec<SublayerCoord>,
    pub heights: BTreeMap<SublayerCoord, u32>,
}

/// `d` lies between `lo` and `hi` in the product order used on sublayers
/// (fewer removals and more additions is higher).
fn between(lo: SublayerCoord, d: SublayerCoord, hi: SublayerCoord) -> bool {
    hi.i <= d.i && d.i <= lo.i && lo.j <= d.j && d.j <= hi.j
}

fn above(lo: SublayerCoord, hi: SublayerCoord) -> bool {
    lo != hi && between(lo, hi, hi)
}

/// Builds the quotient of a sublayer family and checks it is graded.
pub fn quotient_dag(params: &GroundParams, family: &Family) -> Result<QuotientDag> {
    let coords = family.coords(params);
    let mut edges = Vec::new();
    for &c in &coords {
        for &d in &coords {
            if above(c, d)
                && !coords
                    .iter()
                    .any(|&z| z != c && z != d && between(c, z, d))
            {
                edges.push((c, d));
            }
        }
    }
    edges.sort();

    let has_in: BTreeSet<SublayerCoord> = edges.iter().map(|e| e.1).collect();
    let has_out: BTreeSet<SublayerCoord> = edges.iter().map(|e| e.0).collect();
    let sources: Vec<SublayerCoord> = coords.iter().copied().filter(|c| !has_in.contains(c)).collect();
    let sinks: Vec<SublayerCoord> = coords.iter().copied().filter(|c| !has_out.contains(c)).collect();

    // j - i strictly increases along edges, so sorting by it is topological
    let mut topo = coords.clone();
    topo.sort_by_key(|c| (c.j as i64 - c.i as i64, *c));
    let mut heights: BTreeMap<SublayerCoord, u32> = coords.iter().map(|&c| (c, 0)).collect();
    for &c in &topo {
        let h = heights[&c];
        for &(_, d) in edges.iter().filter(|e| e.0 == c) {
            let slot = heights.get_mut(&d).expect("edge endpoint in family");
            *slot = (*slot).max(h + 1);
        }
    }
    if let Some(&(c, d)) = edges.iter().find(|(c, d)| heights[d] != heights[c] + 1) {
        return Err(Error::NotGraded(format!(
            "edge {c} -> {d} jumps from height {} to {}",
            heights[&c], heights[&d]
        )));
    }

    Ok(QuotientDag {
        coords,
        edges,
        sources,
        sinks,
        heights,
    })
}

impl QuotientDag {
    pub fn from_instance(instance: &PosetInstance) -> Result<QuotientDag> {
        match (instance.params(), instance.family()) {
            (Some(p), Some(f)) => quotient_dag(p, f),
            _ => Err(Error::Precondition(
                "custom posets have no sublayer quotient".into(),
            )),
        }
    }

    /// The unique source, if there is exactly one.
    pub fn source(&self) -> Option<SublayerCoord> {
        match self.sources.as_slice() {
            [s] => Some(*s),
            _ => None,
        }
    }

    pub fn sink(&self) -> Option<SublayerCoord> {
        match self.sinks.as_slice() {
            [s] => Some(*s),
            _ => None,
        }
    }

    pub fn height(&self, c: SublayerCoord) -> Option<u32> {
        self.heights.get(&c).copied()
    }

    pub fn has_edge(&self, c: SublayerCoord, d: SublayerCoord) -> bool {
        self.edges.binary_search(&(c, d)).is_ok()
    }

    pub fn successors(&self, c: SublayerCoord) -> impl Iterator<Item = SublayerCoord> + '_ {
        let start = self.edges.partition_point(|e| e.0 < c);
        self.edges[start..]
            .iter()
            .take_while(move |e| e.0 == c)
            .map(|e| e.1)
    }

    pub fn max_height(&self) -> u32 {
        self.heights.values().copied().max().unwrap_or(0)
    }

    pub fn contains(&self, c: SublayerCoord) -> bool {
        self.heights.contains_key(&c)
    }
}
