//! Concrete chains: one representative per profile, and the bracketing
//! symmetric chain partition of a full Boolean lattice.

use crate::antichain::ChainPartition;
use crate::combinatorics::GroundParams;
use crate::error::{Error, Result};
use crate::poset::PosetElement;

use super::ChainProfile;

pub const MAX_GK_N: u32 = 22;

/// Lowest `k` indices (1-based) not yet in `mask`.
fn lowest_unset(mask: u128, k: u32) -> u128 {
    let mut out = 0u128;
    let mut bit = 0;
    while out.count_ones() < k {
        if mask & (1 << bit) == 0 {
            out |= 1 << bit;
        }
        bit += 1;
    }
    out
}

/// Lowest `k` indices present in `mask`.
fn lowest_set(mask: u128, k: u32) -> u128 {
    let mut out = 0u128;
    let mut rest = mask;
    for _ in 0..k {
        let low = rest & rest.wrapping_neg();
        out |= low;
        rest &= !low;
    }
    out
}

/// A nested chain of sets following `profile`.
///
/// The first set removes `{1..i}` and adds `{1..j}`; each step restores the
/// smallest removed indices and adds the smallest unused far-side indices.
pub fn realize_chain(profile: &ChainProfile, params: &GroundParams) -> Result<Vec<PosetElement>> {
    let Some(&first) = profile.path.first() else {
        return Err(Error::Profile("empty profile".into()));
    };
    if let Some(c) = profile.path.iter().find(|c| !params.contains(**c)) {
        return Err(Error::Profile(format!("{c} lies outside {params}")));
    }
    if params.p.max(params.q) > crate::poset::MAX_SIDE {
        return Err(Error::Domain(format!(
            "sides above {} are not representable",
            crate::poset::MAX_SIDE
        )));
    }
    let mut x = PosetElement::new(lowest_unset(0, first.i), lowest_unset(0, first.j));
    let mut out = vec![x];
    for w in profile.path.windows(2) {
        let (c, d) = (w[0], w[1]);
        if d.i > c.i || d.j < c.j || c == d {
            return Err(Error::Profile(format!("step {c} -> {d} does not go up")));
        }
        x = PosetElement::new(
            x.removal & !lowest_set(x.removal, c.i - d.i),
            x.addition | lowest_unset(x.addition, d.j - c.j),
        );
        out.push(x);
    }
    Ok(out)
}

/// Symmetric chain partition of the subsets of `[n]`; element ids are
/// bitmasks with bit `k - 1` for `k`.
///
/// Reading `k ∈ S` as `)` and `k ∉ S` as `(`, the chain through `S` keeps the
/// matched pairs and fills the unmatched `(` positions from left to right.
pub fn gk_partition(n: u32) -> Result<ChainPartition> {
    if n > MAX_GK_N {
        return Err(Error::BudgetExceeded {
            what: "power set",
            required: format!("2^{n}"),
            budget: 1 << MAX_GK_N,
        });
    }
    let mut chains = Vec::new();
    let mut open = Vec::with_capacity(n as usize);
    'sets: for bottom in 0usize..1 << n {
        open.clear();
        for k in 0..n {
            if bottom >> k & 1 == 1 {
                if open.pop().is_none() {
                    continue 'sets;
                }
            } else {
                open.push(k);
            }
        }
        let mut set = bottom;
        let mut chain = Vec::with_capacity(open.len() + 1);
        chain.push(set);
        for &k in &open {
            set |= 1 << k;
            chain.push(set);
        }
        chains.push(chain);
    }
    Ok(ChainPartition { chains })
}
