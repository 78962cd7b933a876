//! Weighted chain families on the sublayer quotient that prove a layer is a
//! maximum antichain.
//!
//! A certificate assigns multiplicities to source-to-sink paths of the
//! quotient DAG. Spread evenly over each sublayer, a path through `X(i,j)`
//! with multiplicity `m` meets every element of `X(i,j)` `m / |X(i,j)|`
//! times. If that rate is exactly 1 on a target layer and at least 1
//! everywhere else, no antichain can beat the target layer: the chains meet
//! any antichain at most once each, and every chain crosses the target layer
//! exactly once. Rates strictly above 1 off the target make it the only
//! maximum antichain.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{build_table, layer_profile, Family, GroundParams, LayerProfile, SublayerCoord, SublayerTable};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::poset::{quotient_dag, QuotientDag};

mod chains;
mod zigzag;

pub use chains::{gk_partition, realize_chain, MAX_GK_N};
pub use zigzag::{zigzag_certificate, zigzag_from};

/// A path in the quotient DAG, listed from its lowest sublayer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainProfile {
    pub path: Vec<SublayerCoord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedProfile {
    pub profile: ChainProfile,
    pub multiplicity: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CertificateDoc", into = "CertificateDoc")]
pub struct Certificate {
    pub target_height: u32,
    pub profiles: Vec<WeightedProfile>,
    /// `N_c`: total multiplicity of the profiles through `c`.
    pub coverage: BTreeMap<SublayerCoord, BigUint>,
}

impl Certificate {
    /// Assembles a certificate, computing coverage from the profiles.
    pub fn from_profiles(target_height: u32, profiles: Vec<WeightedProfile>) -> Certificate {
        let mut coverage: BTreeMap<SublayerCoord, BigUint> = BTreeMap::new();
        for wp in &profiles {
            for c in &wp.profile.path {
                *coverage.entry(*c).or_default() += &wp.multiplicity;
            }
        }
        Certificate {
            target_height,
            profiles,
            coverage,
        }
    }

    pub fn coverage_of(&self, c: SublayerCoord) -> BigUint {
        self.coverage.get(&c).cloned().unwrap_or_default()
    }

    /// Sum of all multiplicities, i.e. the number of chains.
    pub fn total(&self) -> BigUint {
        self.profiles.iter().map(|p| &p.multiplicity).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateDoc {
    target_height: u32,
    profiles: Vec<ProfileDoc>,
    coverage: Vec<CoverageDoc>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    path: Vec<[u32; 2]>,
    multiplicity: String,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverageDoc {
    coord: [u32; 2],
    count: String,
}

fn parse_natural(s: &str) -> Result<BigUint, String> {
    s.parse::<BigUint>()
        .map_err(|_| format!("{s:?} is not a decimal natural number"))
}

impl From<Certificate> for CertificateDoc {
    fn from(c: Certificate) -> Self {
        CertificateDoc {
            target_height: c.target_height,
            profiles: c
                .profiles
                .into_iter()
                .map(|wp| ProfileDoc {
                    path: wp.profile.path.iter().map(|c| [c.i, c.j]).collect(),
                    multiplicity: wp.multiplicity.to_string(),
                })
                .collect(),
            coverage: c
                .coverage
                .into_iter()
                .map(|(c, n)| CoverageDoc {
                    coord: [c.i, c.j],
                    count: n.to_string(),
                })
                .collect(),
        }
    }
}

impl TryFrom<CertificateDoc> for Certificate {
    type Error = String;

    fn try_from(doc: CertificateDoc) -> Result<Self, String> {
        let profiles = doc
            .profiles
            .into_iter()
            .map(|p| {
                Ok(WeightedProfile {
                    profile: ChainProfile {
                        path: p.path.iter().map(|&[i, j]| SublayerCoord::new(i, j)).collect(),
                    },
                    multiplicity: parse_natural(&p.multiplicity)?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let mut coverage = BTreeMap::new();
        for entry in doc.coverage {
            let c = SublayerCoord::new(entry.coord[0], entry.coord[1]);
            if coverage.insert(c, parse_natural(&entry.count)?).is_some() {
                return Err(format!("coverage lists {c} twice"));
            }
        }
        Ok(Certificate {
            target_height: doc.target_height,
            profiles,
            coverage,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateStatus {
    Certified,
    CertifiedStrict,
    Infeasible,
    NotApplicable,
}

impl CertificateStatus {
    pub fn is_certified(self) -> bool {
        matches!(self, CertificateStatus::Certified | CertificateStatus::CertifiedStrict)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CertificateStatus::Certified => "CERTIFIED",
            CertificateStatus::CertifiedStrict => "CERTIFIED_STRICT",
            CertificateStatus::Infeasible => "INFEASIBLE",
            CertificateStatus::NotApplicable => "NOT_APPLICABLE",
        }
    }
}

impl fmt::Display for CertificateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateVerdict {
    pub status: CertificateStatus,
    pub certificate: Option<Certificate>,
    pub diagnostics: String,
}

impl CertificateVerdict {
    fn without_certificate(status: CertificateStatus, diagnostics: String) -> Self {
        CertificateVerdict {
            status,
            certificate: None,
            diagnostics,
        }
    }

    /// Grades a certificate that already passed `certificate_check`.
    fn certified(cert: Certificate, table: &SublayerTable, dag: &QuotientDag, note: &str) -> Result<Self> {
        let status = if is_strict(&cert, table, dag)? {
            CertificateStatus::CertifiedStrict
        } else {
            CertificateStatus::Certified
        };
        let mut diagnostics = rate_summary(&cert, table, dag)?;
        if !note.is_empty() {
            diagnostics = format!("{note}; {diagnostics}");
        }
        Ok(CertificateVerdict {
            status,
            certificate: Some(cert),
            diagnostics,
        })
    }
}

fn size_of(table: &SublayerTable, c: SublayerCoord) -> Result<&BigUint> {
    table
        .size(c)
        .ok_or_else(|| Error::Format(format!("coordinate {c} is not in the sublayer table")))
}

fn target_coords(dag: &QuotientDag, h: u32) -> Vec<SublayerCoord> {
    dag.heights
        .iter()
        .filter(|(_, &hc)| hc == h)
        .map(|(c, _)| *c)
        .collect()
}

/// Searches for a certificate that the layer at `target_height` is a maximum
/// antichain (`strict`: the unique one).
///
/// Node `c` of the quotient must carry between `|X_c|` and `|X_c|` chains on
/// the target layer and at least `|X_c|` (`|X_c| + 1` when strict) elsewhere.
/// A feasible flow is split into paths by repeatedly removing the
/// lexicographically smallest positive path with its bottleneck.
pub fn certificate_search(
    dag: &QuotientDag,
    table: &SublayerTable,
    target_height: u32,
    strict: bool,
) -> Result<CertificateVerdict> {
    let (Some(source), Some(sink)) = (dag.source(), dag.sink()) else {
        return Ok(CertificateVerdict::without_certificate(
            CertificateStatus::NotApplicable,
            format!(
                "quotient has sources {:?} and sinks {:?}; a unique source and sink are required",
                dag.sources, dag.sinks
            ),
        ));
    };
    if target_coords(dag, target_height).is_empty() {
        return Err(Error::Precondition(format!(
            "no sublayer at height {target_height} (top height is {})",
            dag.max_height()
        )));
    }
    let index: BTreeMap<SublayerCoord, usize> =
        dag.coords.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let mut net = FlowNetwork::new(2 * dag.coords.len());
    let mut node_arc = Vec::with_capacity(dag.coords.len());
    for (k, &c) in dag.coords.iter().enumerate() {
        let size = size_of(table, c)?.clone();
        let arc = if dag.heights[&c] == target_height {
            net.add_arc(2 * k, 2 * k + 1, size.clone(), Some(size))
        } else if strict {
            net.add_arc(2 * k, 2 * k + 1, size + 1u32, None)
        } else {
            net.add_arc(2 * k, 2 * k + 1, size, None)
        };
        node_arc.push(arc);
    }
    let mut edge_arc = BTreeMap::new();
    for &(c, d) in &dag.edges {
        let arc = net.add_arc(2 * index[&c] + 1, 2 * index[&d], BigUint::zero(), None);
        edge_arc.insert((c, d), arc);
    }
    let (s, t) = (2 * index[&source], 2 * index[&sink] + 1);
    let flow = match net.feasible_flow(s, t)? {
        Ok(f) => f,
        Err(inf) => {
            let cut: Vec<String> = dag
                .coords
                .iter()
                .enumerate()
                .filter(|(k, _)| inf.source_side[2 * k] || inf.source_side[2 * k + 1])
                .map(|(_, c)| c.to_string())
                .collect();
            return Ok(CertificateVerdict::without_certificate(
                CertificateStatus::Infeasible,
                format!(
                    "no chain family meets the bounds for target height {target_height}{}: \
                     {} units of lower-bound demand unroutable; violated cut around [{}]",
                    if strict { " (strict)" } else { "" },
                    inf.shortfall,
                    cut.join(", ")
                ),
            ));
        }
    };

    let mut edge_flow: BTreeMap<(SublayerCoord, SublayerCoord), BigUint> = edge_arc
        .iter()
        .map(|(&e, &a)| (e, flow.arc_flow[a].clone()))
        .collect();
    let mut profiles = Vec::new();
    if source == sink {
        let m = flow.arc_flow[node_arc[index[&source]]].clone();
        profiles.push(WeightedProfile {
            profile: ChainProfile { path: vec![source] },
            multiplicity: m,
        });
    } else {
        loop {
            let mut path = vec![source];
            let mut cur = source;
            while cur != sink {
                let next = dag
                    .successors(cur)
                    .find(|&d| !edge_flow[&(cur, d)].is_zero());
                match next {
                    Some(d) => {
                        path.push(d);
                        cur = d;
                    }
                    None if cur == source => break,
                    None => {
                        return Err(Error::Consistency(format!(
                            "flow enters {cur} but does not leave it"
                        )))
                    }
                }
            }
            if cur != sink {
                break;
            }
            let bottleneck = path
                .windows(2)
                .map(|w| edge_flow[&(w[0], w[1])].clone())
                .min()
                .expect("path has an edge");
            for w in path.windows(2) {
                *edge_flow.get_mut(&(w[0], w[1])).expect("edge") -= &bottleneck;
            }
            profiles.push(WeightedProfile {
                profile: ChainProfile { path },
                multiplicity: bottleneck,
            });
        }
    }
    let cert = Certificate::from_profiles(target_height, profiles);
    for (k, &c) in dag.coords.iter().enumerate() {
        if cert.coverage_of(c) != flow.arc_flow[node_arc[k]] {
            return Err(Error::Consistency(format!(
                "path decomposition misses flow through {c}"
            )));
        }
    }
    if let Some(v) = certificate_violation(&cert, table, dag)? {
        return Err(Error::Consistency(format!("search produced an invalid certificate: {v}")));
    }
    CertificateVerdict::certified(cert, table, dag, "")
}

/// Re-verifies a certificate from scratch; `true` iff every condition holds.
pub fn certificate_check(cert: &Certificate, table: &SublayerTable, dag: &QuotientDag) -> Result<bool> {
    Ok(certificate_violation(cert, table, dag)?.is_none())
}

/// The first violated certificate condition, if any.
pub fn certificate_violation(
    cert: &Certificate,
    table: &SublayerTable,
    dag: &QuotientDag,
) -> Result<Option<String>> {
    for c in cert
        .coverage
        .keys()
        .chain(cert.profiles.iter().flat_map(|p| p.profile.path.iter()))
    {
        if !dag.contains(*c) {
            return Err(Error::Format(format!("coordinate {c} is not in the quotient")));
        }
        size_of(table, *c)?;
    }
    for c in &dag.coords {
        size_of(table, *c)?;
    }

    // every profile is a full source-to-sink path meeting each height once
    let top = dag.max_height();
    for (k, wp) in cert.profiles.iter().enumerate() {
        let path = &wp.profile.path;
        if wp.multiplicity.is_zero() {
            return Ok(Some(format!("profile #{k} has multiplicity 0")));
        }
        if path.len() != top as usize + 1 {
            return Ok(Some(format!(
                "profile #{k} has {} sublayers, expected one per height 0..={top}",
                path.len()
            )));
        }
        if !dag.sources.contains(&path[0]) || !dag.sinks.contains(path.last().expect("nonempty")) {
            return Ok(Some(format!("profile #{k} does not run from a source to a sink")));
        }
        for (h, c) in path.iter().enumerate() {
            if dag.height(*c) != Some(h as u32) {
                return Ok(Some(format!("profile #{k} visits {c} out of height order")));
            }
        }
        if let Some(w) = path.windows(2).find(|w| !dag.has_edge(w[0], w[1])) {
            return Ok(Some(format!("profile #{k} step {} -> {} is not an edge", w[0], w[1])));
        }
    }

    let mut through: BTreeMap<SublayerCoord, BigUint> = BTreeMap::new();
    for wp in &cert.profiles {
        for c in &wp.profile.path {
            *through.entry(*c).or_default() += &wp.multiplicity;
        }
    }
    for c in &dag.coords {
        let claimed = cert.coverage_of(*c);
        let actual = through.get(c).cloned().unwrap_or_default();
        if claimed != actual {
            return Ok(Some(format!(
                "coverage of {c} is listed as {claimed} but the profiles give {actual}"
            )));
        }
    }

    let mut per_height: BTreeMap<u32, BigUint> = BTreeMap::new();
    for c in &dag.coords {
        *per_height.entry(dag.heights[c]).or_default() += cert.coverage_of(*c);
    }
    let mut sums = per_height.iter();
    if let Some((_, first)) = sums.next() {
        if let Some((h, s)) = sums.find(|(_, s)| *s != first) {
            return Ok(Some(format!(
                "layer {h} carries {s} chains, layer 0 carries {first}"
            )));
        }
    }

    let target = target_coords(dag, cert.target_height);
    let Some(&star) = target.first() else {
        return Ok(Some(format!("no sublayer at target height {}", cert.target_height)));
    };
    for c in &target {
        let (n, size) = (cert.coverage_of(*c), size_of(table, *c)?);
        if &n != size {
            return Ok(Some(format!(
                "target sublayer {c} is covered {n} times but has {size} elements"
            )));
        }
    }

    let (n_star, x_star) = (cert.coverage_of(star), size_of(table, star)?);
    for c in &dag.coords {
        let (n, x) = (cert.coverage_of(*c), size_of(table, *c)?);
        if n * x_star < x * &n_star {
            return Ok(Some(format!(
                "{c} is covered {} times for {x} elements, below the target rate",
                cert.coverage_of(*c)
            )));
        }
    }
    Ok(None)
}

/// Whether off-target rates are all strictly above the target rate. A
/// certificate with nothing off the target is not strict.
pub fn is_strict(cert: &Certificate, table: &SublayerTable, dag: &QuotientDag) -> Result<bool> {
    let target = target_coords(dag, cert.target_height);
    let Some(&star) = target.first() else {
        return Ok(false);
    };
    let (n_star, x_star) = (cert.coverage_of(star), size_of(table, star)?);
    let mut off = dag.coords.iter().filter(|c| dag.heights[c] != cert.target_height).peekable();
    if off.peek().is_none() {
        return Ok(false);
    }
    for c in off {
        if cert.coverage_of(*c) * x_star <= size_of(table, *c)? * &n_star {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Range of the per-element rates `N_c / |X_c|` off the target layer.
fn rate_summary(cert: &Certificate, table: &SublayerTable, dag: &QuotientDag) -> Result<String> {
    let mut rates = Vec::new();
    for c in dag.coords.iter().filter(|c| dag.heights[c] != cert.target_height) {
        rates.push(BigRational::new(
            BigInt::from(cert.coverage_of(*c)),
            BigInt::from(size_of(table, *c)?.clone()),
        ));
    }
    let total = cert.total();
    let (Some(lo), Some(hi)) = (rates.iter().min(), rates.iter().max()) else {
        return Ok(format!(
            "{} chain(s) in {} profile(s); rate 1 on target height {}; no sublayers off the target",
            total,
            cert.profiles.len(),
            cert.target_height
        ));
    };
    let one = BigRational::one();
    Ok(format!(
        "{} chain(s) in {} profile(s); rate 1 on target height {}; off-target rates in [{}, {}] \
         (all >= 1: {}; all > 1: {}; all <= 1: {})",
        total,
        cert.profiles.len(),
        cert.target_height,
        lo,
        hi,
        *lo >= one,
        *lo > one,
        *hi <= one
    ))
}

/// Certifies the largest layer of `B_r[p,q]` for `r <= min(p, q)`, preferring
/// a strict certificate. Returns the verdict with the largest layer size.
pub fn certified_width(params: &GroundParams) -> Result<(CertificateVerdict, BigUint)> {
    let table = build_table(params, Family::Ball);
    let dag = quotient_dag(params, &Family::Ball)?;
    if !params.is_untruncated() {
        let profile = LayerProfile::from_heights(&table, |c| dag.heights[&c]);
        return Ok((
            CertificateVerdict::without_certificate(
                CertificateStatus::NotApplicable,
                format!("r = {} exceeds min(p, q) = {}", params.r, params.p.min(params.q)),
            ),
            profile.max_size(),
        ));
    }
    let profile = layer_profile(&table)?;
    let size = profile.max_size();
    if profile.tie {
        return Ok((
            CertificateVerdict::without_certificate(
                CertificateStatus::NotApplicable,
                format!("largest layer size {size} is attained at heights {:?}", profile.argmax),
            ),
            size,
        ));
    }
    let h = profile.largest_height();
    let strict = certificate_search(&dag, &table, h, true)?;
    if strict.status.is_certified() {
        return Ok((strict, size));
    }
    let plain = certificate_search(&dag, &table, h, false)?;
    if plain.status.is_certified() {
        return Ok((plain, size));
    }
    Ok((
        CertificateVerdict::without_certificate(
            CertificateStatus::Infeasible,
            format!("strict: {}; non-strict: {}", strict.diagnostics, plain.diagnostics),
        ),
        size,
    ))
}

/// `Σ_k` (largest sublayer of the sphere of radius `r - 2k`), `r - 2k >= 0`.
pub fn theorem_bound(params: &GroundParams) -> Result<BigUint> {
    if !params.is_untruncated() {
        return Err(Error::Precondition(format!(
            "sphere-sum bound needs r <= min(p, q), got {params}"
        )));
    }
    Ok((0..=params.r)
        .rev()
        .step_by(2)
        .map(|m| build_table(params, Family::Sphere(m)).max_size())
        .sum())
}

#[cfg(test)]
mod tests;
