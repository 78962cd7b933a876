//! Exact sublayer arithmetic for balls and spheres around `[p]` in the
//! power set of `[p + q]`.
//!
//! A sublayer `X(i, j)` collects the sets obtained from `[p]` by deleting `i`
//! of its elements and adding `j` of the `q` outside elements, so
//! `|X(i, j)| = C(p, i) * C(q, j)`. Everything here is exact: sizes are
//! [`BigUint`], ratios and thresholds are [`BigRational`].

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ground set split `[p] ∪ {p+1, .., p+q}` and a radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundParams {
    pub p: u32,
    pub q: u32,
    pub r: u32,
}

impl GroundParams {
    pub fn new(p: u32, q: u32, r: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::Domain("p must be at least 1".into()));
        }
        Ok(GroundParams { p, q, r })
    }

    pub fn n(&self) -> u32 {
        self.p + self.q
    }

    /// Same radius with the two sides exchanged (the complement-dual ball).
    pub fn swapped(&self) -> Result<Self> {
        GroundParams::new(self.q, self.p, self.r)
    }

    /// Whether `r <= min(p, q)`, the regime of the closed-form heights.
    pub fn is_untruncated(&self) -> bool {
        self.r <= self.p.min(self.q)
    }

    pub fn with_radius(&self, r: u32) -> Self {
        GroundParams { r, ..*self }
    }

    pub fn contains(&self, c: SublayerCoord) -> bool {
        c.i <= self.p && c.j <= self.q
    }
}

impl fmt::Display for GroundParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B_{}[{},{}]", self.r, self.p, self.q)
    }
}

/// `i` elements removed from `[p]`, `j` added from the far side.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct SublayerCoord {
    pub i: u32,
    pub j: u32,
}

impl SublayerCoord {
    pub const fn new(i: u32, j: u32) -> Self {
        SublayerCoord { i, j }
    }

    pub fn radius(&self) -> u32 {
        self.i + self.j
    }
}

impl fmt::Display for SublayerCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Which sublayers a table (or poset) is made of.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// All `(i, j)` with `i + j <= r`.
    Ball,
    /// All `(i, j)` with `i + j = m`.
    Sphere(u32),
    /// An explicit coordinate set, e.g. a union of consecutive spheres.
    Custom(BTreeSet<SublayerCoord>),
}

impl Family {
    /// Consecutive spheres `S_lo ∪ .. ∪ S_hi`.
    pub fn sphere_union(params: &GroundParams, lo: u32, hi: u32) -> Family {
        let mut set = BTreeSet::new();
        for m in lo..=hi {
            set.extend(sphere_coords(params, m));
        }
        Family::Custom(set)
    }

    /// Coordinates in ascending `(i, j)` order, clipped to `i <= p`, `j <= q`.
    pub fn coords(&self, params: &GroundParams) -> Vec<SublayerCoord> {
        match self {
            Family::Ball => {
                let mut out = Vec::new();
                for i in 0..=params.p.min(params.r) {
                    for j in 0..=params.q.min(params.r - i) {
                        out.push(SublayerCoord::new(i, j));
                    }
                }
                out
            }
            Family::Sphere(m) => sphere_coords(params, *m),
            Family::Custom(set) => set
                .iter()
                .copied()
                .filter(|c| params.contains(*c))
                .collect(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Family::Ball => "ball".into(),
            Family::Sphere(m) => format!("sphere({m})"),
            Family::Custom(_) => "custom".into(),
        }
    }
}

fn sphere_coords(params: &GroundParams, m: u32) -> Vec<SublayerCoord> {
    let lo = m.saturating_sub(params.q);
    let hi = params.p.min(m);
    (lo..=hi).map(|i| SublayerCoord::new(i, m - i)).collect()
}

/// `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for t in 0..k {
        // acc = C(n, t) here, and C(n, t) * (n - t) is divisible by t + 1
        acc *= n - t;
        acc /= t + 1;
    }
    acc
}

/// `|X(i, j)| = C(p, i) * C(q, j)`.
pub fn sublayer_size(params: &GroundParams, c: SublayerCoord) -> Result<BigUint> {
    if !params.contains(c) {
        return Err(Error::Domain(format!(
            "coordinate {c} outside 0..={} x 0..={}",
            params.p, params.q
        )));
    }
    Ok(size_unchecked(params, c))
}

fn size_unchecked(params: &GroundParams, c: SublayerCoord) -> BigUint {
    binomial(params.p as u64, c.i as u64) * binomial(params.q as u64, c.j as u64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SublayerTable {
    pub params: GroundParams,
    pub family: Family,
    pub sizes: BTreeMap<SublayerCoord, BigUint>,
}

impl SublayerTable {
    pub fn total(&self) -> BigUint {
        self.sizes.values().sum()
    }

    pub fn size(&self, c: SublayerCoord) -> Option<&BigUint> {
        self.sizes.get(&c)
    }

    /// Largest single sublayer size (zero for an empty table).
    pub fn max_size(&self) -> BigUint {
        self.sizes.values().max().cloned().unwrap_or_default()
    }
}

pub fn build_table(params: &GroundParams, family: Family) -> SublayerTable {
    let sizes = family
        .coords(params)
        .into_iter()
        .map(|c| (c, size_unchecked(params, c)))
        .collect();
    SublayerTable {
        params: *params,
        family,
        sizes,
    }
}

/// Layer sizes `|L_h|` with the heights attaining the maximum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerProfile {
    pub heights: BTreeMap<u32, BigUint>,
    pub argmax: Vec<u32>,
    pub tie: bool,
}

impl LayerProfile {
    /// Aggregate a table over an arbitrary per-sublayer height assignment.
    pub fn from_heights(
        table: &SublayerTable,
        height_of: impl Fn(SublayerCoord) -> u32,
    ) -> LayerProfile {
        let mut heights: BTreeMap<u32, BigUint> = BTreeMap::new();
        for (c, size) in &table.sizes {
            *heights.entry(height_of(*c)).or_default() += size;
        }
        let max = heights.values().max().cloned().unwrap_or_default();
        let argmax: Vec<u32> = heights
            .iter()
            .filter(|(_, s)| **s == max)
            .map(|(h, _)| *h)
            .collect();
        let tie = argmax.len() > 1;
        LayerProfile {
            heights,
            argmax,
            tie,
        }
    }

    pub fn max_size(&self) -> BigUint {
        self.argmax
            .first()
            .map(|h| self.heights[h].clone())
            .unwrap_or_default()
    }

    /// The first (lowest) height of maximum size.
    pub fn largest_height(&self) -> u32 {
        self.argmax.first().copied().unwrap_or(0)
    }
}

/// Closed-form height of a sublayer, `r - i + j` in a ball and `j` in a sphere.
pub fn closed_form_height(table: &SublayerTable, c: SublayerCoord) -> Result<u32> {
    let p = &table.params;
    match &table.family {
        Family::Ball if p.is_untruncated() => Ok(p.r - c.i + c.j),
        Family::Sphere(m) if *m <= p.p.min(p.q) => Ok(c.j),
        Family::Ball => Err(Error::ClosedFormUnavailable(format!(
            "r = {} exceeds min(p, q) = {}",
            p.r,
            p.p.min(p.q)
        ))),
        Family::Sphere(m) => Err(Error::ClosedFormUnavailable(format!(
            "sphere radius {m} exceeds min(p, q) = {}",
            p.p.min(p.q)
        ))),
        Family::Custom(_) => Err(Error::ClosedFormUnavailable(
            "custom coordinate families have no closed-form heights".into(),
        )),
    }
}

pub fn layer_profile(table: &SublayerTable) -> Result<LayerProfile> {
    if let Some(c) = table.sizes.keys().next() {
        closed_form_height(table, *c)?;
    } else {
        closed_form_height(table, SublayerCoord::new(0, 0))?;
    }
    Ok(LayerProfile::from_heights(table, |c| {
        closed_form_height(table, c).expect("checked above")
    }))
}

/// `|X(i-1, j)| / |X(i, j-1)| = (q-j+1) i / ((p-i+1) j)`.
///
/// Requires `1 <= i <= p` and `1 <= j <= q` so both sublayers are nonempty.
pub fn ratio(params: &GroundParams, i: u32, j: u32) -> Result<BigRational> {
    if i == 0 || j == 0 || i > params.p || j > params.q {
        return Err(Error::Domain(format!(
            "ratio needs 1 <= i <= {} and 1 <= j <= {}, got ({i},{j})",
            params.p, params.q
        )));
    }
    let num = BigInt::from((params.q - j + 1) as u64) * BigInt::from(i);
    let den = BigInt::from((params.p - i + 1) as u64) * BigInt::from(j);
    Ok(BigRational::new(num, den))
}

/// Outcome of a monotonicity scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Monotonicity<T> {
    /// Non-increasing throughout; carries the scanned sequence.
    NonIncreasing(Vec<T>),
    /// `values[at] < values[at + 1]`.
    Violation { at: usize, values: Vec<T> },
}

impl<T> Monotonicity<T> {
    pub fn holds(&self) -> bool {
        matches!(self, Monotonicity::NonIncreasing(_))
    }
}

/// For `i + j = radius + 1`, checks `ratio(i, j)` is non-increasing as `j` grows.
pub fn check_ratio_monotone(params: &GroundParams, radius: u32) -> Result<Monotonicity<BigRational>> {
    if radius == 0 {
        return Err(Error::Domain("radius must be at least 1".into()));
    }
    let s = radius + 1;
    let values: Vec<BigRational> = (1..s)
        .map(|j| (s - j, j))
        .filter(|&(i, j)| i <= params.p && j <= params.q)
        .map(|(i, j)| ratio(params, i, j))
        .collect::<Result<_>>()?;
    Ok(scan_non_increasing(values, |a, b| a >= b))
}

fn scan_non_increasing<T>(values: Vec<T>, ge: impl Fn(&T, &T) -> bool) -> Monotonicity<T> {
    match values.windows(2).position(|w| !ge(&w[0], &w[1])) {
        Some(at) => Monotonicity::Violation { at, values },
        None => Monotonicity::NonIncreasing(values),
    }
}

/// Largest sublayers of the sphere of radius `m`, and the coordinate
/// predicted by solving `(i+1)/j = (p+1)/(q+1)` on `i + j = m` with `j`
/// rounded down and `i` rounded up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereArgmax {
    pub coords: Vec<SublayerCoord>,
    pub rounding_coord: SublayerCoord,
}

impl SphereArgmax {
    pub fn is_tie(&self) -> bool {
        self.coords.len() > 1
    }
}

pub fn largest_sphere_sublayer(params: &GroundParams, m: u32) -> Result<SphereArgmax> {
    if m > params.n() {
        return Err(Error::Precondition(format!(
            "sphere radius {m} exceeds p + q = {}",
            params.n()
        )));
    }
    let table = build_table(params, Family::Sphere(m));
    let max = table.max_size();
    let coords: Vec<SublayerCoord> = table
        .sizes
        .iter()
        .filter(|(_, s)| **s == max)
        .map(|(c, _)| *c)
        .collect();
    let j = (m as u64 + 1) * (params.q as u64 + 1) / (params.p as u64 + params.q as u64 + 2);
    let j = j as u32;
    let rounding_coord = SublayerCoord::new(m - j, j);
    if !coords.contains(&rounding_coord) {
        return Err(Error::Consistency(format!(
            "rounded coordinate {rounding_coord} is not a largest sublayer of S_{m}[{},{}] (argmax {:?})",
            params.p, params.q, coords
        )));
    }
    Ok(SphereArgmax {
        coords,
        rounding_coord,
    })
}

/// `|X(i,j)| - |X(i+1,j-1)| - |X(i,j-2)|`, the slack of the descent split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZigzagMargin {
    pub coord: SublayerCoord,
    pub slack: BigInt,
}

impl ZigzagMargin {
    pub fn holds(&self) -> bool {
        self.slack >= BigInt::zero()
    }
}

pub fn zigzag_margin(params: &GroundParams, c: SublayerCoord) -> Result<ZigzagMargin> {
    if c.j < 2 || c.i + 1 > params.p || c.j > params.q {
        return Err(Error::Domain(format!(
            "zigzag margin needs j >= 2, i + 1 <= p and j <= q, got {c}"
        )));
    }
    let here = BigInt::from(size_unchecked(params, c));
    let across = BigInt::from(size_unchecked(params, SublayerCoord::new(c.i + 1, c.j - 1)));
    let below = BigInt::from(size_unchecked(params, SublayerCoord::new(c.i, c.j - 2)));
    Ok(ZigzagMargin {
        coord: c,
        slack: here - across - below,
    })
}

/// `((r + 1/2) / 3)^3 + r - 3`, the far-side size beyond which the zigzag
/// descent margin is guaranteed.
pub fn omega_threshold(r: u32) -> BigRational {
    let r = BigInt::from(r);
    let base = BigRational::new(BigInt::from(2) * &r + 1, BigInt::from(6));
    let cube = &base * &base * &base;
    cube + BigRational::from_integer(r - 3)
}

/// Multiplicity vector of a multiset `{1^μ1, .., n^μn}`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MultisetSpec {
    pub multiplicities: Vec<u32>,
}

impl MultisetSpec {
    pub fn new(multiplicities: Vec<u32>) -> Result<Self> {
        if let Some(pos) = multiplicities.iter().position(|&m| m == 0) {
            return Err(Error::Domain(format!("multiplicity #{pos} is zero")));
        }
        Ok(MultisetSpec { multiplicities })
    }

    pub fn rank(&self) -> u32 {
        self.multiplicities.iter().sum()
    }
}

/// Coefficients of `∏ (1 + x + .. + x^μ)`, i.e. the layer sizes of the
/// sub-multiset lattice.
pub fn multiset_layer_sizes(spec: &MultisetSpec) -> Vec<BigUint> {
    let mut coeffs = vec![BigUint::one()];
    for &mu in &spec.multiplicities {
        let mu = mu as usize;
        let mut next = vec![BigUint::zero(); coeffs.len() + mu];
        // sliding window sum of width mu + 1
        let mut window = BigUint::zero();
        for (h, slot) in next.iter_mut().enumerate() {
            if h < coeffs.len() {
                window += &coeffs[h];
            }
            if h > mu && h - mu - 1 < coeffs.len() {
                window -= &coeffs[h - mu - 1];
            }
            *slot = window.clone();
        }
        coeffs = next;
    }
    coeffs
}

/// Checks `|P_h| / |P_{h-1}|` is non-increasing in `h` by cross-multiplying
/// (`|P_h|^2 >= |P_{h-1}| |P_{h+1}|`). The reported sequence is the ratios.
pub fn check_multiset_ratio_monotone(spec: &MultisetSpec) -> Monotonicity<BigRational> {
    let sizes = multiset_layer_sizes(spec);
    let ratios: Vec<BigRational> = sizes
        .windows(2)
        .map(|w| BigRational::new(BigInt::from(w[1].clone()), BigInt::from(w[0].clone())))
        .collect();
    match sizes
        .windows(3)
        .position(|w| &w[1] * &w[1] < &w[0] * &w[2])
    {
        Some(at) => Monotonicity::Violation { at, values: ratios },
        None => Monotonicity::NonIncreasing(ratios),
    }
}
