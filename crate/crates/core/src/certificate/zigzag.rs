//! Explicit certificates for balls built from sphere-local moves.
//!
//! From a largest sublayer `X(i0, j0)` of the outer sphere, its chains go up
//! by zigzagging between the two outermost spheres and go down through
//! `X(i0, j0-1)`, where `|X(i0, j0-2)|` of them peel off downward and the rest
//! continue the zigzag, for as long as the descent margin is nonnegative.
//! Each lower target sublayer `X(i0-l, j0-l)` sends its chains straight down
//! (fixed removals), then up by zigzagging in its own pair of spheres.
//!
//! The construction is stated for `p <= q`; otherwise it runs on the
//! complementary ball `B_r[q,p]` and is mapped back.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::combinatorics::{
    build_table, largest_sphere_sublayer, layer_profile, sublayer_size, zigzag_margin, Family,
    GroundParams, SublayerCoord, ZigzagMargin,
};
use crate::error::Result;
use crate::poset::quotient_dag;

use super::{
    certificate_violation, Certificate, CertificateStatus, CertificateVerdict, ChainProfile, WeightedProfile,
};

fn c(i: u32, j: u32) -> SublayerCoord {
    SublayerCoord::new(i, j)
}

/// From `(a, 0)` along the removal axis to `(r, 0)`, excluding the start.
fn down_axis(a: u32, r: u32, out: &mut Vec<SublayerCoord>) {
    out.extend((a + 1..=r).map(|i| c(i, 0)));
}

/// From `(a, b)` up to `(0, r)`: zigzag within spheres `a + b` and
/// `a + b - 1`, then straight up the addition axis. Excludes the start.
fn up_zigzag(a: u32, b: u32, r: u32, out: &mut Vec<SublayerCoord>) {
    let (mut a, mut b) = (a, b);
    while a > 0 {
        out.push(c(a - 1, b));
        out.push(c(a - 1, b + 1));
        a -= 1;
        b += 1;
    }
    out.extend((b + 1..=r).map(|j| c(0, j)));
}

fn path_through(mut below: Vec<SublayerCoord>, mid: SublayerCoord, above: Vec<SublayerCoord>) -> Vec<SublayerCoord> {
    below.reverse();
    below.push(mid);
    below.extend(above);
    below
}

/// Weighted paths for start `(i0, j0)` on the outer sphere, or the first
/// negative descent margin.
fn construct(
    params: &GroundParams,
    start: SublayerCoord,
    margins: &mut Vec<ZigzagMargin>,
) -> Result<std::result::Result<BTreeMap<Vec<SublayerCoord>, BigUint>, ZigzagMargin>> {
    let r = params.r;
    let (i0, j0) = (start.i, start.j);
    let size = |x: SublayerCoord| sublayer_size(params, x);
    let mut paths: BTreeMap<Vec<SublayerCoord>, BigUint> = BTreeMap::new();
    let mut add = |path: Vec<SublayerCoord>, m: BigUint| {
        if m > BigUint::from(0u32) {
            *paths.entry(path).or_default() += m;
        }
    };

    let mut up0 = Vec::new();
    up_zigzag(i0, j0, r, &mut up0);

    // descent of the start sublayer's chains, listed downward from `start`
    let mut amount = size(start)?;
    let mut spine = Vec::new();
    let mut k = 0;
    loop {
        let (ik, jk) = (i0 + k, j0 - k);
        if jk == 0 {
            break;
        }
        spine.push(c(ik, jk - 1));
        if jk >= 2 {
            let margin = zigzag_margin(params, c(ik, jk))?;
            if !margin.holds() {
                return Ok(Err(margin));
            }
            margins.push(margin);
            let peel = size(c(ik, jk - 2))?;
            let mut down = spine.clone();
            down.extend((0..=jk - 2).rev().map(|j| c(ik, j)));
            down_axis(ik, r, &mut down);
            add(path_through(down, start, up0.clone()), peel.clone());
            amount -= peel;
        }
        spine.push(c(ik + 1, jk - 1));
        k += 1;
    }
    add(path_through(spine, start, up0), amount);

    for l in 1..=i0.min(j0) {
        let (a, b) = (i0 - l, j0 - l);
        let mut down: Vec<SublayerCoord> = (0..b).rev().map(|j| c(a, j)).collect();
        down_axis(a, r, &mut down);
        let mut up = Vec::new();
        up_zigzag(a, b, r, &mut up);
        add(path_through(down, c(a, b), up), size(c(a, b))?);
    }
    Ok(Ok(paths))
}

fn mirror(path: &[SublayerCoord]) -> Vec<SublayerCoord> {
    path.iter().rev().map(|x| c(x.j, x.i)).collect()
}

/// Attempts the construction from one start sublayer of the outer sphere.
pub fn zigzag_from(params: &GroundParams, start: SublayerCoord) -> Result<CertificateVerdict> {
    if !params.is_untruncated() {
        return Ok(CertificateVerdict::without_certificate(
            CertificateStatus::NotApplicable,
            format!("r = {} exceeds min(p, q) = {}", params.r, params.p.min(params.q)),
        ));
    }
    if start.radius() != params.r {
        return Err(crate::Error::Precondition(format!(
            "start {start} is not on the outer sphere of radius {}",
            params.r
        )));
    }
    let mirrored = params.p > params.q;
    let (work, work_start) = if mirrored {
        (params.swapped()?, c(start.j, start.i))
    } else {
        (*params, start)
    };
    let mut margins = Vec::new();
    let paths = match construct(&work, work_start, &mut margins)? {
        Ok(paths) => paths,
        Err(m) => {
            return Ok(CertificateVerdict::without_certificate(
                CertificateStatus::Infeasible,
                format!("start {start}: descent margin at {} is {}", frame(m.coord, mirrored), m.slack),
            ))
        }
    };
    let mut profiles: Vec<WeightedProfile> = paths
        .into_iter()
        .map(|(path, multiplicity)| WeightedProfile {
            profile: ChainProfile {
                path: if mirrored { mirror(&path) } else { path },
            },
            multiplicity,
        })
        .collect();
    profiles.sort_by(|a, b| a.profile.cmp(&b.profile));
    let target_height = params.r - start.i + start.j;
    let cert = Certificate::from_profiles(target_height, profiles);

    let table = build_table(params, Family::Ball);
    let dag = quotient_dag(params, &Family::Ball)?;
    let margins_text = margins
        .iter()
        .map(|m| format!("{} {}", frame(m.coord, mirrored), m.slack))
        .collect::<Vec<_>>()
        .join(", ");
    if let Some(v) = certificate_violation(&cert, &table, &dag)? {
        return Ok(CertificateVerdict::without_certificate(
            CertificateStatus::Infeasible,
            format!("start {start}: margins [{margins_text}] hold but {v}"),
        ));
    }
    CertificateVerdict::certified(cert, &table, &dag, &format!("start {start}: margins [{margins_text}]"))
}

fn frame(x: SublayerCoord, mirrored: bool) -> SublayerCoord {
    if mirrored {
        c(x.j, x.i)
    } else {
        x
    }
}

/// The explicit construction for the largest layer of `B_r[p,q]`, trying the
/// rounded largest outer sublayer first and then any tied ones.
pub fn zigzag_certificate(params: &GroundParams) -> Result<CertificateVerdict> {
    if !params.is_untruncated() {
        return Ok(CertificateVerdict::without_certificate(
            CertificateStatus::NotApplicable,
            format!("r = {} exceeds min(p, q) = {}", params.r, params.p.min(params.q)),
        ));
    }
    let profile = layer_profile(&build_table(params, Family::Ball))?;
    if profile.tie {
        return Ok(CertificateVerdict::without_certificate(
            CertificateStatus::NotApplicable,
            format!("largest layer size is attained at heights {:?}", profile.argmax),
        ));
    }
    let argmax = largest_sphere_sublayer(params, params.r)?;
    let mut starts = vec![argmax.rounding_coord];
    starts.extend(argmax.coords.iter().filter(|&&x| x != argmax.rounding_coord));
    let mut failures = Vec::new();
    for start in starts {
        let verdict = zigzag_from(params, start)?;
        if verdict.status.is_certified() {
            return Ok(verdict);
        }
        failures.push(verdict.diagnostics);
    }
    Ok(CertificateVerdict::without_certificate(
        CertificateStatus::Infeasible,
        failures.join("; "),
    ))
}
