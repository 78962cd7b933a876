use super::*;
use crate::antichain::{is_unique_max_antichain, width, AntichainWitness, ChainPartition};
use crate::combinatorics::binomial;
use crate::poset::{build_ball, PosetElement};

fn gp(p: u32, q: u32, r: u32) -> GroundParams {
    GroundParams::new(p, q, r).unwrap()
}

fn c(i: u32, j: u32) -> SublayerCoord {
    SublayerCoord::new(i, j)
}

fn ball(p: u32, q: u32, r: u32) -> (SublayerTable, QuotientDag) {
    let g = gp(p, q, r);
    (build_table(&g, Family::Ball), quotient_dag(&g, &Family::Ball).unwrap())
}

fn small_certificate() -> Certificate {
    let (table, dag) = ball(1, 2, 1);
    certificate_search(&dag, &table, 2, false).unwrap().certificate.unwrap()
}

#[test]
fn search_small_ball() {
    let (table, dag) = ball(1, 2, 1);
    for strict in [false, true] {
        let v = certificate_search(&dag, &table, 2, strict).unwrap();
        assert_eq!(v.status, CertificateStatus::CertifiedStrict);
        let cert = v.certificate.unwrap();
        assert_eq!(cert.profiles.len(), 1);
        assert_eq!(cert.profiles[0].profile.path, vec![c(1, 0), c(0, 0), c(0, 1)]);
        assert_eq!(cert.profiles[0].multiplicity, 2u32.into());
        assert!(cert.coverage.values().all(|n| *n == 2u32.into()));
    }
    let v = certificate_search(&dag, &table, 0, false).unwrap();
    assert_eq!(v.status, CertificateStatus::Infeasible);
    assert!(v.certificate.is_none());
}

#[test]
fn search_radius_zero() {
    let (table, dag) = ball(4, 6, 0);
    let v = certificate_search(&dag, &table, 0, false).unwrap();
    assert_eq!(v.status, CertificateStatus::Certified);
    let cert = v.certificate.unwrap();
    assert_eq!(cert.profiles.len(), 1);
    assert_eq!(cert.profiles[0].profile.path, vec![c(0, 0)]);
    assert_eq!(cert.profiles[0].multiplicity, 1u32.into());
}

#[test]
fn missing_target_is_refused() {
    let (table, dag) = ball(1, 2, 1);
    assert!(matches!(
        certificate_search(&dag, &table, 3, false),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn check_rejects_perturbations() {
    let (table, dag) = ball(1, 2, 1);
    let cert = small_certificate();
    assert!(certificate_check(&cert, &table, &dag).unwrap());

    let mut lowered = cert.clone();
    lowered.coverage.insert(c(0, 0), 1u32.into());
    assert!(!certificate_check(&lowered, &table, &dag).unwrap());

    let mut moved = cert.clone();
    moved.target_height = 1;
    assert!(!certificate_check(&moved, &table, &dag).unwrap());
    let why = certificate_violation(&moved, &table, &dag).unwrap().unwrap();
    assert!(why.contains("(0,0)"), "{why}");

    let mut zero = cert.clone();
    zero.profiles[0].multiplicity = 0u32.into();
    assert!(!certificate_check(&zero, &table, &dag).unwrap());

    let mut stray = cert.clone();
    stray.coverage.insert(c(5, 5), 1u32.into());
    assert!(matches!(certificate_check(&stray, &table, &dag), Err(Error::Format(_))));
}

#[test]
fn check_catches_broken_paths() {
    let (table, dag) = ball(2, 2, 1);
    // skips height 1
    let cert = Certificate::from_profiles(
        0,
        vec![WeightedProfile {
            profile: ChainProfile { path: vec![c(1, 0), c(0, 1)] },
            multiplicity: 2u32.into(),
        }],
    );
    assert!(!certificate_check(&cert, &table, &dag).unwrap());
}

#[test]
fn certificate_json_round_trip() {
    let cert = small_certificate();
    let text = cert.to_json();
    assert_eq!(
        text,
        r#"{"target_height":2,"profiles":[{"path":[[1,0],[0,0],[0,1]],"multiplicity":"2"}],"coverage":[{"coord":[0,0],"count":"2"},{"coord":[0,1],"count":"2"},{"coord":[1,0],"count":"2"}]}"#
    );
    let back = Certificate::from_json(&text).unwrap();
    assert_eq!(back, cert);
    let (table, dag) = ball(1, 2, 1);
    assert!(certificate_check(&back, &table, &dag).unwrap());
    assert!(matches!(
        Certificate::from_json(&text.replace("\"2\"", "\"two\"")),
        Err(Error::Format(_))
    ));
}

#[test]
fn certified_width_examples() {
    let (v, size) = certified_width(&gp(1, 2, 1)).unwrap();
    assert_eq!(v.status, CertificateStatus::CertifiedStrict);
    assert_eq!(size, 2u32.into());

    let (v, size) = certified_width(&gp(5, 8, 4)).unwrap();
    assert!(v.status.is_certified(), "{}", v.diagnostics);
    assert_eq!(size, 321u32.into());
    assert_eq!(v.certificate.unwrap().target_height, 4);

    for (p, q) in [(1, 1), (3, 7), (6, 2)] {
        let (v, size) = certified_width(&gp(p, q, 0)).unwrap();
        assert_eq!(v.status, CertificateStatus::Certified);
        assert_eq!(size, 1u32.into());
    }

    let (v, size) = certified_width(&gp(2, 2, 1)).unwrap();
    assert_eq!(v.status, CertificateStatus::NotApplicable);
    assert_eq!(size, 2u32.into());

    let (v, _) = certified_width(&gp(1, 5, 3)).unwrap();
    assert_eq!(v.status, CertificateStatus::NotApplicable);
}

#[test]
fn certificates_agree_with_oracle_width() {
    for n in 2..=9u32 {
        for p in 1..n {
            let q = n - p;
            for r in 1..=p.min(q) {
                let g = gp(p, q, r);
                let (v, size) = certified_width(&g).unwrap();
                if !v.status.is_certified() {
                    continue;
                }
                let inst = build_ball(&g).unwrap();
                let (w, _) = width(&inst).unwrap();
                assert_eq!(BigUint::from(w), size, "{g}");
                let (table, dag) = ball(p, q, r);
                let cert = v.certificate.as_ref().unwrap();
                assert!(certificate_check(cert, &table, &dag).unwrap());
                if v.status == CertificateStatus::CertifiedStrict {
                    let layer = AntichainWitness::new(inst.layers()[&cert.target_height].clone());
                    assert!(is_unique_max_antichain(&inst, &layer).unwrap(), "{g}");
                }
            }
        }
    }
}

#[test]
fn zigzag_margins_for_b4_5_8() {
    let g = gp(5, 8, 4);
    let v = zigzag_from(&g, c(1, 3)).unwrap();
    assert_eq!(v.status, CertificateStatus::Infeasible);
    assert!(v.diagnostics.contains("(1,3) is -40"), "{}", v.diagnostics);

    let v = zigzag_from(&g, c(2, 2)).unwrap();
    assert!(v.diagnostics.contains("(2,2) 190"), "{}", v.diagnostics);
    assert_eq!(v.status, CertificateStatus::Certified, "{}", v.diagnostics);
    let (table, dag) = ball(5, 8, 4);
    let cert = v.certificate.unwrap();
    assert!(certificate_check(&cert, &table, &dag).unwrap());
    assert_eq!(cert.target_height, 4);
    assert_eq!(cert.total(), 321u32.into());

    let v = zigzag_certificate(&g).unwrap();
    assert!(v.status.is_certified());
}

#[test]
fn zigzag_radius_zero() {
    for (p, q) in [(1, 1), (4, 2), (2, 9)] {
        let v = zigzag_certificate(&gp(p, q, 0)).unwrap();
        assert_eq!(v.status, CertificateStatus::Certified);
    }
}

#[test]
fn zigzag_certificates_always_check() {
    let mut certified = 0;
    for p in 1..=9u32 {
        for q in 1..=9u32 {
            for r in 1..=p.min(q) {
                let g = gp(p, q, r);
                let v = zigzag_certificate(&g).unwrap();
                if let Some(cert) = &v.certificate {
                    let (table, dag) = ball(p, q, r);
                    assert!(certificate_check(cert, &table, &dag).unwrap(), "{g}");
                    let (_, size) = certified_width(&g).unwrap();
                    assert_eq!(cert.total(), size, "{g}");
                    certified += 1;
                }
            }
        }
    }
    assert!(certified > 0);
}

#[test]
fn zigzag_mirrors_for_wide_center() {
    let a = zigzag_certificate(&gp(5, 8, 4)).unwrap();
    let b = zigzag_certificate(&gp(8, 5, 4)).unwrap();
    assert_eq!(a.status, b.status);
    let (ca, cb) = (a.certificate.unwrap(), b.certificate.unwrap());
    assert_eq!(ca.target_height + cb.target_height, 8);
    assert_eq!(ca.total(), cb.total());
}

#[test]
fn theorem_bound_examples() {
    assert_eq!(theorem_bound(&gp(5, 8, 4)).unwrap(), 321u32.into());
    assert_eq!(theorem_bound(&gp(5, 8, 1)).unwrap(), 8u32.into());
    assert_eq!(theorem_bound(&gp(3, 3, 0)).unwrap(), 1u32.into());
    assert!(theorem_bound(&gp(1, 5, 3)).is_err());
}

#[test]
fn realize_small_profiles() {
    let g = gp(1, 2, 1);
    let chain = realize_chain(&ChainProfile { path: vec![c(1, 0), c(0, 0), c(0, 1)] }, &g).unwrap();
    let sets: Vec<Vec<u32>> = chain.iter().map(|x| x.to_subset(1)).collect();
    assert_eq!(sets, vec![vec![], vec![1], vec![1, 2]]);

    let chain = realize_chain(&ChainProfile { path: vec![c(0, 0)] }, &gp(3, 4, 2)).unwrap();
    assert_eq!(chain, vec![PosetElement::new(0, 0)]);
    assert_eq!(chain[0].to_subset(3), vec![1, 2, 3]);

    let g = gp(2, 2, 2);
    let chain = realize_chain(&ChainProfile { path: vec![c(2, 0), c(1, 1), c(0, 2)] }, &g).unwrap();
    assert_eq!(chain.iter().map(|x| x.coord()).collect::<Vec<_>>(), vec![c(2, 0), c(1, 1), c(0, 2)]);
    assert!(chain.windows(2).all(|w| w[0].leq(&w[1]) && w[0] != w[1]));

    let bad = ChainProfile { path: vec![c(0, 1), c(1, 1)] };
    assert!(matches!(realize_chain(&bad, &gp(2, 2, 2)), Err(Error::Profile(_))));
    let outside = ChainProfile { path: vec![c(3, 0)] };
    assert!(matches!(realize_chain(&outside, &gp(2, 2, 2)), Err(Error::Profile(_))));
}

#[test]
fn realized_certificate_chains_follow_their_profiles() {
    let g = gp(5, 8, 4);
    let (v, _) = certified_width(&g).unwrap();
    for wp in v.certificate.unwrap().profiles {
        let chain = realize_chain(&wp.profile, &g).unwrap();
        assert_eq!(chain.iter().map(|x| x.coord()).collect::<Vec<_>>(), wp.profile.path);
        assert!(chain.windows(2).all(|w| w[0].leq(&w[1]) && w[0] != w[1]));
    }
}

#[test]
fn gk_small_cases() {
    assert_eq!(gk_partition(1).unwrap().chains, vec![vec![0, 1]]);
    assert_eq!(gk_partition(2).unwrap().chains, vec![vec![0, 1, 3], vec![2]]);
    assert_eq!(gk_partition(0).unwrap().chains, vec![vec![0]]);
    assert!(matches!(gk_partition(23), Err(Error::BudgetExceeded { .. })));
}

/// Symmetric chain cover of the power set, checked directly.
fn assert_symmetric_chain_cover(n: u32, chains: &[Vec<usize>]) {
    let subset = |a: usize, b: usize| a & !b == 0 && a != b;
    ChainPartition { chains: chains.to_vec() }.verify(1 << n, subset).unwrap();
    assert_eq!(BigUint::from(chains.len()), binomial(n as u64, (n / 2) as u64));
    for chain in chains {
        let lo = chain[0].count_ones();
        let hi = chain.last().unwrap().count_ones();
        assert_eq!(lo + hi, n, "chain is not symmetric");
        assert_eq!((hi - lo) as usize + 1, chain.len(), "chain skips a rank");
    }
}

#[test]
fn gk_partitions_are_symmetric_chain_covers() {
    for n in 0..=12 {
        assert_symmetric_chain_cover(n, &gk_partition(n).unwrap().chains);
    }
}

#[test]
fn bound_dominates_oracle_width() {
    for n in 2..=9u32 {
        for p in 1..n {
            let q = n - p;
            for r in 0..=p.min(q) {
                let g = gp(p, q, r);
                let (w, _) = width(&build_ball(&g).unwrap()).unwrap();
                assert!(BigUint::from(w) <= theorem_bound(&g).unwrap(), "{g}");
            }
        }
    }
}
