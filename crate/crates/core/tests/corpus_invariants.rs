use std::path::PathBuf;

use crformal::input::{load_manifold, load_map, NamedManifold};
use crformal::nondegeneracy::{self, finite_nondegeneracy_order, FiniteOrder};
use crformal::reflection::{char_variety, determinant_d, normal_components, reflection_identities, validate_cr_map};
use crformal::segre::{build_chains, decide_minimality, membership_residual, restriction_defect};
use crformal::series::TruncatedSeries;
use num_traits::Zero;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn manifolds(cap: u32) -> Vec<NamedManifold> {
    ["lewy.mfd", "leviflat.mfd", "quartic.mfd", "cylinder.mfd"]
        .iter()
        .map(|f| load_manifold(&corpus(f), cap).unwrap())
        .collect()
}

#[test]
fn complexification_invariants() {
    for named in manifolds(10) {
        let m = &named.manifold;
        assert!(m.check_reality_identity().unwrap(), "{}", named.name);
        for r in m.rho() {
            assert!(m.restrict_to_m(r).unwrap().is_zero());
            for j in 0..m.cr_dim() {
                let lr = m.fields().apply(j, r).unwrap();
                assert!(m.restrict_to_m(&lr).unwrap().is_zero());
            }
        }
        for j in 0..m.cr_dim() {
            let coeffs = m.fields().coeffs(j);
            for (i, c) in coeffs[..m.cr_dim()].iter().enumerate() {
                assert_eq!(c.to_string(), if i == j { "1" } else { "0" });
            }
        }
    }
}

#[test]
fn segre_invariants() {
    for named in manifolds(10) {
        let m = &named.manifold;
        let d_max = 2 * (m.codim() + 1);
        let chains = build_chains(m, d_max + 1).unwrap();
        let mut last = 0;
        for c in &chains {
            let r = c.rank().unwrap();
            assert!(r >= last && r <= m.n(), "{}: ranks not monotone", named.name);
            last = r;
            assert!(c.map().iter().all(|s| s.constant_term().is_zero()));
        }
        for b in 0..=d_max {
            let res = membership_residual(m, &chains[b], &chains[b + 1]).unwrap();
            assert!(res.iter().all(TruncatedSeries::is_zero), "{} b = {b}", named.name);
        }
        for d in 0..=2 {
            let res = restriction_defect(m, &chains[d + 1], &chains[d + 3]).unwrap();
            assert!(res.iter().all(TruncatedSeries::is_zero), "{} d = {d}", named.name);
        }
    }
}

#[test]
fn minimality_is_seed_independent() {
    for named in manifolds(8) {
        let a = decide_minimality(&named.manifold, 4, 1).unwrap();
        let b = decide_minimality(&named.manifold, 4, 99).unwrap();
        assert_eq!(a.status, b.status);
    }
}

#[test]
fn nondegeneracy_invariants() {
    for named in manifolds(10) {
        let m = &named.manifold;
        let r = nondegeneracy::analyze(m, 9, 9).unwrap();
        assert!(r.finite.span_trace.windows(2).all(|w| w[0] <= w[1]));
        let ranks: Vec<usize> = r.holomorphic.r_trace.iter().map(|&(_, x)| x).collect();
        assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.cross_check_holo_vs_degeneracy, "{}", named.name);
        assert!(r.cross_check_finite_implies_holo, "{}", named.name);
        assert_eq!(r.certificate_rank, m.n() - r.degeneracy.degeneracy);
        // d(M) is already stable one step earlier
        let earlier = nondegeneracy::degeneracy(m, 8).unwrap();
        assert_eq!(earlier.degeneracy, r.degeneracy.degeneracy);
    }
}

#[test]
fn reflection_invariants_on_cr_maps() {
    for file in ["identity_lewy.map", "dilation_lewy.map"] {
        let loaded = load_map(&corpus(file), 10, None, None).unwrap();
        let (m, m2, f) = (&loaded.source.manifold, &loaded.target.manifold, &loaded.map);
        assert!(validate_cr_map(f, m, m2).unwrap().valid);
        let d = determinant_d(f, m).unwrap();
        assert!(f.nondegenerate());
        assert!(d.nonvanishing_on_m());
        let ids = reflection_identities(f, m, m2, 8).unwrap();
        assert_eq!(ids.len(), 9);
        for id in &ids {
            assert!(id.holds(), "{file}: alpha {:?}", id.alpha);
        }
        let nc = normal_components(f, m2).unwrap();
        assert!(nc.matches());
    }
}

#[test]
fn char_variety_at_finite_nondegeneracy_order() {
    let loaded = load_map(&corpus("identity_lewy.map"), 10, None, None).unwrap();
    let m = &loaded.source.manifold;
    let FiniteOrder::Order(k) = finite_nondegeneracy_order(m, 9).unwrap().status else {
        panic!("lewy is finitely nondegenerate");
    };
    let cv = char_variety(&loaded.map, m, &loaded.target.manifold, k).unwrap();
    assert!(cv.zero_dim_certified);
}
