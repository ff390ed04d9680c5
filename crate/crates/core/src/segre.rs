//! Segre set mappings `v_d` and the minimality test at the origin.
//!
//! `v_0 = 0` and `v_{k+1}(t_1, …, t_{k+1}) = (t_1, Φ(v̄_k(t_2, …, t_{k+1}), t_1))`,
//! each `t_i ∈ ℂᴺ`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::GenericManifold;
use crate::matrix::{generic_rank, sampled_rank, SeriesMatrix};
use crate::series::{vars, TruncatedSeries, Vars};

#[derive(Clone, Debug)]
pub struct SegreChain {
    d: usize,
    map: Vec<TruncatedSeries>,
    params: Vars,
    cap: u32,
}

impl SegreChain {
    pub fn d(&self) -> usize {
        self.d
    }

    /// The `n` components of `v_d`.
    pub fn map(&self) -> &[TruncatedSeries] {
        &self.map
    }

    pub fn params(&self) -> &Vars {
        &self.params
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Generic rank of the Jacobian of `v_d` in all `dN` parameters.
    pub fn rank(&self) -> Result<usize> {
        if self.d == 0 {
            return Ok(0);
        }
        Ok(generic_rank(&SeriesMatrix::full_jacobian(&self.map)?))
    }

    /// Rank of the Jacobian at a random integer point; never exceeds
    /// [`rank`](Self::rank).
    pub fn sampled_rank(&self, rng: &mut ChaCha8Rng) -> Result<usize> {
        if self.d == 0 {
            return Ok(0);
        }
        Ok(sampled_rank(&SeriesMatrix::full_jacobian(&self.map)?, rng))
    }
}

/// Parameter names for `v_d`: `t1..td` when `N = 1`, else `t{i}_{k}`.
pub fn chain_params(d: usize, cr: usize) -> Vars {
    vars((1..=d).flat_map(|i| {
        (1..=cr).map(move |k| {
            if cr == 1 {
                format!("t{i}")
            } else {
                format!("t{i}_{k}")
            }
        })
    }))
}

/// Builds `v_0, …, v_d`.
pub fn build_chains(m: &GenericManifold, d: usize) -> Result<Vec<SegreChain>> {
    let (n, cr, cap) = (m.n(), m.cr_dim(), m.cap());
    let mut chains = vec![SegreChain {
        d: 0,
        map: (0..n).map(|_| TruncatedSeries::zero(&chain_params(0, cr), cap)).collect(),
        params: chain_params(0, cr),
        cap,
    }];
    for k in 0..d {
        let prev = &chains[k];
        let params = chain_params(k + 1, cr);
        let shifted: Vec<usize> = (0..k * cr).map(|i| cr + i).collect();
        let mut args = Vec::with_capacity(n + cr);
        for comp in &prev.map {
            args.push(comp.bar().embed(&params, &shifted)?);
        }
        let t1: Vec<TruncatedSeries> = (0..cr).map(|i| TruncatedSeries::var(&params, cap, i)).collect();
        args.extend(t1.iter().cloned());
        let mut map = t1;
        for p in m.phi() {
            map.push(p.compose_into(&params, &args)?);
        }
        let c = map.iter().map(TruncatedSeries::cap).min().unwrap_or(cap);
        if c == 0 {
            return Err(Error::cap(format!("Segre chain v_{} certified below degree 1", k + 1)));
        }
        chains.push(SegreChain { d: k + 1, map, params, cap: c });
    }
    Ok(chains)
}

pub fn build_chain(m: &GenericManifold, d: usize) -> Result<SegreChain> {
    Ok(build_chains(m, d)?.pop().expect("chain list is never empty"))
}

/// `ρ(v_{b+1}(t_1..t_{b+1}), v̄_b(t_2..t_{b+1})) ≡ 0`, given `v_b` and `v_{b+1}`.
pub fn membership_residual(
    m: &GenericManifold,
    vb: &SegreChain,
    vb1: &SegreChain,
) -> Result<Vec<TruncatedSeries>> {
    if vb1.d != vb.d + 1 {
        return Err(Error::Precondition("membership needs consecutive chains".into()));
    }
    let cr = m.cr_dim();
    let params = &vb1.params;
    let shifted: Vec<usize> = (0..vb.d * cr).map(|i| cr + i).collect();
    let mut args: Vec<TruncatedSeries> = vb1.map.clone();
    for comp in &vb.map {
        args.push(comp.bar().embed(params, &shifted)?);
    }
    m.rho().iter().map(|r| r.compose_into(params, &args)).collect()
}

pub fn check_membership(m: &GenericManifold, b: usize) -> Result<bool> {
    let chains = build_chains(m, b + 1)?;
    Ok(membership_residual(m, &chains[b], &chains[b + 1])?
        .iter()
        .all(TruncatedSeries::is_zero))
}

/// `v_{d+3}(t_3, t_2, t_3, …, t_{d+3}) − v_{d+1}(t_3, …, t_{d+3})`, given
/// both chains.
pub fn restriction_defect(
    m: &GenericManifold,
    short: &SegreChain,
    long: &SegreChain,
) -> Result<Vec<TruncatedSeries>> {
    if long.d != short.d + 2 {
        return Err(Error::Precondition("restriction identity needs v_d and v_(d+2)".into()));
    }
    let cr = m.cr_dim();
    let params = &long.params;
    let cap = long.cap;
    let args: Vec<TruncatedSeries> = (0..long.d * cr)
        .map(|i| {
            let j = if i < cr { 2 * cr + i } else { i };
            TruncatedSeries::var(params, cap, j)
        })
        .collect();
    let shifted: Vec<usize> = (0..short.d * cr).map(|i| 2 * cr + i).collect();
    long.map
        .iter()
        .zip(&short.map)
        .map(|(l, s)| {
            let lhs = l.compose_into(params, &args)?;
            let rhs = s.embed(params, &shifted)?;
            let c = lhs.cap().min(rhs.cap());
            lhs.with_cap(c)?.sub(&rhs.with_cap(c)?)
        })
        .collect()
}

pub fn restriction_identity(m: &GenericManifold, d: usize) -> Result<bool> {
    let chains = build_chains(m, d + 3)?;
    Ok(restriction_defect(m, &chains[d + 1], &chains[d + 3])?
        .iter()
        .all(TruncatedSeries::is_zero))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "d")]
pub enum MinimalityStatus {
    Minimal(usize),
    NotMinimalAtCap,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankStep {
    pub d: usize,
    pub rank: usize,
    pub sampled_rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityVerdict {
    #[serde(flatten)]
    pub status: MinimalityStatus,
    pub rank_trace: Vec<RankStep>,
    pub certified_degree: u32,
    pub d_max: usize,
}

pub fn default_d_max(m: &GenericManifold) -> usize {
    2 * (m.codim() + 1)
}

/// Ranks of `v_1, v_2, …` until the rank reaches `n`, stops growing, or
/// `d_max` is reached.
pub fn decide_minimality(m: &GenericManifold, d_max: usize, seed: u64) -> Result<MinimalityVerdict> {
    if d_max == 0 {
        return Err(Error::Precondition("d_max must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chains = build_chains(m, d_max)?;
    let mut trace: Vec<RankStep> = Vec::new();
    let mut status = MinimalityStatus::Inconclusive;
    for chain in &chains[1..] {
        let rank = chain.rank()?;
        let sampled = chain.sampled_rank(&mut rng)?;
        let prev = trace.last().map(|s| s.rank);
        trace.push(RankStep { d: chain.d, rank, sampled_rank: sampled });
        if rank == m.n() {
            status = MinimalityStatus::Minimal(chain.d);
            break;
        }
        if prev == Some(rank) {
            status = MinimalityStatus::NotMinimalAtCap;
            break;
        }
    }
    let certified_degree = chains.iter().map(SegreChain::cap).min().unwrap_or(m.cap());
    Ok(MinimalityVerdict { status, rank_trace: trace, certified_degree, d_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::*;

    #[test]
    fn lewy_chains() {
        let m = lewy(8);
        let c = build_chains(&m, 2).unwrap();
        assert!(c[0].map().iter().all(TruncatedSeries::is_zero));
        assert_eq!(c[1].map()[0].to_string(), "t1");
        assert!(c[1].map()[1].is_zero());
        assert_eq!(c[2].map()[1].to_string(), "2*i*t1*t2");
        assert_eq!(c[2].rank().unwrap(), 2);
    }

    #[test]
    fn membership_examples() {
        for m in [lewy(8), leviflat(8), quartic(8), cylinder(6)] {
            for b in 0..=3 {
                assert!(check_membership(&m, b).unwrap(), "b = {b}");
            }
        }
    }

    #[test]
    fn restriction_identity_examples() {
        for m in [lewy(8), leviflat(8), quartic(8)] {
            assert!(restriction_identity(&m, 0).unwrap());
            assert!(restriction_identity(&m, 1).unwrap());
        }
        let m = lewy(8);
        let c = build_chains(&m, 3).unwrap();
        assert_eq!(c[3].map()[1].to_string(), "2*i*t1*t2 - 2*i*t2*t3");
    }

    #[test]
    fn minimality_examples() {
        let v = decide_minimality(&lewy(8), 4, 1).unwrap();
        assert_eq!(v.status, MinimalityStatus::Minimal(2));
        let ranks: Vec<_> = v.rank_trace.iter().map(|s| (s.d, s.rank)).collect();
        assert_eq!(ranks, vec![(1, 1), (2, 2)]);

        let v = decide_minimality(&leviflat(8), 4, 1).unwrap();
        assert_eq!(v.status, MinimalityStatus::NotMinimalAtCap);
        assert!(v.rank_trace.iter().all(|s| s.rank == 1));

        let v = decide_minimality(&quartic(8), 4, 1).unwrap();
        assert_eq!(v.status, MinimalityStatus::Minimal(2));
        assert_eq!(
            build_chain(&quartic(8), 2).unwrap().map()[1].to_string(),
            "2*i*t1^2*t2^2"
        );

        let v = decide_minimality(&cylinder(6), 4, 1).unwrap();
        assert_eq!(v.status, MinimalityStatus::Minimal(2));
    }

    #[test]
    fn inconclusive_when_d_max_too_small() {
        let v = decide_minimality(&lewy(8), 1, 1).unwrap();
        assert_eq!(v.status, MinimalityStatus::Inconclusive);
    }

    #[test]
    fn sampled_rank_never_exceeds_generic() {
        for m in [lewy(6), quartic(6), cylinder(6)] {
            let v = decide_minimality(&m, 4, 7).unwrap();
            for s in &v.rank_trace {
                assert!(s.sampled_rank <= s.rank);
            }
        }
    }

    #[test]
    fn verdict_invariant_under_linear_change_of_z_prime() {
        // z1 ↦ (1 + i) z1 on the Lewy quadric: Im z2 = 2|z1|².
        let m = build(2, &["(z2 - zb2)/(2*i) - 2*z1*zb1"], 8);
        let v = decide_minimality(&m, 4, 1).unwrap();
        assert_eq!(v.status, MinimalityStatus::Minimal(2));
        // z′ rotation on the cylinder: z1 ↦ z1 + z2, z2 ↦ z2.
        let m = build(
            3,
            &["(z3 - zb3)/(2*i) - (z1 + z2)*(zb1 + zb2)"],
            6,
        );
        assert_eq!(decide_minimality(&m, 4, 1).unwrap().status, MinimalityStatus::Minimal(2));
    }
}
