//! Rank invariants of a generic submanifold at the origin: finite
//! nondegeneracy, the jet maps `ψ_l` and the Levi-type, holomorphic
//! nondegeneracy and the degeneracy `d(M)`.

use serde::Serialize;

use crate::coeff::GaussRational;
use crate::error::{Error, Result};
use crate::manifold::{omega_theta_vars, GenericManifold};
use crate::matrix::{field_rank, generic_rank, SeriesMatrix};
use crate::monomial::exponents_up_to;
use crate::series::{vars, TruncatedSeries, Vars};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "k")]
pub enum FiniteOrder {
    Order(usize),
    NotUpToCap,
}

#[derive(Clone, Debug, Serialize)]
pub struct JetSpanRecord {
    #[serde(flatten)]
    pub status: FiniteOrder,
    /// `span_trace[k]` is the span dimension using `|α| ≤ k`.
    pub span_trace: Vec<usize>,
    /// The vectors `L^α ρ_{j,z}(0, 0)` as `(α, j, vector)`.
    #[serde(skip)]
    pub vectors: Vec<(Vec<u32>, usize, Vec<GaussRational>)>,
    pub k_max: usize,
    pub certified_degree: u32,
}

impl JetSpanRecord {
    pub fn span_dim(&self) -> usize {
        self.span_trace.last().copied().unwrap_or(0)
    }
}

pub fn default_k_max(m: &GenericManifold) -> usize {
    m.cap().saturating_sub(1) as usize
}

/// Accumulates `span{L^α ρ_{j,z}(0,0) : |α| ≤ k}` for `k = 0, 1, …` and
/// reports the first `k` at which it is all of `ℂⁿ`.
pub fn finite_nondegeneracy_order(m: &GenericManifold, k_max: usize) -> Result<JetSpanRecord> {
    let (n, cr) = (m.n(), m.cr_dim());
    if k_max + 1 > m.cap() as usize {
        return Err(Error::cap(format!(
            "jets of order {k_max} need degree cap at least {}",
            k_max + 1
        )));
    }
    let grads = m.z_gradients()?;
    let mut level: Vec<(Vec<u32>, Vec<Vec<TruncatedSeries>>)> = vec![(vec![0; cr], grads)];
    let mut vectors = Vec::new();
    let mut rows: Vec<Vec<GaussRational>> = Vec::new();
    let mut span_trace = Vec::new();
    let mut status = FiniteOrder::NotUpToCap;
    for k in 0..=k_max {
        if k > 0 {
            level = next_level(m, &level)?;
        }
        for (alpha, per_j) in &level {
            for (j, grad) in per_j.iter().enumerate() {
                let v: Vec<GaussRational> = grad.iter().map(TruncatedSeries::constant_term).collect();
                rows.push(v.clone());
                vectors.push((alpha.clone(), j, v));
            }
        }
        span_trace.push(field_rank(&rows));
        if span_trace[k] == n {
            status = FiniteOrder::Order(k);
            break;
        }
        if level
            .iter()
            .all(|(_, per_j)| per_j.iter().flatten().all(TruncatedSeries::is_zero))
        {
            // every higher jet vanishes as well
            span_trace.resize(k_max + 1, span_trace[k]);
            break;
        }
    }
    Ok(JetSpanRecord {
        status,
        span_trace,
        vectors,
        k_max,
        certified_degree: m.cap(),
    })
}

type JetEntry = (Vec<u32>, Vec<Vec<TruncatedSeries>>);

/// Multi-indices of the next order, each reached from its predecessor by
/// `L_j` with `j` the last nonzero slot.
fn next_level(m: &GenericManifold, level: &[JetEntry]) -> Result<Vec<JetEntry>> {
    let cr = m.cr_dim();
    let mut out = Vec::new();
    for (alpha, per_j) in level {
        let last = alpha.iter().rposition(|&a| a > 0).unwrap_or(0);
        for j in last..cr {
            let mut beta = alpha.clone();
            beta[j] += 1;
            let applied = per_j
                .iter()
                .map(|g| g.iter().map(|s| m.fields().apply(j, s)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            out.push((beta, applied));
        }
    }
    out.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(out)
}

/// Coefficients `q_{β,ν}(ω)` of `θ^β` in `Φ̄_ν(ω, θ)`.
#[derive(Clone, Debug)]
pub struct SegreCoefficientFamily {
    pub l: usize,
    pub omega: Vars,
    /// `(β, ν, q_{β,ν})` in graded order of `β`, then `ν`.
    pub entries: Vec<(Vec<u32>, usize, TruncatedSeries)>,
}

impl SegreCoefficientFamily {
    pub fn get(&self, beta: &[u32], nu: usize) -> Option<&TruncatedSeries> {
        self.entries
            .iter()
            .find(|(b, v, _)| b == beta && *v == nu)
            .map(|(_, _, q)| q)
    }
}

pub fn omega_vars(n: usize) -> Vars {
    vars((1..=n).map(|k| format!("omega{k}")))
}

pub fn segre_coefficients(m: &GenericManifold, l: usize) -> Result<SegreCoefficientFamily> {
    let (n, cr) = (m.n(), m.cr_dim());
    if l > m.cap() as usize {
        return Err(Error::cap(format!("theta-coefficients of order {l} exceed the cap {}", m.cap())));
    }
    let conj = m.conj_graph()?;
    let omega = omega_vars(n);
    let theta: Vec<usize> = (n..n + cr).collect();
    let mut entries = Vec::new();
    for beta in exponents_up_to(cr, l as u32) {
        for (nu, p) in conj.iter().enumerate() {
            entries.push((beta.clone(), nu, p.coefficient_in(&theta, &beta, &omega)?));
        }
    }
    Ok(SegreCoefficientFamily { l, omega, entries })
}

/// Generic rank `r_l` of `ψ_l(ω, θ) = (θ, (∂^β_θ Φ̄_ν(ω, θ))_{|β| ≤ l, ν})`.
pub fn psi_rank(m: &GenericManifold, l: usize) -> Result<usize> {
    let (n, cr) = (m.n(), m.cr_dim());
    if l + 1 > m.cap() as usize {
        return Err(Error::cap(format!("psi_{l} needs degree cap at least {}", l + 1)));
    }
    let conj = m.conj_graph()?;
    let ot = omega_theta_vars(n, cr);
    let mut comps: Vec<TruncatedSeries> = (0..cr)
        .map(|k| TruncatedSeries::var(&ot, m.cap(), n + k))
        .collect();
    for beta in exponents_up_to(cr, l as u32) {
        for p in &conj {
            let mut d = p.clone();
            for (k, &b) in beta.iter().enumerate() {
                for _ in 0..b {
                    d = d.derive_index(n + k)?;
                }
            }
            comps.push(d);
        }
    }
    Ok(generic_rank(&SeriesMatrix::full_jacobian(&comps)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct HolomorphicNondegeneracy {
    pub holo_nondeg: bool,
    pub levi_type: Option<usize>,
    pub r_trace: Vec<(usize, usize)>,
    pub r_m: usize,
    pub full_rank: usize,
    pub l_max: usize,
    pub certified_degree: u32,
}

/// Largest `l` for which `ψ_l` and the coefficient family can be formed at
/// the manifold's cap.
pub fn default_l_max(m: &GenericManifold) -> usize {
    m.cap().saturating_sub(1).max(1) as usize
}

/// Scans `r_1, …, r_{l_max}`, stopping early once `r_l = N + n`.
pub fn holomorphic_nondegeneracy(m: &GenericManifold, l_max: usize) -> Result<HolomorphicNondegeneracy> {
    if l_max == 0 {
        return Err(Error::Precondition("l_max must be at least 1".into()));
    }
    let full = m.cr_dim() + m.n();
    let mut r_trace = Vec::new();
    for l in 1..=l_max {
        let r = psi_rank(m, l)?;
        r_trace.push((l, r));
        if r == full {
            break;
        }
    }
    let r_m = r_trace.iter().map(|&(_, r)| r).max().unwrap_or(0);
    let holo = r_m == full;
    let levi_type = if holo {
        r_trace.iter().find(|&&(_, r)| r == r_m).map(|&(l, _)| l)
    } else {
        None
    };
    Ok(HolomorphicNondegeneracy {
        holo_nondeg: holo,
        levi_type,
        r_trace,
        r_m,
        full_rank: full,
        l_max,
        certified_degree: m.cap(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Degeneracy {
    pub degeneracy: usize,
    /// `(l, generic rank of ω ↦ (q_{β,ν}(ω))_{|β| ≤ l})`.
    pub rank_trace: Vec<(usize, usize)>,
    pub l_max: usize,
    pub certified_degree: u32,
}

fn coefficient_rank(family: &[&TruncatedSeries]) -> Result<usize> {
    if family.is_empty() {
        return Ok(0);
    }
    let owned: Vec<TruncatedSeries> = family.iter().map(|q| (*q).clone()).collect();
    Ok(generic_rank(&SeriesMatrix::full_jacobian(&owned)?))
}

/// `d(M) = n − max_l rank(ω ↦ (q_{β,ν}(ω))_{|β| ≤ l})`, stopping early at
/// rank `n`.
pub fn degeneracy(m: &GenericManifold, l_max: usize) -> Result<Degeneracy> {
    let n = m.n();
    if l_max + 1 > m.cap() as usize {
        return Err(Error::cap(format!("coefficients of order {l_max} need degree cap at least {}", l_max + 1)));
    }
    let fam = segre_coefficients(m, l_max)?;
    let mut trace = Vec::new();
    for l in 0..=l_max {
        let sel: Vec<&TruncatedSeries> = fam
            .entries
            .iter()
            .filter(|(b, _, _)| b.iter().sum::<u32>() as usize <= l)
            .map(|(_, _, q)| q)
            .collect();
        let r = coefficient_rank(&sel)?;
        trace.push((l, r));
        if r == n {
            break;
        }
    }
    let best = trace.iter().map(|&(_, r)| r).max().unwrap_or(0);
    Ok(Degeneracy {
        degeneracy: n - best,
        rank_trace: trace,
        l_max,
        certified_degree: m.cap(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateEntry {
    pub beta: Vec<u32>,
    /// 1-based component index.
    pub nu: usize,
    #[serde(skip)]
    pub function: TruncatedSeries,
}

/// Greedy choice of `n − d(M)` coefficient functions whose Jacobian has
/// generic rank `n − d(M)`.
pub fn certificate_family(m: &GenericManifold, deg: &Degeneracy) -> Result<Vec<CertificateEntry>> {
    let target = m.n() - deg.degeneracy;
    let l = deg.rank_trace.last().map(|&(l, _)| l).unwrap_or(0);
    let fam = segre_coefficients(m, l)?;
    let mut chosen: Vec<CertificateEntry> = Vec::new();
    for (beta, nu, q) in &fam.entries {
        if chosen.len() == target {
            break;
        }
        let mut trial: Vec<&TruncatedSeries> = chosen.iter().map(|c| &c.function).collect();
        trial.push(q);
        if coefficient_rank(&trial)? == trial.len() {
            chosen.push(CertificateEntry { beta: beta.clone(), nu: nu + 1, function: q.clone() });
        }
    }
    if chosen.len() != target {
        return Err(Error::Consistency(format!(
            "greedy certificate reached rank {} of {target}",
            chosen.len()
        )));
    }
    Ok(chosen)
}

#[derive(Clone, Debug, Serialize)]
pub struct NondegeneracyReport {
    pub finite: JetSpanRecord,
    pub holomorphic: HolomorphicNondegeneracy,
    pub degeneracy: Degeneracy,
    pub certificate: Vec<CertificateEntry>,
    /// Generic rank of the certificate family, recomputed on its own.
    pub certificate_rank: usize,
    /// Holomorphic nondegeneracy agrees with `d(M) = 0`.
    pub cross_check_holo_vs_degeneracy: bool,
    /// Finite nondegeneracy implies holomorphic nondegeneracy.
    pub cross_check_finite_implies_holo: bool,
}

pub fn analyze(m: &GenericManifold, k_max: usize, l_max: usize) -> Result<NondegeneracyReport> {
    let finite = finite_nondegeneracy_order(m, k_max)?;
    let holomorphic = holomorphic_nondegeneracy(m, l_max)?;
    let degeneracy = degeneracy(m, l_max)?;
    let certificate = certificate_family(m, &degeneracy)?;
    let funcs: Vec<&TruncatedSeries> = certificate.iter().map(|c| &c.function).collect();
    let certificate_rank = coefficient_rank(&funcs)?;
    let cross_holo = holomorphic.holo_nondeg == (degeneracy.degeneracy == 0);
    let cross_finite = !matches!(finite.status, FiniteOrder::Order(_)) || holomorphic.holo_nondeg;
    Ok(NondegeneracyReport {
        finite,
        holomorphic,
        degeneracy,
        certificate,
        certificate_rank,
        cross_check_holo_vs_degeneracy: cross_holo,
        cross_check_finite_implies_holo: cross_finite,
    })
}
