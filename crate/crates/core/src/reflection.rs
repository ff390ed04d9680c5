//! Formal CR maps `f: (M, 0) → (M′, 0)`: validation, the determinant `D`,
//! the reflection identities, the reflection mapping `(z, θ) ↦ Φ̄′(f(z), θ)`
//! and the characteristic variety test.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::coeff::GaussRational;
use crate::error::{Error, Result};
use crate::manifold::{omega_theta_vars, GenericManifold};
use crate::matrix::{field_rank, SeriesMatrix};
use crate::monomial::exponents_of_degree;
use crate::series::{vars, TruncatedSeries, Vars};

#[derive(Clone, Debug)]
pub struct FormalMapRecord {
    n_src: usize,
    n_tgt: usize,
    cr_tgt: usize,
    src_vars: Vars,
    f: Vec<TruncatedSeries>,
    jacobian: Option<TruncatedSeries>,
}

impl FormalMapRecord {
    /// `components` are given in the declared coordinates of both
    /// manifolds, as series in `z1..zn` of the source.
    pub fn new(
        components: Vec<TruncatedSeries>,
        src: &GenericManifold,
        tgt: &GenericManifold,
    ) -> Result<Self> {
        if src.cap() != tgt.cap() {
            return Err(Error::structural(format!(
                "source cap {} and target cap {} differ",
                src.cap(),
                tgt.cap()
            )));
        }
        let (n, n2) = (src.n(), tgt.n());
        if components.len() != n2 {
            return Err(Error::structural(format!(
                "{} map components for a target of dimension {n2}",
                components.len()
            )));
        }
        let zs = vars((1..=n).map(|k| format!("z{k}")));
        let mut positions = vec![0; n];
        for (k, &orig) in src.permutation().iter().enumerate() {
            positions[orig] = k;
        }
        let mut f = Vec::with_capacity(n2);
        for &orig in tgt.permutation() {
            let c = &components[orig];
            if c.nvars() != n {
                return Err(Error::structural("map components must be series in the source z"));
            }
            if !c.constant_term().is_zero() {
                return Err(Error::Precondition(format!(
                    "map component {} does not vanish at the origin",
                    orig + 1
                )));
            }
            let c = c.embed(&zs, &positions)?;
            f.push(c.with_cap(src.cap().min(c.cap()))?);
        }
        let jacobian = if n == n2 {
            Some(SeriesMatrix::full_jacobian(&f)?.det()?)
        } else {
            None
        };
        Ok(FormalMapRecord {
            n_src: n,
            n_tgt: n2,
            cr_tgt: tgt.cr_dim(),
            src_vars: zs,
            f,
            jacobian,
        })
    }

    pub fn n_src(&self) -> usize {
        self.n_src
    }

    pub fn n_tgt(&self) -> usize {
        self.n_tgt
    }

    /// Components in the target's split order.
    pub fn f(&self) -> &[TruncatedSeries] {
        &self.f
    }

    pub fn f_prime(&self) -> &[TruncatedSeries] {
        &self.f[..self.cr_tgt]
    }

    pub fn f_star(&self) -> &[TruncatedSeries] {
        &self.f[self.cr_tgt..]
    }

    pub fn src_vars(&self) -> &Vars {
        &self.src_vars
    }

    pub fn jacobian(&self) -> Option<&TruncatedSeries> {
        self.jacobian.as_ref()
    }

    /// `J_f ≢ 0` up to the cap.
    pub fn nondegenerate(&self) -> bool {
        self.jacobian.as_ref().is_some_and(|j| !j.is_zero())
    }

    /// `f(z)` as series in the source `(z, w)` space.
    fn f_on_zw(&self, zw: &Vars) -> Result<Vec<TruncatedSeries>> {
        let pos: Vec<usize> = (0..self.n_src).collect();
        self.f.iter().map(|c| c.embed(zw, &pos)).collect()
    }

    /// `f̄(w)` as series in the source `(z, w)` space, or any space whose
    /// `w` block starts at `n_src`.
    fn fbar_on(&self, target: &Vars) -> Result<Vec<TruncatedSeries>> {
        let pos: Vec<usize> = (0..self.n_src).map(|k| self.n_src + k).collect();
        self.f.iter().map(|c| c.bar().embed(target, &pos)).collect()
    }
}

fn term_string(vars: &Vars, exps: &[u32], c: &GaussRational) -> String {
    TruncatedSeries::from_terms(vars, crate::series::POLY_CAP, [(exps.to_vec(), c.clone())]).to_string()
}

#[derive(Clone, Debug, Serialize)]
pub struct CrValidation {
    pub valid: bool,
    /// `ρ′(f(z), f̄(w))` restricted to `ℳ`, one per component.
    #[serde(skip)]
    pub residuals: Vec<TruncatedSeries>,
    /// Component (1-based) and lowest nonzero term of the first nonzero residual.
    pub first_nonzero: Option<(usize, String)>,
    pub certified_degree: u32,
}

/// `f` is CR iff `ρ′(f(z), f̄(w))` vanishes on the complexification of `M`.
pub fn validate_cr_map(
    f: &FormalMapRecord,
    m: &GenericManifold,
    m2: &GenericManifold,
) -> Result<CrValidation> {
    if f.n_src != m.n() || f.n_tgt != m2.n() {
        return Err(Error::structural("map dimensions do not match the manifolds"));
    }
    if m.cap() != m2.cap() {
        return Err(Error::structural("source and target caps differ"));
    }
    let zw = m.zw();
    let mut args = f.f_on_zw(zw)?;
    args.extend(f.fbar_on(zw)?);
    let mut residuals = Vec::new();
    for r in m2.rho() {
        let composed = r.compose_into(zw, &args)?;
        residuals.push(m.restrict_to_m(&composed)?);
    }
    let first_nonzero = residuals.iter().enumerate().find_map(|(nu, r)| {
        r.first_term()
            .map(|(mono, c)| (nu + 1, term_string(r.vars(), mono.exps(), c)))
    });
    let certified_degree = residuals.iter().map(TruncatedSeries::cap).min().unwrap_or(m.cap());
    Ok(CrValidation {
        valid: first_nonzero.is_none(),
        residuals,
        first_nonzero,
        certified_degree,
    })
}

#[derive(Clone, Debug)]
pub struct DeterminantRecord {
    /// `A_{ji} = L_j f̄′_i(w)`.
    pub matrix: SeriesMatrix,
    pub d: TruncatedSeries,
    pub d_on_m: TruncatedSeries,
}

impl DeterminantRecord {
    pub fn nonvanishing_on_m(&self) -> bool {
        !self.d_on_m.is_zero()
    }
}

fn require_equidimensional(f: &FormalMapRecord, m: &GenericManifold) -> Result<()> {
    if f.n_src != f.n_tgt || f.n_src != m.n() || f.cr_tgt != m.cr_dim() {
        return Err(Error::structural(
            "the determinant D needs source and target of equal dimension and CR dimension",
        ));
    }
    Ok(())
}

/// `D(z, w) = det(L_j f̄′_i(w))`, together with its restriction to `ℳ`.
pub fn determinant_d(f: &FormalMapRecord, m: &GenericManifold) -> Result<DeterminantRecord> {
    require_equidimensional(f, m)?;
    let cr = m.cr_dim();
    let fbar = f.fbar_on(m.zw())?;
    let rows = (0..cr)
        .map(|j| (0..cr).map(|i| m.fields().apply(j, &fbar[i])).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let matrix = SeriesMatrix::from_rows(rows)?;
    let d = matrix.det()?;
    let d_on_m = m.restrict_to_m(&d)?;
    Ok(DeterminantRecord { matrix, d, d_on_m })
}

#[derive(Clone, Debug)]
pub struct ReflectionIdentity {
    pub alpha: Vec<u32>,
    /// `D^{2|α|−1} ∂^α_θ Φ̄′(f(z), f̄′(w))` on `ℳ` (no `D` factor for `α = 0`).
    pub lhs: Vec<TruncatedSeries>,
    /// `V_α` on `ℳ`.
    pub rhs: Vec<TruncatedSeries>,
    pub residual: Vec<TruncatedSeries>,
}

impl ReflectionIdentity {
    pub fn holds(&self) -> bool {
        self.residual.iter().all(TruncatedSeries::is_zero)
    }

    pub fn certified_degree(&self) -> u32 {
        self.residual.iter().map(TruncatedSeries::cap).min().unwrap_or(0)
    }
}

/// All identities for `|α| ≤ alpha_max`. `V_α` is built inductively: with
/// `A = (L_j f̄′_i)` and `k = |α|`,
///
/// ```text
/// b_j = D·L_j V_α − (2k − 1)·(L_j D)·V_α      (b_j = L_j V_0 when k = 0)
/// V_{α+e_i} = det(A with column i replaced by b)
/// ```
pub fn reflection_identities(
    f: &FormalMapRecord,
    m: &GenericManifold,
    m2: &GenericManifold,
    alpha_max: usize,
) -> Result<Vec<ReflectionIdentity>> {
    require_equidimensional(f, m)?;
    let (n2, cr) = (m2.n(), m.cr_dim());
    let zw = m.zw();
    let det = determinant_d(f, m)?;
    if !det.nonvanishing_on_m() {
        return Err(Error::DegenerateMap("D vanishes identically on the complexification".into()));
    }
    let d = &det.d;
    let ld: Vec<TruncatedSeries> = (0..cr)
        .map(|j| m.fields().apply(j, d))
        .collect::<Result<_>>()?;

    let fbar = f.fbar_on(zw)?;
    let mut phi_args = f.f_on_zw(zw)?;
    phi_args.extend(fbar[..cr].iter().cloned());
    let conj = m2.conj_graph()?;
    debug_assert_eq!(conj[0].vars(), &omega_theta_vars(n2, cr));

    let mut v: BTreeMap<Vec<u32>, Vec<TruncatedSeries>> = BTreeMap::new();
    v.insert(vec![0; cr], fbar[cr..].to_vec());
    let mut order: Vec<Vec<u32>> = vec![vec![0; cr]];
    let mut frontier: Vec<Vec<u32>> = vec![vec![0; cr]];
    for k in 0..alpha_max {
        let mut next = Vec::new();
        for alpha in &frontier {
            let va = v[alpha].clone();
            let last = alpha.iter().rposition(|&a| a > 0).unwrap_or(0);
            let b: Vec<Vec<TruncatedSeries>> = (0..cr)
                .map(|j| {
                    va.iter()
                        .map(|vn| {
                            let lv = m.fields().apply(j, vn)?;
                            if k == 0 {
                                return Ok(lv);
                            }
                            let coef = GaussRational::int(2 * k as i64 - 1);
                            Ok(&(d * &lv) - &(&ld[j] * vn).scale(&coef))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            for i in last..cr {
                let mut beta = alpha.clone();
                beta[i] += 1;
                let comps = (0..va.len())
                    .map(|nu| {
                        let col: Vec<TruncatedSeries> = (0..cr).map(|j| b[j][nu].clone()).collect();
                        det.matrix.with_column(i, &col)?.det()
                    })
                    .collect::<Result<Vec<_>>>()?;
                v.insert(beta.clone(), comps);
                next.push(beta);
            }
        }
        next.sort_by(|a, b| b.cmp(a));
        order.extend(next.iter().cloned());
        frontier = next;
    }

    let mut out = Vec::new();
    for alpha in order {
        let k: u32 = alpha.iter().sum();
        let factor = if k == 0 { None } else { Some(d.pow(2 * k - 1)) };
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut residual = Vec::new();
        for (nu, p) in conj.iter().enumerate() {
            let mut dp = p.clone();
            for (i, &a) in alpha.iter().enumerate() {
                for _ in 0..a {
                    dp = dp.derive_index(n2 + i)?;
                }
            }
            let mut l = dp.compose_into(zw, &phi_args)?;
            if let Some(fac) = &factor {
                l = fac * &l;
            }
            let l = m.restrict_to_m(&l)?;
            let r = m.restrict_to_m(&v[&alpha][nu])?;
            residual.push(&l - &r);
            lhs.push(l);
            rhs.push(r);
        }
        out.push(ReflectionIdentity { alpha, lhs, rhs, residual });
    }
    Ok(out)
}

/// The identity for a single multi-index.
pub fn reflection_identity(
    f: &FormalMapRecord,
    m: &GenericManifold,
    m2: &GenericManifold,
    alpha: &[u32],
) -> Result<ReflectionIdentity> {
    if alpha.len() != m.cr_dim() {
        return Err(Error::structural("multi-index length differs from the CR dimension"));
    }
    let k: u32 = alpha.iter().sum();
    reflection_identities(f, m, m2, k as usize)?
        .into_iter()
        .find(|id| id.alpha == alpha)
        .ok_or_else(|| Error::Consistency("identity not generated".into()))
}

/// `z1..zn, theta1..thetaN`.
pub fn reflection_vars(n: usize, cr: usize) -> Vars {
    vars(
        (1..=n)
            .map(|k| format!("z{k}"))
            .chain((1..=cr).map(|k| format!("theta{k}"))),
    )
}

/// `(z, θ) ↦ Φ̄′(f(z), θ)`.
pub fn reflection_map(f: &FormalMapRecord, m2: &GenericManifold) -> Result<Vec<TruncatedSeries>> {
    if f.n_tgt != m2.n() {
        return Err(Error::structural("map target dimension differs from the target manifold"));
    }
    let cr = m2.cr_dim();
    let t = reflection_vars(f.n_src, cr);
    let pos: Vec<usize> = (0..f.n_src).collect();
    let mut args: Vec<TruncatedSeries> = f.f.iter().map(|c| c.embed(&t, &pos)).collect::<Result<_>>()?;
    let cap = args.iter().map(TruncatedSeries::cap).min().unwrap_or(m2.cap());
    args.extend((0..cr).map(|k| TruncatedSeries::var(&t, cap, f.n_src + k)));
    m2.conj_graph()?
        .iter()
        .map(|p| p.compose_into(&t, &args))
        .collect()
}

#[derive(Clone, Debug)]
pub struct NormalComponents {
    /// `Φ̄′(f(z), 0)`.
    pub slice: Vec<TruncatedSeries>,
    /// The declared `f*`.
    pub declared: Vec<TruncatedSeries>,
}

impl NormalComponents {
    pub fn matches(&self) -> bool {
        self.slice.iter().zip(&self.declared).all(|(s, d)| (s - d).is_zero())
    }

    pub fn check(self) -> Result<Self> {
        if self.matches() {
            Ok(self)
        } else {
            Err(Error::Consistency(
                "theta = 0 slice of the reflection map differs from the declared f*".into(),
            ))
        }
    }
}

/// The `θ = 0` slice of the reflection map; equals `f*` when the target
/// is in normal coordinates and `f` is CR.
pub fn normal_components(f: &FormalMapRecord, m2: &GenericManifold) -> Result<NormalComponents> {
    if !m2.normal_coords() {
        return Err(Error::Precondition("target is not in normal coordinates".into()));
    }
    let cr = m2.cr_dim();
    let refl = reflection_map(f, m2)?;
    let zs = &f.src_vars;
    let cap = refl.iter().map(TruncatedSeries::cap).min().unwrap_or(m2.cap());
    let mut args: Vec<TruncatedSeries> = (0..f.n_src).map(|k| TruncatedSeries::var(zs, cap, k)).collect();
    args.extend((0..cr).map(|_| TruncatedSeries::zero(zs, cap)));
    let slice = refl
        .iter()
        .map(|r| r.compose_into(zs, &args))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalComponents { slice, declared: f.f_star().to_vec() })
}

#[derive(Clone, Debug)]
pub struct CharVarietyRecord {
    pub jet_order: usize,
    /// `(γ, ν, Ξ_{γ,ν}(0, 0, ζ))`.
    pub generators: Vec<(Vec<u32>, usize, TruncatedSeries)>,
    pub jacobian_rank: usize,
    pub zero_dim_certified: bool,
    pub certified_degree: u32,
}

pub fn zeta_vars(n: usize) -> Vars {
    vars((1..=n).map(|k| format!("zeta{k}")))
}

/// Generators `Ξ_γ(0, 0, ζ) = (L^γ ρ′(ζ, f̄(w)))|_{z=w=0}` for `|γ| ≤ k`.
/// The characteristic variety is certified zero-dimensional when their
/// linear parts in `ζ` have rank `n′`.
pub fn char_variety(
    f: &FormalMapRecord,
    m: &GenericManifold,
    m2: &GenericManifold,
    k: usize,
) -> Result<CharVarietyRecord> {
    let (n, cr, n2) = (m.n(), m.cr_dim(), m2.n());
    if f.n_src != n || f.n_tgt != n2 {
        return Err(Error::structural("map dimensions do not match the manifolds"));
    }
    if k + 1 > m.cap() as usize {
        return Err(Error::cap(format!("jet order {k} needs degree cap at least {}", k + 1)));
    }
    let space = vars(
        m.zw()
            .iter()
            .cloned()
            .chain((1..=n2).map(|k| format!("zeta{k}"))),
    );
    let cap = m.cap();
    let mut args: Vec<TruncatedSeries> = (0..n2)
        .map(|i| TruncatedSeries::var(&space, cap, 2 * n + i))
        .collect();
    args.extend(f.fbar_on(&space)?);
    let base: Vec<TruncatedSeries> = m2
        .rho()
        .iter()
        .map(|r| r.compose_into(&space, &args))
        .collect::<Result<_>>()?;
    let coeffs = m.fields().embedded_coeffs(&space)?;

    let zeta = zeta_vars(n2);
    let mut at_origin: Vec<TruncatedSeries> = (0..2 * n).map(|_| TruncatedSeries::zero(&zeta, cap)).collect();
    at_origin.extend((0..n2).map(|i| TruncatedSeries::var(&zeta, cap, i)));

    let mut level: BTreeMap<Vec<u32>, Vec<TruncatedSeries>> = BTreeMap::new();
    level.insert(vec![0; cr], base);
    let mut generators = Vec::new();
    for order in 0..=k {
        if order > 0 {
            let mut next = BTreeMap::new();
            for gamma in exponents_of_degree(cr, order as u32) {
                let j = gamma.iter().rposition(|&g| g > 0).expect("positive order");
                let mut prev = gamma.clone();
                prev[j] -= 1;
                let applied = level[&prev]
                    .iter()
                    .map(|g| m.fields().apply_embedded(j, g, &coeffs[j], n))
                    .collect::<Result<Vec<_>>>()?;
                next.insert(gamma, applied);
            }
            level = next;
        }
        for gamma in exponents_of_degree(cr, order as u32) {
            for (nu, xi) in level[&gamma].iter().enumerate() {
                generators.push((gamma.clone(), nu, xi.compose_into(&zeta, &at_origin)?));
            }
        }
    }
    let rows: Vec<Vec<GaussRational>> = generators
        .iter()
        .map(|(_, _, g)| {
            (0..n2)
                .map(|i| {
                    let mut e = vec![0; n2];
                    e[i] = 1;
                    g.coeff(&e)
                })
                .collect()
        })
        .collect();
    let jacobian_rank = field_rank(&rows);
    let certified_degree = generators.iter().map(|(_, _, g)| g.cap()).min().unwrap_or(cap);
    Ok(CharVarietyRecord {
        jet_order: k,
        generators,
        jacobian_rank,
        zero_dim_certified: jacobian_rank == n2,
        certified_degree,
    })
}
