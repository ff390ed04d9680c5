//! Real-analytic generic submanifolds `M = {ρ(z, z̄) = 0}` through the origin,
//! handled through their complexification `ℳ = {ρ(z, w) = 0} ⊂ ℂ²ⁿ`.
//!
//! Coordinates are split as `z = (z′, z*) ∈ ℂᴺ × ℂᶜ`. Internally the
//! variables are always named `z1..zn` and `w1..wn` (with `w` standing for
//! `z̄`) in the split order; [`GenericManifold::permutation`] maps them back
//! to the declared coordinates.

use num_traits::Zero;

use crate::coeff::GaussRational;
use crate::error::{Error, Result};
use crate::matrix::{field_rank, SeriesMatrix};
use crate::series::{vars, TruncatedSeries, Vars};

/// Default total-degree cap.
pub const DEFAULT_CAP: u32 = 10;

#[derive(Clone, Debug)]
pub struct ManifoldOptions {
    /// Reject defining functions that are not real. Disable only to study
    /// inconsistent data.
    pub enforce_reality: bool,
}

impl Default for ManifoldOptions {
    fn default() -> Self {
        ManifoldOptions { enforce_reality: true }
    }
}

/// Complexified tangent fields `L_j = ∂/∂w_j − Σ_l a_{jl} ∂/∂w*_l`.
#[derive(Clone, Debug)]
pub struct TangentFieldSet {
    n: usize,
    /// `coeffs[j][i]` is the `∂/∂w_i` component of `L_j`, a series in `(z, w)`.
    coeffs: Vec<Vec<TruncatedSeries>>,
}

impl TangentFieldSet {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self, j: usize) -> &[TruncatedSeries] {
        &self.coeffs[j]
    }

    /// `L_j g` for `g` in the `(z, w)` space (or any space whose variables
    /// `offset..offset+n` are `w`, with the field coefficients embedded).
    pub fn apply(&self, j: usize, g: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.apply_embedded(j, g, &self.coeffs[j], self.n)
    }

    /// Applies `L_j` to a series living in a larger space whose `w`
    /// variables start at index `w_offset`; `coeffs` are the field
    /// coefficients already moved into that space.
    pub fn apply_embedded(
        &self,
        j: usize,
        g: &TruncatedSeries,
        coeffs: &[TruncatedSeries],
        w_offset: usize,
    ) -> Result<TruncatedSeries> {
        debug_assert!(j < self.coeffs.len());
        let mut acc: Option<TruncatedSeries> = None;
        for (i, a) in coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let term = a * &g.derive_index(w_offset + i)?;
            acc = Some(match acc {
                None => term,
                Some(s) => &s + &term,
            });
        }
        match acc {
            Some(s) => Ok(s),
            None => Ok(TruncatedSeries::zero(g.vars(), g.cap().saturating_sub(1))),
        }
    }

    /// Field coefficients moved into `target`, where `(z, w)` occupy the
    /// first `2n` variables.
    pub fn embedded_coeffs(&self, target: &Vars) -> Result<Vec<Vec<TruncatedSeries>>> {
        let pos: Vec<usize> = (0..2 * self.n).collect();
        self.coeffs
            .iter()
            .map(|row| row.iter().map(|c| c.embed(target, &pos)).collect())
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct GenericManifold {
    n: usize,
    codim: usize,
    cap: u32,
    coordinates: Vec<String>,
    permutation: Vec<usize>,
    zw: Vars,
    rho: Vec<TruncatedSeries>,
    phi_vars: Vars,
    phi: Vec<TruncatedSeries>,
    on_m_vars: Vars,
    /// `w* = Φ̄(z, w′)` as series on `(z, w′)`.
    star_on_m: Vec<TruncatedSeries>,
    fields: TangentFieldSet,
    normal_coords: bool,
}

/// `z1..zn, w1..wn`.
pub fn zw_vars(n: usize) -> Vars {
    vars((1..=n).map(|k| format!("z{k}")).chain((1..=n).map(|k| format!("w{k}"))))
}

impl GenericManifold {
    /// Validates `ρ` (exact polynomials or series in [`zw_vars`]`(n)`, given
    /// in declared coordinate order) and builds the graph form and tangent
    /// fields at total-degree cap `cap`.
    pub fn from_defining(
        rho: Vec<TruncatedSeries>,
        n: usize,
        codim: usize,
        cap: u32,
        coordinates: Vec<String>,
        options: &ManifoldOptions,
    ) -> Result<Self> {
        if codim == 0 || codim >= n {
            return Err(Error::Precondition(format!(
                "need 1 <= codim < n, got codim {codim}, n {n}"
            )));
        }
        if rho.len() != codim {
            return Err(Error::Precondition(format!(
                "{} defining functions for codimension {codim}",
                rho.len()
            )));
        }
        if cap == 0 {
            return Err(Error::cap("degree cap must be positive"));
        }
        let zw = zw_vars(n);
        for r in &rho {
            if r.vars() != &zw {
                return Err(Error::structural("defining functions must live in (z, w)"));
            }
        }
        for (j, r) in rho.iter().enumerate() {
            if !r.constant_term().is_zero() {
                return Err(Error::BasePoint { index: j + 1 });
            }
        }
        let grad_w = gradient_at_origin(&rho, n, n);
        let rank = field_rank(&grad_w);
        if rank < codim {
            return Err(Error::NotGeneric { rank, codim });
        }
        if options.enforce_reality {
            for (j, r) in rho.iter().enumerate() {
                if !is_real(r, n) {
                    return Err(Error::Reality { index: j + 1 });
                }
            }
        }
        let grad_z = gradient_at_origin(&rho, n, 0);
        let permutation = choose_split(&grad_z, n, codim).ok_or_else(|| {
            Error::DegenerateChart("no choice of z* makes d rho/d z* invertible at 0".into())
        })?;
        // internal z_k = declared z_{permutation[k]}
        let mut positions = vec![0; 2 * n];
        for (k, &orig) in permutation.iter().enumerate() {
            positions[orig] = k;
            positions[n + orig] = n + k;
        }
        let rho = rho
            .iter()
            .map(|r| r.embed(&zw, &positions)?.with_cap(cap.min(r.cap())))
            .collect::<Result<Vec<_>>>()?;
        let coordinates = if coordinates.len() == n {
            permutation.iter().map(|&k| coordinates[k].clone()).collect()
        } else {
            permutation.iter().map(|&k| format!("z{}", k + 1)).collect()
        };

        let phi = solve_graph(&rho, n, codim)?;
        let cr = n - codim;
        let phi_vars = phi[0].vars().clone();
        let on_m_vars = vars(
            (1..=n)
                .map(|k| format!("z{k}"))
                .chain((1..=cr).map(|k| format!("w{k}"))),
        );
        let star_on_m = conj_graph_on(&phi, &on_m_vars, n, cr)?;
        let fields = tangent_fields(&rho, n, codim)?;
        let mut m = GenericManifold {
            n,
            codim,
            cap,
            coordinates,
            permutation,
            zw,
            rho,
            phi_vars,
            phi,
            on_m_vars,
            star_on_m,
            fields,
            normal_coords: false,
        };
        m.normal_coords = m.check_normal_coordinates()?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn cr_dim(&self) -> usize {
        self.n - self.codim
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    /// Coordinate names in the order they were declared.
    pub fn declared_coordinates(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.n];
        for (k, &orig) in self.permutation.iter().enumerate() {
            out[orig] = self.coordinates[k].clone();
        }
        out
    }

    /// `permutation[k]` is the declared index of internal coordinate `k`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn zw(&self) -> &Vars {
        &self.zw
    }

    pub fn rho(&self) -> &[TruncatedSeries] {
        &self.rho
    }

    /// `Φ(w, z′)`: variables `w1..wn, z1..zN`.
    pub fn phi(&self) -> &[TruncatedSeries] {
        &self.phi
    }

    pub fn phi_vars(&self) -> &Vars {
        &self.phi_vars
    }

    /// `(z, w′)`, the coordinates of the complexification.
    pub fn on_m_vars(&self) -> &Vars {
        &self.on_m_vars
    }

    pub fn fields(&self) -> &TangentFieldSet {
        &self.fields
    }

    pub fn normal_coords(&self) -> bool {
        self.normal_coords
    }

    /// Checks `Φ(w′, Φ̄(z′, z*, w′), z′) ≡ z*` up to the cap.
    pub fn check_reality_identity(&self) -> Result<bool> {
        check_reality_identity(&self.phi, self.n, self.cr_dim())
    }

    /// Checks `Φ(z, 0) ≡ z*`.
    pub fn check_normal_coordinates(&self) -> Result<bool> {
        let n = self.n;
        let zs = vars((1..=n).map(|k| format!("z{k}")));
        let cap = self.cap;
        let mut args: Vec<TruncatedSeries> =
            (0..n).map(|k| TruncatedSeries::var(&zs, cap, k)).collect();
        args.extend((0..self.cr_dim()).map(|_| TruncatedSeries::zero(&zs, cap)));
        for (l, p) in self.phi.iter().enumerate() {
            let lhs = p.compose_into(&zs, &args)?;
            let rhs = TruncatedSeries::var(&zs, lhs.cap(), self.cr_dim() + l);
            if !(&lhs - &rhs).is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Restriction of `g(z, w)` to `ℳ`: substitutes `w* = Φ̄(z, w′)`.
    /// The result lives on [`on_m_vars`](Self::on_m_vars).
    pub fn restrict_to_m(&self, g: &TruncatedSeries) -> Result<TruncatedSeries> {
        if g.vars() != &self.zw {
            return Err(Error::structural("restrict_to_m expects a series in (z, w)"));
        }
        let args = self.restriction_args(g.cap());
        g.compose_into(&self.on_m_vars, &args)
    }

    fn restriction_args(&self, cap: u32) -> Vec<TruncatedSeries> {
        let (n, cr) = (self.n, self.cr_dim());
        let t = &self.on_m_vars;
        let mut args: Vec<TruncatedSeries> =
            (0..n).map(|k| TruncatedSeries::var(t, cap, k)).collect();
        args.extend((0..cr).map(|k| TruncatedSeries::var(t, cap, n + k)));
        args.extend(self.star_on_m.iter().cloned());
        args
    }

    /// Gradient `ρ_{j,z}` of each defining function with respect to `z`.
    pub fn z_gradients(&self) -> Result<Vec<Vec<TruncatedSeries>>> {
        self.rho
            .iter()
            .map(|r| (0..self.n).map(|k| r.derive_index(k)).collect())
            .collect()
    }

    /// Bar of the graph function, `Φ̄(ω, θ)`, with variables renamed to
    /// `omega1..omegan, theta1..thetaN`.
    pub fn conj_graph(&self) -> Result<Vec<TruncatedSeries>> {
        let v = omega_theta_vars(self.n, self.cr_dim());
        self.phi.iter().map(|p| p.bar().rename(&v)).collect()
    }
}

/// `omega1..omegan, theta1..thetaN`.
pub fn omega_theta_vars(n: usize, cr: usize) -> Vars {
    vars(
        (1..=n)
            .map(|k| format!("omega{k}"))
            .chain((1..=cr).map(|k| format!("theta{k}"))),
    )
}

/// Matrix of `∂ρ_j/∂x_{offset+k}` at the origin, `k < n`.
fn gradient_at_origin(rho: &[TruncatedSeries], n: usize, offset: usize) -> Vec<Vec<GaussRational>> {
    rho.iter()
        .map(|r| {
            (0..n)
                .map(|k| {
                    let mut e = vec![0; 2 * n];
                    e[offset + k] = 1;
                    r.coeff(&e)
                })
                .collect()
        })
        .collect()
}

/// `ρ(z, w) = ρ̄(w, z)` termwise.
fn is_real(r: &TruncatedSeries, n: usize) -> bool {
    r.terms().all(|(m, c)| {
        let e = m.exps();
        let swapped: Vec<u32> = e[n..].iter().chain(&e[..n]).copied().collect();
        r.coeff(&swapped) == c.conj()
    })
}

/// Lexicographically first permutation of the coordinates whose last
/// `codim` entries give an invertible `∂ρ/∂z*` at the origin.
fn choose_split(grad_z: &[Vec<GaussRational>], n: usize, codim: usize) -> Option<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let star = &perm[n - codim..];
        let sub: Vec<Vec<GaussRational>> = grad_z
            .iter()
            .map(|row| star.iter().map(|&k| row[k].clone()).collect())
            .collect();
        if field_rank(&sub) == codim {
            return Some(perm);
        }
        if !next_permutation(&mut perm) {
            return None;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Solves `ρ(z′, z*, w) = 0` for `z* = Φ(w, z′)` by the fixed-point
/// iteration `z* ← z* − A⁻¹ ρ(z′, z*, w)` with `A = ∂ρ/∂z*(0, 0)`; each
/// pass fixes one more degree. `ρ` must already be in split order.
pub fn solve_graph(rho: &[TruncatedSeries], n: usize, codim: usize) -> Result<Vec<TruncatedSeries>> {
    let cr = n - codim;
    let cap = rho.iter().map(TruncatedSeries::cap).min().unwrap_or(0);
    let pv = vars(
        (1..=n)
            .map(|k| format!("w{k}"))
            .chain((1..=cr).map(|k| format!("z{k}"))),
    );
    let a0: Vec<Vec<TruncatedSeries>> = gradient_at_origin(rho, n, 0)
        .into_iter()
        .map(|row| {
            row[cr..]
                .iter()
                .map(|c| TruncatedSeries::constant(&pv, cap, c.clone()))
                .collect()
        })
        .collect();
    let a0_inv = SeriesMatrix::from_rows(a0)?
        .inverse()
        .map_err(|_| Error::DegenerateChart("d rho/d z* singular at the origin".into()))?;
    let mut zstar: Vec<TruncatedSeries> =
        (0..codim).map(|_| TruncatedSeries::zero(&pv, cap)).collect();
    let args_for = |zstar: &[TruncatedSeries]| -> Vec<TruncatedSeries> {
        let mut args: Vec<TruncatedSeries> =
            (0..cr).map(|k| TruncatedSeries::var(&pv, cap, n + k)).collect();
        args.extend(zstar.iter().cloned());
        args.extend((0..n).map(|k| TruncatedSeries::var(&pv, cap, k)));
        args
    };
    for _ in 0..=cap {
        let args = args_for(&zstar);
        let resid: Vec<TruncatedSeries> = rho
            .iter()
            .map(|r| r.compose_into(&pv, &args))
            .collect::<Result<_>>()?;
        if resid.iter().all(TruncatedSeries::is_zero) {
            return Ok(zstar);
        }
        let corr = a0_inv.mul_vec(&resid)?;
        zstar = zstar.iter().zip(&corr).map(|(z, c)| z - c).collect();
    }
    let args = args_for(&zstar);
    for r in rho {
        if !r.compose_into(&pv, &args)?.is_zero() {
            return Err(Error::Consistency(
                "graph solve did not converge within the cap".into(),
            ));
        }
    }
    Ok(zstar)
}

/// `w* = Φ̄(z, w′)` as series on `target = (z, w′)`.
fn conj_graph_on(phi: &[TruncatedSeries], target: &Vars, n: usize, cr: usize) -> Result<Vec<TruncatedSeries>> {
    let cap = phi.iter().map(TruncatedSeries::cap).min().unwrap_or(0);
    let args: Vec<TruncatedSeries> = (0..n + cr)
        .map(|k| TruncatedSeries::var(target, cap, k))
        .collect();
    phi.iter().map(|p| p.bar().compose_into(target, &args)).collect()
}

/// Reality identity of a graph function `Φ(w, z′)`: on `(z, w′)`,
/// `Φ(w′, Φ̄(z, w′), z′) − z* ≡ 0`.
pub fn check_reality_identity(phi: &[TruncatedSeries], n: usize, cr: usize) -> Result<bool> {
    Ok(reality_defect(phi, n, cr)?.iter().all(TruncatedSeries::is_zero))
}

/// The series `Φ(w′, Φ̄(z, w′), z′) − z*`, one per component.
pub fn reality_defect(phi: &[TruncatedSeries], n: usize, cr: usize) -> Result<Vec<TruncatedSeries>> {
    let t = vars(
        (1..=n)
            .map(|k| format!("z{k}"))
            .chain((1..=cr).map(|k| format!("w{k}"))),
    );
    let cap = phi.iter().map(TruncatedSeries::cap).min().unwrap_or(0);
    let star = conj_graph_on(phi, &t, n, cr)?;
    let mut args: Vec<TruncatedSeries> =
        (0..cr).map(|k| TruncatedSeries::var(&t, cap, n + k)).collect();
    args.extend(star);
    args.extend((0..cr).map(|k| TruncatedSeries::var(&t, cap, k)));
    phi.iter()
        .enumerate()
        .map(|(l, p)| {
            let lhs = p.compose_into(&t, &args)?;
            let z_star = TruncatedSeries::var(&t, lhs.cap(), cr + l);
            Ok(&lhs - &z_star)
        })
        .collect()
}

/// Builds `L_j = ∂/∂w_j − (A⁻¹ ρ_{w_j})·∂/∂w*` with `A = ∂ρ/∂w*`.
fn tangent_fields(rho: &[TruncatedSeries], n: usize, codim: usize) -> Result<TangentFieldSet> {
    let cr = n - codim;
    let a = SeriesMatrix::from_rows(
        rho.iter()
            .map(|r| (cr..n).map(|l| r.derive_index(n + l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?,
    )?;
    let a_inv = a
        .inverse()
        .map_err(|_| Error::DegenerateChart("d rho/d w* singular at the origin".into()))?;
    let zw = rho[0].vars().clone();
    let cap = a_inv.entries().iter().map(TruncatedSeries::cap).min().unwrap_or(0);
    let mut coeffs = Vec::with_capacity(cr);
    for j in 0..cr {
        let rho_wj: Vec<TruncatedSeries> = rho
            .iter()
            .map(|r| r.derive_index(n + j))
            .collect::<Result<_>>()?;
        let star = a_inv.mul_vec(&rho_wj)?;
        let mut row: Vec<TruncatedSeries> = (0..cr)
            .map(|i| {
                if i == j {
                    TruncatedSeries::one(&zw, cap)
                } else {
                    TruncatedSeries::zero(&zw, cap)
                }
            })
            .collect();
        row.extend(star.iter().map(|s| -s));
        coeffs.push(row);
    }
    Ok(TangentFieldSet { n, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_polynomial, Origin};

    fn build(n: usize, defining: &[&str], cap: u32, opts: &ManifoldOptions) -> Result<GenericManifold> {
        crate::testutil::build_with(n, defining, cap, opts)
    }

    fn lewy() -> GenericManifold {
        build(2, &["(z2 - zb2)/(2*i) - z1*zb1"], 8, &ManifoldOptions::default()).unwrap()
    }

    fn quartic() -> GenericManifold {
        build(2, &["(z2 - zb2)/(2*i) - z1^2*zb1^2"], 8, &ManifoldOptions::default()).unwrap()
    }

    fn leviflat() -> GenericManifold {
        build(2, &["(z2 - zb2)/(2*i)"], 8, &ManifoldOptions::default()).unwrap()
    }

    #[test]
    fn parse_and_validate() {
        let m = lewy();
        assert_eq!((m.n(), m.codim(), m.cr_dim()), (2, 1, 1));
        assert_eq!(m.permutation(), &[0, 1]);
        let lf = leviflat();
        assert_eq!(lf.cr_dim(), 1);
        let bad = build(2, &["z1*zb1"], 8, &ManifoldOptions::default());
        assert!(matches!(bad, Err(Error::NotGeneric { rank: 0, codim: 1 })));
        let base = build(2, &["(z2 - zb2)/(2*i) + 1"], 8, &ManifoldOptions::default());
        assert!(matches!(base, Err(Error::BasePoint { index: 1 })));
        let unreal = build(2, &["(z2 - zb2)/(2*i) - i*z1*zb1"], 8, &ManifoldOptions::default());
        assert!(matches!(unreal, Err(Error::Reality { index: 1 })));
    }

    #[test]
    fn graph_forms() {
        assert_eq!(lewy().phi()[0].to_string(), "w2 + 2*i*w1*z1");
        assert_eq!(leviflat().phi()[0].to_string(), "w2");
        assert_eq!(quartic().phi()[0].to_string(), "w2 + 2*i*w1^2*z1^2");
    }

    #[test]
    fn graph_solve_of_nonpolynomial_surface() {
        // Im z2 = |z1|² + Re(z2)|z1|²: Φ is a genuine power series.
        let m = build(
            2,
            &["(z2 - zb2)/(2*i) - z1*zb1 - (z2 + zb2)/2*z1*zb1"],
            7,
            &ManifoldOptions::default(),
        )
        .unwrap();
        assert!(m.phi()[0].nterms() > 3);
        for r in m.rho() {
            assert!(m.restrict_to_m(r).unwrap().is_zero());
        }
        assert!(m.check_reality_identity().unwrap());
    }

    #[test]
    fn permutation_search() {
        // ∂ρ/∂z2 vanishes at 0; z1 must be the transverse coordinate.
        let m = build(2, &["(z1 - zb1)/(2*i) - z2*zb2"], 6, &ManifoldOptions::default()).unwrap();
        assert_eq!(m.permutation(), &[1, 0]);
        assert_eq!(m.phi()[0].to_string(), "w2 + 2*i*w1*z1");
    }

    #[test]
    fn reality_identity() {
        assert!(lewy().check_reality_identity().unwrap());
        assert!(leviflat().check_reality_identity().unwrap());
        assert!(quartic().check_reality_identity().unwrap());
        let opts = ManifoldOptions { enforce_reality: false };
        let broken = build(2, &["(z2 - zb2)/(2*i) - i*z1*zb1"], 6, &opts).unwrap();
        assert!(!broken.check_reality_identity().unwrap());
    }

    #[test]
    fn normal_coordinates() {
        assert!(lewy().normal_coords());
        assert!(leviflat().normal_coords());
        let shifted = build(
            2,
            &["(z2 - zb2)/(2*i) - z1*zb1 - i/2*z1^2 + i/2*zb1^2"],
            6,
            &ManifoldOptions::default(),
        )
        .unwrap();
        assert!(!shifted.normal_coords());
        assert_eq!(shifted.phi()[0].to_string(), "w2 + w1^2 + 2*i*w1*z1 - z1^2");
    }

    #[test]
    fn tangent_field_examples() {
        let m = lewy();
        let l = m.fields().coeffs(0);
        assert_eq!(l[0].to_string(), "1");
        assert_eq!(l[1].to_string(), "-2*i*z1");
        assert!(leviflat().fields().coeffs(0)[1].is_zero());
        assert_eq!(quartic().fields().coeffs(0)[1].to_string(), "-4*i*z1^2*w1");
        for mf in [lewy(), leviflat(), quartic()] {
            for r in mf.rho() {
                assert!(mf.fields().apply(0, r).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn restriction_examples() {
        let m = lewy();
        let w2 = TruncatedSeries::var(m.zw(), 8, 3);
        assert_eq!(m.restrict_to_m(&w2).unwrap().to_string(), "z2 - 2*i*z1*w1");
        let z1 = TruncatedSeries::var(m.zw(), 8, 0);
        assert_eq!(m.restrict_to_m(&z1).unwrap().to_string(), "z1");
        assert!(m.restrict_to_m(&m.rho()[0]).unwrap().is_zero());
    }

    #[test]
    fn fields_commute_with_restriction() {
        // restrict(L_j g) = ∂/∂w′_j restrict(g) for g in (z, w)
        let m = build(
            2,
            &["(z2 - zb2)/(2*i) - z1*zb1 - (z2 + zb2)/2*z1*zb1"],
            7,
            &ManifoldOptions::default(),
        )
        .unwrap();
        let zw = m.zw().clone();
        let g = parse_polynomial(
            "z1*w2^2 + 3*w1*w2 - i*z2*w1^3 + w2",
            &zw,
            &crate::parse::token_map(&zw),
            Origin::default(),
        )
        .unwrap()
        .with_cap(7)
        .unwrap();
        let lhs = m.restrict_to_m(&m.fields().apply(0, &g).unwrap()).unwrap();
        let rhs = m.restrict_to_m(&g).unwrap().derive_index(2).unwrap();
        assert_eq!(lhs, rhs);
    }
}
