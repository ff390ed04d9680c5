//! Analysis reports for manifolds and maps, rendered as JSON or text.
//!
//! Series serialize as `{"vars": [...], "cap": D, "terms": [[[exps], "re", "im"], ...]}`
//! with terms in graded order; `cap` is `null` for exact polynomials.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::coeff::rational_string;
use crate::diagnostic::{convergence_diagnostic, max_abs_sqr, ConvergenceDiagnostic};
use crate::error::{Error, Result};
use crate::input::{LoadedMap, NamedManifold};
use crate::manifold::GenericManifold;
use crate::nondegeneracy::{self, default_k_max, default_l_max, FiniteOrder, NondegeneracyReport};
use crate::reflection::{
    char_variety, determinant_d, normal_components, reflection_identities, reflection_map,
    validate_cr_map, CrValidation,
};
use crate::segre::{
    build_chains, decide_minimality, default_d_max, membership_residual, restriction_defect,
    MinimalityStatus, MinimalityVerdict,
};
use crate::series::{TruncatedSeries, POLY_CAP};

#[derive(Clone, Debug)]
pub struct Settings {
    pub degree: u32,
    pub seed: u64,
    pub alpha_max: usize,
    /// `None` means `degree − 2`.
    pub jet_order: Option<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { degree: 10, seed: 1, alpha_max: 2, jet_order: None }
    }
}

/// Serializes a series losslessly.
#[derive(Clone, Debug)]
pub struct SeriesJson(pub TruncatedSeries);

impl Serialize for SeriesJson {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            vars: &'a [String],
            cap: Option<u32>,
            terms: Vec<(&'a [u32], String, String)>,
        }
        let p = &self.0;
        Repr {
            vars: p.vars(),
            cap: (p.cap() != POLY_CAP).then_some(p.cap()),
            terms: p
                .terms()
                .map(|(m, c)| (m.exps(), rational_string(c.re()), rational_string(c.im())))
                .collect(),
        }
        .serialize(s)
    }
}

fn series_json(v: &[TruncatedSeries]) -> Vec<SeriesJson> {
    v.iter().cloned().map(SeriesJson).collect()
}

/// A report section that may be skipped when its preconditions fail.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Section<T> {
    Computed { value: T },
    Skipped { reason: String },
}

impl<T> Section<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Section::Computed { value } => Some(value),
            Section::Skipped { .. } => None,
        }
    }
}

/// Cap exhaustion and structural problems abort; other failures skip the section.
fn section<T>(r: Result<T>) -> Result<Section<T>> {
    match r {
        Ok(value) => Ok(Section::Computed { value }),
        Err(e @ (Error::InsufficientCap(_) | Error::Structural(_))) => Err(e),
        Err(e) => Ok(Section::Skipped { reason: e.to_string() }),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifoldSummary {
    pub name: String,
    pub n: usize,
    pub codim: usize,
    pub cr_dim: usize,
    pub cap: u32,
    pub coordinates: Vec<String>,
    pub permutation: Vec<usize>,
    pub genericity: bool,
    pub reality_identity: bool,
    pub normal_coords: bool,
    pub defining: Vec<SeriesJson>,
    pub graph: Vec<SeriesJson>,
}

fn summarize(named: &NamedManifold) -> Result<ManifoldSummary> {
    let m = &named.manifold;
    Ok(ManifoldSummary {
        name: named.name.clone(),
        n: m.n(),
        codim: m.codim(),
        cr_dim: m.cr_dim(),
        cap: m.cap(),
        coordinates: m.coordinates().to_vec(),
        permutation: m.permutation().to_vec(),
        genericity: true,
        reality_identity: m.check_reality_identity()?,
        normal_coords: m.normal_coords(),
        defining: series_json(m.rho()),
        graph: series_json(m.phi()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SegreChecks {
    /// `(b, ρ(v_{b+1}, v̄_b) ≡ 0)`.
    pub membership: Vec<(usize, bool)>,
    /// `(d, v_{d+3}|_{t_1 = t_3} = v_{d+1})`.
    pub restriction_identity: Vec<(usize, bool)>,
    pub certified_degree: u32,
}

pub fn segre_checks(m: &GenericManifold, b_max: usize, d_max: usize) -> Result<SegreChecks> {
    let chains = build_chains(m, (b_max + 1).max(d_max + 3))?;
    let mut membership = Vec::new();
    for b in 0..=b_max {
        let r = membership_residual(m, &chains[b], &chains[b + 1])?;
        membership.push((b, r.iter().all(TruncatedSeries::is_zero)));
    }
    let mut restriction = Vec::new();
    for d in 0..=d_max {
        let r = restriction_defect(m, &chains[d + 1], &chains[d + 3])?;
        restriction.push((d, r.iter().all(TruncatedSeries::is_zero)));
    }
    Ok(SegreChecks {
        membership,
        restriction_identity: restriction,
        certified_degree: chains.iter().map(|c| c.cap()).min().unwrap_or(m.cap()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateJson {
    pub beta: Vec<u32>,
    pub nu: usize,
    pub function: SeriesJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct NondegeneracySection {
    pub finite_nondegeneracy: nondegeneracy::JetSpanRecord,
    pub holomorphic: nondegeneracy::HolomorphicNondegeneracy,
    pub degeneracy: nondegeneracy::Degeneracy,
    pub certificate: Vec<CertificateJson>,
    pub certificate_rank: usize,
    pub cross_check_holo_vs_degeneracy: bool,
    pub cross_check_finite_implies_holo: bool,
}

impl From<NondegeneracyReport> for NondegeneracySection {
    fn from(r: NondegeneracyReport) -> Self {
        NondegeneracySection {
            certificate: r
                .certificate
                .iter()
                .map(|c| CertificateJson {
                    beta: c.beta.clone(),
                    nu: c.nu,
                    function: SeriesJson(c.function.clone()),
                })
                .collect(),
            finite_nondegeneracy: r.finite,
            holomorphic: r.holomorphic,
            degeneracy: r.degeneracy,
            certificate_rank: r.certificate_rank,
            cross_check_holo_vs_degeneracy: r.cross_check_holo_vs_degeneracy,
            cross_check_finite_implies_holo: r.cross_check_finite_implies_holo,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifoldReport {
    pub kind: &'static str,
    pub seed: u64,
    pub manifold: ManifoldSummary,
    pub minimality: MinimalityVerdict,
    pub segre_checks: SegreChecks,
    pub nondegeneracy: NondegeneracySection,
    pub notes: Vec<String>,
}

pub fn analyze_manifold(named: &NamedManifold, settings: &Settings) -> Result<ManifoldReport> {
    let m = &named.manifold;
    let d_max = default_d_max(m);
    let minimality = decide_minimality(m, d_max, settings.seed)?;
    let segre = segre_checks(m, d_max, 1)?;
    let nondeg = nondegeneracy::analyze(m, default_k_max(m), default_l_max(m))?;
    let mut notes = vec!["essential finiteness is not decided".to_string()];
    if minimality.status == MinimalityStatus::NotMinimalAtCap {
        notes.push(format!(
            "NotMinimalAtCap holds at degree {}; rerun with a higher --degree to confirm",
            minimality.certified_degree
        ));
    }
    Ok(ManifoldReport {
        kind: "manifold",
        seed: settings.seed,
        manifold: summarize(named)?,
        minimality,
        segre_checks: segre,
        nondegeneracy: nondeg.into(),
        notes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MapSummary {
    pub source: String,
    pub target: String,
    pub n_src: usize,
    pub n_tgt: usize,
    pub components: Vec<SeriesJson>,
    pub jacobian: Option<SeriesJson>,
    pub jacobian_nondeg: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrSection {
    pub cr_valid: bool,
    pub first_nonzero: Option<(usize, String)>,
    pub residual_max_abs_sqr: String,
    pub certified_degree: u32,
}

impl From<&CrValidation> for CrSection {
    fn from(v: &CrValidation) -> Self {
        CrSection {
            cr_valid: v.valid,
            first_nonzero: v.first_nonzero.clone(),
            residual_max_abs_sqr: max_abs_sqr(&v.residuals),
            certified_degree: v.certified_degree,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeterminantSection {
    pub d: SeriesJson,
    pub d_on_m_nonzero: bool,
    pub certified_degree: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityEntry {
    pub alpha: Vec<u32>,
    pub holds: bool,
    pub residual_max_abs_sqr: String,
    pub lhs: Vec<SeriesJson>,
    pub certified_degree: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentitySection {
    pub alpha_max: usize,
    pub all_hold: bool,
    pub entries: Vec<IdentityEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalSection {
    pub slice: Vec<SeriesJson>,
    pub declared: Vec<SeriesJson>,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Generator {
    pub gamma: Vec<u32>,
    pub nu: usize,
    pub polynomial: SeriesJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct CharVarietySection {
    pub jet_order: usize,
    pub generators: Vec<Generator>,
    pub jacobian_rank: usize,
    pub zero_dim_certified: bool,
    pub certified_degree: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabeledDiagnostic {
    pub label: String,
    pub diagnostic: ConvergenceDiagnostic,
}

#[derive(Clone, Debug, Serialize)]
pub struct MapReport {
    pub kind: &'static str,
    pub seed: u64,
    pub cap: u32,
    pub map: MapSummary,
    pub cr_validation: CrSection,
    pub determinant: Section<DeterminantSection>,
    pub reflection_identities: Section<IdentitySection>,
    pub reflection_map: Vec<SeriesJson>,
    pub normal_components: Section<NormalSection>,
    pub char_variety: CharVarietySection,
    pub diagnostics: Vec<LabeledDiagnostic>,
    pub notes: Vec<String>,
}

pub fn analyze_map(loaded: &LoadedMap, settings: &Settings) -> Result<MapReport> {
    let (m, m2, f) = (&loaded.source.manifold, &loaded.target.manifold, &loaded.map);
    let cap = m.cap();
    let validation = validate_cr_map(f, m, m2)?;
    let determinant = section(determinant_d(f, m).map(|d| DeterminantSection {
        d_on_m_nonzero: d.nonvanishing_on_m(),
        certified_degree: d.d_on_m.cap(),
        d: SeriesJson(d.d),
    }))?;
    let identities = if validation.valid {
        section(reflection_identities(f, m, m2, settings.alpha_max).map(|ids| IdentitySection {
            alpha_max: settings.alpha_max,
            all_hold: ids.iter().all(|i| i.holds()),
            entries: ids
                .iter()
                .map(|i| IdentityEntry {
                    alpha: i.alpha.clone(),
                    holds: i.holds(),
                    residual_max_abs_sqr: max_abs_sqr(&i.residual),
                    lhs: series_json(&i.lhs),
                    certified_degree: i.certified_degree(),
                })
                .collect(),
        }))?
    } else {
        Section::Skipped { reason: "the map is not CR".into() }
    };
    let refl = reflection_map(f, m2)?;
    let normal = section(normal_components(f, m2).map(|nc| NormalSection {
        matches: nc.matches(),
        slice: series_json(&nc.slice),
        declared: series_json(&nc.declared),
    }))?;
    let jet_order = settings
        .jet_order
        .unwrap_or_else(|| cap.saturating_sub(2) as usize);
    let cv = char_variety(f, m, m2, jet_order)?;
    let char_section = CharVarietySection {
        jet_order,
        generators: cv
            .generators
            .iter()
            .map(|(g, nu, p)| Generator { gamma: g.clone(), nu: nu + 1, polynomial: SeriesJson(p.clone()) })
            .collect(),
        jacobian_rank: cv.jacobian_rank,
        zero_dim_certified: cv.zero_dim_certified,
        certified_degree: cv.certified_degree,
    };
    let mut diagnostics = Vec::new();
    for (k, c) in f.f().iter().enumerate() {
        diagnostics.push(LabeledDiagnostic { label: format!("f{}", k + 1), diagnostic: convergence_diagnostic(c) });
    }
    for (k, r) in refl.iter().enumerate() {
        diagnostics.push(LabeledDiagnostic {
            label: format!("reflection{}", k + 1),
            diagnostic: convergence_diagnostic(r),
        });
    }
    let mut notes = vec!["convergence diagnostics are heuristic".to_string()];
    if !cv.zero_dim_certified {
        notes.push("characteristic variety not certified zero-dimensional (sufficient test only)".into());
    }
    Ok(MapReport {
        kind: "map",
        seed: settings.seed,
        cap,
        map: MapSummary {
            source: loaded.source.name.clone(),
            target: loaded.target.name.clone(),
            n_src: f.n_src(),
            n_tgt: f.n_tgt(),
            components: series_json(f.f()),
            jacobian: f.jacobian().cloned().map(SeriesJson),
            jacobian_nondeg: f.nondegenerate(),
        },
        cr_validation: (&validation).into(),
        determinant,
        reflection_identities: identities,
        reflection_map: series_json(&refl),
        normal_components: normal,
        char_variety: char_section,
        diagnostics,
        notes,
    })
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

fn list(v: &[SeriesJson]) -> String {
    v.iter().map(|s| s.0.to_string()).collect::<Vec<_>>().join("; ")
}

pub fn manifold_text(r: &ManifoldReport) -> String {
    let mf = &r.manifold;
    let nd = &r.nondegeneracy;
    let mut out = String::new();
    let _ = writeln!(out, "manifold {} (n = {}, codim = {}, N = {}, degree {})", mf.name, mf.n, mf.codim, mf.cr_dim, mf.cap);
    let _ = writeln!(out, "  coordinates     {}", mf.coordinates.join(", "));
    let _ = writeln!(out, "  graph z* =      {}", list(&mf.graph));
    let _ = writeln!(out, "  reality         {}", mf.reality_identity);
    let _ = writeln!(out, "  normal coords   {}", mf.normal_coords);
    let status = match &r.minimality.status {
        MinimalityStatus::Minimal(d) => format!("Minimal({d})"),
        s => format!("{s:?}"),
    };
    let trace: Vec<String> = r.minimality.rank_trace.iter().map(|s| format!("({},{})", s.d, s.rank)).collect();
    let _ = writeln!(out, "  minimality      {status}  ranks {}", trace.join(" "));
    let finite = match nd.finite_nondegeneracy.status {
        FiniteOrder::Order(k) => format!("Order({k})"),
        FiniteOrder::NotUpToCap => "NotUpToCap".into(),
    };
    let _ = writeln!(out, "  finite order    {finite}");
    let levi = nd.holomorphic.levi_type.map_or("-".to_string(), |l| l.to_string());
    let _ = writeln!(
        out,
        "  holo nondeg     {}  r(M) = {} of {}  Levi-type {levi}",
        nd.holomorphic.holo_nondeg, nd.holomorphic.r_m, nd.holomorphic.full_rank
    );
    let _ = writeln!(out, "  degeneracy      {}", nd.degeneracy.degeneracy);
    let cert: Vec<String> = nd.certificate.iter().map(|c| c.function.0.to_string()).collect();
    let _ = writeln!(out, "  certificate     {{{}}}", cert.join(", "));
    let _ = writeln!(
        out,
        "  cross-checks    holo <=> d(M)=0: {}, finite => holo: {}",
        nd.cross_check_holo_vs_degeneracy, nd.cross_check_finite_implies_holo
    );
    for note in &r.notes {
        let _ = writeln!(out, "  note: {note}");
    }
    out
}

pub fn map_text(r: &MapReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "map {} -> {} (degree {})", r.map.source, r.map.target, r.cap);
    let _ = writeln!(out, "  f =             {}", list(&r.map.components));
    let _ = writeln!(out, "  J_f nonzero     {}", r.map.jacobian_nondeg);
    let _ = writeln!(out, "  CR map          {}", r.cr_validation.cr_valid);
    if let Some((nu, term)) = &r.cr_validation.first_nonzero {
        let _ = writeln!(out, "  first residual  component {nu}: {term}");
    }
    match &r.determinant {
        Section::Computed { value } => {
            let _ = writeln!(out, "  D =             {}  (nonzero on M: {})", value.d.0, value.d_on_m_nonzero);
        }
        Section::Skipped { reason } => {
            let _ = writeln!(out, "  D               skipped: {reason}");
        }
    }
    match &r.reflection_identities {
        Section::Computed { value } => {
            let _ = writeln!(out, "  identities      |alpha| <= {}: all hold {}", value.alpha_max, value.all_hold);
        }
        Section::Skipped { reason } => {
            let _ = writeln!(out, "  identities      skipped: {reason}");
        }
    }
    let _ = writeln!(out, "  reflection map  {}", list(&r.reflection_map));
    match &r.normal_components {
        Section::Computed { value } => {
            let _ = writeln!(out, "  normal comps    {}  (match declared: {})", list(&value.slice), value.matches);
        }
        Section::Skipped { reason } => {
            let _ = writeln!(out, "  normal comps    skipped: {reason}");
        }
    }
    let _ = writeln!(
        out,
        "  char variety    jet order {}: rank {}, zero-dimensional certified {}",
        r.char_variety.jet_order, r.char_variety.jacobian_rank, r.char_variety.zero_dim_certified
    );
    for d in &r.diagnostics {
        let _ = writeln!(out, "  growth {:<12} {:?}", d.label, d.diagnostic.verdict);
    }
    for note in &r.notes {
        let _ = writeln!(out, "  note: {note}");
    }
    out
}
