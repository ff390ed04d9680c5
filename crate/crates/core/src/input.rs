//! Manifold and map files.
//!
//! Both are TOML. A manifold file:
//!
//! ```toml
//! name = "lewy"
//! n = 2
//! codim = 1
//! vars = ["z1", "z2"]
//! defining = ["(z2 - zb2)/(2*i) - z1*zb1"]
//! ```
//!
//! The conjugate of a coordinate `z1` is written `zb1`: a `b` goes before the
//! trailing digits, or at the end if there are none. `vars` defaults to
//! `z1..zn`.
//!
//! A map file names its source and target manifold files (relative to the
//! map file) and lists the components in the source coordinates:
//!
//! ```toml
//! source = "lewy.mfd"
//! target = "lewy.mfd"
//! components = ["2*z1", "4*z2"]
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::manifold::{zw_vars, GenericManifold, ManifoldOptions};
use crate::parse::{parse_polynomial, Origin};
use crate::reflection::FormalMapRecord;
use crate::series::vars;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifoldFile {
    name: Option<String>,
    n: Spanned<usize>,
    codim: Spanned<usize>,
    vars: Option<Spanned<Vec<String>>>,
    defining: Spanned<Vec<Spanned<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    source: String,
    target: String,
    components: Spanned<Vec<Spanned<String>>>,
}

/// A parsed manifold together with the name it was declared under.
#[derive(Clone, Debug)]
pub struct NamedManifold {
    pub name: String,
    pub manifold: GenericManifold,
}

/// 1-based line and column of a byte offset.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
    (line, col)
}

fn error_at(text: &str, offset: usize, message: impl Into<String>) -> Error {
    let (line, column) = position(text, offset);
    Error::Parse { line, column, message: message.into() }
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let offset = e.span().map(|s| s.start).unwrap_or(0);
    error_at(text, offset, e.message().to_string())
}

/// Origin of the first character inside a TOML string value.
fn string_origin(text: &str, span: std::ops::Range<usize>) -> Origin {
    let raw = &text[span.clone()];
    let skip = if raw.starts_with("\"\"\"") || raw.starts_with("'''") { 3 } else { 1 };
    let (line, column) = position(text, span.start + skip);
    Origin { line, column }
}

/// `z1 → zb1`, `x → xb`.
pub fn conjugate_token(name: &str) -> String {
    let stem = name.trim_end_matches(|c: char| c.is_ascii_digit());
    format!("{stem}b{}", &name[stem.len()..])
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
        && name != "i"
}

pub fn parse_manifold(text: &str, cap: u32) -> Result<NamedManifold> {
    parse_manifold_with(text, cap, &ManifoldOptions::default())
}

pub fn parse_manifold_with(text: &str, cap: u32, options: &ManifoldOptions) -> Result<NamedManifold> {
    let file: ManifoldFile = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let n = *file.n.get_ref();
    let codim = *file.codim.get_ref();
    if n == 0 {
        return Err(error_at(text, file.n.span().start, "n must be positive"));
    }
    if codim == 0 || codim >= n {
        return Err(error_at(text, file.codim.span().start, "codim must satisfy 1 <= codim < n"));
    }
    let names: Vec<String> = match &file.vars {
        Some(v) => {
            let names = v.get_ref().clone();
            let at = v.span().start;
            if names.len() != n {
                return Err(error_at(text, at, format!("{} variable names for n = {n}", names.len())));
            }
            if let Some(bad) = names.iter().find(|s| !valid_identifier(s)) {
                return Err(error_at(text, at, format!("`{bad}` is not a usable variable name")));
            }
            names
        }
        None => (1..=n).map(|k| format!("z{k}")).collect(),
    };
    let mut tokens: HashMap<String, usize> = HashMap::new();
    for (k, name) in names.iter().enumerate() {
        for (tok, idx) in [(name.clone(), k), (conjugate_token(name), n + k)] {
            if tokens.insert(tok.clone(), idx).is_some() {
                let at = file.vars.as_ref().map(|v| v.span().start).unwrap_or(0);
                return Err(error_at(text, at, format!("variable token `{tok}` is ambiguous")));
            }
        }
    }
    if file.defining.get_ref().len() != codim {
        return Err(error_at(
            text,
            file.defining.span().start,
            format!("{} defining functions for codim = {codim}", file.defining.get_ref().len()),
        ));
    }
    let zw = zw_vars(n);
    let rho = file
        .defining
        .get_ref()
        .iter()
        .map(|d| parse_polynomial(d.get_ref(), &zw, &tokens, string_origin(text, d.span())))
        .collect::<Result<Vec<_>>>()?;
    let manifold = GenericManifold::from_defining(rho, n, codim, cap, names, options)?;
    Ok(NamedManifold {
        name: file.name.unwrap_or_default(),
        manifold,
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Positions in errors are prefixed with the file path.
fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

pub fn load_manifold(path: &Path, cap: u32) -> Result<NamedManifold> {
    let text = read(path)?;
    let mut named = parse_manifold(&text, cap).map_err(|e| in_file(path, e))?;
    if named.name.is_empty() {
        named.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(named)
}

#[derive(Clone, Debug)]
pub struct LoadedMap {
    pub source_path: PathBuf,
    pub target_path: PathBuf,
    pub source: NamedManifold,
    pub target: NamedManifold,
    pub map: FormalMapRecord,
}

/// Parses map components against already loaded manifolds.
pub fn parse_map_components(
    text: &str,
    source: &GenericManifold,
    target: &GenericManifold,
) -> Result<(String, String, FormalMapRecord)> {
    let file: MapFile = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let comps = file.components.get_ref();
    if comps.len() != target.n() {
        return Err(error_at(
            text,
            file.components.span().start,
            format!("{} components for a target of dimension {}", comps.len(), target.n()),
        ));
    }
    let n = source.n();
    let zs = vars((1..=n).map(|k| format!("z{k}")));
    let tokens: HashMap<String, usize> = source
        .declared_coordinates()
        .into_iter()
        .enumerate()
        .map(|(k, name)| (name, k))
        .collect();
    let series = comps
        .iter()
        .map(|c| parse_polynomial(c.get_ref(), &zs, &tokens, string_origin(text, c.span())))
        .collect::<Result<Vec<_>>>()?;
    let map = FormalMapRecord::new(series, source, target)?;
    Ok((file.source, file.target, map))
}

/// Loads a map file and the manifolds it refers to. `source` and `target`
/// override the references inside the file.
pub fn load_map(
    path: &Path,
    cap: u32,
    source: Option<&Path>,
    target: Option<&Path>,
) -> Result<LoadedMap> {
    let text = read(path)?;
    let file: MapFile = toml::from_str(&text).map_err(|e| in_file(path, toml_error(&text, e)))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let source_path = source.map(Path::to_path_buf).unwrap_or_else(|| base.join(&file.source));
    let target_path = target.map(Path::to_path_buf).unwrap_or_else(|| base.join(&file.target));
    let src = load_manifold(&source_path, cap)?;
    let tgt = load_manifold(&target_path, cap)?;
    let (_, _, map) = parse_map_components(&text, &src.manifold, &tgt.manifold).map_err(|e| in_file(path, e))?;
    Ok(LoadedMap {
        source_path,
        target_path,
        source: src,
        target: tgt,
        map,
    })
}
