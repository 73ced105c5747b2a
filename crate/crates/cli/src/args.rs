use std::path::Path;

use anyhow::{bail, Context, Result};
use peprk::methods::{io, lookup, ButcherTableau};
use peprk::scalar::{parse_rational, ratio_to_f64};
use peprk::Tableau;

/// Parses `"p/q"`, integers and decimals.
pub fn number(s: &str) -> Result<f64, String> {
    parse_rational(s)
        .map(|r| ratio_to_f64(&r))
        .ok_or_else(|| format!("cannot read {s:?} as a number (use p/q or a decimal)"))
}

/// A registry name, `RK22(α)`, or a path to a tableau file.
pub fn method(spec: &str, alpha: Option<&str>) -> Result<Tableau> {
    if let Some(alpha) = alpha {
        let key: String = spec.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        if !matches!(key.to_ascii_uppercase().as_str(), "RK22" | "RK2") {
            bail!("--alpha only applies to the RK22 family, not {spec:?}");
        }
        return Ok(lookup(&format!("RK22({alpha})"))?);
    }
    let path = Path::new(spec);
    if path.is_file() {
        return io::read_file(path).with_context(|| format!("reading tableau file {spec}"));
    }
    lookup(spec).with_context(|| format!("{spec:?} is neither a known method nor a tableau file"))
}

pub fn float_method(spec: &str, alpha: Option<&str>) -> Result<ButcherTableau<f64>> {
    Ok(method(spec, alpha)?.to_f64())
}
