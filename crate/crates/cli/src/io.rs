use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use polytail::tailbounds::ConstantsConfig;
use polytail::{Distribution, PoweredPolynomial};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Reads JSON from a file, or parses the argument itself when it is not a
/// path to an existing file (handy for short literals like `[1,2,3]`).
pub fn load_json<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))
    } else {
        serde_json::from_str(arg).with_context(|| format!("'{arg}' is neither a file nor valid JSON"))
    }
}

/// A distribution file holds either one distribution (applied to every
/// variable) or a list with one per variable.
pub fn load_dists(arg: &str, n: usize) -> Result<Vec<Distribution>> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<Distribution>),
        One(Distribution),
    }
    Ok(match load_json::<OneOrMany>(arg)? {
        OneOrMany::Many(v) => v,
        OneOrMany::One(d) => vec![d; n],
    })
}

pub fn load_instance(poly: &str, dists: &str) -> Result<(PoweredPolynomial, Vec<Distribution>)> {
    let f: PoweredPolynomial = load_json(poly)?;
    let d = load_dists(dists, f.n())?;
    Ok((f, d))
}

pub fn load_constants(arg: Option<&Path>) -> Result<ConstantsConfig> {
    let c: ConstantsConfig = match arg {
        Some(p) => load_json(p.to_str().context("constants path is not UTF-8")?)?,
        None => ConstantsConfig::default(),
    };
    c.validate()?;
    Ok(c)
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Writes to the file when given, else stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
