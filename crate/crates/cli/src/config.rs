//! `key = value` configuration files and command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;

use chball_core::Tolerances;

#[derive(Debug, Clone)]
pub struct Config {
    pub tol: Tolerances,
    pub seed: u64,
    pub samples: Option<usize>,
    pub word_budget: u128,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            seed: 0,
            samples: None,
            word_budget: chball_core::subgroups::DEFAULT_WORD_BUDGET,
        }
    }
}

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn tol_slot<'a>(tol: &'a mut Tolerances, name: &str) -> Option<&'a mut f64> {
    Some(match name {
        "group" => &mut tol.group,
        "bdry" => &mut tol.bdry,
        "line" => &mut tol.line,
        "denom" => &mut tol.denom,
        "class" => &mut tol.class,
        "sym" => &mut tol.sym,
        "proper" => &mut tol.proper,
        "det" => &mut tol.det,
        "rank" => &mut tol.rank,
        "poly" => &mut tol.poly,
        "rate" => &mut tol.rate,
        "unitary_return" => &mut tol.unitary_return,
        _ => return None,
    })
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = |e: &dyn std::fmt::Display| format!("{key}: {e}");
        match key {
            "seed" => self.seed = value.parse().map_err(|e| bad(&e))?,
            "samples" => self.samples = Some(value.parse().map_err(|e| bad(&e))?),
            "word_budget" => self.word_budget = value.parse().map_err(|e| bad(&e))?,
            _ => {
                let name = key.strip_prefix("tol_").or_else(|| key.strip_prefix("tol-")).unwrap_or("");
                let slot = tol_slot(&mut self.tol, &name.replace('-', "_")).ok_or_else(|| format!("unknown key {key}"))?;
                *slot = value.parse().map_err(|e| bad(&e))?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut c = Config::default();
        for (k, v) in parse(&text)? {
            c.set(&k, &v)?;
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.tol.first_invalid() {
            Some(name) => Err(format!("tolerance {name} must be positive and finite")),
            None => Ok(()),
        }
    }
}
