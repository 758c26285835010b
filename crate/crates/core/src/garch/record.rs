//! Key-value text records of fitted models, one `key = value` per line.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::fit::{FittedModel, LastState};
use super::params::{GarchParams, GarchVariant};

impl FittedModel {
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("variant", self.variant.to_string());
        let names = self.variant.param_names();
        for (name, value) in names.iter().zip(self.params.to_vec()) {
            line(name, value.to_string());
        }
        for (name, se) in names.iter().zip(&self.standard_errors) {
            line(&format!("se_{name}"), se.to_string());
        }
        line("nll", (-self.log_likelihood).to_string());
        line("converged", self.converged.to_string());
        line("grad_max", self.grad_max.to_string());
        line("gaussian_limit", self.gaussian_limit.to_string());
        line("presample_variance", self.presample_variance.to_string());
        line("n_observations", self.n_observations.to_string());
        line("last_return", self.last_state.last_return.to_string());
        line("last_variance", self.last_state.last_variance.to_string());
        line("last_residual", self.last_state.last_residual.to_string());
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let map = parse_record(text)?;
        let variant: GarchVariant = get(&map, "variant")?.parse()?;
        let names = variant.param_names();
        let values = names.iter().map(|n| num(&map, n)).collect::<Result<Vec<_>>>()?;
        let params = GarchParams::from_vec(variant, &values)?;
        let standard_errors = names
            .iter()
            .map(|n| num(&map, &format!("se_{n}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            variant,
            params,
            log_likelihood: -num(&map, "nll")?,
            converged: flag(&map, "converged")?,
            grad_max: num(&map, "grad_max")?,
            gaussian_limit: flag(&map, "gaussian_limit")?,
            presample_variance: num(&map, "presample_variance")?,
            n_observations: num(&map, "n_observations")? as usize,
            last_state: LastState {
                last_return: num(&map, "last_return")?,
                last_variance: num(&map, "last_variance")?,
                last_residual: num(&map, "last_residual")?,
            },
            standard_errors,
        })
    }
}

pub(crate) fn parse_record(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::MalformedRow {
            row: i + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub(crate) fn get<'a>(map: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::param(key, "missing from record"))
}

pub(crate) fn num(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    get(map, key)?
        .parse::<f64>()
        .map_err(|e| Error::param(key, e.to_string()))
}

fn flag(map: &BTreeMap<String, String>, key: &str) -> Result<bool> {
    get(map, key)?
        .parse::<bool>()
        .map_err(|e| Error::param(key, e.to_string()))
}
