//! Parsing of `kind:key=value,...` strings for base mechanisms and run-count
//! distributions.

use std::collections::BTreeMap;

use tunepriv::{DpSgdConfig, RunCountDist, TradeoffCurve};

use crate::error::CliError;

/// Base algorithm named on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseSpec {
    Gdp { mu: f64 },
    EpsDelta { epsilon: f64, delta: f64 },
    DpSgd(DpSgdConfig),
}

impl BaseSpec {
    /// The trade-off curve used by the f-DP accountant. DP-SGD maps to
    /// `G_μ` with `μ` from [`DpSgdConfig::gdp_mu`].
    pub fn curve(&self) -> Result<TradeoffCurve, CliError> {
        Ok(match *self {
            Self::Gdp { mu } => TradeoffCurve::gaussian(mu)?,
            Self::EpsDelta { epsilon, delta } => TradeoffCurve::eps_delta(epsilon, delta)?,
            Self::DpSgd(cfg) => TradeoffCurve::gaussian(cfg.gdp_mu()?)?,
        })
    }

    pub fn dpsgd(&self) -> Option<DpSgdConfig> {
        match *self {
            Self::DpSgd(cfg) => Some(cfg),
            _ => None,
        }
    }
}

struct Fields<'a> {
    input: &'a str,
    kind: &'a str,
    values: BTreeMap<&'a str, &'a str>,
}

fn split(input: &str) -> Result<Fields<'_>, CliError> {
    let (kind, rest) = input
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("`{input}`: expected `kind:key=value,...`")))?;
    let mut values = BTreeMap::new();
    for token in rest.split(',').filter(|t| !t.is_empty()) {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("`{input}`: token `{token}` is not key=value")))?;
        if values.insert(k.trim(), v.trim()).is_some() {
            return Err(CliError::usage(format!("`{input}`: key `{k}` given twice")));
        }
    }
    Ok(Fields {
        input,
        kind: kind.trim(),
        values,
    })
}

impl<'a> Fields<'a> {
    fn expect_keys(&self, keys: &[&str]) -> Result<(), CliError> {
        for k in self.values.keys() {
            if !keys.contains(k) {
                return Err(CliError::usage(format!(
                    "`{}`: unknown key `{k}` for `{}` (expected {})",
                    self.input,
                    self.kind,
                    keys.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Result<&'a str, CliError> {
        self.values
            .get(key)
            .copied()
            .ok_or_else(|| CliError::usage(format!("`{}`: missing `{key}=`", self.input)))
    }

    fn real(&self, key: &str) -> Result<f64, CliError> {
        let raw = self.raw(key)?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::usage(format!("`{}`: `{key}={raw}` is not a finite number", self.input)))
    }

    fn integer(&self, key: &str) -> Result<u64, CliError> {
        let raw = self.raw(key)?;
        raw.parse::<u64>()
            .map_err(|_| CliError::usage(format!("`{}`: `{key}={raw}` is not a nonnegative integer", self.input)))
    }
}

pub fn parse_base(input: &str) -> Result<BaseSpec, CliError> {
    let f = split(input)?;
    match f.kind {
        "gdp" => {
            f.expect_keys(&["mu"])?;
            let mu = f.real("mu")?;
            TradeoffCurve::gaussian(mu)?;
            Ok(BaseSpec::Gdp { mu })
        }
        "epsdelta" => {
            f.expect_keys(&["eps", "delta"])?;
            let (epsilon, delta) = (f.real("eps")?, f.real("delta")?);
            TradeoffCurve::eps_delta(epsilon, delta)?;
            Ok(BaseSpec::EpsDelta { epsilon, delta })
        }
        "dpsgd" => {
            f.expect_keys(&["sigma", "tau", "n"])?;
            Ok(BaseSpec::DpSgd(DpSgdConfig::new(
                f.real("sigma")?,
                f.real("tau")?,
                f.integer("n")?,
            )?))
        }
        other => Err(CliError::usage(format!(
            "`{input}`: unknown base kind `{other}` (expected gdp, epsdelta or dpsgd)"
        ))),
    }
}

pub fn parse_xi(input: &str) -> Result<RunCountDist, CliError> {
    let f = split(input)?;
    match f.kind {
        "pointmass" => {
            f.expect_keys(&["k"])?;
            Ok(RunCountDist::point_mass(f.integer("k")?)?)
        }
        "tnb" => {
            f.expect_keys(&["eta", "nu"])?;
            Ok(RunCountDist::tnb(f.real("eta")?, f.real("nu")?)?)
        }
        "geometric" => {
            f.expect_keys(&["nu"])?;
            Ok(RunCountDist::geometric(f.real("nu")?)?)
        }
        other => Err(CliError::usage(format!(
            "`{input}`: unknown run-count kind `{other}` (expected pointmass, tnb or geometric)"
        ))),
    }
}
