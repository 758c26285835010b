//! Run configuration: a flat TOML file of `key = value` pairs.
//!
//! Relative paths are resolved against the directory holding the file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::backtest::{DEFAULT_DQ_LAGS, MIN_CALIBRATION_PATHS};
use crate::empirical::{QuantileRule, DEFAULT_LAMBDA, HS_WINDOW};
use crate::error::{Error, Result};
use crate::ingest::{ColumnMapping, DATE_FORMAT};

pub const DEFAULT_LEVELS: [f64; 4] = [0.01, 0.05, 0.95, 0.99];
pub const DEFAULT_REFIT_CADENCE: usize = 20;
pub const DEFAULT_SEED: u64 = 20_150_102;
/// Smallest accepted UN calibration size; the default is far larger.
pub const MIN_UN_PATHS: usize = 1_000;

/// The six forecasting models, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelSpec {
    Hs,
    Garch,
    Egarch,
    Gjr,
    Ewqr,
    QrCom,
}

impl ModelSpec {
    pub const ALL: [ModelSpec; 6] = [
        ModelSpec::Hs,
        ModelSpec::Garch,
        ModelSpec::Egarch,
        ModelSpec::Gjr,
        ModelSpec::Ewqr,
        ModelSpec::QrCom,
    ];

    /// Short key used in configs and on the command line.
    pub fn key(self) -> &'static str {
        match self {
            ModelSpec::Hs => "HS",
            ModelSpec::Garch => "GARCH",
            ModelSpec::Egarch => "EGARCH",
            ModelSpec::Gjr => "GJR",
            ModelSpec::Ewqr => "EWQR",
            ModelSpec::QrCom => "QR-COM",
        }
    }

    /// Label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            ModelSpec::Hs => "HS",
            ModelSpec::Garch => "AR(1)-GARCH(1,1)",
            ModelSpec::Egarch => "AR(1)-EGARCH(1,1)",
            ModelSpec::Gjr => "AR(1)-GJR(1,1)",
            ModelSpec::Ewqr => "EWQR",
            ModelSpec::QrCom => "QR-COM",
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('_', "-");
        ModelSpec::ALL
            .into_iter()
            .find(|m| m.key() == norm || (norm == "QRCOM" && *m == ModelSpec::QrCom))
            .ok_or_else(|| Error::Config {
                field: "models".into(),
                message: format!("unknown model `{s}` (expected one of HS, GARCH, EGARCH, GJR, EWQR, QR-COM)"),
            })
    }
}

/// Parses a comma-separated model list such as `HS,GARCH`.
pub fn parse_model_list(s: &str) -> Result<Vec<ModelSpec>> {
    let models = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<_>>>()?;
    normalize_models(models)
}

fn normalize_models(mut models: Vec<ModelSpec>) -> Result<Vec<ModelSpec>> {
    models.sort();
    models.dedup();
    if models.is_empty() {
        return Err(Error::Config {
            field: "models".into(),
            message: "at least one model is required".into(),
        });
    }
    Ok(models)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportFormat {
    /// Comma-delimited `.csv` files.
    Csv,
    /// Column-aligned plain text `.txt` files.
    Table,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Table => "txt",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" | "delimited" => Ok(ReportFormat::Csv),
            "table" | "plain" | "plain-table" => Ok(ReportFormat::Table),
            other => Err(Error::Config {
                field: "formats".into(),
                message: format!("unknown format `{other}`"),
            }),
        }
    }
}

/// How roll days are taken for every input series.
#[derive(Debug, Clone, PartialEq)]
pub enum RollSource {
    /// The `roll_column` of each file, or no rolls if unset.
    Input,
    None,
    Monthly,
    Yearly,
    Calendar(PathBuf),
}

/// One price file and the labels used to group it in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesInput {
    pub path: PathBuf,
    pub name: String,
    pub market: String,
    pub contract: String,
}

impl SeriesInput {
    /// Labels from a file stem such as `np_m1`: market `NP`, contract `M1`.
    pub fn from_path(path: PathBuf) -> Self {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let (market, contract) = match stem.split_once(['_', '-']) {
            Some((m, c)) => (m.to_ascii_uppercase(), c.to_ascii_uppercase()),
            None => (stem.to_ascii_uppercase(), String::new()),
        };
        let name = if contract.is_empty() {
            market.clone()
        } else {
            format!("{market} {contract}")
        };
        Self {
            path,
            name,
            market,
            contract,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<SeriesInput>,
    pub columns: ColumnMapping,
    pub rolls: RollSource,
    pub fuel: Option<PathBuf>,
    pub fuel_date_column: String,
    /// Last in-sample date.
    pub split_date: NaiveDate,
    pub models: Vec<ModelSpec>,
    /// Sorted ascending.
    pub levels: Vec<f64>,
    pub hs_window: usize,
    pub ewqr_lambda: f64,
    pub ewqr_rule: QuantileRule,
    /// Out-of-sample days between re-fits; 0 keeps the in-sample fit throughout.
    pub refit_cadence: usize,
    pub dq_lags: usize,
    pub seed: u64,
    pub un_paths: usize,
    pub output_dir: PathBuf,
    pub formats: Vec<ReportFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            columns: ColumnMapping::default(),
            rolls: RollSource::Input,
            fuel: None,
            fuel_date_column: "date".into(),
            split_date: NaiveDate::from_ymd_opt(2014, 12, 31).expect("valid date"),
            models: ModelSpec::ALL.to_vec(),
            levels: DEFAULT_LEVELS.to_vec(),
            hs_window: HS_WINDOW,
            ewqr_lambda: DEFAULT_LAMBDA,
            ewqr_rule: QuantileRule::Step,
            refit_cadence: DEFAULT_REFIT_CADENCE,
            dq_lags: DEFAULT_DQ_LAGS,
            seed: DEFAULT_SEED,
            un_paths: MIN_CALIBRATION_PATHS,
            output_dir: PathBuf::from("out"),
            formats: vec![ReportFormat::Csv],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    input: Option<OneOrMany>,
    names: Option<Vec<String>>,
    markets: Option<Vec<String>>,
    contracts: Option<Vec<String>>,
    date_column: Option<String>,
    price_column: Option<String>,
    roll_column: Option<String>,
    roll_rule: Option<String>,
    roll_calendar: Option<String>,
    fuel: Option<String>,
    fuel_date_column: Option<String>,
    split_date: Option<String>,
    models: Option<OneOrMany>,
    levels: Option<Vec<f64>>,
    hs_window: Option<i64>,
    ewqr_lambda: Option<f64>,
    ewqr_rule: Option<String>,
    refit_cadence: Option<i64>,
    dq_lags: Option<i64>,
    seed: Option<i64>,
    un_paths: Option<i64>,
    output_dir: Option<String>,
    formats: Option<OneOrMany>,
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn positive(field: &str, v: i64) -> Result<usize> {
    if v > 0 {
        Ok(v as usize)
    } else {
        Err(config_err(field, format!("{v} must be positive")))
    }
}

fn labels(field: &str, given: Option<Vec<String>>, n: usize) -> Result<Option<Vec<String>>> {
    match given {
        Some(v) if v.len() != n => Err(config_err(field, format!("has {} entries for {n} inputs", v.len()))),
        other => Ok(other),
    }
}

/// Reads and validates a config file, applying defaults for absent keys.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base)
}

/// As [`parse_config`] on in-memory text; paths resolve against `base`.
pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let field = message
            .strip_prefix("unknown field `")
            .and_then(|rest| rest.split('`').next())
            .unwrap_or("config")
            .to_string();
        Error::Config { field, message }
    })?;
    let resolve = |p: &str| {
        let p = PathBuf::from(p);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };
    let mut cfg = RunConfig::default();

    let paths = raw.input.map(OneOrMany::into_vec).unwrap_or_default();
    if paths.is_empty() {
        return Err(config_err("input", "at least one input price file is required"));
    }
    let n = paths.len();
    let names = labels("names", raw.names, n)?;
    let markets = labels("markets", raw.markets, n)?;
    let contracts = labels("contracts", raw.contracts, n)?;
    for (i, p) in paths.iter().enumerate() {
        let mut s = SeriesInput::from_path(resolve(p));
        if let Some(m) = &markets {
            s.market = m[i].clone();
        }
        if let Some(c) = &contracts {
            s.contract = c[i].clone();
        }
        if let Some(nm) = &names {
            s.name = nm[i].clone();
        }
        cfg.inputs.push(s);
    }
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = cfg.inputs.iter().find(|s| !seen.insert(s.name.clone())) {
        return Err(config_err("names", format!("series name `{}` appears twice", dup.name)));
    }

    if let Some(c) = raw.date_column {
        cfg.columns.date = c;
    }
    if let Some(c) = raw.price_column {
        cfg.columns.price = c;
    }
    cfg.columns.roll = raw.roll_column;
    cfg.rolls = match raw.roll_rule.as_deref().map(str::to_ascii_lowercase).as_deref() {
        None | Some("input") => RollSource::Input,
        Some("none") => RollSource::None,
        Some("monthly") => RollSource::Monthly,
        Some("yearly") => RollSource::Yearly,
        Some("calendar") => match &raw.roll_calendar {
            Some(p) => RollSource::Calendar(resolve(p)),
            None => return Err(config_err("roll_calendar", "required when roll_rule = \"calendar\"")),
        },
        Some(other) => {
            return Err(config_err(
                "roll_rule",
                format!("unknown rule `{other}` (input, none, monthly, yearly, calendar)"),
            ))
        }
    };
    if raw.roll_calendar.is_some() && !matches!(cfg.rolls, RollSource::Calendar(_)) {
        return Err(config_err("roll_calendar", "given without roll_rule = \"calendar\""));
    }
    cfg.fuel = raw.fuel.as_deref().map(resolve);
    if let Some(c) = raw.fuel_date_column {
        cfg.fuel_date_column = c;
    }
    if let Some(s) = raw.split_date {
        cfg.split_date = NaiveDate::parse_from_str(&s, DATE_FORMAT)
            .map_err(|_| config_err("split_date", format!("`{s}` is not a YYYY-MM-DD date")))?;
    }
    if let Some(m) = raw.models {
        cfg.models = normalize_models(m.into_vec().iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?)?;
    }
    if let Some(levels) = raw.levels {
        cfg.levels = validate_levels(levels)?;
    }
    if let Some(w) = raw.hs_window {
        cfg.hs_window = positive("hs_window", w)?;
    }
    if let Some(l) = raw.ewqr_lambda {
        if !(l > 0.0 && l <= 1.0) {
            return Err(config_err("ewqr_lambda", format!("{l} is outside (0, 1]")));
        }
        cfg.ewqr_lambda = l;
    }
    if let Some(r) = raw.ewqr_rule {
        cfg.ewqr_rule = match r.to_ascii_lowercase().as_str() {
            "step" => QuantileRule::Step,
            "interpolated" => QuantileRule::Interpolated,
            other => {
                return Err(config_err(
                    "ewqr_rule",
                    format!("unknown rule `{other}` (step, interpolated)"),
                ))
            }
        };
    }
    if let Some(c) = raw.refit_cadence {
        if c < 0 {
            return Err(config_err("refit_cadence", format!("{c} must be non-negative")));
        }
        cfg.refit_cadence = c as usize;
    }
    if let Some(l) = raw.dq_lags {
        cfg.dq_lags = positive("dq_lags", l)?;
    }
    if let Some(s) = raw.seed {
        if s < 0 {
            return Err(config_err("seed", format!("{s} must be non-negative")));
        }
        cfg.seed = s as u64;
    }
    if let Some(p) = raw.un_paths {
        let p = positive("un_paths", p)?;
        if p < MIN_UN_PATHS {
            return Err(config_err(
                "un_paths",
                format!("{p} is below the minimum {MIN_UN_PATHS}"),
            ));
        }
        cfg.un_paths = p;
    }
    if let Some(o) = raw.output_dir {
        cfg.output_dir = resolve(&o);
    }
    if let Some(f) = raw.formats {
        let mut formats = f
            .into_vec()
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<ReportFormat>>>()?;
        formats.sort();
        formats.dedup();
        if formats.is_empty() {
            return Err(config_err("formats", "at least one format is required"));
        }
        cfg.formats = formats;
    }
    Ok(cfg)
}

/// Levels must lie in (0, 1) and be distinct; returned sorted.
pub fn validate_levels(mut levels: Vec<f64>) -> Result<Vec<f64>> {
    if levels.is_empty() {
        return Err(config_err("levels", "at least one level is required"));
    }
    if let Some(bad) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(config_err("levels", format!("{bad} is outside (0, 1)")));
    }
    levels.sort_by(f64::total_cmp);
    if levels.windows(2).any(|w| w[0] == w[1]) {
        return Err(config_err("levels", "levels must be distinct"));
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config_str(text, Path::new("/data"))
    }

    #[test]
    fn defaults_apply_with_only_an_input() {
        let cfg = parse("input = \"np_m1.csv\"\n").unwrap();
        assert_eq!(cfg.levels, vec![0.01, 0.05, 0.95, 0.99]);
        assert_eq!(cfg.hs_window, 250);
        assert_eq!(cfg.ewqr_lambda, 0.97);
        assert_eq!(cfg.refit_cadence, 20);
        assert_eq!(cfg.dq_lags, 4);
        assert_eq!(cfg.models, ModelSpec::ALL.to_vec());
        assert_eq!(cfg.split_date, NaiveDate::from_ymd_opt(2014, 12, 31).unwrap());
        assert_eq!(cfg.inputs[0].path, PathBuf::from("/data/np_m1.csv"));
        assert_eq!(
            (cfg.inputs[0].market.as_str(), cfg.inputs[0].contract.as_str()),
            ("NP", "M1")
        );
        assert_eq!(cfg.inputs[0].name, "NP M1");
    }

    #[test]
    fn bad_level_names_the_field() {
        let err = parse("input = \"a.csv\"\nlevels = [0.05, 1.5]\n").unwrap_err();
        assert!(
            matches!(&err, Error::Config { field, .. } if field == "levels"),
            "{err}"
        );
        assert!(err.is_validation());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse("input = \"a.csv\"\nwindow = 100\n").unwrap_err();
        assert!(
            matches!(&err, Error::Config { field, .. } if field == "window"),
            "{err}"
        );
    }

    #[test]
    fn missing_input_is_rejected() {
        let err = parse("seed = 3\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "input"));
    }

    #[test]
    fn lists_and_overrides() {
        let cfg = parse(
            "input = [\"fr_m1.csv\", \"/abs/ge_y1.csv\"]\nmodels = [\"garch\", \"HS\", \"qr-com\"]\n\
             levels = [0.99, 0.01]\nrefit_cadence = 0\nformats = [\"table\", \"csv\"]\nroll_rule = \"monthly\"\n",
        )
        .unwrap();
        assert_eq!(cfg.inputs[1].path, PathBuf::from("/abs/ge_y1.csv"));
        assert_eq!(cfg.models, vec![ModelSpec::Hs, ModelSpec::Garch, ModelSpec::QrCom]);
        assert_eq!(cfg.levels, vec![0.01, 0.99]);
        assert_eq!(cfg.refit_cadence, 0);
        assert_eq!(cfg.formats, vec![ReportFormat::Csv, ReportFormat::Table]);
        assert_eq!(cfg.rolls, RollSource::Monthly);
    }

    #[test]
    fn invalid_values() {
        for text in [
            "input = \"a.csv\"\nmodels = []\n",
            "input = \"a.csv\"\nmodels = [\"ARIMA\"]\n",
            "input = \"a.csv\"\newqr_lambda = 1.2\n",
            "input = \"a.csv\"\nsplit_date = \"31/12/2014\"\n",
            "input = \"a.csv\"\nhs_window = 0\n",
            "input = \"a.csv\"\nroll_rule = \"calendar\"\n",
            "input = [\"a.csv\", \"b.csv\"]\nnames = [\"x\"]\n",
            "input = [\"a.csv\", \"b/a.csv\"]\n",
            "input = \"a.csv\"\nun_paths = 10\n",
        ] {
            let err = parse(text).unwrap_err();
            assert!(err.is_validation(), "{text}: {err}");
        }
    }

    #[test]
    fn model_list_parsing() {
        assert_eq!(
            parse_model_list("gjr, hs").unwrap(),
            vec![ModelSpec::Hs, ModelSpec::Gjr]
        );
        assert!(parse_model_list("").is_err());
        for m in ModelSpec::ALL {
            assert_eq!(m.key().parse::<ModelSpec>().unwrap(), m);
        }
    }
}
