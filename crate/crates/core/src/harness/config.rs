use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::fit::Extrapolation;
use super::target::Target;
use crate::error::{Error, Result};
use crate::moments::{KappaVariant, ModelParams, ParamPolicy, PhiVariant, Variants};
use crate::skexact::{FieldMode, MAX_SITES, MAX_SITES_HIGH_ORDER};

pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailConfig {
    pub samples: usize,
    pub pairs: usize,
    pub t_values: Vec<f64>,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig {
            samples: 200,
            pairs: 1000,
            t_values: vec![0.0, 0.05, 0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub n_grid: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub targets: Vec<Target>,
    pub variants: Variants,
    /// Correlation order of the enumeration; derived from the targets when unset.
    pub order: Option<usize>,
    pub field_mode: FieldMode,
    pub allow_high_beta: bool,
    pub oracle: bool,
    pub extrapolation: Extrapolation,
    /// Targets whose N-dependence is checked.
    pub scaling: Vec<Target>,
    pub tails: Option<TailConfig>,
    #[serde(skip)]
    pub out_json: Option<PathBuf>,
    #[serde(skip)]
    pub out_csv: Option<PathBuf>,
}

pub const DEFAULT_TARGETS: [&str; 10] = [
    "T{1,2}^2",
    "T{1,2}:1*T{1,2}",
    "T{1,2,3}^2",
    "T{1}:1^2",
    "T{1}:2*T{1}:1",
    "T{}:2^2",
    "T{}:2*T{}:3",
    "R{1,2}^2",
    "T{1,2}^4",
    "T{1,2}*T{1,3}*T{2,3}",
];

impl ExperimentConfig {
    /// The standard verification run.
    pub fn default_verification() -> Self {
        ExperimentConfig {
            params: ModelParams { beta: 0.15, h: 0.3 },
            n_grid: vec![8, 12, 16, 20],
            samples: 20_000,
            seed: 1,
            targets: DEFAULT_TARGETS
                .iter()
                .map(|t| Target::parse(t).expect("built-in target"))
                .collect(),
            variants: Variants::default(),
            order: None,
            field_mode: FieldMode::Sk,
            allow_high_beta: false,
            oracle: true,
            extrapolation: Extrapolation::default(),
            scaling: vec![
                Target::parse("T{1,2}^2").expect("built-in target"),
                Target::parse("T{1,2}*T{1,3}*T{2,3}").expect("built-in target"),
            ],
            tails: Some(TailConfig::default()),
            out_json: None,
            out_csv: None,
        }
    }

    pub fn policy(&self) -> ParamPolicy {
        ParamPolicy {
            allow_high_beta: self.allow_high_beta,
            ..ParamPolicy::default()
        }
    }

    /// Order actually used for the enumeration.
    pub fn effective_order(&self) -> usize {
        self.order.unwrap_or_else(|| {
            self.targets
                .iter()
                .map(Target::required_order)
                .max()
                .unwrap_or(2)
        })
    }

    /// Checks structural invariants; returns parameter warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let warnings = self.params.validate(&self.policy())?;
        if self.n_grid.len() < 2 {
            return Err(Error::Config(
                "n_grid needs at least two sizes for the intercept fit".into(),
            ));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        let order = self.effective_order();
        if !(2..=4).contains(&order) {
            return Err(Error::Config(format!("order must be 2, 3 or 4, got {order}")));
        }
        if let Some(t) = self.targets.iter().find(|t| t.required_order() > order) {
            return Err(Error::Config(format!(
                "target {t} needs order {} but order is {order}",
                t.required_order()
            )));
        }
        let cap = if order > 2 { MAX_SITES_HIGH_ORDER } else { MAX_SITES };
        if let Some(n) = self.n_grid.iter().find(|&&n| !(2..=cap).contains(&n)) {
            return Err(Error::Config(format!(
                "n_grid entry {n} outside 2..={cap} for order {order}"
            )));
        }
        if self.samples < MIN_SAMPLES {
            return Err(Error::Config(format!(
                "samples must be >= {MIN_SAMPLES}, got {}",
                self.samples
            )));
        }
        for t in self.targets.iter().filter(|t| !t.exact_zero()) {
            let k = self.extrapolation.exponents(t.degree()).len();
            if self.n_grid.len() < k {
                return Err(Error::Config(format!(
                    "target {t} needs at least {k} sizes for the {} extrapolation",
                    self.extrapolation.name()
                )));
            }
        }
        if self.targets.is_empty() {
            return Err(Error::Config("no targets".into()));
        }
        for s in &self.scaling {
            if !self.targets.contains(s) {
                return Err(Error::Config(format!(
                    "scaling target {s} is not among the targets"
                )));
            }
        }
        if let Some(t) = &self.tails {
            if t.samples == 0 || t.pairs == 0 || t.t_values.iter().any(|x| x.is_nan() || *x < 0.0) {
                return Err(Error::Config(
                    "tail settings need positive samples/pairs and t >= 0".into(),
                ));
            }
        }
        Ok(warnings)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses `key = value` lines; `#` starts a comment. Keys not given keep
    /// their [`default_verification`](Self::default_verification) values.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default_verification();
        let mut seen = BTreeSet::new();
        let (mut beta, mut h) = (cfg.params.beta, cfg.params.h);
        let mut tails_off = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key {key}", lineno + 1)));
            }
            let ctx = |e: Error| Error::Config(format!("line {}: {key}: {e}", lineno + 1));
            match key {
                "beta" => beta = parse_num(value).map_err(ctx)?,
                "h" => h = parse_num(value).map_err(ctx)?,
                "n_grid" => {
                    cfg.n_grid = split_list(value)
                        .iter()
                        .map(|v| parse_num(v))
                        .collect::<Result<_>>()
                        .map_err(ctx)?
                }
                "samples" => cfg.samples = parse_num(value).map_err(ctx)?,
                "seed" => cfg.seed = parse_num(value).map_err(ctx)?,
                "targets" => cfg.targets = parse_targets(value).map_err(ctx)?,
                "scaling" => cfg.scaling = parse_targets(value).map_err(ctx)?,
                "kappa" => {
                    cfg.variants.kappa = match value {
                        "statement" => KappaVariant::Statement,
                        "proof" => KappaVariant::Proof,
                        _ => return Err(ctx(Error::Config(format!("unknown variant {value}")))),
                    }
                }
                "phi" => {
                    cfg.variants.phi = match value {
                        "definition" => PhiVariant::Definition,
                        "statement" => PhiVariant::Statement,
                        _ => return Err(ctx(Error::Config(format!("unknown variant {value}")))),
                    }
                }
                "order" => {
                    cfg.order = match value {
                        "auto" => None,
                        v => Some(parse_num(v).map_err(ctx)?),
                    }
                }
                "anchor_mode" => {
                    cfg.field_mode = if parse_bool(value).map_err(ctx)? {
                        FieldMode::IndependentField
                    } else {
                        FieldMode::Sk
                    }
                }
                "allow_high_beta" => cfg.allow_high_beta = parse_bool(value).map_err(ctx)?,
                "oracle" => cfg.oracle = parse_bool(value).map_err(ctx)?,
                "extrapolation" => {
                    cfg.extrapolation = match value {
                        "parity" => Extrapolation::Parity,
                        "sqrt" => Extrapolation::Sqrt,
                        _ => return Err(ctx(Error::Config(format!("unknown model {value}")))),
                    }
                }
                "tails" => tails_off = !parse_bool(value).map_err(ctx)?,
                "tail_samples" => tails(&mut cfg).samples = parse_num(value).map_err(ctx)?,
                "tail_pairs" => tails(&mut cfg).pairs = parse_num(value).map_err(ctx)?,
                "tail_t" => {
                    tails(&mut cfg).t_values = split_list(value)
                        .iter()
                        .map(|v| parse_num(v))
                        .collect::<Result<_>>()
                        .map_err(ctx)?
                }
                "out_json" => cfg.out_json = Some(PathBuf::from(value)),
                "out_csv" => cfg.out_csv = Some(PathBuf::from(value)),
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {key}",
                        lineno + 1
                    )))
                }
            }
        }
        if tails_off {
            if tail_keys_set(&seen) {
                return Err(Error::Config("tail settings given with tails = false".into()));
            }
            cfg.tails = None;
        }
        cfg.params = ModelParams::new(beta, h).map_err(|e| Error::Config(e.to_string()))?;
        if !seen.contains("scaling") {
            cfg.scaling.retain(|s| cfg.targets.contains(s));
        }
        Ok(cfg)
    }

    /// Renders the config in the format accepted by [`parse`](Self::parse).
    pub fn to_text(&self) -> String {
        let list = |v: &[Target]| v.iter().map(|t| t.label().to_string()).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        s += &format!("beta = {}\nh = {}\n", self.params.beta, self.params.h);
        s += &format!(
            "n_grid = {}\n",
            self.n_grid.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
        );
        s += &format!("samples = {}\nseed = {}\n", self.samples, self.seed);
        s += &format!("targets = {}\n", list(&self.targets));
        s += &format!("scaling = {}\n", list(&self.scaling));
        s += &format!(
            "kappa = {}\nphi = {}\n",
            self.variants.kappa.name(),
            self.variants.phi.name()
        );
        s += &format!(
            "order = {}\n",
            self.order.map_or("auto".to_string(), |o| o.to_string())
        );
        s += &format!(
            "anchor_mode = {}\nallow_high_beta = {}\noracle = {}\nextrapolation = {}\n",
            self.field_mode == FieldMode::IndependentField,
            self.allow_high_beta,
            self.oracle,
            self.extrapolation.name()
        );
        match &self.tails {
            None => s += "tails = false\n",
            Some(t) => {
                s += &format!(
                    "tails = true\ntail_samples = {}\ntail_pairs = {}\ntail_t = {}\n",
                    t.samples,
                    t.pairs,
                    t.t_values.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
                );
            }
        }
        if let Some(p) = &self.out_json {
            s += &format!("out_json = {}\n", p.display());
        }
        if let Some(p) = &self.out_csv {
            s += &format!("out_csv = {}\n", p.display());
        }
        s
    }
}

fn tails(cfg: &mut ExperimentConfig) -> &mut TailConfig {
    cfg.tails.get_or_insert_with(TailConfig::default)
}

fn tail_keys_set(seen: &BTreeSet<String>) -> bool {
    ["tail_samples", "tail_pairs", "tail_t"]
        .iter()
        .any(|k| seen.contains(*k))
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| Error::Config(format!("cannot parse {v:?}")))
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("expected a boolean, got {v:?}"))),
    }
}

fn parse_targets(v: &str) -> Result<Vec<Target>> {
    split_list(v).iter().map(|t| Target::parse(t)).collect()
}

/// Splits on commas outside braces; empty items are dropped.
pub(crate) fn split_list(value: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in value.chars() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur);
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brace_aware_split() {
        assert_eq!(
            split_list("T{1,2}^2, T{}:2*T{}:3 ,R{1,2}"),
            vec!["T{1,2}^2", "T{}:2*T{}:3", "R{1,2}"]
        );
    }

    #[test]
    fn default_round_trips() {
        let cfg = ExperimentConfig::default_verification();
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.effective_order(), 4);
        assert!(cfg.validate().unwrap().is_empty());
    }

    #[test]
    fn parses_overrides() {
        let cfg = ExperimentConfig::parse(
            "# small run\nbeta = 0.1\nh=0.2\nn_grid = 6, 8\nsamples = 200 # few\n\
             targets = T{1,2}^2, T{1}:1^2\nkappa = statement\ntails = false\n",
        )
        .unwrap();
        assert_eq!(cfg.params, ModelParams::new(0.1, 0.2).unwrap());
        assert_eq!(cfg.n_grid, vec![6, 8]);
        assert_eq!(cfg.targets.len(), 2);
        assert_eq!(cfg.variants.kappa, KappaVariant::Statement);
        assert!(cfg.tails.is_none());
        assert_eq!(cfg.scaling.len(), 1);
        assert_eq!(cfg.effective_order(), 2);
    }

    #[test]
    fn rejects_invalid() {
        for bad in [
            "bogus = 1",
            "beta",
            "beta = x",
            "samples = 5\nsamples = 6",
            "targets = Q{1}",
            "kappa = maybe",
            "extrapolation = cubic",
            "tails = false\ntail_pairs = 5",
        ] {
            assert!(ExperimentConfig::parse(bad).is_err(), "{bad}");
        }
        let invalid = [
            "n_grid = 8",
            "n_grid = 12, 8",
            "samples = 10",
            "n_grid = 8, 22",
            "beta = 0.3",
            "order = 2",
            "n_grid = 8, 12\ntargets = T{1,2}*T{1,3}*T{2,3}",
            "scaling = T{1}:1^2\ntargets = T{1,2}^2",
        ];
        for bad in invalid {
            let cfg = ExperimentConfig::parse(bad).unwrap();
            assert!(cfg.validate().is_err(), "{bad}");
        }
    }
}
