//! Experiment configuration files.
//!
//! A configuration is a TOML document with these sections (keys not listed are
//! rejected):
//!
//! ```toml
//! [env]
//! kind = "bernoulli"        # bernoulli | beta | gaussian | gaussian_known
//! K = 10
//! # Optional per-arm overrides, each a number (applied to every arm) or a list of K numbers.
//! # bernoulli, beta:  a, b        Beta prior of the means (default a = i, b = K + 1 - i)
//! # beta:            scale        reward concentration (default 10)
//! # gaussian:        mu0, kappa0, alpha0, beta0   (default i / (K + 1), K, 4, 1)
//! # gaussian_known:  prior_mean, prior_var, sigma2 (default i / (K + 1), 1, 1)
//!
//! [[policy]]
//! kind = "varts"            # gaussian_ts | varts | ts14 | ts20 | bernoulli_ts | ucb1 | ucb1_tuned | ucb_v
//! name = "varts"            # optional, defaults to kind; names the output file
//! prior = "fit"             # varts: env | fit | explicit; gaussian_ts: env | baseline | explicit
//! fit_mode = "variance"     # exact | paper | variance (prior = "fit" only)
//! fit_samples = 10000
//! # explicit priors: mu0, kappa0, alpha0, beta0 (varts); prior_mean, prior_var, sigma2 (gaussian_ts)
//! # ts14: alpha (default 0.5); ucb_v: b (default 1), zeta (default 1.2)
//!
//! [run]
//! horizon = 2000
//! runs = 1000
//! seed = 7                  # required
//! record_every = 1
//!
//! [output]
//! path = "out"              # used when --out is not given
//! format = "csv"
//!
//! [bound]
//! delta = 0.0005            # default 1 / horizon
//! ```
//!
//! When `prior` is omitted, VarTS uses the environment prior on `gaussian`
//! environments and a `variance`-mode fit elsewhere; Gaussian TS uses the
//! environment prior on `gaussian_known` environments and `N(0, 1)` with unit
//! variance elsewhere. Giving any explicit prior key implies `prior = "explicit"`.

use std::collections::BTreeSet;
use std::path::PathBuf;

use bandit_lab::prior_fit::fit_env_prior;
use bandit_lab::runner::prior_fit_stream;
use bandit_lab::{
    BetaParams, EnvKind, EnvSpec, ExperimentConfig, FitMode, GaussianParams, NamedPolicy,
    NormalGammaParams, PolicyKind, PolicySpec, UcbVConstants,
};
use thiserror::Error;
use toml::{Table, Value};

pub const DEFAULT_HORIZON: usize = 2000;
pub const DEFAULT_RUNS: u64 = 1000;
pub const DEFAULT_FIT_SAMPLES: usize = 10_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown key `{key}` in {section}")]
    UnknownKey { section: String, key: String },
    #[error("missing required key `{key}` in {section}")]
    MissingKey { section: String, key: String },
    #[error("`{key}` in {section} must be {expected}")]
    Type {
        section: String,
        key: String,
        expected: String,
    },
    #[error("invalid value: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Model(#[from] bandit_lab::Error),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// A section of the document with strict key checking.
struct Section<'a> {
    name: String,
    table: &'a Table,
}

impl<'a> Section<'a> {
    fn new(name: impl Into<String>, table: &'a Table) -> Self {
        Self {
            name: name.into(),
            table,
        }
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.table.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(key) => Err(ConfigError::UnknownKey {
                section: self.name.clone(),
                key: key.clone(),
            }),
            None => Ok(()),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn type_error(&self, key: &str, expected: &str) -> ConfigError {
        ConfigError::Type {
            section: self.name.clone(),
            key: key.to_string(),
            expected: expected.to_string(),
        }
    }

    fn required<T>(&self, key: &str, value: Result<Option<T>>) -> Result<T> {
        value?.ok_or_else(|| ConfigError::MissingKey {
            section: self.name.clone(),
            key: key.to_string(),
        })
    }

    fn str(&self, key: &str) -> Result<Option<&'a str>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.type_error(key, "a string")),
        }
    }

    fn int(&self, key: &str) -> Result<Option<i64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(_) => Err(self.type_error(key, "an integer")),
        }
    }

    fn count(&self, key: &str, min: i64) -> Result<Option<u64>> {
        match self.int(key)? {
            None => Ok(None),
            Some(v) if v >= min => Ok(Some(v as u64)),
            Some(v) => Err(ConfigError::Domain(format!(
                "`{key}` in {} must be >= {min}, got {v}",
                self.name
            ))),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => as_float(v).map(Some).ok_or_else(|| self.type_error(key, "a number")),
        }
    }

    /// A number for every arm, or a list with one number per arm.
    fn per_arm(&self, key: &str, arms: usize) -> Result<Option<Vec<f64>>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => {
                let values = items
                    .iter()
                    .map(as_float)
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| self.type_error(key, "a number or a list of numbers"))?;
                if values.len() != arms {
                    return Err(ConfigError::Domain(format!(
                        "`{key}` in {} lists {} values for K = {arms}",
                        self.name,
                        values.len()
                    )));
                }
                Ok(Some(values))
            }
            Some(v) => as_float(v)
                .map(|x| Some(vec![x; arms]))
                .ok_or_else(|| self.type_error(key, "a number or a list of numbers")),
        }
    }

    fn per_arm_or(&self, key: &str, arms: usize, default: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
        Ok(self
            .per_arm(key, arms)?
            .unwrap_or_else(|| (1..=arms).map(default).collect()))
    }

    /// Whether any per-arm value is a list, which ties the section to one K.
    fn has_arm_list(&self, keys: &[&str]) -> bool {
        keys.iter().any(|k| matches!(self.table.get(*k), Some(Value::Array(_))))
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn syntax_error(text: &str, err: toml::de::Error) -> ConfigError {
    let offset = err.span().map(|s| s.start).unwrap_or(0).min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
    ConfigError::Syntax {
        line,
        column,
        message: err.message().to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvFamily {
    Bernoulli,
    Beta,
    Gaussian,
    GaussianKnown,
}

impl EnvFamily {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(EnvFamily::Bernoulli),
            "beta" => Ok(EnvFamily::Beta),
            "gaussian" => Ok(EnvFamily::Gaussian),
            "gaussian_known" => Ok(EnvFamily::GaussianKnown),
            other => Err(ConfigError::Domain(format!(
                "unknown env kind `{other}` (expected bernoulli, beta, gaussian or gaussian_known)"
            ))),
        }
    }
}

/// Parsed document, independent of K so that sweeps can rebuild it per K.
#[derive(Debug, Clone)]
pub struct ConfigDoc {
    root: Table,
    pub family: EnvFamily,
    pub arms: usize,
    pub horizon: usize,
    pub runs: u64,
    pub seed: u64,
    pub record_every: usize,
    pub output_path: Option<PathBuf>,
    pub delta: Option<f64>,
}

const ENV_COMMON: [&str; 2] = ["kind", "K"];
const BETA_KEYS: [&str; 2] = ["a", "b"];
const NG_KEYS: [&str; 4] = ["mu0", "kappa0", "alpha0", "beta0"];
const KNOWN_KEYS: [&str; 3] = ["prior_mean", "prior_var", "sigma2"];

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let root: Table = text.parse().map_err(|e| syntax_error(text, e))?;
        let top = Section::new("the document", &root);
        top.allow(&["env", "policy", "run", "output", "bound"])?;

        let env_table = sub_table(&root, "env")?.ok_or_else(|| ConfigError::MissingKey {
            section: "the document".into(),
            key: "env".into(),
        })?;
        let env = Section::new("[env]", env_table);
        let family = EnvFamily::parse(env.required("kind", env.str("kind"))?)?;
        let mut env_keys: Vec<&str> = ENV_COMMON.to_vec();
        match family {
            EnvFamily::Bernoulli => env_keys.extend(BETA_KEYS),
            EnvFamily::Beta => {
                env_keys.extend(BETA_KEYS);
                env_keys.push("scale");
            }
            EnvFamily::Gaussian => env_keys.extend(NG_KEYS),
            EnvFamily::GaussianKnown => env_keys.extend(KNOWN_KEYS),
        }
        env.allow(&env_keys)?;
        let arms = env.required("K", env.int("K"))?;
        if arms < 1 {
            return Err(ConfigError::Domain(format!("K must be >= 1, got {arms}")));
        }
        let arms = arms as usize;

        let run_table = sub_table(&root, "run")?.ok_or_else(|| ConfigError::MissingKey {
            section: "the document".into(),
            key: "run".into(),
        })?;
        let run = Section::new("[run]", run_table);
        run.allow(&["horizon", "runs", "seed", "record_every"])?;
        let horizon = run.count("horizon", 1)?.unwrap_or(DEFAULT_HORIZON as u64) as usize;
        let runs = run.count("runs", 1)?.unwrap_or(DEFAULT_RUNS);
        let seed = run.required("seed", run.count("seed", 0))?;
        let record_every = run.count("record_every", 1)?.unwrap_or(1) as usize;

        let mut output_path = None;
        if let Some(t) = sub_table(&root, "output")? {
            let out = Section::new("[output]", t);
            out.allow(&["path", "format"])?;
            output_path = out.str("path")?.map(PathBuf::from);
            if let Some(format) = out.str("format")? {
                if format != "csv" {
                    return Err(ConfigError::Domain(format!(
                        "unsupported output format `{format}` (only csv)"
                    )));
                }
            }
        }

        let mut delta = None;
        if let Some(t) = sub_table(&root, "bound")? {
            let bound = Section::new("[bound]", t);
            bound.allow(&["delta"])?;
            delta = bound.float("delta")?;
            if let Some(d) = delta {
                if !(d > 0.0 && d <= 1.0) {
                    return Err(ConfigError::Domain(format!("delta must lie in (0, 1], got {d}")));
                }
            }
        }

        let doc = Self {
            root,
            family,
            arms,
            horizon,
            runs,
            seed,
            record_every,
            output_path,
            delta,
        };
        // Check policy sections up front so that errors surface before any work.
        doc.policy_sections()?;
        Ok(doc)
    }

    /// Whether the configuration can be rebuilt for a different K.
    pub fn is_k_generic(&self) -> bool {
        let env = Section::new("[env]", sub_table(&self.root, "env").ok().flatten().expect("checked"));
        let mut keys: Vec<&str> = BETA_KEYS.to_vec();
        keys.extend(NG_KEYS);
        keys.extend(KNOWN_KEYS);
        if env.has_arm_list(&keys) {
            return false;
        }
        let mut policy_keys = NG_KEYS.to_vec();
        policy_keys.extend(KNOWN_KEYS);
        self.policy_sections()
            .map(|ps| ps.iter().all(|p| !p.has_arm_list(&policy_keys)))
            .unwrap_or(false)
    }

    fn policy_sections(&self) -> Result<Vec<Section<'_>>> {
        let items = match self.root.get("policy") {
            None => {
                return Err(ConfigError::MissingKey {
                    section: "the document".into(),
                    key: "policy".into(),
                })
            }
            Some(Value::Array(items)) => items,
            Some(_) => {
                return Err(ConfigError::Type {
                    section: "the document".into(),
                    key: "policy".into(),
                    expected: "an array of tables ([[policy]])".into(),
                })
            }
        };
        if items.is_empty() {
            return Err(ConfigError::Domain("at least one [[policy]] is required".into()));
        }
        let mut sections = Vec::with_capacity(items.len());
        let mut names = BTreeSet::new();
        for (i, item) in items.iter().enumerate() {
            let table = item.as_table().ok_or_else(|| ConfigError::Type {
                section: "the document".into(),
                key: "policy".into(),
                expected: "an array of tables ([[policy]])".into(),
            })?;
            let s = Section::new(format!("[[policy]] #{}", i + 1), table);
            let kind: PolicyKind = s.required("kind", s.str("kind"))?.parse()?;
            s.allow(policy_keys(kind))?;
            let name = s.str("name")?.unwrap_or(kind.as_str());
            if name.is_empty()
                || !name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
            {
                return Err(ConfigError::Domain(format!(
                    "policy name `{name}` must be non-empty and use only letters, digits, `_`, `-` or `.`"
                )));
            }
            if !names.insert(name.to_string()) {
                return Err(ConfigError::Domain(format!("duplicate policy name `{name}`")));
            }
            sections.push(s);
        }
        Ok(sections)
    }

    pub fn env_spec(&self, arms: usize) -> Result<EnvSpec> {
        if arms < 1 {
            return Err(ConfigError::Domain(format!("K must be >= 1, got {arms}")));
        }
        let env = Section::new("[env]", sub_table(&self.root, "env")?.expect("checked in parse"));
        let k = arms as f64;
        let centred = |i: usize| i as f64 / (k + 1.0);
        let beta_prior = || -> Result<Vec<BetaParams>> {
            let a = env.per_arm_or("a", arms, |i| i as f64)?;
            let b = env.per_arm_or("b", arms, |i| k + 1.0 - i as f64)?;
            Ok(a.iter()
                .zip(&b)
                .map(|(a, b)| BetaParams::new(*a, *b))
                .collect::<bandit_lab::Result<_>>()?)
        };
        let kind = match self.family {
            EnvFamily::Bernoulli => EnvKind::BernoulliBeta { prior: beta_prior()? },
            EnvFamily::Beta => EnvKind::BetaScaled {
                prior: beta_prior()?,
                scale: env.float("scale")?.unwrap_or(10.0),
            },
            EnvFamily::Gaussian => EnvKind::GaussianNG {
                prior: normal_gamma(&env, arms, centred, |_| k)?,
            },
            EnvFamily::GaussianKnown => {
                let (prior, sigma2) = known_variance(&env, arms, centred)?;
                EnvKind::GaussianKnownVar { prior, sigma2 }
            }
        };
        Ok(EnvSpec::new(kind)?)
    }

    /// Resolves the document for `arms` arms, fitting data-driven priors with the
    /// configured seed.
    pub fn experiment(&self, arms: usize) -> Result<ExperimentConfig> {
        let env = self.env_spec(arms)?;
        let policies = self
            .policy_sections()?
            .iter()
            .map(|s| self.policy(s, &env))
            .collect::<Result<Vec<_>>>()?;
        let config = ExperimentConfig {
            env,
            policies,
            horizon: self.horizon,
            runs: self.runs,
            root_seed: self.seed,
            record_every: self.record_every,
        };
        config.validate()?;
        Ok(config)
    }

    fn policy(&self, s: &Section<'_>, env: &EnvSpec) -> Result<NamedPolicy> {
        let arms = env.arms();
        let kind: PolicyKind = s.str("kind")?.expect("checked").parse()?;
        let name = s.str("name")?.unwrap_or(kind.as_str()).to_string();
        let spec = match kind {
            PolicyKind::GaussianTs => {
                let explicit = KNOWN_KEYS.iter().any(|k| s.has(k));
                let default_mode = if explicit {
                    "explicit"
                } else if env.known_variance_prior().is_some() {
                    "env"
                } else {
                    "baseline"
                };
                match prior_mode(s, default_mode, &["env", "baseline", "explicit"])? {
                    "env" => {
                        let (prior, sigma2) = env.known_variance_prior().ok_or_else(|| {
                            ConfigError::Domain(format!(
                                "{}: prior = \"env\" needs a gaussian_known environment",
                                s.name
                            ))
                        })?;
                        PolicySpec::GaussianTs {
                            prior: prior.to_vec(),
                            sigma2: sigma2.to_vec(),
                        }
                    }
                    "baseline" => {
                        forbid(s, &KNOWN_KEYS, "baseline")?;
                        PolicySpec::gaussian_ts_baseline(arms)
                    }
                    _ => {
                        let (prior, sigma2) = known_variance(s, arms, |_| 0.0)?;
                        PolicySpec::GaussianTs { prior, sigma2 }
                    }
                }
            }
            PolicyKind::VarTs => {
                let explicit = NG_KEYS.iter().any(|k| s.has(k));
                let default_mode = if explicit {
                    "explicit"
                } else if env.normal_gamma_prior().is_some() {
                    "env"
                } else {
                    "fit"
                };
                let mode = prior_mode(s, default_mode, &["env", "fit", "explicit"])?;
                if mode != "fit" && (s.has("fit_mode") || s.has("fit_samples")) {
                    return Err(ConfigError::Domain(format!(
                        "{}: fit_mode and fit_samples apply only to prior = \"fit\"",
                        s.name
                    )));
                }
                let prior = match mode {
                    "env" => {
                        forbid(s, &NG_KEYS, "env")?;
                        env.normal_gamma_prior()
                            .ok_or_else(|| {
                                ConfigError::Domain(format!(
                                    "{}: prior = \"env\" needs a gaussian environment",
                                    s.name
                                ))
                            })?
                            .to_vec()
                    }
                    "fit" => {
                        forbid(s, &NG_KEYS, "fit")?;
                        let fit_mode: FitMode = s.str("fit_mode")?.unwrap_or("variance").parse()?;
                        let samples = s.count("fit_samples", 2)?.unwrap_or(DEFAULT_FIT_SAMPLES as u64);
                        fit_env_prior(env, fit_mode, samples as usize, &mut prior_fit_stream(self.seed))?
                    }
                    _ => normal_gamma(s, arms, |_| 0.0, |_| 1.0)?,
                };
                PolicySpec::VarTs { prior }
            }
            PolicyKind::Ts14 => PolicySpec::Ts14 {
                alpha: s.float("alpha")?.unwrap_or(bandit_lab::policies::TS14_DEFAULT_ALPHA),
            },
            PolicyKind::Ts20 => PolicySpec::Ts20,
            PolicyKind::BernoulliTs => PolicySpec::BernoulliTs,
            PolicyKind::Ucb1 => PolicySpec::Ucb1,
            PolicyKind::Ucb1Tuned => PolicySpec::Ucb1Tuned,
            PolicyKind::UcbV => {
                let d = UcbVConstants::default();
                PolicySpec::UcbV(UcbVConstants {
                    b: s.float("b")?.unwrap_or(d.b),
                    zeta: s.float("zeta")?.unwrap_or(d.zeta),
                })
            }
        };
        Ok(NamedPolicy::new(name, spec))
    }
}

fn sub_table<'a>(root: &'a Table, key: &str) -> Result<Option<&'a Table>> {
    match root.get(key) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(ConfigError::Type {
            section: "the document".into(),
            key: key.into(),
            expected: format!("a table ([{key}])"),
        }),
    }
}

fn policy_keys(kind: PolicyKind) -> &'static [&'static str] {
    match kind {
        PolicyKind::GaussianTs => &["kind", "name", "prior", "prior_mean", "prior_var", "sigma2"],
        PolicyKind::VarTs => &[
            "kind", "name", "prior", "fit_mode", "fit_samples", "mu0", "kappa0", "alpha0", "beta0",
        ],
        PolicyKind::Ts14 => &["kind", "name", "alpha"],
        PolicyKind::UcbV => &["kind", "name", "b", "zeta"],
        PolicyKind::Ts20 | PolicyKind::BernoulliTs | PolicyKind::Ucb1 | PolicyKind::Ucb1Tuned => {
            &["kind", "name"]
        }
    }
}

fn prior_mode<'a>(s: &Section<'a>, default: &'a str, allowed: &[&str]) -> Result<&'a str> {
    let mode = s.str("prior")?.unwrap_or(default);
    if allowed.contains(&mode) {
        Ok(mode)
    } else {
        Err(ConfigError::Domain(format!(
            "{}: prior must be one of {}, got `{mode}`",
            s.name,
            allowed.join(", ")
        )))
    }
}

fn forbid(s: &Section<'_>, keys: &[&str], mode: &str) -> Result<()> {
    match keys.iter().find(|k| s.has(k)) {
        Some(k) => Err(ConfigError::Domain(format!(
            "{}: `{k}` cannot be combined with prior = \"{mode}\"",
            s.name
        ))),
        None => Ok(()),
    }
}

fn normal_gamma(
    s: &Section<'_>,
    arms: usize,
    mu0: impl Fn(usize) -> f64,
    kappa0: impl Fn(usize) -> f64,
) -> Result<Vec<NormalGammaParams>> {
    let mu = s.per_arm_or("mu0", arms, mu0)?;
    let kappa = s.per_arm_or("kappa0", arms, kappa0)?;
    let alpha = s.per_arm_or("alpha0", arms, |_| 4.0)?;
    let beta = s.per_arm_or("beta0", arms, |_| 1.0)?;
    Ok((0..arms)
        .map(|i| NormalGammaParams::new(mu[i], kappa[i], alpha[i], beta[i]))
        .collect::<bandit_lab::Result<_>>()?)
}

fn known_variance(
    s: &Section<'_>,
    arms: usize,
    mean: impl Fn(usize) -> f64,
) -> Result<(Vec<GaussianParams>, Vec<f64>)> {
    let means = s.per_arm_or("prior_mean", arms, mean)?;
    let vars = s.per_arm_or("prior_var", arms, |_| 1.0)?;
    let sigma2 = s.per_arm_or("sigma2", arms, |_| 1.0)?;
    let prior = means
        .iter()
        .zip(&vars)
        .map(|(m, v)| GaussianParams::new(*m, *v))
        .collect::<bandit_lab::Result<_>>()?;
    Ok((prior, sigma2))
}

/// Parses a configuration and resolves it for the configured K.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let doc = ConfigDoc::parse(text)?;
    doc.experiment(doc.arms)
}
