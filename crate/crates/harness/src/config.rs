//! Campaign configuration: TOML with a versioned schema. Unknown keys are
//! errors at every level.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use trapflow::dynamics::{Ensemble, Mode};
use trapflow::graphs::GraphSpec;
use trapflow::landscape::{read_explicit_table, LandscapeSpec};
use trapflow::rng::{derive_stream, Purpose};
use trapflow::scales::{pareto_scales, rem_scales, ScaleSet, TrapThresholds};

use crate::error::{HarnessError, HarnessResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "TRAPFLOW_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Simulate,
    Aging,
    Conditions,
    ExtremalReference,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Simulate => "simulate",
            Task::Aging => "aging",
            Task::Conditions => "conditions",
            Task::ExtremalReference => "extremal-reference",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = HarnessError;
    fn from_str(s: &str) -> HarnessResult<Self> {
        match s {
            "simulate" => Ok(Task::Simulate),
            "aging" => Ok(Task::Aging),
            "conditions" => Ok(Task::Conditions),
            "extremal-reference" => Ok(Task::ExtremalReference),
            other => Err(HarnessError::Config(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LandscapeConfig {
    /// Dimension comes from the hypercube graph.
    Rem {
        beta: f64,
        seed: Option<u64>,
    },
    Pareto {
        alpha: f64,
        scale: f64,
        seed: Option<u64>,
    },
    /// `vertex,tau` CSV, relative to the config file.
    Explicit {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "derive", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScalesConfig {
    /// Standard REM scale sequences from `(n, alpha, beta)`.
    Rem {
        alpha: f64,
    },
    /// `b = 1/target_r`, `g = scale * b^{-1/alpha}`.
    Pareto {
        target_r: f64,
    },
    Explicit {
        alpha: f64,
        g: f64,
        b: f64,
        f: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub epsilon: f64,
    /// May be `inf`.
    pub em: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgingConfig {
    /// `[a, b]` pairs.
    pub levels: Vec<[f64; 2]>,
    /// Gate `|estimate - a/b|` when set.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionAConfig {
    pub u_values: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionBConfig {
    /// Cloud density; defaults to `b_n`.
    pub density: Option<f64>,
    pub replicas: u64,
    pub k_g: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionCConfig {
    /// Cloud density is `rho * b_n`.
    pub rho: f64,
    pub s_values: Vec<f64>,
    pub replicas: u64,
    pub laplace_tolerance: f64,
    pub ks_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionDConfig {
    /// Defaults to the campaign graph.
    pub graph: Option<GraphSpec>,
    pub horizon: f64,
    pub lambda: f64,
    pub replicas: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConditionsConfig {
    pub a: Option<ConditionAConfig>,
    pub b: Option<ConditionBConfig>,
    pub c: Option<ConditionCConfig>,
    pub d: Option<ConditionDConfig>,
}

fn default_export_paths() -> u64 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalConfig {
    /// Marginal grid: every `(t, x)` pair is evaluated.
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    /// Extra multi-time points as `[[t1, t2, ...], [x1, x2, ...]]`.
    #[serde(default)]
    pub fdd_points: Vec<[Vec<f64>; 2]>,
    /// Paths sampled for the empirical fdd column.
    pub paths: u64,
    /// How many of them go to the paths CSV.
    #[serde(default = "default_export_paths")]
    pub export_paths: u64,
    pub floor: f64,
    pub path_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub schema: u32,
    pub task: Task,
    pub seed: u64,
    pub replicas: u64,
    #[serde(default)]
    pub mode: Mode,
    /// `T`, in units of `r_n` steps.
    pub horizon: f64,
    /// Sample times in units of `r_n`; defaults to 20 even steps up to `T`.
    pub grid: Option<Vec<f64>>,
    pub graph: Option<GraphSpec>,
    pub landscape: Option<LandscapeConfig>,
    pub scales: Option<ScalesConfig>,
    pub thresholds: Option<ThresholdConfig>,
    pub aging: Option<AgingConfig>,
    pub conditions: Option<ConditionsConfig>,
    pub extremal: Option<ExtremalConfig>,
}

/// A config together with where it came from and how the seed was chosen.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: CampaignConfig,
    pub base_dir: PathBuf,
    pub seed_source: SeedSource,
    /// SHA-256 of an explicit depth table, so edits to the data file
    /// change the campaign hash.
    pub data_digest: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    Config,
    Env,
    Flag,
}

impl std::fmt::Display for SeedSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SeedSource::Config => "config",
            SeedSource::Env => "env",
            SeedSource::Flag => "flag",
        })
    }
}

/// Command-line replacements for config fields. Spec strings use
/// `kind:key=value,...`, e.g. `rem:beta=3` or `explicit:alpha=0.5,g=2,b=0.1,f=1`.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<Task>,
    pub graph: Option<String>,
    pub landscape: Option<String>,
    pub scales: Option<String>,
    pub epsilon: Option<f64>,
    pub em: Option<f64>,
    pub horizon: Option<f64>,
    pub replicas: Option<u64>,
    /// Comma-separated sample times.
    pub grid: Option<String>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
}

/// `kind:k=v,...` as a table with the kind stored under `tag`.
fn spec_table(spec: &str, tag: &str) -> HarnessResult<toml::Value> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut table = toml::Table::new();
    table.insert(tag.into(), toml::Value::String(kind.trim().into()));
    for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) =
            pair.split_once('=').ok_or_else(|| invalid(format!("expected key=value in {spec:?}, got {pair:?}")))?;
        let v = v.trim();
        let value = if let Ok(i) = v.parse::<i64>() {
            toml::Value::Integer(i)
        } else if let Ok(x) = v.parse::<f64>() {
            toml::Value::Float(x)
        } else {
            toml::Value::String(v.into())
        };
        table.insert(k.trim().into(), value);
    }
    Ok(toml::Value::Table(table))
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.task.is_none()
            && self.graph.is_none()
            && self.landscape.is_none()
            && self.scales.is_none()
            && self.epsilon.is_none()
            && self.em.is_none()
            && self.horizon.is_none()
            && self.replicas.is_none()
            && self.grid.is_none()
            && self.seed.is_none()
            && self.mode.is_none()
    }

    pub fn apply(&self, c: &mut CampaignConfig) -> HarnessResult<()> {
        if let Some(t) = self.task {
            c.task = t;
        }
        if let Some(g) = &self.graph {
            c.graph = Some(g.parse()?);
        }
        if let Some(l) = &self.landscape {
            let v = spec_table(l, "kind")?;
            c.landscape = Some(v.try_into().map_err(|e| invalid(format!("--landscape {l:?}: {e}")))?);
        }
        if let Some(s) = &self.scales {
            let v = spec_table(s, "derive")?;
            c.scales = Some(v.try_into().map_err(|e| invalid(format!("--scales {s:?}: {e}")))?);
        }
        if self.epsilon.is_some() || self.em.is_some() {
            let old = c.thresholds;
            let epsilon =
                self.epsilon.or(old.map(|t| t.epsilon)).ok_or_else(|| invalid("--em given without an epsilon"))?;
            let em = self.em.or(old.map(|t| t.em)).unwrap_or(f64::INFINITY);
            c.thresholds = Some(ThresholdConfig { epsilon, em });
        }
        if let Some(h) = self.horizon {
            c.horizon = h;
        }
        if let Some(r) = self.replicas {
            c.replicas = r;
        }
        if let Some(g) = &self.grid {
            let grid = g
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| invalid(format!("bad grid entry {t:?}"))))
                .collect::<HarnessResult<_>>()?;
            c.grid = Some(grid);
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(m) = self.mode {
            c.mode = m;
        }
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> HarnessResult<Self> {
        let config = Self::parse(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Parses without the cross-field checks, so overrides can fill gaps.
    pub fn parse(text: &str) -> HarnessResult<Self> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn validate(&self) -> HarnessResult<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid(format!("schema {} not supported (expected {SCHEMA_VERSION})", self.schema)));
        }
        if self.replicas == 0 {
            return Err(invalid("replicas must be at least 1"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if let Some(grid) = &self.grid {
            if grid.windows(2).any(|w| !(w[0] <= w[1])) || grid.iter().any(|t| !(*t >= 0.0)) {
                return Err(invalid("grid must be sorted and nonnegative"));
            }
        }
        match self.task {
            Task::Simulate | Task::Aging => {
                self.require_model()?;
                if self.task == Task::Aging && self.aging.is_none() {
                    return Err(invalid("aging task needs an [aging] block"));
                }
            }
            Task::Conditions => {
                self.require_model()?;
                if self.conditions.is_none() {
                    return Err(invalid("conditions task needs a [conditions] block"));
                }
            }
            Task::ExtremalReference => {
                if self.extremal.is_none() {
                    return Err(invalid("extremal-reference task needs an [extremal] block"));
                }
            }
        }
        Ok(())
    }

    fn require_model(&self) -> HarnessResult<()> {
        for (name, present) in [
            ("graph", self.graph.is_some()),
            ("landscape", self.landscape.is_some()),
            ("scales", self.scales.is_some()),
            ("thresholds", self.thresholds.is_some()),
        ] {
            if !present {
                return Err(invalid(format!("task {} needs a [{name}] block", self.task)));
            }
        }
        Ok(())
    }

    /// Canonical form: JSON with sorted keys.
    pub fn canonical(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn grid(&self) -> Vec<f64> {
        self.grid.clone().unwrap_or_else(|| (0..=20).map(|i| self.horizon * i as f64 / 20.0).collect())
    }

    pub fn thresholds(&self) -> HarnessResult<TrapThresholds> {
        let t = self.thresholds.ok_or_else(|| invalid("missing [thresholds]"))?;
        Ok(TrapThresholds::new(t.epsilon, t.em)?)
    }

    pub fn graph(&self) -> HarnessResult<GraphSpec> {
        self.graph.ok_or_else(|| invalid("missing [graph]"))
    }

    /// Landscape seed: the configured one, or the first draw of the
    /// campaign's landscape stream.
    fn landscape_seed(&self, configured: Option<u64>) -> u64 {
        configured.unwrap_or_else(|| derive_stream(self.seed, 0, Purpose::Landscape).next_u64())
    }

    pub fn landscape(&self, base_dir: &Path) -> HarnessResult<LandscapeSpec> {
        let graph = self.graph()?;
        let spec = match self.landscape.as_ref().ok_or_else(|| invalid("missing [landscape]"))? {
            LandscapeConfig::Rem { beta, seed } => {
                let GraphSpec::Hypercube { n } = graph else {
                    return Err(invalid("rem landscape needs a hypercube graph"));
                };
                LandscapeSpec::rem(n, *beta, self.landscape_seed(*seed))?
            }
            LandscapeConfig::Pareto { alpha, scale, seed } => {
                LandscapeSpec::pareto(*alpha, *scale, self.landscape_seed(*seed))?
            }
            LandscapeConfig::Explicit { path } => {
                let full = base_dir.join(path);
                let file =
                    std::fs::File::open(&full).map_err(|e| HarnessError::Io(format!("{}: {e}", full.display())))?;
                LandscapeSpec::explicit(read_explicit_table(file)?)?
            }
        };
        Ok(spec)
    }

    pub fn scales(&self) -> HarnessResult<ScaleSet> {
        let graph = self.graph()?;
        match (self.scales.as_ref().ok_or_else(|| invalid("missing [scales]"))?, &self.landscape) {
            (ScalesConfig::Rem { alpha }, Some(LandscapeConfig::Rem { beta, .. })) => {
                let GraphSpec::Hypercube { n } = graph else {
                    return Err(invalid("rem scales need a hypercube graph"));
                };
                Ok(rem_scales(n, *alpha, *beta)?)
            }
            (ScalesConfig::Pareto { target_r }, Some(LandscapeConfig::Pareto { alpha, scale, .. })) => {
                Ok(pareto_scales(*alpha, *scale, *target_r)?)
            }
            (ScalesConfig::Explicit { alpha, g, b, f }, _) => Ok(ScaleSet::new(*alpha, *g, *b, *f)?),
            (s, _) => Err(invalid(format!("scales derivation {s:?} does not match the landscape"))),
        }
    }

    pub fn ensemble(&self, base_dir: &Path) -> HarnessResult<Ensemble> {
        let ens = Ensemble {
            graph: self.graph()?,
            landscape: self.landscape(base_dir)?,
            scales: self.scales()?,
            thresholds: self.thresholds()?,
            mode: self.mode,
            seed: self.seed,
        };
        // Builds and checks the replica-0 model up front.
        ens.model(0)?;
        Ok(ens)
    }
}

impl LoadedConfig {
    /// Reads `path`, applies `TRAPFLOW_SEED` and then `overrides`, and
    /// validates the result. A `--seed` flag beats the environment.
    pub fn load(path: &Path, overrides: &Overrides) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let env = std::env::var(SEED_ENV).ok();
        Self::from_parts(&text, path.parent().unwrap_or(Path::new(".")), overrides, env.as_deref())
    }

    pub fn from_parts(
        text: &str,
        base_dir: &Path,
        overrides: &Overrides,
        env_seed: Option<&str>,
    ) -> HarnessResult<Self> {
        let mut config = CampaignConfig::parse(text)?;
        let mut seed_source = SeedSource::Config;
        if let Some(s) = env_seed {
            config.seed = s.trim().parse().map_err(|_| invalid(format!("{SEED_ENV}={s:?} is not a u64")))?;
            seed_source = SeedSource::Env;
        }
        overrides.apply(&mut config)?;
        if overrides.seed.is_some() {
            seed_source = SeedSource::Flag;
        }
        config.validate()?;
        let data_digest = match &config.landscape {
            Some(LandscapeConfig::Explicit { path }) => {
                let full = base_dir.join(path);
                let bytes = std::fs::read(&full).map_err(|e| HarnessError::Io(format!("{}: {e}", full.display())))?;
                Some(hex(&Sha256::digest(&bytes)))
            }
            _ => None,
        };
        Ok(Self { config, base_dir: base_dir.to_path_buf(), seed_source, data_digest })
    }

    /// The hash stamped into outputs: the config's own hash, extended by
    /// the depth-table digest when there is one.
    pub fn hash(&self) -> String {
        match &self.data_digest {
            None => self.config.hash(),
            Some(d) => hex(&Sha256::digest(format!("{}\n{d}", self.config.canonical()).as_bytes())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REM: &str = r#"
schema = 1
task = "aging"
seed = 7
replicas = 10
horizon = 10.0
graph = { kind = "hypercube", n = 20 }
landscape = { kind = "rem", beta = 3.0 }
scales = { derive = "rem", alpha = 0.2 }
thresholds = { epsilon = 0.5, em = inf }
aging = { levels = [[1.0, 2.0]] }
"#;

    #[test]
    fn parses_and_derives() {
        let c = CampaignConfig::from_toml(REM).unwrap();
        assert_eq!(c.mode, Mode::Annealed);
        let s = c.scales().unwrap();
        let r = 0.6 * (40.0 * std::f64::consts::PI).sqrt() * 3.6f64.exp();
        assert!((s.r() / r - 1.0).abs() < 1e-12);
        assert_eq!(c.thresholds().unwrap().em, f64::INFINITY);
        assert_eq!(c.grid().len(), 21);
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let typo = REM.replace("beta = 3.0", "betta = 3.0");
        assert!(matches!(CampaignConfig::from_toml(&typo), Err(HarnessError::Config(_))));
        let extra = format!("{REM}\nextra = 1\n");
        assert!(CampaignConfig::from_toml(&extra).is_err());
        assert!(CampaignConfig::from_toml(&REM.replace("schema = 1", "schema = 2")).is_err());
        assert!(CampaignConfig::from_toml(&REM.replace("replicas = 10", "replicas = 0")).is_err());
    }

    #[test]
    fn inadmissible_scales_are_config_errors() {
        let hot = CampaignConfig::from_toml(&REM.replace("alpha = 0.2", "alpha = 0.5")).unwrap();
        assert_eq!(hot.scales().unwrap_err().exit_code(), crate::error::exit::INVALID_CONFIG);
    }

    #[test]
    fn env_seed_overrides_and_changes_hash() {
        let none = Overrides::default();
        let base = LoadedConfig::from_parts(REM, Path::new("."), &none, None).unwrap();
        let env = LoadedConfig::from_parts(REM, Path::new("."), &none, Some("99")).unwrap();
        assert_eq!((env.config.seed, env.seed_source), (99, SeedSource::Env));
        assert_ne!(base.config.hash(), env.config.hash());
        assert!(LoadedConfig::from_parts(REM, Path::new("."), &none, Some("x")).is_err());
        let flag = Overrides { seed: Some(5), ..Default::default() };
        let both = LoadedConfig::from_parts(REM, Path::new("."), &flag, Some("99")).unwrap();
        assert_eq!((both.config.seed, both.seed_source), (5, SeedSource::Flag));
    }

    #[test]
    fn overrides_replace_blocks() {
        let o = Overrides {
            graph: Some("complete:65536".into()),
            landscape: Some("pareto:alpha=0.1,scale=1".into()),
            scales: Some("pareto:target_r=500".into()),
            epsilon: Some(0.25),
            grid: Some("0, 0.5,1".into()),
            mode: Some(Mode::Quenched),
            ..Default::default()
        };
        let c = LoadedConfig::from_parts(REM, Path::new("."), &o, None).unwrap().config;
        assert_eq!(c.graph, Some(GraphSpec::complete(65536).unwrap()));
        assert_eq!(c.landscape, Some(LandscapeConfig::Pareto { alpha: 0.1, scale: 1.0, seed: None }));
        assert!((c.scales().unwrap().r() - 500.0).abs() < 1e-9);
        assert_eq!(c.thresholds, Some(ThresholdConfig { epsilon: 0.25, em: f64::INFINITY }));
        assert_eq!(c.grid, Some(vec![0.0, 0.5, 1.0]));
        assert_eq!(c.mode, Mode::Quenched);
        let bad = Overrides { landscape: Some("pareto:alpha=0.1,scael=1".into()), ..Default::default() };
        assert!(LoadedConfig::from_parts(REM, Path::new("."), &bad, None).is_err());
    }

    #[test]
    fn canonical_form_is_order_independent() {
        let reordered = r#"
task = "aging"
schema = 1
replicas = 10
seed = 7
aging = { levels = [[1.0, 2.0]] }
horizon = 10.0
thresholds = { em = inf, epsilon = 0.5 }
graph = { n = 20, kind = "hypercube" }
landscape = { kind = "rem", beta = 3.0 }
scales = { derive = "rem", alpha = 0.2 }
"#;
        let a = CampaignConfig::from_toml(REM).unwrap();
        let b = CampaignConfig::from_toml(reordered).unwrap();
        assert_eq!(a.hash(), b.hash());
    }
}
