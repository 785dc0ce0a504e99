//! Scenario configuration: flat `key=value` files with documented keys.

use crate::drivers::SeedSpec;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Reference list of every configuration key. Unknown keys are rejected.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("master_seed", "u64 master seed of the run (default 1)"),
    ("stream_id", "u64 base stream id; path i uses stream_id + i (default 0)"),
    ("n_paths", "paths per Monte Carlo sweep point (default 100000)"),
    ("t", "terminal time (default 1.0, must be positive)"),
    ("n_steps", "Euler steps on [0, t] (default 64)"),
    (
        "epsilon_sweep",
        "comma-separated dyadic exponents k >= 1; the window sweep is eps = t*2^-k (default 3,4,5,6,7,8)",
    ),
    (
        "h_sweep",
        "comma-separated dyadic exponents k >= 0; the displacement sweep is h = 2^-k (default 2,3,4,5,6,7)",
    ),
    ("workers", "worker threads; 0 uses every core; results do not depend on it (default 0)"),
    ("output_dir", "directory for CSV/JSON artifacts (default: no artifacts)"),
    ("override.beta", "coefficient Hoelder exponent knob (scenario-specific default)"),
    ("override.alpha_stable", "stable driver index in (0,2] (default 1.5)"),
    ("override.truncation_m", "rough-drift truncation level M (default 20)"),
    ("override.bandwidth", "mollifier bandwidth for density grids (scenario-specific default)"),
    ("override.gamma", "regularity index probed by the rough-drift scenario (default 0.3)"),
    ("tol.<check_id>", "tolerance override for one named check"),
];

/// Config for one scenario run. Sweeps are stored as dyadic exponents, so
/// they are dyadic by construction and `epsilon >= t` is unrepresentable.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: SeedSpec,
    pub n_paths: usize,
    pub t: f64,
    pub n_steps: usize,
    pub epsilon_exponents: Vec<u32>,
    pub h_exponents: Vec<u32>,
    pub workers: usize,
    pub output_dir: Option<PathBuf>,
    pub overrides: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
}

impl ScenarioConfig {
    /// Documented defaults. The stable-driver and rough-drift scenarios
    /// sweep shorter windows by default because their checks read the
    /// window as a terminal time.
    pub fn defaults(name: &str) -> Self {
        let epsilon_exponents = match name {
            "levy_stable" | "rough_drift" => vec![1, 2, 3, 4, 5],
            _ => vec![3, 4, 5, 6, 7, 8],
        };
        ScenarioConfig {
            name: name.to_string(),
            seed: SeedSpec::new(1, 0),
            n_paths: 100_000,
            t: 1.0,
            n_steps: 64,
            epsilon_exponents,
            h_exponents: vec![2, 3, 4, 5, 6, 7],
            workers: 0,
            output_dir: None,
            overrides: BTreeMap::new(),
            tolerances: BTreeMap::new(),
        }
    }

    /// Applies `key=value` lines; `#` starts a comment. Unknown keys error.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                )));
            };
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Sets a single documented key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| Error::Config(format!("key '{key}': {e}")))
        }
        fn parse_exponents(key: &str, value: &str) -> Result<Vec<u32>> {
            value
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<u32>().map_err(|e| {
                        Error::Config(format!("key '{key}': bad exponent '{tok}': {e}"))
                    })
                })
                .collect()
        }
        match key {
            "master_seed" => self.seed.master_seed = parse(key, value)?,
            "stream_id" => self.seed.stream_id = parse(key, value)?,
            "n_paths" => self.n_paths = parse(key, value)?,
            "t" => self.t = parse(key, value)?,
            "n_steps" => self.n_steps = parse(key, value)?,
            "epsilon_sweep" => self.epsilon_exponents = parse_exponents(key, value)?,
            "h_sweep" => self.h_exponents = parse_exponents(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            _ => {
                if let Some(name) = key.strip_prefix("override.") {
                    let known = CONFIG_KEYS
                        .iter()
                        .any(|(k, _)| k.strip_prefix("override.") == Some(name));
                    if !known {
                        return Err(Error::Config(format!(
                            "unknown override '{key}'; known overrides: beta, alpha_stable, truncation_m, bandwidth, gamma"
                        )));
                    }
                    self.overrides.insert(name.to_string(), parse(key, value)?);
                } else if let Some(check) = key.strip_prefix("tol.") {
                    let tol: f64 = parse(key, value)?;
                    if !(tol >= 0.0 && tol.is_finite()) {
                        return Err(Error::Config(format!(
                            "key '{key}': tolerance must be nonnegative"
                        )));
                    }
                    self.tolerances.insert(check.to_string(), tol);
                } else {
                    return Err(Error::Config(format!(
                        "unknown key '{key}'; see the configuration reference for the full list"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::Config(format!("t must be positive, got {}", self.t)));
        }
        if self.n_paths < 16 {
            return Err(Error::Config("n_paths must be at least 16".into()));
        }
        if self.n_steps == 0 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        if self.epsilon_exponents.is_empty() || self.h_exponents.is_empty() {
            return Err(Error::Config("sweeps must be nonempty".into()));
        }
        if self.epsilon_exponents.contains(&0) {
            return Err(Error::Config(
                "epsilon_sweep exponents must be >= 1: epsilon = t*2^-k must stay below t".into(),
            ));
        }
        Ok(())
    }

    /// The dyadic window sweep `t * 2^-k`.
    pub fn epsilons(&self) -> Vec<f64> {
        self.epsilon_exponents
            .iter()
            .map(|&k| self.t * 0.5_f64.powi(k as i32))
            .collect()
    }

    /// The dyadic displacement sweep `2^-k`.
    pub fn hs(&self) -> Vec<f64> {
        self.h_exponents
            .iter()
            .map(|&k| 0.5_f64.powi(k as i32))
            .collect()
    }

    pub fn override_or(&self, key: &str, default: f64) -> f64 {
        self.overrides.get(key).copied().unwrap_or(default)
    }

    pub fn tolerance_or(&self, check_id: &str, default: f64) -> f64 {
        self.tolerances.get(check_id).copied().unwrap_or(default)
    }

    /// Effective configuration as ordered text, echoed into reports.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("name".into(), self.name.clone());
        map.insert("master_seed".into(), self.seed.master_seed.to_string());
        map.insert("stream_id".into(), self.seed.stream_id.to_string());
        map.insert("n_paths".into(), self.n_paths.to_string());
        map.insert("t".into(), self.t.to_string());
        map.insert("n_steps".into(), self.n_steps.to_string());
        map.insert(
            "epsilon_sweep".into(),
            self.epsilon_exponents
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        map.insert(
            "h_sweep".into(),
            self.h_exponents
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        for (k, v) in &self.overrides {
            map.insert(format!("override.{k}"), v.to_string());
        }
        for (k, v) in &self.tolerances {
            map.insert(format!("tol.{k}"), v.to_string());
        }
        map
    }

    /// Human-readable key reference.
    pub fn reference() -> String {
        let mut out = String::from("configuration keys (key=value per line, # comments):\n");
        for (k, doc) in CONFIG_KEYS {
            out.push_str(&format!("  {k:<22} {doc}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let mut c = ScenarioConfig::defaults("bulk_bm");
        c.apply_kv_text(
            "# comment\nmaster_seed=42\nn_paths=5000\nepsilon_sweep=3,4,5\noverride.beta=0.4\ntol.ae_rate=0.3\n",
        )
        .unwrap();
        assert_eq!(c.seed.master_seed, 42);
        assert_eq!(c.n_paths, 5000);
        assert_eq!(c.epsilon_exponents, vec![3, 4, 5]);
        assert_eq!(c.override_or("beta", 0.5), 0.4);
        assert_eq!(c.tolerance_or("ae_rate", 0.15), 0.3);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut c = ScenarioConfig::defaults("bulk_bm");
        assert!(c.apply_kv_text("paths=10\n").is_err());
        assert!(c.apply_kv_text("override.mystery=1\n").is_err());
        assert!(c.apply_kv_text("just a line\n").is_err());
    }

    #[test]
    fn epsilon_zero_exponent_rejected_before_any_simulation() {
        let mut c = ScenarioConfig::defaults("bulk_bm");
        c.apply_kv_text("epsilon_sweep=0,1,2\n").unwrap();
        let err = c.validate().unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("below t"));
    }

    #[test]
    fn echo_is_complete_and_ordered() {
        let mut c = ScenarioConfig::defaults("demo");
        c.set("override.beta", "0.5").unwrap();
        let echo = c.echo();
        assert_eq!(echo.get("name").unwrap(), "demo");
        assert!(echo.contains_key("override.beta"));
        let keys: Vec<&String> = echo.keys().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn reference_documents_every_key() {
        let r = ScenarioConfig::reference();
        for (k, _) in CONFIG_KEYS {
            assert!(r.contains(k), "missing {k}");
        }
    }
}
