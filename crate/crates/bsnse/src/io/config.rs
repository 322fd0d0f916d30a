use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::engine::{SolverConfig, TerminalCondition};
use crate::forcing::{ForcingModel, TruncationSpec};
use crate::spectral::{ModeSet, SigmaVector, VelocityField, WaveVector};

/// Every key the config format accepts, with its default. Parsing is fail
/// closed: an unknown key aborts with this list, and the resolved map always
/// contains all of these keys so the manifest records the defaults too.
const KEYS: &[(&str, &str)] = &[
    ("solver.nu", "1.0"),
    ("solver.lambda_bar", "2.0"),
    ("solver.k_max", "2"),
    ("solver.period", "6.283185307179586"),
    ("solver.horizon", "1.0"),
    ("solver.steps", "16"),
    ("solver.paths", "256"),
    ("solver.basis_degree", "2"),
    ("solver.picard_iters", "3"),
    ("solver.picard_tol", "1e-10"),
    ("solver.seed", "1"),
    ("solver.store_fields", "true"),
    ("truncation.enabled", "false"),
    ("truncation.m", "10.0"),
    ("truncation.n", "10"),
    ("truncation.c_b", "1.0"),
    ("sigma.x", "0.0"),
    ("sigma.y", "0.0"),
    ("forcing.kind", "zero"),
    ("forcing.a1", "0.0"),
    ("forcing.a2", "0.0"),
    ("forcing.c1", "0.5"),
    ("forcing.c2", "0.3"),
    ("forcing.n0", "1.0"),
    ("forcing.base_amplitude", "0.0"),
    ("forcing.base_seed", "0"),
    ("terminal.kind", "mode"),
    ("terminal.kx", "1"),
    ("terminal.ky", "0"),
    ("terminal.amplitude", "1.0"),
    ("terminal.profile_seed", "0"),
    ("terminal.psi", "one"),
    ("terminal.psi_scale", "0.5"),
];

/// A fully resolved run configuration: the parsed key-value map plus the
/// concrete objects the solver consumes.
#[derive(Debug, Clone)]
pub struct RunConfig {
    resolved: BTreeMap<String, String>,
}

fn parse_as<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T, String> {
    let raw = map.get(key).expect("resolved map is total");
    raw.parse()
        .map_err(|_| format!("config key `{key}`: cannot parse `{raw}`"))
}

impl RunConfig {
    /// Parses flat `key = value` text with `#` comments. Unknown keys fail
    /// closed with the full list of valid keys; omitted keys take defaults.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut resolved: BTreeMap<String, String> = KEYS
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            if !resolved.contains_key(key) {
                let valid: Vec<&str> = KEYS.iter().map(|(k, _)| *k).collect();
                return Err(format!(
                    "unknown config key `{key}`; valid keys: {}",
                    valid.join(", ")
                ));
            }
            resolved.insert(key.to_string(), value.to_string());
        }
        let config = Self { resolved };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), String> {
        // eager type checks so every error points at its key
        self.solver_config()?;
        self.sigma()?;
        let _ = self.forcing_model()?;
        let _ = self.terminal()?;
        Ok(())
    }

    /// The full key-value map with defaults filled in, for the manifest.
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    pub fn override_seed(&mut self, seed: u64) {
        self.resolved.insert("solver.seed".into(), seed.to_string());
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, String> {
        parse_as(&self.resolved, key)
    }

    fn get_bool(&self, key: &str) -> Result<bool, String> {
        match self.resolved.get(key).expect("resolved map is total").as_str() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(format!("config key `{key}`: cannot parse `{other}` as bool")),
        }
    }

    pub fn solver_config(&self) -> Result<SolverConfig, String> {
        let truncation = if self.get_bool("truncation.enabled")? {
            Some(TruncationSpec {
                m: self.get("truncation.m")?,
                n: self.get("truncation.n")?,
                c_b: self.get("truncation.c_b")?,
            })
        } else {
            None
        };
        Ok(SolverConfig {
            nu: self.get("solver.nu")?,
            lambda_bar: self.get("solver.lambda_bar")?,
            k_max: self.get("solver.k_max")?,
            period: self.get("solver.period")?,
            horizon: self.get("solver.horizon")?,
            steps: self.get("solver.steps")?,
            paths: self.get("solver.paths")?,
            basis_degree: self.get("solver.basis_degree")?,
            picard_iters: self.get("solver.picard_iters")?,
            picard_tol: self.get("solver.picard_tol")?,
            seed: self.get("solver.seed")?,
            store_fields: self.get_bool("solver.store_fields")?,
            truncation,
        })
    }

    pub fn sigma(&self) -> Result<SigmaVector, String> {
        Ok(SigmaVector::constant([
            self.get("sigma.x")?,
            self.get("sigma.y")?,
        ]))
    }

    pub fn mode_set(&self) -> Result<Arc<ModeSet>, String> {
        Ok(ModeSet::square(
            self.get("solver.period")?,
            self.get("solver.k_max")?,
        ))
    }

    fn forcing_base(&self) -> Result<Option<VelocityField>, String> {
        let amplitude: f64 = self.get("forcing.base_amplitude")?;
        if amplitude == 0.0 {
            return Ok(None);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(self.get("forcing.base_seed")?);
        Ok(Some(VelocityField::random_div_free(
            &self.mode_set()?,
            &mut rng,
            amplitude,
        )))
    }

    pub fn forcing_model(&self) -> Result<ForcingModel, String> {
        let period: f64 = self.get("solver.period")?;
        match self.resolved["forcing.kind"].as_str() {
            "zero" => Ok(ForcingModel::zero()),
            "linear" => Ok(ForcingModel::linear(
                self.forcing_base()?,
                self.get("forcing.a1")?,
                self.get("forcing.a2")?,
                period,
            )),
            "saturated" => Ok(ForcingModel::saturated(
                self.forcing_base()?,
                self.get("forcing.c1")?,
                self.get("forcing.c2")?,
                self.get("forcing.n0")?,
                period,
            )),
            other => Err(format!(
                "config key `forcing.kind`: `{other}` is not one of zero, linear, saturated"
            )),
        }
    }

    pub fn terminal_profile(&self) -> Result<VelocityField, String> {
        let modes = self.mode_set()?;
        let amplitude: f64 = self.get("terminal.amplitude")?;
        match self.resolved["terminal.kind"].as_str() {
            "mode" => {
                let k = WaveVector::new(self.get("terminal.kx")?, self.get("terminal.ky")?);
                if k.is_zero() {
                    return Err("terminal mode: k = 0 is excluded".into());
                }
                // polarize along the divergence-free direction (-ky, kx)
                let norm = ((k.kx * k.kx + k.ky * k.ky) as f64).sqrt();
                let c = num_complex::Complex64::new(amplitude / norm, 0.0);
                let mut field = VelocityField::zero(&modes);
                field
                    .set_coeff(k, [c * (-k.ky as f64), c * (k.kx as f64)])
                    .map_err(|e| format!("terminal mode: {e}"))?;
                Ok(field)
            }
            "random" => {
                let mut rng = ChaCha12Rng::seed_from_u64(self.get("terminal.profile_seed")?);
                Ok(VelocityField::random_div_free(&modes, &mut rng, amplitude))
            }
            other => Err(format!(
                "config key `terminal.kind`: `{other}` is not one of mode, random"
            )),
        }
    }

    pub fn terminal(&self) -> Result<TerminalCondition, String> {
        let profile = self.terminal_profile()?;
        match self.resolved["terminal.psi"].as_str() {
            "one" => Ok(TerminalCondition::Deterministic(profile)),
            "tanh" => {
                let scale: f64 = self.get("terminal.psi_scale")?;
                Ok(TerminalCondition::OfBrownian(Arc::new(move |w: f64| {
                    profile.scale(1.0 + scale * w.tanh())
                })))
            }
            other => Err(format!(
                "config key `terminal.psi`: `{other}` is not one of one, tanh"
            )),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::parse("").expect("defaults are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_resolves_to_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.resolved()["solver.steps"], "16");
        let sc = c.solver_config().unwrap();
        assert_eq!(sc.steps, 16);
        assert!(sc.truncation.is_none());
    }

    #[test]
    fn comments_and_overrides() {
        let text = "\
# a comment
solver.steps = 32  # trailing comment
sigma.x = 0.4
forcing.kind = saturated
terminal.psi = tanh
";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.solver_config().unwrap().steps, 32);
        assert_eq!(c.sigma().unwrap().eval(0.0), [0.4, 0.0]);
        assert!(matches!(c.terminal().unwrap(), TerminalCondition::OfBrownian(_)));
    }

    #[test]
    fn unknown_key_fails_closed_and_lists_valid_keys() {
        let err = RunConfig::parse("solver.nux = 1.0").unwrap_err();
        assert!(err.contains("unknown config key `solver.nux`"), "{err}");
        assert!(err.contains("solver.nu"), "{err}");
        assert!(err.contains("terminal.psi_scale"), "{err}");
    }

    #[test]
    fn type_errors_name_the_key() {
        let err = RunConfig::parse("solver.steps = many").unwrap_err();
        assert!(err.contains("solver.steps"), "{err}");
        let err = RunConfig::parse("forcing.kind = cubic").unwrap_err();
        assert!(err.contains("forcing.kind"), "{err}");
    }

    #[test]
    fn seed_override_lands_in_the_resolved_map() {
        let mut c = RunConfig::default();
        c.override_seed(99);
        assert_eq!(c.resolved()["solver.seed"], "99");
        assert_eq!(c.solver_config().unwrap().seed, 99);
    }

    #[test]
    fn mode_terminal_is_divergence_free() {
        let c = RunConfig::parse("terminal.kx = 1\nterminal.ky = 1").unwrap();
        let xi = c.terminal_profile().unwrap();
        assert!(xi.is_divergence_free(1e-12));
        assert!(xi.norm_h() > 0.0);
    }
}
