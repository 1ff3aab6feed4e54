//! Scenario configuration: a JSON document layered over defaults, with
//! `key.path=value` overrides.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tcladder::linalg::CVector;
use tcladder::spectrum::{EmissionOperator, KernelSign};
use tcladder::{BasisState, DensityMatrix, DickeLabel, SystemParams, TruncatedBasis};

use crate::error::{CliError, CliResult};

/// `g`: every frequency and rate is a multiple of the coupling, which is 1.
/// `absolute`: values are taken as given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    G,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn validate(&self, name: &str) -> CliResult<()> {
        let ok = self.start.is_finite()
            && self.stop.is_finite()
            && self.count >= 1
            && self.stop >= self.start
            && (self.count > 1 || self.stop == self.start);
        if ok {
            Ok(())
        } else {
            Err(CliError::Validation(format!(
                "{name}: need finite start <= stop and count >= 1 (count 1 only when start == stop)"
            )))
        }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Omega0,
    Delta,
    G,
    GammaA,
    GammaSigma,
}

impl SweepParameter {
    pub fn apply(&self, p: &SystemParams, value: f64) -> SystemParams {
        let mut q = *p;
        match self {
            SweepParameter::Omega0 => q.omega0 = value,
            SweepParameter::Delta => q.delta = value,
            SweepParameter::G => q.g = value,
            SweepParameter::GammaA => q.gamma_a = value,
            SweepParameter::GammaSigma => q.gamma_sigma = value,
        }
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Sweep {
    pub fn grid(&self) -> Grid {
        Grid::new(self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSettings {
    /// Upper end of the `γ₋/g` axis.
    pub y_max: f64,
    pub count: usize,
    pub n_max: usize,
}

impl Default for CriterionSettings {
    fn default() -> Self {
        Self {
            y_max: 4.0,
            count: 401,
            n_max: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplitude {
    pub photons: usize,
    pub matter: DickeLabel,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    /// `vacuum`, `one-photon`, `both-excited` or `symmetric-one`.
    Named(String),
    Amplitudes { amplitudes: Vec<Amplitude> },
}

/// Tolerance on `Σ|c|² = 1` for explicit amplitudes.
pub const NORM_TOL: f64 = 1e-12;

impl InitialState {
    pub fn amplitudes(&self) -> CliResult<Vec<(BasisState, Complex64)>> {
        let one = |photons, matter| Ok(vec![(BasisState::new(photons, matter), Complex64::new(1.0, 0.0))]);
        match self {
            InitialState::Named(name) => match name.as_str() {
                "vacuum" => one(0, DickeLabel::TMinus),
                "one-photon" => one(1, DickeLabel::TMinus),
                "both-excited" => one(0, DickeLabel::TPlus),
                "symmetric-one" => one(0, DickeLabel::TZero),
                other => Err(CliError::Validation(format!(
                    "unknown initial state {other:?} (vacuum, one-photon, both-excited, symmetric-one)"
                ))),
            },
            InitialState::Amplitudes { amplitudes } => {
                if amplitudes.is_empty() {
                    return Err(CliError::Validation("initial_state.amplitudes is empty".into()));
                }
                let mut out: Vec<(BasisState, Complex64)> = Vec::new();
                for a in amplitudes {
                    let s = BasisState::new(a.photons, a.matter);
                    if out.iter().any(|(t, _)| *t == s) {
                        return Err(CliError::Validation(format!("state {s} listed twice")));
                    }
                    if !(a.re.is_finite() && a.im.is_finite()) {
                        return Err(CliError::Validation(format!("non-finite amplitude for {s}")));
                    }
                    out.push((s, Complex64::new(a.re, a.im)));
                }
                let norm: f64 = out.iter().map(|(_, c)| c.norm_sqr()).sum();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(CliError::Validation(format!(
                        "initial amplitudes have squared norm {norm}, expected 1 within {NORM_TOL:e}"
                    )));
                }
                Ok(out)
            }
        }
    }

    pub fn max_excitation(&self) -> CliResult<usize> {
        Ok(self
            .amplitudes()?
            .iter()
            .map(|(s, _)| s.excitation())
            .max()
            .unwrap_or(0))
    }

    pub fn density_matrix(&self, basis: &TruncatedBasis) -> CliResult<DensityMatrix> {
        let mut psi = CVector::zeros(basis.dim());
        for (s, c) in self.amplitudes()? {
            let i = basis.index_of(s).ok_or_else(|| {
                CliError::Validation(format!("state {s} lies outside the truncated basis"))
            })?;
            psi[i] = c;
        }
        Ok(DensityMatrix::from_amplitudes(&psi)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub units: Units,
    pub params: SystemParams,
    /// Defaults to the highest excitation of the initial state (at least 1).
    pub photon_cutoff: Option<usize>,
    pub initial_state: InitialState,
    pub operator: EmissionOperator,
    /// Spectrometer bandwidth; defaults to `0.1·g`.
    pub kappa: Option<f64>,
    /// Collection time; defaults to `20/min(nonzero rate)`.
    pub total_time: Option<f64>,
    pub kernel: KernelSign,
    pub t_grid: Option<Grid>,
    /// When set, `evolve` also writes `G(t,τ)` on `t_grid × tau_grid`.
    pub tau_grid: Option<Grid>,
    pub omega_grid: Option<Grid>,
    pub sweep: Option<Sweep>,
    /// Manifolds reported by `eigen`.
    pub manifolds: Vec<usize>,
    pub criterion: CriterionSettings,
    /// Relative height above which spectral maxima are reported.
    pub peak_threshold: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            units: Units::G,
            params: SystemParams {
                omega0: 10.0,
                delta: 0.0,
                g: 1.0,
                gamma_a: 0.1,
                gamma_sigma: 0.0,
            },
            photon_cutoff: None,
            initial_state: InitialState::Named("both-excited".into()),
            operator: EmissionOperator::Cavity,
            kappa: None,
            total_time: None,
            kernel: KernelSign::Verbatim,
            t_grid: None,
            tau_grid: None,
            omega_grid: None,
            sweep: None,
            manifolds: vec![1, 2],
            criterion: CriterionSettings::default(),
            peak_threshold: 0.02,
        }
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> CliResult<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Usage(format!("malformed key {key:?}")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Usage(format!("{key}: {part} is not an object")))?;
        let child = obj.entry(part.to_string()).or_insert(Value::Null);
        if child.is_null() {
            *child = Value::Object(Default::default());
        }
        node = child;
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::Usage(format!("{key}: parent is not an object")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl ScenarioConfig {
    /// Defaults, then the JSON document (if any), then each `key=value`
    /// override in order. Values parse as JSON, falling back to a string.
    pub fn load(document: Option<&str>, overrides: &[String]) -> CliResult<Self> {
        let mut value = serde_json::to_value(Self::default()).expect("default config serialises");
        if let Some(text) = document {
            let patch: Value = serde_json::from_str(text)
                .map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
            if !patch.is_object() {
                return Err(CliError::Usage("config must be a JSON object".into()));
            }
            merge(&mut value, patch);
        }
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {item:?}")))?;
            let v = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut value, key.trim(), v)?;
        }
        let config: Self =
            serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.params.validate()?;
        if self.units == Units::G && self.params.g != 1.0 {
            return Err(CliError::Validation(
                "with units \"g\" every quantity is a multiple of g, so params.g must be 1".into(),
            ));
        }
        let top = self.initial_state.max_excitation()?;
        if let Some(cutoff) = self.photon_cutoff {
            if cutoff < top {
                return Err(CliError::Validation(format!(
                    "photon_cutoff {cutoff} is below the initial state's excitation {top}"
                )));
            }
        }
        for (name, grid) in [("t_grid", self.t_grid), ("tau_grid", self.tau_grid), ("omega_grid", self.omega_grid)] {
            if let Some(g) = grid {
                g.validate(name)?;
            }
        }
        for (name, grid) in [("t_grid", self.t_grid), ("tau_grid", self.tau_grid)] {
            if grid.is_some_and(|g| g.start < 0.0) {
                return Err(CliError::Validation(format!("{name} must start at or after 0")));
            }
        }
        if let Some(s) = self.sweep {
            s.grid().validate("sweep")?;
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(CliError::Validation(format!("kappa must be > 0, got {k}")));
            }
        }
        if let Some(t) = self.total_time {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Validation(format!("total_time must be > 0, got {t}")));
            }
        }
        if self.manifolds.is_empty() {
            return Err(CliError::Validation("manifolds must not be empty".into()));
        }
        if self.criterion.count < 2 || !(self.criterion.y_max > 0.0) || self.criterion.n_max == 0 {
            return Err(CliError::Validation(
                "criterion needs count >= 2, y_max > 0 and n_max >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.peak_threshold) {
            return Err(CliError::Validation("peak_threshold must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn photon_cutoff(&self) -> CliResult<usize> {
        Ok(match self.photon_cutoff {
            Some(c) => c,
            None => self.initial_state.max_excitation()?.max(1),
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(0.1 * self.params.g)
    }

    pub fn total_time(&self) -> CliResult<f64> {
        match self.total_time {
            Some(t) => Ok(t),
            None => self.params.min_nonzero_rate().map(|r| 20.0 / r).ok_or_else(|| {
                CliError::Validation("total_time is required when both decay rates are zero".into())
            }),
        }
    }

    /// Copy with every defaulted optional field filled in for `command`.
    pub fn resolved(&self, command: &str) -> CliResult<Self> {
        let mut c = self.clone();
        c.photon_cutoff = Some(self.photon_cutoff()?);
        match command {
            "spectrum" => {
                c.kappa = Some(self.kappa());
                c.total_time = Some(self.total_time()?);
                c.omega_grid = Some(self.omega_grid()?);
            }
            "evolve" => c.t_grid = Some(self.t_grid()),
            "eigen" => c.sweep = Some(self.sweep()),
            _ => {}
        }
        Ok(c)
    }

    pub fn t_grid(&self) -> Grid {
        self.t_grid
            .unwrap_or_else(|| Grid::new(0.0, 20.0 / self.params.g, 201))
    }

    /// Default: the Fig. 2 style sweep of the cavity decay rate.
    pub fn sweep(&self) -> Sweep {
        self.sweep.unwrap_or(Sweep {
            parameter: SweepParameter::GammaA,
            start: 0.0,
            stop: 12.0 * self.params.g,
            count: 121,
        })
    }

    /// Default: `ω₀ ± (largest line offset + 1g)` with step `0.01g`.
    pub fn omega_grid(&self) -> CliResult<Grid> {
        if let Some(g) = self.omega_grid {
            return Ok(g);
        }
        let m = self.initial_state.max_excitation()?.max(1) as f64;
        let lower = if m >= 2.0 { (4.0 * m - 6.0).sqrt() } else { 0.0 };
        let reach = ((4.0 * m - 2.0).sqrt() + lower + 1.0) * self.params.g + self.params.delta.abs();
        let half = (reach / (0.01 * self.params.g)).ceil() * 0.01 * self.params.g;
        let count = (2.0 * half / (0.01 * self.params.g)).round() as usize + 1;
        Ok(Grid::new(self.params.omega0 - half, self.params.omega0 + half, count))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = ScenarioConfig::load(None, &[]).unwrap();
        assert_eq!(c, ScenarioConfig::default());
        assert_eq!(c.photon_cutoff().unwrap(), 2);
    }

    #[test]
    fn document_and_overrides_layer() {
        let doc = r#"{"params": {"gamma_a": 0.5}, "initial_state": "symmetric-one"}"#;
        let c = ScenarioConfig::load(
            Some(doc),
            &["params.gamma_sigma=0.25".into(), "sweep.parameter=delta".into(), "sweep.start=-1".into(),
              "sweep.stop=1".into(), "sweep.count=3".into()],
        )
        .unwrap();
        assert_eq!(c.params.gamma_a, 0.5);
        assert_eq!(c.params.gamma_sigma, 0.25);
        assert_eq!(c.params.omega0, 10.0);
        assert_eq!(c.initial_state, InitialState::Named("symmetric-one".into()));
        assert_eq!(c.sweep.unwrap().grid().points(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let e = ScenarioConfig::load(None, &["params.gamma=1".into()]).unwrap_err();
        assert_eq!(e.exit_code(), 64);
        let e = ScenarioConfig::load(Some("[1]"), &[]).unwrap_err();
        assert_eq!(e.exit_code(), 64);
        let e = ScenarioConfig::load(None, &["novalue".into()]).unwrap_err();
        assert_eq!(e.exit_code(), 64);
    }

    #[test]
    fn semantic_errors_are_validation_errors() {
        for set in [
            "params.gamma_a=-1",
            "params.g=2",
            "photon_cutoff=1",
            "initial_state=excited",
            "kappa=0",
            "t_grid={\"start\":1,\"stop\":0,\"count\":5}",
        ] {
            let e = ScenarioConfig::load(None, &[set.into()]).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{set}: {e}");
        }
        assert!(ScenarioConfig::load(None, &["units=absolute".into(), "params.g=2".into()]).is_ok());
    }

    #[test]
    fn explicit_amplitudes() {
        let doc = r#"{"initial_state": {"amplitudes": [
            {"photons": 1, "matter": "T-1", "re": 0.6},
            {"photons": 0, "matter": "T0", "re": 0.0, "im": 0.8}]}}"#;
        let c = ScenarioConfig::load(Some(doc), &[]).unwrap();
        assert_eq!(c.photon_cutoff().unwrap(), 1);
        let basis = tcladder::build_basis(1);
        let rho = c.initial_state.density_matrix(&basis).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);

        let bad = r#"{"initial_state": {"amplitudes": [{"photons": 1, "matter": "T-1", "re": 0.9}]}}"#;
        assert_eq!(ScenarioConfig::load(Some(bad), &[]).unwrap_err().exit_code(), 1);
        let dup = r#"{"initial_state": {"amplitudes": [
            {"photons": 1, "matter": "T-1", "re": 0.6}, {"photons": 1, "matter": "T-1", "re": 0.8}]}}"#;
        assert_eq!(ScenarioConfig::load(Some(dup), &[]).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn grid_points_hit_endpoints() {
        let g = Grid::new(0.0, 1.0, 4);
        let p = g.points();
        assert_eq!(p.len(), 4);
        assert_eq!(p[3], 1.0);
        assert_eq!(Grid::new(2.0, 2.0, 1).points(), vec![2.0]);
    }

    #[test]
    fn default_omega_grid_covers_lines() {
        let c = ScenarioConfig::default();
        let g = c.omega_grid().unwrap();
        assert!(g.start < 10.0 - 6f64.sqrt() - 2f64.sqrt());
        assert!(g.stop > 10.0 + 6f64.sqrt() + 2f64.sqrt());
        let p = g.points();
        assert!((p[1] - p[0] - 0.01).abs() < 1e-9);
    }

    #[test]
    fn resolved_fills_defaults() {
        let c = ScenarioConfig::default().resolved("spectrum").unwrap();
        assert_eq!(c.kappa, Some(0.1));
        assert_eq!(c.total_time, Some(200.0));
        assert!(c.omega_grid.is_some());
        assert_eq!(c.photon_cutoff, Some(2));
    }
}
