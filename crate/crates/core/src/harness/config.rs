//! Experiment configuration files (TOML) and command-line overrides.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::constructor::{build_exponent_sequence, ExponentSequence, ForceExpansionSpec};
use crate::error::{Error, Result};
use crate::expansion::{Expansion, ExponentVector, Term};
use crate::spectral::io::load_complex_field;
use crate::spectral::{ComplexField, GevreyIndex, Lattice, SpectralField};
use crate::solver::SolverConfig;
use crate::timescales::iter_log;

/// Environment variable naming the output directory.
pub const OUTPUT_ENV: &str = "COHERENT_NSE_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Linear,
    NsePower,
    NseLog,
    Selftest,
    LemmaIntegral,
}

/// A rational written as an integer or as a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalText {
    Int(i64),
    Text(String),
}

impl RationalText {
    pub fn value(&self) -> Result<Rational64> {
        match self {
            RationalText::Int(i) => Ok(Rational64::from_integer(*i)),
            RationalText::Text(s) => parse_rational(s),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::Config(format!("'{s}' is not a rational number"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(p, q))
        }
        None => s.parse::<i64>().map(Rational64::from_integer).map_err(|_| bad()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub resolution: usize,
    /// Box side lengths; `2π` each when absent.
    #[serde(default)]
    pub lengths: Option<[f64; 3]>,
}

impl LatticeSection {
    pub fn build(&self) -> Result<Arc<Lattice>> {
        match self.lengths {
            Some(l) => Lattice::with_box(self.resolution, l),
            None => Lattice::cube(self.resolution),
        }
    }
}

/// One Fourier mode of a real field: the complex vector coefficient at `k`
/// (the mode at `-k` is its conjugate).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub k: [i32; 3],
    pub re: [f64; 3],
    #[serde(default)]
    pub im: [f64; 3],
}

/// Leray projection of the listed modes; repeated entries for `k` or `-k`
/// are averaged.
pub fn field_from_modes(lattice: &Arc<Lattice>, modes: &[ModeEntry]) -> Result<SpectralField> {
    for m in modes {
        if m.k == [0, 0, 0] || lattice.locate(m.k).is_none() {
            return Err(Error::Config(format!("mode {:?} is not retained on the {}³ lattice", m.k, lattice.resolution())));
        }
    }
    Ok(SpectralField::leray_project(
        lattice,
        modes.iter().map(|m| (m.k, [0, 1, 2].map(|d| Complex64::new(m.re[d], m.im[d])))),
    ))
}

/// One term `z^α ξ` of a force expansion, optionally with its conjugate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceTerm {
    pub mu: RationalText,
    /// Real parts of `α_{-1}, …, α_k`.
    pub re: Vec<RationalText>,
    /// Imaginary parts; zeros when absent.
    #[serde(default)]
    pub im: Vec<f64>,
    /// Also add the conjugate term; ignored for real exponents.
    #[serde(default = "default_true")]
    pub conjugate: bool,
    #[serde(default = "default_one")]
    pub scale: f64,
    /// Modes of `Re ξ`.
    #[serde(default)]
    pub real_part: Vec<ModeEntry>,
    /// Modes of `Im ξ`.
    #[serde(default)]
    pub imag_part: Vec<ModeEntry>,
    /// A complex-field file used instead of the mode lists, relative to the
    /// configuration file.
    #[serde(default)]
    pub file: Option<PathBuf>,
}

fn default_true() -> bool {
    true
}

fn default_one() -> f64 {
    1.0
}

impl ForceTerm {
    fn exponent(&self, k: i32) -> Result<ExponentVector> {
        let n = (k + 2) as usize;
        if self.re.len() != n || !(self.im.is_empty() || self.im.len() == n) {
            return Err(Error::Config(format!("exponent needs {n} entries for depth {k}")));
        }
        let re = self.re.iter().map(RationalText::value).collect::<Result<Vec<_>>>()?;
        let im = if self.im.is_empty() { vec![0.0; n] } else { self.im.clone() };
        ExponentVector::new(re, im)
    }

    fn coefficient(&self, lattice: &Arc<Lattice>, base: &Path) -> Result<ComplexField> {
        let xi = match &self.file {
            Some(f) => {
                let xi = load_complex_field(&base.join(f))?;
                if !xi.lattice().same_as(lattice) {
                    return Err(Error::LatticeMismatch);
                }
                xi
            }
            None => ComplexField::new(field_from_modes(lattice, &self.real_part)?, field_from_modes(lattice, &self.imag_part)?)?,
        };
        Ok(xi.scale(Complex64::new(self.scale, 0.0)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceSection {
    /// Decay is measured in powers of `L_{m_star}(t)`.
    pub m_star: i32,
    /// Depth `k` of the scale vector.
    pub depth: i32,
    /// Generators of the rate sequence; the distinct term rates when absent.
    #[serde(default)]
    pub generators: Vec<RationalText>,
    /// Largest rate kept in the sequence; the largest term rate when absent.
    #[serde(default)]
    pub cutoff: Option<RationalText>,
    pub terms: Vec<ForceTerm>,
}

impl ForceSection {
    /// Force terms grouped by rate, each a conjugate-closed expansion.
    pub fn expansions(&self, lattice: &Arc<Lattice>, base: &Path) -> Result<Vec<(Rational64, Expansion)>> {
        let mut groups: Vec<(Rational64, Vec<Term>)> = Vec::new();
        for term in &self.terms {
            let mu = term.mu.value()?;
            let e = term.exponent(self.depth)?;
            let xi = term.coefficient(lattice, base)?;
            let mut new = Vec::new();
            if term.conjugate && !e.is_real() {
                new.push(Term::new(e.conj(), xi.conj()));
            }
            new.push(Term::new(e, xi));
            match groups.iter_mut().find(|(m, _)| *m == mu) {
                Some((_, ts)) => ts.extend(new),
                None => groups.push((mu, new)),
            }
        }
        groups.sort_by(|a, b| a.0.cmp(&b.0));
        groups
            .into_iter()
            .map(|(mu, ts)| Ok((mu, Expansion::new(lattice, self.depth, self.m_star, -mu, ts)?)))
            .collect()
    }

    pub fn spec(&self, lattice: &Arc<Lattice>, base: &Path) -> Result<ForceExpansionSpec> {
        ForceExpansionSpec::new(lattice, self.m_star, self.depth, self.expansions(lattice, base)?)
    }

    pub fn sequence(&self) -> Result<ExponentSequence> {
        let mut rates = self.terms.iter().map(|t| t.mu.value()).collect::<Result<Vec<_>>>()?;
        rates.sort();
        rates.dedup();
        let generators = if self.generators.is_empty() {
            rates.clone()
        } else {
            self.generators.iter().map(RationalText::value).collect::<Result<Vec<_>>>()?
        };
        let cutoff = match &self.cutoff {
            Some(c) => c.value()?,
            None => *rates.last().ok_or_else(|| Error::Config("force has no terms".into()))?,
        };
        build_exponent_sequence(&generators, self.m_star, cutoff)
    }
}

/// A remainder `g(t) = amplitude · L_m(t)^{-rate} · field` for linear runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemainderSection {
    pub rate: f64,
    #[serde(default = "default_one")]
    pub amplitude: f64,
    pub modes: Vec<ModeEntry>,
}

impl RemainderSection {
    pub fn build(&self, lattice: &Arc<Lattice>, m: i32) -> Result<impl Fn(f64) -> Result<SpectralField>> {
        let field = field_from_modes(lattice, &self.modes)?;
        let (rate, amp) = (self.rate, self.amplitude);
        Ok(move |t: f64| {
            let c = amp * iter_log(m, t)?.powf(-rate);
            Ok(field.map_modes(|_| c))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Number of log-spaced sample times; ignored when `sample_times` is set.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub sample_times: Vec<f64>,
    #[serde(default)]
    pub blowup_factor: Option<f64>,
    /// Extra Gevrey norms written by `simulate`.
    #[serde(default)]
    pub monitor: Vec<GevreyIndex>,
}

fn default_samples() -> usize {
    200
}

impl SolverSection {
    /// Solver settings with samples snapped to the step grid and deduplicated.
    pub fn config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.dt, self.t_start, self.t_end);
        if let Some(b) = self.blowup_factor {
            cfg.blowup_factor = b;
        }
        cfg.monitor = self.monitor.clone();
        let raw = if self.sample_times.is_empty() {
            crate::harness::fit::log_spaced(self.t_start, self.t_end, self.samples)
        } else {
            self.sample_times.clone()
        };
        let mut steps: Vec<i64> = raw.iter().map(|t| ((t - self.t_start) / self.dt).round() as i64).collect();
        steps.sort();
        steps.dedup();
        cfg.sample_times = steps.into_iter().map(|i| self.t_start + i as f64 * self.dt).collect();
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialDatum {
    /// The expansion evaluated at `t_start`.
    Expansion,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Truncation order `N`.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Norm of the residuals.
    #[serde(default = "default_norm")]
    pub norm: GevreyIndex,
    pub fit_window: [f64; 2],
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Relative size of the divergence-free noise added for the paired run;
    /// zero disables it.
    #[serde(default)]
    pub perturbation: f64,
    #[serde(default = "default_initial")]
    pub initial: InitialDatum,
}

fn default_order() -> usize {
    1
}

fn default_norm() -> GevreyIndex {
    GevreyIndex::V
}

fn default_margin() -> f64 {
    0.05
}

fn default_initial() -> InitialDatum {
    InitialDatum::Expansion
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaCase {
    pub m: i32,
    pub lambda: f64,
    pub gamma: f64,
    pub t_star: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSection {
    pub cases: Vec<LemmaCase>,
    #[serde(default = "default_lemma_horizon")]
    pub t_max: f64,
    #[serde(default = "default_lemma_points")]
    pub points: usize,
}

fn default_lemma_horizon() -> f64 {
    1e3
}

fn default_lemma_points() -> usize {
    2001
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// File name stem for every artifact; `kind` when absent.
    #[serde(default)]
    pub prefix: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub lattice: Option<LatticeSection>,
    #[serde(default)]
    pub solver: Option<SolverSection>,
    #[serde(default)]
    pub force: Option<ForceSection>,
    #[serde(default)]
    pub remainder: Option<RemainderSection>,
    #[serde(default)]
    pub experiment: Option<ExperimentSection>,
    #[serde(default)]
    pub lemma: Option<LemmaSection>,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory that relative paths in the file are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn missing(section: &str) -> Error {
    Error::Config(format!("missing [{section}] section"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &[])
    }

    /// Parses `text` after applying `key.path=value` overrides.
    pub fn parse_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: ExperimentConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse_with(&text, overrides)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn lattice(&self) -> Result<Arc<Lattice>> {
        self.lattice.as_ref().ok_or_else(|| missing("lattice"))?.build()
    }

    pub fn solver(&self) -> Result<&SolverSection> {
        self.solver.as_ref().ok_or_else(|| missing("solver"))
    }

    pub fn force(&self) -> Result<&ForceSection> {
        self.force.as_ref().ok_or_else(|| missing("force"))
    }

    pub fn experiment(&self) -> Result<&ExperimentSection> {
        self.experiment.as_ref().ok_or_else(|| missing("experiment"))
    }

    pub fn lemma(&self) -> Result<&LemmaSection> {
        self.lemma.as_ref().ok_or_else(|| missing("lemma"))
    }

    /// `explicit`, else the environment variable, else `[output] dir`, else `out`.
    pub fn output_dir(&self, explicit: Option<&Path>) -> PathBuf {
        if let Some(p) = explicit {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUTPUT_ENV).filter(|s| !s.is_empty()) {
            return PathBuf::from(p);
        }
        match &self.output.dir {
            Some(d) if d.is_absolute() => d.clone(),
            Some(d) => self.base_dir.join(d),
            None => PathBuf::from("out"),
        }
    }

    pub fn prefix(&self) -> String {
        self.output.prefix.clone().unwrap_or_else(|| {
            match self.kind {
                ExperimentKind::Linear => "linear",
                ExperimentKind::NsePower => "nse-power",
                ExperimentKind::NseLog => "nse-log",
                ExperimentKind::Selftest => "selftest",
                ExperimentKind::LemmaIntegral => "lemma-integral",
            }
            .to_string()
        })
    }

    fn validate(&self) -> Result<()> {
        if let (Some(s), Some(e)) = (&self.solver, &self.experiment) {
            let [lo, hi] = e.fit_window;
            if !(s.t_start <= lo && lo < hi && hi <= s.t_end) {
                return Err(Error::Config(format!("fit window [{lo}, {hi}] is not inside [{}, {}]", s.t_start, s.t_end)));
            }
            if e.order == 0 {
                return Err(Error::Config("truncation order must be at least 1".into()));
            }
            if !(e.margin >= 0.0) || !(e.perturbation >= 0.0) {
                return Err(Error::Config("margin and perturbation must be nonnegative".into()));
            }
        }
        match self.kind {
            ExperimentKind::NsePower if self.force.as_ref().is_some_and(|f| f.m_star != 0) => {
                Err(Error::Config("nse-power needs m_star = 0".into()))
            }
            ExperimentKind::NseLog if self.force.as_ref().is_some_and(|f| f.m_star < 1) => {
                Err(Error::Config("nse-log needs m_star >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Sets `a.b.c = value` in `table`; `value` is read as a TOML value, or as a
/// plain string when it does not parse.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override '{key}': '{p}' is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINEAR: &str = r#"
kind = "linear"
seed = 3
[lattice]
resolution = 8
[solver]
dt = 0.01
t_start = 1.0
t_end = 5.0
samples = 20
[force]
m_star = 0
depth = 0
[[force.terms]]
mu = 1
re = [0, -1]
im = [1.0, 0.0]
real_part = [{ k = [1, 0, 0], re = [0.0, 1.0, 0.0] }]
[experiment]
fit_window = [2.0, 5.0]
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = ExperimentConfig::parse(LINEAR).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Linear);
        let lat = cfg.lattice().unwrap();
        let forces = cfg.force().unwrap().expansions(&lat, Path::new(".")).unwrap();
        assert_eq!(forces.len(), 1);
        assert_eq!(forces[0].1.len(), 2);
        assert!(forces[0].1.is_conjugate_closed());
        let s = cfg.solver().unwrap().config().unwrap();
        assert!(s.sample_steps().is_ok());
        assert_eq!(cfg.experiment().unwrap().margin, 0.05);
    }

    #[test]
    fn overrides() {
        let o = vec!["solver.dt=0.02".to_string(), "experiment.margin=0.4".into(), "output.prefix=run7".into()];
        let cfg = ExperimentConfig::parse_with(LINEAR, &o).unwrap();
        assert_eq!(cfg.solver().unwrap().dt, 0.02);
        assert_eq!(cfg.experiment().unwrap().margin, 0.4);
        assert_eq!(cfg.prefix(), "run7");
        assert!(ExperimentConfig::parse_with(LINEAR, &["experiment.fit_window=[0.5, 2.0]".into()]).is_err());
        assert!(ExperimentConfig::parse_with(LINEAR, &["bogus".into()]).is_err());
        assert!(ExperimentConfig::parse_with(LINEAR, &["solver.unknown=1".into()]).is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational(" -3/6 ").unwrap(), Rational64::new(-1, 2));
        assert_eq!(parse_rational("4").unwrap(), Rational64::from_integer(4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
    }
}
