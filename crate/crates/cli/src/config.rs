//! Run configuration shared by every subcommand.
//!
//! A JSON file may supply any field; command-line flags override it.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use tridiag_core::{ComplexUHP, EntryDistribution, SigmaSequence, TargetLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub law: String,
    pub diag_law: Option<String>,
    pub alpha: Option<f64>,
    pub sigma_csv: Option<PathBuf>,
    pub sigma_target: Option<String>,
    /// Evaluation points as `"re,im"`.
    pub z: Vec<String>,
    pub eta: Option<f64>,
    pub population: usize,
    pub iters: usize,
    pub samples: usize,
    pub replicas: usize,
    pub k_max: usize,
    pub trunc_k: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub source: Option<String>,
    /// `"lo,hi,points"`.
    pub grid: Option<String>,
    pub tail_m: Vec<f64>,
    pub word: Option<String>,
    pub scenarios: Vec<String>,
    pub tolerance: Option<f64>,
    pub eig_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 1000,
            law: "gaussian:0,1".into(),
            diag_law: None,
            alpha: None,
            sigma_csv: None,
            sigma_target: None,
            z: vec![],
            eta: None,
            population: 100_000,
            iters: 200,
            samples: 100_000,
            replicas: 1,
            k_max: 8,
            trunc_k: 60,
            seed: 0x5EED,
            out: PathBuf::from("out"),
            format: OutputFormat::Csv,
            source: None,
            grid: None,
            tail_m: vec![],
            word: None,
            scenarios: vec![],
            tolerance: None,
            eig_tol: 1e-10,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn entry_law(&self) -> Result<EntryDistribution> {
        parse_law(&self.law)
    }

    pub fn diagonal_law(&self) -> Result<Option<EntryDistribution>> {
        self.diag_law.as_deref().map(parse_law).transpose()
    }

    pub fn z_points(&self) -> Result<Vec<ComplexUHP>> {
        self.z.iter().map(|s| parse_z(s)).collect()
    }

    pub fn target(&self) -> Result<Option<TargetLaw>> {
        self.sigma_target.as_deref().map(parse_target).transpose()
    }

    /// The profile implied by `sigma_csv`, `sigma_target` or `alpha`, in that
    /// order of precedence; `None` for the simple model.
    pub fn sigma(&self) -> Result<Option<SigmaSequence>> {
        if let Some(path) = &self.sigma_csv {
            let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let s = SigmaSequence::read_csv(std::io::BufReader::new(f))
                .with_context(|| format!("reading sigma profile {}", path.display()))?;
            if s.dim() != self.n {
                bail!("{} holds {} values; N = {} needs {}", path.display(), s.len(), self.n, self.n - 1);
            }
            return Ok(Some(s));
        }
        if let Some(t) = self.target()? {
            return Ok(Some(tridiag_core::sigmaseq::target_profile(self.n, &t)?.sigma));
        }
        if let Some(a) = self.alpha {
            if self.n >= 2 {
                return Ok(Some(tridiag_core::sigmaseq::power_profile(self.n, a)?));
            }
        }
        Ok(None)
    }

    /// `(lo, hi, points)` from `grid`, or `fallback`.
    pub fn grid_spec(&self, fallback: (f64, f64, usize)) -> Result<(f64, f64, usize)> {
        let Some(g) = &self.grid else { return Ok(fallback) };
        let parts: Vec<&str> = g.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            bail!("grid must be \"lo,hi,points\", got {g:?}");
        }
        Ok((parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
    }
}

/// `kind:params`; `empirical:<csv>` reads one value per line from a file.
pub fn parse_law(spec: &str) -> Result<EntryDistribution> {
    if let Some(path) = spec.strip_prefix("empirical:") {
        let values = read_column(Path::new(path))?;
        return Ok(EntryDistribution::empirical(values)?);
    }
    Ok(spec.parse()?)
}

/// Target laws as in [`TargetLaw`]; `empirical:<csv>` reads a sample.
pub fn parse_target(spec: &str) -> Result<TargetLaw> {
    if let Some(path) = spec.strip_prefix("empirical:") {
        return Ok(TargetLaw::empirical(read_column(Path::new(path))?)?);
    }
    Ok(spec.parse()?)
}

pub fn parse_z(s: &str) -> Result<ComplexUHP> {
    let (re, im) = s
        .split_once(',')
        .with_context(|| format!("z must be \"re,im\", got {s:?}"))?;
    let z = Complex64::new(re.trim().parse()?, im.trim().parse()?);
    Ok(ComplexUHP::from_complex(z)?)
}

pub fn read_column(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let first = t.split(',').next().unwrap_or("").trim();
        out.push(
            first
                .parse()
                .with_context(|| format!("{}:{}: not a number", path.display(), i + 1))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points_and_laws() {
        let z = parse_z("1.5, 2").unwrap();
        assert_eq!((z.re(), z.im()), (1.5, 2.0));
        assert!(parse_z("1,0").is_err());
        assert!(parse_z("1").is_err());
        assert_eq!(parse_law("constant:1").unwrap(), EntryDistribution::Constant(1.0));
        assert!(parse_law("zeta:1").is_err());
    }

    #[test]
    fn config_round_trips() {
        let c = RunConfig {
            n: 17,
            z: vec!["0,1".into()],
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let partial: RunConfig = serde_json::from_str(r#"{"n": 5}"#).unwrap();
        assert_eq!(partial.n, 5);
        assert_eq!(partial.population, 100_000);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn sigma_sources() {
        let mut c = RunConfig {
            n: 5,
            alpha: Some(1.0),
            ..RunConfig::default()
        };
        assert_eq!(c.sigma().unwrap().unwrap().values(), &[0.2, 0.4, 0.6, 0.8]);
        c.alpha = None;
        assert!(c.sigma().unwrap().is_none());
        assert_eq!(c.grid_spec((0.0, 1.0, 3)).unwrap(), (0.0, 1.0, 3));
        c.grid = Some("-1,1,11".into());
        assert_eq!(c.grid_spec((0.0, 1.0, 3)).unwrap(), (-1.0, 1.0, 11));
    }
}
