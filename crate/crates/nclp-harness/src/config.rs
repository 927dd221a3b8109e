//! Parsing of command line values and per-experiment defaults.

use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use nclp_core::filtration::AlgebraSpec;
use serde::Serialize;

use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Norms,
    Cuculescu,
    Gundy,
    #[value(name = "transform-weak11")]
    #[serde(rename = "transform-weak11")]
    TransformWeak11,
    #[value(name = "transform-l2")]
    #[serde(rename = "transform-l2")]
    TransformL2,
    Bmo,
    Ergodic,
    Cross,
    Cz,
    Zeta,
    #[value(name = "thmB1")]
    #[serde(rename = "thmB1")]
    ThmB1,
    PseudolocDecay,
    Ksk,
    Paraproduct,
    Vanish,
    Localization,
    NcPseudoloc,
    BmoCzo,
}

impl Experiment {
    pub fn name(&self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `tensor:N`, `grid:n,K,d` or `corner:n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Algebra(pub AlgebraSpec);

impl FromStr for Algebra {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("expected kind:params, got '{s}'"))?;
        let nums: Vec<usize> = rest
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|e| format!("bad number '{v}': {e}")))
            .collect::<std::result::Result<_, _>>()?;
        let spec = match (kind, nums.as_slice()) {
            ("tensor", [n]) => AlgebraSpec::TensorDyadic { levels: *n },
            ("grid", [dim, depth, size]) => AlgebraSpec::GridMatrix { dim: *dim, depth: *depth, size: *size },
            ("corner", [n]) => AlgebraSpec::Corner { size: *n },
            _ => return Err(format!("unknown algebra '{s}'")),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(Algebra(spec))
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            AlgebraSpec::TensorDyadic { levels } => write!(f, "tensor:{levels}"),
            AlgebraSpec::GridMatrix { dim, depth, size } => write!(f, "grid:{dim},{depth},{size}"),
            AlgebraSpec::Corner { size } => write!(f, "corner:{size}"),
        }
    }
}

impl Serialize for Algebra {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Inclusive integer range written `a..b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span(pub i32, pub i32);

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got '{s}'"))?;
        let a: i32 = a.trim().parse().map_err(|e| format!("bad range start '{a}': {e}"))?;
        let b: i32 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("bad range end '{b}': {e}"))?;
        if a > b {
            return Err(format!("empty range {a}..{b}"));
        }
        Ok(Span(a, b))
    }
}

impl Span {
    pub fn iter(&self) -> std::ops::RangeInclusive<i32> {
        self.0..=self.1
    }
}

impl Serialize for Span {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&format_args!("{}..{}", self.0, self.1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelChoice {
    LpBumps,
    Hilbert,
    Annuli,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Both,
}

/// Fully resolved settings of one run; serialized into the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub algebra: Algebra,
    pub trials: usize,
    pub seed: u64,
    pub lambda_exp: Span,
    pub s: Span,
    pub kernel: KernelChoice,
    pub gamma: f64,
    /// Transform or kernel components.
    pub components: usize,
    /// Envelope for inequalities without an explicit constant.
    pub envelope: f64,
}

/// Optional overrides, as read from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub algebra: Option<Algebra>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub lambda_exp: Option<Span>,
    pub s: Option<Span>,
    pub kernel: Option<KernelChoice>,
    pub gamma: Option<f64>,
    pub depth: Option<usize>,
}

fn tensor(levels: usize) -> Algebra {
    Algebra(AlgebraSpec::TensorDyadic { levels })
}

fn grid(dim: usize, depth: usize, size: usize) -> Algebra {
    Algebra(AlgebraSpec::GridMatrix { dim, depth, size })
}

pub const ENVELOPE: f64 = 64.0;

impl ExperimentConfig {
    /// Defaults for `experiment`, then the overrides.
    pub fn resolve(experiment: Experiment, o: &Overrides) -> Result<Self> {
        use Experiment::*;
        let (algebra, trials, lambda_exp, s, kernel) = match experiment {
            Norms => (tensor(4), 50, Span(-2, 4), Span(1, 1), KernelChoice::LpBumps),
            Cuculescu | Gundy => (tensor(4), 100, Span(-2, 4), Span(1, 1), KernelChoice::LpBumps),
            TransformWeak11 | Ergodic => (tensor(4), 30, Span(-6, 6), Span(1, 1), KernelChoice::LpBumps),
            TransformL2 | Bmo => (tensor(4), 50, Span(-2, 4), Span(1, 1), KernelChoice::LpBumps),
            Cross => (tensor(3), 30, Span(-2, 4), Span(1, 1), KernelChoice::LpBumps),
            Cz | Zeta => (grid(1, 4, 2), 100, Span(-2, 4), Span(1, 1), KernelChoice::LpBumps),
            ThmB1 => (grid(1, 3, 2), 30, Span(-2, 4), Span(1, 1), KernelChoice::LpBumps),
            PseudolocDecay => (grid(1, 10, 1), 4, Span(-2, 4), Span(3, 8), KernelChoice::LpBumps),
            Ksk => (grid(1, 6, 1), 12, Span(-2, 4), Span(1, 3), KernelChoice::LpBumps),
            Paraproduct => (grid(1, 7, 1), 50, Span(-2, 4), Span(1, 4), KernelChoice::LpBumps),
            Vanish => (grid(1, 7, 1), 50, Span(-2, 4), Span(1, 4), KernelChoice::LpBumps),
            Localization => (grid(1, 10, 1), 20, Span(-2, 4), Span(1, 1), KernelChoice::Hilbert),
            NcPseudoloc => (grid(1, 8, 2), 20, Span(-2, 3), Span(2, 5), KernelChoice::LpBumps),
            BmoCzo => (grid(1, 8, 1), 20, Span(-2, 4), Span(1, 1), KernelChoice::Annuli),
        };
        let mut cfg = ExperimentConfig {
            experiment,
            algebra: o.algebra.unwrap_or(algebra),
            trials: o.trials.unwrap_or(trials),
            seed: o.seed.unwrap_or(7),
            lambda_exp: o.lambda_exp.unwrap_or(lambda_exp),
            s: o.s.unwrap_or(s),
            kernel: o.kernel.unwrap_or(kernel),
            gamma: o.gamma.unwrap_or(1.0),
            components: 3,
            envelope: ENVELOPE,
        };
        if let Some(depth) = o.depth {
            cfg.algebra = match cfg.algebra.0 {
                AlgebraSpec::GridMatrix { dim, size, .. } => grid(dim, depth, size),
                AlgebraSpec::TensorDyadic { .. } => tensor(depth),
                AlgebraSpec::Corner { .. } => Algebra(AlgebraSpec::Corner { size: depth }),
            };
            cfg.algebra.0.validate()?;
        }
        if cfg.trials == 0 {
            return Err(HarnessError::Usage("--trials must be at least 1".into()));
        }
        if !(cfg.gamma > 0.0 && cfg.gamma <= 1.0) {
            return Err(HarnessError::Usage(format!("--gamma must lie in (0,1], got {}", cfg.gamma)));
        }
        Ok(cfg)
    }

    pub fn defaults(experiment: Experiment) -> Self {
        Self::resolve(experiment, &Overrides::default()).expect("defaults are valid")
    }

    /// `(dim, depth)` of a grid algebra.
    pub fn grid(&self) -> Result<nclp_core::filtration::Grid> {
        match self.algebra.0 {
            AlgebraSpec::GridMatrix { dim, depth, .. } => Ok(nclp_core::filtration::Grid::new(dim, depth)?),
            other => Err(HarnessError::Usage(format!("{} needs a grid algebra, got {other:?}", self.experiment))),
        }
    }

    pub fn shifts(&self) -> Result<Vec<usize>> {
        if self.s.0 < 1 {
            return Err(HarnessError::Usage("--s must start at 1 or above".into()));
        }
        Ok(self.s.iter().map(|s| s as usize).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_algebras_and_spans() {
        assert_eq!("grid:1,4,2".parse::<Algebra>().unwrap().to_string(), "grid:1,4,2");
        assert_eq!("tensor:3".parse::<Algebra>().unwrap().0, AlgebraSpec::TensorDyadic { levels: 3 });
        assert!("grid:1,4".parse::<Algebra>().is_err());
        assert!("disk:2".parse::<Algebra>().is_err());
        assert_eq!("-2..4".parse::<Span>().unwrap(), Span(-2, 4));
        assert_eq!("1..=3".parse::<Span>().unwrap(), Span(1, 3));
        assert!("4..2".parse::<Span>().is_err());
    }

    #[test]
    fn depth_override_and_validation() {
        let o = Overrides { depth: Some(6), ..Default::default() };
        let cfg = ExperimentConfig::resolve(Experiment::Cz, &o).unwrap();
        assert_eq!(cfg.algebra.to_string(), "grid:1,6,2");
        let bad = Overrides { gamma: Some(1.5), ..Default::default() };
        assert!(ExperimentConfig::resolve(Experiment::Ksk, &bad).is_err());
        assert!(ExperimentConfig::defaults(Experiment::Norms).grid().is_err());
        assert_eq!(Experiment::ThmB1.name(), "thmB1");
    }
}
