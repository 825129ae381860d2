//! ARCH, GARCH, EGARCH and GJR conditional-variance models.
//!
//! Conventions shared by every family:
//!
//! * the mean equation is zero, so the shock `a_t` is the return itself;
//! * `p` counts the lagged-variance terms (`β`) and `q` the lagged-shock terms
//!   (`α`, and `γ` for EGARCH/GJR); ARCH(p) has `p` shock terms and no `β`;
//! * lags reaching before the sample are seeded with `h_init`, squared shocks
//!   with `h_init`, GJR's negative-shock indicator with its expectation 1/2,
//!   and EGARCH's standardized shock with `|z| = 1, z = 0`.

mod fit;
mod recursion;
mod simulate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innovations::{InnovationDist, InnovationKind};

pub use fit::{
    best_by_bic, fit_mle, fit_mle_with, segment_criteria, information_criteria, select_order, starting_points, FitOptions,
    FittedModel,
};
pub use recursion::{forecast_path, log_likelihood, variance_recursion, EGARCH_CENTER};
pub use simulate::{simulate, simulate_regimes, unconditional_variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Arch,
    Garch,
    Egarch,
    Gjr,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Arch, Family::Garch, Family::Egarch, Family::Gjr];

    pub fn name(self) -> &'static str {
        match self {
            Family::Arch => "ARCH",
            Family::Garch => "GARCH",
            Family::Egarch => "EGARCH",
            Family::Gjr => "GJR",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ARCH" => Some(Family::Arch),
            "GARCH" => Some(Family::Garch),
            "EGARCH" => Some(Family::Egarch),
            "GJR" | "GJR-GARCH" => Some(Family::Gjr),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub p: usize,
    /// Zero for ARCH.
    pub q: usize,
    pub innovation: InnovationKind,
    /// EGARCH only: subtract `E|z|` of a standard normal from `|z|`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub egarch_centered: bool,
}

impl ModelSpec {
    pub fn new(family: Family, p: usize, q: usize, innovation: InnovationKind) -> Result<Self> {
        let spec = Self {
            family,
            p,
            q: if family == Family::Arch { 0 } else { q },
            innovation,
            egarch_centered: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn arch(p: usize, innovation: InnovationKind) -> Result<Self> {
        Self::new(Family::Arch, p, 0, innovation)
    }

    pub fn garch(p: usize, q: usize, innovation: InnovationKind) -> Result<Self> {
        Self::new(Family::Garch, p, q, innovation)
    }

    pub fn egarch(p: usize, q: usize, innovation: InnovationKind) -> Result<Self> {
        Self::new(Family::Egarch, p, q, innovation)
    }

    pub fn gjr(p: usize, q: usize, innovation: InnovationKind) -> Result<Self> {
        Self::new(Family::Gjr, p, q, innovation)
    }

    pub fn centered(mut self, on: bool) -> Self {
        self.egarch_centered = on && self.family == Family::Egarch;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.family {
            Family::Arch => self.p >= 1 && self.q == 0,
            _ => self.p >= 1 && self.q >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid orders (p={}, q={}) for {}",
                self.p,
                self.q,
                self.family.name()
            )))
        }
    }

    /// Number of shock (`α`) coefficients.
    pub fn n_alpha(&self) -> usize {
        match self.family {
            Family::Arch => self.p,
            _ => self.q,
        }
    }

    /// Number of lagged-variance (`β`) coefficients.
    pub fn n_beta(&self) -> usize {
        match self.family {
            Family::Arch => 0,
            _ => self.p,
        }
    }

    pub fn n_gamma(&self) -> usize {
        match self.family {
            Family::Egarch | Family::Gjr => self.q,
            _ => 0,
        }
    }

    /// Longest lag the recursion reads.
    pub fn max_lag(&self) -> usize {
        self.n_alpha().max(self.n_beta())
    }

    /// Free parameters including the innovation shape parameters.
    pub fn n_params(&self) -> usize {
        1 + self.n_alpha() + self.n_beta() + self.n_gamma() + self.innovation.n_params()
    }

    pub fn label(&self) -> String {
        let c = if self.egarch_centered { "c" } else { "" };
        match self.family {
            Family::Arch => format!("ARCH-{}({})", self.innovation.tag(), self.p),
            f => format!(
                "{}{}-{}({},{})",
                f.name(),
                c,
                self.innovation.tag(),
                self.p,
                self.q
            ),
        }
    }
}

/// Parses labels such as `GARCH-N(1,1)`, `ARCH-t(3)` or `EGARCHc-G(1,2)`.
impl std::str::FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognized model label `{s}`"));
        let (head, rest) = s.trim().split_once('-').ok_or_else(bad)?;
        let (tag, orders) = rest.split_once('(').ok_or_else(bad)?;
        let orders = orders.strip_suffix(')').ok_or_else(bad)?;
        let (family, centered) = match head.strip_suffix('c') {
            Some(f) if Family::parse(f) == Some(Family::Egarch) => (Family::Egarch, true),
            _ => (Family::parse(head).ok_or_else(bad)?, false),
        };
        let innovation = InnovationKind::from_tag(tag).ok_or_else(bad)?;
        let nums: Vec<usize> = orders
            .split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let spec = match (family, nums.as_slice()) {
            (Family::Arch, [p]) => ModelSpec::arch(*p, innovation)?,
            (Family::Arch, _) => return Err(bad()),
            (f, [p, q]) => ModelSpec::new(f, *p, *q, innovation)?,
            _ => return Err(bad()),
        };
        Ok(spec.centered(centered))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha0: f64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    #[serde(default)]
    pub gammas: Vec<f64>,
    pub innovation: InnovationDist,
}

impl ModelParams {
    pub fn new(
        alpha0: f64,
        alphas: Vec<f64>,
        betas: Vec<f64>,
        gammas: Vec<f64>,
        innovation: InnovationDist,
    ) -> Self {
        Self {
            alpha0,
            alphas,
            betas,
            gammas,
            innovation,
        }
    }

    /// Reads `α₀, α₁..α_p, β₁..β_q, γ.., shape..` in that order, with the
    /// counts taken from `spec`.
    pub fn from_values(spec: &ModelSpec, values: &[f64]) -> Result<Self> {
        let (na, nb, ng) = (spec.n_alpha(), spec.n_beta(), spec.n_gamma());
        let want = spec.n_params();
        if values.len() != want {
            return Err(Error::InvalidParameter(format!(
                "{} takes {want} parameters, got {}",
                spec.label(),
                values.len()
            )));
        }
        let mut at = 1;
        let mut take = |n: usize| {
            let v = values[at..at + n].to_vec();
            at += n;
            v
        };
        let alphas = take(na);
        let betas = take(nb);
        let gammas = take(ng);
        let shape = take(spec.innovation.n_params());
        let innovation = InnovationDist::from_shape_params(spec.innovation, &shape)?;
        let params = Self::new(values[0], alphas, betas, gammas, innovation);
        params.validate(spec)?;
        Ok(params)
    }

    /// Normal-innovation parameters without asymmetry terms.
    pub fn normal(alpha0: f64, alphas: Vec<f64>, betas: Vec<f64>) -> Self {
        Self::new(alpha0, alphas, betas, vec![], InnovationDist::Normal)
    }

    pub fn with_gammas(mut self, gammas: Vec<f64>) -> Self {
        self.gammas = gammas;
        self
    }

    pub fn with_innovation(mut self, innovation: InnovationDist) -> Self {
        self.innovation = innovation;
        self
    }

    /// `Σα + Σβ + ½Σγ` for the linear families, `Σβ` for EGARCH.
    pub fn persistence(&self, family: Family) -> f64 {
        let a: f64 = self.alphas.iter().sum();
        let b: f64 = self.betas.iter().sum();
        match family {
            Family::Arch | Family::Garch => a + b,
            Family::Gjr => a + b + 0.5 * self.gammas.iter().sum::<f64>(),
            Family::Egarch => b,
        }
    }

    /// Checks shapes against `spec`, sign constraints of the linear families
    /// and the innovation parameters. Stationarity is not required here.
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        spec.validate()?;
        let bad = |msg: String| Err(Error::InvalidParameter(format!("{}: {msg}", spec.label())));
        if self.alphas.len() != spec.n_alpha()
            || self.betas.len() != spec.n_beta()
            || self.gammas.len() != spec.n_gamma()
        {
            return bad(format!(
                "expected {}/{}/{} alpha/beta/gamma coefficients, got {}/{}/{}",
                spec.n_alpha(),
                spec.n_beta(),
                spec.n_gamma(),
                self.alphas.len(),
                self.betas.len(),
                self.gammas.len()
            ));
        }
        if self.innovation.kind() != spec.innovation {
            return bad(format!(
                "innovation {:?} does not match spec {:?}",
                self.innovation.kind(),
                spec.innovation
            ));
        }
        self.innovation.validate()?;
        let all = std::iter::once(&self.alpha0)
            .chain(&self.alphas)
            .chain(&self.betas)
            .chain(&self.gammas);
        if all.clone().any(|v| !v.is_finite()) {
            return bad("non-finite coefficient".into());
        }
        if spec.family != Family::Egarch {
            if self.alpha0 <= 0.0 {
                return bad(format!("alpha0 must be positive, got {}", self.alpha0));
            }
            if all.skip(1).any(|v| *v < 0.0) {
                return bad("coefficients must be nonnegative".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for spec in crate::feature_bank::default_bank() {
            assert_eq!(spec.label().parse::<ModelSpec>().unwrap(), spec);
        }
        let c = ModelSpec::egarch(1, 2, InnovationKind::Ged).unwrap().centered(true);
        assert_eq!(c.label().parse::<ModelSpec>().unwrap(), c);
        for bad in ["GARCH", "GARCH-N(1)", "ARCH-N(1,1)", "FOO-N(1,1)", "GARCH-x(1,1)", "GARCH-N(0,1)"] {
            assert!(bad.parse::<ModelSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn from_values_reads_terms_in_order() {
        let spec = ModelSpec::gjr(1, 2, InnovationKind::SkewStudentT).unwrap();
        let p = ModelParams::from_values(&spec, &[1e-6, 0.03, 0.02, 0.8, 0.05, 0.04, 7.0, -0.1]).unwrap();
        assert_eq!(p.alpha0, 1e-6);
        assert_eq!(p.alphas, vec![0.03, 0.02]);
        assert_eq!(p.betas, vec![0.8]);
        assert_eq!(p.gammas, vec![0.05, 0.04]);
        assert_eq!(p.innovation, InnovationDist::SkewStudentT { nu: 7.0, lambda: -0.1 });

        let arch = ModelSpec::arch(2, InnovationKind::Normal).unwrap();
        assert_eq!(ModelParams::from_values(&arch, &[1e-5, 0.2, 0.1]).unwrap().betas, Vec::<f64>::new());
        // wrong count, then a negative coefficient
        assert!(ModelParams::from_values(&arch, &[1e-5, 0.2]).is_err());
        let garch = ModelSpec::garch(1, 1, InnovationKind::Normal).unwrap();
        assert!(ModelParams::from_values(&garch, &[1e-5, -0.1, 0.6]).is_err());
    }

}
