//! Run configuration and the parameter rules it is written in.

use std::fmt;
use std::str::FromStr;

use helmholtz_dd::coefficients::{CoefficientField, EtaMode, FieldKind};
use helmholtz_dd::krylov::Side;
use helmholtz_dd::preconditioner::Variant;
use serde::{Deserialize, Serialize};

use crate::RunError;

/// Serde adapter for types that round-trip through their `Display` form.
mod text {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(de::Error::custom)
    }
}

fn split_rule(s: &str) -> (&str, Option<&str>) {
    match s.split_once(':') {
        Some((name, arg)) => (name, Some(arg)),
        None => (s, None),
    }
}

fn rule_value(rule: &str, arg: Option<&str>) -> Result<f64, RunError> {
    let arg = arg
        .ok_or_else(|| RunError::Config(format!("rule '{rule}' needs a value, e.g. {rule}:1.5")))?;
    arg.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| RunError::Config(format!("bad number '{arg}' in rule '{rule}'")))
}

/// Absorption `eps` as a function of `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    Zero,
    /// `eps = k^gamma`.
    Pow(f64),
    Value(f64),
}

impl EpsRule {
    pub fn eval(self, k: f64) -> f64 {
        match self {
            EpsRule::Zero => 0.0,
            EpsRule::Pow(g) => k.powf(g),
            EpsRule::Value(v) => v,
        }
    }
}

impl fmt::Display for EpsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsRule::Zero => f.write_str("zero"),
            EpsRule::Pow(g) => write!(f, "pow:{g}"),
            EpsRule::Value(v) => write!(f, "value:{v}"),
        }
    }
}

impl FromStr for EpsRule {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        match split_rule(s) {
            ("zero", None) => Ok(EpsRule::Zero),
            ("pow", arg) => Ok(EpsRule::Pow(rule_value("pow", arg)?)),
            ("value", arg) => Ok(EpsRule::Value(rule_value("value", arg)?)),
            _ => Err(RunError::Config(format!(
                "unknown eps rule '{s}' (expected zero, pow:<gamma> or value:<eps>)"
            ))),
        }
    }
}

/// Coarse square size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoarseRule {
    /// `M = floor(k^alpha)` squares per side, so `H ~ k^{-alpha}`.
    Pow(f64),
    /// `M` squares per side.
    Fixed(usize),
}

impl fmt::Display for CoarseRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoarseRule::Pow(a) => write!(f, "pow:{a}"),
            CoarseRule::Fixed(m) => write!(f, "fixed:{m}"),
        }
    }
}

impl FromStr for CoarseRule {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        match split_rule(s) {
            ("pow", arg) => Ok(CoarseRule::Pow(rule_value("pow", arg)?)),
            ("fixed", Some(m)) => m
                .parse()
                .map(CoarseRule::Fixed)
                .map_err(|_| RunError::Config(format!("bad square count '{m}' in rule '{s}'"))),
            _ => Err(RunError::Config(format!(
                "unknown H rule '{s}' (expected pow:<alpha> or fixed:<M>)"
            ))),
        }
    }
}

/// Overlap width of the extended squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverlapRule {
    /// `delta = H / c`.
    HFrac(f64),
    /// `delta = c / k`.
    Wavelengths(f64),
    /// `delta = c h`.
    Cells(f64),
}

impl OverlapRule {
    pub fn eval(self, k: f64, coarse_h: f64, fine_h: f64) -> f64 {
        match self {
            OverlapRule::HFrac(c) => coarse_h / c,
            OverlapRule::Wavelengths(c) => c / k,
            OverlapRule::Cells(c) => c * fine_h,
        }
    }

    fn factor(self) -> f64 {
        match self {
            OverlapRule::HFrac(c) | OverlapRule::Wavelengths(c) | OverlapRule::Cells(c) => c,
        }
    }
}

impl fmt::Display for OverlapRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OverlapRule::HFrac(c) => write!(f, "Hfrac:{c}"),
            OverlapRule::Wavelengths(c) => write!(f, "wavelengths:{c}"),
            OverlapRule::Cells(c) => write!(f, "cells:{c}"),
        }
    }
}

impl FromStr for OverlapRule {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        match split_rule(s) {
            ("Hfrac", arg) => Ok(OverlapRule::HFrac(rule_value("Hfrac", arg)?)),
            ("wavelengths", arg) => Ok(OverlapRule::Wavelengths(rule_value("wavelengths", arg)?)),
            ("cells", arg) => Ok(OverlapRule::Cells(rule_value("cells", arg)?)),
            _ => Err(RunError::Config(format!(
                "unknown overlap rule '{s}' (expected Hfrac:<c>, wavelengths:<c> or cells:<c>)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerProductKind {
    Euclidean,
    /// Energy inner product `<v, w> = w^* D_k v`.
    Weighted,
}

impl fmt::Display for InnerProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InnerProductKind::Euclidean => "euclidean",
            InnerProductKind::Weighted => "weighted",
        })
    }
}

impl FromStr for InnerProductKind {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        match s {
            "euclidean" => Ok(InnerProductKind::Euclidean),
            "weighted" => Ok(InnerProductKind::Weighted),
            _ => Err(RunError::Config(format!(
                "unknown inner product '{s}' (expected euclidean or weighted)"
            ))),
        }
    }
}

/// A coefficient profile with its extreme values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    #[serde(with = "text")]
    pub profile: FieldKind,
    pub cmin: f64,
    pub cmax: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            profile: FieldKind::Constant,
            cmin: 1.0,
            cmax: 1.0,
        }
    }
}

impl ProfileConfig {
    pub fn new(profile: FieldKind, cmin: f64, cmax: f64) -> Self {
        Self {
            profile,
            cmin,
            cmax,
        }
    }

    pub fn field(&self) -> Result<CoefficientField, RunError> {
        if self.profile == FieldKind::Constant {
            return Ok(CoefficientField::constant());
        }
        CoefficientField::new(self.profile, self.cmin, self.cmax)
            .map_err(|e| RunError::Config(e.to_string()))
    }
}

/// Everything that determines a run. Serialises to JSON and reads back to
/// the same bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub k: f64,
    pub p: usize,
    #[serde(with = "text")]
    pub eps: EpsRule,
    #[serde(with = "text")]
    pub eta: EtaMode,
    pub strategy: u8,
    #[serde(rename = "H", with = "text")]
    pub coarse: CoarseRule,
    #[serde(with = "text")]
    pub overlap: OverlapRule,
    #[serde(with = "text")]
    pub precond: Variant,
    #[serde(with = "text")]
    pub ip: InnerProductKind,
    #[serde(with = "text")]
    pub side: Side,
    #[serde(rename = "A")]
    pub a: ProfileConfig,
    pub n: ProfileConfig,
    pub tol: f64,
    pub maxit: usize,
    pub seed: u64,
    /// Element quadrature degree; `None` uses `2p - 2`.
    pub quad_degree: Option<usize>,
    pub fov: bool,
    pub bounds: bool,
    pub angles: usize,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: 40.0,
            p: 3,
            eps: EpsRule::Pow(1.5),
            eta: EtaMode::ExperimentK,
            strategy: 1,
            coarse: CoarseRule::Pow(0.3),
            overlap: OverlapRule::HFrac(4.0),
            precond: Variant::Soras,
            ip: InnerProductKind::Euclidean,
            side: Side::Left,
            a: ProfileConfig::default(),
            n: ProfileConfig::default(),
            tol: 1e-6,
            maxit: 500,
            seed: 0,
            quad_degree: None,
            fov: false,
            bounds: false,
            angles: 256,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, RunError> {
        let cfg: Self =
            serde_json::from_str(s).map_err(|e| RunError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks ranges that the rule parsers alone cannot.
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return bad(format!("k must be >= 1, got {}", self.k));
        }
        if !(1..=4).contains(&self.p) {
            return bad(format!("p must be 1..=4, got {}", self.p));
        }
        if !matches!(self.strategy, 1 | 2) {
            return bad(format!("strategy must be 1 or 2, got {}", self.strategy));
        }
        let eps = self.eps.eval(self.k);
        if !(eps.is_finite() && eps.abs() <= self.k * self.k) {
            return bad(format!("eps = {eps} violates |eps| <= k^2"));
        }
        match self.coarse {
            CoarseRule::Pow(a) if !(a > 0.0 && a <= 1.0) => {
                return bad(format!("H rule exponent must lie in (0, 1], got {a}"))
            }
            CoarseRule::Fixed(0) => return bad("H rule needs M >= 1".into()),
            _ => {}
        }
        if !(self.overlap.factor() > 0.0) {
            return bad(format!(
                "overlap factor must be positive in '{}'",
                self.overlap
            ));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tol must lie in (0, 1), got {}", self.tol));
        }
        if self.maxit == 0 {
            return bad("maxit must be >= 1".into());
        }
        if self.angles < 8 {
            return bad(format!("angles must be >= 8, got {}", self.angles));
        }
        self.a.field()?;
        self.n.field()?;
        Ok(())
    }
}
