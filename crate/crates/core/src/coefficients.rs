//! Material coefficients, absorption and impedance parameters.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::{Error, Result};

const CENTER: [f64; 2] = [0.5, 0.5];
const OBSTACLE_RADIUS: f64 = 0.25;
const LAYERS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Disk,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    LinearDecrease,
    LinearIncrease,
    Oscillating,
}

/// Which coefficient profile is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Constant,
    Obstacle(Shape, Profile),
}

impl FieldKind {
    pub const ALL: [FieldKind; 7] = [
        FieldKind::Constant,
        FieldKind::Obstacle(Shape::Disk, Profile::LinearDecrease),
        FieldKind::Obstacle(Shape::Disk, Profile::LinearIncrease),
        FieldKind::Obstacle(Shape::Disk, Profile::Oscillating),
        FieldKind::Obstacle(Shape::Square, Profile::LinearDecrease),
        FieldKind::Obstacle(Shape::Square, Profile::LinearIncrease),
        FieldKind::Obstacle(Shape::Square, Profile::Oscillating),
    ];

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Constant => "constant",
            FieldKind::Obstacle(Shape::Disk, Profile::LinearDecrease) => "disk_linear_decrease",
            FieldKind::Obstacle(Shape::Disk, Profile::LinearIncrease) => "disk_linear_increase",
            FieldKind::Obstacle(Shape::Disk, Profile::Oscillating) => "disk_oscillating7",
            FieldKind::Obstacle(Shape::Square, Profile::LinearDecrease) => "square_linear_decrease",
            FieldKind::Obstacle(Shape::Square, Profile::LinearIncrease) => "square_linear_increase",
            FieldKind::Obstacle(Shape::Square, Profile::Oscillating) => "square_oscillating7",
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FieldKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = FieldKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown profile '{s}', expected one of: {}",
                    names.join(", ")
                ))
            })
    }
}

/// Scalar coefficient equal to 1 outside a central obstacle (disk of radius
/// 1/4 or square of side 1/2) and following a radial profile inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientField {
    pub kind: FieldKind,
    pub cmin: f64,
    pub cmax: f64,
}

impl Default for CoefficientField {
    fn default() -> Self {
        Self::constant()
    }
}

impl CoefficientField {
    pub fn constant() -> Self {
        Self {
            kind: FieldKind::Constant,
            cmin: 1.0,
            cmax: 1.0,
        }
    }

    pub fn new(kind: FieldKind, cmin: f64, cmax: f64) -> Result<Self> {
        if !(cmin > 0.0 && cmin <= cmax && cmax.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coefficient bounds need 0 < cmin <= cmax, got ({cmin}, {cmax})"
            )));
        }
        Ok(Self { kind, cmin, cmax })
    }

    pub fn is_constant_one(&self) -> bool {
        self.kind == FieldKind::Constant
    }

    /// Smallest value the field attains.
    pub fn min_value(&self) -> f64 {
        match self.kind {
            FieldKind::Constant => 1.0,
            _ => self.cmin.min(1.0),
        }
    }

    pub fn max_value(&self) -> f64 {
        match self.kind {
            FieldKind::Constant => 1.0,
            _ => self.cmax.max(1.0),
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let (shape, profile) = match self.kind {
            FieldKind::Constant => return 1.0,
            FieldKind::Obstacle(s, p) => (s, p),
        };
        let (dx, dy) = (x[0] - CENTER[0], x[1] - CENTER[1]);
        let rho = match shape {
            Shape::Disk => dx.hypot(dy),
            Shape::Square => dx.abs().max(dy.abs()),
        };
        // the obstacle boundary itself belongs to the background
        if rho >= OBSTACLE_RADIUS {
            return 1.0;
        }
        let s = rho / OBSTACLE_RADIUS;
        match profile {
            Profile::LinearDecrease => self.cmax + s * (self.cmin - self.cmax),
            Profile::LinearIncrease => self.cmin + s * (self.cmax - self.cmin),
            Profile::Oscillating => {
                let layer = ((LAYERS as f64 * s).floor() as usize).min(LAYERS - 1);
                if layer.is_multiple_of(2) {
                    self.cmax
                } else {
                    self.cmin
                }
            }
        }
    }
}

/// Rule for the impedance parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EtaMode {
    /// `eta = k`.
    #[default]
    ExperimentK,
    /// `eta = sign(eps) k`.
    SignEpsK,
    /// `eta = sqrt(k^2 + i eps)`, branch cut on the positive real axis.
    SqrtBranch,
}

impl EtaMode {
    pub fn name(self) -> &'static str {
        match self {
            EtaMode::ExperimentK => "k",
            EtaMode::SignEpsK => "sign_eps_k",
            EtaMode::SqrtBranch => "sqrt",
        }
    }
}

impl fmt::Display for EtaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EtaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" | "experiment_k" => Ok(EtaMode::ExperimentK),
            "sign_eps_k" | "sign" => Ok(EtaMode::SignEpsK),
            "sqrt" | "sqrt_branch" => Ok(EtaMode::SqrtBranch),
            _ => Err(Error::InvalidParameter(format!(
                "unknown eta mode '{s}', expected k, sign_eps_k or sqrt"
            ))),
        }
    }
}

/// Impedance parameter for the given mode; every mode gives `k` when `eps = 0`.
pub fn eta_default(k: f64, eps: f64, mode: EtaMode) -> C64 {
    if eps == 0.0 {
        return C64::new(k, 0.0);
    }
    match mode {
        EtaMode::ExperimentK => C64::new(k, 0.0),
        EtaMode::SignEpsK => C64::new(eps.signum() * k, 0.0),
        EtaMode::SqrtBranch => {
            let r = C64::new(k * k, eps).sqrt();
            if r.im < 0.0 {
                -r
            } else {
                r
            }
        }
    }
}

/// Everything the discrete operator depends on besides the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParameters {
    pub k: f64,
    pub eps: f64,
    pub eta: C64,
    pub a: CoefficientField,
    pub n: CoefficientField,
}

impl ProblemParameters {
    pub fn new(
        k: f64,
        eps: f64,
        eta: C64,
        a: CoefficientField,
        n: CoefficientField,
    ) -> Result<Self> {
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "wavenumber must be >= 1, got {k}"
            )));
        }
        if eps.abs() > k * k || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "absorption must satisfy |eps| <= k^2, got {eps} for k = {k}"
            )));
        }
        Ok(Self { k, eps, eta, a, n })
    }

    /// Homogeneous medium with `eta = k`.
    pub fn homogeneous(k: f64, eps: f64) -> Result<Self> {
        Self::new(
            k,
            eps,
            eta_default(k, eps, EtaMode::ExperimentK),
            CoefficientField::constant(),
            CoefficientField::constant(),
        )
    }

    pub fn is_homogeneous(&self) -> bool {
        self.a.is_constant_one() && self.n.is_constant_one()
    }
}
