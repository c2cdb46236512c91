//! Gamma regression models without intercept, their experimental regions,
//! approximate designs and information matrices.
//!
//! The information of a single observation at `x` is normalized to
//! `u(x, β) f(x) f(x)ᵀ` with intensity `u(x, β) = (f(x)ᵀβ)⁻²`; the constant
//! factor coming from the gamma shape and the power-link exponent is dropped
//! since it never changes which design is optimal.

use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::linalg::Matrix;

/// Two points are the same support point when no coordinate differs by this much.
pub const POINT_MERGE_TOL: f64 = 1e-12;
/// Allowed deviation of the weight total from one for a strictly built design.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Allowed deviation when reading rounded weights from files; they are renormalized.
pub const LOOSE_WEIGHT_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `f(x) = x` with `nu` factors.
    FirstOrder { nu: usize },
    /// `f(x) = (x1, x2, x1·x2)`.
    TwoFactorInteraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct GammaModel {
    kind: ModelKind,
}

impl GammaModel {
    pub fn first_order(nu: usize) -> Result<Self> {
        if nu < 2 {
            return Err(DesignError::InvalidModel(format!(
                "first-order model needs at least 2 factors, got {nu}"
            )));
        }
        Ok(Self {
            kind: ModelKind::FirstOrder { nu },
        })
    }

    pub fn interaction() -> Self {
        Self {
            kind: ModelKind::TwoFactorInteraction,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Number of factors.
    pub fn nu(&self) -> usize {
        match self.kind {
            ModelKind::FirstOrder { nu } => nu,
            ModelKind::TwoFactorInteraction => 2,
        }
    }

    /// Number of parameters.
    pub fn p(&self) -> usize {
        match self.kind {
            ModelKind::FirstOrder { nu } => nu,
            ModelKind::TwoFactorInteraction => 3,
        }
    }

    pub fn is_first_order(&self) -> bool {
        matches!(self.kind, ModelKind::FirstOrder { .. })
    }

    /// Binds a parameter point, checking its length.
    pub fn at<'a>(&'a self, beta: &'a ParameterPoint) -> Result<AtParameter<'a>> {
        check_len(self.p(), beta.len())?;
        Ok(AtParameter { model: self, beta })
    }
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    kind: String,
    #[serde(default)]
    nu: Option<usize>,
}

impl TryFrom<RawModel> for GammaModel {
    type Error = DesignError;
    fn try_from(raw: RawModel) -> Result<Self> {
        match raw.kind.as_str() {
            "first_order" => {
                let nu = raw
                    .nu
                    .ok_or_else(|| DesignError::InvalidModel("missing field `nu`".into()))?;
                GammaModel::first_order(nu)
            }
            "interaction" => match raw.nu {
                None | Some(2) => Ok(GammaModel::interaction()),
                Some(nu) => Err(DesignError::InvalidModel(format!(
                    "interaction model has exactly 2 factors, got nu = {nu}"
                ))),
            },
            other => Err(DesignError::InvalidModel(format!("unknown model kind `{other}`"))),
        }
    }
}

impl From<GammaModel> for RawModel {
    fn from(m: GammaModel) -> Self {
        let kind = match m.kind {
            ModelKind::FirstOrder { .. } => "first_order",
            ModelKind::TwoFactorInteraction => "interaction",
        };
        RawModel {
            kind: kind.to_string(),
            nu: Some(m.nu()),
        }
    }
}

/// The parameter vector β at which designs are locally optimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterPoint(Vec<f64>);

impl ParameterPoint {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self(self.0.iter().map(|b| b * lambda).collect())
    }
}

impl From<Vec<f64>> for ParameterPoint {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl From<&[f64]> for ParameterPoint {
    fn from(v: &[f64]) -> Self {
        Self(v.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRegion", into = "RawRegion")]
pub enum ExperimentalRegion {
    /// `[0, ∞)^ν` without the origin.
    PositiveOrthant { nu: usize },
    /// `[a, b]^ν` with `0 < a < b`.
    Hypercube { a: f64, b: f64, nu: usize },
}

impl ExperimentalRegion {
    pub fn orthant(nu: usize) -> Result<Self> {
        if nu < 1 {
            return Err(DesignError::InvalidRegion("nu must be at least 1".into()));
        }
        Ok(Self::PositiveOrthant { nu })
    }

    pub fn hypercube(a: f64, b: f64, nu: usize) -> Result<Self> {
        check_bounds(a, b)?;
        if nu < 1 {
            return Err(DesignError::InvalidRegion("nu must be at least 1".into()));
        }
        Ok(Self::Hypercube { a, b, nu })
    }

    pub fn nu(&self) -> usize {
        match *self {
            Self::PositiveOrthant { nu } | Self::Hypercube { nu, .. } => nu,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.nu() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match *self {
            Self::PositiveOrthant { .. } => x.iter().all(|&v| v >= 0.0) && x.iter().any(|&v| v > 0.0),
            Self::Hypercube { a, b, .. } => {
                let slack = POINT_MERGE_TOL * b;
                x.iter().all(|&v| v >= a - slack && v <= b + slack)
            }
        }
    }
}

pub(crate) fn check_bounds(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && a < b) {
        return Err(DesignError::InvalidRegion(format!(
            "hypercube bounds must satisfy 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct RawRegion {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    nu: usize,
}

impl TryFrom<RawRegion> for ExperimentalRegion {
    type Error = DesignError;
    fn try_from(raw: RawRegion) -> Result<Self> {
        match raw.kind.as_str() {
            "orthant" => ExperimentalRegion::orthant(raw.nu),
            "hypercube" => match (raw.a, raw.b) {
                (Some(a), Some(b)) => ExperimentalRegion::hypercube(a, b, raw.nu),
                _ => Err(DesignError::InvalidRegion(
                    "hypercube needs both `a` and `b`".into(),
                )),
            },
            other => Err(DesignError::InvalidRegion(format!("unknown region kind `{other}`"))),
        }
    }
}

impl From<ExperimentalRegion> for RawRegion {
    fn from(r: ExperimentalRegion) -> Self {
        match r {
            ExperimentalRegion::PositiveOrthant { nu } => RawRegion {
                kind: "orthant".into(),
                a: None,
                b: None,
                nu,
            },
            ExperimentalRegion::Hypercube { a, b, nu } => RawRegion {
                kind: "hypercube".into(),
                a: Some(a),
                b: Some(b),
                nu,
            },
        }
    }
}

/// An approximate design: distinct support points with positive weights
/// summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDesign")]
pub struct Design {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDesign {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<RawDesign> for Design {
    type Error = DesignError;
    fn try_from(raw: RawDesign) -> Result<Self> {
        Design::normalized(raw.points, raw.weights)
    }
}

impl Design {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        Self::validate_shape(&points, &weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(DesignError::InvalidDesign(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { points, weights })
    }

    /// Accepts weights whose total is within `LOOSE_WEIGHT_SUM_TOL` of one
    /// (e.g. values printed with limited precision) and rescales them.
    pub fn normalized(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        Self::validate_shape(&points, &weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > LOOSE_WEIGHT_SUM_TOL {
            return Err(DesignError::InvalidDesign(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { points, weights })
    }

    /// Equal weights on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let m = points.len();
        if m == 0 {
            return Err(DesignError::EmptyInput("design points"));
        }
        Self::normalized(points, vec![1.0 / m as f64; m])
    }

    fn validate_shape(points: &[Vec<f64>], weights: &[f64]) -> Result<()> {
        if points.is_empty() {
            return Err(DesignError::EmptyInput("design points"));
        }
        if points.len() != weights.len() {
            return Err(DesignError::InvalidDesign(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(DesignError::InvalidDesign("points must have at least one coordinate".into()));
        }
        for x in points {
            check_len(dim, x.len())?;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(DesignError::InvalidDesign(format!("non-finite point {x:?}")));
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(DesignError::InvalidDesign(format!(
                    "weight {i} must be positive, got {w}"
                )));
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if same_point(&points[i], &points[j]) {
                    return Err(DesignError::InvalidDesign(format!(
                        "support points {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.iter().map(|p| p.as_slice()).zip(self.weights.iter().copied())
    }

    /// Weight attached to `x`, or zero if `x` is not a support point.
    pub fn weight_at(&self, x: &[f64]) -> f64 {
        self.iter()
            .find(|(p, _)| same_point(p, x))
            .map_or(0.0, |(_, w)| w)
    }

    /// Applies `map` to every support point, keeping the weights.
    pub fn map_points<F>(&self, mut map: F) -> Result<Design>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let points = self
            .points
            .iter()
            .map(|p| map(p))
            .collect::<Result<Vec<_>>>()?;
        Design::normalized(points, self.weights.clone())
    }

    pub fn check_in_region(&self, region: &ExperimentalRegion) -> Result<()> {
        check_len(region.nu(), self.dim())?;
        match self.points.iter().find(|x| !region.contains(x)) {
            Some(x) => Err(DesignError::InvalidDesign(format!(
                "support point {x:?} lies outside the region"
            ))),
            None => Ok(()),
        }
    }
}

pub(crate) fn same_point(x: &[f64], y: &[f64]) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a - b).abs() < POINT_MERGE_TOL)
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(DesignError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Symmetric nonnegative definite `p × p` matrix `M(ξ, β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationMatrix(Matrix);

impl InformationMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn p(&self) -> usize {
        self.0.dim()
    }

    pub fn det(&self) -> f64 {
        self.0.det()
    }

    pub fn log_det(&self) -> f64 {
        self.det().ln()
    }

    pub fn is_singular(&self) -> bool {
        self.0.is_singular()
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.0.inverse()
    }
}

/// A regression model evaluated at a fixed parameter point: everything the
/// equivalence checks and the weight solver need.
pub trait LocalModel {
    /// Dimension of design points.
    fn dim(&self) -> usize;
    /// Number of parameters.
    fn p(&self) -> usize;
    fn features(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn intensity(&self, x: &[f64]) -> Result<f64>;

    /// `u(x) f(x) f(x)ᵀ` as the pair `(u(x), f(x))`.
    fn weighted_features(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.intensity(x)?, self.features(x)?))
    }

    fn information_matrix(&self, design: &Design) -> Result<InformationMatrix> {
        check_len(self.dim(), design.dim())?;
        let mut m = Matrix::zeros(self.p());
        for (x, w) in design.iter() {
            let (u, f) = self.weighted_features(x)?;
            m.add_outer(w * u, &f);
        }
        m.symmetrize();
        Ok(InformationMatrix(m))
    }
}

/// A gamma model bound to a parameter point.
#[derive(Debug, Clone, Copy)]
pub struct AtParameter<'a> {
    pub model: &'a GammaModel,
    pub beta: &'a ParameterPoint,
}

impl AtParameter<'_> {
    pub fn predictor(&self, x: &[f64]) -> Result<f64> {
        let f = features(self.model, x)?;
        Ok(f.iter().zip(self.beta.as_slice()).map(|(a, b)| a * b).sum())
    }
}

impl LocalModel for AtParameter<'_> {
    fn dim(&self) -> usize {
        self.model.nu()
    }

    fn p(&self) -> usize {
        self.model.p()
    }

    fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        features(self.model, x)
    }

    fn intensity(&self, x: &[f64]) -> Result<f64> {
        let eta = self.predictor(x)?;
        if !(eta > 0.0) {
            return Err(DesignError::NonpositivePredictor {
                point: x.to_vec(),
                value: eta,
            });
        }
        Ok(eta.powi(-2))
    }
}

/// Regression vector `f(x)`.
pub fn features(model: &GammaModel, x: &[f64]) -> Result<Vec<f64>> {
    check_len(model.nu(), x.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DesignError::InvalidParameter(format!("non-finite point {x:?}")));
    }
    Ok(match model.kind() {
        ModelKind::FirstOrder { .. } => x.to_vec(),
        ModelKind::TwoFactorInteraction => vec![x[0], x[1], x[0] * x[1]],
    })
}

/// Intensity `u(x, β) = (f(x)ᵀβ)⁻²`.
pub fn intensity(model: &GammaModel, beta: &ParameterPoint, x: &[f64]) -> Result<f64> {
    model.at(beta)?.intensity(x)
}

/// `M(ξ, β) = Σ ω_i u(x_i, β) f(x_i) f(x_i)ᵀ`, symmetrized after assembly.
pub fn information_matrix(
    model: &GammaModel,
    beta: &ParameterPoint,
    design: &Design,
) -> Result<InformationMatrix> {
    model.at(beta)?.information_matrix(design)
}

/// Whether `f(x)ᵀβ > 0` on the whole region.
///
/// On a hypercube the predictor is affine in each coordinate for both model
/// kinds, so checking the vertices suffices.
pub fn validate_positivity(model: &GammaModel, beta: &ParameterPoint, region: &ExperimentalRegion) -> bool {
    if beta.len() != model.p() || region.nu() != model.nu() {
        return false;
    }
    let b = beta.as_slice();
    match *region {
        ExperimentalRegion::PositiveOrthant { .. } => match model.kind() {
            ModelKind::FirstOrder { .. } => b.iter().all(|&v| v > 0.0),
            // along the axes β1, β2 must be positive; for large x the
            // interaction term dominates and must not be negative
            ModelKind::TwoFactorInteraction => b[0] > 0.0 && b[1] > 0.0 && b[2] >= 0.0,
        },
        ExperimentalRegion::Hypercube { .. } => {
            let local = AtParameter { model, beta };
            crate::equivalence::region_vertices(region)
                .map(|vs| vs.iter().all(|v| matches!(local.predictor(v), Ok(eta) if eta > 0.0)))
                .unwrap_or(false)
        }
    }
}

/// Convex combination of designs; coincident support points are merged by
/// summing their weights.
pub fn mix_designs(designs: &[Design], coefficients: &[f64]) -> Result<Design> {
    if designs.is_empty() {
        return Err(DesignError::EmptyInput("designs to mix"));
    }
    if designs.len() != coefficients.len() {
        return Err(DesignError::InvalidParameter(format!(
            "{} designs but {} mixing coefficients",
            designs.len(),
            coefficients.len()
        )));
    }
    if coefficients.iter().any(|&c| !(c.is_finite() && c >= 0.0)) {
        return Err(DesignError::InvalidParameter("mixing coefficients must be nonnegative".into()));
    }
    let total: f64 = coefficients.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(DesignError::InvalidParameter(format!(
            "mixing coefficients sum to {total}, not 1"
        )));
    }
    let dim = designs[0].dim();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (design, &c) in designs.iter().zip(coefficients) {
        check_len(dim, design.dim())?;
        if c == 0.0 {
            continue;
        }
        for (x, w) in design.iter() {
            match points.iter().position(|p| same_point(p, x)) {
                Some(k) => weights[k] += c * w,
                None => {
                    points.push(x.to_vec());
                    weights.push(c * w);
                }
            }
        }
    }
    Design::normalized(points, weights)
}
