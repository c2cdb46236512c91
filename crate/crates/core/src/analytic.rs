//! Closed-form locally optimal designs and the parameter-space classifiers
//! that decide which one applies.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::equivalence::{region_vertices, unit_vectors};
use crate::error::{DesignError, Result};
use crate::model::{check_bounds, check_len, Design, ExperimentalRegion, GammaModel, LocalModel, ParameterPoint};

/// Relative tolerance used to group vertices with equal intensity.
pub const INTENSITY_TIE_TOL: f64 = 1e-12;

/// Which optimality subregion a parameter point falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    Xi1,
    Xi2,
    Xi3,
    Xi4,
    Xi5Numerical,
    #[serde(rename = "Case_i")]
    CaseI,
    #[serde(rename = "Case_ii")]
    CaseII,
    #[serde(rename = "Case_iii")]
    CaseIII,
    #[serde(rename = "Case_iv")]
    CaseIV,
    #[serde(rename = "Case_v_FourPoint")]
    CaseVFourPoint,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionLabel::Xi1 => "Xi1",
            RegionLabel::Xi2 => "Xi2",
            RegionLabel::Xi3 => "Xi3",
            RegionLabel::Xi4 => "Xi4",
            RegionLabel::Xi5Numerical => "Xi5Numerical",
            RegionLabel::CaseI => "Case_i",
            RegionLabel::CaseII => "Case_ii",
            RegionLabel::CaseIII => "Case_iii",
            RegionLabel::CaseIV => "Case_iv",
            RegionLabel::CaseVFourPoint => "Case_v_FourPoint",
        };
        f.write_str(s)
    }
}

/// Classifier output. `design` is `None` exactly when `numerical` is set,
/// i.e. no closed form exists and the weights must come from the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: RegionLabel,
    pub design: Option<Design>,
    pub numerical: bool,
    pub gamma: Option<f64>,
}

impl Classification {
    fn closed(label: RegionLabel, design: Design, gamma: Option<f64>) -> Self {
        Self {
            label,
            design: Some(design),
            numerical: false,
            gamma,
        }
    }

    fn numerical(label: RegionLabel, gamma: Option<f64>) -> Self {
        Self {
            label,
            design: None,
            numerical: true,
            gamma,
        }
    }
}

// ---------------------------------------------------------------------------
// Orthant and two-factor designs
// ---------------------------------------------------------------------------

fn axis_points(nu: usize, scale: Option<&[f64]>) -> Result<Vec<Vec<f64>>> {
    match scale {
        None => Ok(unit_vectors(nu)),
        Some(s) => {
            check_len(nu, s.len())?;
            crate::equivalence::axis_candidates(s)
        }
    }
}

/// Equal weights on `a_i e_i`; D-optimal on the orthant for every admissible β.
pub fn d_optimal_orthant(nu: usize, scale: Option<&[f64]>) -> Result<Design> {
    if nu < 2 {
        return Err(DesignError::InvalidModel(format!("need at least 2 factors, got {nu}")));
    }
    Design::uniform(axis_points(nu, scale)?)
}

/// Weights `β_i / Σβ` on `a_i e_i`; A-optimal on the orthant at β.
pub fn a_optimal_orthant(beta: &ParameterPoint, scale: Option<&[f64]>) -> Result<Design> {
    let b = beta.as_slice();
    if b.len() < 2 {
        return Err(DesignError::InvalidModel(format!("need at least 2 factors, got {}", b.len())));
    }
    if let Some(i) = b.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(DesignError::InvalidParameter(format!(
            "A-optimal orthant design needs all β_i > 0, got β_{} = {}",
            i + 1,
            b[i]
        )));
    }
    let total: f64 = b.iter().sum();
    Design::normalized(axis_points(b.len(), scale)?, b.iter().map(|v| v / total).collect())
}

/// Equal weights on `(a, b)` and `(b, a)`.
pub fn d_optimal_two_factor(a: f64, b: f64) -> Result<Design> {
    check_bounds(a, b)?;
    Design::uniform(vec![vec![a, b], vec![b, a]])
}

/// A-optimal design on `[a, b]²`: support `(a, b)`, `(b, a)` with weights
/// `(β1 a + β2 b) / ((β1 + β2)(a + b))` and `(β1 b + β2 a) / ((β1 + β2)(a + b))`.
pub fn a_optimal_two_factor(a: f64, b: f64, beta: &ParameterPoint) -> Result<Design> {
    check_bounds(a, b)?;
    check_len(2, beta.len())?;
    let (b1, b2) = (beta.as_slice()[0], beta.as_slice()[1]);
    for x in [[a, b], [b, a]] {
        let eta = b1 * x[0] + b2 * x[1];
        if !(eta > 0.0) {
            return Err(DesignError::NonpositivePredictor {
                point: x.to_vec(),
                value: eta,
            });
        }
    }
    let denom = (b1 + b2) * (a + b);
    let w1 = (b1 * a + b2 * b) / denom;
    let w2 = (b1 * b + b2 * a) / denom;
    Design::normalized(vec![vec![a, b], vec![b, a]], vec![w1, w2])
}

// ---------------------------------------------------------------------------
// Simplex-type designs on [a, b]^ν
// ---------------------------------------------------------------------------

/// Equal weights on the `ν` vertices having `b` in exactly one coordinate.
pub fn simplex_design(nu: usize, a: f64, b: f64) -> Result<Design> {
    check_bounds(a, b)?;
    if nu < 2 {
        return Err(DesignError::InvalidModel(format!("need at least 2 factors, got {nu}")));
    }
    let points = (0..nu)
        .map(|j| (0..nu).map(|i| if i == j { b } else { a }).collect())
        .collect();
    Design::uniform(points)
}

/// Exact D-optimality condition for [`simplex_design`] at β: for every vertex
/// `x ∈ {a, b}^ν`,
/// `Σ_j (x_j − q T(x))² c_j² ≤ (b − a)² (βᵀx)²` with `T(x) = Σ x_i`,
/// `q = a / ((ν − 1) a + b)` and `c_j = (b − a) β_j + a Σ β_i`.
pub fn is_simplex_design_d_optimal(nu: usize, a: f64, b: f64, beta: &ParameterPoint) -> Result<bool> {
    let region = ExperimentalRegion::hypercube(a, b, nu)?;
    let model = GammaModel::first_order(nu)?;
    let local = model.at(beta)?;
    let vertices = region_vertices(&region)?;
    for v in &vertices {
        let eta = local.predictor(v)?;
        if !(eta > 0.0) {
            return Err(DesignError::NonpositivePredictor {
                point: v.clone(),
                value: eta,
            });
        }
    }
    let bv = beta.as_slice();
    let sum_beta: f64 = bv.iter().sum();
    let q = a / ((nu as f64 - 1.0) * a + b);
    let c: Vec<f64> = bv.iter().map(|bj| (b - a) * bj + a * sum_beta).collect();
    Ok(vertices.iter().all(|x| {
        let t: f64 = x.iter().sum();
        let lhs: f64 = x
            .iter()
            .zip(&c)
            .map(|(xj, cj)| (xj - q * t).powi(2) * cj * cj)
            .sum();
        let eta: f64 = x.iter().zip(bv).map(|(xj, bj)| xj * bj).sum();
        let rhs = (b - a).powi(2) * eta * eta;
        lhs <= rhs * (1.0 + 1e-10)
    }))
}

/// `(ν − 1)(ν − 2) / 2`: with all β_j equal, the simplex design is
/// D-optimal iff `(b / a)²` reaches this value.
pub fn equal_beta_threshold(nu: usize) -> f64 {
    let n = nu as f64;
    (n - 1.0) * (n - 2.0) / 2.0
}

// ---------------------------------------------------------------------------
// Three factors on [1, 2]³ with β2 = β3
// ---------------------------------------------------------------------------

/// Vertex `v_k` (1-based) of `[1, 2]³` in the conventional numbering
/// v1 = (1,1,1), v2 = (2,1,1), v3 = (1,2,1), v4 = (1,1,2),
/// v5 = (1,2,2), v6 = (2,1,2), v7 = (2,2,1), v8 = (2,2,2).
pub fn cube_vertex(k: usize) -> Vec<f64> {
    const V: [[f64; 3]; 8] = [
        [1.0, 1.0, 1.0],
        [2.0, 1.0, 1.0],
        [1.0, 2.0, 1.0],
        [1.0, 1.0, 2.0],
        [1.0, 2.0, 2.0],
        [2.0, 1.0, 2.0],
        [2.0, 2.0, 1.0],
        [2.0, 2.0, 2.0],
    ];
    assert!((1..=8).contains(&k), "cube vertices are numbered 1..=8");
    V[k - 1].to_vec()
}

/// All eight vertices of `[1, 2]³` in conventional order.
pub fn cube_vertices() -> Vec<Vec<f64>> {
    (1..=8).map(cube_vertex).collect()
}

/// Conventional name (`"v5"`, …) of a `[1, 2]³` vertex.
pub fn cube_vertex_name(x: &[f64]) -> Option<String> {
    (1..=8)
        .find(|&k| crate::model::same_point(&cube_vertex(k), x))
        .map(|k| format!("v{k}"))
}

fn cube_design(vertices: &[usize], weights: Vec<f64>) -> Result<Design> {
    Design::normalized(vertices.iter().map(|&k| cube_vertex(k)).collect(), weights)
}

/// Equal weights on the listed `[1, 2]³` vertices.
pub fn cube_design_uniform(vertices: &[usize]) -> Design {
    let m = vertices.len();
    cube_design(vertices, vec![1.0 / m as f64; m]).expect("distinct vertices")
}

pub fn xi1_design() -> Design {
    cube_design(&[2, 3, 4], vec![1.0 / 3.0; 3]).expect("static design")
}

pub fn xi2_design() -> Design {
    cube_design(&[3, 4, 5], vec![1.0 / 3.0; 3]).expect("static design")
}

pub fn xi4_design() -> Design {
    cube_design(&[2, 6, 7], vec![1.0 / 3.0; 3]).expect("static design")
}

/// Four-point design on v2, v3, v4, v5 with the γ-dependent weights.
pub fn xi3_design(gamma: f64) -> Result<Design> {
    let w = xi3_weights(gamma)?;
    cube_design(&[2, 3, 4, 5], w.to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Beta1Sign {
    Positive,
    Negative,
    Zero,
}

/// `β = (β1, β, β)` on `[1, 2]³`, indexed by `γ = β / β1` when `β1 ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeFactorScenario {
    beta1: f64,
    beta: f64,
}

impl ThreeFactorScenario {
    /// Admissible iff `β > −β1` (β1 ≤ 0) or `β > −β1/4` (β1 > 0).
    pub fn new(beta1: f64, beta: f64) -> Result<Self> {
        let ok = beta1.is_finite()
            && beta.is_finite()
            && if beta1 <= 0.0 {
                beta > -beta1
            } else {
                beta > -beta1 / 4.0
            };
        if !ok {
            return Err(DesignError::InvalidParameter(format!(
                "inadmissible scenario β1 = {beta1}, β = {beta}: the predictor must be positive on [1,2]^3"
            )));
        }
        Ok(Self { beta1, beta })
    }

    /// Scenario with `|β1| = 1` and the given sign; `gamma` is ignored for a
    /// zero β1 (then β = 1).
    pub fn from_gamma(gamma: f64, sign: Beta1Sign) -> Result<Self> {
        match sign {
            Beta1Sign::Zero => Self::new(0.0, 1.0),
            Beta1Sign::Positive => Self::new(1.0, gamma),
            Beta1Sign::Negative => Self::new(-1.0, -gamma),
        }
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> Option<f64> {
        (self.beta1 != 0.0).then(|| self.beta / self.beta1)
    }

    pub fn parameter(&self) -> ParameterPoint {
        ParameterPoint::new(vec![self.beta1, self.beta, self.beta])
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda * self.beta1, lambda * self.beta)
    }
}

/// Weights of the four-point design on v2, v3, v4, v5, valid for
/// `γ ∈ (−5/23, 1/5)`.
pub fn xi3_weights(gamma: f64) -> Result<[f64; 4]> {
    if !(gamma > -5.0 / 23.0 && gamma < 0.2) {
        return Err(DesignError::OutOfRange {
            what: "gamma",
            value: gamma,
            range: "(-5/23, 1/5)".into(),
        });
    }
    let g = gamma;
    let w1 = (5.0 + 23.0 * g) / (16.0 * (1.0 + 4.0 * g));
    let w2 = 9.0 * (1.0 + 3.0 * g).powi(2) / (32.0 * (1.0 + g) * (1.0 + 4.0 * g));
    let w4 = (1.0 - g - 20.0 * g * g) / (8.0 * (1.0 + g) * (1.0 + 4.0 * g));
    Ok([w1, w2, w2, w4])
}

/// Locally D-optimal design for `β = (β1, β, β)` on `[1, 2]³`.
///
/// Boundaries γ = 1/5 (Xi1), γ = −5/23 (Xi2) and γ = −6/5 (Xi4) are
/// included in the closed-form subregions since the equivalence inequalities
/// hold with equality there.
pub fn classify_three_factor(scenario: &ThreeFactorScenario) -> Classification {
    let Some(gamma) = scenario.gamma() else {
        return Classification::closed(RegionLabel::Xi1, xi1_design(), None);
    };
    let g = Some(gamma);
    if scenario.beta1 > 0.0 {
        if gamma >= 0.2 {
            Classification::closed(RegionLabel::Xi1, xi1_design(), g)
        } else if gamma <= -5.0 / 23.0 {
            Classification::closed(RegionLabel::Xi2, xi2_design(), g)
        } else {
            let design = xi3_design(gamma).expect("gamma inside (-5/23, 1/5)");
            Classification::closed(RegionLabel::Xi3, design, g)
        }
    } else if gamma <= -3.0 {
        Classification::closed(RegionLabel::Xi1, xi1_design(), g)
    } else if gamma >= -1.2 {
        Classification::closed(RegionLabel::Xi4, xi4_design(), g)
    } else {
        Classification::numerical(RegionLabel::Xi5Numerical, g)
    }
}

// ---------------------------------------------------------------------------
// Two factors with interaction on [a, b]²
// ---------------------------------------------------------------------------

/// `v1 = (b,b), v2 = (b,a), v3 = (a,b), v4 = (a,a)`.
pub fn interaction_vertices(a: f64, b: f64) -> [Vec<f64>; 4] {
    [vec![b, b], vec![b, a], vec![a, b], vec![a, a]]
}

fn interaction_design(a: f64, b: f64, which: &[usize], weights: Vec<f64>) -> Result<Design> {
    let v = interaction_vertices(a, b);
    Design::normalized(which.iter().map(|&k| v[k - 1].clone()).collect(), weights)
}

/// Left-hand sides of the four saturated-design conditions; condition `k`
/// holds when its value is `≤ 0`.
pub fn interaction_conditions(a: f64, b: f64, beta: &ParameterPoint) -> Result<[f64; 4]> {
    check_bounds(a, b)?;
    check_len(3, beta.len())?;
    let (b1, b2, b3) = (beta.as_slice()[0], beta.as_slice()[1], beta.as_slice()[2]);
    let (s, t) = (1.0 / a, 1.0 / b);
    let c1 = b3 * b3 + t * t * (b1 * b1 + b2 * b2) + (t * t - s * s + 2.0 * s * t) * b1 * b2
        + 2.0 * t * b3 * (b1 + b2);
    let c2 = b3 * b3 + t * t * b1 * b1 + s * s * b2 * b2 + 2.0 * t * b3 * b1 + 2.0 * s * b3 * b2
        + (t * t + s * s) * b1 * b2;
    let c3 = b3 * b3 + t * t * b2 * b2 + s * s * b1 * b1 + 2.0 * t * b3 * b2 + 2.0 * s * b3 * b1
        + (t * t + s * s) * b1 * b2;
    let c4 = b3 * b3 + s * s * (b1 * b1 + b2 * b2) + (s * s - t * t + 2.0 * s * t) * b1 * b2
        + 2.0 * s * b3 * (b1 + b2);
    Ok([c1, c2, c3, c4])
}

/// Support (1-based vertex indices) of the saturated design selected by
/// condition `k` (0-based). Condition k holds exactly when the vertex left
/// out has the smallest intensity relative to the rest; conditions (ii) and
/// (iii) drop `v2 = (b,a)` and `v3 = (a,b)` respectively.
const CONDITION_SUPPORTS: [[usize; 3]; 4] = [[1, 2, 3], [1, 3, 4], [1, 2, 4], [2, 3, 4]];
const CONDITION_LABELS: [RegionLabel; 4] = [
    RegionLabel::CaseI,
    RegionLabel::CaseII,
    RegionLabel::CaseIII,
    RegionLabel::CaseIV,
];

/// The vertex (1-based) a saturated interaction design leaves out.
pub fn excluded_vertex(label: RegionLabel) -> Option<usize> {
    CONDITION_LABELS
        .iter()
        .position(|&l| l == label)
        .map(|k| (1..=4).find(|v| !CONDITION_SUPPORTS[k].contains(v)).expect("three of four"))
}

fn check_interaction_positivity(a: f64, b: f64, beta: &ParameterPoint) -> Result<()> {
    let model = GammaModel::interaction();
    let local = model.at(beta)?;
    for v in interaction_vertices(a, b) {
        let eta = local.predictor(&v)?;
        if !(eta > 0.0) {
            return Err(DesignError::NonpositivePredictor { point: v, value: eta });
        }
    }
    Ok(())
}

/// Locally D-optimal design for `f(x) = (x1, x2, x1 x2)` on `[a, b]²`.
///
/// Falls back to a numerical flag in the four-point case unless β1 = β2 and
/// β3 > 0, where the equal-parameter weights are available.
pub fn d_optimal_interaction(a: f64, b: f64, beta: &ParameterPoint) -> Result<Classification> {
    check_bounds(a, b)?;
    check_len(3, beta.len())?;
    check_interaction_positivity(a, b, beta)?;
    let bv = beta.as_slice();
    let norm2: f64 = bv.iter().map(|v| v * v).sum();
    let slack = 1e-12 * norm2;
    let equal_gamma = (bv[0] == bv[1] && bv[2] > 0.0).then(|| bv[0] / bv[2]);
    let conditions = interaction_conditions(a, b, beta)?;
    if let Some(k) = conditions.iter().position(|&c| c <= slack) {
        let design = interaction_design(a, b, &CONDITION_SUPPORTS[k], vec![1.0 / 3.0; 3])?;
        return Ok(Classification::closed(CONDITION_LABELS[k], design, equal_gamma));
    }
    if let Some(gamma) = equal_gamma {
        let eq = interaction_equal_beta(a, b, gamma)?;
        if eq.label == RegionLabel::CaseVFourPoint {
            return Ok(eq);
        }
    }
    Ok(Classification::numerical(RegionLabel::CaseVFourPoint, equal_gamma))
}

/// Four-point weights (v1, v2, v3, v4) for `β = (γ, γ, 1)` on `[a, b]²`.
pub fn interaction_four_point_weights(a: f64, b: f64, gamma: f64) -> [f64; 4] {
    let g = gamma;
    let w1 = (a * b - (a - 3.0 * b) * g) / (4.0 * b * (a + 2.0 * g));
    let w2 = (a * b + (a + b) * g).powi(2) / (4.0 * a * b * (b + 2.0 * g) * (a + 2.0 * g));
    let w4 = (a * b - (b - 3.0 * a) * g) / (4.0 * a * (b + 2.0 * g));
    [w1, w2, w2, w4]
}

/// Locally D-optimal design for `β1 = β2 = γ β3`, `β3 > 0`, on `[a, b]²`.
///
/// For `b ≤ 3a` every `γ > −ab/(3b − a)` falls in the four-point case.
pub fn interaction_equal_beta(a: f64, b: f64, gamma: f64) -> Result<Classification> {
    check_bounds(a, b)?;
    if !(gamma.is_finite() && gamma > -a / 2.0) {
        return Err(DesignError::OutOfRange {
            what: "gamma",
            value: gamma,
            range: format!("(-a/2, inf) = ({}, inf)", -a / 2.0),
        });
    }
    let lower = -a * b / (3.0 * b - a);
    if gamma <= lower {
        let design = interaction_design(a, b, &[2, 3, 4], vec![1.0 / 3.0; 3])?;
        return Ok(Classification::closed(RegionLabel::CaseIV, design, Some(gamma)));
    }
    if b - 3.0 * a > 0.0 && gamma >= a * b / (b - 3.0 * a) {
        let design = interaction_design(a, b, &[1, 2, 3], vec![1.0 / 3.0; 3])?;
        return Ok(Classification::closed(RegionLabel::CaseI, design, Some(gamma)));
    }
    let w = interaction_four_point_weights(a, b, gamma);
    let design = interaction_design(a, b, &[1, 2, 3, 4], w.to_vec())?;
    Ok(Classification::closed(RegionLabel::CaseVFourPoint, design, Some(gamma)))
}

// ---------------------------------------------------------------------------
// Intensity ranking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedVertex {
    pub point: Vec<f64>,
    pub intensity: f64,
    /// 1-based; vertices with equal intensity share a rank.
    pub rank: usize,
}

/// Hypercube vertices sorted by decreasing intensity.
pub fn intensity_ranking(
    model: &GammaModel,
    beta: &ParameterPoint,
    region: &ExperimentalRegion,
) -> Result<Vec<RankedVertex>> {
    check_len(model.nu(), region.nu())?;
    let local = model.at(beta)?;
    let mut scored = region_vertices(region)?
        .into_iter()
        .map(|v| local.intensity(&v).map(|u| (v, u)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|x, y| y.1.total_cmp(&x.1));
    let mut out: Vec<RankedVertex> = Vec::with_capacity(scored.len());
    let mut rank = 0;
    let mut group_value = f64::NAN;
    for (point, intensity) in scored {
        if rank == 0 || (group_value - intensity).abs() > INTENSITY_TIE_TOL * group_value.abs() {
            rank += 1;
            group_value = intensity;
        }
        out.push(RankedVertex { point, intensity, rank });
    }
    Ok(out)
}
