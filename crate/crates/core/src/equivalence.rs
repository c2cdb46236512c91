//! Sensitivity functions and equivalence-theorem checks for the D- and
//! A-criteria.
//!
//! A design ξ with nonsingular `M = M(ξ, β)` is locally
//!
//! * D-optimal iff `u(x) f(x)ᵀ M⁻¹ f(x) ≤ p` for every `x` in the region,
//! * A-optimal iff `u(x) f(x)ᵀ M⁻² f(x) ≤ tr(M⁻¹)` for every `x`,
//!
//! with equality at the support points. Verification evaluates the left-hand
//! side over a finite candidate set; on a hypercube the vertices form an
//! essentially complete class, so they are the default candidates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::linalg::Matrix;
use crate::model::{Design, ExperimentalRegion, GammaModel, LocalModel, ParameterPoint};

/// Default tolerance on the sensitivity excess.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Criterion {
    D,
    A,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::D => write!(f, "D"),
            Criterion::A => write!(f, "A"),
        }
    }
}

impl FromStr for Criterion {
    type Err = DesignError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" | "d" => Ok(Criterion::D),
            "A" | "a" => Ok(Criterion::A),
            other => Err(DesignError::InvalidParameter(format!("unknown criterion `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityValue {
    pub point: Vec<f64>,
    pub sensitivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub criterion: Criterion,
    /// `p` for D, `tr(M⁻¹)` for A.
    pub bound: f64,
    pub worst_point: Vec<f64>,
    /// `max ψ(x) − bound` over the candidates.
    pub worst_excess: f64,
    pub pass: bool,
    pub values: Vec<SensitivityValue>,
    /// Largest `|ψ(x_i) − bound|` over the design's own support points.
    pub support_gap: f64,
}

impl VerificationReport {
    /// Index of the worst candidate (first one on ties).
    pub fn worst_index(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
                if v.sensitivity > best.1 {
                    (i, v.sensitivity)
                } else {
                    best
                }
            })
            .0
    }
}

/// All `2^ν` vertices of a hypercube, coordinates in `{a, b}`, lexicographic
/// with the first coordinate varying slowest and `a` before `b`.
pub fn region_vertices(region: &ExperimentalRegion) -> Result<Vec<Vec<f64>>> {
    match *region {
        ExperimentalRegion::PositiveOrthant { .. } => Err(DesignError::RegionHasNoVertices),
        ExperimentalRegion::Hypercube { a, b, nu } => Ok((0..1usize << nu)
            .map(|mask| {
                (0..nu)
                    .map(|j| if mask >> (nu - 1 - j) & 1 == 1 { b } else { a })
                    .collect()
            })
            .collect()),
    }
}

/// The points `a_i e_i` on the coordinate axes of the orthant.
pub fn axis_candidates(scale: &[f64]) -> Result<Vec<Vec<f64>>> {
    if scale.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(DesignError::InvalidParameter("axis scales must be positive".into()));
    }
    let nu = scale.len();
    Ok((0..nu)
        .map(|i| {
            let mut x = vec![0.0; nu];
            x[i] = scale[i];
            x
        })
        .collect())
}

/// Unit vectors `e_1 … e_ν`.
pub fn unit_vectors(nu: usize) -> Vec<Vec<f64>> {
    axis_candidates(&vec![1.0; nu]).expect("unit scales are positive")
}

/// Sensitivity function ψ of a fixed design, with the inverse information
/// matrix factored once.
pub struct SensitivityFunction<'m, M: LocalModel> {
    local: &'m M,
    criterion: Criterion,
    kernel: Matrix,
    bound: f64,
}

impl<'m, M: LocalModel> SensitivityFunction<'m, M> {
    pub fn new(local: &'m M, design: &Design, criterion: Criterion) -> Result<Self> {
        let info = local.information_matrix(design)?;
        let inv = info.inverse()?;
        let (kernel, bound) = match criterion {
            Criterion::D => (inv, local.p() as f64),
            Criterion::A => {
                let tr = inv.trace();
                let mut sq = inv.matmul(&inv);
                sq.symmetrize();
                (sq, tr)
            }
        };
        Ok(Self {
            local,
            criterion,
            kernel,
            bound,
        })
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let (u, f) = self.local.weighted_features(x)?;
        Ok(u * self.kernel.quad_form(&f))
    }
}

/// ψ(x) for the given criterion: `u fᵀM⁻¹f` (D) or `u fᵀM⁻²f` (A).
pub fn sensitivity(
    model: &GammaModel,
    beta: &ParameterPoint,
    design: &Design,
    x: &[f64],
    criterion: Criterion,
) -> Result<f64> {
    let local = model.at(beta)?;
    SensitivityFunction::new(&local, design, criterion)?.eval(x)
}

/// Checks the equivalence-theorem inequality at every candidate.
///
/// For D the excess is compared with `tol` directly; for A, whose bound
/// `tr M⁻¹` scales with `‖β‖²`, it is compared with `tol · tr M⁻¹`.
pub fn verify_optimality(
    model: &GammaModel,
    beta: &ParameterPoint,
    design: &Design,
    criterion: Criterion,
    candidates: &[Vec<f64>],
    tol: f64,
) -> Result<VerificationReport> {
    let local = model.at(beta)?;
    verify_local(&local, design, criterion, candidates, tol)
}

/// [`verify_optimality`] for any model bound to its parameter.
pub fn verify_local<M: LocalModel>(
    local: &M,
    design: &Design,
    criterion: Criterion,
    candidates: &[Vec<f64>],
    tol: f64,
) -> Result<VerificationReport> {
    if candidates.is_empty() {
        return Err(DesignError::EmptyInput("candidate points"));
    }
    let psi = SensitivityFunction::new(local, design, criterion)?;
    let bound = psi.bound();
    let values = candidates
        .iter()
        .map(|x| {
            Ok(SensitivityValue {
                point: x.clone(),
                sensitivity: psi.eval(x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0;
    for (i, v) in values.iter().enumerate() {
        if v.sensitivity > values[worst].sensitivity {
            worst = i;
        }
    }
    let worst_excess = values[worst].sensitivity - bound;
    let allowed = match criterion {
        Criterion::D => tol,
        Criterion::A => tol * bound,
    };
    let mut support_gap: f64 = 0.0;
    for (x, _) in design.iter() {
        support_gap = support_gap.max((psi.eval(x)? - bound).abs());
    }
    Ok(VerificationReport {
        criterion,
        bound,
        worst_point: values[worst].point.clone(),
        worst_excess,
        pass: worst_excess <= allowed,
        values,
        support_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::information_matrix;
    use approx::assert_relative_eq;

    fn fo(nu: usize) -> GammaModel {
        GammaModel::first_order(nu).unwrap()
    }

    #[test]
    fn vertices_in_lexicographic_order() {
        let sq = ExperimentalRegion::hypercube(1.0, 2.0, 2).unwrap();
        assert_eq!(
            region_vertices(&sq).unwrap(),
            vec![vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0], vec![2.0, 2.0]]
        );
        let cube = ExperimentalRegion::hypercube(1.0, 2.0, 3).unwrap();
        let vs = region_vertices(&cube).unwrap();
        assert_eq!(vs.len(), 8);
        assert_eq!(vs[0], vec![1.0, 1.0, 1.0]);
        assert_eq!(vs[7], vec![2.0, 2.0, 2.0]);
        let eps = 1e-9;
        let thin = ExperimentalRegion::hypercube(2.0 - eps, 2.0, 2).unwrap();
        let vs = region_vertices(&thin).unwrap();
        assert_eq!(vs.len(), 4);
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_ne!(vs[i], vs[j]);
            }
        }
        assert_eq!(
            region_vertices(&ExperimentalRegion::orthant(2).unwrap()),
            Err(DesignError::RegionHasNoVertices)
        );
    }

    #[test]
    fn d_sensitivity_equals_p_on_orthant_support() {
        let m = fo(3);
        let b = ParameterPoint::from(vec![1.0, 2.0, 3.0]);
        let d = Design::uniform(unit_vectors(3)).unwrap();
        for e in unit_vectors(3) {
            assert_relative_eq!(sensitivity(&m, &b, &d, &e, Criterion::D).unwrap(), 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn d_sensitivity_is_scale_invariant() {
        let m = fo(3);
        let b = ParameterPoint::from(vec![-1.0, 2.0, 2.0]);
        let d = Design::uniform(vec![vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 2.0]]).unwrap();
        let x = [1.0, 2.0, 2.0];
        let x2 = [2.0, 4.0, 4.0];
        let a = sensitivity(&m, &b, &d, &x, Criterion::D).unwrap();
        let c = sensitivity(&m, &b, &d, &x2, Criterion::D).unwrap();
        assert_relative_eq!(a, c, max_relative = 1e-12);
    }

    #[test]
    fn weighted_average_of_d_sensitivity_is_p() {
        let m = fo(3);
        let b = ParameterPoint::from(vec![0.5, 1.0, 2.0]);
        let d = Design::new(
            vec![vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 2.0], vec![1.0, 2.0, 2.0]],
            vec![0.1, 0.2, 0.3, 0.4],
        )
        .unwrap();
        let avg: f64 = d
            .iter()
            .map(|(x, w)| w * sensitivity(&m, &b, &d, x, Criterion::D).unwrap())
            .sum();
        assert_relative_eq!(avg, 3.0, epsilon = 1e-10);
    }

    #[test]
    fn a_verification_of_beta_proportional_weights() {
        let m = fo(2);
        let b = ParameterPoint::from(vec![1.0, 3.0]);
        let d = Design::new(unit_vectors(2), vec![0.25, 0.75]).unwrap();
        let report = verify_optimality(&m, &b, &d, Criterion::A, &unit_vectors(2), DEFAULT_TOL).unwrap();
        assert!(report.pass);
        assert_relative_eq!(report.bound, 16.0, epsilon = 1e-12);
        assert!(report.support_gap < 1e-9);
    }

    #[test]
    fn singular_design_is_reported() {
        let m = fo(2);
        let b = ParameterPoint::from(vec![1.0, 1.0]);
        let d = Design::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        assert_eq!(
            sensitivity(&m, &b, &d, &[1.0, 1.0], Criterion::D),
            Err(DesignError::SingularInformation)
        );
        let info = information_matrix(&m, &b, &d).unwrap();
        assert!(info.is_singular());
    }

    #[test]
    fn empty_candidates_rejected() {
        let m = fo(2);
        let b = ParameterPoint::from(vec![1.0, 1.0]);
        let d = Design::uniform(unit_vectors(2)).unwrap();
        assert!(verify_optimality(&m, &b, &d, Criterion::D, &[], DEFAULT_TOL).is_err());
    }

    #[test]
    fn worst_point_ties_break_by_first_index() {
        let m = fo(2);
        let b = ParameterPoint::from(vec![1.0, 1.0]);
        let d = Design::uniform(unit_vectors(2)).unwrap();
        let cands = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = verify_optimality(&m, &b, &d, Criterion::D, &cands, DEFAULT_TOL).unwrap();
        assert_eq!(r.worst_point, vec![1.0, 0.0]);
        assert_eq!(r.worst_index(), 0);
    }
}
