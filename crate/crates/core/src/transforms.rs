//! Reparametrizations that carry the no-intercept models to intercept form.
//!
//! For the interaction model on `[a, b]²`, dividing the predictor by
//! `x1 x2` and substituting `1/x_j = z_j (1/a − 1/b) + 1/b` gives
//! `η(x) = x1 x2 (β̃̃0 + β̃̃1 z1 + β̃̃2 z2)` with `z ∈ [0, 1]²`. The feature
//! vector transforms linearly up to the same factor, so sensitivities agree
//! pointwise and a design is D-optimal on the square iff its image is
//! D-optimal for the intercept model on the unit square.

use serde::{Deserialize, Serialize};

use crate::analytic::RegionLabel;
use crate::error::{DesignError, Result};
use crate::model::{check_bounds, check_len, Design, LocalModel, ParameterPoint};

fn check_in_square(x: &[f64], a: f64, b: f64) -> Result<()> {
    check_len(2, x.len())?;
    if x.iter().any(|&v| !(v >= a && v <= b)) {
        return Err(DesignError::InvalidParameter(format!(
            "point {x:?} is outside [{a}, {b}]^2"
        )));
    }
    Ok(())
}

/// `z_j = (1/x_j − 1/b) / (1/a − 1/b)`, mapping `[a, b]²` onto `[0, 1]²`
/// with `(b, b) ↦ (0, 0)` and `(a, a) ↦ (1, 1)`.
pub fn map_point_interaction(x: &[f64], a: f64, b: f64) -> Result<[f64; 2]> {
    check_bounds(a, b)?;
    check_in_square(x, a, b)?;
    let (s, t) = (1.0 / a, 1.0 / b);
    Ok([(1.0 / x[0] - t) / (s - t), (1.0 / x[1] - t) / (s - t)])
}

/// Inverse of [`map_point_interaction`].
pub fn unmap_point_interaction(z: &[f64], a: f64, b: f64) -> Result<[f64; 2]> {
    check_bounds(a, b)?;
    check_len(2, z.len())?;
    if z.iter().any(|&v| !(-1e-12..=1.0 + 1e-12).contains(&v)) {
        return Err(DesignError::InvalidParameter(format!("point {z:?} is outside [0, 1]^2")));
    }
    let (s, t) = (1.0 / a, 1.0 / b);
    Ok([1.0 / (z[0] * (s - t) + t), 1.0 / (z[1] * (s - t) + t)])
}

/// Intercept-form model `(β̃̃0 + β̃̃1 z1 + β̃̃2 z2)⁻²` with `f(z) = (1, z1, z2)`
/// on the unit square, together with the source square `[a, b]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterceptTransform {
    pub a: f64,
    pub b: f64,
    pub beta: [f64; 3],
}

/// Unit-square corners in the order of the intensities `c1 … c4`.
pub const UNIT_CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];

impl InterceptTransform {
    pub fn predictor(&self, z: &[f64]) -> f64 {
        self.beta[0] + self.beta[1] * z[0] + self.beta[2] * z[1]
    }

    /// Intensities `c1 … c4` at `(0,0), (1,0), (0,1), (1,1)`.
    pub fn corner_intensities(&self) -> Result<[f64; 4]> {
        let mut c = [0.0; 4];
        for (ck, z) in c.iter_mut().zip(&UNIT_CORNERS) {
            *ck = self.intensity(z)?;
        }
        Ok(c)
    }

    /// Index (0-based into [`UNIT_CORNERS`]) of the corner left out of the
    /// saturated optimal design, if one is: the corner with the smallest
    /// intensity `c_k`, provided `c_k⁻¹` is at least the sum of the other
    /// three inverses.
    pub fn excluded_corner(&self) -> Result<Option<usize>> {
        let c = self.corner_intensities()?;
        let inv = c.map(|v| 1.0 / v);
        let k = (0..4)
            .reduce(|best, i| if inv[i] > inv[best] { i } else { best })
            .expect("four corners");
        let others: f64 = (0..4).filter(|&i| i != k).map(|i| inv[i]).sum();
        Ok((inv[k] >= others * (1.0 - 1e-12)).then_some(k))
    }

    /// Design label implied by [`Self::excluded_corner`] in terms of the
    /// source square's vertex numbering.
    pub fn threshold_label(&self) -> Result<RegionLabel> {
        Ok(match self.excluded_corner()? {
            Some(0) => RegionLabel::CaseIV,
            Some(1) => RegionLabel::CaseIII,
            Some(2) => RegionLabel::CaseII,
            Some(_) => RegionLabel::CaseI,
            None => RegionLabel::CaseVFourPoint,
        })
    }

    pub fn map_point(&self, x: &[f64]) -> Result<[f64; 2]> {
        map_point_interaction(x, self.a, self.b)
    }

    pub fn unmap_point(&self, z: &[f64]) -> Result<[f64; 2]> {
        unmap_point_interaction(z, self.a, self.b)
    }

    /// Image of a design on `[a, b]²`; weights are unchanged.
    pub fn map_design(&self, design: &Design) -> Result<Design> {
        design.map_points(|x| self.map_point(x).map(|z| z.to_vec()))
    }

    pub fn unmap_design(&self, design: &Design) -> Result<Design> {
        design.map_points(|z| self.unmap_point(z).map(|x| x.to_vec()))
    }
}

impl LocalModel for InterceptTransform {
    fn dim(&self) -> usize {
        2
    }

    fn p(&self) -> usize {
        3
    }

    fn features(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(2, z.len())?;
        Ok(vec![1.0, z[0], z[1]])
    }

    fn intensity(&self, z: &[f64]) -> Result<f64> {
        check_len(2, z.len())?;
        let eta = self.predictor(z);
        if !(eta > 0.0) {
            return Err(DesignError::NonpositivePredictor {
                point: z.to_vec(),
                value: eta,
            });
        }
        Ok(eta.powi(-2))
    }
}

/// `β̃̃0 = β3 + (β1 + β2)/b`, `β̃̃1 = β2 (1/a − 1/b)`, `β̃̃2 = β1 (1/a − 1/b)`.
pub fn interaction_to_intercept(a: f64, b: f64, beta: &ParameterPoint) -> Result<InterceptTransform> {
    check_bounds(a, b)?;
    check_len(3, beta.len())?;
    let (b1, b2, b3) = (beta.as_slice()[0], beta.as_slice()[1], beta.as_slice()[2]);
    let d = 1.0 / a - 1.0 / b;
    Ok(InterceptTransform {
        a,
        b,
        beta: [b3 + (b1 + b2) / b, b2 * d, b1 * d],
    })
}

/// Vertices of the convex hull of `{(x2/x1, x3/x1) : x ∈ [a, b]³}` other
/// than the common image `(1, 1)` of `(a,a,a)` and `(b,b,b)`, which is
/// interior.
pub fn induced_polytope_vertices(a: f64, b: f64) -> Result<Vec<[f64; 2]>> {
    check_bounds(a, b)?;
    let (r, q) = (a / b, b / a);
    Ok(vec![[r, 1.0], [1.0, r], [r, r], [q, 1.0], [1.0, q], [q, q]])
}

/// `t_j = x_{j+1} / x_1`; constant along rays through the origin.
pub fn first_order_ratio_map(x: &[f64]) -> Result<Vec<f64>> {
    match x.first() {
        None => Err(DesignError::EmptyInput("point")),
        Some(&x1) if !(x1 > 0.0) => Err(DesignError::InvalidParameter(format!(
            "first coordinate must be positive, got {x1}"
        ))),
        Some(&x1) => Ok(x[1..].iter().map(|v| v / x1).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{d_optimal_interaction, interaction_vertices};
    use crate::equivalence::{verify_local, verify_optimality, Criterion};
    use crate::model::GammaModel;
    use approx::assert_relative_eq;

    #[test]
    fn point_map_corners() {
        assert_eq!(map_point_interaction(&[4.0, 4.0], 1.0, 4.0).unwrap(), [0.0, 0.0]);
        assert_eq!(map_point_interaction(&[1.0, 1.0], 1.0, 4.0).unwrap(), [1.0, 1.0]);
        assert_eq!(map_point_interaction(&[2.0, 1.0], 1.0, 2.0).unwrap(), [0.0, 1.0]);
        assert!(map_point_interaction(&[0.5, 1.0], 1.0, 2.0).is_err());
        assert!(map_point_interaction(&[1.0, 1.0], 1.0, 1.0).is_err());
        let z = map_point_interaction(&[1.7, 3.2], 1.0, 4.0).unwrap();
        let x = unmap_point_interaction(&z, 1.0, 4.0).unwrap();
        assert_relative_eq!(x[0], 1.7, epsilon = 1e-12);
        assert_relative_eq!(x[1], 3.2, epsilon = 1e-12);
    }

    #[test]
    fn transformed_parameters_and_corners() {
        let beta = ParameterPoint::from(vec![0.5, 0.5, 1.0]);
        let tr = interaction_to_intercept(1.0, 4.0, &beta).unwrap();
        assert_relative_eq!(tr.beta[0], 1.25);
        assert_relative_eq!(tr.beta[1], 0.375);
        assert_relative_eq!(tr.beta[2], 0.375);
        let c = tr.corner_intensities().unwrap();
        assert_relative_eq!(1.0 / c[3], (1.0 + 2.0 * 0.5_f64).powi(2), epsilon = 1e-12);
        assert!(interaction_to_intercept(1.0, 1.0, &beta).is_err());
    }

    #[test]
    fn sensitivities_agree_across_the_map() {
        let (a, b) = (1.0, 3.0);
        let beta = ParameterPoint::from(vec![1.0, 2.0, 0.5]);
        let model = GammaModel::interaction();
        let tr = interaction_to_intercept(a, b, &beta).unwrap();
        let design = Design::uniform(interaction_vertices(a, b).to_vec()).unwrap();
        let zdesign = tr.map_design(&design).unwrap();
        let xs = vec![vec![1.5, 2.5], vec![3.0, 1.0], vec![1.0, 1.0]];
        let zs: Vec<Vec<f64>> = xs.iter().map(|x| tr.map_point(x).unwrap().to_vec()).collect();
        let rx = verify_optimality(&model, &beta, &design, Criterion::D, &xs, 1e-9).unwrap();
        let rz = verify_local(&tr, &zdesign, Criterion::D, &zs, 1e-9).unwrap();
        for (vx, vz) in rx.values.iter().zip(&rz.values) {
            assert_relative_eq!(vx.sensitivity, vz.sensitivity, max_relative = 1e-10);
        }
    }

    #[test]
    fn threshold_rule_matches_classifier() {
        for beta in [vec![5.0, 5.0, 1.0], vec![-0.4, -0.4, 1.0], vec![0.0, 0.0, 1.0], vec![3.0, 0.1, 0.2]] {
            let beta = ParameterPoint::from(beta);
            let tr = interaction_to_intercept(1.0, 4.0, &beta).unwrap();
            let c = d_optimal_interaction(1.0, 4.0, &beta).unwrap();
            assert_eq!(tr.threshold_label().unwrap(), c.label, "β = {beta:?}");
        }
    }

    #[test]
    fn polytope() {
        let v = induced_polytope_vertices(1.0, 2.0).unwrap();
        assert_eq!(v, vec![[0.5, 1.0], [1.0, 0.5], [0.5, 0.5], [2.0, 1.0], [1.0, 2.0], [2.0, 2.0]]);
        let v = induced_polytope_vertices(1.0, 3.0).unwrap();
        assert_relative_eq!(v[0][0], 1.0 / 3.0);
        assert_eq!(v[5], [3.0, 3.0]);
        // walk the hull counterclockwise; (1, 1) must lie strictly left of every edge
        let ring = [v[2], v[1], v[3], v[5], v[4], v[0]];
        for k in 0..6 {
            let (p, q) = (ring[k], ring[(k + 1) % 6]);
            let cross = (q[0] - p[0]) * (1.0 - p[1]) - (q[1] - p[1]) * (1.0 - p[0]);
            assert!(cross > 0.0);
        }
        assert!(induced_polytope_vertices(2.0, 2.0).is_err());
    }

    #[test]
    fn ratio_map() {
        assert_eq!(first_order_ratio_map(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(first_order_ratio_map(&[2.0, 2.0, 2.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(first_order_ratio_map(&[1.0, 2.0, 1.0]).unwrap(), vec![2.0, 1.0]);
        assert!(first_order_ratio_map(&[0.0, 1.0]).is_err());
        assert!(first_order_ratio_map(&[]).is_err());
    }
}
