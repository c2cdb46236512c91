//! D-efficiencies and efficiency sweeps over a one-parameter family of
//! parameter points.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytic::{
    classify_three_factor, cube_design_uniform, cube_vertices, interaction_equal_beta, interaction_vertices,
    xi1_design, xi2_design, xi3_design, Beta1Sign, ThreeFactorScenario,
};
use crate::error::{DesignError, Result};
use crate::model::{Design, GammaModel, LocalModel, ParameterPoint};
use crate::solver::{multiplicative, SolverParams};

/// Convergence tolerance for solver-computed reference designs.
pub const REFERENCE_TOL: f64 = 1e-10;

/// `(det M(ξ, β) / det M(ξ*, β))^{1/p}`.
pub fn d_efficiency(model: &GammaModel, beta: &ParameterPoint, design: &Design, optimal: &Design) -> Result<f64> {
    let local = model.at(beta)?;
    let m = local.information_matrix(design)?;
    let m_opt = local.information_matrix(optimal)?;
    if m.is_singular() || m_opt.is_singular() {
        return Err(DesignError::SingularInformation);
    }
    Ok(((m.log_det() - m_opt.log_det()) / model.p() as f64).exp())
}

/// One-parameter family of parameter points indexed by `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SweepFamily {
    /// `β = (β1, γ β1, γ β1)` with `|β1| = 1` on `[1, 2]³`.
    ThreeFactor { sign: Beta1Sign },
    /// `β = (γ, γ, 1)` for the interaction model on `[a, b]²`.
    InteractionEqualBeta { a: f64, b: f64 },
}

impl SweepFamily {
    pub fn model(&self) -> GammaModel {
        match self {
            SweepFamily::ThreeFactor { .. } => GammaModel::first_order(3).expect("three factors"),
            SweepFamily::InteractionEqualBeta { .. } => GammaModel::interaction(),
        }
    }

    pub fn parameter(&self, gamma: f64) -> Result<ParameterPoint> {
        match *self {
            SweepFamily::ThreeFactor { sign } => Ok(ThreeFactorScenario::from_gamma(gamma, sign)?.parameter()),
            SweepFamily::InteractionEqualBeta { a, b } => {
                let beta = ParameterPoint::new(vec![gamma, gamma, 1.0]);
                if !crate::model::validate_positivity(
                    &self.model(),
                    &beta,
                    &crate::model::ExperimentalRegion::hypercube(a, b, 2)?,
                ) {
                    return Err(DesignError::OutOfRange {
                        what: "gamma",
                        value: gamma,
                        range: format!("({}, inf)", -a / 2.0),
                    });
                }
                Ok(beta)
            }
        }
    }

    /// Locally D-optimal design at `γ`: the closed form where available,
    /// otherwise the multiplicative algorithm over the region's vertices.
    pub fn reference_design(&self, gamma: f64) -> Result<Design> {
        let beta = self.parameter(gamma)?;
        let (classification, vertices) = match *self {
            SweepFamily::ThreeFactor { .. } => (
                classify_three_factor(&ThreeFactorScenario::from_gamma(gamma, self.sign())?),
                cube_vertices(),
            ),
            SweepFamily::InteractionEqualBeta { a, b } => {
                (interaction_equal_beta(a, b, gamma)?, interaction_vertices(a, b).to_vec())
            }
        };
        match classification.design {
            Some(d) => Ok(d),
            None => {
                let params = SolverParams {
                    convergence_tol: REFERENCE_TOL,
                    ..SolverParams::default()
                };
                Ok(multiplicative(&self.model(), &beta, &vertices, &params)?.0)
            }
        }
    }

    fn sign(&self) -> Beta1Sign {
        match self {
            SweepFamily::ThreeFactor { sign } => *sign,
            SweepFamily::InteractionEqualBeta { .. } => Beta1Sign::Positive,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SweepFamily::ThreeFactor { sign } => {
                format!("first_order nu=3 on [1,2]^3, beta=(b1, gamma*b1, gamma*b1), b1 {sign:?}").to_lowercase()
            }
            SweepFamily::InteractionEqualBeta { a, b } => {
                format!("interaction on [{a},{b}]^2, beta=(gamma, gamma, 1)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDesign {
    pub name: String,
    pub design: Design,
}

impl NamedDesign {
    pub fn new(name: impl Into<String>, design: Design) -> Self {
        Self {
            name: name.into(),
            design,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub gamma: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencySeries {
    pub scenario: String,
    pub gamma: Vec<f64>,
    pub designs: Vec<String>,
    /// `values[d][g]`: efficiency of design `d` at `gamma[g]`.
    pub values: Vec<Vec<f64>>,
    pub skipped: Vec<SkippedPoint>,
}

impl EfficiencySeries {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.designs
            .iter()
            .position(|d| d == name)
            .map(|k| self.values[k].as_slice())
    }

    /// `(min, max)` of a design's efficiencies over the grid.
    pub fn range(&self, name: &str) -> Option<(f64, f64)> {
        self.series(name).map(|s| {
            s.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
        })
    }

    /// CSV with a `gamma` column followed by one column per design, values
    /// printed with `decimals` digits after the point.
    pub fn write_csv<W: Write>(&self, out: W, decimals: usize) -> Result<()> {
        let io = |e: csv::Error| DesignError::InvalidParameter(format!("writing CSV: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["gamma".to_string()];
        header.extend(self.designs.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (g, gamma) in self.gamma.iter().enumerate() {
            let mut row = vec![format!("{gamma:.prec$}", prec = decimals.max(2))];
            row.extend(self.values.iter().map(|s| format!("{:.decimals$}", s[g])));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| DesignError::InvalidParameter(format!("writing CSV: {e}")))
    }
}

/// Efficiency of each design against the locally optimal reference at every
/// grid point. Inadmissible grid points are recorded in `skipped`.
pub fn efficiency_sweep(family: &SweepFamily, designs: &[NamedDesign], grid: &[f64]) -> Result<EfficiencySeries> {
    if designs.is_empty() {
        return Err(DesignError::EmptyInput("designs"));
    }
    let model = family.model();
    let mut gamma = Vec::with_capacity(grid.len());
    let mut values = vec![Vec::with_capacity(grid.len()); designs.len()];
    let mut skipped = Vec::new();
    for &g in grid {
        let beta = match family.parameter(g) {
            Ok(beta) => beta,
            Err(e) if e.is_validation() => {
                skipped.push(SkippedPoint {
                    gamma: g,
                    reason: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let reference = family.reference_design(g)?;
        gamma.push(g);
        for (series, d) in values.iter_mut().zip(designs) {
            series.push(d_efficiency(&model, &beta, &d.design, &reference)?);
        }
    }
    Ok(EfficiencySeries {
        scenario: family.describe(),
        gamma,
        designs: designs.iter().map(|d| d.name.clone()).collect(),
        values,
        skipped,
    })
}

/// `start, start + step, …` up to and including `end` (to rounding),
/// computed from integer multiples so the points are reproducible.
pub fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as i64;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

fn hundredths(from: i64, to: i64) -> Vec<f64> {
    (from..=to).map(|k| k as f64 / 100.0).collect()
}

/// `−0.24, −0.23, …, 1`.
pub fn example1_grid() -> Vec<f64> {
    hundredths(-24, 100)
}

/// `−0.49, −0.48, …, 5`.
pub fn example2_grid() -> Vec<f64> {
    hundredths(-49, 500)
}

/// Competing designs on `[1, 2]³`.
pub fn example1_designs() -> Vec<NamedDesign> {
    let grid3: Vec<Vec<f64>> = [1.0, 1.5, 2.0]
        .iter()
        .flat_map(|&x| {
            [1.0, 1.5, 2.0]
                .iter()
                .flat_map(move |&y| [1.0, 1.5, 2.0].iter().map(move |&z| vec![x, y, z]))
        })
        .collect();
    vec![
        NamedDesign::new("xi1", xi1_design()),
        NamedDesign::new("xi2", xi2_design()),
        NamedDesign::new("xi3(-1/7)", xi3_design(-1.0 / 7.0).expect("inside range")),
        NamedDesign::new("xi4", Design::uniform(cube_vertices()).expect("static design")),
        NamedDesign::new("xi5", cube_design_uniform(&[1, 5, 6, 7])),
        NamedDesign::new("xi6", cube_design_uniform(&[2, 3, 4, 8])),
        NamedDesign::new("xi7", Design::uniform(grid3).expect("static design")),
    ]
}

/// Competing designs on `[1, 4]²`.
pub fn example2_designs() -> Vec<NamedDesign> {
    let v = interaction_vertices(1.0, 4.0);
    let grid2: Vec<Vec<f64>> = [1.0, 2.5, 4.0]
        .iter()
        .flat_map(|&x| [1.0, 2.5, 4.0].iter().map(move |&y| vec![x, y]))
        .collect();
    let pick = |ks: &[usize]| Design::uniform(ks.iter().map(|&k| v[k - 1].clone()).collect()).expect("static design");
    vec![
        NamedDesign::new("xi1", pick(&[1, 2, 3])),
        NamedDesign::new("xi2", pick(&[2, 3, 4])),
        NamedDesign::new(
            "xi3(0)",
            interaction_equal_beta(1.0, 4.0, 0.0)
                .expect("admissible")
                .design
                .expect("closed form"),
        ),
        NamedDesign::new("xi4", Design::uniform(grid2).expect("static design")),
    ]
}

pub fn example1_family() -> SweepFamily {
    SweepFamily::ThreeFactor {
        sign: Beta1Sign::Positive,
    }
}

pub fn example2_family() -> SweepFamily {
    SweepFamily::InteractionEqualBeta { a: 1.0, b: 4.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn efficiency_of_optimal_is_one() {
        let m = GammaModel::first_order(3).unwrap();
        let beta = ParameterPoint::from(vec![1.0, 1.0, 1.0]);
        assert_relative_eq!(d_efficiency(&m, &beta, &xi1_design(), &xi1_design()).unwrap(), 1.0);
        let e = d_efficiency(&m, &beta, &xi2_design(), &xi1_design()).unwrap();
        assert!(e > 0.0 && e < 1.0);
        let singular = Design::uniform(vec![vec![1.0, 1.0, 1.0]]).unwrap();
        assert_eq!(
            d_efficiency(&m, &beta, &singular, &xi1_design()),
            Err(DesignError::SingularInformation)
        );
    }

    #[test]
    fn grids() {
        let g = example1_grid();
        assert_eq!(g.len(), 125);
        assert_eq!(g[0], -0.24);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(example2_grid().len(), 550);
        assert_eq!(grid(0.0, 1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn own_subregion_efficiency_is_one() {
        let s = efficiency_sweep(&example1_family(), &example1_designs(), &[0.5, -0.23, -1.0 / 7.0]).unwrap();
        assert_relative_eq!(s.series("xi1").unwrap()[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.series("xi2").unwrap()[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.series("xi3(-1/7)").unwrap()[2], 1.0, epsilon = 1e-12);
        for series in &s.values {
            assert!(series.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-9));
        }
    }

    #[test]
    fn numerical_reference_in_sweep() {
        let fam = SweepFamily::ThreeFactor {
            sign: Beta1Sign::Negative,
        };
        let designs = vec![NamedDesign::new("xi4", Design::uniform(cube_vertices()).unwrap())];
        let s = efficiency_sweep(&fam, &designs, &[-2.0, -1.1]).unwrap();
        assert!(s.values[0].iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn inadmissible_points_are_skipped() {
        let s = efficiency_sweep(&example2_family(), &example2_designs(), &[-0.6, 4.5]).unwrap();
        assert_eq!(s.gamma, vec![4.5]);
        assert_eq!(s.skipped.len(), 1);
        assert_relative_eq!(s.series("xi1").unwrap()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn csv_layout() {
        let s = efficiency_sweep(&example2_family(), &example2_designs(), &[0.0]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, 4).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "gamma,xi1,xi2,xi3(0),xi4");
        assert!(lines.next().unwrap().starts_with("0.0000,"));
    }
}
