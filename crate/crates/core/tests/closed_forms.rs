mod common;

use approx::assert_relative_eq;
use common::{brute_force_d_optimal, det_of, Kind};
use gammadesign::analytic::{
    a_optimal_two_factor, classify_three_factor, cube_vertex, d_optimal_interaction, d_optimal_two_factor,
    interaction_equal_beta, interaction_vertices, xi3_weights, Beta1Sign, RegionLabel, ThreeFactorScenario,
};
use gammadesign::equivalence::{region_vertices, verify_optimality};
use gammadesign::model::{validate_positivity, ExperimentalRegion};
use gammadesign::{Criterion, Design, GammaModel, ParameterPoint};

fn cube() -> Vec<Vec<f64>> {
    (1..=8).map(cube_vertex).collect()
}

#[test]
fn three_factor_designs_pass_verification_across_subregions() {
    let model = GammaModel::first_order(3).unwrap();
    let mut rng = common::rng(5);
    for (sign, lo, hi) in [(Beta1Sign::Positive, -0.2499, 10.0), (Beta1Sign::Negative, -20.0, -1.0001)] {
        for _ in 0..200 {
            let gamma = common::uniform(&mut rng, lo, hi);
            let s = ThreeFactorScenario::from_gamma(gamma, sign).unwrap();
            let c = classify_three_factor(&s);
            let Some(design) = c.design else {
                assert_eq!(c.label, RegionLabel::Xi5Numerical);
                assert!(gamma > -3.0 && gamma < -1.2);
                continue;
            };
            let r = verify_optimality(&model, &s.parameter(), &design, Criterion::D, &cube(), 1e-9).unwrap();
            assert!(r.pass, "γ={gamma}: {} fails with excess {:e}", c.label, r.worst_excess);
            assert!(r.support_gap < 1e-9, "γ={gamma}: support gap {:e}", r.support_gap);
        }
    }
}

#[test]
fn boundaries_are_optimal_for_the_including_design() {
    let model = GammaModel::first_order(3).unwrap();
    for (gamma, sign, label) in [
        (0.2, Beta1Sign::Positive, RegionLabel::Xi1),
        (-5.0 / 23.0, Beta1Sign::Positive, RegionLabel::Xi2),
        (-1.2, Beta1Sign::Negative, RegionLabel::Xi4),
        (-3.0, Beta1Sign::Negative, RegionLabel::Xi1),
    ] {
        let s = ThreeFactorScenario::from_gamma(gamma, sign).unwrap();
        let c = classify_three_factor(&s);
        assert_eq!(c.label, label);
        let r = verify_optimality(&model, &s.parameter(), &c.design.unwrap(), Criterion::D, &cube(), 1e-9).unwrap();
        assert!(r.pass, "γ={gamma}");
    }
}

#[test]
fn xi3_weights_meet_neighbouring_designs_at_the_boundaries() {
    // as γ → 1/5 the v5 weight vanishes; as γ → −5/23 the v2 weight does
    let w = xi3_weights(0.2 - 1e-9).unwrap();
    assert!(w[3] < 1e-7);
    for wi in &w[..3] {
        assert_relative_eq!(*wi, 1.0 / 3.0, epsilon = 1e-7);
    }
    let w = xi3_weights(-5.0 / 23.0 + 1e-9).unwrap();
    assert!(w[0] < 1e-7);
    for wi in &w[1..] {
        assert_relative_eq!(*wi, 1.0 / 3.0, epsilon = 1e-7);
    }
}

#[test]
fn xi3_weights_agree_with_oracle() {
    let mut rng = common::rng(9);
    for _ in 0..10 {
        let gamma = common::uniform(&mut rng, -5.0 / 23.0 + 1e-3, 0.2 - 1e-3);
        let beta = [1.0, gamma, gamma];
        let (w, _) = brute_force_d_optimal(Kind::FirstOrder, &beta, &cube());
        let expected = xi3_weights(gamma).unwrap();
        for (k, e) in [2usize, 3, 4, 5].into_iter().zip(expected) {
            assert!((w[k - 1] - e).abs() < 1e-4, "γ={gamma}: v{k} oracle {} vs {e}", w[k - 1]);
        }
    }
}

#[test]
fn two_factor_square_designs() {
    let model = GammaModel::first_order(2).unwrap();
    let mut rng = common::rng(13);
    let mut checked = 0;
    while checked < 100 {
        let a = common::uniform(&mut rng, 0.1, 3.0);
        let b = a * common::uniform(&mut rng, 1.05, 5.0);
        let beta = ParameterPoint::new(vec![common::uniform(&mut rng, -2.0, 5.0), common::uniform(&mut rng, -2.0, 5.0)]);
        let region = ExperimentalRegion::hypercube(a, b, 2).unwrap();
        if !validate_positivity(&model, &beta, &region) {
            continue;
        }
        checked += 1;
        let vertices = region_vertices(&region).unwrap();
        let d = d_optimal_two_factor(a, b).unwrap();
        let r = verify_optimality(&model, &beta, &d, Criterion::D, &vertices, 1e-9).unwrap();
        assert!(r.pass, "a={a}, b={b}, β={beta:?}: {r:?}");
        let a_opt = a_optimal_two_factor(a, b, &beta).unwrap();
        let r = verify_optimality(&model, &beta, &a_opt, Criterion::A, &vertices, 1e-9).unwrap();
        assert!(r.pass, "a={a}, b={b}, β={beta:?}: excess {:e}", r.worst_excess);
    }
}

#[test]
fn interaction_saturated_cases_pass_verification() {
    let model = GammaModel::interaction();
    let mut rng = common::rng(17);
    let mut seen = std::collections::HashSet::new();
    let mut checked = 0;
    while checked < 400 {
        let a = common::uniform(&mut rng, 0.2, 2.0);
        let b = a * common::uniform(&mut rng, 1.1, 8.0);
        let beta = ParameterPoint::new((0..3).map(|_| common::uniform(&mut rng, -3.0, 3.0)).collect());
        let region = ExperimentalRegion::hypercube(a, b, 2).unwrap();
        if !validate_positivity(&model, &beta, &region) {
            continue;
        }
        checked += 1;
        let c = d_optimal_interaction(a, b, &beta).unwrap();
        seen.insert(c.label);
        let vertices = region_vertices(&region).unwrap();
        match c.design {
            Some(d) => {
                let r = verify_optimality(&model, &beta, &d, Criterion::D, &vertices, 1e-9).unwrap();
                assert!(r.pass, "{} at a={a}, b={b}, β={beta:?}: excess {:e}", c.label, r.worst_excess);
            }
            None => {
                // no saturated design is optimal: every three-vertex design fails
                let v = interaction_vertices(a, b);
                for skip in 0..4 {
                    let pts: Vec<Vec<f64>> = (0..4).filter(|&k| k != skip).map(|k| v[k].clone()).collect();
                    let d = Design::uniform(pts).unwrap();
                    assert!(!verify_optimality(&model, &beta, &d, Criterion::D, &vertices, 1e-9).unwrap().pass);
                }
            }
        }
    }
    for label in [RegionLabel::CaseI, RegionLabel::CaseII, RegionLabel::CaseIII, RegionLabel::CaseIV] {
        assert!(seen.contains(&label), "{label} never drawn");
    }
}

#[test]
fn equal_parameter_interaction_weights_match_oracle() {
    let mut rng = common::rng(23);
    // b > 3a, b = 3a and b < 3a
    for (a, b) in [(1.0, 4.0), (1.0, 3.0), (1.0, 2.0), (2.0, 3.0), (0.5, 4.0)] {
        let lower = -a / 2.0;
        for _ in 0..8 {
            let gamma = common::uniform(&mut rng, lower + 1e-3, 6.0);
            let beta = [gamma, gamma, 1.0];
            let c = interaction_equal_beta(a, b, gamma).unwrap();
            let design = c.design.unwrap();
            let (_, oracle) = brute_force_d_optimal(Kind::Interaction, &beta, &common::square_vertices(a, b));
            let gap = (det_of(Kind::Interaction, &beta, &design) - oracle).abs() / oracle;
            assert!(gap < 1e-6, "a={a}, b={b}, γ={gamma} ({}): det gap {gap:e}", c.label);
        }
    }
}

#[test]
fn equal_parameter_interaction_agrees_with_general_classifier() {
    for (a, b) in [(1.0, 4.0), (1.0, 2.0)] {
        for gamma in [-0.45, -4.0 / 11.0, -0.2, 0.0, 1.0, 3.9, 4.0, 5.0] {
            if gamma <= -a / 2.0 {
                continue;
            }
            let eq = interaction_equal_beta(a, b, gamma).unwrap();
            let general = d_optimal_interaction(a, b, &ParameterPoint::new(vec![gamma, gamma, 1.0])).unwrap();
            assert_eq!(eq.label, general.label, "a={a}, b={b}, γ={gamma}");
            assert_eq!(eq.design, general.design);
        }
    }
}
