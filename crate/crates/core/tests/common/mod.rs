//! Reference computations written independently of the library: feature
//! maps and intensities from first principles, determinants via nalgebra,
//! and D-optimal weights by projected gradient ascent on the simplex.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    FirstOrder,
    Interaction,
}

pub fn regressors(kind: Kind, x: &[f64]) -> Vec<f64> {
    match kind {
        Kind::FirstOrder => x.to_vec(),
        Kind::Interaction => vec![x[0], x[1], x[0] * x[1]],
    }
}

pub fn weight_fn(kind: Kind, beta: &[f64], x: &[f64]) -> f64 {
    let eta: f64 = regressors(kind, x).iter().zip(beta).map(|(a, b)| a * b).sum();
    assert!(eta > 0.0, "oracle called at a point with nonpositive predictor");
    1.0 / (eta * eta)
}

pub fn info(kind: Kind, beta: &[f64], points: &[Vec<f64>], w: &[f64]) -> DMatrix<f64> {
    let p = beta.len();
    let mut m = DMatrix::zeros(p, p);
    for (x, &wi) in points.iter().zip(w) {
        let f = DVector::from_vec(regressors(kind, x));
        m += (f.clone() * f.transpose()) * (wi * weight_fn(kind, beta, x));
    }
    m
}

pub fn det(kind: Kind, beta: &[f64], points: &[Vec<f64>], w: &[f64]) -> f64 {
    info(kind, beta, points, w).determinant()
}

fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j as f64 + 1.0);
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Weights maximizing `log det M` over the simplex on `points`, by projected
/// gradient ascent with backtracking. Returns `(weights, det)`.
pub fn brute_force_d_optimal(kind: Kind, beta: &[f64], points: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let n = points.len();
    let objective = |w: &[f64]| {
        let d = det(kind, beta, points, w);
        if d > 0.0 {
            d.ln()
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut w = vec![1.0 / n as f64; n];
    let mut value = objective(&w);
    let mut step = 0.1;
    for _ in 0..200_000 {
        let m = info(kind, beta, points, &w);
        let inv = m.try_inverse().expect("nonsingular iterate");
        let grad: Vec<f64> = points
            .iter()
            .map(|x| {
                let f = DVector::from_vec(regressors(kind, x));
                weight_fn(kind, beta, x) * (f.transpose() * &inv * &f)[(0, 0)]
            })
            .collect();
        let scale = grad.iter().cloned().fold(0.0, f64::max);
        loop {
            let trial: Vec<f64> = w.iter().zip(&grad).map(|(wi, gi)| wi + step * gi / scale).collect();
            let trial = project_to_simplex(&trial);
            let tv = objective(&trial);
            if tv > value {
                let gain = tv - value;
                w = trial;
                value = tv;
                step = (step * 1.5).min(1.0);
                if gain < 1e-15 {
                    return (w, value.exp());
                }
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                return (w, value.exp());
            }
        }
    }
    (w, value.exp())
}

pub fn cube_vertices_123() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 1.0, 1.0],
        vec![2.0, 1.0, 1.0],
        vec![1.0, 2.0, 1.0],
        vec![1.0, 1.0, 2.0],
        vec![1.0, 2.0, 2.0],
        vec![2.0, 1.0, 2.0],
        vec![2.0, 2.0, 1.0],
        vec![2.0, 2.0, 2.0],
    ]
}

pub fn square_vertices(a: f64, b: f64) -> Vec<Vec<f64>> {
    vec![vec![b, b], vec![b, a], vec![a, b], vec![a, a]]
}

/// Determinant of the library design's information matrix, recomputed here.
pub fn det_of(kind: Kind, beta: &[f64], design: &gammadesign::Design) -> f64 {
    det(kind, beta, design.points(), design.weights())
}
