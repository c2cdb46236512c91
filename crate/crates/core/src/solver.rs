//! Multiplicative algorithm for D-optimal weights on a finite candidate set.

use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::linalg::Matrix;
use crate::model::{Design, GammaModel, LocalModel, ParameterPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub max_iterations: usize,
    /// Stop once `max_i ψ(x_i) − p` drops to this value.
    pub convergence_tol: f64,
    /// Candidates whose final weight falls below this are dropped.
    pub prune_tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            convergence_tol: 1e-8,
            prune_tol: 1e-6,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(DesignError::InvalidParameter("max_iterations must be at least 1".into()));
        }
        for (name, v) in [("convergence_tol", self.convergence_tol), ("prune_tol", self.prune_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DesignError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub iterations: usize,
    /// `log det M` of the iterate before each update, plus the final one.
    pub log_dets: Vec<f64>,
    /// `max ψ(x) − p` over all candidates for the returned design.
    pub final_excess: f64,
    /// `false` when the iteration cap was hit first; the design is then the
    /// last iterate.
    pub converged: bool,
}

/// D-optimal weights for `model` at `beta` over `candidates`.
pub fn multiplicative(
    model: &GammaModel,
    beta: &ParameterPoint,
    candidates: &[Vec<f64>],
    params: &SolverParams,
) -> Result<(Design, SolverTrace)> {
    let local = model.at(beta)?;
    multiplicative_local(&local, candidates, params)
}

struct Candidates {
    u: Vec<f64>,
    f: Vec<Vec<f64>>,
    p: usize,
}

impl Candidates {
    fn information(&self, w: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.p);
        for ((wi, ui), fi) in w.iter().zip(&self.u).zip(&self.f) {
            if *wi > 0.0 {
                m.add_outer(wi * ui, fi);
            }
        }
        m.symmetrize();
        m
    }

    /// `(log det M, ψ_i for every candidate)`.
    fn evaluate(&self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        let m = self.information(w);
        let lu = m.lu();
        let det = lu.det();
        if m.is_singular() {
            return Err(DesignError::SingularInformation);
        }
        let psi = self
            .u
            .iter()
            .zip(&self.f)
            .map(|(ui, fi)| {
                let y = lu.solve(fi);
                ui * y.iter().zip(fi).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        Ok((det.ln(), psi))
    }

    fn max_excess(&self, psi: &[f64], mask: Option<&[bool]>) -> f64 {
        psi.iter()
            .enumerate()
            .filter(|(i, _)| mask.map_or(true, |m| m[*i]))
            .map(|(_, v)| v - self.p as f64)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Runs updates on the candidates selected by `w_i > 0` until the
    /// excess over those candidates is below `tol`.
    fn iterate(&self, w: &mut [f64], tol: f64, max_iter: usize, log_dets: &mut Vec<f64>) -> Result<(usize, bool)> {
        let active: Vec<bool> = w.iter().map(|&wi| wi > 0.0).collect();
        let p = self.p as f64;
        for k in 0..max_iter {
            let (ld, psi) = self.evaluate(w)?;
            log_dets.push(ld);
            if self.max_excess(&psi, Some(&active)) <= tol {
                return Ok((k, true));
            }
            for (wi, si) in w.iter_mut().zip(&psi) {
                *wi *= si / p;
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= total);
        }
        let (ld, _) = self.evaluate(w)?;
        log_dets.push(ld);
        Ok((max_iter, false))
    }
}

/// [`multiplicative`] for any model bound to its parameter.
///
/// Starts from uniform weights and applies `ω_i ← ω_i ψ(x_i) / p`. After
/// convergence, weights below `prune_tol` are dropped and the remaining
/// support is re-balanced with the same update.
pub fn multiplicative_local<M: LocalModel>(
    local: &M,
    candidates: &[Vec<f64>],
    params: &SolverParams,
) -> Result<(Design, SolverTrace)> {
    params.validate()?;
    if candidates.is_empty() {
        return Err(DesignError::EmptyInput("candidate points"));
    }
    let p = local.p();
    let mut u = Vec::with_capacity(candidates.len());
    let mut f = Vec::with_capacity(candidates.len());
    for x in candidates {
        let (ui, fi) = local.weighted_features(x)?;
        u.push(ui);
        f.push(fi);
    }
    let scaled: Vec<Vec<f64>> = u
        .iter()
        .zip(&f)
        .map(|(ui, fi)| fi.iter().map(|v| v * ui.sqrt()).collect())
        .collect();
    if Matrix::rank_of_rows(&scaled, 1e-10) < p {
        return Err(DesignError::RankDeficientCandidates);
    }
    let cands = Candidates { u, f, p };

    let n = candidates.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut log_dets = Vec::new();
    let (iterations, converged) = cands.iterate(&mut w, params.convergence_tol, params.max_iterations, &mut log_dets)?;

    let mut pruned = w.clone();
    let mut dropped = false;
    for wi in pruned.iter_mut() {
        if *wi < params.prune_tol {
            *wi = 0.0;
            dropped = true;
        }
    }
    if dropped {
        let total: f64 = pruned.iter().sum();
        pruned.iter_mut().for_each(|wi| *wi /= total);
        let support_ok = cands.information(&pruned);
        if support_ok.is_singular() {
            pruned = w;
        } else {
            let mut polish = Vec::new();
            cands.iterate(&mut pruned, params.convergence_tol, params.max_iterations, &mut polish)?;
        }
    }
    let (_, psi) = cands.evaluate(&pruned)?;
    let final_excess = cands.max_excess(&psi, None);

    let (points, weights): (Vec<Vec<f64>>, Vec<f64>) = candidates
        .iter()
        .zip(&pruned)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(x, &wi)| (x.clone(), wi))
        .unzip();
    let design = Design::normalized(points, weights)?;
    Ok((
        design,
        SolverTrace {
            iterations,
            log_dets,
            final_excess,
            converged,
        },
    ))
}
