// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

//! GRAPE optimization of the piecewise-constant field on central spin 0.
//!
//! The objective is `F = <target| rho_S(T) |target>`, with `rho_S(T)` the
//! central-spin state reached from the `+` initial state. Gradients are
//! exact: each slice derivative is taken in that slice's eigenbasis.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{slice_eigens, step, ControlProtocol, DEFAULT_SLICES};
use crate::error::{Error, Result};
use crate::hilbert::{HermitianEigen, PureState, C64};
use crate::spinstar::{SpinStarModel, SpinStarSystem};

/// Eigenvalue gaps below this use the degenerate limit of the divided difference.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepRule {
    /// Plain ascent with a constant step.
    Fixed { step: f64 },
    /// Armijo backtracking: accept `alpha` once
    /// `F(x + alpha g) >= F(x) + armijo * alpha * |g|^2`, else `alpha *= shrink`.
    Backtracking { armijo: f64, shrink: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Backtracking {
            armijo: 1e-4,
            shrink: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizationConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Initial amplitudes are drawn uniformly from `[-init_amplitude, init_amplitude]`.
    pub init_amplitude: f64,
    pub step_rule: StepRule,
    pub seed: u64,
    /// Number of piecewise-constant slices.
    pub slices: usize,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 500,
            grad_tol: 1e-8,
            init_amplitude: 1.0,
            step_rule: StepRule::default(),
            seed: 0,
            slices: DEFAULT_SLICES,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.restarts == 0 {
            return bad("restarts must be >= 1".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        if !(self.grad_tol > 0.0) {
            return bad(format!("grad_tol must be > 0, got {}", self.grad_tol));
        }
        if !(self.init_amplitude >= 0.0 && self.init_amplitude.is_finite()) {
            return bad(format!("init_amplitude must be >= 0, got {}", self.init_amplitude));
        }
        if self.slices == 0 {
            return bad("slices must be >= 1".into());
        }
        match self.step_rule {
            StepRule::Fixed { step } if !(step > 0.0 && step.is_finite()) => {
                bad(format!("fixed step must be > 0, got {step}"))
            }
            StepRule::Backtracking { armijo, shrink }
                if !(armijo > 0.0 && armijo < 1.0 && shrink > 0.0 && shrink < 1.0) =>
            {
                bad(format!("backtracking needs armijo, shrink in (0, 1), got {armijo}, {shrink}"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_fidelity: f64,
    pub best_protocol: ControlProtocol,
    pub iterations_used: usize,
    pub restart_index: usize,
    /// Fidelity before the first step and after every accepted step.
    pub fidelity_history: Vec<f64>,
}

struct Forward {
    eigens: Vec<HermitianEigen>,
    /// `states[k]` is the state entering slice `k`; the last entry is `psi(T)`.
    states: Vec<DVector<C64>>,
    fidelity: f64,
}

/// A fixed model and target; evaluates fidelity and its exact gradient.
#[derive(Debug, Clone)]
pub struct GrapeProblem {
    system: SpinStarSystem,
    target: PureState,
}

impl GrapeProblem {
    pub fn new(model: &SpinStarModel, target: &PureState) -> Result<Self> {
        let system = SpinStarSystem::new(model)?;
        if target.dim() != system.system_dim() {
            return Err(Error::DimensionMismatch {
                expected: system.system_dim(),
                actual: target.dim(),
            });
        }
        Ok(Self {
            system,
            target: target.clone(),
        })
    }

    pub fn system(&self) -> &SpinStarSystem {
        &self.system
    }

    /// Returns `F = |phi|^2` and `P psi`, where `phi_e = sum_s conj(t_s) psi_{s,e}`
    /// and `P = |t><t| (x) I_env`.
    fn project(&self, psi: &DVector<C64>) -> (f64, DVector<C64>) {
        let t = self.target.vector();
        let env = psi.len() / t.len();
        let mut phi = vec![C64::new(0.0, 0.0); env];
        for (s, ts) in t.iter().enumerate() {
            let tc = ts.conj();
            for (e, p) in phi.iter_mut().enumerate() {
                *p += tc * psi[s * env + e];
            }
        }
        let fidelity = phi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let projected = DVector::from_fn(psi.len(), |i, _| t[i / env] * phi[i % env]);
        (fidelity.clamp(0.0, 1.0), projected)
    }

    fn forward(&self, protocol: &ControlProtocol) -> Result<Forward> {
        let eigens = slice_eigens(&self.system.h0, &self.system.hc, protocol)?;
        let dt = protocol.dt();
        let mut states = Vec::with_capacity(eigens.len() + 1);
        let mut psi = self.system.psi_plus.vector().clone();
        for eig in &eigens {
            let next = step(eig, &psi, dt);
            states.push(psi);
            psi = next;
        }
        let (fidelity, _) = self.project(&psi);
        states.push(psi);
        Ok(Forward {
            eigens,
            states,
            fidelity,
        })
    }

    fn gradient(&self, fwd: &Forward, dt: f64) -> Vec<f64> {
        let k_slices = fwd.eigens.len();
        let (_, mut chi) = self.project(&fwd.states[k_slices]);
        let mut grad = vec![0.0; k_slices];
        let hc = self.system.hc.matrix();
        for k in (0..k_slices).rev() {
            let eig = &fwd.eigens[k];
            let v = &eig.vectors;
            let x = v.ad_mul(&fwd.states[k]);
            let y = v.ad_mul(&chi);
            let c: DMatrix<C64> = v.ad_mul(&(hc * v));
            let phases: Vec<C64> = eig.values.iter().map(|&l| C64::from_polar(1.0, -l * dt)).collect();
            let d = eig.dim();
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..d {
                let ya = y[a].conj();
                if ya == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut row = C64::new(0.0, 0.0);
                for b in 0..d {
                    let g = divided_difference(eig.values[a], eig.values[b], dt);
                    row += g * c[(a, b)] * x[b];
                }
                acc += ya * row;
            }
            grad[k] = 2.0 * acc.re;
            // chi <- U_k^H chi
            let back = DVector::from_fn(d, |a, _| phases[a].conj() * y[a]);
            chi = v * back;
        }
        grad
    }

    pub fn fidelity(&self, protocol: &ControlProtocol) -> Result<f64> {
        Ok(self.forward(protocol)?.fidelity)
    }

    pub fn fidelity_and_gradient(&self, protocol: &ControlProtocol) -> Result<(f64, Vec<f64>)> {
        let fwd = self.forward(protocol)?;
        let grad = self.gradient(&fwd, protocol.dt());
        Ok((fwd.fidelity, grad))
    }

    /// Central-spin state at `T` under `protocol`.
    pub fn final_reduced_state(&self, protocol: &ControlProtocol) -> Result<crate::hilbert::DensityMatrix> {
        let fwd = self.forward(protocol)?;
        self.system.reduce(fwd.states.last().expect("non-empty"))
    }

    /// One gradient-ascent run from `initial`.
    pub fn ascend(&self, initial: ControlProtocol, config: &OptimizationConfig) -> Result<AscentRun> {
        let dt = initial.dt();
        let mut protocol = initial;
        let mut fwd = self.forward(&protocol)?;
        let mut history = vec![fwd.fidelity];
        let mut iterations = 0;
        let mut alpha = 1.0;
        while iterations < config.max_iters {
            iterations += 1;
            let grad = self.gradient(&fwd, dt);
            let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
            if gnorm2.sqrt() < config.grad_tol {
                break;
            }
            let shifted = |step: f64| -> Result<ControlProtocol> {
                protocol.with_amplitudes(
                    protocol
                        .amplitudes()
                        .iter()
                        .zip(&grad)
                        .map(|(l, g)| l + step * g)
                        .collect(),
                )
            };
            match config.step_rule {
                StepRule::Fixed { step } => {
                    protocol = shifted(step)?;
                    fwd = self.forward(&protocol)?;
                }
                StepRule::Backtracking { armijo, shrink } => {
                    let mut trial_alpha = alpha * 2.0;
                    let accepted = loop {
                        let trial = shifted(trial_alpha)?;
                        let trial_fwd = self.forward(&trial)?;
                        if trial_fwd.fidelity >= fwd.fidelity + armijo * trial_alpha * gnorm2 {
                            break Some((trial, trial_fwd));
                        }
                        trial_alpha *= shrink;
                        if trial_alpha * gnorm2.sqrt() < 1e-15 {
                            break None;
                        }
                    };
                    match accepted {
                        Some((trial, trial_fwd)) => {
                            alpha = trial_alpha;
                            protocol = trial;
                            fwd = trial_fwd;
                        }
                        // no ascent direction left at machine precision
                        None => break,
                    }
                }
            }
            history.push(fwd.fidelity);
        }
        Ok(AscentRun {
            protocol,
            fidelity: fwd.fidelity,
            iterations,
            history,
        })
    }
}

/// Outcome of a single ascent run.
#[derive(Debug, Clone)]
pub struct AscentRun {
    pub protocol: ControlProtocol,
    pub fidelity: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Divided difference of `x -> exp(-i x dt)` at `(a, b)`:
/// `-i dt exp(-i (a+b) dt/2) sinc((a-b) dt/2)`, which is
/// `-i dt exp(-i a dt)` in the degenerate limit.
fn divided_difference(a: f64, b: f64, dt: f64) -> C64 {
    let delta = a - b;
    if delta.abs() < DEGENERACY_TOL {
        return C64::new(0.0, -dt) * C64::from_polar(1.0, -a * dt);
    }
    let half = 0.5 * delta * dt;
    let sinc = half.sin() / half;
    C64::new(0.0, -dt * sinc) * C64::from_polar(1.0, -0.5 * (a + b) * dt)
}

/// Reduced-state fidelity with `target` after evolving the `+` initial state.
pub fn state_fidelity(protocol: &ControlProtocol, model: &SpinStarModel, target: &PureState) -> Result<f64> {
    GrapeProblem::new(model, target)?.fidelity(protocol)
}

/// Exact `dF/d lambda_k` for every slice.
pub fn fidelity_gradient(protocol: &ControlProtocol, model: &SpinStarModel, target: &PureState) -> Result<Vec<f64>> {
    Ok(GrapeProblem::new(model, target)?.fidelity_and_gradient(protocol)?.1)
}

/// Uniform random initial field for restart `restart`.
pub fn initial_field(config: &OptimizationConfig, total_time: f64, restart: usize) -> Result<ControlProtocol> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    let a = config.init_amplitude;
    let amps = (0..config.slices)
        .map(|_| if a > 0.0 { rng.gen_range(-a..=a) } else { 0.0 })
        .collect();
    ControlProtocol::new(total_time, amps)
}

/// Multi-restart gradient ascent; restarts run in parallel and the best
/// fidelity wins, lowest restart index on ties.
pub fn optimize(
    model: &SpinStarModel,
    target: &PureState,
    total_time: f64,
    config: &OptimizationConfig,
) -> Result<OptimizationResult> {
    config.validate()?;
    let problem = GrapeProblem::new(model, target)?;
    let runs = (0..config.restarts)
        .into_par_iter()
        .map(|r| problem.ascend(initial_field(config, total_time, r)?, config))
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.fidelity > runs[best].fidelity {
            best = i;
        }
    }
    let run = runs.into_iter().nth(best).expect("at least one restart");
    Ok(OptimizationResult {
        best_fidelity: run.fidelity,
        best_protocol: run.protocol,
        iterations_used: run.iterations,
        restart_index: best,
        fidelity_history: run.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinstar::{target_state, TargetKind};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn divided_difference_limits() {
        let dt = 0.05;
        let exact = C64::new(0.0, -dt) * C64::from_polar(1.0, -0.3 * dt);
        assert!((divided_difference(0.3, 0.3, dt) - exact).norm() < 1e-16);
        // continuous across the degeneracy threshold
        let near = divided_difference(0.3 + 2e-10, 0.3, dt);
        assert!((near - exact).norm() < 1e-10);
        // far from degenerate: plain quotient
        let (a, b) = (1.7, -0.4);
        let plain = (C64::from_polar(1.0, -a * dt) - C64::from_polar(1.0, -b * dt)) / (a - b);
        assert!((divided_difference(a, b, dt) - plain).norm() < 1e-14);
    }

    #[test]
    fn config_validation() {
        assert!(OptimizationConfig::default().validate().is_ok());
        let mut c = OptimizationConfig::default();
        c.grad_tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = OptimizationConfig::default();
        c.max_iters = 0;
        assert!(c.validate().is_err());
        let mut c = OptimizationConfig::default();
        c.step_rule = StepRule::Fixed { step: -1.0 };
        assert!(c.validate().is_err());
        let mut c = OptimizationConfig::default();
        c.step_rule = StepRule::Backtracking { armijo: 1e-4, shrink: 1.5 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn single_qubit_flip_reaches_unit_fidelity() {
        // |+> -> |1> is a rotation by pi/2 about y: lambda T = pi/4 with Y as
        // generator. A short T makes the omega0 Z drift negligible.
        let model = SpinStarModel::new(1, 2, 0.0).unwrap();
        let target = PureState::basis(2, 1).unwrap();
        let t = 1e-7;
        let p = ControlProtocol::new(t, vec![PI / 4.0 / t]).unwrap();
        let f = state_fidelity(&p, &model, &target).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn target_dimension_checked() {
        let model = SpinStarModel::new(2, 3, 0.1).unwrap();
        let ghz3 = target_state(TargetKind::Ghz, 3).unwrap();
        let p = ControlProtocol::zeros(1.0, 4).unwrap();
        assert!(state_fidelity(&p, &model, &ghz3).is_err());
    }

    #[test]
    fn fixed_step_rule_runs() {
        let model = SpinStarModel::new(2, 3, 0.2).unwrap();
        let target = target_state(TargetKind::Bell, 2).unwrap();
        let config = OptimizationConfig {
            restarts: 1,
            max_iters: 5,
            slices: 10,
            step_rule: StepRule::Fixed { step: 0.1 },
            ..Default::default()
        };
        let r = optimize(&model, &target, 2.0, &config).unwrap();
        assert_eq!(r.iterations_used, 5);
        assert_eq!(r.fidelity_history.len(), 6);
    }

    #[test]
    fn initial_field_is_bounded_and_seeded() {
        let config = OptimizationConfig {
            init_amplitude: 0.7,
            seed: 3,
            ..Default::default()
        };
        let a = initial_field(&config, 10.0, 0).unwrap();
        let b = initial_field(&config, 10.0, 0).unwrap();
        let c = initial_field(&config, 10.0, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.slices(), DEFAULT_SLICES);
        assert!(a.amplitudes().iter().all(|x| x.abs() <= 0.7));
    }
}
