// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant Schrödinger propagation under `H0 + lambda_k Hc`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{herm_eig, reduce_leading, DensityMatrix, HermitianEigen, Operator, PureState, C64};
use crate::spinstar::SpinStarModel;

pub const DEFAULT_SLICES: usize = 200;

/// Control field held at `amplitudes[k]` on `[k dt, (k+1) dt)`, `dt = T/K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlProtocol {
    total_time: f64,
    amplitudes: Vec<f64>,
}

impl ControlProtocol {
    pub fn new(total_time: f64, amplitudes: Vec<f64>) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidProtocol(format!("total time must be > 0, got {total_time}")));
        }
        if amplitudes.is_empty() {
            return Err(Error::InvalidProtocol("protocol needs at least one slice".into()));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidProtocol("non-finite amplitude".into()));
        }
        Ok(Self {
            total_time,
            amplitudes,
        })
    }

    pub fn constant(total_time: f64, value: f64, slices: usize) -> Result<Self> {
        Self::new(total_time, vec![value; slices])
    }

    pub fn zeros(total_time: f64, slices: usize) -> Result<Self> {
        Self::constant(total_time, 0.0, slices)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn slices(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.amplitudes.len() as f64
    }

    /// Same slice width, amplitudes replaced.
    pub fn with_amplitudes(&self, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != self.slices() {
            return Err(Error::DimensionMismatch {
                expected: self.slices(),
                actual: amplitudes.len(),
            });
        }
        Self::new(self.total_time, amplitudes)
    }

    /// Splits after the first `k` slices.
    pub fn split_at(&self, k: usize) -> Result<(Self, Self)> {
        if k == 0 || k >= self.slices() {
            return Err(Error::InvalidProtocol(format!(
                "split index {k} must lie in 1..{}",
                self.slices()
            )));
        }
        let dt = self.dt();
        let (a, b) = self.amplitudes.split_at(k);
        Ok((
            Self::new(dt * k as f64, a.to_vec())?,
            Self::new(dt * b.len() as f64, b.to_vec())?,
        ))
    }
}

/// Full-system states sampled at slice boundaries `0, dt, ..., T`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PureState>,
}

impl Trajectory {
    pub fn final_state(&self) -> &PureState {
        self.states.last().expect("trajectory is never empty")
    }
}

fn check_generators(h0: &Operator, hc: &Operator) -> Result<()> {
    if h0.dim() != hc.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            actual: hc.dim(),
        });
    }
    Ok(())
}

/// Eigendecompositions of every slice generator `h0 + lambda_k hc`.
pub fn slice_eigens(h0: &Operator, hc: &Operator, protocol: &ControlProtocol) -> Result<Vec<HermitianEigen>> {
    check_generators(h0, hc)?;
    protocol
        .amplitudes()
        .iter()
        .map(|&lambda| herm_eig(&(h0 + &hc.scale(lambda))))
        .collect()
}

/// `U_k = exp(-i (h0 + lambda_k hc) dt)` for every slice.
pub fn slice_propagators(h0: &Operator, hc: &Operator, protocol: &ControlProtocol) -> Result<Vec<Operator>> {
    let dt = protocol.dt();
    Ok(slice_eigens(h0, hc, protocol)?
        .iter()
        .map(|eig| eig.propagator(dt))
        .collect())
}

/// Applies one slice to `psi` without forming the propagator.
pub(crate) fn step(eig: &HermitianEigen, psi: &DVector<C64>, dt: f64) -> DVector<C64> {
    eig.evolve_coefficients(&eig.to_eigenbasis(psi), dt)
}

pub fn evolve(h0: &Operator, hc: &Operator, protocol: &ControlProtocol, psi0: &PureState) -> Result<Trajectory> {
    check_generators(h0, hc)?;
    if psi0.dim() != h0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            actual: psi0.dim(),
        });
    }
    let dt = protocol.dt();
    let eigens = slice_eigens(h0, hc, protocol)?;
    let mut times = Vec::with_capacity(eigens.len() + 1);
    let mut states = Vec::with_capacity(eigens.len() + 1);
    times.push(0.0);
    states.push(psi0.clone());
    let mut psi = psi0.vector().clone();
    for (k, eig) in eigens.iter().enumerate() {
        psi = step(eig, &psi, dt);
        times.push(dt * (k + 1) as f64);
        states.push(PureState::from_vector_unchecked(psi.clone()));
    }
    Ok(Trajectory { times, states })
}

/// Central-spin reduced states along a trajectory of either representation
/// of `model` (the central spins are always the leading factor).
pub fn reduced_trajectory(traj: &Trajectory, model: &SpinStarModel) -> Result<Vec<DensityMatrix>> {
    model.validate()?;
    let full = 1usize << model.n;
    let collective = model.system_dim() * (model.env_spins() + 1);
    traj.states
        .iter()
        .map(|s| {
            if s.dim() != full && s.dim() != collective {
                return Err(Error::DimensionMismatch {
                    expected: full,
                    actual: s.dim(),
                });
            }
            reduce_leading(s.vector(), model.system_dim())
        })
        .collect()
}
