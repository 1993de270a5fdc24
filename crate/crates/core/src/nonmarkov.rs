// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

//! BLP non-Markovianity of the free (uncontrolled) central-spin dynamics.
//!
//! The two central-spin states `(|0> +- |1>)/sqrt2` (environment in `|1...1>`)
//! are evolved under `H0`, and the trace distance `D(t)` between their reduced
//! states is sampled on a uniform grid over `[0, T]`. The measure is the total
//! positive variation `sum_i max(0, D(t_{i+1}) - D(t_i))`, i.e. the integral
//! of `dD/dt` over the intervals where it is positive.
//!
//! The state pair is fixed rather than maximized over, so the value is a
//! lower bound on the fully optimized measure.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{trace_distance, HermitianEigen, herm_eig, C64};
use crate::spinstar::{SpinStarModel, SpinStarSystem};

pub const DEFAULT_NM_SAMPLES: usize = 2000;
pub const MIN_NM_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmResult {
    pub value: f64,
    pub d_trajectory: Vec<f64>,
    pub sample_times: Vec<f64>,
}

/// Sum of the positive increments of a sampled curve.
pub fn positive_variation(samples: &[f64]) -> f64 {
    samples.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum()
}

/// Free evolution of the initial pair, diagonalized once.
#[derive(Debug, Clone)]
pub struct FreePair {
    system: SpinStarSystem,
    eig: HermitianEigen,
    plus: DVector<C64>,
    minus: DVector<C64>,
}

impl FreePair {
    pub fn new(model: &SpinStarModel) -> Result<Self> {
        let system = SpinStarSystem::new(model)?;
        let eig = herm_eig(&system.h0)?;
        let plus = eig.to_eigenbasis(system.psi_plus.vector());
        let minus = eig.to_eigenbasis(system.psi_minus.vector());
        Ok(Self {
            system,
            eig,
            plus,
            minus,
        })
    }

    /// Trace distance between the reduced states at time `t`.
    pub fn distance(&self, t: f64) -> Result<f64> {
        let a = self.system.reduce(&self.eig.evolve_coefficients(&self.plus, t))?;
        let b = self.system.reduce(&self.eig.evolve_coefficients(&self.minus, t))?;
        trace_distance(&a, &b)
    }

    /// `D` sampled at `t_i = i T / n_samples`, `i = 0..=n_samples`.
    pub fn sample(&self, total_time: f64, n_samples: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let dt = total_time / n_samples as f64;
        let times: Vec<f64> = (0..=n_samples).map(|i| i as f64 * dt).collect();
        let d = times.iter().map(|&t| self.distance(t)).collect::<Result<Vec<_>>>()?;
        Ok((times, d))
    }
}

fn check_window(total_time: f64) -> Result<()> {
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::InvalidArgument(format!("total time must be > 0, got {total_time}")));
    }
    Ok(())
}

pub fn blp_measure(model: &SpinStarModel, total_time: f64, n_samples: usize) -> Result<NmResult> {
    check_window(total_time)?;
    if n_samples < MIN_NM_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_NM_SAMPLES} samples, got {n_samples}"
        )));
    }
    let pair = FreePair::new(model)?;
    let (sample_times, d_trajectory) = pair.sample(total_time, n_samples)?;
    Ok(NmResult {
        value: positive_variation(&d_trajectory),
        d_trajectory,
        sample_times,
    })
}

/// `(T_j, NM(T_j))` for `T_j = j t_max / n_windows`, `j = 1..=n_windows`, at
/// the default sampling density.
pub fn nm_window_curve(model: &SpinStarModel, t_max: f64, n_windows: usize) -> Result<Vec<(f64, f64)>> {
    nm_window_curve_with(model, t_max, n_windows, DEFAULT_NM_SAMPLES)
}

/// Like [`nm_window_curve`], with `n_samples` rounded up to a multiple of
/// `n_windows` so every window ends on a sample point. Window `j` then sees
/// exactly the grid `blp_measure(model, T_j, n_samples * j / n_windows)` uses.
pub fn nm_window_curve_with(
    model: &SpinStarModel,
    t_max: f64,
    n_windows: usize,
    n_samples: usize,
) -> Result<Vec<(f64, f64)>> {
    check_window(t_max)?;
    if n_windows == 0 {
        return Err(Error::InvalidArgument("need at least one window".into()));
    }
    let per_window = n_samples.div_ceil(n_windows).max(1);
    let total = per_window * n_windows;
    let pair = FreePair::new(model)?;
    let (_, d) = pair.sample(t_max, total)?;
    let mut acc = 0.0;
    let mut curve = Vec::with_capacity(n_windows);
    for j in 1..=n_windows {
        let lo = (j - 1) * per_window;
        let hi = j * per_window;
        acc += positive_variation(&d[lo..=hi]);
        curve.push((t_max * j as f64 / n_windows as f64, acc));
    }
    Ok(curve)
}

/// Samples per window used by [`nm_window_curve_with`].
pub fn window_samples(n_samples: usize, n_windows: usize) -> usize {
    n_samples.div_ceil(n_windows).max(1)
}
