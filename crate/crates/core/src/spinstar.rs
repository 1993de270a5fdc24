// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin-star model: `m` non-interacting central spins, each coupled by an
//! isotropic Heisenberg interaction of uniform strength to the same `n - m`
//! environment spins, with a control field along `y` on central spin 0.
//!
//! ```text
//! H(t) = sum_l (omega0/2) Z_l + A_eff sum_l sum_k (X_l X_k + Y_l Y_k + Z_l Z_k) + lambda(t) Y_0
//! ```
//!
//! Two exact representations of the same dynamics are available. `Full`
//! works on the `2^n` qubit register. `Collective` keeps the central spins
//! explicit and replaces the environment by its permutation-symmetric
//! (Dicke) sector of dimension `n - m + 1`; every operator here commutes with
//! environment permutations and the environment starts in `|1...1>`, so the
//! state never leaves that sector.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    embed, kron, pauli_x, pauli_y, pauli_z, reduce_leading, DensityMatrix, Operator, PureState,
    C64,
};

/// Default Zeeman splitting. With the `omega0/2` prefactor this makes the
/// single-spin term exactly `Z_l`, the convention under which the reference
/// NM values (0.43 at n=8, A=0.2/sqrt 6 and at n=5, A=0.1466) are reproduced.
pub const DEFAULT_OMEGA0: f64 = 2.0;
/// Largest supported register.
pub const MAX_SPINS: usize = 12;
/// The control field acts on this central spin.
pub const CONTROL_SITE: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// `A_eff = A`
    #[default]
    Unscaled,
    /// `A_eff = A / sqrt(n - m)`
    Scaled,
}

impl fmt::Display for CouplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingMode::Unscaled => "unscaled",
            CouplingMode::Scaled => "scaled",
        })
    }
}

impl FromStr for CouplingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unscaled" => Ok(Self::Unscaled),
            "scaled" => Ok(Self::Scaled),
            other => Err(Error::InvalidModel(format!("unknown coupling mode '{other}'"))),
        }
    }
}

/// Hilbert-space representation used for propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Full,
    #[default]
    Collective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinStarModel {
    /// Number of central spins.
    pub m: usize,
    /// Total number of spins.
    pub n: usize,
    #[serde(default = "default_omega0")]
    pub omega0: f64,
    /// Bare coupling `A`.
    pub coupling: f64,
    #[serde(default)]
    pub coupling_mode: CouplingMode,
    #[serde(default)]
    pub representation: Representation,
}

fn default_omega0() -> f64 {
    DEFAULT_OMEGA0
}

impl SpinStarModel {
    pub fn new(m: usize, n: usize, coupling: f64) -> Result<Self> {
        let model = Self {
            m,
            n,
            omega0: DEFAULT_OMEGA0,
            coupling,
            coupling_mode: CouplingMode::Unscaled,
            representation: Representation::Collective,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn scaled(mut self) -> Self {
        self.coupling_mode = CouplingMode::Scaled;
        self
    }

    pub fn with_mode(mut self, mode: CouplingMode) -> Self {
        self.coupling_mode = mode;
        self
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_representation(mut self, representation: Representation) -> Self {
        self.representation = representation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.m >= self.n || self.n > MAX_SPINS {
            return Err(Error::InvalidModel(format!(
                "need 1 <= m < n <= {MAX_SPINS}, got m={}, n={}",
                self.m, self.n
            )));
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::InvalidModel(format!("omega0 must be > 0, got {}", self.omega0)));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "coupling must be >= 0, got {}",
                self.coupling
            )));
        }
        Ok(())
    }

    pub fn control_site(&self) -> usize {
        CONTROL_SITE
    }

    pub fn env_spins(&self) -> usize {
        self.n - self.m
    }

    pub fn effective_coupling(&self) -> f64 {
        match self.coupling_mode {
            CouplingMode::Unscaled => self.coupling,
            CouplingMode::Scaled => self.coupling / (self.env_spins() as f64).sqrt(),
        }
    }

    /// Dimension of the central-spin space, `2^m`.
    pub fn system_dim(&self) -> usize {
        1 << self.m
    }

    /// Environment dimension in the model's representation.
    pub fn env_dim(&self) -> usize {
        match self.representation {
            Representation::Full => 1 << self.env_spins(),
            Representation::Collective => self.env_spins() + 1,
        }
    }

    /// Total propagation dimension in the model's representation.
    pub fn dim(&self) -> usize {
        self.system_dim() * self.env_dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Bell,
    Ghz,
    W,
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetKind::Bell => "bell",
            TargetKind::Ghz => "ghz",
            TargetKind::W => "w",
        })
    }
}

impl FromStr for TargetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bell" => Ok(Self::Bell),
            "ghz" => Ok(Self::Ghz),
            "w" => Ok(Self::W),
            other => Err(Error::InvalidTarget(format!("unknown target '{other}'"))),
        }
    }
}

fn check_model(model: &SpinStarModel) -> Result<()> {
    model.validate()
}

/// `H0` on the full `2^n` register.
pub fn free_hamiltonian(model: &SpinStarModel) -> Result<Operator> {
    check_model(model)?;
    let n = model.n;
    let mut h = Operator::zeros(1 << n);
    let z = pauli_z();
    for l in 0..model.m {
        h = &h + &embed(&z, l, n)?.scale(model.omega0 / 2.0);
    }
    let a = model.effective_coupling();
    if a != 0.0 {
        let paulis = [pauli_x(), pauli_y(), pauli_z()];
        for l in 0..model.m {
            for k in model.m..n {
                for p in &paulis {
                    h = &h + &(&embed(p, l, n)? * &embed(p, k, n)?).scale(a);
                }
            }
        }
    }
    Ok(h)
}

/// `Y` on the control site of the full register.
pub fn control_generator(model: &SpinStarModel) -> Result<Operator> {
    check_model(model)?;
    embed(&pauli_y(), CONTROL_SITE, model.n)
}

/// Total magnetization `sum_q Z_q` on the full register.
pub fn total_magnetization(n_qubits: usize) -> Result<Operator> {
    let mut s = Operator::zeros(1 << n_qubits);
    for q in 0..n_qubits {
        s = &s + &embed(&pauli_z(), q, n_qubits)?;
    }
    Ok(s)
}

fn central_product(m: usize, sign: f64) -> PureState {
    let single = PureState::from_amplitudes(vec![
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(sign * FRAC_1_SQRT_2, 0.0),
    ])
    .expect("normalized");
    (1..m).fold(single.clone(), |acc, _| acc.kron(&single))
}

/// `|psi_{1,2}(0)> = (|0> +- |1>)/sqrt2 on every central spin, |1> on every
/// environment spin`, on the full register.
pub fn initial_state_pair(model: &SpinStarModel) -> Result<(PureState, PureState)> {
    check_model(model)?;
    let env = PureState::basis(1 << model.env_spins(), (1 << model.env_spins()) - 1)?;
    Ok((
        central_product(model.m, 1.0).kron(&env),
        central_product(model.m, -1.0).kron(&env),
    ))
}

/// Bell, GHZ or W state on `m` qubits.
pub fn target_state(kind: TargetKind, m: usize) -> Result<PureState> {
    if m > MAX_SPINS {
        return Err(Error::InvalidTarget(format!("m = {m} too large")));
    }
    let dim = 1usize << m;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    match kind {
        TargetKind::Bell | TargetKind::Ghz => {
            if kind == TargetKind::Bell && m != 2 {
                return Err(Error::InvalidTarget(format!("Bell target needs m = 2, got {m}")));
            }
            if m < 2 {
                return Err(Error::InvalidTarget(format!("GHZ target needs m >= 2, got {m}")));
            }
            amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
            amps[dim - 1] = C64::new(FRAC_1_SQRT_2, 0.0);
        }
        TargetKind::W => {
            if m < 2 {
                return Err(Error::InvalidTarget(format!("W target needs m >= 2, got {m}")));
            }
            let a = 1.0 / (m as f64).sqrt();
            for q in 0..m {
                amps[1 << q] = C64::new(a, 0.0);
            }
        }
    }
    PureState::normalized(amps)
}

/// Collective spin operators `(Jx, Jy, Jz)` on the symmetric sector of
/// `spins` spin-1/2 particles, basis ordered `m_z = j, j-1, ..., -j`.
pub fn collective_spin(spins: usize) -> (Operator, Operator, Operator) {
    let d = spins + 1;
    let j = spins as f64 / 2.0;
    let mz = |e: usize| j - e as f64;
    let mut jp = DMatrix::<C64>::zeros(d, d);
    for e in 1..d {
        // J+ |m_z> = sqrt(j(j+1) - m_z(m_z+1)) |m_z + 1>, and m_z + 1 sits at e - 1
        let m = mz(e);
        jp[(e - 1, e)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * C64::new(0.5, 0.0);
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    let jz = DMatrix::from_diagonal(&DVector::from_fn(d, |e, _| C64::new(mz(e), 0.0)));
    (
        Operator::from_matrix(jx).expect("square"),
        Operator::from_matrix(jy).expect("square"),
        Operator::from_matrix(jz).expect("square"),
    )
}

/// Isometry from the symmetric sector of `spins` qubits into the full
/// `2^spins` register; column `e` is the Dicke state with `spins - e` spins
/// in `|0>`.
pub fn dicke_isometry(spins: usize) -> DMatrix<C64> {
    let d_full = 1usize << spins;
    let mut w = DMatrix::zeros(d_full, spins + 1);
    for idx in 0..d_full {
        // number of |1> (down) spins equals e
        let e = idx.count_ones() as usize;
        w[(idx, e)] = C64::new(1.0, 0.0);
    }
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        col /= C64::new(norm, 0.0);
    }
    w
}

/// Model operators and the initial pair in the model's representation.
#[derive(Debug, Clone)]
pub struct SpinStarSystem {
    pub model: SpinStarModel,
    pub h0: Operator,
    pub hc: Operator,
    pub psi_plus: PureState,
    pub psi_minus: PureState,
}

impl SpinStarSystem {
    pub fn new(model: &SpinStarModel) -> Result<Self> {
        check_model(model)?;
        match model.representation {
            Representation::Full => {
                let (psi_plus, psi_minus) = initial_state_pair(model)?;
                Ok(Self {
                    model: model.clone(),
                    h0: free_hamiltonian(model)?,
                    hc: control_generator(model)?,
                    psi_plus,
                    psi_minus,
                })
            }
            Representation::Collective => Self::collective(model),
        }
    }

    fn collective(model: &SpinStarModel) -> Result<Self> {
        let m = model.m;
        let env = model.env_spins();
        let i_env = Operator::identity(env + 1);
        let (jx, jy, jz) = collective_spin(env);

        let mut h0 = Operator::zeros(model.dim());
        for l in 0..m {
            h0 = &h0 + &kron(&embed(&pauli_z(), l, m)?, &i_env).scale(model.omega0 / 2.0);
        }
        // sum_k sigma_k = 2 J
        let a2 = 2.0 * model.effective_coupling();
        if a2 != 0.0 {
            for l in 0..m {
                for (p, j) in [(pauli_x(), &jx), (pauli_y(), &jy), (pauli_z(), &jz)] {
                    h0 = &h0 + &kron(&embed(&p, l, m)?, j).scale(a2);
                }
            }
        }
        let hc = kron(&embed(&pauli_y(), CONTROL_SITE, m)?, &i_env);

        let env_down = PureState::basis(env + 1, env)?;
        Ok(Self {
            model: model.clone(),
            h0,
            hc,
            psi_plus: central_product(m, 1.0).kron(&env_down),
            psi_minus: central_product(m, -1.0).kron(&env_down),
        })
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn system_dim(&self) -> usize {
        self.model.system_dim()
    }

    /// Reduced central-spin state of a propagated vector.
    pub fn reduce(&self, psi: &DVector<C64>) -> Result<DensityMatrix> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.len(),
            });
        }
        reduce_leading(psi, self.system_dim())
    }

    /// Maps a vector of this representation onto the full `2^n` register.
    pub fn to_full(&self, psi: &DVector<C64>) -> Result<PureState> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.len(),
            });
        }
        match self.model.representation {
            Representation::Full => Ok(PureState::from_vector_unchecked(psi.clone())),
            Representation::Collective => {
                let lift = DMatrix::<C64>::identity(self.system_dim(), self.system_dim())
                    .kronecker(&dicke_isometry(self.model.env_spins()));
                Ok(PureState::from_vector_unchecked(lift * psi))
            }
        }
    }
}
