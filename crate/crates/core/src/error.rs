// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| = {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystem(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bracket [{lo}, {hi}] does not straddle target NM {target} (NM values {nm_lo}, {nm_hi})")]
    Bracket {
        lo: f64,
        hi: f64,
        target: f64,
        nm_lo: f64,
        nm_hi: f64,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
