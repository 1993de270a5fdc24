// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

//! Criterion benchmarks live under `benches/`.
