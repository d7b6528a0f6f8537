// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reduction of a T x d hidden-state matrix to the vector the scorer reads.

#pragma once

#include <span>
#include <string>

#include "dash/numerics.h"

namespace dash {

/// kLastToken: the position that produces the answer (single-token tasks).
/// kMeanPool: average over positions (language modelling).
enum class Readout { kLastToken, kMeanPool };

std::string to_string(Readout r);
Readout readout_from_string(const std::string& s);

Vector readout(const Matrix& h, Readout r);

/// h' = scale * h: stand-in for the next layer's input while the current
/// layer is still running.
Vector approximate_next_hidden(std::span<const double> h, double scale);

}  // namespace dash
