#pragma once

namespace liangflow {

// Probabilities outside [0, 1] by more than this signal an engine bug rather
// than roundoff.
inline constexpr double kProbabilityTolerance = 1e-8;

// -p ln p - (1-p) ln(1-p) in nats, with 0 ln 0 = 0. p is clamped into [0, 1];
// excursions beyond kProbabilityTolerance throw EngineError.
double binary_entropy(double p);

// Entropy of a qubit state with Bloch-vector length r: eigenvalues (1 +- r)/2.
double bloch_entropy(double r);

} // namespace liangflow
