#include "liangflow/entropy.hpp"

#include <cmath>
#include <string>

#include "liangflow/error.hpp"

namespace liangflow {

double binary_entropy(double p) {
    if (!std::isfinite(p) || p < -kProbabilityTolerance || p > 1.0 + kProbabilityTolerance)
        throw EngineError("probability " + std::to_string(p) + " outside [0, 1]");
    if (p <= 0.0 || p >= 1.0)
        return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

double bloch_entropy(double r) {
    if (!std::isfinite(r) || std::abs(r) > 1.0 + kProbabilityTolerance)
        throw EngineError("Bloch vector length " + std::to_string(r) + " exceeds 1");
    return binary_entropy(0.5 * (1.0 + r));
}

} // namespace liangflow
