#include "liangflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace liangflow {

namespace {

void check_site(Site s, int length) {
    if (s < 1 || s > length)
        throw std::out_of_range("site " + std::to_string(s) + " outside [1, " + std::to_string(length) + "]");
}

} // namespace

ChainModel::ChainModel(int length, ModelKind kind, std::vector<Term> terms, ModelParams params)
    : length_(length), kind_(kind), terms_(std::move(terms)), params_(params) {
    if (length_ < 2)
        throw std::invalid_argument("chain length must be at least 2");
    for (const auto& t : terms_) {
        check_site(t.first, length_);
        check_site(t.second, length_);
        if (!std::isfinite(t.amplitude))
            throw std::invalid_argument("non-finite term amplitude");
        if (t.is_field()) {
            if (t.first != t.second)
                throw std::invalid_argument("field term must act on a single site");
        } else {
            const int span = std::abs(t.first - t.second);
            if (span == 0 || span > 2)
                throw std::invalid_argument("bonds must join distinct sites at most two apart");
        }
    }
}

bool ChainModel::is_inert(Site s) const {
    return std::none_of(terms_.begin(), terms_.end(), [s](const Term& t) { return t.touches(s); });
}

bool ChainModel::has_term(TermKind kind) const {
    return std::any_of(terms_.begin(), terms_.end(), [kind](const Term& t) { return t.kind == kind; });
}

bool ChainModel::has_next_nearest() const {
    return std::any_of(terms_.begin(), terms_.end(),
                       [](const Term& t) { return !t.is_field() && std::abs(t.first - t.second) == 2; });
}

double ChainModel::norm_bound() const {
    double total = 0.0;
    for (const auto& t : terms_)
        total += std::abs(t.amplitude) * (t.kind == TermKind::HoppingXY ? 2.0 : 1.0);
    return total;
}

ChainModel build_aah(int length, double lambda, double beta, AahNormalization normalization) {
    if (length < 2)
        throw std::invalid_argument("AAH chain needs L >= 2");
    if (!std::isfinite(lambda) || !std::isfinite(beta))
        throw std::invalid_argument("AAH parameters must be finite");
    if (lambda < 0.0)
        throw std::invalid_argument("AAH field strength must be non-negative");

    // SpinHalf: (S^x S^x + S^y S^y) = (XX + YY)/4 and (1/2) B_j S^z = (B_j/4) Z.
    const double hop = normalization == AahNormalization::Pauli ? 1.0 : 0.25;
    const double field_scale = normalization == AahNormalization::Pauli ? 0.5 : 0.25;

    std::vector<Term> terms;
    terms.reserve(2 * static_cast<std::size_t>(length));
    for (Site j = 1; j < length; ++j)
        terms.push_back({TermKind::HoppingXY, j, j + 1, hop});
    for (Site j = 1; j <= length; ++j) {
        const double bj = lambda * std::cos(2.0 * std::numbers::pi * beta * j);
        terms.push_back({TermKind::FieldZ, j, j, field_scale * bj});
    }
    ModelParams p;
    p.lambda = lambda;
    p.beta = beta;
    p.normalization = normalization;
    return ChainModel(length, ModelKind::Aah, std::move(terms), p);
}

ChainModel build_annni(int length, double kappa, double field, double tilt) {
    if (!std::isfinite(kappa) || !std::isfinite(field) || !std::isfinite(tilt))
        throw std::invalid_argument("ANNNI parameters must be finite");
    if (kappa < 0.0 || kappa >= 0.5)
        throw std::invalid_argument("kappa must lie in [0, 0.5)");
    if (field < 0.0)
        throw std::invalid_argument("transverse field must be non-negative");
    if (tilt < 0.0)
        throw std::invalid_argument("longitudinal tilt must be non-negative");
    if (length < 2 || (kappa != 0.0 && length < 3))
        throw std::invalid_argument("ANNNI chain needs L >= 2 (L >= 3 with kappa > 0)");

    std::vector<Term> terms;
    for (Site j = 1; j < length; ++j)
        terms.push_back({TermKind::CouplingZZ, j, j + 1, -1.0});
    if (kappa != 0.0)
        for (Site j = 1; j + 2 <= length; ++j)
            terms.push_back({TermKind::CouplingZZ, j, j + 2, kappa});
    for (Site j = 1; j <= length; ++j)
        terms.push_back({TermKind::FieldX, j, j, -field});
    if (tilt != 0.0)
        for (Site j = 1; j <= length; ++j)
            terms.push_back({TermKind::FieldZ, j, j, tilt});

    ModelParams p;
    p.kappa = kappa;
    p.field = field;
    p.tilt = tilt;
    return ChainModel(length, ModelKind::Annni, std::move(terms), p);
}

ChainModel freeze(const ChainModel& model, const FrozenMask& mask) {
    if (mask.sites.size() != 1)
        throw std::invalid_argument("exactly one frozen site is supported");
    const Site b = mask.sites.front();
    check_site(b, model.length());

    std::vector<Term> kept;
    kept.reserve(model.terms().size());
    for (const auto& t : model.terms())
        if (!t.touches(b))
            kept.push_back(t);
    return ChainModel(model.length(), model.kind(), std::move(kept), model.params());
}

Site fibonacci_frozen_site(int length) {
    if (length < 3)
        throw std::invalid_argument("Fibonacci frozen-site rule needs L >= 3");
    long long prev = 1, cur = 2; // 1, 2, 3, 5, ...
    while (cur < length) {
        const long long next = prev + cur;
        if (next >= length)
            break;
        prev = cur;
        cur = next;
    }
    return static_cast<Site>(cur + 1);
}

Site middle_site(int length) {
    if (length < 1)
        throw std::invalid_argument("empty chain");
    return (length + 1) / 2;
}

double critical_line_residual(double kappa, double field) {
    return (1.0 - 2.0 * kappa) - (field - field * field * kappa / (2.0 - 2.0 * kappa));
}

double critical_field(double kappa) {
    if (!std::isfinite(kappa) || kappa < 0.0 || kappa >= 0.5)
        throw std::invalid_argument("critical_field needs kappa in [0, 0.5)");
    // a B^2 - B + c = 0 with a = k/(2-2k), c = 1-2k. The smaller root written
    // as 2c / (1 + sqrt(1 - 4ac)) is exact at k = 0 and avoids cancellation.
    const double a = kappa / (2.0 - 2.0 * kappa);
    const double c = 1.0 - 2.0 * kappa;
    double b = 2.0 * c / (1.0 + std::sqrt(1.0 - 4.0 * a * c));
    // One Newton polish on the residual.
    const double r = critical_line_residual(kappa, b);
    const double dr = -(1.0 - 2.0 * a * b);
    if (dr != 0.0)
        b -= r / dr;
    return b;
}

CriticalPoint critical_point(double kappa) { return {kappa, critical_field(kappa)}; }

} // namespace liangflow
