#include "liangflow/quadratic.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "liangflow/entropy.hpp"
#include "liangflow/error.hpp"

namespace liangflow {

namespace {

constexpr int kMaxDenseDimension = 6000;

void check_time(double t) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("evolution time must be finite and non-negative");
}

} // namespace

SingleParticleMatrix compile_u1(const ChainModel& model) {
    const int n = model.length();
    if (n > kMaxDenseDimension)
        throw ResourceError("single-particle matrix above 6000 x 6000");

    SingleParticleMatrix out;
    out.source = model.kind();
    out.h = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : model.terms()) {
        const int i = t.first - 1;
        const int j = t.second - 1;
        switch (t.kind) {
        case TermKind::HoppingXY:
            if (std::abs(i - j) != 1)
                throw EngineError("U(1) engine supports nearest-neighbour hopping only");
            out.h(i, j) += 2.0 * t.amplitude;
            out.h(j, i) += 2.0 * t.amplitude;
            break;
        case TermKind::FieldZ:
            out.h(i, i) += 2.0 * t.amplitude;
            break;
        case TermKind::CouplingZZ:
        case TermKind::FieldX:
            throw EngineError("model breaks U(1) symmetry (ZZ or X terms)");
        }
    }
    return out;
}

CorrelationState neel_state(int length) {
    if (length < 2)
        throw std::invalid_argument("Neel state needs L >= 2");
    CorrelationState s;
    s.c = Eigen::MatrixXcd::Zero(length, length);
    for (int j = 0; j < length; j += 2)
        s.c(j, j) = 1.0;
    return s;
}

U1Propagator::U1Propagator(const SingleParticleMatrix& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.h);
    if (es.info() != Eigen::Success)
        throw EngineError("single-particle diagonalisation failed");
    energies_ = es.eigenvalues();
    modes_ = es.eigenvectors();
}

Eigen::MatrixXcd U1Propagator::single_particle_propagator(double t) const {
    check_time(t);
    const Eigen::VectorXcd phases =
        (energies_.cast<std::complex<double>>() * std::complex<double>(0.0, -t)).array().exp();
    return modes_.cast<std::complex<double>>() * phases.asDiagonal() * modes_.transpose();
}

CorrelationState U1Propagator::evolve(const CorrelationState& c0, double t) const {
    check_time(t);
    if (c0.length() != length())
        throw std::invalid_argument("correlation matrix and Hamiltonian sizes differ");
    if (t == 0.0)
        return c0;
    const Eigen::MatrixXcd u = single_particle_propagator(t);
    CorrelationState out;
    out.c = u.conjugate() * c0.c * u.transpose();
    out.time = c0.time + t;
    return out;
}

CorrelationState evolve_u1(const SingleParticleMatrix& h, const CorrelationState& c0, double t) {
    check_time(t);
    if (t == 0.0) {
        if (c0.length() != h.length())
            throw std::invalid_argument("correlation matrix and Hamiltonian sizes differ");
        return c0;
    }
    return U1Propagator(h).evolve(c0, t);
}

U1Trajectory::U1Trajectory(const U1Propagator& propagator, const CorrelationState& c0)
    : propagator_(&propagator) {
    if (c0.length() != propagator.length())
        throw std::invalid_argument("correlation matrix and Hamiltonian sizes differ");

    initial_occupations_ = c0.c.diagonal().real();
    // Diagonal C0 (product states) needs no factorisation.
    const bool diagonal = c0.c.isDiagonal(0.0);
    Eigen::MatrixXcd w;
    Eigen::VectorXd weights;
    if (diagonal) {
        const Eigen::VectorXd d = c0.c.diagonal().real();
        weights = d;
        w = Eigen::MatrixXcd::Identity(d.size(), d.size());
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c0.c);
        if (es.info() != Eigen::Success)
            throw EngineError("correlation-matrix factorisation failed");
        weights = es.eigenvalues();
        w = es.eigenvectors();
    }

    std::vector<int> keep;
    for (int k = 0; k < weights.size(); ++k)
        if (std::abs(weights(k)) > 1e-14)
            keep.push_back(k);
    weights_.resize(static_cast<Eigen::Index>(keep.size()));
    Eigen::MatrixXcd kept(w.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        weights_(static_cast<Eigen::Index>(k)) = weights(keep[k]);
        kept.col(static_cast<Eigen::Index>(k)) = w.col(keep[k]);
    }
    projected_ = propagator.modes().transpose().cast<std::complex<double>>() * kept;
}

double U1Trajectory::occupation(Site j, double t) const {
    const Site sites[] = {j};
    return occupations(sites, t).front();
}

std::vector<double> U1Trajectory::occupations(std::span<const Site> sites, double t) const {
    check_time(t);
    const int n = propagator_->length();
    for (Site s : sites)
        if (s < 1 || s > n)
            throw std::out_of_range("site outside chain");
    std::vector<double> out;
    out.reserve(sites.size());
    if (t == 0.0) {
        for (Site s : sites)
            out.push_back(initial_occupations_(s - 1));
        return out;
    }
    // conj(U) = V e^{iDt} V^T, so rows of conj(U) W are V_j e^{iDt} (V^T W).
    const Eigen::VectorXcd phases =
        (propagator_->energies().cast<std::complex<double>>() * std::complex<double>(0.0, t)).array().exp();
    Eigen::MatrixXcd rows(static_cast<Eigen::Index>(sites.size()), n);
    for (std::size_t k = 0; k < sites.size(); ++k)
        rows.row(static_cast<Eigen::Index>(k)) =
            propagator_->modes().row(sites[k] - 1).cast<std::complex<double>>().cwiseProduct(phases.transpose());
    const Eigen::MatrixXcd amplitudes = rows * projected_;
    for (Eigen::Index k = 0; k < amplitudes.rows(); ++k)
        out.push_back((amplitudes.row(k).array().abs2() * weights_.transpose().array()).sum());
    return out;
}

double site_entropy_u1(const CorrelationState& c, Site j) {
    if (j < 1 || j > c.length())
        throw std::out_of_range("site outside chain");
    return binary_entropy(c.c(j - 1, j - 1).real());
}

} // namespace liangflow
