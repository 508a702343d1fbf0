#include "liangflow/bdg.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "liangflow/entropy.hpp"
#include "liangflow/error.hpp"

namespace liangflow {

namespace {

constexpr int kMaxDenseDimension = 6000;

using cplx = std::complex<double>;

void check_time(double t) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("evolution time must be finite and non-negative");
}

// Adds -s (q1 q2^T - q2 q1^T): the covariance of one mode in its canonical
// pair basis, s = +1 for the lower-energy filling.
void add_pair(Eigen::MatrixXd& m, const Eigen::VectorXd& q1, const Eigen::VectorXd& q2, double s) {
    m.noalias() -= s * (q1 * q2.transpose());
    m.noalias() += s * (q2 * q1.transpose());
}

} // namespace

MajoranaGenerator compile_bdg(const ChainModel& model) {
    const int n = model.length();
    if (2 * n > kMaxDenseDimension)
        throw ResourceError("Majorana generator above 6000 x 6000");

    MajoranaGenerator gen;
    gen.a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    gen.inert.resize(static_cast<std::size_t>(n));
    for (Site j = 1; j <= n; ++j)
        gen.inert[static_cast<std::size_t>(j - 1)] = model.is_inert(j);

    for (const auto& t : model.terms()) {
        switch (t.kind) {
        case TermKind::CouplingZZ: {
            if (std::abs(t.first - t.second) != 1)
                throw EngineError("pairing engine needs kappa = 0 (nearest-neighbour ZZ only)");
            const int left = std::min(t.first, t.second);
            const int p = 2 * left - 1; // 0-based index of a_{2j}
            gen.a(p, p + 1) += -2.0 * t.amplitude;
            gen.a(p + 1, p) -= -2.0 * t.amplitude;
            break;
        }
        case TermKind::FieldX: {
            const int p = 2 * (t.first - 1); // 0-based index of a_{2j-1}
            gen.a(p, p + 1) += -2.0 * t.amplitude;
            gen.a(p + 1, p) -= -2.0 * t.amplitude;
            break;
        }
        case TermKind::FieldZ:
            if (t.amplitude != 0.0)
                throw EngineError("pairing engine rejects longitudinal fields");
            break;
        case TermKind::HoppingXY:
            throw EngineError("pairing engine handles Ising chains only");
        }
    }
    return gen;
}

CovarianceState ground_covariance(const MajoranaGenerator& gen) {
    const int n = gen.length();
    const int dim = 2 * n;

    std::vector<int> active;
    for (int j = 0; j < n; ++j)
        if (!gen.inert[static_cast<std::size_t>(j)]) {
            active.push_back(2 * j);
            active.push_back(2 * j + 1);
        }
    const int na = static_cast<int>(active.size());

    Eigen::MatrixXd sub(na, na);
    for (int r = 0; r < na; ++r)
        for (int c = 0; c < na; ++c)
            sub(r, c) = gen.a(active[static_cast<std::size_t>(r)], active[static_cast<std::size_t>(c)]);

    struct Pair {
        Eigen::VectorXd q1, q2;
        bool flexible; // zero energy: filling is a free choice
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(n));

    auto embed = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(dim);
        for (int r = 0; r < na; ++r)
            full(active[static_cast<std::size_t>(r)]) = v(r);
        return full;
    };

    bool degenerate = false;
    if (na > 0) {
        const Eigen::MatrixXcd herm = cplx(0.0, 1.0) * sub.cast<cplx>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
        if (es.info() != Eigen::Success)
            throw EngineError("Majorana diagonalisation failed");
        const Eigen::VectorXd& eps = es.eigenvalues();
        const double tol = 1e-10 * std::max(1.0, sub.cwiseAbs().maxCoeff());

        std::vector<int> zero;
        for (int k = 0; k < na; ++k) {
            if (std::abs(eps(k)) <= tol) {
                zero.push_back(k);
            } else if (eps(k) > 0.0) {
                const Eigen::VectorXcd w = std::sqrt(2.0) * es.eigenvectors().col(k);
                // iA w = e w  =>  A u = e v, A v = -e u with w = u + i v;
                // rows (v, u) bring A to e [[0, 1], [-1, 0]].
                pairs.push_back({embed(w.imag()), embed(w.real()), false});
            }
        }
        if (!zero.empty()) {
            degenerate = true;
            Eigen::MatrixXd span(na, 2 * static_cast<Eigen::Index>(zero.size()));
            for (std::size_t k = 0; k < zero.size(); ++k) {
                span.col(2 * static_cast<Eigen::Index>(k)) = es.eigenvectors().col(zero[k]).real();
                span.col(2 * static_cast<Eigen::Index>(k) + 1) = es.eigenvectors().col(zero[k]).imag();
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(span, Eigen::ComputeThinU);
            const int nz = static_cast<int>(zero.size());
            if (nz % 2 != 0)
                throw EngineError("odd number of Majorana zero modes");
            for (int k = 0; k < nz; k += 2)
                pairs.push_back({embed(svd.matrixU().col(k)), embed(svd.matrixU().col(k + 1)), true});
        }
    }
    for (int j = 0; j < n; ++j) {
        if (!gen.inert[static_cast<std::size_t>(j)])
            continue;
        Eigen::VectorXd q1 = Eigen::VectorXd::Zero(dim), q2 = Eigen::VectorXd::Zero(dim);
        q1(2 * j) = 1.0;
        q2(2 * j + 1) = 1.0;
        pairs.push_back({std::move(q1), std::move(q2), true});
    }
    if (static_cast<int>(pairs.size()) != n)
        throw EngineError("Majorana pairing incomplete");

    Eigen::MatrixXd q(dim, dim);
    for (int k = 0; k < n; ++k) {
        q.row(2 * k) = pairs[static_cast<std::size_t>(k)].q1.transpose();
        q.row(2 * k + 1) = pairs[static_cast<std::size_t>(k)].q2.transpose();
    }
    // <P> = det(Q) * prod s_k for the state filled with signs s_k.
    const double det = q.partialPivLu().determinant();
    std::vector<double> signs(static_cast<std::size_t>(n), 1.0);
    int parity = det > 0.0 ? 1 : -1;
    if (parity < 0) {
        // Prefer flipping a genuine zero mode over an inert site's spin.
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            if (pairs[k].flexible) {
                signs[k] = -1.0;
                parity = 1;
                break;
            }
        }
    }

    CovarianceState out;
    out.m = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t k = 0; k < pairs.size(); ++k)
        add_pair(out.m, pairs[k].q1, pairs[k].q2, signs[k]);
    out.degenerate = degenerate;
    out.parity = parity;
    return out;
}

CovarianceState ferromagnetic_cat_covariance(int length) {
    CovarianceState s = ground_covariance(compile_bdg(build_annni(length, 0.0, 0.0)));
    if (s.parity != 1)
        throw EngineError("could not build the even ferromagnetic cat");
    s.degenerate = false;
    return s;
}

BdgPropagator::BdgPropagator(const MajoranaGenerator& gen) {
    const Eigen::MatrixXcd herm = cplx(0.0, 1.0) * gen.a.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    if (es.info() != Eigen::Success)
        throw EngineError("Majorana diagonalisation failed");
    frequencies_ = es.eigenvalues();
    modes_ = es.eigenvectors();
}

Eigen::MatrixXd BdgPropagator::orthogonal(double t) const {
    check_time(t);
    // A = -i W diag(w) W^+  =>  exp(A t) = W diag(e^{-i w t}) W^+.
    const Eigen::VectorXcd phases = (frequencies_.cast<cplx>() * cplx(0.0, -t)).array().exp();
    return (modes_ * phases.asDiagonal() * modes_.adjoint()).real();
}

Eigen::MatrixXd BdgPropagator::rows(std::span<const int> indices, double t) const {
    const Eigen::VectorXcd phases = (frequencies_.cast<cplx>() * cplx(0.0, -t)).array().exp();
    Eigen::MatrixXcd picked(static_cast<Eigen::Index>(indices.size()), modes_.cols());
    for (std::size_t r = 0; r < indices.size(); ++r)
        picked.row(static_cast<Eigen::Index>(r)) = modes_.row(indices[r]);
    return ((picked * phases.asDiagonal()) * modes_.adjoint()).real();
}

CovarianceState BdgPropagator::evolve(const CovarianceState& m0, double t) const {
    check_time(t);
    if (m0.length() != length())
        throw std::invalid_argument("covariance and generator sizes differ");
    if (t == 0.0)
        return m0;
    const Eigen::MatrixXd o = orthogonal(t);
    CovarianceState out = m0;
    out.m = o * m0.m * o.transpose();
    out.time = m0.time + t;
    return out;
}

double BdgPropagator::pair_element(const CovarianceState& m0, Site j, double t) const {
    check_time(t);
    if (j < 1 || j > length())
        throw std::out_of_range("site outside chain");
    if (t == 0.0)
        return m0.m(2 * j - 2, 2 * j - 1);
    const int idx[] = {2 * j - 2, 2 * j - 1};
    const Eigen::MatrixXd r = rows(idx, t);
    return r.row(0).dot(m0.m * r.row(1).transpose());
}

std::vector<double> BdgPropagator::pair_elements(const CovarianceState& m0, std::span<const Site> sites,
                                                 double t) const {
    check_time(t);
    if (m0.length() != length())
        throw std::invalid_argument("covariance and generator sizes differ");
    std::vector<int> idx;
    idx.reserve(2 * sites.size());
    for (Site j : sites) {
        if (j < 1 || j > length())
            throw std::out_of_range("site outside chain");
        idx.push_back(2 * j - 2);
        idx.push_back(2 * j - 1);
    }
    std::vector<double> out;
    out.reserve(sites.size());
    if (t == 0.0) {
        for (std::size_t k = 0; k < sites.size(); ++k)
            out.push_back(m0.m(idx[2 * k], idx[2 * k + 1]));
        return out;
    }
    const Eigen::MatrixXd r = rows(idx, t);
    const Eigen::MatrixXd rm = r * m0.m;
    for (std::size_t k = 0; k < sites.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(2 * k);
        out.push_back(rm.row(row).dot(r.row(row + 1)));
    }
    return out;
}

CovarianceState evolve_bdg(const MajoranaGenerator& gen, const CovarianceState& m0, double t) {
    check_time(t);
    if (m0.length() != gen.length())
        throw std::invalid_argument("covariance and generator sizes differ");
    if (t == 0.0)
        return m0;
    return BdgPropagator(gen).evolve(m0, t);
}

double site_magnetization(const CovarianceState& m, Site j) {
    if (j < 1 || j > m.length())
        throw std::out_of_range("site outside chain");
    return -m.m(2 * j - 2, 2 * j - 1);
}

double site_entropy_bdg(const CovarianceState& m, Site j) {
    return bloch_entropy(site_magnetization(m, j));
}

Eigen::VectorXd quasiparticle_energies(const MajoranaGenerator& gen) {
    const Eigen::MatrixXcd herm = cplx(0.0, 1.0) * gen.a.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw EngineError("Majorana diagonalisation failed");
    const int n = gen.length();
    return es.eigenvalues().tail(n).cwiseAbs();
}

} // namespace liangflow
