#include "liangflow/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "liangflow/error.hpp"

namespace liangflow {

namespace {

using cplx = std::complex<double>;

template <class Vec>
void csr_apply(const Eigen::SparseMatrix<double, Eigen::RowMajor>& m, const Vec& in, Vec& out) {
    out.resize(m.rows());
    const auto* outer = m.outerIndexPtr();
    const auto* inner = m.innerIndexPtr();
    const auto* vals = m.valuePtr();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        typename Vec::Scalar acc(0);
        for (auto k = outer[r]; k < outer[r + 1]; ++k)
            acc += vals[k] * in(inner[k]);
        out(r) = acc;
    }
}

int length_from_dimension(Eigen::Index dim) {
    if (dim <= 0 || (dim & (dim - 1)) != 0)
        throw std::invalid_argument("state dimension is not a power of two");
    return std::countr_zero(static_cast<std::uint64_t>(dim));
}

void check_site(Site j, int length) {
    if (j < 1 || j > length)
        throw std::out_of_range("site outside chain");
}

// Deterministic start vector with overlap on every basis state. Different
// salts give independent directions inside degenerate eigenspaces.
Eigen::VectorXd start_vector(Eigen::Index dim, int salt) {
    Eigen::VectorXd v(dim);
    const double phase = 0.3 + 1.1 * salt;
    for (Eigen::Index i = 0; i < dim; ++i)
        v(i) = 1.0 + 0.5 * std::cos(0.7548776662 * static_cast<double>(i) + phase * static_cast<double>(i % 7));
    return v.normalized();
}

void project_sector(Eigen::VectorXd& v, FlipSector sector, std::uint64_t mask) {
    if (sector == FlipSector::Any)
        return;
    const auto dim = static_cast<std::uint64_t>(v.size());
    const double sign = sector == FlipSector::Even ? 1.0 : -1.0;
    for (std::uint64_t i = 0; i < dim; ++i) {
        const std::uint64_t j = i ^ mask;
        if (i < j) {
            const double sym = 0.5 * (v(static_cast<Eigen::Index>(i)) + sign * v(static_cast<Eigen::Index>(j)));
            v(static_cast<Eigen::Index>(i)) = sym;
            v(static_cast<Eigen::Index>(j)) = sign * sym;
        }
    }
}

struct LanczosResult {
    double value;
    Eigen::VectorXd vector;
    double residual;
};

// Lowest eigenpair in the sector, orthogonal to `deflate`.
LanczosResult lanczos_lowest(const ManyBodyHamiltonian& h, FlipSector sector,
                             const std::vector<Eigen::VectorXd>& deflate, const LanczosOptions& opt) {
    const Eigen::Index dim = h.dimension();
    auto clean = [&](Eigen::VectorXd& v) {
        project_sector(v, sector, h.flip_mask);
        for (const auto& d : deflate)
            v -= d.dot(v) * d;
    };

    // A deflated run needs a fresh start: Krylov spaces of the first start
    // vector hold one direction per eigenvalue and miss exact degeneracies.
    Eigen::VectorXd x = start_vector(dim, static_cast<int>(deflate.size()));
    clean(x);
    if (x.norm() < 1e-12)
        throw EngineError("Lanczos start vector vanishes in the requested sector");
    x.normalize();

    const int m_max = static_cast<int>(std::min<Eigen::Index>(opt.krylov_dimension, dim));
    Eigen::MatrixXd basis(dim, m_max);
    Eigen::VectorXd w;
    double best_residual = std::numeric_limits<double>::infinity();

    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        std::vector<double> alpha, beta;
        basis.col(0) = x;
        int k = 0;
        for (; k < m_max; ++k) {
            h.apply(Eigen::VectorXd(basis.col(k)), w);
            clean(w);
            const double a = basis.col(k).dot(w);
            alpha.push_back(a);
            // Full reorthogonalisation, twice.
            for (int pass = 0; pass < 2; ++pass)
                w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);
            const double b = w.norm();
            if (k + 1 == m_max || b < 1e-13)
                break;
            beta.push_back(b);
            basis.col(k + 1) = w / b;
        }
        const int size = static_cast<int>(alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
        for (int i = 0; i < size; ++i) {
            t(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < size)
                t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        x = basis.leftCols(size) * es.eigenvectors().col(0);
        clean(x);
        x.normalize();

        h.apply(x, w);
        const double rayleigh = x.dot(w);
        const double residual = (w - rayleigh * x).norm();
        best_residual = std::min(best_residual, residual);
        if (residual < opt.residual_tolerance || size == dim)
            return {rayleigh, x, residual};
    }
    throw EngineError("Lanczos did not converge (best residual " + std::to_string(best_residual) + ")");
}

} // namespace

void ManyBodyHamiltonian::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    csr_apply(matrix, in, out);
}

void ManyBodyHamiltonian::apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
    csr_apply(matrix, in, out);
}

int PureStateVector::length() const { return length_from_dimension(amplitudes.size()); }

ManyBodyHamiltonian assemble(const ChainModel& model, int max_sites) {
    const int n = model.length();
    if (n > max_sites)
        throw ResourceError("exact engine limited to L <= " + std::to_string(max_sites) + " (got " +
                            std::to_string(n) + ")");
    const std::uint64_t dim = std::uint64_t{1} << n;

    std::vector<double> diagonal(dim, 0.0);
    std::vector<Eigen::Triplet<double>> off;
    auto z = [](std::uint64_t state, Site s) { return (state >> (s - 1)) & 1U ? 1.0 : -1.0; };

    std::uint64_t flip_mask = dim - 1;
    for (const auto& t : model.terms())
        if (t.kind == TermKind::FieldZ && t.amplitude != 0.0)
            flip_mask &= ~(std::uint64_t{1} << (t.first - 1));
    bool flip_symmetric = flip_mask != 0;
    for (const auto& t : model.terms()) {
        if (!t.is_field()) {
            const bool in_first = (flip_mask >> (t.first - 1)) & 1U;
            const bool in_second = (flip_mask >> (t.second - 1)) & 1U;
            if (in_first != in_second)
                flip_symmetric = false;
        }
    }
    for (const auto& t : model.terms()) {
        switch (t.kind) {
        case TermKind::CouplingZZ:
            for (std::uint64_t s = 0; s < dim; ++s)
                diagonal[s] += t.amplitude * z(s, t.first) * z(s, t.second);
            break;
        case TermKind::FieldZ:
            for (std::uint64_t s = 0; s < dim; ++s)
                diagonal[s] += t.amplitude * z(s, t.first);
            break;
        case TermKind::FieldX: {
            const std::uint64_t mask = std::uint64_t{1} << (t.first - 1);
            for (std::uint64_t s = 0; s < dim; ++s)
                off.emplace_back(static_cast<int>(s ^ mask), static_cast<int>(s), t.amplitude);
            break;
        }
        case TermKind::HoppingXY: {
            // (XX + YY)|01> = 2|10>; zero on aligned pairs.
            const std::uint64_t mask = (std::uint64_t{1} << (t.first - 1)) | (std::uint64_t{1} << (t.second - 1));
            for (std::uint64_t s = 0; s < dim; ++s) {
                const std::uint64_t bits = s & mask;
                if (bits != 0 && bits != mask)
                    off.emplace_back(static_cast<int>(s ^ mask), static_cast<int>(s), 2.0 * t.amplitude);
            }
            break;
        }
        }
    }
    for (std::uint64_t s = 0; s < dim; ++s)
        if (diagonal[s] != 0.0)
            off.emplace_back(static_cast<int>(s), static_cast<int>(s), diagonal[s]);

    ManyBodyHamiltonian h;
    h.length = n;
    h.flip_symmetric = flip_symmetric;
    h.flip_mask = flip_symmetric ? flip_mask : 0;
    h.norm_bound = model.norm_bound();
    h.matrix.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    h.matrix.setFromTriplets(off.begin(), off.end());
    h.matrix.makeCompressed();
    return h;
}

GroundState ground_state(const ManyBodyHamiltonian& h, FlipSector sector, const LanczosOptions& options) {
    if (sector != FlipSector::Any && !h.flip_symmetric)
        throw std::invalid_argument("flip sector requested for a Hamiltonian without flip symmetry");

    const LanczosResult lowest = lanczos_lowest(h, sector, {}, options);

    GroundState gs;
    gs.energy = lowest.value;
    gs.residual = lowest.residual;
    gs.state.amplitudes = lowest.vector.cast<cplx>();

    // Sector dimension 1 (L = 1 corner cases) has no excited level.
    const Eigen::Index sector_dim = sector == FlipSector::Any ? h.dimension() : h.dimension() / 2;
    if (sector_dim > 1) {
        LanczosOptions loose = options;
        loose.residual_tolerance = std::max(options.residual_tolerance, 1e-8);
        const LanczosResult next = lanczos_lowest(h, sector, {lowest.vector}, loose);
        gs.gap = next.value - lowest.value;
    } else {
        gs.gap = std::numeric_limits<double>::infinity();
    }
    gs.degenerate = gs.gap < options.degeneracy_gap;
    return gs;
}

PureStateVector evolve_exact(const ManyBodyHamiltonian& h, const PureStateVector& psi0, double t, double tolerance) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("evolution time must be finite and non-negative");
    if (psi0.amplitudes.size() != h.dimension())
        throw std::invalid_argument("state and Hamiltonian dimensions differ");

    PureStateVector psi = psi0;
    psi.time = psi0.time + t;
    if (t == 0.0)
        return psi;

    const Eigen::Index dim = h.dimension();
    const int m_max = static_cast<int>(std::min<Eigen::Index>(30, dim));
    Eigen::MatrixXcd basis(dim, m_max);
    Eigen::VectorXcd w;

    double remaining = t;
    double tau = std::min(t, 1.0);
    const double min_step = 1e-12 * std::max(1.0, t);

    while (remaining > 0.0) {
        const double scale = psi.amplitudes.norm();
        basis.col(0) = psi.amplitudes / scale;
        std::vector<double> alpha, beta;
        double tail = 0.0; // beta_m: residual coupling out of the subspace
        for (int k = 0; k < m_max; ++k) {
            h.apply(Eigen::VectorXcd(basis.col(k)), w);
            const double a = basis.col(k).dot(w).real();
            alpha.push_back(a);
            for (int pass = 0; pass < 2; ++pass)
                w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).adjoint() * w);
            const double b = w.norm();
            if (b < 1e-13) {
                tail = 0.0;
                break;
            }
            if (k + 1 == m_max) {
                tail = b;
                break;
            }
            beta.push_back(b);
            basis.col(k + 1) = w / b;
        }
        const int size = static_cast<int>(alpha.size());
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(size, size);
        for (int i = 0; i < size; ++i) {
            tri(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < size)
                tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        const Eigen::MatrixXcd s = es.eigenvectors().cast<cplx>();
        const Eigen::VectorXcd first = s.row(0).transpose();

        tau = std::min(tau, remaining);
        Eigen::VectorXcd coeff;
        double err = 0.0;
        for (;;) {
            const Eigen::VectorXcd phases = (es.eigenvalues().cast<cplx>() * cplx(0.0, -tau)).array().exp();
            coeff = s * phases.cwiseProduct(first);
            err = tail * std::abs(coeff(size - 1));
            if (err <= tolerance * tau / std::max(t, tau))
                break;
            tau *= 0.5;
            if (tau < min_step)
                throw EngineError("Krylov step size underflow");
        }
        psi.amplitudes = scale * (basis.leftCols(size) * coeff);
        remaining -= tau;
        if (remaining < min_step)
            remaining = 0.0;
        if (err < 0.01 * tolerance * tau / std::max(t, tau))
            tau *= 1.5;
    }
    return psi;
}

Eigen::Matrix2cd single_site_rdm(const PureStateVector& psi, Site j) {
    const int n = psi.length();
    check_site(j, n);
    const std::uint64_t mask = std::uint64_t{1} << (j - 1);
    const auto dim = static_cast<std::uint64_t>(psi.amplitudes.size());

    double p0 = 0.0, p1 = 0.0;
    cplx coherence = 0.0;
    for (std::uint64_t s = 0; s < dim; ++s) {
        if (s & mask)
            continue;
        const cplx down = psi.amplitudes(static_cast<Eigen::Index>(s));
        const cplx up = psi.amplitudes(static_cast<Eigen::Index>(s | mask));
        p0 += std::norm(down);
        p1 += std::norm(up);
        coherence += down * std::conj(up);
    }
    Eigen::Matrix2cd rho;
    rho << p0, coherence, std::conj(coherence), p1;
    return rho;
}

double entropy_2x2(const Eigen::Matrix2cd& rho) {
    constexpr double tol = 1e-10;
    if (std::abs(rho(0, 1) - std::conj(rho(1, 0))) > tol || std::abs(rho(0, 0).imag()) > tol ||
        std::abs(rho(1, 1).imag()) > tol)
        throw EngineError("density matrix is not Hermitian");
    const double a = rho(0, 0).real();
    const double d = rho(1, 1).real();
    const double trace = a + d;
    if (std::abs(trace - 1.0) > tol)
        throw EngineError("density matrix trace " + std::to_string(trace) + " differs from 1");
    const double radius = std::sqrt((a - d) * (a - d) + 4.0 * std::norm(rho(0, 1)));
    const double lo = 0.5 * (trace - radius);
    const double hi = 0.5 * (trace + radius);
    if (lo < -tol)
        throw EngineError("density matrix is not positive semidefinite");
    double s = 0.0;
    for (double lam : {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)})
        if (lam > 0.0)
            s -= lam * std::log(lam);
    return s;
}

GroundState model_ground_state(const ChainModel& model, const LanczosOptions& options) {
    std::vector<Term> terms = model.terms();
    for (Site j = 1; j <= model.length(); ++j)
        if (model.is_inert(j))
            terms.push_back({TermKind::FieldZ, j, j, -1.0});
    const ChainModel pinned(model.length(), model.kind(), std::move(terms), model.params());
    const ManyBodyHamiltonian h = assemble(pinned, kMaxGroundStateSites);
    return ground_state(h, h.flip_symmetric ? FlipSector::Even : FlipSector::Any, options);
}

double energy_expectation(const ManyBodyHamiltonian& h, const PureStateVector& psi) {
    Eigen::VectorXcd w;
    h.apply(psi.amplitudes, w);
    return psi.amplitudes.dot(w).real();
}

PureStateVector basis_state(int length, std::uint64_t index) {
    if (length < 1 || length > kMaxGroundStateSites)
        throw ResourceError("basis state length outside [1, 16]");
    const auto dim = std::uint64_t{1} << length;
    if (index >= dim)
        throw std::out_of_range("basis index outside Hilbert space");
    PureStateVector psi;
    psi.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    psi.amplitudes(static_cast<Eigen::Index>(index)) = 1.0;
    return psi;
}

PureStateVector neel_product_state(int length) {
    std::uint64_t index = 0;
    for (int j = 0; j < length; j += 2)
        index |= std::uint64_t{1} << j;
    return basis_state(length, index);
}

PureStateVector all_down_state(int length) { return basis_state(length, 0); }

PureStateVector ferromagnetic_cat_state(int length) {
    PureStateVector psi = basis_state(length, 0);
    const Eigen::Index top = psi.amplitudes.size() - 1;
    psi.amplitudes(0) = 1.0 / std::sqrt(2.0);
    psi.amplitudes(top) = 1.0 / std::sqrt(2.0);
    return psi;
}

} // namespace liangflow
