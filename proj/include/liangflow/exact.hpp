#pragma once

// Many-body exact engine in the sigma^z product basis. Basis index bit (j-1)
// holds site j; a set bit is spin up (Z = +1), i.e. an occupied fermion.
//
// All model Hamiltonians here are real symmetric in this basis, so the matrix
// is stored real and applied to complex vectors.

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "liangflow/model.hpp"

namespace liangflow {

inline constexpr int kMaxDynamicsSites = 14;
inline constexpr int kMaxGroundStateSites = 16;

struct ManyBodyHamiltonian {
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    int length = 0;
    // Commutes with prod_{j in flip_mask} X_j. The mask holds the sites free
    // of Z fields; the flip is a symmetry when every bond lies inside or
    // outside it.
    bool flip_symmetric = false;
    std::uint64_t flip_mask = 0;
    double norm_bound = 0.0;

    Eigen::Index dimension() const { return matrix.rows(); }

    void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
    void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
};

struct PureStateVector {
    Eigen::VectorXcd amplitudes;
    double time = 0.0;

    int length() const;
};

// Throws ResourceError when L exceeds max_sites.
ManyBodyHamiltonian assemble(const ChainModel& model, int max_sites = kMaxDynamicsSites);

enum class FlipSector { Any, Even, Odd };

struct LanczosOptions {
    double residual_tolerance = 1e-10;
    int krylov_dimension = 120;
    int max_restarts = 60;
    // Gaps below this mark the ground state as degenerate.
    double degeneracy_gap = 1e-6;
};

struct GroundState {
    PureStateVector state;
    double energy = 0.0;
    double gap = 0.0;      // to the next level in the same sector
    double residual = 0.0; // ||H psi - E psi||
    bool degenerate = false;
};

// Restarted Lanczos with full reorthogonalisation. A sector other than Any
// requires a flip-symmetric Hamiltonian. Throws EngineError on
// non-convergence.
GroundState ground_state(const ManyBodyHamiltonian& h, FlipSector sector = FlipSector::Any,
                         const LanczosOptions& options = {});

// psi(t) = exp(-i H t) psi0 by Krylov steps with adaptive step size; the
// accumulated error estimate stays below tolerance (2-norm).
PureStateVector evolve_exact(const ManyBodyHamiltonian& h, const PureStateVector& psi0, double t,
                             double tolerance = 1e-9);

// Reduced state of site j; rows and columns indexed by the site's bit
// (0 = down, 1 = up).
Eigen::Matrix2cd single_site_rdm(const PureStateVector& psi, Site j);

// Von Neumann entropy (nats). Throws EngineError when rho is not Hermitian,
// not unit trace, or not positive within 1e-10.
double entropy_2x2(const Eigen::Matrix2cd& rho);

// Ground state of a model with the engine's policies applied: inert
// (frozen) spins are pinned up by a unit field so their free orientation does
// not register as degeneracy, and flip-symmetric models are solved in the
// even sector. Size guard kMaxGroundStateSites.
GroundState model_ground_state(const ChainModel& model, const LanczosOptions& options = {});

double energy_expectation(const ManyBodyHamiltonian& h, const PureStateVector& psi);

PureStateVector basis_state(int length, std::uint64_t index);
// Odd sites up.
PureStateVector neel_product_state(int length);
// |down down ... down>.
PureStateVector all_down_state(int length);
// (|up...up> + |down...down>)/sqrt(2).
PureStateVector ferromagnetic_cat_state(int length);

} // namespace liangflow
