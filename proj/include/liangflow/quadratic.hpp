#pragma once

// Number-conserving free fermions. After Jordan-Wigner (spin up = occupied),
//   J (X_j X_{j+1} + Y_j Y_{j+1}) -> 2J (c_j^+ c_{j+1} + h.c.)
//   h Z_j                          -> 2h n_j - h
// so H = sum_jk h_jk c_j^+ c_k + const with h_{j,j+1} = 2J and h_jj = 2h.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "liangflow/model.hpp"

namespace liangflow {

struct SingleParticleMatrix {
    Eigen::MatrixXd h; // real symmetric, L x L
    ModelKind source = ModelKind::Aah;

    int length() const { return static_cast<int>(h.rows()); }
};

// C_jk = <c_j^+ c_k>.
struct CorrelationState {
    Eigen::MatrixXcd c;
    double time = 0.0;

    int length() const { return static_cast<int>(c.rows()); }
};

// Rejects models with ZZ bonds or X fields (no U(1) symmetry).
SingleParticleMatrix compile_u1(const ChainModel& model);

// Odd sites occupied: C = diag(1, 0, 1, 0, ...).
CorrelationState neel_state(int length);

// Spectral decomposition of h, computed once and reused for every time.
class U1Propagator {
public:
    explicit U1Propagator(const SingleParticleMatrix& h);

    int length() const { return static_cast<int>(energies_.size()); }
    const Eigen::VectorXd& energies() const { return energies_; }
    const Eigen::MatrixXd& modes() const { return modes_; }

    // U(t) = exp(-i h t).
    Eigen::MatrixXcd single_particle_propagator(double t) const;
    // C(t) = conj(U) C0 U^T. O(L^3).
    CorrelationState evolve(const CorrelationState& c0, double t) const;

private:
    Eigen::VectorXd energies_;
    Eigen::MatrixXd modes_;
};

CorrelationState evolve_u1(const SingleParticleMatrix& h, const CorrelationState& c0, double t);

// Site occupations from a fixed initial state. C0 is factorised once as
// W diag(w) W^+, and n_j(t) = sum_a w_a |(V e^{iDt} V^T W)_{ja}|^2 costs
// O(L * rank) per site and time.
class U1Trajectory {
public:
    U1Trajectory(const U1Propagator& propagator, const CorrelationState& c0);

    double occupation(Site j, double t) const;
    std::vector<double> occupations(std::span<const Site> sites, double t) const;

private:
    const U1Propagator* propagator_;
    Eigen::VectorXd initial_occupations_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXcd projected_; // V^T W
};

// Single-site entropy (nats) of a number-conserving state: rho_j is diagonal
// with occupation Re C_jj.
double site_entropy_u1(const CorrelationState& c, Site j);

} // namespace liangflow
