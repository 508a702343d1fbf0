#pragma once

// Transverse-field Ising chains (kappa = 0, no longitudinal field) as
// quadratic Majorana forms.
//
// After the rotation X -> Z, Z -> -X and Jordan-Wigner with
//   a_{2j-1} = (prod_{l<j} Z_l) X_j,   a_{2j} = (prod_{l<j} Z_l) Y_j
// (rotated frame), the chain reads H = (i/4) sum_mn A_mn a_m a_n with
//   J Z_j Z_{j+1} (original)  ->  A_{2j,2j+1}  = -2J
//   h X_j         (original)  ->  A_{2j-1,2j}  = -2h
// Majorana indices above are 1-based; matrices are stored 0-based.
//
// Covariance M_mn = (i/2)<[a_m, a_n]>; the rotated-frame magnetisation is
// <Z_j> = -M_{2j-1,2j}, and a single site's reduced state is fixed by it.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "liangflow/model.hpp"

namespace liangflow {

struct MajoranaGenerator {
    Eigen::MatrixXd a; // 2L x 2L, antisymmetric
    std::vector<bool> inert; // per site: no term touches it

    int length() const { return static_cast<int>(a.rows() / 2); }
};

struct CovarianceState {
    Eigen::MatrixXd m; // 2L x 2L, antisymmetric
    double time = 0.0;
    // Set by ground_covariance when a zero mode (outside inert sites) made the
    // ground state ambiguous; the even-parity state was chosen.
    bool degenerate = false;
    // <prod_j Z_j> (rotated frame) = <prod_j X_j> (original frame); +1 or -1
    // for ground states, 0 when not computed.
    int parity = 0;

    int length() const { return static_cast<int>(m.rows() / 2); }
};

// Accepts NN ZZ bonds and X fields only. Next-nearest-neighbour bonds,
// Z fields and XY hopping are rejected.
MajoranaGenerator compile_bdg(const ChainModel& model);

// Ground state of the quadratic form. Inert sites are paired on-site; zero
// modes elsewhere are flagged and filled to give even total parity.
CovarianceState ground_covariance(const MajoranaGenerator& gen);

// Z2-even ferromagnet (|up...up> + |down...down>)/sqrt(2) of the original
// frame: the even-parity ground state of -sum Z_j Z_{j+1}.
CovarianceState ferromagnetic_cat_covariance(int length);

// exp(A t) from one eigendecomposition of the Hermitian matrix iA.
class BdgPropagator {
public:
    explicit BdgPropagator(const MajoranaGenerator& gen);

    int length() const { return static_cast<int>(frequencies_.size() / 2); }

    Eigen::MatrixXd orthogonal(double t) const;
    CovarianceState evolve(const CovarianceState& m0, double t) const;
    // M(t)_{2j-1,2j} without forming M(t): O(L^2) per call.
    double pair_element(const CovarianceState& m0, Site j, double t) const;
    std::vector<double> pair_elements(const CovarianceState& m0, std::span<const Site> sites, double t) const;

private:
    Eigen::MatrixXd rows(std::span<const int> indices, double t) const;

    Eigen::VectorXd frequencies_;
    Eigen::MatrixXcd modes_;
};

CovarianceState evolve_bdg(const MajoranaGenerator& gen, const CovarianceState& m0, double t);

// Rotated-frame <Z_j> of the state.
double site_magnetization(const CovarianceState& m, Site j);

// Single-site entropy (nats) from m = M_{2j-1,2j}: eigenvalues (1 +- m)/2.
double site_entropy_bdg(const CovarianceState& m, Site j);

// Single-particle excitation energies (non-negative, ascending); the gap of
// the many-body spectrum is the smallest one.
Eigen::VectorXd quasiparticle_energies(const MajoranaGenerator& gen);

} // namespace liangflow
