#pragma once

// Symbolic spin-chain Hamiltonians.
//
// Sites are 1-based throughout the library: site j carries the quasiperiodic
// field cos(2*pi*beta*j) with j = 1..L. Shifting to 0-based indexing changes
// every field value, so all public APIs take and return 1-based sites.
//
// Term amplitudes are coefficients of Pauli operators. A ChainModel is the
// single description every engine (quadratic, bdg, exact) compiles from.

#include <cmath>
#include <numbers>
#include <vector>

namespace liangflow {

using Site = int;

enum class ModelKind { Aah, Annni };

enum class TermKind {
    HoppingXY,  // amplitude * (X_i X_j + Y_i Y_j)
    CouplingZZ, // amplitude * Z_i Z_j
    FieldX,     // amplitude * X_i
    FieldZ,     // amplitude * Z_i
};

struct Term {
    TermKind kind;
    Site first;
    Site second; // equals first for single-site fields
    double amplitude;

    bool is_field() const { return kind == TermKind::FieldX || kind == TermKind::FieldZ; }
    bool touches(Site s) const { return first == s || second == s; }

    friend bool operator==(const Term&, const Term&) = default;
};

// How the AAH couplings are normalised. SpinHalf reads the model with
// spin-1/2 operators S = sigma/2 (hopping 1/2, potential lambda/2 after
// Jordan-Wigner, localization at lambda = 2). Pauli uses the Pauli matrices
// literally (hopping 2, potential lambda, localization at lambda = 4).
enum class AahNormalization { SpinHalf, Pauli };

// Parameters the model was built from; carried for provenance and output.
struct ModelParams {
    double lambda = 0.0;
    double beta = 0.0;
    double kappa = 0.0;
    double field = 0.0; // transverse field B
    double tilt = 0.0;  // longitudinal field epsilon
    AahNormalization normalization = AahNormalization::SpinHalf;
};

class ChainModel {
public:
    // Validates site ranges and bond ranges (distinct sites, |i-j| <= 2).
    ChainModel(int length, ModelKind kind, std::vector<Term> terms, ModelParams params = {});

    int length() const { return length_; }
    ModelKind kind() const { return kind_; }
    const std::vector<Term>& terms() const { return terms_; }
    const ModelParams& params() const { return params_; }

    // True when no term acts on the site (a frozen spectator, for example).
    bool is_inert(Site s) const;
    bool has_term(TermKind kind) const;
    // True when some ZZ or XY bond spans two lattice spacings.
    bool has_next_nearest() const;
    // Sum of |amplitude| weighted by operator norm; bounds ||H||.
    double norm_bound() const;

private:
    int length_;
    ModelKind kind_;
    std::vector<Term> terms_;
    ModelParams params_;
};

// Set of frozen sites. Operations currently accept exactly one site.
struct FrozenMask {
    std::vector<Site> sites;

    static FrozenMask single(Site s) { return FrozenMask{{s}}; }
};

inline constexpr double kInverseGoldenRatio = std::numbers::phi - 1.0;

ChainModel build_aah(int length, double lambda, double beta = kInverseGoldenRatio,
                     AahNormalization normalization = AahNormalization::SpinHalf);

// -sum Z_j Z_{j+1} + kappa sum Z_j Z_{j+2} - B sum X_j + tilt sum Z_j.
ChainModel build_annni(int length, double kappa, double field, double tilt = 0.0);

// Removes every term touching a frozen site, including its own fields. The
// site stays in the lattice so indices line up between frozen and free runs.
ChainModel freeze(const ChainModel& model, const FrozenMask& mask);

// F + 1 for the largest Fibonacci number F strictly below L.
Site fibonacci_frozen_site(int length);

// ceil(L/2).
Site middle_site(int length);

struct CriticalPoint {
    double kappa;
    double field;
};

// Residual of 1 - 2k = B - B^2 k / (2 - 2k).
double critical_line_residual(double kappa, double field);

// Transverse field on the ANNNI ferro/para line, on the branch through B = 1
// at kappa = 0. Requires kappa in [0, 0.5).
double critical_field(double kappa);
CriticalPoint critical_point(double kappa);

} // namespace liangflow
