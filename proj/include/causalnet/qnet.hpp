#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "causalnet/geometry.hpp"

namespace causalnet::qnet {

using Matrix = Eigen::MatrixXcd;

inline constexpr double kAlgTol = 1e-10;   // operator invariants (P^2 = P, trace 1, ...)
inline constexpr double kExpTol = 1e-9;    // expectation-value comparisons
inline constexpr double kGapTol = 1e-8;    // eigenvalue clustering gap
inline constexpr int kDimCap = 64;         // ambient matrix dimension cap

// Hilbert-Schmidt inner product tr(a^dagger b)
std::complex<double> hs_inner(const Matrix& a, const Matrix& b);
double hs_norm(const Matrix& a);

/// Unital *-subalgebra of the ambient d x d matrix algebra, held as an
/// orthonormal Hilbert-Schmidt basis of its linear span. Membership,
/// inclusion and equality are all span computations against that basis.
class Subalgebra {
  public:
    static Subalgebra generated(int dim, const std::vector<Matrix>& generators);
    static Subalgebra full(int dim);
    static Subalgebra trivial(int dim);  // multiples of the unit

    int ambient_dim() const { return dim_; }
    std::size_t linear_dim() const { return basis_.size(); }
    const std::vector<Matrix>& basis() const { return basis_; }

    bool contains(const Matrix& x, double tol = kAlgTol) const;
    Matrix project(const Matrix& x) const;  // HS-orthogonal projection onto the span
    bool contains_algebra(const Subalgebra& other, double tol = kAlgTol) const;
    bool equals(const Subalgebra& other, double tol = kAlgTol) const;
    bool is_abelian(double tol = kAlgTol) const;

  private:
    int dim_ = 0;
    std::vector<Matrix> basis_;
};

// commutant within the ambient matrix algebra
Subalgebra commutant(const Subalgebra& a);
Subalgebra generated_union(const Subalgebra& a, const Subalgebra& b);
// linear-span intersection (an algebra again for unital *-subalgebras)
Subalgebra intersection(const Subalgebra& a, const Subalgebra& b);

bool is_projection(const Matrix& p, double tol = kAlgTol);

/// Maximal atomic decomposition of the unit: one minimal projection of the
/// algebra per spectral cluster of a generic self-adjoint element. Eigenvalue
/// clusters are split at the documented gap threshold; degenerate draws are
/// retried from the seed.
std::vector<Matrix> maximal_atomic_partition(const Subalgebra& a, std::uint64_t seed = 1);
// a Haar-ish unitary from the algebra itself (phases of a generic element)
Matrix algebra_unitary(const Subalgebra& a, std::uint64_t seed);

struct Projection {
    Matrix matrix;
    geometry::Region region;
};

struct DensityState {
    Matrix rho;

    void validate(double tol = kAlgTol) const;  // hermitian, positive, trace one
};

struct PartitionOfUnit {
    std::vector<Matrix> projections;
    geometry::Region region;

    void validate(double tol = kAlgTol) const;  // orthogonal projections summing to 1
};

double expectation(const DensityState& phi, const Matrix& x);

// phi composed with the non-selective projective measurement sum_k A_k X A_k
DensityState nonselective(const DensityState& phi, const PartitionOfUnit& part);
// Lueders projection phi_A(X) = phi(AXA)/phi(A); throws ZeroProbability
DensityState selective(const DensityState& phi, const Matrix& projection);

// --- finite nets ------------------------------------------------------------

struct NetRegion {
    geometry::Region region;
    Subalgebra algebra;
};

struct FiniteNet {
    int dim = 0;
    std::vector<NetRegion> regions;

    const Subalgebra& algebra(const geometry::Region& r) const;  // throws MissingRegion
    bool has_region(const geometry::Region& r) const;
    Subalgebra quasilocal() const;
};

/// Abelian net of the lattice model on a small window: each region carries the
/// diagonal algebra of cylinder events over its cones. With `lpc_closure` the
/// region is first closed to V'' inside the window, which restores local
/// primitive causality.
FiniteNet ising_net(const geometry::Region& window, bool lpc_closure = false);
/// Two tensor factors of M2 sitting on two spacelike cones, plus their join.
FiniteNet two_qubit_net(geometry::MinimalCone a, geometry::MinimalCone b);

// reduced density operator of phi on the subalgebra (HS projection of rho)
Matrix reduced_density(const DensityState& phi, const Subalgebra& n);
// strict positivity of the reduced density operator
bool locally_faithful(const DensityState& phi, const Subalgebra& n, double tol = kAlgTol);
bool locally_faithful(const FiniteNet& net, const DensityState& phi, double tol = kAlgTol);

// --- axiom and causality checks ----------------------------------------------

bool check_isotony(const FiniteNet& net);
bool check_microcausality(const FiniteNet& net);
// N(V1) /\ N(V2) = N(V1 /\ V2) for spacelike pairs (trivial algebra if disjoint)
bool check_intersection_property(const FiniteNet& net);
// A(V')' /\ A = A(V), with A(V') generated by the net regions spacelike to V
bool check_haag_duality(const FiniteNet& net);
// A(V'') = A(V) for every region whose V'' stays inside the net
bool check_local_primitive_causality(const FiniteNet& net);
// the algebras covering one Cauchy segment already generate the quasilocal one
bool check_primitive_causality(const FiniteNet& net,
                               const std::vector<geometry::Region>& cauchy_cover);

/// phi_{A_k}(B) = phi(B) for a decomposition of the unit in N(V_A) and a
/// projection supported in V_B.
bool check_no_signaling(const FiniteNet& net, const DensityState& phi,
                        const PartitionOfUnit& part, const Projection& b);

struct OutcomeIndependenceReport {
    bool holds = false;          // phi_A(B) = phi(B)
    bool product_state = false;  // phi factorizes across the two local algebras
};
OutcomeIndependenceReport check_outcome_independence(const FiniteNet& net,
                                                     const DensityState& phi,
                                                     const Projection& a,
                                                     const Projection& b);

struct DeterminismReport {
    bool antecedent = false;  // states agree on N(V)
    bool consequent = false;  // states agree on the implied larger algebra
    bool holds() const { return !antecedent || consequent; }
};
// local determinism: agreement on N(V) propagates to N(V'')
DeterminismReport check_local_determinism(const FiniteNet& net, const DensityState& phi1,
                                          const DensityState& phi2, const geometry::Region& v);
// stochastic Einstein locality: agreement on N(V_C) fixes projections in N(V_A)
DeterminismReport check_sel(const FiniteNet& net, const DensityState& phi1,
                            const DensityState& phi2, const geometry::Region& vC,
                            const geometry::Region& vA);

/// Screening by minimal projections of N(V_C): for minimal C the sandwich
/// CAC = r(C,A) C collapses conditioning to a number, so
/// phi_C(AB) = phi_C(A) phi_C(B) whenever A already lives in N(V_C) and C
/// commutes with B. Checks the canonical maximal atomic partition plus seeded
/// unitary rotations of it.
struct Prop1Report {
    bool preconditions_ok = false;
    std::string failed_precondition;  // empty when preconditions_ok
    bool shielding_l1 = false, shielding_l2 = false, shielding_l3 = false;
    bool atomic = true;  // finite-dimensional algebras are atomic
    bool a_in_screener_algebra = false;
    bool faithful = false;
    std::size_t cases = 0, skipped_zero_probability = 0;
    double max_defect = 0.0;
    std::vector<double> r_values;
    bool screening_ok = false;
};
Prop1Report verify_prop1(const FiniteNet& net, const DensityState& phi, const Projection& a,
                         const Projection& b, const geometry::Region& vC,
                         std::uint64_t seed = 1, int rotations = 3);

}  // namespace causalnet::qnet
