#include "causalnet/qnet.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <random>

#include "causalnet/errors.hpp"
#include "causalnet/events.hpp"

namespace causalnet::qnet {

using complexd = std::complex<double>;

std::complex<double> hs_inner(const Matrix& a, const Matrix& b) {
    return (a.adjoint() * b).trace();
}

double hs_norm(const Matrix& a) { return a.norm(); }

namespace {

// Gram-Schmidt append; returns false when x is already in the span
bool orthonormal_append(std::vector<Matrix>& basis, Matrix x, double tol = 1e-9) {
    for (const auto& b : basis) x -= hs_inner(b, x) * b;
    double n = x.norm();
    if (n <= tol) return false;
    basis.push_back(x / n);
    return true;
}

}  // namespace

Subalgebra Subalgebra::generated(int dim, const std::vector<Matrix>& generators) {
    if (dim < 1 || dim > kDimCap)
        throw ValidationError("subalgebra dimension outside [1, " + std::to_string(kDimCap) + "]");
    Subalgebra a;
    a.dim_ = dim;
    orthonormal_append(a.basis_, Matrix::Identity(dim, dim));
    for (const auto& g : generators) {
        if (g.rows() != dim || g.cols() != dim)
            throw ValidationError("generator size does not match the ambient dimension");
        orthonormal_append(a.basis_, g);
        orthonormal_append(a.basis_, g.adjoint());
    }
    // close the span under products (and thereby adjoints, since the
    // generating set is *-closed)
    bool grew = true;
    while (grew) {
        grew = false;
        const std::size_t n = a.basis_.size();
        for (std::size_t i = 0; i < n && !grew; ++i)
            for (std::size_t j = 0; j < n && !grew; ++j)
                grew = orthonormal_append(a.basis_, a.basis_[i] * a.basis_[j]);
    }
    return a;
}

Subalgebra Subalgebra::full(int dim) {
    std::vector<Matrix> gens;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            Matrix e = Matrix::Zero(dim, dim);
            e(i, j) = 1.0;
            gens.push_back(e);
        }
    return generated(dim, gens);
}

Subalgebra Subalgebra::trivial(int dim) { return generated(dim, {}); }

Matrix Subalgebra::project(const Matrix& x) const {
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const auto& b : basis_) out += hs_inner(b, x) * b;
    return out;
}

bool Subalgebra::contains(const Matrix& x, double tol) const {
    return (x - project(x)).norm() <= tol * std::max(1.0, x.norm());
}

bool Subalgebra::contains_algebra(const Subalgebra& other, double tol) const {
    for (const auto& b : other.basis_)
        if (!contains(b, tol)) return false;
    return true;
}

bool Subalgebra::equals(const Subalgebra& other, double tol) const {
    return linear_dim() == other.linear_dim() && contains_algebra(other, tol);
}

bool Subalgebra::is_abelian(double tol) const {
    for (const auto& x : basis_)
        for (const auto& y : basis_)
            if ((x * y - y * x).norm() > tol) return false;
    return true;
}

Subalgebra commutant(const Subalgebra& a) {
    const int d = a.ambient_dim();
    const int n = d * d;
    // [X, B] = 0 as (B^T (x) I - I (x) B) vec(X) = 0, stacked over the basis
    Eigen::MatrixXcd constraints(static_cast<int>(a.basis().size()) * n, n);
    int r = 0;
    for (const auto& b : a.basis()) {
        Eigen::MatrixXcd block = Eigen::kroneckerProduct(b.transpose(), Matrix::Identity(d, d)) -
                                 Eigen::kroneckerProduct(Matrix::Identity(d, d), b);
        constraints.block(r, 0, n, n) = block;
        r += n;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(constraints, Eigen::ComputeFullV);
    std::vector<Matrix> kernel;
    const auto& sv = svd.singularValues();
    for (int k = 0; k < n; ++k) {
        double s = k < sv.size() ? sv(k) : 0.0;
        if (s <= 1e-9 * std::max(1.0, sv.size() ? sv(0) : 1.0)) {
            Eigen::VectorXcd vec = svd.matrixV().col(k);
            Matrix x(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) x(i, j) = vec(j * d + i);  // column-major vec
            kernel.push_back(x);
        }
    }
    return Subalgebra::generated(d, kernel);
}

Subalgebra generated_union(const Subalgebra& a, const Subalgebra& b) {
    std::vector<Matrix> gens = a.basis();
    gens.insert(gens.end(), b.basis().begin(), b.basis().end());
    return Subalgebra::generated(a.ambient_dim(), gens);
}

Subalgebra intersection(const Subalgebra& a, const Subalgebra& b) {
    // elements of a's span fixed by projecting onto b's span
    std::vector<Matrix> members;
    const int d = a.ambient_dim();
    // solve in coefficients over a's basis: x - P_b(x) = 0
    const std::size_t n = a.basis().size();
    Eigen::MatrixXcd m(d * d, n);
    for (std::size_t k = 0; k < n; ++k) {
        Matrix residual = a.basis()[k] - b.project(a.basis()[k]);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(j * d + i, static_cast<int>(k)) = residual(i, j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    for (int k = 0; k < static_cast<int>(n); ++k) {
        double s = k < sv.size() ? sv(k) : 0.0;
        if (s <= 1e-9 * std::max(1.0, sv.size() ? sv(0) : 1.0)) {
            Matrix x = Matrix::Zero(d, d);
            for (std::size_t j = 0; j < n; ++j) x += svd.matrixV()(static_cast<int>(j), k) * a.basis()[j];
            members.push_back(x);
        }
    }
    return Subalgebra::generated(d, members);
}

bool is_projection(const Matrix& p, double tol) {
    return (p - p.adjoint()).norm() <= tol && (p * p - p).norm() <= tol;
}

namespace {

Matrix random_algebra_element(const Subalgebra& a, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix x = Matrix::Zero(a.ambient_dim(), a.ambient_dim());
    for (const auto& b : a.basis()) x += complexd(g(rng), g(rng)) * b;
    return x;
}

// spectral projections of a self-adjoint algebra element, clustered at kGapTol
std::vector<Matrix> spectral_clusters(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const auto& ev = es.eigenvalues();
    const auto& vecs = es.eigenvectors();
    std::vector<Matrix> projections;
    int start = 0;
    for (int k = 1; k <= ev.size(); ++k) {
        if (k == ev.size() || ev(k) - ev(k - 1) > kGapTol) {
            Matrix p = Matrix::Zero(h.rows(), h.cols());
            for (int j = start; j < k; ++j)
                p += vecs.col(j) * vecs.col(j).adjoint();
            projections.push_back(p);
            start = k;
        }
    }
    return projections;
}

}  // namespace

std::vector<Matrix> maximal_atomic_partition(const Subalgebra& a, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 32; ++attempt) {
        Matrix x = random_algebra_element(a, rng);
        Matrix h = (x + x.adjoint()) / 2.0;
        auto projections = spectral_clusters(h);
        // each cluster projection must lie in the algebra and be minimal there
        bool ok = true;
        for (const auto& p : projections) {
            if (!a.contains(p, 1e-8)) { ok = false; break; }
            for (const auto& b : a.basis()) {
                Matrix pbp = p * b * p;
                complexd r = pbp.trace() / p.trace();
                if ((pbp - r * p).norm() > 1e-8) { ok = false; break; }
            }
            if (!ok) break;
        }
        if (ok) return projections;
    }
    throw std::runtime_error("maximal_atomic_partition: no generic element found");
}

Matrix algebra_unitary(const Subalgebra& a, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Matrix x = random_algebra_element(a, rng);
    Matrix h = (x + x.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Matrix u = Matrix::Zero(h.rows(), h.cols());
    for (int k = 0; k < es.eigenvalues().size(); ++k) {
        complexd phase = std::exp(complexd(0.0, es.eigenvalues()(k)));
        u += phase * es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    }
    return u;  // exp(iH) computed spectrally, stays inside the algebra
}

void DensityState::validate(double tol) const {
    if (rho.rows() != rho.cols()) throw ValidationError("density matrix must be square");
    if ((rho - rho.adjoint()).norm() > tol)
        throw ValidationError("density matrix is not self-adjoint");
    if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol)
        throw ValidationError("density matrix trace differs from one");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    if (es.eigenvalues().minCoeff() < -tol)
        throw ValidationError("density matrix has a negative eigenvalue");
}

void PartitionOfUnit::validate(double tol) const {
    if (projections.empty()) throw ValidationError("partition of unit is empty");
    const int d = static_cast<int>(projections.front().rows());
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < projections.size(); ++i) {
        if (!is_projection(projections[i], tol))
            throw ValidationError("partition member " + std::to_string(i) +
                                  " is not a projection");
        for (std::size_t j = i + 1; j < projections.size(); ++j)
            if ((projections[i] * projections[j]).norm() > tol)
                throw ValidationError("partition members are not mutually orthogonal");
        sum += projections[i];
    }
    if ((sum - Matrix::Identity(d, d)).norm() > tol)
        throw ValidationError("partition does not sum to the unit");
}

double expectation(const DensityState& phi, const Matrix& x) {
    return (phi.rho * x).trace().real();
}

DensityState nonselective(const DensityState& phi, const PartitionOfUnit& part) {
    part.validate();
    phi.validate();
    Matrix out = Matrix::Zero(phi.rho.rows(), phi.rho.cols());
    for (const auto& a : part.projections) out += a * phi.rho * a;
    return DensityState{out};
}

DensityState selective(const DensityState& phi, const Matrix& projection) {
    if (!is_projection(projection))
        throw ValidationError("selective measurement requires a projection");
    double p = expectation(phi, projection);
    if (p <= 1e-12)
        throw ZeroProbability("selective: conditioning projection has zero probability");
    return DensityState{projection * phi.rho * projection / p};
}

const Subalgebra& FiniteNet::algebra(const geometry::Region& r) const {
    for (const auto& nr : regions)
        if (nr.region == r) return nr.algebra;
    throw MissingRegion("net has no region " + geometry::to_string(r));
}

bool FiniteNet::has_region(const geometry::Region& r) const {
    for (const auto& nr : regions)
        if (nr.region == r) return true;
    return false;
}

Subalgebra FiniteNet::quasilocal() const {
    std::vector<Matrix> gens;
    for (const auto& nr : regions)
        gens.insert(gens.end(), nr.algebra.basis().begin(), nr.algebra.basis().end());
    return Subalgebra::generated(dim, gens);
}

FiniteNet ising_net(const geometry::Region& window, bool lpc_closure) {
    if (window.size() > 4)
        throw CapExceeded("ising_net: window larger than 4 cones");
    const int d = 1 << window.size();
    FiniteNet net;
    net.dim = d;
    // all nonempty subregions of the window
    const std::uint32_t n = 1u << window.size();
    for (std::uint32_t mask = 1; mask < n; ++mask) {
        std::vector<geometry::MinimalCone> cones;
        for (std::size_t k = 0; k < window.size(); ++k)
            if ((mask >> k) & 1u) cones.push_back(window.cones()[k]);
        geometry::Region region(cones);
        geometry::Region carrier = region;
        if (lpc_closure)
            carrier = geometry::region_intersection(geometry::double_complement(region), window);
        // diagonal cylinder projections over the carrier cones
        std::vector<std::size_t> pos;
        for (auto c : carrier.cones()) pos.push_back(window.index_of(c));
        std::vector<Matrix> gens;
        const std::uint32_t atoms = 1u << carrier.size();
        for (std::uint32_t cfg = 0; cfg < atoms; ++cfg) {
            Matrix p = Matrix::Zero(d, d);
            for (std::uint32_t full = 0; full < n; ++full) {
                bool match = true;
                for (std::size_t k = 0; k < pos.size(); ++k)
                    if (((full >> pos[k]) & 1u) != ((cfg >> k) & 1u)) { match = false; break; }
                if (match) p(full, full) = 1.0;
            }
            gens.push_back(p);
        }
        net.regions.push_back(NetRegion{std::move(region), Subalgebra::generated(d, gens)});
    }
    return net;
}

FiniteNet two_qubit_net(geometry::MinimalCone a, geometry::MinimalCone b) {
    if (!geometry::spacelike(a, b))
        throw PreconditionViolation("two_qubit_net: the carrier cones must be spacelike");
    Matrix sx(2, 2), sz(2, 2), id = Matrix::Identity(2, 2);
    sx << 0, 1, 1, 0;
    sz << 1, 0, 0, -1;
    auto kron = [](const Matrix& x, const Matrix& y) {
        return Matrix(Eigen::kroneckerProduct(x, y));
    };
    FiniteNet net;
    net.dim = 4;
    net.regions.push_back(
        {geometry::Region({a}), Subalgebra::generated(4, {kron(sx, id), kron(sz, id)})});
    net.regions.push_back(
        {geometry::Region({b}), Subalgebra::generated(4, {kron(id, sx), kron(id, sz)})});
    net.regions.push_back({geometry::Region({a, b}),
                           Subalgebra::generated(4, {kron(sx, id), kron(sz, id), kron(id, sx),
                                                     kron(id, sz)})});
    return net;
}

Matrix reduced_density(const DensityState& phi, const Subalgebra& n) {
    return n.project(phi.rho);
}

bool locally_faithful(const DensityState& phi, const Subalgebra& n, double tol) {
    Matrix red = reduced_density(phi, n);
    Eigen::SelfAdjointEigenSolver<Matrix> es((red + red.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff() > tol;
}

bool locally_faithful(const FiniteNet& net, const DensityState& phi, double tol) {
    for (const auto& nr : net.regions)
        if (!locally_faithful(phi, nr.algebra, tol)) return false;
    return true;
}

bool check_isotony(const FiniteNet& net) {
    for (const auto& r1 : net.regions)
        for (const auto& r2 : net.regions)
            if (r2.region.contains(r1.region) && !r2.algebra.contains_algebra(r1.algebra))
                return false;
    return true;
}

bool check_microcausality(const FiniteNet& net) {
    for (const auto& r1 : net.regions)
        for (const auto& r2 : net.regions) {
            if (!geometry::spacelike(r1.region, r2.region)) continue;
            for (const auto& x : r1.algebra.basis())
                for (const auto& y : r2.algebra.basis())
                    if ((x * y - y * x).norm() > kAlgTol) return false;
        }
    return true;
}

bool check_intersection_property(const FiniteNet& net) {
    for (const auto& r1 : net.regions)
        for (const auto& r2 : net.regions) {
            if (!geometry::spacelike(r1.region, r2.region)) continue;
            Subalgebra common = intersection(r1.algebra, r2.algebra);
            geometry::Region overlap = geometry::region_intersection(r1.region, r2.region);
            if (overlap.empty()) {
                if (!common.equals(Subalgebra::trivial(net.dim))) return false;
            } else if (net.has_region(overlap)) {
                if (!common.equals(net.algebra(overlap))) return false;
            }
        }
    return true;
}

bool check_haag_duality(const FiniteNet& net) {
    Subalgebra quasi = net.quasilocal();
    bool any = false;
    for (const auto& nr : net.regions) {
        std::vector<Matrix> gens;
        for (const auto& other : net.regions) {
            if (!geometry::spacelike(nr.region, other.region)) continue;
            gens.insert(gens.end(), other.algebra.basis().begin(), other.algebra.basis().end());
        }
        if (gens.empty()) continue;
        any = true;
        Subalgebra complement_alg = Subalgebra::generated(net.dim, gens);
        Subalgebra dual = intersection(commutant(complement_alg), quasi);
        if (!dual.equals(nr.algebra)) return false;
    }
    if (!any) throw MissingRegion("check_haag_duality: no region has a spacelike partner");
    return true;
}

bool check_local_primitive_causality(const FiniteNet& net) {
    for (const auto& nr : net.regions) {
        geometry::Region closure = geometry::double_complement(nr.region);
        if (closure == nr.region) continue;
        if (!net.has_region(closure)) continue;  // closure leaves the modeled window
        if (!net.algebra(closure).equals(nr.algebra)) return false;
    }
    return true;
}

bool check_primitive_causality(const FiniteNet& net,
                               const std::vector<geometry::Region>& cauchy_cover) {
    std::vector<Matrix> gens;
    for (const auto& r : cauchy_cover) {
        const Subalgebra& a = net.algebra(r);
        gens.insert(gens.end(), a.basis().begin(), a.basis().end());
    }
    return Subalgebra::generated(net.dim, gens).equals(net.quasilocal());
}

bool check_no_signaling(const FiniteNet& net, const DensityState& phi,
                        const PartitionOfUnit& part, const Projection& b) {
    part.validate();
    for (const auto& p : part.projections)
        if (!net.algebra(part.region).contains(p))
            throw ValidationError("partition member outside its region algebra");
    if (!net.algebra(b.region).contains(b.matrix))
        throw ValidationError("projection outside its region algebra");
    DensityState changed = nonselective(phi, part);
    return std::abs(expectation(changed, b.matrix) - expectation(phi, b.matrix)) <= kExpTol;
}

OutcomeIndependenceReport check_outcome_independence(const FiniteNet& net,
                                                     const DensityState& phi,
                                                     const Projection& a, const Projection& b) {
    if (!geometry::spacelike(a.region, b.region))
        throw PreconditionViolation("outcome independence requires spacelike supports");
    OutcomeIndependenceReport rep;
    DensityState phi_a = selective(phi, a.matrix);
    rep.holds = std::abs(expectation(phi_a, b.matrix) - expectation(phi, b.matrix)) <= kExpTol;
    // product test on the generated pair algebra
    rep.product_state = true;
    const Subalgebra& na = net.algebra(a.region);
    const Subalgebra& nb = net.algebra(b.region);
    for (const auto& x : na.basis()) {
        for (const auto& y : nb.basis()) {
            complexd lhs = (phi.rho * x * y).trace();
            complexd rhs = (phi.rho * x).trace() * (phi.rho * y).trace();
            if (std::abs(lhs - rhs) > kExpTol) { rep.product_state = false; break; }
        }
        if (!rep.product_state) break;
    }
    return rep;
}

namespace {

bool agree_on(const Subalgebra& a, const DensityState& phi1, const DensityState& phi2) {
    for (const auto& b : a.basis())
        if (std::abs(((phi1.rho - phi2.rho) * b).trace()) > kExpTol) return false;
    return true;
}

}  // namespace

DeterminismReport check_local_determinism(const FiniteNet& net, const DensityState& phi1,
                                          const DensityState& phi2, const geometry::Region& v) {
    DeterminismReport rep;
    rep.antecedent = agree_on(net.algebra(v), phi1, phi2);
    geometry::Region closure = geometry::double_complement(v);
    rep.consequent = agree_on(net.algebra(closure), phi1, phi2);
    return rep;
}

DeterminismReport check_sel(const FiniteNet& net, const DensityState& phi1,
                            const DensityState& phi2, const geometry::Region& vC,
                            const geometry::Region& vA) {
    for (auto c : vC.cones())
        if (!geometry::in_causal_past(c, vA))
            throw PreconditionViolation("check_sel: vC must lie in the causal past of vA");
    if (!geometry::double_complement(vC).contains(vA))
        throw PreconditionViolation("check_sel: vA must lie in the domain of dependence of vC");
    DeterminismReport rep;
    rep.antecedent = agree_on(net.algebra(vC), phi1, phi2);
    rep.consequent = agree_on(net.algebra(vA), phi1, phi2);
    return rep;
}

Prop1Report verify_prop1(const FiniteNet& net, const DensityState& phi, const Projection& a,
                         const Projection& b, const geometry::Region& vC, std::uint64_t seed,
                         int rotations) {
    Prop1Report rep;
    auto fail = [&rep](const std::string& why) {
        rep.preconditions_ok = false;
        rep.failed_precondition = why;
        return rep;
    };
    if (!is_projection(a.matrix)) return fail("A is not a projection");
    if (!is_projection(b.matrix)) return fail("B is not a projection");
    if (!geometry::spacelike(a.region, b.region)) return fail("vA and vB are not spacelike");
    auto shielding =
        geometry::shielding_report(vC, a.region, b.region, geometry::ShieldingVariant::Quantum);
    rep.shielding_l1 = shielding.l1;
    rep.shielding_l2 = shielding.l2;
    rep.shielding_l3 = shielding.l3;
    if (!shielding.l1) return fail("shielding requirement L1 fails");
    if (!shielding.l2) return fail("shielding requirement L2 fails");
    if (!shielding.l3) return fail("shielding requirement L3 fails");
    const Subalgebra& nc = net.algebra(vC);
    // local primitive causality pulls A into the screener algebra
    rep.a_in_screener_algebra = nc.contains(a.matrix);
    if (!rep.a_in_screener_algebra) return fail("A does not lie in N(V_C)");
    rep.faithful = locally_faithful(phi, nc);
    if (!rep.faithful) return fail("state is not locally faithful on N(V_C)");
    rep.preconditions_ok = true;

    auto partition = maximal_atomic_partition(nc, seed);
    std::vector<Matrix> minimals = partition;
    for (int rot = 1; rot <= rotations; ++rot) {
        Matrix u = algebra_unitary(nc, seed + static_cast<std::uint64_t>(rot));
        for (const auto& c : partition) minimals.push_back(u * c * u.adjoint());
    }
    for (const auto& c : minimals) {
        double pc = expectation(phi, c);
        if (pc <= 1e-12) {
            ++rep.skipped_zero_probability;
            continue;
        }
        ++rep.cases;
        Matrix cac = c * a.matrix * c;
        double r = (cac.trace() / c.trace()).real();
        rep.r_values.push_back(r);
        double ab = ((phi.rho * c * a.matrix * b.matrix * c).trace().real()) / pc;
        double ea = ((phi.rho * c * a.matrix * c).trace().real()) / pc;
        double eb = ((phi.rho * c * b.matrix * c).trace().real()) / pc;
        rep.max_defect = std::max(rep.max_defect, std::abs(ab - ea * eb));
    }
    rep.screening_ok = rep.cases > 0 && rep.max_defect <= kExpTol;
    return rep;
}

}  // namespace causalnet::qnet
