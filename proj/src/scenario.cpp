#include "quasi/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include "quasi/errors.hpp"
#include "quasi/gns.hpp"
#include "quasi/group.hpp"
#include "quasi/matrix_json.hpp"
#include "quasi/modular_flow.hpp"
#include "quasi/tracial.hpp"

namespace quasi {

namespace {

const char* kClosedForms = "example.closed_forms";

// Closed forms are exact up to rounding; compare them tightly.
const Tolerance kClosedTol(1e-12, 1e-12);

Witness note_at(std::optional<std::size_t> g, std::string location) {
  return Witness{g, std::nullopt, std::move(location)};
}

// ---------------------------------------------------------------------------
// Random matrices

std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
  return std::mt19937_64(seq);
}

Matrix gaussian(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = cplx(re, im);
    }
  }
  return m;
}

Matrix random_unitary(Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(n, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < n; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

/// W W^dagger / Tr + eps I, renormalised; eigenvalues stay >= eps / (1 + n eps).
Matrix random_density(Index n, std::mt19937_64& rng) {
  constexpr double eps = 1e-3;
  const Matrix w = gaussian(n, rng);
  Matrix rho = w * w.adjoint();
  rho /= rho.trace().real();
  rho += eps * identity(n);
  rho /= rho.trace().real();
  return (rho + rho.adjoint()) / 2.0;
}

Matrix random_diagonal_density(Index n, std::mt19937_64& rng) {
  const auto spectrum = hermitian_eigen(random_density(n, rng));
  Matrix rho = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) rho(k, k) = spectrum.values(k);
  return rho;
}

cplx root_of_unity(std::size_t order, std::size_t power) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(power % order) /
                       static_cast<double>(order);
  return std::polar(1.0, angle);
}

Matrix random_phase_diagonal(Index n, std::size_t order, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, order - 1);
  Matrix d = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) d(k, k) = root_of_unity(order, pick(rng));
  return d;
}

/// Signed permutation whose cycles have lengths dividing `order` and whose
/// signs multiply to +1 on every cycle, so u^order = 1.
Matrix random_monomial(Index n, std::size_t order, std::mt19937_64& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) perm[static_cast<std::size_t>(k)] = k;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> divisors;
  for (std::size_t d = 1; d <= order; ++d) {
    if (order % d == 0) divisors.push_back(d);
  }
  std::bernoulli_distribution coin(0.5);
  Matrix u = Matrix::Zero(n, n);
  std::size_t start = 0;
  while (start < perm.size()) {
    std::vector<std::size_t> fitting;
    for (std::size_t d : divisors) {
      if (d <= perm.size() - start) fitting.push_back(d);
    }
    std::uniform_int_distribution<std::size_t> pick(0, fitting.size() - 1);
    const std::size_t len = fitting[pick(rng)];
    double product = 1.0;
    for (std::size_t k = 0; k < len; ++k) {
      const Index from = perm[start + k];
      const Index to = perm[start + (k + 1) % len];
      double sign = coin(rng) ? -1.0 : 1.0;
      if (k + 1 == len) sign = product;
      product *= sign;
      u(to, from) = sign;
    }
    start += len;
  }
  return u;
}

std::vector<Matrix> cyclic_powers(const Matrix& u, std::size_t order) {
  std::vector<Matrix> out;
  Matrix p = identity(u.rows());
  for (std::size_t k = 0; k < order; ++k) {
    out.push_back(p);
    p = p * u;
  }
  return out;
}

std::vector<std::vector<std::size_t>> whole_group_chain(const FiniteGroup& g) {
  std::vector<std::size_t> all(g.order());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  if (g.order() == 1) return {all};
  return {{g.identity()}, all};
}

// ---------------------------------------------------------------------------
// Example construction helpers

Matrix rotation(double cosine, double sine) {
  Matrix u(2, 2);
  u << cosine, -sine, sine, cosine;
  return u;
}

/// cos and sin of k pi / 2, exact.
std::pair<double, double> quarter_turn(std::size_t k) {
  static constexpr double c[] = {1.0, 0.0, -1.0, 0.0};
  static constexpr double s[] = {0.0, 1.0, 0.0, -1.0};
  return {c[k % 4], s[k % 4]};
}

Matrix cyclic_shift(std::size_t sites) {
  const Index dim = Index{1} << sites;
  Matrix p = Matrix::Zero(dim, dim);
  // |b0 b1 ... b_{N-1}> -> |b1 ... b_{N-1} b0>, index sum_i b_i 2^{N-1-i}.
  for (Index from = 0; from < dim; ++from) {
    const Index top = (from >> (sites - 1)) & 1;
    const Index to = ((from << 1) & (dim - 1)) | top;
    p(to, from) = 1.0;
  }
  return p;
}

void require(bool ok, const std::string& why) {
  if (!ok) throw InvalidParams(why);
}

Matrix validated_positive(const Matrix& k, Index n, const std::string& what, const Tolerance& tol) {
  require(k.rows() == n && k.cols() == n, what + " must be " + std::to_string(n) + "x" + std::to_string(n));
  require(is_hermitian(k, tol), what + " must be Hermitian");
  const Matrix h = (k + k.adjoint()) / 2.0;
  const auto spectrum = hermitian_eigen(h, tol);
  require(spectrum.values.minCoeff() > tol.abs(), what + " must be strictly positive");
  return h;
}

ExampleInstance build_ex1(const ExampleParams& p, const Tolerance& tol) {
  require(!p.beta && !p.lambda && !p.mu && !p.sites, "ex1 takes only --k-file");
  constexpr std::size_t order = 4;
  const double z = 1.0 + std::exp(-1.0) + std::exp(-2.0);
  Matrix rho_w = Matrix::Zero(3, 3);
  for (Index k = 0; k < 3; ++k) rho_w(k, k) = std::exp(-static_cast<double>(k)) / z;

  Matrix k;
  if (p.k.empty()) {
    // A fixed K whose eigenbasis is rotated away from that of rho.
    Matrix r1 = identity(3);
    Matrix r2 = identity(3);
    r1.block(0, 0, 2, 2) = rotation(std::cos(0.6), std::sin(0.6));
    r2.block(1, 1, 2, 2) = rotation(std::cos(0.4), std::sin(0.4));
    const Matrix r = r1 * r2;
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = 2.0;
    d(2, 2) = 4.0;
    k = r * d * r.adjoint();
  } else {
    require(p.k.size() == 1, "ex1 expects exactly one 3x3 matrix K");
    k = validated_positive(p.k.front(), 3, "K", tol);
  }
  const double omega_k_inv = (rho_w * k.inverse()).trace().real();
  k *= omega_k_inv;

  ExampleInstance ex{.id = "ex1",
                     .parameters = Json::object(),
                     .instance = Instance{"ex1",
                                          GroupAction(cyclic_group(order),
                                                      std::vector<Matrix>(order, identity(3)), tol),
                                          LinearFunctional(identity(3) / 3.0), std::nullopt,
                                          cyclic_subgroup_chain(order)},
                     .k = k};
  std::vector<Matrix> us;
  for (std::size_t j = 0; j < order; ++j) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(order);
    ex.times.push_back(t);
    us.push_back(hermitian_power(rho_w, cplx(0.0, t), tol));
  }
  ex.instance.action = GroupAction(cyclic_group(order), us, tol);
  ex.instance.functional = LinearFunctional(Matrix(rho_w * k.inverse()), tol);
  if (ex.instance.functional.is_faithful_state(tol)) {
    ex.instance.state.emplace(ex.instance.functional.density(), tol);
  }
  ex.reference_density = rho_w;
  ex.parameters = {{"group_order", order}, {"K", matrix_to_json(k)}};
  return ex;
}

ExampleInstance build_ex2(const ExampleParams& p, const Tolerance& tol) {
  require(!p.mu && !p.sites && p.k.empty(), "ex2 takes --beta or --lambda");
  double beta = std::log(2.0);
  double lambda = 2.0 / 3.0;
  if (p.lambda) {
    require(!p.beta, "ex2 takes --beta or --lambda, not both");
    lambda = *p.lambda;
    require(lambda > 0.0 && lambda < 1.0, "ex2 needs 0 < lambda < 1");
    beta = std::log(lambda / (1.0 - lambda));
  } else {
    if (p.beta) beta = *p.beta;
    require(std::isfinite(beta), "ex2 needs a finite beta");
    lambda = 1.0 / (1.0 + std::exp(-beta));
  }
  require(lambda > 0.0 && lambda < 1.0, "beta is too large for a faithful state in double precision");
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = lambda;
  rho(1, 1) = 1.0 - lambda;
  std::vector<Matrix> us;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [c, s] = quarter_turn(k);
    us.push_back(rotation(c, -s));  // u_theta = U_{-theta}
  }
  GroupAction action(cyclic_group(4), us, tol);
  ExampleInstance ex{.id = "ex2",
                     .parameters = {{"beta", beta}, {"lambda", lambda}},
                     .instance = Instance{"ex2", action, LinearFunctional(rho, tol),
                                          FaithfulState(rho, tol), cyclic_subgroup_chain(4)}};
  ex.lambda = lambda;
  ex.beta = beta;
  return ex;
}

ExampleInstance build_ex3(const ExampleParams& p, const Tolerance& tol) {
  require(!p.beta && !p.lambda && !p.mu, "ex3 takes --sites and --k-file");
  const std::size_t n_sites = p.sites.value_or(3);
  require(n_sites >= 2, "ex3 needs at least 2 sites");
  require(n_sites <= 3, "ex3 supports at most 3 sites (the GNS space has dimension 4^N)");
  std::vector<Matrix> site_k;
  if (p.k.empty()) {
    for (std::size_t i = 0; i < n_sites; ++i) {
      Matrix d = Matrix::Zero(2, 2);
      d(0, 0) = 1.0;
      d(1, 1) = 2.0 + static_cast<double>(i);
      site_k.push_back(d);
    }
  } else if (p.k.size() == 1) {
    site_k.assign(n_sites, p.k.front());
  } else {
    require(p.k.size() == n_sites, "ex3 expects one K_0 or one K_i per site");
    site_k = p.k;
  }
  for (std::size_t i = 0; i < n_sites; ++i) {
    const Matrix& k = site_k[i];
    const std::string name = "K_" + std::to_string(i);
    require(k.rows() == 2 && k.cols() == 2, name + " must be 2x2");
    require(std::abs(k(0, 1)) <= tol.abs() && std::abs(k(1, 0)) <= tol.abs(), name + " must be diagonal");
    for (Index d = 0; d < 2; ++d) {
      require(std::abs(k(d, d).imag()) <= tol.abs() && k(d, d).real() > 0.0,
              name + " must have positive real diagonal");
    }
    Matrix clean = Matrix::Zero(2, 2);
    clean(0, 0) = k(0, 0).real();
    clean(1, 1) = k(1, 1).real();
    site_k[i] = clean;
  }
  Matrix k = site_k.front();
  for (std::size_t i = 1; i < n_sites; ++i) k = kron(k, site_k[i]);
  const double dim = static_cast<double>(k.rows());
  const double scale = k.inverse().trace().real() / dim;
  k *= scale;
  const Matrix rho = k.inverse() / dim;
  const Matrix shift = cyclic_shift(n_sites);
  GroupAction action(cyclic_group(n_sites), cyclic_powers(shift, n_sites), tol);
  Json sites = Json::array();
  for (const auto& s : site_k) sites.push_back(matrix_to_json(s));
  ExampleInstance ex{.id = "ex3",
                     .parameters = {{"sites", n_sites}, {"K_sites", sites}},
                     .instance = Instance{"ex3", action, LinearFunctional(rho, tol),
                                          FaithfulState(rho, tol), cyclic_subgroup_chain(n_sites)},
                     .k = k,
                     .site_k = site_k};
  return ex;
}

ExampleInstance build_ex4(const ExampleParams& p, const Tolerance& tol) {
  require(!p.beta && !p.sites && p.k.empty(), "ex4 takes --lambda and --mu");
  double lambda = 0.7;
  double mu = 0.3;
  if (p.lambda || p.mu) {
    lambda = p.lambda.value_or(1.0 - p.mu.value_or(0.0));
    mu = p.mu.value_or(1.0 - lambda);
  }
  require(lambda > 0.0 && mu > 0.0, "ex4 needs lambda > 0 and mu > 0");
  require(std::abs(lambda + mu - 1.0) <= 1e-12, "ex4 needs lambda + mu = 1");
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = lambda;
  rho(1, 1) = mu;
  Matrix sz = identity(2);
  sz(1, 1) = -1.0;
  GroupAction action(cyclic_group(2), {identity(2), sz}, tol);
  ExampleInstance ex{.id = "ex4",
                     .parameters = {{"lambda", lambda}, {"mu", mu}},
                     .instance = Instance{"ex4", action, LinearFunctional(rho, tol),
                                          FaithfulState(rho, tol), cyclic_subgroup_chain(2)}};
  ex.lambda = lambda;
  ex.mu = mu;
  return ex;
}

// ---------------------------------------------------------------------------
// Closed forms

Verdict closed_forms_ex1(const ExampleInstance& ex, const CocycleFamily& family) {
  DeviationTracker tr;
  const Matrix& k = ex.k;
  const Matrix k_inv = k.inverse();
  const Matrix& rho_w = ex.reference_density;
  for (std::size_t j = 0; j < ex.times.size(); ++j) {
    const Matrix r = hermitian_power(rho_w, cplx(0.0, ex.times[j]));
    // x_t = K sigma_{-t}(K^{-1})
    const Matrix expected = k * r.adjoint() * k_inv * r;
    observe_equal(tr, family.cocycle(j), expected, kClosedTol, note_at(j, "x_t = K sigma_-t(K^-1)"));
  }
  const Matrix full_turn = hermitian_power(rho_w, cplx(0.0, 2.0 * std::numbers::pi));
  for (const auto& a : matrix_units(3)) {
    observe_equal(tr, Matrix(full_turn * a * full_turn.adjoint()), a, kClosedTol,
                  note_at({}, "sigma_2pi = id"));
  }
  const double omega_k_inv = (rho_w * k_inv).trace().real();
  tr.observe(std::abs(omega_k_inv - 1.0), kClosedTol.threshold(1.0, 1.0), note_at({}, "omega(K^-1) = 1"));
  // The functional is a state exactly when K commutes with rho.
  const bool commutes = approx_equal(Matrix(k * rho_w), Matrix(rho_w * k), kClosedTol).equal;
  const bool is_state = ex.instance.state.has_value();
  tr.observe(commutes == is_state ? 0.0 : 1.0, 0.5, note_at({}, "state iff [K, rho] = 0"));
  return tr.finish(kClosedForms, Hypothesis::satisfied,
                   is_state ? "K commutes with rho" : "K does not commute with rho; functional-level checks only");
}

Verdict closed_forms_ex2(const ExampleInstance& ex, const CocycleFamily& family) {
  DeviationTracker tr;
  const double l = ex.lambda;
  const double b = ex.beta;
  for (std::size_t k = 0; k < 4; ++k) {
    const double theta = static_cast<double>(k) * std::numbers::pi / 2.0;
    const double c2 = std::cos(2.0 * theta);
    const double s2 = std::sin(2.0 * theta);
    Matrix x(2, 2);
    x << (1.0 + (2.0 * l - 1.0) * c2) / (2.0 * l), (2.0 * l - 1.0) / (2.0 * l) * s2,
        (2.0 * l - 1.0) / (2.0 * (1.0 - l)) * s2, (1.0 + (1.0 - 2.0 * l) * c2) / (2.0 * (1.0 - l));
    observe_equal(tr, family.cocycle(k), x, kClosedTol, note_at(k, "x_theta general form"));
    Matrix concrete = identity(2);
    if (k % 2 == 1) {
      concrete(0, 0) = std::exp(-b);
      concrete(1, 1) = std::exp(b);
    }
    observe_equal(tr, family.cocycle(k), concrete, kClosedTol, note_at(k, "x_theta concrete values"));
  }
  Matrix kap = Matrix::Zero(2, 2);
  kap(0, 0) = 0.5 / l;
  kap(1, 1) = 0.5 / (1.0 - l);
  observe_equal(tr, kappa(family), kap, kClosedTol, note_at({}, "kappa"));
  const FaithfulState& phi = *ex.instance.state;
  const Matrix kf = kappa(family);
  for (const auto& a : matrix_units(2)) {
    observe_equal(tr, phi.evaluate(Matrix(kf * a)), a.trace() / 2.0, kClosedTol,
                  note_at({}, "phi_G = Tr / 2"));
    const Matrix e = mean_over_group(family.action(), a);
    Matrix expected(2, 2);
    const cplx diag = (a(0, 0) + a(1, 1)) / 2.0;
    const cplx off = (a(0, 1) - a(1, 0)) / 2.0;
    expected << diag, off, -off, diag;
    observe_equal(tr, e, expected, kClosedTol, note_at({}, "E_G closed form"));
  }
  Matrix j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  const bool fixed_ok = same_span(fixed_point_algebra(family.action()), span_of(2, {identity(2), j}));
  tr.observe(fixed_ok ? 0.0 : 1.0, 0.5, note_at({}, "F(G) = {[[a, b], [-b, a]]}"));
  return tr.finish(kClosedForms, Hypothesis::satisfied);
}

Verdict closed_forms_ex3(const ExampleInstance& ex, const CocycleFamily& family) {
  DeviationTracker tr;
  const auto& action = family.action();
  const std::size_t n = action.order();
  const Matrix& k = ex.k;
  const Matrix k_inv = k.inverse();
  Matrix sum = Matrix::Zero(k.rows(), k.cols());
  for (std::size_t g = 0; g < n; ++g) {
    observe_equal(tr, family.cocycle(g), Matrix(k * action.apply((n - g) % n, k_inv)), kClosedTol,
                  note_at(g, "x_gn = K g_{N-n}(K^-1)"));
    sum += action.apply(g, k_inv);
  }
  const Matrix kap = k * sum / static_cast<double>(n);
  observe_equal(tr, kappa(family), kap, kClosedTol, note_at({}, "kappa = K mean g_n(K^-1) / N"));
  const FaithfulState& phi = *ex.instance.state;
  const Index dim = k.rows();
  for (const auto& a : matrix_units(dim)) {
    cplx mean_value = 0.0;
    Matrix mean = Matrix::Zero(dim, dim);
    for (std::size_t g = 0; g < n; ++g) {
      mean_value += phi.evaluate(action.apply(g, a));
      mean += action.apply(g, a);
    }
    mean_value /= static_cast<double>(n);
    observe_equal(tr, phi.evaluate(Matrix(kap * a)), mean_value, kClosedTol, note_at({}, "phi_G"));
    observe_equal(tr, mean_over_group(action, a), Matrix(mean / static_cast<double>(n)), kClosedTol,
                  note_at({}, "E_G"));
  }
  // The shift acts as a_0 (x) a_1 (x) ... -> a_1 (x) ... (x) a_0.
  const std::size_t sites = ex.site_k.size();
  std::vector<Matrix> factors;
  for (std::size_t i = 0; i < sites; ++i) {
    Matrix f(2, 2);
    f << cplx(1.0 + static_cast<double>(i), 0.0), cplx(0.0, 2.0 + static_cast<double>(i)),
        cplx(-1.0, 0.5 * static_cast<double>(i)), cplx(3.0 - static_cast<double>(i), 0.0);
    factors.push_back(f);
  }
  Matrix a = factors.front();
  Matrix shifted = factors[1 % sites];
  for (std::size_t i = 1; i < sites; ++i) {
    a = kron(a, factors[i]);
    shifted = kron(shifted, factors[(i + 1) % sites]);
  }
  if (n > 1) observe_equal(tr, action.apply(1, a), shifted, kClosedTol, note_at(1, "cyclic translation"));
  bool all_equal = true;
  for (const auto& s : ex.site_k) {
    all_equal = all_equal && approx_equal(s, ex.site_k.front(), kClosedTol).equal;
  }
  if (all_equal) {
    for (std::size_t g = 0; g < n; ++g) {
      observe_equal(tr, family.cocycle(g), identity(dim), kClosedTol, note_at(g, "K_i = K_0 gives x_g = 1"));
    }
  }
  return tr.finish(kClosedForms, Hypothesis::satisfied);
}

Verdict closed_forms_ex4(const ExampleInstance& ex, const CocycleFamily& family) {
  DeviationTracker tr;
  for (std::size_t g = 0; g < 2; ++g) {
    observe_equal(tr, family.cocycle(g), identity(2), kClosedTol, note_at(g, "x_g = 1"));
  }
  const AlgebraBasis diagonals = span_of(2, {matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)});
  const auto fixed = fixed_point_algebra(family.action());
  tr.observe(same_span(fixed, diagonals) ? 0.0 : 1.0, 0.5, note_at({}, "F(G) = diagonal matrices"));
  const FaithfulState& phi = *ex.instance.state;
  for (const auto& a : matrix_units(2)) {
    Matrix flipped = a;
    flipped(0, 1) = -a(0, 1);
    flipped(1, 0) = -a(1, 0);
    observe_equal(tr, family.action().apply(1, a), flipped, kClosedTol, note_at(1, "flip action"));
  }
  const ModularFlow flow(phi);
  for (double t : flow.sample_times()) {
    const cplx phase = std::pow(cplx(ex.lambda / ex.mu), cplx(0.0, t));
    for (const auto& a : matrix_units(2)) {
      Matrix expected = a;
      expected(0, 1) *= phase;
      expected(1, 0) /= phase;
      observe_equal(tr, flow.apply(a, t), expected, kClosedTol,
                    Witness{std::nullopt, t, "sigma_t closed form"});
    }
  }
  if (std::abs(ex.lambda - ex.mu) > kClosedTol.abs()) {
    tr.observe(same_span(centralizer(phi), diagonals) ? 0.0 : 1.0, 0.5,
               note_at({}, "Centr(phi) = F(G) for lambda != mu"));
  }
  return tr.finish(kClosedForms, Hypothesis::satisfied);
}

// ---------------------------------------------------------------------------
// Running the battery

class VerdictSet {
 public:
  void put(Verdict v) { by_id_[v.check_id] = std::move(v); }
  void put(const std::vector<Verdict>& vs) {
    for (const auto& v : vs) put(v);
  }
  /// Runs `fn`; a thrown library error marks every id in `ids` as failing.
  void guarded(const std::vector<std::string>& ids, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      for (const auto& id : ids) {
        Verdict v;
        v.check_id = id;
        v.status = Status::fails;
        v.note = std::string("error: ") + e.what();
        put(v);
      }
    }
  }
  std::vector<Verdict> in_registry_order(const std::string& missing_note) const {
    std::vector<Verdict> out;
    for (const auto& id : registered_checks()) {
      auto it = by_id_.find(id);
      out.push_back(it != by_id_.end() ? it->second : not_applicable(id, missing_note));
    }
    return out;
  }

 private:
  std::map<std::string, Verdict> by_id_;
};

std::vector<std::string> gns_shift_ids() {
  return {"gns.shift.state",
          "gns.shift.cone",
          "gns.shift.j_equality",
          "gns.shift.unitaries",
          "gns.covariance",
          "gns.relation.s_exchange",
          "gns.relation.f_exchange",
          "gns.relation.delta_factorization",
          "gns.relation.s_g_formula",
          "gns.relation.delta_g_sqrt_formula",
          "gns.relation.u_s_g_formula",
          "gns.projection",
          "gns.lifted_expectation.block1",
          "gns.lifted_expectation.block2",
          "gns.lifted_expectation.invariance",
          "gns.abelianness",
          "gns.subgroup_chain"};
}

InstanceResult run_with_times(const Instance& inst, const std::vector<double>& extra_times,
                              const Tolerance& tol) {
  VerdictSet set;
  Json diag;
  set.put(check_action_homomorphism(inst.action, tol));
  set.put(check_mean_properties(inst.action, tol));

  const CocycleFamily family = inst.state ? classify_invariance(*inst.state, inst.action, tol)
                                          : classify_invariance(inst.functional, inst.action, tol);
  diag["classification"] = std::string(class_name(family.classification()));
  diag["max_hermitian_deviation"] = family.max_hermitian_deviation();
  diag["max_identity_deviation"] = family.max_identity_deviation();
  diag["is_state"] = inst.state.has_value();
  set.put(check_defining_relation(family, tol));
  set.put(check_cocycle_identity(family, tol));
  set.put(check_chain_rule(family, tol));
  set.put(check_inverse_law(family, tol));
  if (!inst.state) {
    return {set.in_registry_order("the functional is not a positive state"), diag};
  }
  const FaithfulState& phi = *inst.state;
  const bool strong = family.strongly_quasi();
  set.put(check_trace_symmetry(phi, family, tol));
  set.put(check_strong_structure(phi, family, tol));
  set.put(check_kappa_centralizer(phi, family, tol));
  set.put(check_averaged_state(phi, family, tol));
  set.put(check_fixed_cocycle_lemma(family, tol));
  if (strong) diag["kappa"] = matrix_to_json(kappa(family));

  std::vector<double> times = ModularFlow::default_sample_times();
  times.insert(times.end(), extra_times.begin(), extra_times.end());
  const ModularFlow flow(phi, times);
  set.guarded({"flow.group_commutation", "qi.theorem.invariance_equivalence", "flow.invariant_case",
               "flow.mean_state_level", "flow.mean_map_level", "flow.sufficient_condition",
               "flow.inclusion"},
              [&] {
                const auto comm = check_flow_group_commutation(flow, family, tol);
                diag["flow_commutes"] = comm.commute;
                diag["central_cocycles"] = comm.central_cocycles;
                set.put(comm.verdict);
                const auto eq = check_invariance_equivalence(flow, family, comm, tol);
                diag["equivalence"] = {{"invariant", eq.invariant},
                                       {"strong_and_fixed", eq.strong_and_fixed},
                                       {"commuting_and_fixed", eq.commuting_and_fixed}};
                set.put(eq.verdict);
                set.put(check_invariant_case(comm, family));
                const auto mm = check_mean_modular_commutation(flow, family, comm, tol);
                set.put(mm.state_level);
                set.put(mm.map_level);
                set.put(mm.sufficient_condition);
                set.put(check_inclusion(flow, family, comm, tol));
              });
  set.put(check_flow_invariants(flow, tol));
  set.put(check_pinching(flow, tol));
  set.put(check_kappa_twist(flow, family, tol));
  set.put(strong ? check_factor_cocycle_relation(flow, family, tol)
                 : not_applicable("flow.factor_cocycle_relation", "cocycles are not all Hermitian"));
  set.put(check_state_level_commutation(flow, family, tol));
  set.put(check_ergodic_coincidence(flow, family, tol));

  std::vector<std::string> gns_ids = {"gns.system", "gns.delta_closed_form"};
  if (strong) {
    const auto more = gns_shift_ids();
    gns_ids.insert(gns_ids.end(), more.begin(), more.end());
  }
  set.guarded(gns_ids, [&] {
    const GnsSystem gns(phi, tol);
    set.put(check_gns_system(gns, tol));
    set.put(check_delta_closed_form(gns, times, tol));
    if (!strong) return;
    const auto shifts = shifts_for(gns, family, tol);
    set.put(check_shift_state(gns, family, shifts, tol));
    set.put(check_shift_cone(gns, shifts, tol));
    set.put(check_shift_j(gns, shifts, tol));
    set.put(check_shift_unitaries(gns, family, shifts, tol));
    set.put(check_covariance(gns, family, shifts, tol));
    set.put(check_modular_relations(gns, shifts, tol));
    const Matrix pg = projection_pg(shifts);
    set.put(check_projection(shifts, pg, tol));
    set.put(check_lifted_expectation(gns, family, shifts, pg, tol));
    const auto ab = compressed_abelianness(gns, family, shifts, pg, AbelianRoute::automatic, tol);
    diag["abelianness"] = {{"lhs", ab.lhs}, {"rhs", ab.rhs}, {"agree", ab.agree}, {"route", ab.route}};
    set.put(ab.verdict);
    const auto chain = subgroup_chain_limit(gns, family, shifts, inst.chain, tol);
    Json stages = Json::array();
    for (const auto& s : chain.stages) {
      stages.push_back({{"order", s.order},
                        {"rank", s.rank},
                        {"deviation", s.deviation},
                        {"hs_deviation", s.hs_deviation}});
    }
    diag["subgroup_chain"] = {{"nested", chain.nested},
                              {"monotone", chain.monotone},
                              {"final_exact", chain.final_exact},
                              {"stages", stages}};
    set.put(chain.verdict);
  });

  set.put(mean_density_checks(phi, family, tol));
  if (strong && ergodicity_on_center(family.action(), tol).ergodic) {
    set.guarded({"tracial.decomposition"}, [&] {
      const auto d = tracial_decomposition(phi, family, tol);
      diag["tracial"] = {{"trace_density", matrix_to_json(d.trace_density)},
                         {"b", matrix_to_json(d.b)},
                         {"c", matrix_to_json(d.c)},
                         {"c_in_FG_residual", d.c_in_FG_residual},
                         {"reconstruction_deviation", reconstruction_deviation(phi, d)}};
      set.put(check_tracial_decomposition(phi, family, d, tol));
    });
  }
  return {set.in_registry_order(strong ? "hypothesis not met" : "cocycles are not all Hermitian"), diag};
}

Json traceability_json(const std::vector<Verdict>& checks) {
  std::map<std::string, Status> status;
  for (const auto& v : checks) status[v.check_id] = v.status;
  Json out = Json::array();
  for (const auto& entry : traceability()) {
    Json row;
    row["result"] = entry.result;
    Json ids = Json::array();
    for (const auto& id : entry.check_ids) {
      auto it = status.find(id);
      ids.push_back({{"check_id", id},
                     {"status", it == status.end() ? "missing" : std::string(status_name(it->second))}});
    }
    row["checks"] = ids;
    out.push_back(row);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ExampleInstance build_example(std::string_view id, const ExampleParams& params, const Tolerance& tol) {
  if (id == "ex1") return build_ex1(params, tol);
  if (id == "ex2") return build_ex2(params, tol);
  if (id == "ex3") return build_ex3(params, tol);
  if (id == "ex4") return build_ex4(params, tol);
  throw InvalidParams("unknown example '" + std::string(id) + "' (expected ex1, ex2, ex3 or ex4)");
}

Verdict check_closed_forms(const ExampleInstance& ex, const Tolerance& tol) {
  const Instance& inst = ex.instance;
  const CocycleFamily family = inst.state ? classify_invariance(*inst.state, inst.action, tol)
                                          : classify_invariance(inst.functional, inst.action, tol);
  if (ex.id == "ex1") return closed_forms_ex1(ex, family);
  if (ex.id == "ex2") return closed_forms_ex2(ex, family);
  if (ex.id == "ex3") return closed_forms_ex3(ex, family);
  return closed_forms_ex4(ex, family);
}

std::string_view family_name(FuzzFamily f) {
  switch (f) {
    case FuzzFamily::mixed: return "mixed";
    case FuzzFamily::generic: return "generic";
    case FuzzFamily::strongly_quasi: return "strongly_quasi";
    case FuzzFamily::commuting: return "commuting";
  }
  return "unknown";
}

FuzzFamily parse_family(std::string_view s) {
  for (auto f : {FuzzFamily::mixed, FuzzFamily::generic, FuzzFamily::strongly_quasi, FuzzFamily::commuting}) {
    if (family_name(f) == s) return f;
  }
  throw InvalidParams("unknown fuzz family '" + std::string(s) +
                      "' (expected mixed, generic, strongly_quasi or commuting)");
}

FuzzFamily family_for_trial(FuzzFamily f, std::size_t trial) {
  if (f != FuzzFamily::mixed) return f;
  static constexpr FuzzFamily cycle[] = {FuzzFamily::generic, FuzzFamily::strongly_quasi,
                                         FuzzFamily::commuting};
  return cycle[trial % 3];
}

Instance random_instance(Index dim, std::size_t group_order, FuzzFamily family, std::uint64_t seed,
                         std::size_t trial) {
  if (dim < 1) throw InvalidParams("dimension must be positive");
  if (group_order < 1) throw InvalidParams("group order must be positive");
  auto rng = trial_rng(seed, trial);
  const FuzzFamily f = family_for_trial(family, trial);
  Matrix rho;
  Matrix u;
  switch (f) {
    case FuzzFamily::generic: {
      rho = random_density(dim, rng);
      const Matrix v = random_unitary(dim, rng);
      u = v * random_phase_diagonal(dim, group_order, rng) * v.adjoint();
      break;
    }
    case FuzzFamily::strongly_quasi:
    case FuzzFamily::commuting: {
      rho = random_diagonal_density(dim, rng);
      u = f == FuzzFamily::commuting ? random_phase_diagonal(dim, group_order, rng)
                                     : random_monomial(dim, group_order, rng);
      const Matrix w = random_unitary(dim, rng);
      rho = w * rho * w.adjoint();
      rho = (rho + rho.adjoint()) / 2.0;
      u = w * u * w.adjoint();
      break;
    }
    case FuzzFamily::mixed: break;
  }
  const FiniteGroup group = cyclic_group(group_order);
  GroupAction action(group, cyclic_powers(u, group_order));
  FaithfulState state(rho);
  return Instance{"trial " + std::to_string(trial) + " (" + std::string(family_name(f)) + ")",
                  std::move(action), LinearFunctional(rho), std::move(state),
                  cyclic_subgroup_chain(group_order)};
}

std::size_t parse_group_spec(std::string_view spec) {
  constexpr std::string_view prefix = "cyclic:";
  if (spec.substr(0, prefix.size()) != prefix) {
    throw InvalidParams("group spec must look like cyclic:N");
  }
  const std::string digits(spec.substr(prefix.size()));
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    throw InvalidParams("group spec must look like cyclic:N with N a positive integer");
  }
  const unsigned long n = std::stoul(digits);
  if (n < 1 || n > 64) throw InvalidParams("cyclic group order must be between 1 and 64");
  return n;
}

InstanceResult run_instance(const Instance& inst, const Tolerance& tol) {
  return run_with_times(inst, {}, tol);
}

Report run_example(std::string_view id, const ExampleParams& params, const Tolerance& tol) {
  const ExampleInstance ex = build_example(id, params, tol);
  InstanceResult result = run_instance(ex.instance, tol);
  const Verdict closed = check_closed_forms(ex, tol);
  for (auto& v : result.checks) {
    if (v.check_id == kClosedForms) v = closed;
  }
  Report r;
  r.scenario = ex.id;
  r.parameters = ex.parameters;
  r.tol = tol;
  r.checks = std::move(result.checks);
  r.diagnostics = std::move(result.diagnostics);
  r.traceability = traceability_json(r.checks);
  return r;
}

Report fuzz(const FuzzParams& p, const Tolerance& tol) {
  if (p.dim < 2) throw InvalidParams("fuzz needs dim >= 2");
  if (p.trials < 1) throw InvalidParams("fuzz needs at least one trial");
  if (p.group_order < 1) throw InvalidParams("fuzz needs a nonempty group");

  // Extra flow sample times shared by every trial of the run.
  std::vector<double> extra_times;
  {
    auto rng = trial_rng(p.seed, static_cast<std::size_t>(-1));
    std::uniform_real_distribution<double> pick(-5.0, 5.0);
    for (int k = 0; k < 8; ++k) extra_times.push_back(pick(rng));
  }

  std::vector<InstanceResult> results(p.trials);
  std::vector<std::string> labels(p.trials);
  std::vector<std::exception_ptr> errors(p.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < p.trials; t = next++) {
      try {
        const Instance inst = random_instance(p.dim, p.group_order, p.family, p.seed, t);
        labels[t] = inst.label;
        results[t] = run_with_times(inst, extra_times, tol);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  unsigned threads = p.threads != 0 ? p.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, p.trials));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Report r;
  r.scenario = "fuzz";
  r.parameters = {{"dim", p.dim},
                  {"group", "cyclic:" + std::to_string(p.group_order)},
                  {"trials", p.trials},
                  {"family", std::string(family_name(p.family))}};
  r.tol = tol;
  r.seed = p.seed;
  const auto& ids = registered_checks();
  for (std::size_t c = 0; c < ids.size(); ++c) {
    std::vector<Verdict> parts;
    parts.reserve(p.trials);
    for (const auto& res : results) parts.push_back(res.checks[c]);
    Verdict v = combine(parts);
    v.check_id = ids[c];
    r.checks.push_back(std::move(v));
  }
  std::map<std::string, std::size_t> counts;
  Json trials = Json::array();
  for (std::size_t t = 0; t < p.trials; ++t) {
    const std::string cls = results[t].diagnostics["classification"];
    ++counts[cls];
    Json row = {{"trial", t}, {"instance", labels[t]}, {"classification", cls}};
    Json failing = Json::array();
    for (const auto& v : results[t].checks) {
      if (v.status == Status::fails) failing.push_back(v.check_id);
    }
    if (!failing.empty()) row["failing"] = failing;
    trials.push_back(row);
  }
  Json count_json = Json::object();
  for (const auto& [k, v] : counts) count_json[k] = v;
  r.diagnostics = {{"classification_counts", count_json}, {"extra_flow_times", extra_times}, {"trials", trials}};
  r.traceability = traceability_json(r.checks);
  return r;
}

Report check_state_action(const FaithfulState& state, const GroupAction& action, const Tolerance& tol) {
  if (state.dim() != action.dim()) throw DimensionMismatch("state and action dimensions differ");
  Instance inst{"user", action, LinearFunctional(state.density(), tol), state,
                whole_group_chain(action.group())};
  InstanceResult result = run_instance(inst, tol);
  Report r;
  r.scenario = "check";
  r.parameters = {{"dim", state.dim()}, {"group_order", action.order()}};
  r.tol = tol;
  r.checks = std::move(result.checks);
  r.diagnostics = std::move(result.diagnostics);
  r.traceability = traceability_json(r.checks);
  return r;
}

const std::vector<std::string>& registered_checks() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v = {"group.homomorphism",
                                  "group.mean.umegaki",
                                  "qi.cocycle.defining_relation",
                                  "qi.cocycle.identity",
                                  "qi.cocycle.chain_rule",
                                  "qi.cocycle.inverse_law",
                                  "qi.cocycle.trace_symmetry",
                                  "qi.strong.positive_commuting",
                                  "qi.kappa.centralizer",
                                  "qi.averaged_state.invariant",
                                  "qi.lemma.fixed_cocycle_is_identity",
                                  "qi.theorem.invariance_equivalence",
                                  "flow.invariants",
                                  "flow.expectation.pinching",
                                  "flow.twisted_by_kappa",
                                  "flow.factor_cocycle_relation",
                                  "flow.group_commutation",
                                  "flow.invariant_case",
                                  "flow.state_level_commutation",
                                  "flow.mean_state_level",
                                  "flow.mean_map_level",
                                  "flow.sufficient_condition",
                                  "flow.inclusion",
                                  "flow.ergodic_coincidence",
                                  "gns.system",
                                  "gns.delta_closed_form"};
    const auto shift = gns_shift_ids();
    v.insert(v.end(), shift.begin(), shift.end());
    v.insert(v.end(), {"tracial.mean_density", "tracial.decomposition", kClosedForms});
    return v;
  }();
  return ids;
}

const std::vector<TraceEntry>& traceability() {
  static const std::vector<TraceEntry> entries = {
      {"Quasi-invariance and its cocycle", {"qi.cocycle.defining_relation", "qi.cocycle.trace_symmetry"}},
      {"Strong quasi-invariance", {"qi.strong.positive_commuting"}},
      {"Normalized multiplicative left cocycle law",
       {"qi.cocycle.identity", "qi.cocycle.chain_rule", "qi.cocycle.inverse_law"}},
      {"Group action and Umegaki mean", {"group.homomorphism", "group.mean.umegaki"}},
      {"Mean cocycle kappa lies in the centralizer", {"qi.kappa.centralizer"}},
      {"Averaged state is G-invariant", {"qi.averaged_state.invariant"}},
      {"Kappa-twisted modular groups", {"flow.twisted_by_kappa"}},
      {"Cocycle relation of the modular flow on a factor", {"flow.factor_cocycle_relation"}},
      {"Flow commutes with G iff cocycles are central", {"flow.group_commutation"}},
      {"Invariant state: flow commutes with G", {"flow.invariant_case"}},
      {"State-level commutation of flow and G", {"flow.state_level_commutation"}},
      {"Cocycle fixed by G is trivial", {"qi.lemma.fixed_cocycle_is_identity"}},
      {"Equivalent conditions for G-invariance", {"qi.theorem.invariance_equivalence"}},
      {"Modular invariant expectation", {"flow.invariants", "flow.expectation.pinching"}},
      {"Means commute with the modular group",
       {"flow.mean_state_level", "flow.mean_map_level", "flow.sufficient_condition", "flow.inclusion"}},
      {"Ergodic coincidence of the two means", {"flow.ergodic_coincidence"}},
      {"Flow-generated quasi-invariant functional", {"example.closed_forms"}},
      {"Rotation group on M_2", {"example.closed_forms"}},
      {"Cyclic translation on a spin ring", {"example.closed_forms"}},
      {"Spin flip on M_2", {"example.closed_forms"}},
      {"Mean density: Hermitian, positive, in the centralizer", {"tracial.mean_density"}},
      {"Decomposition against the invariant trace", {"tracial.decomposition"}},
      {"GNS modular data", {"gns.system", "gns.delta_closed_form"}},
      {"Shifted cyclic vector and the natural cone", {"gns.shift.state", "gns.shift.cone"}},
      {"Modular conjugation unchanged by the shift", {"gns.shift.j_equality"}},
      {"Implementing unitaries U_g and V_g", {"gns.shift.unitaries", "gns.covariance"}},
      {"Exchange relations for S and F", {"gns.relation.s_exchange", "gns.relation.f_exchange"}},
      {"Modular operator relations",
       {"gns.relation.delta_factorization", "gns.relation.s_g_formula",
        "gns.relation.delta_g_sqrt_formula", "gns.relation.u_s_g_formula"}},
      {"Projection onto invariant vectors", {"gns.projection"}},
      {"Lifted expectation and the invariant projection",
       {"gns.lifted_expectation.block1", "gns.lifted_expectation.block2",
        "gns.lifted_expectation.invariance"}},
      {"Abelian compressions", {"gns.abelianness"}},
      {"Subgroup-chain limit", {"gns.subgroup_chain"}},
  };
  return entries;
}

TraceAudit audit_traceability() {
  TraceAudit audit;
  const auto& ids = registered_checks();
  const std::set<std::string> registered(ids.begin(), ids.end());
  std::set<std::string> traced;
  for (const auto& e : traceability()) {
    if (e.check_ids.empty()) audit.untraced_results.push_back(e.result);
    for (const auto& id : e.check_ids) {
      traced.insert(id);
      if (!registered.count(id)) audit.unknown_ids.push_back(id);
    }
  }
  for (const auto& id : ids) {
    if (!traced.count(id)) audit.unmapped_checks.push_back(id);
  }
  return audit;
}

}  // namespace quasi
