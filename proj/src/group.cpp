#include "quasi/group.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "quasi/errors.hpp"

namespace quasi {

namespace {

constexpr std::size_t kExhaustiveOrder = 64;
constexpr std::size_t kSampledTriples = 20000;

bool is_permutation_of_range(const std::vector<std::size_t>& v, std::size_t n) {
  std::vector<bool> seen(n, false);
  for (std::size_t x : v) {
    if (x >= n || seen[x]) return false;
    seen[x] = true;
  }
  return true;
}

Matrix random_matrix(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) m(i, j) = cplx(normal(rng), normal(rng));
  }
  return m;
}

}  // namespace

FiniteGroup::FiniteGroup(GroupTable table) : table_(std::move(table)) {
  const std::size_t n = table_.size();
  if (n == 0) throw InvalidGroup("group table is empty");
  for (const auto& row : table_) {
    if (row.size() != n) throw InvalidGroup("group table is not square");
    if (!is_permutation_of_range(row, n)) throw InvalidGroup("table row is not a permutation");
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::size_t> column(n);
    for (std::size_t r = 0; r < n; ++r) column[r] = table_[r][c];
    if (!is_permutation_of_range(column, n)) throw InvalidGroup("table column is not a permutation");
  }

  bool found = false;
  for (std::size_t e = 0; e < n && !found; ++e) {
    bool is_identity = true;
    for (std::size_t a = 0; a < n && is_identity; ++a) {
      is_identity = table_[e][a] == a && table_[a][e] == a;
    }
    if (is_identity) {
      identity_ = e;
      found = true;
    }
  }
  if (!found) throw InvalidGroup("group table has no identity");

  inverse_.assign(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (table_[a][b] == identity_) inverse_[a] = b;
    }
    if (inverse_[a] == n || table_[inverse_[a]][a] != identity_) {
      throw InvalidGroup("element " + std::to_string(a) + " has no two-sided inverse");
    }
  }

  auto associative = [&](std::size_t a, std::size_t b, std::size_t c) {
    return table_[table_[a][b]][c] == table_[a][table_[b][c]];
  };
  if (n <= kExhaustiveOrder) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t c = 0; c < n; ++c) {
          if (!associative(a, b, c)) throw InvalidGroup("group table is not associative");
        }
      }
    }
  } else {
    std::mt19937_64 rng(n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t s = 0; s < kSampledTriples; ++s) {
      if (!associative(pick(rng), pick(rng), pick(rng))) {
        throw InvalidGroup("group table is not associative");
      }
    }
  }
}

bool FiniteGroup::is_subgroup(const std::vector<std::size_t>& elements) const {
  std::vector<bool> member(order(), false);
  for (std::size_t e : elements) {
    if (e >= order()) return false;
    member[e] = true;
  }
  if (!member[identity_]) return false;
  for (std::size_t a : elements) {
    if (!member[inverse_[a]]) return false;
    for (std::size_t b : elements) {
      if (!member[table_[a][b]]) return false;
    }
  }
  return true;
}

FiniteGroup cyclic_group(std::size_t n) {
  if (n == 0) throw InvalidParams("cyclic group order must be >= 1");
  GroupTable table(n, std::vector<std::size_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) table[i][j] = (i + j) % n;
  }
  return FiniteGroup(std::move(table));
}

std::vector<std::vector<std::size_t>> cyclic_subgroup_chain(std::size_t n) {
  if (n == 0) throw InvalidParams("cyclic group order must be >= 1");
  std::vector<std::size_t> primes;
  std::size_t rest = n;
  for (std::size_t p = 2; p * p <= rest; ++p) {
    while (rest % p == 0) {
      primes.push_back(p);
      rest /= p;
    }
  }
  if (rest > 1) primes.push_back(rest);

  std::vector<std::vector<std::size_t>> chain;
  std::size_t order = 1;
  auto subgroup_of_order = [n](std::size_t d) {
    std::vector<std::size_t> elems;
    for (std::size_t k = 0; k < d; ++k) elems.push_back(k * (n / d));
    return elems;
  };
  chain.push_back(subgroup_of_order(1));
  for (std::size_t p : primes) {
    order *= p;
    chain.push_back(subgroup_of_order(order));
  }
  return chain;
}

StarAutomorphism::StarAutomorphism(Matrix unitary, const Tolerance& tol) : u_(std::move(unitary)) {
  if (u_.rows() == 0 || u_.rows() != u_.cols()) {
    throw DimensionMismatch("implementing unitary must be square");
  }
  if (!is_unitary(u_, tol)) {
    throw NotUnitary("implementing matrix is not unitary (deviation " +
                     std::to_string(unitary_deviation(u_)) + ")");
  }
  std::mt19937_64 rng(0x5eed);
  for (int sample = 0; sample < 3; ++sample) {
    const Matrix a = random_matrix(dim(), rng);
    const Matrix b = random_matrix(dim(), rng);
    const auto mult = approx_equal(apply(a * b), apply(a) * apply(b), tol);
    const auto star = approx_equal(apply(a.adjoint()), apply(a).adjoint(), tol);
    if (!mult.equal || !star.equal) {
      throw NotUnitary("conjugation failed the *-automorphism self-test");
    }
  }
}

double homomorphism_deviation(const Matrix& ug, const Matrix& uh, const Matrix& ugh) {
  const Matrix w = ugh.adjoint() * ug * uh;
  const cplx phase = w.trace() / static_cast<double>(w.rows());
  return max_entry_deviation(w, phase * identity(w.rows()));
}

GroupAction::GroupAction(FiniteGroup group, const std::vector<Matrix>& unitaries,
                         const Tolerance& tol)
    : group_(std::move(group)) {
  if (unitaries.size() != group_.order()) {
    throw DimensionMismatch("need one unitary per group element: got " +
                            std::to_string(unitaries.size()) + " for order " +
                            std::to_string(group_.order()));
  }
  maps_.reserve(unitaries.size());
  for (const auto& u : unitaries) {
    if (u.rows() != unitaries.front().rows()) {
      throw DimensionMismatch("unitaries act on different dimensions");
    }
    maps_.emplace_back(u, tol);
  }

  const std::size_t e = group_.identity();
  const Matrix& ue = maps_[e].implementing_unitary();
  // Ad(u_e) = id exactly when u_e is a scalar multiple of I.
  const double identity_dev =
      max_entry_deviation(ue, (ue.trace() / static_cast<double>(dim())) * identity(dim()));
  if (identity_dev > tol.threshold(1.0, 1.0)) throw HomomorphismViolation(e, e, identity_dev);

  const std::size_t n = group_.order();
  auto check_pair = [&](std::size_t g, std::size_t h) {
    const double dev =
        homomorphism_deviation(maps_[g].implementing_unitary(), maps_[h].implementing_unitary(),
                               maps_[group_.multiply(g, h)].implementing_unitary());
    if (dev > tol.threshold(1.0, 1.0)) throw HomomorphismViolation(g, h, dev);
  };
  if (n <= kExhaustiveOrder) {
    for (std::size_t g = 0; g < n; ++g) {
      for (std::size_t h = 0; h < n; ++h) check_pair(g, h);
    }
  } else {
    std::mt19937_64 rng(n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t s = 0; s < kSampledTriples; ++s) check_pair(pick(rng), pick(rng));
  }
}

std::vector<Matrix> GroupAction::unitaries() const {
  std::vector<Matrix> out;
  out.reserve(maps_.size());
  for (const auto& m : maps_) out.push_back(m.implementing_unitary());
  return out;
}

GroupAction build_action(const FiniteGroup& group, const std::vector<Matrix>& unitaries,
                         const Tolerance& tol) {
  return GroupAction(group, unitaries, tol);
}

Matrix mean_over_elements(const GroupAction& action, const std::vector<std::size_t>& elements,
                          const Matrix& x) {
  if (x.rows() != action.dim() || x.cols() != action.dim()) {
    throw DimensionMismatch("mean over group: operand dimension");
  }
  if (elements.empty()) throw InvalidParams("mean over an empty set of elements");
  Matrix sum = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t g : elements) sum += action.apply(g, x);
  return sum / static_cast<double>(elements.size());
}

Matrix mean_over_group(const GroupAction& action, const Matrix& x) {
  std::vector<std::size_t> all(action.order());
  for (std::size_t g = 0; g < all.size(); ++g) all[g] = g;
  return mean_over_elements(action, all, x);
}

AlgebraBasis fixed_point_algebra(const std::vector<StarAutomorphism>& maps, Index dim,
                                 const Tolerance& tol) {
  std::vector<Matrix> us;
  us.reserve(maps.size());
  for (const auto& m : maps) {
    if (m.dim() != dim) throw DimensionMismatch("fixed points: maps act on different dimensions");
    us.push_back(m.implementing_unitary());
  }
  return fixed_points_of_unitaries(us, dim, tol);
}

AlgebraBasis fixed_point_algebra(const GroupAction& action, const Tolerance& tol) {
  return fixed_points_of_unitaries(action.unitaries(), action.dim(), tol);
}

Verdict check_action_homomorphism(const GroupAction& action, const Tolerance& tol) {
  DeviationTracker tr;
  const auto& group = action.group();
  const std::size_t e = group.identity();
  const Matrix& ue = action.map(e).implementing_unitary();
  tr.observe(max_entry_deviation(ue, (ue.trace() / static_cast<double>(action.dim())) *
                                         identity(action.dim())),
             tol.threshold(1.0, 1.0), Witness{e, std::nullopt, "identity element"});
  for (std::size_t g = 0; g < action.order(); ++g) {
    for (std::size_t h = 0; h < action.order(); ++h) {
      const double dev = homomorphism_deviation(action.map(g).implementing_unitary(),
                                                action.map(h).implementing_unitary(),
                                                action.map(group.multiply(g, h)).implementing_unitary());
      tr.observe(dev, tol.threshold(1.0, 1.0),
                 Witness{g, std::nullopt, "pair (" + std::to_string(g) + ", " + std::to_string(h) + ")"});
    }
  }
  return tr.finish("group.homomorphism");
}

Verdict check_mean_properties(const GroupAction& action, const Tolerance& tol) {
  constexpr std::size_t kBimoduleElements = 8;
  DeviationTracker tr;
  const Index n = action.dim();
  const AlgebraBasis fixed = fixed_point_algebra(action, tol);
  const std::size_t used = std::min(kBimoduleElements, fixed.dimension());
  const auto units = matrix_units(n);
  for (std::size_t k = 0; k < units.size(); ++k) {
    const Matrix& x = units[k];
    const std::string label = "E_" + std::to_string(k / static_cast<std::size_t>(n)) +
                              std::to_string(k % static_cast<std::size_t>(n));
    const Matrix ex = mean_over_group(action, x);
    observe_equal(tr, mean_over_group(action, ex), ex, tol, Witness{{}, {}, "idempotence " + label});
    observe_equal(tr, mean_over_group(action, Matrix(x.adjoint())), Matrix(ex.adjoint()), tol,
                  Witness{{}, {}, "adjoint " + label});
    const Matrix positive = mean_over_group(action, Matrix(x.adjoint() * x));
    const double lowest = hermitian_eigen((positive + positive.adjoint()) / 2.0, tol).values(0);
    tr.observe(lowest >= 0.0 ? 0.0 : -lowest, tol.threshold(1.0, 1.0),
               Witness{{}, {}, "positivity " + label});
    for (std::size_t g = 0; g < action.order(); ++g) {
      observe_equal(tr, action.apply(g, ex), ex, tol, Witness{g, std::nullopt, "range fixed " + label});
      Matrix left = Matrix::Zero(n, n);
      Matrix right = Matrix::Zero(n, n);
      for (std::size_t h = 0; h < action.order(); ++h) {
        left += action.apply(action.group().multiply(g, h), x);
        right += action.apply(action.group().multiply(h, g), x);
      }
      const double inv_order = 1.0 / static_cast<double>(action.order());
      observe_equal(tr, Matrix(left * inv_order), ex, tol,
                    Witness{g, std::nullopt, "left translation " + label});
      observe_equal(tr, Matrix(right * inv_order), ex, tol,
                    Witness{g, std::nullopt, "right translation " + label});
    }
    for (std::size_t i = 0; i < used; ++i) {
      for (std::size_t j = 0; j < used; ++j) {
        const Matrix& a = fixed.basis()[i];
        const Matrix& b = fixed.basis()[j];
        observe_equal(tr, mean_over_group(action, Matrix(a * x * b)), Matrix(a * ex * b), tol,
                      Witness{{}, {}, "bimodule " + label});
      }
    }
  }
  return tr.finish("group.mean.umegaki");
}

}  // namespace quasi
