#include "ehrenfest/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>

#include "ehrenfest/case_studies.hpp"
#include "ehrenfest/errors.hpp"
#include "ehrenfest/kernels.hpp"

namespace ehrenfest::oracle {

namespace {

void check_cap(const ModelParams& params, std::uint64_t cap, const char* what) {
  const std::uint64_t count = params.state_count();
  if (count > cap) {
    throw CapExceededError(count, cap,
                           std::string(what) + ": state space N^M = " +
                               (count == UINT64_MAX ? std::string(">= 2^64") : std::to_string(count)) +
                               " exceeds cap " + std::to_string(cap));
  }
}

std::vector<State> sorted_targets(const EnumeratedChain& chain, std::span<const State> targets) {
  if (targets.empty()) throw std::invalid_argument("oracle needs a nonempty target set");
  std::vector<State> out(targets.begin(), targets.end());
  for (const auto& s : out) validate_state(chain.params(), s);
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw std::invalid_argument("oracle target set contains duplicate states");
  }
  return out;
}

// Solves a small dense rational system by Gaussian elimination.
std::vector<Rational> solve_dense(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    while (pivot < n && a[pivot][k].is_zero()) ++pivot;
    if (pivot == n) throw std::domain_error("singular lumped system");
    std::swap(a[pivot], a[k]);
    std::swap(b[pivot], b[k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a[i][k].is_zero()) continue;
      const Rational factor = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= factor * a[k][j];
      b[i] -= factor * b[k];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t k = n; k-- > 0;) {
    Rational acc = b[k];
    for (std::size_t j = k + 1; j < n; ++j) acc -= a[k][j] * x[j];
    x[k] = acc / a[k][k];
  }
  return x;
}

}  // namespace

EnumeratedChain::EnumeratedChain(const ModelParams& params, std::uint64_t cap) : params_(params) {
  params_.validate();
  check_cap(params_, cap, "enumerated chain");
  states_ = enumerate_states(params_);
  build();
}

EnumeratedChain::EnumeratedChain(const ModelParams& params, std::vector<State> states, std::uint64_t cap)
    : params_(params), states_(std::move(states)) {
  params_.validate();
  check_cap(params_, cap, "enumerated chain");
  if (states_.size() != params_.state_count()) {
    throw std::invalid_argument("custom state order must list every state exactly once");
  }
  build();
}

void EnumeratedChain::build() {
  const std::size_t n = states_.size();
  canonical_to_position_.assign(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    validate_state(params_, states_[i]);
    const auto canonical = static_cast<std::size_t>(state_index(params_, states_[i]));
    if (canonical_to_position_[canonical] != n) {
      throw std::invalid_argument("custom state order repeats " + states_[i].to_string());
    }
    canonical_to_position_[canonical] = i;
  }
  const auto d = static_cast<std::size_t>(degree());
  neighbors_.resize(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    State y = states_[i];
    std::size_t slot = 0;
    for (int b = 0; b < params_.balls; ++b) {
      const int original = y[b];
      for (int urn = 1; urn <= params_.urns; ++urn) {
        if (urn == original) continue;
        y[b] = urn;
        neighbors_[i * d + slot++] = static_cast<std::int32_t>(
            canonical_to_position_[static_cast<std::size_t>(state_index(params_, y))]);
      }
      y[b] = original;
    }
  }
}

std::size_t EnumeratedChain::index_of(const State& x) const {
  validate_state(params_, x);
  return canonical_to_position_[static_cast<std::size_t>(state_index(params_, x))];
}

std::span<const std::int32_t> EnumeratedChain::neighbors(std::size_t i) const {
  const auto d = static_cast<std::size_t>(degree());
  return std::span<const std::int32_t>(neighbors_).subspan(i * d, d);
}

Rational EnumeratedChain::transition(std::size_t from, std::size_t to) const {
  const auto row = neighbors(from);
  const bool adjacent = std::find(row.begin(), row.end(), static_cast<std::int32_t>(to)) != row.end();
  return adjacent ? Rational(1, degree()) : Rational(0);
}

namespace {

constexpr std::uint32_t kMersenne31 = 2147483647u;
constexpr std::uint32_t kBackupPrime = 2147483629u;

template <std::uint32_t P>
inline std::uint32_t reduce(std::uint64_t t) {
  if constexpr (P == kMersenne31) {
    t = (t & P) + (t >> 31);
    t = (t & P) + (t >> 31);
    return static_cast<std::uint32_t>(t >= P ? t - P : t);
  } else {
    return static_cast<std::uint32_t>(t % P);
  }
}

std::uint32_t inverse_mod(std::uint32_t a, std::uint32_t p) {
  std::int64_t r0 = p, r1 = a, t0 = 0, t1 = 1;
  while (r1 != 0) {
    const std::int64_t q = r0 / r1;
    std::tie(r0, r1) = std::make_pair(r1, r0 - q * r1);
    std::tie(t0, t1) = std::make_pair(t1, t0 - q * t1);
  }
  return static_cast<std::uint32_t>(t0 < 0 ? t0 + p : t0);
}

std::uint32_t residue(const BigInt& v, std::uint32_t p) {
  return static_cast<std::uint32_t>(mpz_fdiv_ui(v.get_mpz_t(), p));
}

// Dense LU with partial pivoting of diag*I - off*Adj modulo P.
template <std::uint32_t P>
class ModularLU {
 public:
  static std::optional<ModularLU> factor(const std::vector<std::vector<std::int32_t>>& adj, std::uint32_t diag,
                                         std::uint32_t off) {
    ModularLU lu;
    const std::size_t n = adj.size();
    lu.n_ = n;
    lu.a_.assign(n * n, 0);
    lu.perm_.resize(n);
    lu.dinv_.resize(n);
    const std::uint32_t neg_off = off == 0 ? 0 : P - off;
    for (std::size_t i = 0; i < n; ++i) {
      lu.perm_[i] = i;
      lu.a_[i * n + i] = diag;
      for (std::int32_t j : adj[i]) lu.a_[i * n + j] = reduce<P>(std::uint64_t{lu.a_[i * n + j]} + neg_off);
    }
    std::uint32_t* a = lu.a_.data();
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t pivot = k;
      while (pivot < n && a[pivot * n + k] == 0) ++pivot;
      if (pivot == n) return std::nullopt;
      if (pivot != k) {
        std::swap_ranges(a + pivot * n, a + pivot * n + n, a + k * n);
        std::swap(lu.perm_[pivot], lu.perm_[k]);
      }
      const std::uint32_t inv = inverse_mod(a[k * n + k], P);
      lu.dinv_[k] = inv;
      const std::uint32_t* pivot_row = a + k * n;
      for (std::size_t i = k + 1; i < n; ++i) {
        std::uint32_t* row = a + i * n;
        if (row[k] == 0) continue;
        const std::uint32_t f = reduce<P>(std::uint64_t{row[k]} * inv);
        row[k] = f;
        const std::uint64_t neg = P - f;
        for (std::size_t j = k + 1; j < n; ++j) row[j] = reduce<P>(row[j] + neg * pivot_row[j]);
      }
    }
    return lu;
  }

  // In place: v <- A^{-1} v mod P.
  void solve(std::vector<std::uint32_t>& v) const {
    const std::size_t n = n_;
    std::vector<std::uint32_t> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = v[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t* row = a_.data() + i * n;
      std::uint64_t acc = 0;
      for (std::size_t j = 0; j < i; ++j) acc += reduce<P>(std::uint64_t{row[j]} * y[j]);
      y[i] = reduce<P>(y[i] + (P - reduce<P>(acc)));
    }
    for (std::size_t i = n; i-- > 0;) {
      const std::uint32_t* row = a_.data() + i * n;
      std::uint64_t acc = 0;
      for (std::size_t j = i + 1; j < n; ++j) acc += reduce<P>(std::uint64_t{row[j]} * y[j]);
      y[i] = reduce<P>(std::uint64_t{reduce<P>(y[i] + (P - reduce<P>(acc)))} * dinv_[i]);
    }
    v.swap(y);
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint32_t> a_;  // U on and above the diagonal, L multipliers below
  std::vector<std::size_t> perm_;
  std::vector<std::uint32_t> dinv_;
};

BigInt floor_sqrt(const BigInt& v) {
  BigInt r;
  mpz_sqrt(r.get_mpz_t(), v.get_mpz_t());
  return r;
}

// Wang's rational reconstruction of u mod m with |num|, den <= bound.
std::optional<std::pair<BigInt, BigInt>> rational_reconstruct(const BigInt& u, const BigInt& m, const BigInt& bound) {
  BigInt r0 = m, r1 = u, t0 = 0, t1 = 1, q, tmp;
  while (r1 > bound) {
    mpz_fdiv_q(q.get_mpz_t(), r0.get_mpz_t(), r1.get_mpz_t());
    tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (t1 == 0 || abs(t1) > bound) return std::nullopt;
  BigInt g;
  mpz_gcd(g.get_mpz_t(), r1.get_mpz_t(), t1.get_mpz_t());
  if (g != 1) return std::nullopt;
  if (t1 < 0) return std::make_pair(BigInt(-r1), BigInt(-t1));
  return std::make_pair(r1, t1);
}

double log2_abs(const BigInt& v) {
  if (v == 0) return 0.0;
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, v.get_mpz_t());
  return std::log2(std::abs(mant)) + static_cast<double>(exp);
}

}  // namespace

// Exact solver for diag*I - off*Adj_B (symmetric, nonsingular). The matrix is
// factorized modulo a 31-bit prime; solutions are lifted p-adically, rebuilt
// by rational reconstruction and accepted only after an exact integer check.
struct ExactHittingOracle::Factorization {
  std::vector<std::vector<std::int32_t>> adj;
  BigInt diag;
  BigInt off;
  double row_bits = 0.0;  // log2 of the Hadamard bound
  std::variant<ModularLU<kMersenne31>, ModularLU<kBackupPrime>> lu;

  Factorization(std::vector<std::vector<std::int32_t>> adjacency, BigInt d, BigInt o)
      : adj(std::move(adjacency)), diag(std::move(d)), off(std::move(o)), lu(make_lu()) {
    const double ld = log2_abs(diag);
    const double lo = log2_abs(off);
    for (const auto& row : adj) {
      const double big = std::max(ld, lo);
      row_bits += big + 0.5 * std::log2(std::exp2(2 * (ld - big)) +
                                        static_cast<double>(row.size()) * std::exp2(2 * (lo - big)));
    }
  }

  std::variant<ModularLU<kMersenne31>, ModularLU<kBackupPrime>> make_lu() const {
    if (auto a = ModularLU<kMersenne31>::factor(adj, residue(diag, kMersenne31), residue(off, kMersenne31))) {
      return std::move(*a);
    }
    if (auto b = ModularLU<kBackupPrime>::factor(adj, residue(diag, kBackupPrime), residue(off, kBackupPrime))) {
      return std::move(*b);
    }
    throw std::domain_error("absorbing system is singular modulo both lifting primes");
  }

  std::vector<Rational> solve(const std::vector<Rational>& rhs) const {
    const std::size_t n = adj.size();
    BigInt scale = 1;
    for (const auto& r : rhs) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), r.denominator().get_mpz_t());
    std::vector<BigInt> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = rhs[i].numerator() * (scale / rhs[i].denominator());
    const auto [num, den] = std::visit([&](const auto& f) { return lift(f, b); }, lu);
    std::vector<Rational> x(n);
    const BigInt total = den * scale;
    for (std::size_t i = 0; i < n; ++i) x[i] = Rational(num[i], total);
    return x;
  }

  // A*num == den*b exactly.
  bool verify(const std::vector<BigInt>& num, const BigInt& den, const std::vector<BigInt>& b) const {
    BigInt s, lhs;
    for (std::size_t i = 0; i < adj.size(); ++i) {
      s = 0;
      for (std::int32_t j : adj[i]) s += num[j];
      lhs = diag * num[i] - off * s;
      if (lhs != den * b[i]) return false;
    }
    return true;
  }

  std::optional<std::pair<std::vector<BigInt>, BigInt>> reconstruct(const std::vector<BigInt>& x,
                                                                    const BigInt& m) const {
    const BigInt bound = floor_sqrt(m / 2);
    const BigInt half = m / 2;
    std::vector<BigInt> num(x.size());
    BigInt den = 1, a;
    for (std::size_t i = 0; i < x.size(); ++i) {
      a = x[i] * den;
      mpz_fdiv_r(a.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
      if (a > half) a -= m;
      if (abs(a) <= bound) {
        num[i] = a;
        continue;
      }
      if (a < 0) a += m;
      auto r = rational_reconstruct(a, m, bound);
      if (!r) return std::nullopt;
      for (std::size_t j = 0; j < i; ++j) num[j] *= r->second;
      den *= r->second;
      if (den > bound) return std::nullopt;
      num[i] = r->first;
    }
    return std::make_pair(std::move(num), std::move(den));
  }

  template <std::uint32_t P>
  std::pair<std::vector<BigInt>, BigInt> lift(const ModularLU<P>& f, const std::vector<BigInt>& b) const {
    const std::size_t n = adj.size();
    double b_bits = 0.0;
    for (const auto& v : b) b_bits = std::max(b_bits, log2_abs(v));
    b_bits += 0.5 * std::log2(static_cast<double>(n) + 1.0);
    // Cramer: |num| <= H*|b|, den <= H; reconstruction needs m > 2*|num|*den.
    const auto max_steps = static_cast<std::size_t>(std::ceil((2.0 * row_bits + b_bits + 4.0) / 30.0)) + 2;

    std::vector<BigInt> residual = b;
    std::vector<BigInt> x(n, BigInt(0));
    std::vector<std::uint32_t> v(n);
    BigInt pk = 1, t;
    std::size_t next_check = 2;
    for (std::size_t step = 1; step <= max_steps; ++step) {
      for (std::size_t i = 0; i < n; ++i) v[i] = residue(residual[i], P);
      f.solve(v);
      bool residual_zero = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (v[i] != 0) mpz_addmul_ui(x[i].get_mpz_t(), pk.get_mpz_t(), v[i]);
        std::uint64_t s = 0;
        for (std::int32_t j : adj[i]) s += v[j];
        t = diag * static_cast<unsigned long>(v[i]);
        mpz_submul_ui(t.get_mpz_t(), off.get_mpz_t(), s);
        residual[i] -= t;
      }
      for (auto& r : residual) {
        mpz_divexact_ui(r.get_mpz_t(), r.get_mpz_t(), P);
        residual_zero = residual_zero && r == 0;
      }
      pk *= P;
      if (residual_zero) return {std::move(x), BigInt(1)};  // exact integer solution
      if (step == next_check || step == max_steps) {
        next_check += std::max<std::size_t>(2, next_check / 2);
        if (auto r = reconstruct(x, pk); r && verify(r->first, r->second, b)) return std::move(*r);
      }
    }
    throw std::runtime_error("p-adic lifting did not reach a verified solution");
  }
};

ExactHittingOracle::ExactHittingOracle(const EnumeratedChain& chain, std::span<const State> targets,
                                       std::uint64_t cap)
    : chain_(&chain), targets_(sorted_targets(chain, targets)) {
  check_cap(chain.params(), cap, "exact oracle");
  const std::size_t n = chain.size();
  in_target_.assign(n, false);
  for (const auto& t : targets_) in_target_[chain.index_of(t)] = true;
  position_of_.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_target_[i]) {
      position_of_[i] = static_cast<std::int64_t>(transient_.size());
      transient_.push_back(i);
    }
  }
}

ExactHittingOracle::~ExactHittingOracle() = default;
ExactHittingOracle::ExactHittingOracle(ExactHittingOracle&&) noexcept = default;
ExactHittingOracle& ExactHittingOracle::operator=(ExactHittingOracle&&) noexcept = default;

std::optional<std::size_t> ExactHittingOracle::transient_position(const State& x) const {
  const std::int64_t p = position_of_[chain_->index_of(x)];
  if (p < 0) return std::nullopt;
  return static_cast<std::size_t>(p);
}

namespace {

std::vector<std::vector<std::int32_t>> transient_adjacency(const EnumeratedChain& chain,
                                                           const std::vector<std::size_t>& transient,
                                                           const std::vector<std::int64_t>& position_of) {
  std::vector<std::vector<std::int32_t>> adj(transient.size());
  for (std::size_t p = 0; p < transient.size(); ++p) {
    for (std::int32_t j : chain.neighbors(transient[p])) {
      if (position_of[j] >= 0) adj[p].push_back(static_cast<std::int32_t>(position_of[j]));
    }
  }
  return adj;
}

}  // namespace

const std::vector<Rational>& ExactHittingOracle::moment_vector(int order) {
  const std::size_t n = transient_.size();
  const BigInt degree = chain_->degree();
  // With the system scaled by D = M(N-1):
  //   (D I - Adj_B) m_k = D + sum_{1<=j<k} C(k,j) Adj_B m_j
  while (static_cast<int>(moments_.size()) < order) {
    const int k = static_cast<int>(moments_.size()) + 1;
    std::vector<Rational> rhs(n, Rational(degree));
    for (int j = 1; j < k; ++j) {
      const Rational c(binomial(k, j));
      const auto& mj = moments_[j - 1];
      for (std::size_t p = 0; p < n; ++p) {
        Rational acc(0);
        for (std::int32_t nb : chain_->neighbors(transient_[p])) {
          const std::int64_t q = position_of_[nb];
          if (q >= 0) acc += mj[q];
        }
        rhs[p] += c * acc;
      }
    }
    moments_.push_back(n > 0 ? hitting().solve(rhs) : std::vector<Rational>{});
  }
  return moments_[order - 1];
}

const ExactHittingOracle::Factorization& ExactHittingOracle::hitting() {
  if (!hitting_) {
    hitting_ = std::make_unique<Factorization>(transient_adjacency(*chain_, transient_, position_of_),
                                               BigInt(chain_->degree()), BigInt(1));
  }
  return *hitting_;
}

Rational ExactHittingOracle::mean(const State& x) { return raw_moments(x, 1).front(); }

Rational ExactHittingOracle::second_moment(const State& x) { return raw_moments(x, 2).back(); }

std::vector<Rational> ExactHittingOracle::raw_moments(const State& x, int order) {
  if (order < 1) throw std::invalid_argument("moment order must be >= 1");
  const auto p = transient_position(x);
  if (!p) return std::vector<Rational>(order, Rational(0));
  std::vector<Rational> out;
  for (int m = 1; m <= order; ++m) out.push_back(moment_vector(m)[*p]);
  return out;
}

Rational ExactHittingOracle::transform(const State& x, const Rational& z) {
  if (!(z.sign() > 0 && z < Rational(1))) throw std::domain_error("transform argument z must lie in (0, 1)");
  const auto p = transient_position(x);
  if (!p) return Rational(1);
  auto it = transforms_.find(z);
  if (it == transforms_.end()) {
    // (q D I - p Adj_B) h = p * #(neighbours in A), z = p/q.
    const BigInt zp = z.numerator();
    const BigInt zq = z.denominator();
    const Factorization system(transient_adjacency(*chain_, transient_, position_of_),
                               BigInt(zq * chain_->degree()), zp);
    std::vector<Rational> rhs(transient_.size());
    for (std::size_t t = 0; t < transient_.size(); ++t) {
      long hits = 0;
      for (std::int32_t nb : chain_->neighbors(transient_[t])) hits += in_target_[nb] ? 1 : 0;
      rhs[t] = Rational(zp) * Rational(hits);
    }
    it = transforms_.emplace(z, system.solve(rhs)).first;
  }
  return it->second[*p];
}

std::vector<std::pair<State, Rational>> ExactHittingOracle::exit_distribution(const State& x) {
  std::vector<std::pair<State, Rational>> out;
  const auto p = transient_position(x);
  if (!p) {
    for (const auto& t : targets_) out.emplace_back(t, t == x ? Rational(1) : Rational(0));
    return out;
  }
  // The system matrix is symmetric, so row x of its inverse is the solution
  // for e_x; P^x(exit at y) sums it over the transient neighbours of y.
  auto it = exits_.find(*p);
  if (it == exits_.end()) {
    std::vector<Rational> unit(transient_.size(), Rational(0));
    unit[*p] = Rational(1);
    it = exits_.emplace(*p, hitting().solve(unit)).first;
  }
  const auto& column = it->second;
  for (const auto& t : targets_) {
    Rational prob(0);
    for (std::int32_t nb : chain_->neighbors(chain_->index_of(t))) {
      const std::int64_t q = position_of_[nb];
      if (q >= 0) prob += column[q];
    }
    out.emplace_back(t, std::move(prob));
  }
  return out;
}

FloatHittingOracle::FloatHittingOracle(const EnumeratedChain& chain, std::span<const State> targets)
    : chain_(&chain), targets_(sorted_targets(chain, targets)) {
  const std::size_t n = chain.size();
  std::vector<bool> in_target(n, false);
  for (const auto& t : targets_) in_target[chain.index_of(t)] = true;
  position_of_.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_target[i]) {
      position_of_[i] = static_cast<std::int64_t>(transient_.size());
      transient_.push_back(i);
    }
  }
  const std::size_t rows = transient_.size();
  const auto d = static_cast<std::size_t>(chain.degree());
  ell_.assign(rows * d, static_cast<std::int32_t>(rows));
  target_hits_.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto nbrs = chain.neighbors(transient_[r]);
    for (std::size_t j = 0; j < d; ++j) {
      const std::int64_t q = position_of_[nbrs[j]];
      if (q >= 0) {
        ell_[j * rows + r] = static_cast<std::int32_t>(q);
      } else {
        target_hits_[r] += 1.0;
      }
    }
  }
}

std::optional<std::size_t> FloatHittingOracle::transient_position(const State& x) const {
  const std::int64_t p = position_of_[chain_->index_of(x)];
  if (p < 0) return std::nullopt;
  return static_cast<std::size_t>(p);
}

std::vector<double> FloatHittingOracle::apply_transient_kernel(const std::vector<double>& v) {
  // P_B v = v - (I - P_B) v
  const std::size_t rows = transient_.size();
  std::vector<double> padded(v);
  padded.push_back(0.0);
  std::vector<double> out(rows);
  const auto& k = kernels::active_kernels();
  k.gather_apply(ell_.data(), rows, static_cast<std::size_t>(chain_->degree()), padded.data(),
                 1.0 / static_cast<double>(chain_->degree()), out.data());
  for (std::size_t r = 0; r < rows; ++r) out[r] = v[r] - out[r];
  return out;
}

std::vector<double> FloatHittingOracle::solve(double z, const std::vector<double>& rhs) {
  // Conjugate gradients on the symmetric positive definite I - z P_B.
  const std::size_t rows = transient_.size();
  const auto& k = kernels::active_kernels();
  const auto degree = static_cast<std::size_t>(chain_->degree());
  const double coef = z / static_cast<double>(chain_->degree());

  std::vector<double> x(rows, 0.0);
  std::vector<double> r(rhs);
  std::vector<double> p(rows + 1, 0.0);  // trailing pad slot stays 0
  std::copy(r.begin(), r.end(), p.begin());
  std::vector<double> ap(rows);
  double rr = k.dot(r.data(), r.data(), rows);
  const double target = 1e-28 * std::max(rr, 1e-300);
  int iter = 0;
  const int max_iter = 20 * static_cast<int>(rows) + 1000;
  while (rr > target && iter < max_iter) {
    k.gather_apply(ell_.data(), rows, degree, p.data(), coef, ap.data());
    const double alpha = rr / k.dot(p.data(), ap.data(), rows);
    k.axpy(alpha, p.data(), x.data(), rows);
    k.axpy(-alpha, ap.data(), r.data(), rows);
    const double rr_next = k.dot(r.data(), r.data(), rows);
    k.xpby(r.data(), rr_next / rr, p.data(), rows);
    rr = rr_next;
    ++iter;
  }
  if (rr > target) throw std::runtime_error("conjugate gradients did not converge");
  max_iterations_ = std::max(max_iterations_, iter);
  return x;
}

const std::vector<double>& FloatHittingOracle::moment_vector(int order) {
  const std::size_t rows = transient_.size();
  while (static_cast<int>(moments_.size()) < order) {
    const int kth = static_cast<int>(moments_.size()) + 1;
    std::vector<double> rhs(rows, 1.0);
    for (int j = 1; j < kth; ++j) {
      const double c = binomial(kth, j).get_d();
      const auto pm = apply_transient_kernel(moments_[j - 1]);
      for (std::size_t r = 0; r < rows; ++r) rhs[r] += c * pm[r];
    }
    moments_.push_back(solve(1.0, rhs));
  }
  return moments_[order - 1];
}

double FloatHittingOracle::mean(const State& x) { return raw_moments(x, 1).front(); }

std::vector<double> FloatHittingOracle::raw_moments(const State& x, int order) {
  if (order < 1) throw std::invalid_argument("moment order must be >= 1");
  const auto p = transient_position(x);
  if (!p) return std::vector<double>(order, 0.0);
  std::vector<double> out;
  for (int m = 1; m <= order; ++m) out.push_back(moment_vector(m)[*p]);
  return out;
}

double FloatHittingOracle::transform(const State& x, double z) {
  if (!(z > 0.0 && z < 1.0)) throw std::domain_error("transform argument z must lie in (0, 1)");
  const auto p = transient_position(x);
  if (!p) return 1.0;
  std::vector<double> rhs(transient_.size());
  const double scale = z / static_cast<double>(chain_->degree());
  for (std::size_t r = 0; r < rhs.size(); ++r) rhs[r] = scale * target_hits_[r];
  return solve(z, rhs)[*p];
}

std::vector<std::pair<State, double>> FloatHittingOracle::exit_distribution(const State& x) {
  std::vector<std::pair<State, double>> out;
  const auto p = transient_position(x);
  for (const auto& t : targets_) {
    if (!p) {
      out.emplace_back(t, t == x ? 1.0 : 0.0);
      continue;
    }
    const std::size_t target_index = chain_->index_of(t);
    std::vector<double> rhs(transient_.size(), 0.0);
    const double w = 1.0 / static_cast<double>(chain_->degree());
    for (std::size_t q = 0; q < transient_.size(); ++q) {
      for (std::int32_t nb : chain_->neighbors(transient_[q])) {
        if (static_cast<std::size_t>(nb) == target_index) rhs[q] += w;
      }
    }
    out.emplace_back(t, solve(1.0, rhs)[*p]);
  }
  return out;
}

Rational solve_mean(const EnumeratedChain& chain, std::span<const State> targets, const State& x,
                    std::uint64_t cap) {
  return ExactHittingOracle(chain, targets, cap).mean(x);
}

Rational solve_second_moment(const EnumeratedChain& chain, std::span<const State> targets,
                             const State& x, std::uint64_t cap) {
  return ExactHittingOracle(chain, targets, cap).second_moment(x);
}

Rational solve_transform(const EnumeratedChain& chain, std::span<const State> targets, const State& x,
                         const Rational& z, std::uint64_t cap) {
  return ExactHittingOracle(chain, targets, cap).transform(x, z);
}

std::vector<std::pair<State, Rational>> solve_exit_distribution(const EnumeratedChain& chain,
                                                                std::span<const State> targets,
                                                                const State& x, std::uint64_t cap) {
  return ExactHittingOracle(chain, targets, cap).exit_distribution(x);
}

Rational lumped_count_oracle(const ModelParams& params, int reference_urn, int k, int h) {
  params.validate();
  const int m = params.balls;
  if (reference_urn < 1 || reference_urn > params.urns) {
    throw std::invalid_argument("reference urn outside 1.." + std::to_string(params.urns));
  }
  if (k < 0 || k > m || h < 0 || h > m) throw std::invalid_argument("count level outside [0, M]");
  if (k == h) return Rational(0);
  const cases::CountChain chain(params);
  // Unknowns E_i for i != h:  E_i - sum_j P(i,j) E_j = 1.
  std::vector<int> unknowns;
  for (int i = 0; i <= m; ++i) {
    if (i != h) unknowns.push_back(i);
  }
  const std::size_t n = unknowns.size();
  auto column = [&](int level) -> std::optional<std::size_t> {
    if (level == h || level < 0 || level > m) return std::nullopt;
    return static_cast<std::size_t>(level < h ? level : level - 1);
  };
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n, Rational(0)));
  std::vector<Rational> b(n, Rational(1));
  for (std::size_t r = 0; r < n; ++r) {
    const int i = unknowns[r];
    a[r][r] += Rational(1);
    if (auto c = column(i)) a[r][*c] -= chain.stay(i);
    if (auto c = column(i - 1)) a[r][*c] -= chain.down(i);
    if (auto c = column(i + 1)) a[r][*c] -= chain.up(i);
  }
  const auto e = solve_dense(std::move(a), std::move(b));
  return e[*column(k)];
}

}  // namespace ehrenfest::oracle
