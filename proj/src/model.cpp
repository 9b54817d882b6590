#include "ehrenfest/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/container_hash/hash.hpp>
#include "json.hpp"

namespace ehrenfest {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw std::invalid_argument("expected an integer, got an empty field");
  int value = 0;
  std::size_t used = 0;
  try {
    value = std::stoi(std::string(text), &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an integer, got '" + std::string(text) + "'");
  }
  if (used != text.size()) {
    throw std::invalid_argument("expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::vector<State> load_explicit_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open explicit set file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("explicit set file '" + path + "': " + e.what());
  }
  if (!doc.is_array()) throw std::invalid_argument("explicit set file must hold an array of arrays");
  std::vector<State> states;
  for (const auto& row : doc) {
    if (!row.is_array()) throw std::invalid_argument("explicit set entries must be integer arrays");
    std::vector<int> pos;
    for (const auto& v : row) {
      if (!v.is_number_integer()) throw std::invalid_argument("explicit set entries must be integers");
      pos.push_back(v.get<int>());
    }
    states.emplace_back(std::move(pos));
  }
  return states;
}

std::string join_states(std::span<const State> states, char sep) {
  std::string out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i) out += sep;
    out += states[i].to_string();
  }
  return out;
}

}  // namespace

void ModelParams::validate() const {
  if (urns < 2) throw std::invalid_argument("need at least 2 urns, got N=" + std::to_string(urns));
  if (balls < 1) throw std::invalid_argument("need at least 1 ball, got M=" + std::to_string(balls));
}

std::uint64_t ModelParams::state_count() const {
  std::uint64_t count = 1;
  for (int i = 0; i < balls; ++i) {
    if (count > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(urns)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= static_cast<std::uint64_t>(urns);
  }
  return count;
}

State State::parse(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '(' && text.back() == ')') {
    text = text.substr(1, text.size() - 2);
  }
  std::vector<int> pos;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto field = text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start);
    pos.push_back(parse_int(field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return State(std::move(pos));
}

std::string State::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(positions_[i]);
  }
  return out + ")";
}

std::size_t StateHash::operator()(const State& s) const noexcept {
  return boost::hash_range(s.positions().begin(), s.positions().end());
}

void validate_state(const ModelParams& params, const State& x) {
  if (x.size() != static_cast<std::size_t>(params.balls)) {
    throw std::invalid_argument("state " + x.to_string() + " has " + std::to_string(x.size()) +
                                " balls, expected M=" + std::to_string(params.balls));
  }
  for (int urn : x.positions()) {
    if (urn < 1 || urn > params.urns) {
      throw std::invalid_argument("state " + x.to_string() + " uses urn " + std::to_string(urn) +
                                  " outside 1.." + std::to_string(params.urns));
    }
  }
}

int overlap(const State& x, const State& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("overlap of states with different lengths: " + x.to_string() +
                                " vs " + y.to_string());
  }
  int same = 0;
  for (std::size_t i = 0; i < x.size(); ++i) same += x[i] == y[i] ? 1 : 0;
  return same;
}

Rational transition_prob(const ModelParams& params, const State& x, const State& y) {
  if (overlap(x, y) != params.balls - 1) return Rational(0);
  return Rational(1, params.degree());
}

double single_ball_semigroup(const ModelParams& params, double t, int i, int j) {
  if (!(t >= 0.0)) throw std::domain_error("semigroup time must be non-negative");
  const double n = params.urns;
  const double decay = std::exp(-n * t / (n - 1.0));
  if (i == j) return ((n - 1.0) * decay + 1.0) / n;
  return (1.0 - decay) / n;
}

double product_semigroup(const ModelParams& params, double t, const State& x, const State& z) {
  if (!(t >= 0.0)) throw std::domain_error("semigroup time must be non-negative");
  const int k = overlap(x, z);
  const double stay = single_ball_semigroup(params, t, 1, 1);
  const double move = single_ball_semigroup(params, t, 1, 2);
  return std::pow(stay, k) * std::pow(move, params.balls - k);
}

std::vector<State> enumerate_states(const ModelParams& params) {
  params.validate();
  const std::uint64_t count = params.state_count();
  if (count > (std::uint64_t{1} << 32)) throw std::length_error("state space too large to enumerate");
  std::vector<State> states;
  states.reserve(static_cast<std::size_t>(count));
  State current = State::constant(params.balls, 1);
  for (std::uint64_t n = 0; n < count; ++n) {
    states.push_back(current);
    for (int b = 0; b < params.balls; ++b) {
      if (++current[b] <= params.urns) break;
      current[b] = 1;
    }
  }
  return states;
}

std::uint64_t state_index(const ModelParams& params, const State& x) {
  std::uint64_t index = 0;
  for (std::size_t b = x.size(); b-- > 0;) {
    index = index * static_cast<std::uint64_t>(params.urns) + static_cast<std::uint64_t>(x[b] - 1);
  }
  return index;
}

State state_from_index(const ModelParams& params, std::uint64_t index) {
  std::vector<int> pos(params.balls);
  for (int b = 0; b < params.balls; ++b) {
    pos[b] = static_cast<int>(index % static_cast<std::uint64_t>(params.urns)) + 1;
    index /= static_cast<std::uint64_t>(params.urns);
  }
  return State(std::move(pos));
}

SetDescriptor SetDescriptor::singleton(State y) {
  SetDescriptor d;
  d.kind = SetKind::Singleton;
  d.states = {std::move(y)};
  return d;
}

SetDescriptor SetDescriptor::pair(State y, State z) {
  SetDescriptor d;
  d.kind = SetKind::Pair;
  d.states = {std::move(y), std::move(z)};
  return d;
}

SetDescriptor SetDescriptor::diagonal() {
  SetDescriptor d;
  d.kind = SetKind::Diagonal;
  return d;
}

SetDescriptor SetDescriptor::count(int level, int reference_urn) {
  SetDescriptor d;
  d.kind = SetKind::Count;
  d.level = level;
  d.reference_urn = reference_urn;
  return d;
}

SetDescriptor SetDescriptor::distinct() {
  SetDescriptor d;
  d.kind = SetKind::Distinct;
  return d;
}

SetDescriptor SetDescriptor::explicit_set(std::vector<State> states) {
  SetDescriptor d;
  d.kind = SetKind::Explicit;
  d.states = std::move(states);
  return d;
}

std::string SetDescriptor::to_string() const {
  auto bare = [](const State& s) {
    const std::string t = s.to_string();
    return t.substr(1, t.size() - 2);
  };
  switch (kind) {
    case SetKind::Singleton:
      return "singleton:" + bare(states.at(0));
    case SetKind::Pair:
      return "pair:" + states.at(0).to_string() + ";" + states.at(1).to_string();
    case SetKind::Diagonal:
      return "diagonal";
    case SetKind::Count:
      return "count:" + std::to_string(level) + ":" + std::to_string(reference_urn);
    case SetKind::Distinct:
      return "distinct";
    case SetKind::Explicit:
      return "explicit:" + join_states(states, ';');
  }
  return {};
}

SetDescriptor parse_set_descriptor(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  const std::string_view head = trim(text.substr(0, colon));
  const std::string_view body = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  if (head == "diagonal" || head == "distinct") {
    if (colon != std::string_view::npos && !trim(body).empty()) {
      throw std::invalid_argument("'" + std::string(head) + "' takes no arguments");
    }
    return head == "diagonal" ? SetDescriptor::diagonal() : SetDescriptor::distinct();
  }
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("unknown set descriptor '" + std::string(text) + "'");
  }
  if (head == "singleton") return SetDescriptor::singleton(State::parse(body));
  if (head == "pair") {
    const auto semi = body.find(';');
    if (semi == std::string_view::npos) throw std::invalid_argument("pair needs two states separated by ';'");
    return SetDescriptor::pair(State::parse(body.substr(0, semi)), State::parse(body.substr(semi + 1)));
  }
  if (head == "count") {
    const auto second = body.find(':');
    const int level = parse_int(body.substr(0, second));
    const int urn = second == std::string_view::npos ? 2 : parse_int(body.substr(second + 1));
    return SetDescriptor::count(level, urn);
  }
  if (head == "explicit") {
    const std::string_view arg = trim(body);
    if (!arg.empty() && arg.front() == '@') return SetDescriptor::explicit_set(load_explicit_json(std::string(arg.substr(1))));
    std::vector<State> states;
    std::size_t start = 0;
    while (start <= arg.size()) {
      const auto semi = arg.find(';', start);
      states.push_back(State::parse(arg.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start)));
      if (semi == std::string_view::npos) break;
      start = semi + 1;
    }
    return SetDescriptor::explicit_set(std::move(states));
  }
  throw std::invalid_argument("unknown set descriptor '" + std::string(text) + "'");
}

std::vector<State> materialize(const SetDescriptor& descriptor, const ModelParams& params) {
  params.validate();
  const int n = params.urns;
  const int m = params.balls;
  std::vector<State> out;
  switch (descriptor.kind) {
    case SetKind::Singleton:
      validate_state(params, descriptor.states.at(0));
      out = descriptor.states;
      break;
    case SetKind::Pair:
      if (descriptor.states.size() != 2) throw std::invalid_argument("pair needs exactly two states");
      validate_state(params, descriptor.states[0]);
      validate_state(params, descriptor.states[1]);
      if (descriptor.states[0] == descriptor.states[1]) {
        throw std::invalid_argument("pair states must be distinct");
      }
      out = descriptor.states;
      break;
    case SetKind::Diagonal:
      for (int urn = 1; urn <= n; ++urn) out.push_back(State::constant(m, urn));
      break;
    case SetKind::Count: {
      if (descriptor.level < 0 || descriptor.level > m) {
        throw std::invalid_argument("count level h=" + std::to_string(descriptor.level) +
                                    " outside [0, " + std::to_string(m) + "]");
      }
      if (descriptor.reference_urn < 1 || descriptor.reference_urn > n) {
        throw std::invalid_argument("count reference urn outside 1.." + std::to_string(n));
      }
      const State ref = State::constant(m, descriptor.reference_urn);
      for (auto& s : enumerate_states(params)) {
        if (overlap(s, ref) == descriptor.level) out.push_back(std::move(s));
      }
      break;
    }
    case SetKind::Distinct: {
      if (m > n) {
        throw std::invalid_argument("distinct set needs M <= N (M=" + std::to_string(m) +
                                    ", N=" + std::to_string(n) + ")");
      }
      // Injective assignments: choose an M-subset of urns, then permute it.
      std::vector<int> chosen(n);
      std::iota(chosen.begin(), chosen.end(), 1);
      std::vector<bool> mask(n, false);
      std::fill(mask.begin(), mask.begin() + m, true);
      do {
        std::vector<int> subset;
        for (int i = 0; i < n; ++i) {
          if (mask[i]) subset.push_back(chosen[i]);
        }
        do {
          out.emplace_back(subset);
        } while (std::next_permutation(subset.begin(), subset.end()));
      } while (std::prev_permutation(mask.begin(), mask.end()));
      break;
    }
    case SetKind::Explicit:
      if (descriptor.states.empty()) throw std::invalid_argument("explicit set is empty");
      for (const auto& s : descriptor.states) validate_state(params, s);
      out = descriptor.states;
      break;
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw std::invalid_argument("target set contains duplicate states");
  }
  if (out.empty()) throw std::invalid_argument("target set is empty");
  return out;
}

std::vector<int> overlap_profile(const State& y, std::span<const State> targets) {
  std::vector<int> profile;
  profile.reserve(targets.size());
  for (const auto& z : targets) profile.push_back(overlap(y, z));
  std::sort(profile.begin(), profile.end());
  return profile;
}

std::optional<ProfileMismatch> find_profile_mismatch(std::span<const State> targets) {
  if (targets.empty()) throw std::invalid_argument("symmetry test on an empty set");
  std::vector<State> sorted(targets.begin(), targets.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("symmetry test on a set with duplicate states");
  }
  // Sorted profiles are equal iff their overlap histograms are.
  const std::size_t m = sorted.front().size();
  for (const auto& s : sorted) {
    if (s.size() != m) throw std::invalid_argument("states of different lengths in one set");
  }
  auto histogram = [&](const State& y) {
    std::vector<std::size_t> h(m + 1, 0);
    const auto py = y.positions();
    for (const auto& z : sorted) {
      const auto pz = z.positions();
      std::size_t same = 0;
      for (std::size_t b = 0; b < m; ++b) same += py[b] == pz[b];
      ++h[same];
    }
    return h;
  };
  const auto reference = histogram(sorted.front());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (histogram(sorted[i]) != reference) {
      return ProfileMismatch{sorted.front(), overlap_profile(sorted.front(), sorted), sorted[i],
                             overlap_profile(sorted[i], sorted)};
    }
  }
  return std::nullopt;
}

bool is_symmetric_family(std::span<const State> targets) {
  return !find_profile_mismatch(targets).has_value();
}

ProductPermutation::ProductPermutation(std::vector<std::vector<int>> maps) : maps_(std::move(maps)) {
  for (const auto& map : maps_) {
    std::vector<int> image = map;
    std::sort(image.begin(), image.end());
    for (std::size_t i = 0; i < image.size(); ++i) {
      if (image[i] != static_cast<int>(i) + 1) {
        throw std::invalid_argument("permutation map is not a bijection of 1..N");
      }
    }
  }
}

ProductPermutation ProductPermutation::identity(const ModelParams& params) {
  std::vector<int> id(params.urns);
  std::iota(id.begin(), id.end(), 1);
  return ProductPermutation(std::vector<std::vector<int>>(params.balls, id));
}

ProductPermutation ProductPermutation::random(const ModelParams& params, std::mt19937_64& rng) {
  std::vector<std::vector<int>> maps(params.balls, std::vector<int>(params.urns));
  for (auto& map : maps) {
    std::iota(map.begin(), map.end(), 1);
    std::shuffle(map.begin(), map.end(), rng);
  }
  return ProductPermutation(std::move(maps));
}

State ProductPermutation::apply(const State& x) const {
  if (x.size() != maps_.size()) throw std::invalid_argument("permutation and state lengths differ");
  std::vector<int> pos(x.size());
  for (std::size_t b = 0; b < x.size(); ++b) pos[b] = maps_[b].at(static_cast<std::size_t>(x[b] - 1));
  return State(std::move(pos));
}

std::vector<State> ProductPermutation::apply(std::span<const State> states) const {
  std::vector<State> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(apply(s));
  return out;
}

}  // namespace ehrenfest
