#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "qasched/error.hpp"
#include "qasched/format.hpp"

namespace qasched {

/// Largest instance that brute_force_minimum will enumerate.
inline constexpr std::size_t kBruteForceMaxVariables = 26;
/// Largest instance the file formats and containers accept.
inline constexpr std::size_t kMaxVariables = 30;

struct Coupling {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

/// One value in {0,1} per variable.
struct Assignment {
  std::vector<std::uint8_t> bits;

  std::size_t size() const noexcept { return bits.size(); }
  friend bool operator==(const Assignment&, const Assignment&) = default;

  /// Bit i of the basis index gives variable i (least-significant bit first).
  static Assignment from_index(std::uint64_t index, std::size_t n) {
    Assignment a;
    a.bits.resize(n);
    for (std::size_t i = 0; i < n; ++i) a.bits[i] = static_cast<std::uint8_t>((index >> i) & 1U);
    return a;
  }

  std::uint64_t to_index() const noexcept {
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) index |= std::uint64_t{1} << i;
    return index;
  }
};

/// Quadratic pseudo-boolean objective sum_i a_i x_i + sum_{i<j} b_ij x_i x_j.
///
/// Construction canonicalises the couplings: (j,i) becomes (i,j), repeated
/// pairs are summed, diagonal entries are folded into the linear term
/// (x_i^2 == x_i), and the list is sorted by (i,j).
class QuboInstance {
 public:
  QuboInstance() = default;

  QuboInstance(std::size_t n, std::vector<double> linear,
               std::vector<Coupling> quadratic, std::string label = {})
      : n_(n), linear_(std::move(linear)), label_(std::move(label)) {
    if (n_ == 0 || n_ > kMaxVariables)
      throw Error(ErrorKind::validation,
                  "variable count must be in [1, " + std::to_string(kMaxVariables) + "]");
    if (linear_.empty()) linear_.assign(n_, 0.0);
    if (linear_.size() != n_)
      throw Error(ErrorKind::dimension, "linear term count differs from variable count");
    for (double a : linear_)
      if (!std::isfinite(a)) throw Error(ErrorKind::validation, "non-finite linear coefficient");

    for (auto& c : quadratic) {
      if (c.i >= n_ || c.j >= n_)
        throw Error(ErrorKind::validation, "coupling index out of range");
      if (!std::isfinite(c.weight))
        throw Error(ErrorKind::validation, "non-finite coupling coefficient");
      if (c.i > c.j) std::swap(c.i, c.j);
    }
    std::stable_sort(quadratic.begin(), quadratic.end(), [](const Coupling& l, const Coupling& r) {
      return std::tie(l.i, l.j) < std::tie(r.i, r.j);
    });
    for (const auto& c : quadratic) {
      if (c.i == c.j) {
        linear_[c.i] += c.weight;
      } else if (!quadratic_.empty() && quadratic_.back().i == c.i && quadratic_.back().j == c.j) {
        quadratic_.back().weight += c.weight;
      } else {
        quadratic_.push_back(c);
      }
    }
  }

  std::size_t size() const noexcept { return n_; }
  const std::vector<double>& linear() const noexcept { return linear_; }
  const std::vector<Coupling>& quadratic() const noexcept { return quadratic_; }
  const std::string& label() const noexcept { return label_; }

  /// Sum of absolute coefficients; a bound on |Q(x)| for every x.
  double magnitude() const noexcept {
    double m = 0.0;
    for (double a : linear_) m += std::abs(a);
    for (const auto& c : quadratic_) m += std::abs(c.weight);
    return m;
  }

  friend bool operator==(const QuboInstance&, const QuboInstance&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> linear_;
  std::vector<Coupling> quadratic_;
  std::string label_;
};

/// Q(x), summed linear terms first in ascending index, then couplings in
/// ascending (i,j) order.
inline double evaluate(const QuboInstance& q, const Assignment& x) {
  if (x.size() != q.size())
    throw Error(ErrorKind::dimension, "assignment length " + std::to_string(x.size()) +
                                          " differs from variable count " + std::to_string(q.size()));
  double energy = 0.0;
  const auto& a = q.linear();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (x.bits[i]) energy += a[i];
  for (const auto& c : q.quadratic())
    if (x.bits[c.i] && x.bits[c.j]) energy += c.weight;
  return energy;
}

struct BruteForceResult {
  Assignment assignment;
  double energy = 0.0;
  /// Smallest energy strictly above the minimum; empty for a constant landscape.
  std::optional<double> second_energy;
  /// Number of assignments attaining the minimum.
  std::uint64_t ground_degeneracy = 0;
};

/// Energies closer than this are treated as equal by brute_force_minimum.
inline double tie_tolerance(const QuboInstance& q) noexcept {
  return 1e-10 * (1.0 + q.magnitude());
}

/// Exhaustive minimum over all 2^n assignments.
///
/// Walks the reflected Gray code so each step flips one bit and updates the
/// energy from local fields. Fields are resynchronised every 2^16 steps. Ties
/// (within tie_tolerance) resolve to the smallest basis index, and reported
/// energies are recomputed with evaluate().
inline BruteForceResult brute_force_minimum(const QuboInstance& q) {
  const std::size_t n = q.size();
  if (n > kBruteForceMaxVariables)
    throw Error(ErrorKind::capacity, "brute force supports at most " +
                                         std::to_string(kBruteForceMaxVariables) + " variables");

  std::vector<std::vector<std::pair<std::size_t, double>>> neighbours(n);
  for (const auto& c : q.quadratic()) {
    neighbours[c.i].emplace_back(c.j, c.weight);
    neighbours[c.j].emplace_back(c.i, c.weight);
  }

  const double tol = tie_tolerance(q);
  std::vector<std::uint8_t> bits(n, 0);
  std::vector<double> field(q.linear());  // a_k + sum_j b_kj x_j
  double energy = 0.0;

  auto resync = [&] {
    Assignment current{bits};
    energy = evaluate(q, current);
    field = q.linear();
    for (const auto& c : q.quadratic()) {
      if (bits[c.j]) field[c.i] += c.weight;
      if (bits[c.i]) field[c.j] += c.weight;
    }
  };

  std::uint64_t best_index = 0;
  double best = 0.0;
  std::uint64_t degeneracy = 1;
  std::optional<std::uint64_t> second_index;
  double second = std::numeric_limits<double>::infinity();

  auto visit = [&](std::uint64_t index, double e) {
    if (e < best - tol) {
      second_index = best_index;
      second = best;
      best = e;
      best_index = index;
      degeneracy = 1;
    } else if (e <= best + tol) {
      ++degeneracy;
      if (index < best_index) best_index = index;
    } else if (e < second - tol || (e <= second + tol && index < *second_index)) {
      second = e;
      second_index = index;
    }
  };

  const std::uint64_t total = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto k = static_cast<std::size_t>(__builtin_ctzll(step));
    gray ^= std::uint64_t{1} << k;
    const double sign = bits[k] ? -1.0 : 1.0;
    energy += sign * field[k];
    bits[k] ^= 1U;
    for (const auto& [j, w] : neighbours[k]) field[j] += sign * w;
    if ((step & 0xFFFF) == 0) resync();
    visit(gray, energy);
  }

  BruteForceResult result;
  result.assignment = Assignment::from_index(best_index, n);
  result.energy = evaluate(q, result.assignment);
  result.ground_degeneracy = degeneracy;
  if (second_index) result.second_energy = evaluate(q, Assignment::from_index(*second_index, n));
  return result;
}

// ---------------------------------------------------------------------------
// Text format: lines "i j value"; i == j is a linear term; '#' starts a
// comment. The optional header "p qubo 0 <n> <n_linear> <n_quadratic>" is
// written but ignored on read. A comment of the form "# label: <text>"
// carries the instance label.

inline std::string to_text(const QuboInstance& q) {
  std::ostringstream out;
  out << "p qubo 0 " << q.size() << ' ' << q.size() << ' ' << q.quadratic().size() << '\n';
  if (!q.label().empty()) out << "# label: " << q.label() << '\n';
  for (std::size_t i = 0; i < q.size(); ++i)
    out << i << ' ' << i << ' ' << format_real(q.linear()[i]) << '\n';
  for (const auto& c : q.quadratic())
    out << c.i << ' ' << c.j << ' ' << format_real(c.weight) << '\n';
  return out.str();
}

inline QuboInstance parse_text(std::string_view text) {
  std::vector<Coupling> entries;
  std::string label;
  std::size_t n = 0;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto hash = line.find('#'); hash != std::string::npos) {
      constexpr std::string_view tag = "# label: ";
      if (line.compare(hash, tag.size(), tag) == 0 && label.empty())
        label = line.substr(hash + tag.size());
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens[0] == "p") continue;
    if (tokens.size() != 3) throw ParseError(line_no, "expected 'i j value'");
    std::size_t idx[2];
    for (int k = 0; k < 2; ++k) {
      const auto& t = tokens[static_cast<std::size_t>(k)];
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), idx[k]);
      if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ParseError(line_no, "bad variable index '" + t + "'");
      if (idx[k] >= kMaxVariables) throw ParseError(line_no, "variable index too large");
    }
    double value = 0.0;
    if (!parse_real(tokens[2], value)) {
      // strtod accepts nan/inf spellings and saturates on overflow; a token
      // it consumes fully is numeric but unrepresentable.
      char* end = nullptr;
      const std::string& tok = tokens[2];
      value = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) throw ParseError(line_no, "bad value '" + tok + "'");
    }
    if (!std::isfinite(value))
      throw Error(ErrorKind::validation,
                  "line " + std::to_string(line_no) + ": non-finite coefficient");
    n = std::max({n, idx[0] + 1, idx[1] + 1});
    entries.push_back({idx[0], idx[1], value});
  }
  if (n == 0) throw Error(ErrorKind::validation, "instance has no variables");
  return QuboInstance(n, std::vector<double>(n, 0.0), std::move(entries), std::move(label));
}

inline nlohmann::json to_json(const QuboInstance& q) {
  nlohmann::json linear = nlohmann::json::object();
  for (std::size_t i = 0; i < q.size(); ++i) linear[std::to_string(i)] = q.linear()[i];
  nlohmann::json quadratic = nlohmann::json::array();
  for (const auto& c : q.quadratic()) quadratic.push_back({c.i, c.j, c.weight});
  return {{"n", q.size()}, {"linear", linear}, {"quadratic", quadratic}, {"label", q.label()}};
}

inline QuboInstance qubo_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    if (n == 0 || n > kMaxVariables) throw Error(ErrorKind::validation, "bad variable count");
    std::vector<double> linear(n, 0.0);
    for (const auto& [key, value] : j.at("linear").items()) {
      const auto i = std::stoul(key);
      if (i >= n) throw Error(ErrorKind::validation, "linear index out of range");
      if (!value.is_number()) throw Error(ErrorKind::validation, "non-finite linear coefficient");
      linear[i] += value.get<double>();
    }
    std::vector<Coupling> quadratic;
    for (const auto& entry : j.at("quadratic")) {
      if (entry.size() != 3 || !entry[2].is_number())
        throw Error(ErrorKind::validation, "quadratic entries must be [i, j, value]");
      quadratic.push_back({entry[0].get<std::size_t>(), entry[1].get<std::size_t>(),
                           entry[2].get<double>()});
    }
    return QuboInstance(n, std::move(linear), std::move(quadratic),
                        j.value("label", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed instance JSON: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorKind::parse, std::string("malformed instance JSON: ") + e.what());
  }
}

/// Reads either format; ".json" selects the JSON mirror.
inline QuboInstance load_qubo(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
    return qubo_from_json(j);
  }
  return parse_text(content);
}

inline void save_qubo(const QuboInstance& q, const std::filesystem::path& path) {
  if (path.extension() == ".json")
    write_file(path, to_json(q).dump(2) + "\n");
  else
    write_file(path, to_text(q));
}

}  // namespace qasched
