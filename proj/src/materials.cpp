#include "casimir/materials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"

namespace casimir::materials {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const Tabulated& t) {
  if (t.xi.empty()) throw ParseError("tabulated model: no data points", 0);
  if (t.xi.size() != t.epsilon.size()) {
    throw ParseError("tabulated model: column length mismatch", 0);
  }
  for (std::size_t i = 0; i < t.xi.size(); ++i) {
    if (!(t.xi[i] > 0.0) || !std::isfinite(t.xi[i])) {
      throw ParseError("tabulated model: xi must be positive", static_cast<int>(i) + 1);
    }
    if (!(t.epsilon[i] >= 1.0) || !std::isfinite(t.epsilon[i])) {
      throw ParseError("tabulated model: epsilon must be >= 1", static_cast<int>(i) + 1);
    }
    if (i > 0 && !(t.xi[i] > t.xi[i - 1])) {
      throw ParseError("tabulated model: non-monotone xi grid", static_cast<int>(i) + 1);
    }
  }
}

double tabulated_epsilon(const Tabulated& t, double xi) {
  const auto& xs = t.xi;
  const auto& es = t.epsilon;
  const std::size_t n = xs.size();
  if (xi < xs.front() || xi > xs.back()) {
    if (!t.extrapolate) {
      std::ostringstream msg;
      msg << "tabulated model: xi = " << xi << " outside [" << xs.front() << ", " << xs.back()
          << "]";
      throw DomainError(msg.str());
    }
    if (xi < xs.front()) return 1.0 + (es.front() - 1.0) * (xs.front() / xi);
    const double r = xs.back() / xi;
    return 1.0 + (es.back() - 1.0) * r * r;
  }
  if (n == 1) return es.front();
  auto it = std::upper_bound(xs.begin(), xs.end(), xi);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  if (hi >= n) hi = n - 1;
  const std::size_t lo = hi - 1;
  const double w = std::log(xi / xs[lo]) / std::log(xs[hi] / xs[lo]);
  return std::exp((1.0 - w) * std::log(es[lo]) + w * std::log(es[hi]));
}

}  // namespace

Plasma make_plasma(double omega_p) {
  if (!(omega_p > 0.0)) throw DomainError("plasma model: omega_p must be positive");
  return Plasma{omega_p};
}

Drude make_drude(double omega_p, double gamma) {
  if (!(omega_p > 0.0) || !(gamma > 0.0)) {
    throw DomainError("drude model: omega_p and gamma must be positive");
  }
  return Drude{omega_p, gamma};
}

Tabulated make_tabulated(std::vector<double> xi, std::vector<double> epsilon, bool extrapolate) {
  Tabulated t{std::move(xi), std::move(epsilon), extrapolate};
  validate(t);
  return t;
}

Drude gold_drude() {
  return Drude{9.0 * constants::eV_per_hbar, 0.035 * constants::eV_per_hbar};
}

Plasma gold_plasma() { return Plasma{9.0 * constants::eV_per_hbar}; }

double epsilon(const DielectricModel& model, double xi) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("epsilon: xi must be positive");
  return std::visit(
      overloaded{
          [](const PerfectReflector&) { return std::numeric_limits<double>::infinity(); },
          [](const Constant& c) { return c.epsilon; },
          [xi](const Plasma& p) { return 1.0 + (p.omega_p / xi) * (p.omega_p / xi); },
          [xi](const Drude& d) { return 1.0 + d.omega_p * d.omega_p / (xi * (xi + d.gamma)); },
          [xi](const Tabulated& t) { return tabulated_epsilon(t, xi); },
      },
      model);
}

bool is_perfect(const DielectricModel& model) {
  return std::holds_alternative<PerfectReflector>(model);
}

bool is_transparent(const DielectricModel& model) {
  const auto* c = std::get_if<Constant>(&model);
  return c != nullptr && c->epsilon == 1.0;
}

ZeroFrequencyClass zero_frequency_class(const DielectricModel& model) {
  return std::visit(
      overloaded{
          [](const PerfectReflector&) {
            return ZeroFrequencyClass{ZeroFrequencyKind::PerfectConductorLike, 0.0, 1.0};
          },
          [](const Constant& c) {
            return ZeroFrequencyClass{ZeroFrequencyKind::DielectricLike, 0.0, c.epsilon};
          },
          [](const Plasma& p) {
            return ZeroFrequencyClass{ZeroFrequencyKind::PlasmaLike, p.omega_p, 1.0};
          },
          [](const Drude&) { return ZeroFrequencyClass{ZeroFrequencyKind::DrudeLike, 0.0, 1.0}; },
          [](const Tabulated&) {
            return ZeroFrequencyClass{ZeroFrequencyKind::DrudeLike, 0.0, 1.0};
          },
      },
      model);
}

Tabulated load_tabulated(std::istream& in) {
  Tabulated t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (!(fields >> b) || (fields >> extra)) {
      throw ParseError("line " + std::to_string(lineno) + ": expected two columns", lineno);
    }
    double xi = 0.0, eps = 0.0;
    try {
      std::size_t pa = 0, pb = 0;
      xi = std::stod(a, &pa);
      eps = std::stod(b, &pb);
      if (pa != a.size() || pb != b.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) + ": not a number", lineno);
    }
    if (!(xi > 0.0) || !std::isfinite(xi)) {
      throw ParseError("line " + std::to_string(lineno) + ": xi must be positive", lineno);
    }
    if (!(eps >= 1.0) || !std::isfinite(eps)) {
      throw ParseError("line " + std::to_string(lineno) + ": epsilon must be >= 1", lineno);
    }
    if (!t.xi.empty() && !(xi > t.xi.back())) {
      throw ParseError("line " + std::to_string(lineno) + ": non-monotone xi grid", lineno);
    }
    t.xi.push_back(xi);
    t.epsilon.push_back(eps);
  }
  if (t.xi.empty()) throw ParseError("tabulated model: no data points", 0);
  return t;
}

Tabulated load_tabulated_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dielectric table '" + path + "'", 0);
  try {
    return load_tabulated(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

void save_tabulated(const Tabulated& model, std::ostream& out) {
  out << "# xi_rad_per_s epsilon\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < model.xi.size(); ++i) {
    out << model.xi[i] << ' ' << model.epsilon[i] << '\n';
  }
}

bool is_non_increasing(const Tabulated& model) {
  for (std::size_t i = 1; i < model.epsilon.size(); ++i) {
    if (model.epsilon[i] > model.epsilon[i - 1]) return false;
  }
  return true;
}

namespace {

std::vector<double> split_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError("material '" + what + "': bad number '" + item + "'", 0);
    }
  }
  return out;
}

}  // namespace

DielectricModel parse_model(const std::string& text, bool extrapolate_tables) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "perfect" && tail.empty()) return PerfectReflector{};
  if (head == "drude") {
    if (tail.empty()) return gold_drude();
    const auto v = split_numbers(tail, text);
    if (v.size() != 2) throw ParseError("material 'drude' expects drude:WP,GAMMA", 0);
    return make_drude(v[0], v[1]);
  }
  if (head == "plasma") {
    if (tail.empty()) return gold_plasma();
    const auto v = split_numbers(tail, text);
    if (v.size() != 1) throw ParseError("material 'plasma' expects plasma:WP", 0);
    return make_plasma(v[0]);
  }
  if (head == "constant") {
    const auto v = split_numbers(tail, text);
    if (v.size() != 1 || !(v[0] >= 1.0)) {
      throw ParseError("material 'constant' expects constant:EPS with EPS >= 1", 0);
    }
    return Constant{v[0]};
  }
  if (head == "file" && !tail.empty()) {
    auto t = load_tabulated_file(tail);
    t.extrapolate = extrapolate_tables;
    return t;
  }
  throw ParseError("unknown material '" + text + "'", 0);
}

std::string describe(const DielectricModel& model) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  std::visit(overloaded{
                 [&](const PerfectReflector&) { out << "perfect"; },
                 [&](const Constant& c) { out << "constant:" << c.epsilon; },
                 [&](const Plasma& p) { out << "plasma:" << p.omega_p; },
                 [&](const Drude& d) { out << "drude:" << d.omega_p << ',' << d.gamma; },
                 [&](const Tabulated& t) {
                   out << "tabulated[" << t.xi.size() << " points"
                       << (t.extrapolate ? ", extrapolated" : "") << "]";
                 },
             },
             model);
  return out.str();
}

}  // namespace casimir::materials
