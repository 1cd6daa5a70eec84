#include "casimir/io.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "casimir/constants.hpp"

namespace casimir::io {

namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_number(const std::optional<T>& v) {
  return v ? number_or_null(*v) : json(nullptr);
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return s.str();
}

}  // namespace

json constants_json() {
  return {{"hbar_J_s", constants::hbar},
          {"c_m_per_s", constants::c},
          {"k_B_J_per_K", constants::k_B},
          {"eV_J", constants::eV}};
}

json spec_json(const JobSpec& spec) {
  return {{"R_m", spec.R},
          {"L_m", spec.L},
          {"T_K", spec.T},
          {"plane", materials::describe(spec.plane)},
          {"sphere", materials::describe(spec.sphere)},
          {"ell_dim", spec.resolved_ell_dim()},
          {"ell_dim_requested", spec.ell_dim == 0 ? json("auto") : json(spec.ell_dim)},
          {"backend", to_string(spec.backend)},
          {"zero_frequency", to_string(spec.zero_frequency)},
          {"tolerances",
           {{"matsubara_rel", spec.tol.matsubara_rel},
            {"m_sum_rel", spec.tol.m_sum_rel},
            {"quad_rel", spec.tol.quad_rel},
            {"xi_quad_rel", spec.tol.xi_quad_rel}}},
          {"hodlr", {{"leaf_size", spec.hodlr.leaf_size}, {"tol", spec.hodlr.tol}}},
          {"jobs", spec.jobs}};
}

json diagnostics_json(const Diagnostics& d) {
  json out = {{"ell_dim", d.ell_dim},
              {"backend", d.backend},
              {"method", d.method},
              {"zero_frequency", d.zero_frequency},
              {"frequency_terms", d.frequency_terms},
              {"m_max", d.m_max},
              {"blocks", d.blocks},
              {"hodlr_max_rank", d.hodlr_max_rank},
              {"max_logdet", number_or_null(d.max_logdet)},
              {"wall_time_s", d.wall_time_s},
              {"jobs", d.jobs},
              {"warnings", d.warnings}};
  if (d.fd_step_m > 0.0) {
    out["finite_difference"] = {{"h_m", d.fd_step_m},
                                {"derivative_h", d.fd_derivative_h},
                                {"derivative_h2", d.fd_derivative_h2},
                                {"relative_change", d.fd_relative_change}};
  }
  return out;
}

json result_json(const JobSpec& spec, const CasimirResult& r) {
  json ledger = json::array();
  for (const auto& e : r.ledger) {
    ledger.push_back({{"n", e.n}, {"m", e.m}, {"xi", e.xi}, {"weight", e.weight},
                      {"logdet", e.logdet}});
  }
  return {{"spec", spec_json(spec)},
          {"constants", constants_json()},
          {"free_energy_J", number_or_null(r.free_energy)},
          {"force_N", optional_number(r.force)},
          {"f_pfa_N", optional_number(r.f_pfa)},
          {"correction", optional_number(r.correction)},
          {"ledger", ledger},
          {"diagnostics", diagnostics_json(r.diagnostics)}};
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "R_m,L_m,T_K,correction,free_energy_J,force_N,f_pfa_N,status\n";
  for (const auto& r : rows) {
    std::string status = r.ok ? "ok" : "error: " + r.error;
    for (auto& ch : status) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << csv_number(r.R) << ',' << csv_number(r.L) << ',' << csv_number(r.T) << ','
        << csv_number(r.correction) << ',' << csv_number(r.free_energy) << ','
        << csv_number(r.force) << ',' << csv_number(r.f_pfa) << ',' << status << '\n';
  }
}

void write_level_sets_csv(const std::vector<LevelSetPoint>& points, std::ostream& out) {
  out << "target,R_m,L_m\n";
  for (const auto& p : points) {
    out << csv_number(p.target) << ',' << csv_number(p.R) << ',' << csv_number(p.L) << '\n';
  }
}

}  // namespace casimir::io
