#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "casimir/casimir.hpp"
#include "json.hpp"

namespace casimir::io {

nlohmann::json constants_json();
nlohmann::json spec_json(const JobSpec& spec);
nlohmann::json diagnostics_json(const Diagnostics& d);
// {spec, constants, free_energy_J, force_N, f_pfa_N, correction, ledger, diagnostics}
nlohmann::json result_json(const JobSpec& spec, const CasimirResult& result);

// R_m,L_m,T_K,correction,free_energy_J,force_N,f_pfa_N[,status]
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
// target,R_m,L_m
void write_level_sets_csv(const std::vector<LevelSetPoint>& points, std::ostream& out);

}  // namespace casimir::io
