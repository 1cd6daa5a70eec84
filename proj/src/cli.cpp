#include "casimir/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "casimir/casimir.hpp"
#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/io.hpp"
#include "casimir/lindet.hpp"
#include "casimir/roundtrip.hpp"

namespace casimir::cli {

namespace {

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JobFlags {
  double radius = 0.0;
  double gap = 0.0;
  double temperature = 0.0;
  std::string material = "perfect";
  std::string plane_material;
  std::string sphere_material;
  std::string backend = "hodlr";
  std::string ldim = "auto";
  double matsubara_tol = 1e-8;
  double m_tol = 1e-8;
  double quad_tol = 1e-10;
  double xi_tol = 1e-8;
  std::string zero_frequency = "auto";
  int leaf_size = 64;
  double hodlr_tol = 1e-13;
  bool extrapolate = false;
};

struct CommonFlags {
  int jobs = 1;
  std::string output;
  std::string config;
  int verbose = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int default_jobs() {
  if (const char* env = std::getenv("CASIMIR_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size()) throw ParseError(what + ": bad number '" + item + "'", 0);
    out.push_back(v);
  }
  if (out.empty()) throw ParseError(what + ": empty list", 0);
  return out;
}

int parse_ldim(const std::string& text) {
  if (text == "auto") return 0;
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || v < 1) throw ParseError("--ldim expects 'auto' or a positive integer", 0);
  return v;
}

DielectricModel parse_material(const std::string& text, bool extrapolate) {
  if (text.rfind("file:", 0) == 0 && !std::filesystem::exists(text.substr(5))) {
    throw IoFailure("dielectric table '" + text.substr(5) + "' does not exist");
  }
  return materials::parse_model(text, extrapolate);
}

ZeroFrequencyPolicy parse_zero_frequency(const std::string& text, const DielectricModel& sphere) {
  ZeroFrequencyPolicy p;
  if (text == "auto") return p;
  if (text == "drude") {
    p.kind = ZeroFrequencyPolicy::Kind::Drude;
  } else if (text == "perfect") {
    p.kind = ZeroFrequencyPolicy::Kind::Perfect;
  } else if (text.rfind("plasma", 0) == 0) {
    p.kind = ZeroFrequencyPolicy::Kind::Plasma;
    if (text.size() > 6) {
      if (text[6] != ':') throw ParseError("--zero-frequency: expected plasma:WP", 0);
      p.omega_p = parse_list(text.substr(7), "--zero-frequency")[0];
    } else if (const auto* d = std::get_if<Drude>(&sphere)) {
      p.omega_p = d->omega_p;
    } else if (const auto* pl = std::get_if<Plasma>(&sphere)) {
      p.omega_p = pl->omega_p;
    } else {
      p.omega_p = materials::gold_plasma().omega_p;
    }
  } else {
    throw ParseError("--zero-frequency expects auto, drude, perfect or plasma[:WP]", 0);
  }
  return p;
}

void add_material_flags(CLI::App* sub, JobFlags& f) {
  sub->add_option("--material", f.material,
                  "Both bodies: perfect | drude[:WP,GAMMA] | plasma[:WP] | constant:EPS | file:PATH");
  sub->add_option("--plane-material", f.plane_material, "Plane material (overrides --material)");
  sub->add_option("--sphere-material", f.sphere_material, "Sphere material (overrides --material)");
  sub->add_flag("--extrapolate-tables", f.extrapolate,
                "Extrapolate tabulated dielectric data outside the sampled range");
}

void add_job_flags(CLI::App* sub, JobFlags& f) {
  sub->add_option("--radius", f.radius, "Sphere radius R in m")->required();
  sub->add_option("--gap", f.gap, "Surface-to-plane gap L in m")->required();
  sub->add_option("--temperature", f.temperature, "Temperature in K (0 = zero temperature)");
  add_material_flags(sub, f);
  sub->add_option("--backend", f.backend, "Log-determinant backend")
      ->check(CLI::IsMember({"cholesky", "hodlr"}));
  sub->add_option("--ldim", f.ldim, "Multipole truncation: auto | N");
  sub->add_option("--matsubara-tol", f.matsubara_tol, "Relative tolerance of the Matsubara sum");
  sub->add_option("--m-tol", f.m_tol, "Relative tolerance of the m sum");
  sub->add_option("--quad-tol", f.quad_tol, "Relative tolerance of the multipole integrals");
  sub->add_option("--xi-tol", f.xi_tol, "Relative tolerance of the T = 0 frequency integral");
  sub->add_option("--zero-frequency", f.zero_frequency,
                  "Zero-frequency treatment: auto | drude | perfect | plasma[:WP]");
  sub->add_option("--leaf-size", f.leaf_size, "HODLR leaf size")->check(CLI::PositiveNumber);
  sub->add_option("--hodlr-tol", f.hodlr_tol, "HODLR compression tolerance");
}

void add_common_flags(CLI::App* sub, CommonFlags& c) {
  sub->add_option("--jobs,-j", c.jobs, "Worker threads (default: $CASIMIR_JOBS or 1)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--output,-o", c.output, "Output file (default: standard output)");
  sub->add_option("--config", c.config, "key = value file; command-line flags take precedence");
  sub->add_flag("--verbose,-v", c.verbose, "Progress and diagnostics on the error stream");
}

std::pair<DielectricModel, DielectricModel> resolve_materials(const JobFlags& f) {
  const DielectricModel both = parse_material(f.material, f.extrapolate);
  const DielectricModel plane =
      f.plane_material.empty() ? both : parse_material(f.plane_material, f.extrapolate);
  const DielectricModel sphere =
      f.sphere_material.empty() ? both : parse_material(f.sphere_material, f.extrapolate);
  return {plane, sphere};
}

JobSpec make_spec(const JobFlags& f, const CommonFlags& c) {
  JobSpec s;
  s.R = f.radius;
  s.L = f.gap;
  s.T = f.temperature;
  std::tie(s.plane, s.sphere) = resolve_materials(f);
  s.ell_dim = parse_ldim(f.ldim);
  s.backend = f.backend == "cholesky" ? Backend::Cholesky : Backend::Hodlr;
  s.tol.matsubara_rel = f.matsubara_tol;
  s.tol.m_sum_rel = f.m_tol;
  s.tol.quad_rel = f.quad_tol;
  s.tol.xi_quad_rel = f.xi_tol;
  s.zero_frequency = parse_zero_frequency(f.zero_frequency, s.sphere);
  s.hodlr.leaf_size = f.leaf_size;
  s.hodlr.tol = f.hodlr_tol;
  s.jobs = c.jobs;
  s.validate();
  return s;
}

// Runs fn with a stream bound to --output or out.
template <class Fn>
void with_output(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty()) {
    fn(out);
    out.flush();
    return;
  }
  std::ofstream file(path);
  if (!file) throw IoFailure("cannot open output file '" + path + "'");
  fn(file);
  file.flush();
  if (!file) throw IoFailure("write to '" + path + "' failed");
}

// Reads key = value lines and turns them into --key=value arguments.
std::vector<std::string> config_arguments(const std::string& path, CLI::App* sub) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ": line " + std::to_string(number) + ": expected key = value", number);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config" || sub->get_option_no_throw("--" + key) == nullptr) {
      throw ParseError(path + ": line " + std::to_string(number) + ": unknown key '" + key +
                           "' for '" + sub->get_name() + "'",
                       number);
    }
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

void report(const Diagnostics& d, std::ostream& err) {
  err << "ell_dim=" << d.ell_dim << " backend=" << d.backend << " method=" << d.method
      << " frequency_terms=" << d.frequency_terms << " blocks=" << d.blocks
      << " wall_time_s=" << d.wall_time_s << '\n';
  for (const auto& w : d.warnings) err << "warning: " << w << '\n';
}

int do_compute(const JobFlags& f, const CommonFlags& c, const std::string& quantity,
               bool no_ledger, std::ostream& out, std::ostream& err) {
  const JobSpec spec = make_spec(f, c);
  const CasimirResult r = quantity == "free-energy" ? compute_free_energy(spec) : force(spec);
  if (c.verbose) report(r.diagnostics, err);
  auto j = io::result_json(spec, r);
  if (no_ledger) j.erase("ledger");
  with_output(c.output, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  return kOk;
}

int do_sweep(const JobFlags& f, const CommonFlags& c, const std::string& radii,
             const std::string& gaps, const std::string& level_sets, const std::string& targets,
             std::ostream& out, std::ostream& err) {
  JobFlags base = f;
  const auto R = parse_list(radii, "--radii");
  const auto L = parse_list(gaps, "--gaps");
  base.radius = R.front();
  base.gap = L.front();
  const JobSpec spec = make_spec(base, c);
  const auto rows = pfa_correction_sweep(spec, R, L);
  for (const auto& row : rows) {
    if (!row.ok) err << "cell R=" << row.R << " L=" << row.L << " failed: " << row.error << '\n';
    if (c.verbose && row.ok) {
      err << "cell R=" << row.R << " L=" << row.L << " correction=" << row.correction << '\n';
    }
  }
  with_output(c.output, out, [&](std::ostream& o) { io::write_sweep_csv(rows, o); });
  if (!level_sets.empty()) {
    const auto points = extract_level_sets(rows, parse_list(targets, "--targets"));
    with_output(level_sets, out, [&](std::ostream& o) { io::write_level_sets_csv(points, o); });
  }
  return kOk;
}

int do_bench(const JobFlags& f, const CommonFlags& c, const std::string& dims_text, int repeats,
             int m, std::ostream& out, std::ostream& err) {
  std::vector<int> dims;
  for (double d : parse_list(dims_text, "--dims")) {
    if (!(d >= 2.0) || d != std::floor(d)) throw ParseError("--dims expects integers >= 2", 0);
    dims.push_back(static_cast<int>(d));
  }
  const auto [plane, sphere] = resolve_materials(f);
  const double L = 1e-6;
  const auto generator = [&, plane = plane, sphere = sphere](int N) {
    RoundTripParams p;
    p.ell_dim = std::max(N / 2 + std::max(m, 1) - 1, 1);
    p.L = L;
    p.R = p.ell_dim * L / 5.0;
    p.xi = constants::c / (p.L + p.R);
    p.m = m;
    p.plane_model = plane;
    p.sphere_model = sphere;
    p.quad_rel_tol = f.quad_tol;
    if (c.verbose) err << "assembling N=" << 2 * p.block_dim() << '\n';
    return roundtrip::scattering_matrix(p);
  };
  lindet::HodlrOptions opts;
  opts.leaf_size = f.leaf_size;
  opts.tol = f.hodlr_tol;
  const auto rows = lindet::benchmark_backends(dims, generator, repeats, opts);
  with_output(c.output, out, [&](std::ostream& o) {
    lindet::write_benchmark_csv(rows, o);
    if (rows.size() >= 2) {
      std::vector<double> n, tc, th;
      for (const auto& r : rows) {
        n.push_back(r.N);
        tc.push_back(r.t_cholesky_s);
        th.push_back(r.t_hodlr_s);
      }
      o << "# fit exponent cholesky=" << lindet::fit_exponent(n, tc)
        << " hodlr=" << lindet::fit_exponent(n, th) << '\n';
    }
  });
  return kOk;
}

int do_dump(const JobFlags& f, const CommonFlags& c, double alpha, double xi, int m,
            bool unsymmetrized, std::ostream& out) {
  RoundTripParams p;
  p.R = f.radius;
  p.L = f.gap;
  p.m = m;
  p.ell_dim = parse_ldim(f.ldim);
  if (p.ell_dim == 0) p.ell_dim = default_ell_dim(p.R, p.L);
  p.xi = xi > 0.0 ? xi : alpha * constants::c / (p.L + p.R);
  std::tie(p.plane_model, p.sphere_model) = resolve_materials(f);
  p.quad_rel_tol = f.quad_tol;
  p.validate();
  with_output(c.output, out, [&](std::ostream& o) {
    if (unsymmetrized) {
      roundtrip::write_block_csv(roundtrip::assemble_block_unsymmetrized(p), o);
    } else {
      roundtrip::write_block_csv(roundtrip::assemble_block(p), o);
    }
  });
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sphere-plane Casimir free energy and force in the scattering approach", "casimir"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", "casimir 1.0");

  JobFlags job;
  CommonFlags common;
  common.jobs = default_jobs();

  auto* compute = app.add_subcommand("compute", "Force, PFA reference and free energy at one geometry");
  add_job_flags(compute, job);
  add_common_flags(compute, common);
  std::string quantity = "force";
  bool no_ledger = false;
  compute->add_option("--quantity", quantity, "force (with PFA correction) or free-energy")
      ->check(CLI::IsMember({"force", "free-energy"}));
  compute->add_flag("--no-ledger", no_ledger, "Omit the per-term ledger from the JSON");

  auto* sweep = app.add_subcommand("sweep", "PFA correction over a grid of radii and gaps");
  add_job_flags(sweep, job);
  sweep->get_option("--radius")->required(false);
  sweep->get_option("--gap")->required(false);
  add_common_flags(sweep, common);
  std::string radii, gaps, level_sets, targets = "0.0025,0.005,0.01";
  sweep->add_option("--radii", radii, "Comma-separated radii in m")->required();
  sweep->add_option("--gaps", gaps, "Comma-separated gaps in m")->required();
  sweep->add_option("--level-sets", level_sets, "Write gaps where the correction hits the targets");
  sweep->add_option("--targets", targets, "Comma-separated target corrections");

  auto* bench = app.add_subcommand("bench", "Cholesky versus HODLR timings");
  add_material_flags(bench, job);
  add_common_flags(bench, common);
  std::string dims = "250,500,1000,2000";
  int repeats = 3;
  int bench_m = 1;
  bench->add_option("--dims", dims, "Comma-separated matrix dimensions N");
  bench->add_option("--repeats", repeats, "Timed repetitions per dimension (median)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--m", bench_m, "Azimuthal index")->check(CLI::NonNegativeNumber);
  bench->add_option("--quad-tol", job.quad_tol, "Relative tolerance of the multipole integrals");
  bench->add_option("--leaf-size", job.leaf_size, "HODLR leaf size")->check(CLI::PositiveNumber);
  bench->add_option("--hodlr-tol", job.hodlr_tol, "HODLR compression tolerance");

  auto* dump = app.add_subcommand("dump-matrix", "Round-trip matrix entries as CSV");
  add_material_flags(dump, job);
  add_common_flags(dump, common);
  double alpha = 1.0, xi = 0.0;
  int dump_m = 1;
  bool unsymmetrized = false;
  dump->add_option("--radius", job.radius, "Sphere radius R in m")->required();
  dump->add_option("--gap", job.gap, "Surface-to-plane gap L in m")->required();
  dump->add_option("--alpha", alpha, "Dimensionless frequency xi (L + R) / c");
  dump->add_option("--xi", xi, "Frequency in rad/s (overrides --alpha)");
  dump->add_option("--m", dump_m, "Azimuthal index")->check(CLI::NonNegativeNumber);
  dump->add_option("--ldim", job.ldim, "Multipole truncation: auto | N");
  dump->add_option("--quad-tol", job.quad_tol, "Relative tolerance of the multipole integrals");
  dump->add_flag("--unsymmetrized", unsymmetrized, "Unsymmetrized operator as log10 magnitudes");

  try {
    std::vector<std::string> argv = args;
    if (!argv.empty()) {
      if (auto* sub = app.get_subcommand_no_throw(argv.front())) {
        if (const auto path = find_config(argv)) {
          auto extra = config_arguments(*path, sub);
          argv.insert(argv.begin() + 1, extra.begin(), extra.end());
        }
      }
    }
    std::reverse(argv.begin(), argv.end());
    try {
      app.parse(argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kConfigError;
    }

    if (compute->parsed()) return do_compute(job, common, quantity, no_ledger, out, err);
    if (sweep->parsed()) {
      return do_sweep(job, common, radii, gaps, level_sets, targets, out, err);
    }
    if (bench->parsed()) return do_bench(job, common, dims, repeats, bench_m, out, err);
    if (dump->parsed()) return do_dump(job, common, alpha, xi, dump_m, unsymmetrized, out);
    return kInternalError;
  } catch (const IoFailure& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const ParseError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConvergenceError& e) {
    err << "numerical error: " << e.what() << " (previous " << e.previous_estimate() << ", last "
        << e.last_estimate() << ")\n";
    return kNumericalError;
  } catch (const NotPositiveDefinite& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace casimir::cli
