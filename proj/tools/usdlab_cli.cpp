// usdlab: command-line front end for the experiment runner.
//
// Exit codes: 0 pass, 1 assertion failure, 2 configuration error,
// 3 runtime cap exceeded.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "usdlab/errors.hpp"
#include "usdlab/experiment.hpp"
#include "usdlab/parallel.hpp"
#include "usdlab/rate_fit.hpp"
#include "usdlab/serialization.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = 0;
  bool strict = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "experiment config (JSON)");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "override the master seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads (default: USDLAB_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--strict", f.strict, "treat heuristic (p != 2) certificates as failures");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usdlab::ConfigError("$", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_kind(CLI::App* cmd, const CommonFlags& f,
             std::initializer_list<usdlab::ExperimentKind> allowed) {
  usdlab::ExperimentConfig config = usdlab::load_config(f.config);
  bool ok = false;
  for (auto k : allowed) ok = ok || k == config.kind;
  if (!ok)
    throw usdlab::ConfigError("kind", "experiment kind '" + usdlab::to_string(config.kind) +
                                          "' does not belong to subcommand " + cmd->get_name());
  if (cmd->count("--seed")) config.seed = f.seed;
  if (cmd->count("--threads")) config.threads = f.threads;
  if (!f.out.empty()) config.output = f.out;
  config.strict = config.strict || f.strict;
  usdlab::validate(config);

  const usdlab::ExperimentResult result = usdlab::run_experiment(config);
  usdlab::write_outputs(result, config.output);
  for (const auto& a : result.summary.assertions)
    std::printf("%s  %s: %s\n", a.pass ? "PASS" : "FAIL", a.name.c_str(), a.detail.c_str());
  for (const auto& [name, fit] : result.summary.fits)
    std::printf("fit %s: slope %.4f +- %.4f\n", name.c_str(), fit.slope, fit.slope_halfwidth);
  if (config.strict && result.heuristic)
    std::printf("FAIL  strict mode: certificate relies on heuristic verification\n");
  std::printf("outputs written to %s\n", config.output.c_str());
  return usdlab::exit_code(result, config.strict);
}

int run_fit(const CommonFlags& f, const std::string& input, const std::string& x,
            const std::string& y) {
  usdlab::RateFit fit;
  if (!f.config.empty()) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(f.config));
    } catch (const nlohmann::json::exception& e) {
      throw usdlab::ConfigError("$", std::string("malformed JSON: ") + e.what());
    }
    if (doc.contains("points")) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& p : doc.at("points")) {
        if (!p.is_array() || p.size() != 2) throw usdlab::ConfigError("points", "expected [x, y] pairs");
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
      fit = usdlab::fit_rate(pts);
    } else if (doc.contains("input")) {
      fit = usdlab::fit_csv_columns(read_file(doc.at("input").get<std::string>()),
                                    doc.value("x", std::string("x")), doc.value("y", std::string("y")));
    } else {
      throw usdlab::ConfigError("points", "fit config needs points or input");
    }
  } else {
    if (input.empty()) throw usdlab::ConfigError("input", "give --input or --config");
    fit = usdlab::fit_csv_columns(read_file(input), x, y);
  }
  const std::string text = usdlab::to_json(fit);
  std::cout << text;
  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    std::ofstream(std::filesystem::path(f.out) / "fit.json") << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"usdlab: sampling discretization, entropy and sparse recovery experiments"};
  app.require_subcommand(1);

  CommonFlags search_f, verify_f, entropy_f, er_f, recover_f, fit_f;
  auto* search = app.add_subcommand("usd-search", "search for universal sampling discretization sets");
  add_common(search, search_f, true);
  auto* verify = app.add_subcommand("usd-verify", "certify a given point set");
  add_common(verify, verify_f, true);
  auto* entropy = app.add_subcommand("entropy", "entropy profile or chaining comparison");
  add_common(entropy, entropy_f, true);
  auto* er = app.add_subcommand("er-rate", "Monte-Carlo discretization error versus m");
  add_common(er, er_f, true);
  auto* recover = app.add_subcommand("recover", "sparse recovery error versus sparsity");
  add_common(recover, recover_f, true);
  auto* fit = app.add_subcommand("fit", "fit a power law in log2-log2 coordinates");
  add_common(fit, fit_f, false);
  std::string fit_input, fit_x = "x", fit_y = "y";
  fit->add_option("--input", fit_input, "CSV file with a header row");
  fit->add_option("--x", fit_x, "x column name");
  fit->add_option("--y", fit_y, "y column name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  using K = usdlab::ExperimentKind;
  try {
    if (*search) return run_kind(search, search_f, {K::usd_search});
    if (*verify) return run_kind(verify, verify_f, {K::usd_verify});
    if (*entropy) return run_kind(entropy, entropy_f, {K::entropy_profile, K::chaining_compare});
    if (*er) return run_kind(er, er_f, {K::er_rate});
    if (*recover) return run_kind(recover, recover_f, {K::recovery_rate});
    if (*fit) return run_fit(fit_f, fit_input, fit_x, fit_y);
  } catch (const usdlab::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const usdlab::CapExceeded& e) {
    std::fprintf(stderr, "cap exceeded: %s\n", e.what());
    return 3;
  } catch (const usdlab::InvalidArgument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
