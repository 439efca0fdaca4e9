// Command-line front end: fit-npmle, fit-bayes, deconv, rates, sample.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "lapdecon/io.hpp"

namespace fs = std::filesystem;
using namespace lapdecon;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void emit_json(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
}

void write_study(const fs::path& dir, const ExperimentPlan& plan, const StudyResult& result) {
  fs::create_directories(dir);
  write_text_file(dir / "plan.echo.json", to_json(plan).dump(2) + "\n");
  {
    auto out = open_out(dir / "records.csv");
    write_records_csv(out, result.rates);
  }
  {
    auto out = open_out(dir / "slopes.csv");
    write_slopes_csv(out, result.rates);
  }
  if (result.merging) {
    auto out = open_out(dir / "merging.csv");
    write_merging_csv(out, *result.merging);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laplace deconvolution: NPMLE, DP-mixture Bayes and kernel estimators"};
  app.require_subcommand(1);

  std::string data_path, out_path, out_dir;

  auto* npmle_cmd = app.add_subcommand("fit-npmle", "Fit the NPMLE of the mixing distribution");
  std::string config_path;
  npmle_cmd->add_option("--data", data_path, "CSV of observations (first column)")->required()->check(CLI::ExistingFile);
  npmle_cmd->add_option("--config", config_path, "Solver config JSON")->check(CLI::ExistingFile);
  npmle_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* bayes_cmd = app.add_subcommand("fit-bayes", "Run the DP-mixture sampler and report posterior means");
  std::string prior_path, mcmc_path;
  bayes_cmd->add_option("--data", data_path, "CSV of observations (first column)")->required()->check(CLI::ExistingFile);
  bayes_cmd->add_option("--prior", prior_path, "Prior JSON")->check(CLI::ExistingFile);
  bayes_cmd->add_option("--mcmc", mcmc_path, "MCMC config JSON")->check(CLI::ExistingFile);
  bayes_cmd->add_option("--out-dir", out_dir, "Output directory")->default_val("bayes_out");

  auto* deconv_cmd = app.add_subcommand("deconv", "Deconvolution kernel estimate of the mixing density");
  double bandwidth = 0.0;
  deconv_cmd->add_option("--data", data_path, "CSV of observations (first column)")->required()->check(CLI::ExistingFile);
  deconv_cmd->add_option("--bandwidth", bandwidth, "Bandwidth h (default n^-1/5)")->check(CLI::PositiveNumber);
  deconv_cmd->add_option("--out-dir", out_dir, "Output directory")->default_val("deconv_out");

  auto* rates_cmd = app.add_subcommand("rates", "Replicated error-rate study");
  std::string plan_path;
  std::optional<unsigned> workers;
  rates_cmd->add_option("--plan", plan_path, "Experiment plan JSON")->required()->check(CLI::ExistingFile);
  rates_cmd->add_option("--output-dir", out_dir, "Overrides the plan's output_dir");
  rates_cmd->add_option("--workers", workers, "Worker threads (else LAPDECON_WORKERS, else all cores)");

  auto* sample_cmd = app.add_subcommand("sample", "Draw X = Y + Z from a ground truth");
  std::string truth_path;
  std::size_t n = 0;
  sample_cmd->add_option("--truth", truth_path, "Ground-truth JSON")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--n", n, "Sample size")->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--out", out_path, "Output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*npmle_cmd) {
      const auto x = read_data_csv(data_path);
      const SolverConfig cfg = config_path.empty() ? SolverConfig{} : solver_config_from_json(read_json_file(config_path));
      const auto result = fit_npmle(x, cfg);
      emit_json(to_json(result), out_path);
      return result.converged ? 0 : 3;
    }

    if (*bayes_cmd) {
      const auto x = read_data_csv(data_path);
      const DpPrior prior = prior_path.empty() ? DpPrior{} : prior_from_json(read_json_file(prior_path));
      const McmcConfig mcmc = mcmc_path.empty() ? McmcConfig{} : mcmc_from_json(read_json_file(mcmc_path));
      BayesAccumulator acc(x, prior);
      const auto trace = run_chain(x, prior, mcmc, [&](const PosteriorSample& s) { acc.add(s); });
      const auto est = acc.finish(default_bayes_grid(x, prior));
      const fs::path dir(out_dir);
      fs::create_directories(dir);
      json j = to_json(est);
      j["final_step"] = trace.final_step;
      j["acceptance_rate"] = trace.acceptance_rate;
      write_text_file(dir / "estimates.json", j.dump(2) + "\n");
      auto d = open_out(dir / "density.csv");
      write_csv(d, est.mean_density);
      auto c = open_out(dir / "cdf.csv");
      write_csv(c, est.mean_cdf);
      auto t = open_out(dir / "trace.csv");
      write_csv(t, trace);
      return 0;
    }

    if (*deconv_cmd) {
      const auto x = read_data_csv(data_path);
      const DeconvConfig cfg{bandwidth > 0.0 ? bandwidth : default_bandwidth(x.size()), std::nullopt};
      const fs::path dir(out_dir);
      fs::create_directories(dir);
      const auto raw = deconv_density(x, cfg);
      auto d = open_out(dir / "density.csv");
      write_csv(d, raw);
      auto p = open_out(dir / "density_nonneg.csv");
      write_csv(p, nonnegativize(raw));
      auto c = open_out(dir / "cdf.csv");
      write_csv(c, deconv_cdf(x, cfg));
      return 0;
    }

    if (*rates_cmd) {
      if (workers) setenv("LAPDECON_WORKERS", std::to_string(*workers).c_str(), 1);
      ExperimentPlan plan = plan_from_json(read_json_file(plan_path));
      if (!out_dir.empty()) plan.output_dir = out_dir;
      const auto result = run_study(plan);
      write_study(plan.output_dir, plan, result);
      const double bad = result.rates.invalid_fraction();
      std::cerr << result.rates.records.size() << " records, " << bad * 100.0 << "% invalid -> "
                << plan.output_dir << '\n';
      return bad < 0.1 ? 0 : 2;
    }

    if (*sample_cmd) {
      const auto spec = ground_truth_from_json(read_json_file(truth_path));
      const auto s = sample(spec, n);
      if (out_path.empty()) {
        write_csv(std::cout, s);
      } else {
        auto out = open_out(out_path);
        write_csv(out, s);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
