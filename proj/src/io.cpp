#include "lapdecon/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lapdecon {

namespace {

void check_keys(const json& j, const char* what, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// JSON has no NaN; non-finite values are written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const GroundTruthSpec& spec) {
  json params;
  switch (spec.family) {
    case Family::finite_discrete:
      params = {{"atoms", spec.atoms}, {"weights", spec.weights}};
      break;
    case Family::exponential_tail:
      params = {{"tail_rate", spec.tail_rate}, {"num_atoms", spec.num_atoms}};
      break;
    case Family::compact_uniform:
      params = {{"half_width", spec.half_width}, {"num_atoms", spec.num_atoms}};
      break;
  }
  return {{"family", to_string(spec.family)}, {"params", params}, {"seed", spec.seed}};
}

GroundTruthSpec ground_truth_from_json(const json& j) {
  check_keys(j, "ground truth", {"family", "params", "seed"});
  GroundTruthSpec spec;
  spec.family = family_from_string(j.at("family").get<std::string>());
  read_if(j, "seed", spec.seed);
  const json params = j.value("params", json::object());
  switch (spec.family) {
    case Family::finite_discrete:
      check_keys(params, "finite-discrete params", {"atoms", "weights"});
      spec.atoms = params.at("atoms").get<std::vector<double>>();
      spec.weights = params.at("weights").get<std::vector<double>>();
      break;
    case Family::exponential_tail:
      check_keys(params, "exponential-tail params", {"tail_rate", "num_atoms"});
      read_if(params, "tail_rate", spec.tail_rate);
      read_if(params, "num_atoms", spec.num_atoms);
      break;
    case Family::compact_uniform:
      check_keys(params, "compact-uniform params", {"half_width", "num_atoms"});
      read_if(params, "half_width", spec.half_width);
      read_if(params, "num_atoms", spec.num_atoms);
      break;
  }
  spec.validate();
  return spec;
}

json to_json(const SolverConfig& cfg) {
  json j = {{"grid_pad", cfg.grid_pad},
            {"em_tol", cfg.em_tol},
            {"max_iter", cfg.max_iter},
            {"prune_weight", cfg.prune_weight}};
  if (cfg.grid_step) j["grid_step"] = *cfg.grid_step;
  if (cfg.grad_tol) j["grad_tol"] = *cfg.grad_tol;
  return j;
}

SolverConfig solver_config_from_json(const json& j) {
  check_keys(j, "solver config", {"grid_pad", "grid_step", "em_tol", "grad_tol", "max_iter", "prune_weight"});
  SolverConfig cfg;
  read_if(j, "grid_pad", cfg.grid_pad);
  read_if(j, "em_tol", cfg.em_tol);
  read_if(j, "max_iter", cfg.max_iter);
  read_if(j, "prune_weight", cfg.prune_weight);
  if (j.contains("grid_step")) cfg.grid_step = j.at("grid_step").get<double>();
  if (j.contains("grad_tol")) cfg.grad_tol = j.at("grad_tol").get<double>();
  return cfg;
}

json to_json(const NpmleResult& r) {
  const auto atoms = r.g_hat.atoms();
  const auto weights = r.g_hat.weights();
  return {{"atoms", std::vector<double>(atoms.begin(), atoms.end())},
          {"weights", std::vector<double>(weights.begin(), weights.end())},
          {"loglik", number(r.loglik)},
          {"gradient_sup", number(r.gradient_sup)},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

json to_json(const DpPrior& prior) {
  return {{"total_mass", prior.total_mass}, {"base_b", prior.base_b}, {"base_tau", prior.base_tau}};
}

DpPrior prior_from_json(const json& j) {
  check_keys(j, "prior", {"total_mass", "base_b", "base_tau"});
  DpPrior p;
  read_if(j, "total_mass", p.total_mass);
  read_if(j, "base_b", p.base_b);
  read_if(j, "base_tau", p.base_tau);
  p.validate();
  return p;
}

json to_json(const McmcConfig& cfg) {
  return {{"iterations", cfg.iterations},   {"burn_in", cfg.burn_in},
          {"thin", cfg.thin},               {"aux_components", cfg.aux_components},
          {"location_step", cfg.location_step}, {"adapt", cfg.adapt},
          {"seed", cfg.seed}};
}

McmcConfig mcmc_from_json(const json& j) {
  check_keys(j, "mcmc", {"iterations", "burn_in", "thin", "aux_components", "location_step", "adapt", "seed"});
  McmcConfig c;
  read_if(j, "iterations", c.iterations);
  read_if(j, "burn_in", c.burn_in);
  read_if(j, "thin", c.thin);
  read_if(j, "aux_components", c.aux_components);
  read_if(j, "location_step", c.location_step);
  read_if(j, "adapt", c.adapt);
  read_if(j, "seed", c.seed);
  c.validate();
  return c;
}

json to_json(const BayesEstimates& est) {
  const auto& g = est.mean_density.grid();
  return {{"grid", {{"lo", g.lo}, {"hi", g.hi}, {"step", g.step}, {"size", g.size()}}},
          {"density_integral", est.mean_density.integral()},
          {"density_max", est.mean_density.max_value()},
          {"cdf_knots", est.mean_cdf.knots().size()},
          {"ess", number(est.ess)},
          {"draws_used", est.draws_used}};
}

json to_json(const ExperimentPlan& plan) {
  json est = json::array(), met = json::array();
  for (auto e : plan.estimators) est.push_back(to_string(e));
  for (auto m : plan.metrics) met.push_back(to_string(m));
  return {{"ground_truth", to_json(plan.ground_truth)},
          {"n_grid", plan.n_grid},
          {"reps", plan.reps},
          {"estimators", est},
          {"metrics", met},
          {"master_seed", plan.master_seed},
          {"output_dir", plan.output_dir},
          {"npmle", to_json(plan.npmle)},
          {"prior", to_json(plan.prior)},
          {"mcmc", to_json(plan.mcmc)},
          {"deconv_constant", plan.deconv_constant}};
}

ExperimentPlan plan_from_json(const json& j) {
  check_keys(j, "plan",
             {"ground_truth", "n_grid", "reps", "estimators", "metrics", "master_seed", "output_dir", "npmle",
              "prior", "mcmc", "deconv_constant"});
  ExperimentPlan plan;
  plan.ground_truth = ground_truth_from_json(j.at("ground_truth"));
  read_if(j, "n_grid", plan.n_grid);
  read_if(j, "reps", plan.reps);
  if (j.contains("estimators")) {
    plan.estimators.clear();
    for (const auto& s : j.at("estimators")) plan.estimators.push_back(estimator_from_string(s.get<std::string>()));
  }
  if (j.contains("metrics")) {
    plan.metrics.clear();
    for (const auto& s : j.at("metrics")) plan.metrics.push_back(metric_from_string(s.get<std::string>()));
  }
  read_if(j, "master_seed", plan.master_seed);
  read_if(j, "output_dir", plan.output_dir);
  if (j.contains("npmle")) plan.npmle = solver_config_from_json(j.at("npmle"));
  if (j.contains("prior")) plan.prior = prior_from_json(j.at("prior"));
  if (j.contains("mcmc")) plan.mcmc = mcmc_from_json(j.at("mcmc"));
  read_if(j, "deconv_constant", plan.deconv_constant);
  plan.validate();
  return plan;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<double> read_data_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string field = line.substr(0, line.find(','));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size()) {
      if (lineno == 1) continue;  // header
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument(path.string() + ": no observations");
  return out;
}

void write_csv(std::ostream& os, const Sample& s) {
  os << "x" << (s.y ? ",y" : "") << (s.z ? ",z" : "") << '\n';
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    os << format_double(s.x[i]);
    if (s.y) os << ',' << format_double((*s.y)[i]);
    if (s.z) os << ',' << format_double((*s.z)[i]);
    os << '\n';
  }
}

void write_csv(std::ostream& os, const DensityGrid& g, const std::string& value_name) {
  os << "t," << value_name << '\n';
  const auto v = g.values();
  for (std::size_t k = 0; k < v.size(); ++k) os << format_double(g.grid().at(k)) << ',' << format_double(v[k]) << '\n';
}

void write_csv(std::ostream& os, const StepCdf& cdf) {
  os << "t,cdf\n";
  const auto t = cdf.knots();
  const auto v = cdf.values();
  for (std::size_t k = 0; k < t.size(); ++k) os << format_double(t[k]) << ',' << format_double(v[k]) << '\n';
}

void write_csv(std::ostream& os, const ChainTrace& trace) {
  os << "iteration,clusters,loglik\n";
  for (std::size_t i = 0; i < trace.cluster_count.size(); ++i)
    os << i << ',' << trace.cluster_count[i] << ',' << format_double(trace.loglik[i]) << '\n';
}

void write_records_csv(std::ostream& os, const RateTable& table) {
  os << "estimator,metric,n,rep,error,seed,valid\n";
  for (const auto& r : table.records)
    os << to_string(r.estimator) << ',' << to_string(r.metric) << ',' << r.n << ',' << r.rep << ','
       << format_double(r.error) << ',' << r.seed << ',' << (r.valid ? 1 : 0) << '\n';
}

void write_slopes_csv(std::ostream& os, const RateTable& table) {
  os << "estimator,metric,slope,stderr,r2,p_negative,points\n";
  for (const auto& s : table.slopes)
    os << to_string(s.estimator) << ',' << to_string(s.metric) << ',' << format_double(s.fit.slope) << ','
       << format_double(s.fit.stderr_slope) << ',' << format_double(s.fit.r2) << ','
       << format_double(s.fit.p_negative) << ',' << s.fit.points << '\n';
}

void write_merging_csv(std::ostream& os, const MergingTable& table) {
  os << "n,rep,w1_bayes_npmle,w1_bayes_truth,w1_npmle_truth,triangle_ok\n";
  for (const auto& r : table.rows)
    os << r.n << ',' << r.rep << ',' << format_double(r.w1_bayes_npmle) << ',' << format_double(r.w1_bayes_truth)
       << ',' << format_double(r.w1_npmle_truth) << ',' << (r.triangle_ok ? 1 : 0) << '\n';
}

void write_inequality_csv(std::ostream& os, const std::vector<std::pair<std::string, InequalityReport>>& rows) {
  os << "inputs,lhs,rhs,slack,satisfied,applicable,implied_constant\n";
  for (const auto& [label, r] : rows)
    os << label << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ',' << format_double(r.slack) << ','
       << (r.satisfied ? 1 : 0) << ',' << (r.applicable ? 1 : 0) << ',' << format_double(r.implied_constant) << '\n';
}

void write_bias_csv(std::ostream& os, const std::vector<std::pair<double, double>>& rows) {
  os << "h,scaled_bias\n";
  for (const auto& [h, v] : rows) os << format_double(h) << ',' << format_double(v) << '\n';
}

}  // namespace lapdecon
