// Batch front end: sample the posterior, summarize it, and turn the draws
// into EVPPI grids, EVSI curves and net-benefit tables with CSV + SVG output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "voisyn/designs.hpp"
#include "voisyn/hiv_model.hpp"
#include "voisyn/samples.hpp"
#include "voisyn/sampler.hpp"
#include "voisyn/svg.hpp"
#include "voisyn/voi.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Settings {
  std::string data = "data/synthetic_london_2012.json";
  std::string scenario = "base";
  std::uint64_t seed = 1;
  long draws = 150000;  // pooled across chains
  int chains = 4;
  int burnin = 60000;
  int thin = 20;  // posterior steps per recorded draw
  std::string inputs;   // groups comma-separated, columns within a group by '+'
  std::string outputs;  // comma-separated columns
  std::string loss = "var";
  std::string design;   // gumanon | gmshs; empty lets the command choose
  std::string n_list = "10,50,100,500,1000,5000,10000";
  double cost_fixed = 0;
  double cost_per_unit = 0;
  std::string out = ".";
  int threads = 0;
  bool full_cov = true;  // joint full-covariance proposals after warm-up
  std::string samples;    // reuse an existing draws CSV instead of sampling
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<long> parse_n_list(const std::string& s) {
  std::vector<long> out;
  for (const auto& tok : split(s, ',')) {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size() || v < 0) throw UsageError("--n: bad entry '" + tok + "'");
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw UsageError("--n: empty list");
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json settings_json(const std::string& command, const Settings& s) {
  json j;
  j["command"] = command;
  j["data"] = s.data;
  j["scenario"] = s.scenario;
  j["seed"] = s.seed;
  j["draws"] = s.draws;
  j["chains"] = s.chains;
  j["burnin"] = s.burnin;
  j["thin"] = s.thin;
  j["inputs"] = s.inputs;
  j["outputs"] = s.outputs;
  j["loss"] = s.loss;
  j["design"] = s.design;
  j["n"] = s.n_list;
  j["cost_fixed"] = s.cost_fixed;
  j["cost_per_unit"] = s.cost_per_unit;
  j["out"] = s.out;
  j["threads"] = s.threads;
  j["full_cov"] = s.full_cov;
  j["samples"] = s.samples;
  return j;
}

void write_artifact_meta(const fs::path& artifact, const std::string& config_hash,
                         std::uint64_t seed, const json* extra = nullptr) {
  json m;
  m["config_hash"] = config_hash;
  m["seed"] = seed;
  if (extra) {
    for (auto it = extra->begin(); it != extra->end(); ++it) m[it.key()] = it.value();
  }
  fs::path p = artifact;
  p.replace_extension(".meta.json");
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << m.dump(2) << '\n';
}

void write_svg_artifact(const fs::path& path, const std::string& body,
                        const std::string& config_hash, std::uint64_t seed) {
  voisyn::svg::write_file(path, "<!-- config_hash=" + config_hash +
                                    " seed=" + std::to_string(seed) + " -->\n" + body);
}

voisyn::LossSpec make_loss(const Settings& s, const std::vector<std::string>& outs) {
  if (outs.empty()) throw UsageError("--outputs: no columns given");
  if (s.loss == "var") {
    if (outs.size() != 1) {
      throw UsageError("--loss var needs exactly one output column");
    }
    return voisyn::LossSpec::scalar_quadratic(outs[0]);
  }
  if (s.loss == "trace") return voisyn::LossSpec::trace_A(outs);
  if (s.loss == "det") return voisyn::LossSpec::d_criterion(outs);
  throw UsageError("--loss must be var, trace or det");
}

voisyn::DesignSpec make_design(const std::string& name, std::uint64_t seed) {
  voisyn::DesignSpec d;
  if (name == "gumanon") {
    d.kind = voisyn::DesignSpec::Kind::GumAnonAddOn;
  } else if (name == "gmshs") {
    d.kind = voisyn::DesignSpec::Kind::GmshsAddOn;
  } else {
    throw UsageError("--design must be gumanon or gmshs");
  }
  d.seed = seed;
  return d;
}

// Default grid rows: each founder on its own, the population simplex as one
// block, plus the two cross-source linking quantities.  pibar_G_free is left
// out; under scenario (a) pi_GA already carries its information.
std::vector<voisyn::InputGroup> default_groups(const voisyn::SampleTable& table) {
  std::vector<voisyn::InputGroup> groups;
  groups.push_back({"rho", {"rho_G", "rho_N", "rho_P"}});
  for (const char* f : {"log_mu_pop", "a_S", "a_H", "a_delta_G", "a_delta_N",
                        "a_delta_P", "gamma1", "gamma2", "gamma3", "gamma4",
                        "a_UN", "a_OP", "p_GM_G", "p_GM_N", "pi_GA", "or_GM"}) {
    if (table.has(f)) groups.push_back({f, {f}});
  }
  return groups;
}

std::vector<std::string> default_grid_outputs(const voisyn::SampleTable& table) {
  std::vector<std::string> outs;
  for (const char* o : {"pibar_G", "pibar_N", "delta_G", "delta_N", "pi_G", "pi_N",
                        "mu_DG", "mu_DN", "mu_UG", "mu_UN", "mu_U", "mu_D", "mu",
                        "p_H"}) {
    if (table.has(o)) outs.push_back(o);
  }
  return outs;
}

struct Posterior {
  voisyn::SampleTable table;
  std::optional<voisyn::Diagnostics> diagnostics;
  std::vector<std::string> synthetic_fields;
};

Posterior obtain_samples(const Settings& s) {
  if (!s.samples.empty()) {
    Posterior p{voisyn::read_csv(s.samples), std::nullopt, {}};
    return p;
  }
  const auto data = voisyn::hiv::Data::from_json_file(s.data);
  const auto scenario = voisyn::hiv::scenario_from_tag(s.scenario);
  voisyn::Target target = voisyn::hiv_target(data, scenario);

  voisyn::ChainConfig cfg;
  cfg.chains = s.chains;
  if (s.chains < 1 || s.draws < s.chains) throw UsageError("--draws/--chains invalid");
  cfg.iterations = static_cast<int>((s.draws + s.chains - 1) / s.chains);
  cfg.burnin = s.burnin;
  cfg.thin = s.thin;
  cfg.seed = s.seed;
  cfg.max_threads = s.threads;
  cfg.full_cov = s.full_cov;

  voisyn::RunResult run = voisyn::run_chains(target, cfg);
  if (run.table.meta) {
    run.table.meta->scenario = s.scenario;
    run.table.meta->synthetic_fields = data.synthetic;
  }
  return {std::move(run.table), std::move(run.diagnostics), data.synthetic};
}

json diagnostics_json(const voisyn::Diagnostics& d) {
  json j;
  double max_rhat = 0, min_ess = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < d.rhat.size(); ++i) {
    if (std::isfinite(d.rhat[i])) max_rhat = std::max(max_rhat, d.rhat[i]);
    if (std::isfinite(d.ess[i])) min_ess = std::min(min_ess, d.ess[i]);
  }
  j["max_rhat"] = max_rhat;
  j["min_ess"] = std::isfinite(min_ess) ? min_ess : 0.0;
  j["accept_rate"] = d.accept_rate;
  j["warnings"] = d.warnings;
  json per;
  for (std::size_t i = 0; i < d.names.size(); ++i) {
    per[d.names[i]] = {{"rhat", d.rhat[static_cast<Eigen::Index>(i)]},
                       {"ess", d.ess[static_cast<Eigen::Index>(i)]}};
  }
  j["columns"] = per;
  return j;
}

void write_evsi_csv(const std::vector<std::pair<std::string, std::vector<voisyn::CurvePoint>>>& curves,
                    const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "design,n,evsi,remaining_variance,se\n";
  for (const auto& [name, curve] : curves) {
    for (const auto& pt : curve) {
      out << name << ',' << pt.n << ',';
      if (pt.error.empty()) {
        out << voisyn::format_double(pt.estimate.value) << ','
            << voisyn::format_double(pt.remaining) << ','
            << voisyn::format_double(pt.estimate.se);
      } else {
        out << "failed,failed,failed";
      }
      out << '\n';
    }
  }
}

int run(const std::string& command, const Settings& s) {
  const json merged = settings_json(command, s);
  const std::string config_hash = hex64(fnv1a(merged.dump()));
  fs::create_directories(s.out);
  const fs::path outdir(s.out);

  json meta;
  meta["command"] = command;
  meta["config"] = merged;
  meta["config_hash"] = config_hash;
  meta["seed"] = s.seed;

  Posterior post = obtain_samples(s);
  if (!post.synthetic_fields.empty()) meta["synthetic_fields"] = post.synthetic_fields;
  if (post.diagnostics) meta["diagnostics"] = diagnostics_json(*post.diagnostics);

  if (command == "sample" || command == "summary") {
    if (command == "sample") {
      const fs::path samples_path = outdir / "samples.csv";
      voisyn::write_csv(post.table, samples_path);
      json extra;
      if (post.table.meta) {
        extra["chains"] = post.table.meta->chains;
        extra["burnin"] = post.table.meta->burnin;
        extra["thin"] = post.table.meta->thin;
        extra["scenario"] = post.table.meta->scenario;
        extra["synthetic_fields"] = post.table.meta->synthetic_fields;
      }
      write_artifact_meta(samples_path, config_hash, s.seed, &extra);
    }
    const fs::path summary_path = outdir / "summary.csv";
    voisyn::write_summary_csv(voisyn::summarize(post.table), summary_path);
    write_artifact_meta(summary_path, config_hash, s.seed);
  } else if (command == "evppi") {
    std::vector<voisyn::InputGroup> groups;
    if (s.inputs.empty()) {
      groups = default_groups(post.table);
    } else {
      for (const auto& g : split(s.inputs, ',')) {
        groups.push_back({g, split(g, '+')});
      }
    }
    std::vector<std::string> outs =
        s.outputs.empty() ? default_grid_outputs(post.table) : split(s.outputs, ',');
    if (groups.empty() || outs.empty()) {
      throw UsageError("evppi: empty input-group or output list");
    }
    const voisyn::GridResult grid = voisyn::evppi_grid(post.table, groups, outs);
    const fs::path grid_path = outdir / "evppi_grid.csv";
    voisyn::write_grid_csv(grid, grid_path);
    write_artifact_meta(grid_path, config_hash, s.seed);
    write_svg_artifact(outdir / "evppi_grid.svg",
                       voisyn::svg::grid_heatmap(grid, "EVPPI proportion of variance"),
                       config_hash, s.seed);
  } else if (command == "evsi" || command == "enbs") {
    std::vector<std::string> outs =
        s.outputs.empty() ? std::vector<std::string>{"mu_U"} : split(s.outputs, ',');
    const voisyn::LossSpec loss = make_loss(s, outs);
    const std::vector<long> n_grid = parse_n_list(s.n_list);

    std::vector<std::string> design_names;
    if (!s.design.empty()) {
      design_names = {s.design};
    } else if (command == "evsi") {
      design_names = {"gumanon", "gmshs"};
    } else {
      design_names = {"gumanon"};
    }

    std::vector<std::pair<std::string, std::vector<voisyn::CurvePoint>>> curves;
    for (const auto& name : design_names) {
      curves.emplace_back(name, voisyn::evsi_curve(make_design(name, s.seed), n_grid,
                                                   post.table, loss));
    }

    if (command == "evsi") {
      const fs::path curve_path = outdir / "evsi_curve.csv";
      write_evsi_csv(curves, curve_path);
      write_artifact_meta(curve_path, config_hash, s.seed);
      for (const auto& [name, curve] : curves) {
        const fs::path svg_path =
            curves.size() == 1 ? outdir / "evsi_curve.svg"
                               : outdir / ("evsi_curve_" + name + ".svg");
        write_svg_artifact(svg_path, voisyn::svg::curve_chart(curve, "EVSI: " + name),
                           config_hash, s.seed);
      }
    } else {
      const voisyn::EnbsResult result =
          voisyn::enbs(curves[0].second, s.cost_fixed, s.cost_per_unit);
      const fs::path enbs_path = outdir / "enbs.csv";
      voisyn::write_enbs_csv(result, enbs_path);
      write_artifact_meta(enbs_path, config_hash, s.seed);
      write_svg_artifact(outdir / "enbs.svg",
                         voisyn::svg::enbs_chart(result, "Net benefit: " + curves[0].first),
                         config_hash, s.seed);
      meta["optimal_n"] = result.optimal_n;
      meta["do_not_sample"] = result.do_not_sample;
    }
  } else {
    throw UsageError("unknown command '" + command + "'");
  }

  std::ofstream meta_out(outdir / "run.meta.json");
  if (!meta_out) throw std::runtime_error("cannot write run.meta.json");
  meta_out << meta.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian evidence synthesis and value-of-information pipeline"};
  app.fallthrough(true);
  app.require_subcommand(1);

  Settings s;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags take precedence");
  auto* o_data = app.add_option("--data", s.data, "model data JSON");
  auto* o_scenario =
      app.add_option("--scenario", s.scenario, "base | a | b")->check(CLI::IsMember({"base", "a", "b"}));
  auto* o_seed = app.add_option("--seed", s.seed, "RNG seed");
  auto* o_draws = app.add_option("--draws", s.draws, "pooled posterior draws");
  auto* o_chains = app.add_option("--chains", s.chains, "number of chains");
  auto* o_burnin = app.add_option("--burnin", s.burnin, "burn-in iterations per chain");
  auto* o_thin = app.add_option("--thin", s.thin, "steps per recorded draw");
  auto* o_inputs = app.add_option("--inputs", s.inputs,
                                  "input groups, comma-separated; join columns with +");
  auto* o_outputs = app.add_option("--outputs", s.outputs, "output columns, comma-separated");
  auto* o_loss = app.add_option("--loss", s.loss, "var | trace | det")
                     ->check(CLI::IsMember({"var", "trace", "det"}));
  auto* o_design = app.add_option("--design", s.design, "gumanon | gmshs")
                       ->check(CLI::IsMember({"gumanon", "gmshs"}));
  auto* o_n = app.add_option("--n", s.n_list, "sample sizes, comma-separated");
  auto* o_cf = app.add_option("--cost-fixed", s.cost_fixed, "fixed study cost (loss units)");
  auto* o_cu = app.add_option("--cost-per-unit", s.cost_per_unit, "cost per observation");
  auto* o_out = app.add_option("--out", s.out, "output directory");
  auto* o_threads = app.add_option("--threads", s.threads, "worker thread cap; 0 = auto");
  auto* o_fullcov = app.add_flag("--full-cov,!--no-full-cov", s.full_cov,
                                 "adapt a joint proposal covariance during burn-in");
  auto* o_samples = app.add_option("--samples", s.samples, "reuse a draws CSV, skip sampling");

  for (const char* name : {"sample", "summary", "evppi", "evsi", "enbs"}) {
    app.add_subcommand(name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config file " + config_path);
      json j = json::parse(in);
      auto merge = [&](CLI::Option* opt, const char* key, auto& slot) {
        if (opt->count() == 0 && j.contains(key)) j.at(key).get_to(slot);
      };
      merge(o_data, "data", s.data);
      merge(o_scenario, "scenario", s.scenario);
      merge(o_seed, "seed", s.seed);
      merge(o_draws, "draws", s.draws);
      merge(o_chains, "chains", s.chains);
      merge(o_burnin, "burnin", s.burnin);
      merge(o_thin, "thin", s.thin);
      merge(o_inputs, "inputs", s.inputs);
      merge(o_outputs, "outputs", s.outputs);
      merge(o_loss, "loss", s.loss);
      merge(o_design, "design", s.design);
      merge(o_n, "n", s.n_list);
      merge(o_cf, "cost_fixed", s.cost_fixed);
      merge(o_cu, "cost_per_unit", s.cost_per_unit);
      merge(o_out, "out", s.out);
      merge(o_threads, "threads", s.threads);
      merge(o_fullcov, "full_cov", s.full_cov);
      merge(o_samples, "samples", s.samples);
    }
    return run(app.get_subcommands().front()->get_name(), s);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
