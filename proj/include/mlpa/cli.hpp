// Copyright 2026 The mlpa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mlpa/crp.hpp"
#include "mlpa/harness.hpp"
#include "mlpa/ml_chain.hpp"
#include "mlpa/pa_sim.hpp"
#include "mlpa/special_fn.hpp"

namespace mlpa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::string subcommand;
  double alpha = 0.5;
  double theta = 0.0;
  double beta = 0.0;
  double t = 1.0;
  int n = 1000;
  int r = 3;
  long reps = 1;
  int b = 3;
  std::uint64_t seed = 1;
  std::string out;
  std::string format;
  std::string kernel = "merger";
  std::string suite = "default";
  std::string dump;
  int jobs = 0;
  int seeds = 20;
  long samples = 0;
  std::vector<int> only;
  bool timing = false;
  bool chain_from_beta = false;
};

inline void usage_check(bool ok, const std::string& why) {
  if (!ok) throw UsageError(why);
}

inline void check_alpha_theta(const CliConfig& c, bool allow_zero_alpha) {
  if (allow_zero_alpha) {
    usage_check(c.alpha >= 0.0 && c.alpha < 1.0, "alpha must lie in [0,1)");
    usage_check(c.alpha > 0.0 || c.theta > 0.0, "alpha = 0 requires theta > 0");
  } else {
    usage_check(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0,1)");
  }
  usage_check(std::isfinite(c.theta) && c.theta > -c.alpha, "theta must exceed -alpha");
}

inline void validate(const CliConfig& c) {
  const std::string& s = c.subcommand;
  if (s != "verify" && s != "pmf") {
    usage_check(c.reps >= 1, "reps must be >= 1");
  }
  if (!c.format.empty()) {
    usage_check(c.format == "json" || c.format == "csv", "format must be json or csv");
  }
  if (s == "tree") {
    usage_check(c.beta > -1.0, "beta must exceed -1");
    usage_check(c.n >= 1, "n must be >= 1");
    usage_check(c.r >= 0 && c.r <= c.n, "r must lie in 0..n");
  } else if (s == "chain") {
    if (c.chain_from_beta) {
      usage_check(c.beta > -1.0, "beta must exceed -1");
    } else {
      check_alpha_theta(c, false);
    }
    usage_check(c.r >= 0, "r must be >= 0");
  } else if (s == "nested") {
    check_alpha_theta(c, true);
    usage_check(c.r >= 1, "r must be >= 1");
    usage_check(c.n >= 1, "n must be >= 1");
  } else if (s == "pmf") {
    const std::string& k = c.kernel;
    usage_check(k == "merger" || k == "conditioned" || k == "splitting" || k == "kn" ||
                    k == "kn-closed",
                "kernel must be one of merger, conditioned, splitting, kn, kn-closed");
    if (k == "merger" || k == "conditioned") {
      check_alpha_theta(c, true);
      usage_check(c.b >= (k == "conditioned" ? 2 : 1),
                  k == "conditioned" ? "b must be >= 2" : "b must be >= 1");
    } else if (k == "splitting") {
      usage_check(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0,1)");
      usage_check(c.b >= 2, "b must be >= 2");
    } else if (k == "kn") {
      check_alpha_theta(c, true);
      usage_check(c.n >= 1, "n must be >= 1");
    } else {
      usage_check(c.n >= 1, "n must be >= 1");
    }
    usage_check(c.format.empty() || c.format == "csv", "pmf writes csv only");
  } else if (s == "condhalf") {
    usage_check(c.t > 0.0 && std::isfinite(c.t), "t must be positive");
    usage_check(c.r >= 1, "r must be >= 1");
    usage_check(c.n >= 0, "n must be >= 0");
  } else if (s == "verify") {
    usage_check(c.suite == "default" || c.suite == "quick", "suite must be default or quick");
    usage_check(c.seeds >= 1, "seeds must be >= 1");
    usage_check(c.samples >= 0, "samples must be >= 0");
    for (int k : c.only) usage_check(k >= 1 && k <= kCriteria, "only: criteria are 1..13");
  }
  usage_check(c.jobs >= 0, "jobs must be >= 0");
}

/// Writes via a temporary file in the target directory and renames it into
/// place, so readers never observe a partial file.
inline void write_atomically(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, target);
}

inline std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline int run_tree(const CliConfig& c, std::ostream& out) {
  const int jobs = resolve_jobs(c.jobs);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(c.reps));
  std::vector<double> maxima(rows.size());
  std::vector<int> argmax(rows.size());
  parallel_for(c.reps, jobs, [&](long i) {
    RngStream rng(c.seed, static_cast<std::uint64_t>(i));
    const TreeState t = grow_tree(c.beta, c.n, rng);
    rows[i] = scaled_degrees(t, c.r);
    maxima[i] = max_scaled_degree(t, t.n);
    argmax[i] = argmax_degree(t);
    if (i == 0 && !c.dump.empty()) {
      std::ostringstream dump;
      write_tree_csv(dump, t);
      write_atomically(c.dump, dump.str());
    }
  });
  if (c.format == "json") {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << nlohmann::json{{"replicate", i}, {"scaled_degrees", rows[i]},
                            {"max_scaled_degree", maxima[i]}, {"argmax", argmax[i]}}
                 .dump()
          << '\n';
    }
    return kExitOk;
  }
  out << "replicate";
  for (int j = 0; j <= c.r; ++j) out << ",d" << j;
  out << ",max_scaled,argmax\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << i;
    for (double v : rows[i]) out << ',' << fmt_double(v);
    out << ',' << fmt_double(maxima[i]) << ',' << argmax[i] << '\n';
  }
  return kExitOk;
}

inline int run_chain(const CliConfig& c, std::ostream& out) {
  const AlphaTheta p = c.chain_from_beta ? mori_params(c.beta) : AlphaTheta(c.alpha, c.theta);
  const ChainSampler sampler(p, c.r);
  std::vector<MLChainPath> paths(static_cast<std::size_t>(c.reps), MLChainPath{p, 0, {}, {}});
  parallel_for(c.reps, resolve_jobs(c.jobs), [&](long i) {
    RngStream rng(c.seed, static_cast<std::uint64_t>(i));
    paths[i] = sampler(rng);
  });
  if (c.format == "csv") {
    out << "replicate,j,value,xi,beta\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto xi = spacings(paths[i]).xi;
      for (int j = 0; j <= c.r; ++j) {
        out << i << ',' << j << ',' << fmt_double(paths[i].values[j]) << ','
            << fmt_double(xi[j]) << ',' << (j == 0 ? std::string() : fmt_double(paths[i].beta(j)))
            << '\n';
      }
    }
    return kExitOk;
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    out << nlohmann::json{{"replicate", i},
                          {"alpha", p.alpha},
                          {"theta", p.theta},
                          {"values", paths[i].values},
                          {"betas", paths[i].betas},
                          {"xi", spacings(paths[i]).xi}}
               .dump()
        << '\n';
  }
  return kExitOk;
}

inline int run_nested(const CliConfig& c, std::ostream& out) {
  std::vector<NestedRecord> recs(static_cast<std::size_t>(c.reps));
  parallel_for(c.reps, resolve_jobs(c.jobs), [&](long i) {
    RngStream rng(c.seed, static_cast<std::uint64_t>(i));
    recs[i] = nested_scheme(c.alpha, c.theta, c.r, c.n, rng);
  });
  if (c.format == "csv") {
    out << "replicate,level,K,xi,merged,beta\n";
    for (std::size_t i = 0; i < recs.size(); ++i) {
      for (int j = 0; j <= c.r; ++j) {
        out << i << ',' << j << ',' << recs[i].K(j) << ',' << recs[i].xi[j] << ','
            << (j < c.r ? std::to_string(recs[i].merged_sizes[j]) : std::string()) << ','
            << (j >= 1 ? fmt_double(recs[i].betas[j - 1]) : std::string()) << '\n';
      }
    }
    return kExitOk;
  }
  for (std::size_t i = 0; i < recs.size(); ++i) write_nested_jsonl(out, recs[i], static_cast<long>(i));
  return kExitOk;
}

inline int run_pmf(const CliConfig& c, std::ostream& out) {
  out.precision(17);
  const std::string& k = c.kernel;
  if (k == "merger" || k == "conditioned") {
    out << "ell,p\n";
    for (int l = (k == "merger" ? 0 : 2); l <= c.b; ++l) {
      const MergerKernelQuery q(c.alpha, c.theta, c.b, l);
      out << l << ',' << (k == "merger" ? merger_pmf(q) : conditioned_merger_pmf(q)) << '\n';
    }
  } else if (k == "splitting") {
    out << "ell,p,splitting,aldous\n";
    for (int l = 1; l < c.b; ++l) {
      const SplittingValue v = beta_splitting_pmf(c.alpha, c.b, l);
      out << l << ',' << v.merger << ',' << v.splitting << ',' << v.aldous << '\n';
    }
  } else if (k == "kn") {
    const auto pmf = exact_kn_pmf(c.alpha, c.theta, c.n);
    out << "k,p\n";
    for (int j = 1; j <= c.n; ++j) out << j << ',' << pmf[j] << '\n';
  } else {
    out << "k,p,p_lower_index_n\n";
    for (int j = 1; j <= c.n; ++j) {
      out << j << ',' << kn_closed_form_half(c.n, j) << ',' << kn_closed_form_half_lower_n(c.n, j)
          << '\n';
    }
  }
  return kExitOk;
}

inline int run_condhalf(const CliConfig& c, std::ostream& out) {
  std::vector<nlohmann::json> lines(static_cast<std::size_t>(c.reps));
  parallel_for(c.reps, resolve_jobs(c.jobs), [&](long i) {
    RngStream rng(c.seed, static_cast<std::uint64_t>(i));
    const ConditionedChain ch = sample_conditioned_chain_half(c.t, c.r, rng);
    nlohmann::json j{{"replicate", i}, {"t", c.t}, {"tvalues", ch.tvalues},
                     {"vratios", ch.vratios}};
    if (c.n >= 1) j["K_n1"] = HalfConditionedCrp(c.n, ch.tvalues[1])(rng).K();
    lines[i] = std::move(j);
  });
  if (c.format == "csv") {
    out << "replicate,k,T,V" << (c.n >= 1 ? ",K_n1" : "") << '\n';
    for (std::size_t i = 0; i < lines.size(); ++i) {
      for (int k = 0; k <= c.r; ++k) {
        out << i << ',' << k << ',' << fmt_double(lines[i]["tvalues"][k].get<double>()) << ','
            << (k >= 1 ? fmt_double(lines[i]["vratios"][k - 1].get<double>()) : std::string());
        if (c.n >= 1) out << ',' << (k == 1 ? std::to_string(lines[i]["K_n1"].get<int>()) : "");
        out << '\n';
      }
    }
    return kExitOk;
  }
  for (const auto& j : lines) out << j.dump() << '\n';
  return kExitOk;
}

inline int run_verify(const CliConfig& c, std::ostream& out, std::ostream& err) {
  SuiteConfig cfg;
  cfg.suite = c.suite;
  cfg.seed = c.seed;
  cfg.seeds = c.seeds;
  cfg.jobs = resolve_jobs(c.jobs);
  cfg.samples = c.samples;
  cfg.only = c.only;
  const auto reports = run_suite(cfg, [&](const VerifyReport& r) {
    err << (r.underpowered ? "UNDERPOWERED " : r.pass ? "PASS " : "FAIL ") << r.criterion << ' '
        << r.name << " statistic=" << r.statistic << " threshold=" << r.threshold << '\n';
  });
  if (c.format == "csv") {
    write_summary_csv(out, reports);
  } else {
    out << suite_json(reports, cfg, c.timing).dump(2) << '\n';
  }
  for (const auto& r : reports) {
    if (r.failed()) return kExitFailure;
  }
  return kExitOk;
}

inline int default_jobs() {
  if (const char* env = std::getenv("MLPA_JOBS")) {
    try {
      const int j = std::stoi(env);
      if (j >= 1) return j;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// Entry point shared by the mlpa binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig c;
  c.jobs = default_jobs();
  CLI::App app{"mlpa: Mittag-Leffler chains, nested restaurants and preferential attachment"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all");

  bool seed_given = false;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "random seed")->each([&](const std::string&) { seed_given = true; });
    s->add_option("--out", c.out, "output file (written atomically); stdout if empty");
    s->add_option("--jobs", c.jobs, "worker threads (default: MLPA_JOBS or 1)");
    s->add_option("--format", c.format, "json or csv");
  };

  auto* tree = app.add_subcommand("tree", "grow beta-recursive trees, emit scaled degrees");
  add_common(tree);
  tree->add_option("--beta", c.beta, "attachment offset, > -1");
  tree->add_option("--n", c.n, "number of edges");
  tree->add_option("--reps", c.reps, "number of trees");
  tree->add_option("--r", c.r, "report degrees of vertices 0..r");
  tree->add_option("--dump", c.dump, "write the first tree as vertex,parent,degree CSV");

  auto* chain = app.add_subcommand("chain", "sample Mittag-Leffler chain paths and spacings");
  add_common(chain);
  chain->add_option("--alpha", c.alpha);
  chain->add_option("--theta", c.theta);
  auto* chain_beta = chain->add_option("--beta", c.beta, "use the tree parameterisation");
  chain->add_option("--r", c.r);
  chain->add_option("--reps", c.reps);

  auto* nested = app.add_subcommand("nested", "nested Chinese restaurant partitions (JSONL)");
  add_common(nested);
  nested->add_option("--alpha", c.alpha);
  nested->add_option("--theta", c.theta);
  nested->add_option("--r", c.r);
  nested->add_option("--n", c.n);
  nested->add_option("--reps", c.reps);

  auto* pmf = app.add_subcommand("pmf", "evaluate merger, splitting and block-count pmfs (CSV)");
  add_common(pmf);
  pmf->add_option("--kernel", c.kernel, "merger|conditioned|splitting|kn|kn-closed");
  pmf->add_option("--alpha", c.alpha);
  pmf->add_option("--theta", c.theta);
  pmf->add_option("--b", c.b);
  pmf->add_option("--n", c.n);

  auto* condhalf = app.add_subcommand("condhalf", "alpha = 1/2 chain conditioned on T_0 = t");
  add_common(condhalf);
  condhalf->add_option("--t", c.t);
  condhalf->add_option("--r", c.r);
  condhalf->add_option("--reps", c.reps);
  c.n = 0;
  condhalf->add_option("--n", c.n, "also draw K_{n,1} from the level-1 restaurant");

  auto* verify = app.add_subcommand("verify", "run the statistical verification suite");
  add_common(verify);
  verify->get_option("--seed")->required();
  verify->add_option("--suite", c.suite, "default or quick");
  verify->add_option("--seeds", c.seeds, "seeds per statistical criterion");
  verify->add_option("--samples", c.samples, "override every sample size");
  verify->add_option("--only", c.only, "criteria to run")->delimiter(',');
  verify->add_flag("--timing", c.timing, "include elapsed seconds in the JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  c.subcommand = app.get_subcommands().front()->get_name();
  c.chain_from_beta = chain_beta->count() > 0;
  if (c.subcommand == "tree" || c.subcommand == "nested") {
    if (app.get_subcommands().front()->get_option("--n")->count() == 0) {
      c.n = c.subcommand == "tree" ? 1000 : 100;
    }
  }
  if (c.subcommand == "pmf" && pmf->get_option("--n")->count() == 0) c.n = 10;

  try {
    validate(c);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!seed_given && c.subcommand != "pmf") err << "seed=" << c.seed << '\n';

  std::ostringstream buffer;
  int code = kExitOk;
  try {
    if (c.subcommand == "tree") code = run_tree(c, buffer);
    else if (c.subcommand == "chain") code = run_chain(c, buffer);
    else if (c.subcommand == "nested") code = run_nested(c, buffer);
    else if (c.subcommand == "pmf") code = run_pmf(c, buffer);
    else if (c.subcommand == "condhalf") code = run_condhalf(c, buffer);
    else code = run_verify(c, buffer, err);
    if (c.out.empty()) {
      out << buffer.str();
    } else {
      write_atomically(c.out, buffer.str());
    }
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return code;
}

}  // namespace mlpa::cli
