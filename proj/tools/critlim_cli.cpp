// critlim command-line front end: wires config files to the library and
// writes machine-readable outputs plus a run manifest per invocation.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "critlim/assumptions.hpp"
#include "critlim/combinatorics.hpp"
#include "critlim/config.hpp"
#include "critlim/functional.hpp"
#include "critlim/kernels.hpp"
#include "critlim/limitlaw.hpp"
#include "critlim/montecarlo.hpp"
#include "critlim/stats.hpp"

namespace fs = std::filesystem;
using critlim::format_double;
using json = nlohmann::ordered_json;

namespace {

std::string utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunContext {
  std::string subcommand;
  std::string out_dir = ".";
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned workers = 0;
  bool dump_config = false;
  critlim::KvConfig cfg;
  std::string started;
  std::vector<std::string> outputs;

  void begin(const std::string& name) {
    subcommand = name;
    started = utc_now();
    if (!config_path.empty()) {
      cfg = critlim::KvConfig::parse_file(config_path);
      critlim::check_schema_version(cfg);
    }
    if (!seed_given) {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      std::cerr << "critlim: no --seed given; using OS-entropy seed " << seed
                << "\n";
    }
    fs::create_directories(out_dir);
  }

  std::ofstream open_output(const std::string& name) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out.imbue(std::locale::classic());
    outputs.push_back(path.string());
    return out;
  }

  void write_manifest() {
    json manifest;
    manifest["toolkit_version"] = critlim::kToolkitVersion;
    manifest["subcommand"] = subcommand;
    manifest["config_hash"] = cfg.hash();
    manifest["root_seed"] = seed;
    manifest["started"] = started;
    manifest["finished"] = utc_now();
    manifest["outputs"] = outputs;
    const fs::path path = fs::path(out_dir) / "manifest.json";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << manifest.dump(2) << "\n";
  }
};

void add_common(CLI::App* sub, RunContext& ctx) {
  sub->add_option("--config", ctx.config_path, "config file (key = value lines)");
  sub->add_option("--seed", ctx.seed, "root seed for all randomness")
      ->each([&ctx](const std::string&) { ctx.seed_given = true; });
  sub->add_option("--out-dir", ctx.out_dir, "output directory");
  sub->add_option("--workers", ctx.workers,
                  "worker threads (0 = logical cores)");
  sub->add_flag("--dump-config", ctx.dump_config,
                "echo the canonical config and exit");
}

int cmd_constants(RunContext& ctx) {
  const critlim::KernelSpec spec = critlim::kernel_from_config(ctx.cfg);
  const critlim::TestFunction f =
      critlim::function_from_config(ctx.cfg, spec.d);
  const critlim::Alphas a = spec.alphas();
  const double c_unit = critlim::c_fd(spec.d, a.alpha2, 1.0);
  const double d_val = f.mass() == 0.0
                           ? critlim::d_fd(spec.d, a.alpha2, f)
                           : std::numeric_limits<double>::quiet_NaN();

  std::string row = std::to_string(spec.d) + "," + critlim::family_name(spec.family) +
                    "," + format_double(spec.H) + "," + format_double(spec.K) + "," +
                    format_double(a.alpha1) + "," + format_double(a.alpha2) + "," +
                    format_double(a.lambda) + "," + format_double(c_unit) + "," +
                    format_double(d_val);
  for (int m = 1; m <= 4; ++m)
    row += "," + format_double(critlim::first_law_moment(c_unit, 1.0, a.lambda, m));
  critlim::LimitLawSpec law;
  law.order = critlim::LawOrder::second;
  law.lambda = a.lambda;
  law.t = 1.0;
  law.constant = d_val;
  law.d = spec.d;
  for (int m : {2, 4})
    row += "," + format_double(f.mass() == 0.0
                                   ? critlim::second_order_moment(law, m)
                                   : std::numeric_limits<double>::quiet_NaN());

  const std::string header =
      "d,family,H,K,alpha1,alpha2,lambda,c_fd_mass1,d_fd,first_m1,first_m2,"
      "first_m3,first_m4,second_m2,second_m4";
  auto out = ctx.open_output("constants.csv");
  out << header << "\n" << row << "\n";
  std::cout << header << "\n" << row << "\n";
  return 0;
}

int cmd_check_assumptions(RunContext& ctx, const std::vector<double>& gammas,
                          long trials, int kappa_m, long kappa_trials,
                          double ratio_bound) {
  const critlim::KernelSpec spec = critlim::kernel_from_config(ctx.cfg);
  auto out = ctx.open_output("check_assumptions.csv");
  const std::string header =
      "family,H,K,assumption,gamma,trials,violations,beta_hat,kappa_hat";
  out << header << "\n";
  std::cout << header << "\n";
  long total_violations = 0;

  auto emit = [&](const critlim::AssumptionReport& rep, double beta_hat,
                  double kappa_hat) {
    std::string row = std::string(critlim::family_name(spec.family)) + "," +
                      format_double(spec.H) + "," + format_double(spec.K) + "," +
                      critlim::assumption_name(rep.assumption) + "," +
                      format_double(rep.gamma) + "," + std::to_string(rep.trials) +
                      "," + std::to_string(rep.violations) + "," +
                      format_double(beta_hat) + "," + format_double(kappa_hat);
    out << row << "\n";
    std::cout << row << "\n";
    total_violations += rep.violations;
  };

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (auto which : {critlim::Assumption::A1, critlim::Assumption::A2}) {
    const auto rep = critlim::check_A(spec, which, ratio_bound, trials, ctx.seed);
    emit(rep, rep.empirical_constant, nan);
  }
  double kappa_min = std::numeric_limits<double>::infinity();
  long kappa_viol = 0;
  for (int m = 1; m <= kappa_m; ++m) {
    const auto rep = critlim::estimate_kappa(spec, m, kappa_trials, ctx.seed);
    kappa_min = std::min(kappa_min, rep.empirical_constant);
    kappa_viol += rep.violations;
  }
  critlim::AssumptionReport brep;
  brep.assumption = critlim::Assumption::B;
  brep.trials = kappa_trials * kappa_m;
  brep.violations = kappa_viol;
  emit(brep, nan, kappa_min);
  for (auto which : {critlim::Assumption::C1, critlim::Assumption::C2})
    for (double gamma : gammas) {
      const auto rep = critlim::check_C(spec, which, gamma, trials, ctx.seed);
      emit(rep, rep.empirical_constant, nan);
    }
  return total_violations == 0 ? 0 : 1;
}

int cmd_simulate(RunContext& ctx, bool dump_replicates) {
  critlim::ExperimentConfig cfg =
      critlim::experiment_from_config(ctx.cfg, ctx.seed);
  cfg.workers = ctx.workers;
  const critlim::MomentReport report = critlim::run_experiment(cfg);

  auto csv = ctx.open_output("report.csv");
  const std::string header = "n,m,empirical,se,target,zscore";
  csv << header << "\n";
  std::cout << header << "\n";
  for (const auto& row : report.rows)
    for (std::size_t m = 0; m < row.empirical.size(); ++m) {
      const std::string line =
          format_double(row.n) + "," + std::to_string(m + 1) + "," +
          format_double(row.empirical[m]) + "," + format_double(row.se[m]) +
          "," + format_double(row.target[m]) + "," +
          format_double(row.zscore[m]);
      csv << line << "\n";
      std::cout << line << "\n";
    }

  if (dump_replicates) {
    auto reps = ctx.open_output("replicates.csv");
    reps << "replicate,n,t1,t2,value\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i)
      for (std::size_t r = 0; r < report.values[i].size(); ++r)
        reps << r << "," << format_double(report.rows[i].n) << ","
             << format_double(cfg.t1) << "," << format_double(cfg.t2) << ","
             << format_double(report.values[i][r]) << "\n";
  }

  json jr;
  jr["config_hash"] = ctx.cfg.hash();
  jr["root_seed"] = ctx.seed;
  jr["constant"] = report.constant;
  jr["lambda"] = report.lambda;
  jr["rows"] = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["n"] = row.n;
    r["empirical"] = row.empirical;
    r["se"] = row.se;
    r["target"] = row.target;
    r["zscore"] = row.zscore;
    r["runtime_sec"] = row.runtime_sec;
    jr["rows"].push_back(r);
  }
  auto jout = ctx.open_output("report.json");
  jout << jr.dump(2) << "\n";
  return 0;
}

int cmd_limit_sample(RunContext& ctx, std::size_t count) {
  const critlim::KernelSpec spec = critlim::kernel_from_config(ctx.cfg);
  const critlim::TestFunction f = critlim::function_from_config(ctx.cfg, spec.d);
  const critlim::Alphas a = spec.alphas();
  const std::string order = ctx.cfg.get_string("order", "first");

  critlim::LimitLawSpec law;
  law.lambda = a.lambda;
  law.t = std::min(ctx.cfg.get_double("t1", 1.0), ctx.cfg.get_double("t2", 1.0));
  law.d = spec.d;
  if (order == "first") {
    law.order = critlim::LawOrder::first;
    law.constant = critlim::c_fd(spec.d, a.alpha2, f.mass());
  } else if (order == "second") {
    law.order = critlim::LawOrder::second;
    law.constant = critlim::d_fd(spec.d, a.alpha2, f);
  } else {
    throw critlim::ConfigError("field `order`: expected first or second");
  }

  const auto draws = critlim::sample_limit(law, count, ctx.seed);
  auto out = ctx.open_output("limit_samples.csv");
  out << "index,value\n";
  for (std::size_t i = 0; i < draws.size(); ++i)
    out << i << "," << format_double(draws[i]) << "\n";

  const auto est = critlim::estimate_moments(draws, 4);
  std::cout << "m,empirical,se,target\n";
  for (int m = 1; m <= 4; ++m)
    std::cout << m << "," << format_double(est.mean[m - 1]) << ","
              << format_double(est.se[m - 1]) << ","
              << format_double(critlim::limit_moment(law, m)) << "\n";
  return 0;
}

int cmd_combinatorics(RunContext& ctx, int m) {
  auto out = ctx.open_output("combinatorics.txt");
  bool all_pass = true;
  auto line = [&](const std::string& s) {
    out << s << "\n";
    std::cout << s << "\n";
  };

  using critlim::Rational;
  auto rat = [](const Rational& r) {
    std::string s = std::to_string(r.numerator());
    if (r.denominator() != 1) s += "/" + std::to_string(r.denominator());
    return s;
  };
  for (const auto& [a, name] :
       {std::pair{Rational(1), std::string("1")}, {Rational(2), "2"},
        {Rational(1, 2), "1/2"}, {Rational(7, 3), "7/3"}}) {
    const auto check = critlim::product_identity(m, a);
    line("product-identity: " + std::string(check.equal ? "PASS" : "FAIL") +
         " (" + rat(check.lhs) + " = " + rat(check.rhs) + " at A=" + name + ")");
    all_pass = all_pass && check.equal;
  }

  if (m % 2 == 0) {
    long count = 0;
    critlim::for_each_perm(m, [&](const critlim::Perm& p) {
      count += critlim::classify_P1(p) ? 1 : 0;
    });
    long expected = 1;
    for (int k = 1; k <= m / 2; ++k) expected *= 2 * k;
    const bool ok = count == expected;
    line("pairing-class-count: " + std::string(ok ? "PASS" : "FAIL") + " (" +
         std::to_string(count) + " = " + std::to_string(expected) + ")");
    all_pass = all_pass && ok;

    bool pairing_ok = true;
    long checked = 0;
    critlim::for_each_perm(m, [&](const critlim::Perm& p) {
      if (!critlim::classify_P1(p)) return;
      ++checked;
      const critlim::Perm q = critlim::build_pairing(p);
      for (int i = 1; i <= m; ++i) {
        if (q(i) % 2 != i % 2) pairing_ok = false;
        const auto tail = critlim::tail_diff_set(p, i);
        if (std::find(tail.begin(), tail.end(), q(i)) == tail.end())
          pairing_ok = false;
      }
    });
    line("parity-pairing: " + std::string(pairing_ok ? "PASS" : "FAIL") +
         " (checked " + std::to_string(checked) + " permutations)");
    all_pass = all_pass && pairing_ok;
  }
  return all_pass ? 0 : 1;
}

int cmd_remark18(RunContext& ctx) {
  const critlim::KernelSpec spec = critlim::kernel_from_config(ctx.cfg);
  const critlim::TestFunction f = critlim::function_from_config(ctx.cfg, spec.d);
  const auto res = critlim::log_kernel_identity_check(f);
  auto out = ctx.open_output("remark18.csv");
  out << "lhs,rhs,rel_err\n"
      << format_double(res.lhs) << "," << format_double(res.rhs) << ","
      << format_double(res.rel_err) << "\n";
  std::cout << "lhs = " << format_double(res.lhs) << "\n"
            << "rhs = " << format_double(res.rhs) << "\n"
            << "rel_err = " << format_double(res.rel_err) << "\n"
            << "note: " << res.note << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critlim: sampling, quadrature and limit-law verification for "
               "functionals of two independent Gaussian processes"};
  app.require_subcommand(1);
  RunContext ctx;

  auto* simulate = app.add_subcommand("simulate", "replicated experiment");
  bool dump_replicates = false;
  simulate->add_flag("--dump-replicates", dump_replicates,
                     "write per-replicate values");
  add_common(simulate, ctx);

  auto* constants = app.add_subcommand("constants", "limit-law constant table");
  add_common(constants, ctx);

  auto* check = app.add_subcommand("check-assumptions",
                                   "numerical assumption certification");
  std::vector<double> gammas{2.0, 5.0, 10.0, 100.0};
  long trials = 10000;
  long kappa_trials = 10000;
  int kappa_m = 8;
  double ratio_bound = 0.01;
  check->add_option("--gammas", gammas, "gamma schedule");
  check->add_option("--trials", trials, "trials per check");
  check->add_option("--kappa-m", kappa_m, "largest increment count");
  check->add_option("--kappa-trials", kappa_trials, "trials per kappa sweep");
  check->add_option("--ratio-bound", ratio_bound, "envelope ratio bound");
  add_common(check, ctx);

  auto* limit = app.add_subcommand("limit-sample", "draw from the limit law");
  std::size_t count = 10000;
  limit->add_option("--count", count, "number of draws");
  add_common(limit, ctx);

  auto* comb = app.add_subcommand("combinatorics-verify",
                                  "enumerative identity checks");
  int comb_m = 3;
  comb->add_option("--m", comb_m, "permutation size")
      ->required()
      ->check(CLI::Range(1, 8));
  add_common(comb, ctx);

  auto* remark = app.add_subcommand("remark18", "log-kernel identity check");
  add_common(remark, ctx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    ctx.begin(sub->get_name());
    if (ctx.dump_config) {
      std::cout << ctx.cfg.serialize();
      return 0;
    }
    int rc = 0;
    if (sub == simulate) {
      rc = cmd_simulate(ctx, dump_replicates);
    } else if (sub == constants) {
      rc = cmd_constants(ctx);
    } else if (sub == check) {
      rc = cmd_check_assumptions(ctx, gammas, trials, kappa_m, kappa_trials,
                                 ratio_bound);
    } else if (sub == limit) {
      rc = cmd_limit_sample(ctx, count);
    } else if (sub == comb) {
      rc = cmd_combinatorics(ctx, comb_m);
    } else if (sub == remark) {
      rc = cmd_remark18(ctx);
    }
    ctx.write_manifest();
    return rc;
  } catch (const critlim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
