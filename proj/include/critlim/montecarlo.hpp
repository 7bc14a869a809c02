#ifndef CRITLIM_MONTECARLO_HPP
#define CRITLIM_MONTECARLO_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "critlim/functional.hpp"
#include "critlim/grid.hpp"
#include "critlim/kernels.hpp"
#include "critlim/limitlaw.hpp"
#include "critlim/sampler.hpp"
#include "critlim/stats.hpp"

namespace critlim {

/// Replicated-sampling experiment: normalized double-functional moments per
/// scale value, against the limit-law targets.
struct ExperimentConfig {
  KernelSpec spec;
  TestFunction f;
  LawOrder order = LawOrder::first;
  std::vector<double> n_list{2.0, 4.0, 6.0};
  double t1 = 1.0;
  double t2 = 1.0;
  std::size_t replicates = 500;
  std::size_t m_lin = 8;
  std::size_t m_log = 128;
  std::uint64_t root_seed = 1;
  int m_max = 4;
  unsigned workers = 0;  // 0: hardware concurrency

  void validate() const {
    spec.validate();
    if (f.d != spec.d)
      throw std::invalid_argument("ExperimentConfig: f and kernel dimension differ");
    if (replicates < 2)
      throw std::invalid_argument("ExperimentConfig: replicates must be >= 2");
    if (order == LawOrder::second && f.mass() != 0.0)
      throw std::invalid_argument(
          "ExperimentConfig: second-order law requires a mean-zero f");
    if (n_list.empty())
      throw std::invalid_argument("ExperimentConfig: empty n list");
    if (t1 <= 0.0 || t2 <= 0.0)
      throw std::invalid_argument("ExperimentConfig: t1, t2 must be > 0");
  }
};

struct MomentRow {
  double n = 0.0;
  std::vector<double> empirical;
  std::vector<double> se;
  std::vector<double> target;
  std::vector<double> zscore;
  double runtime_sec = 0.0;
};

struct MomentReport {
  std::vector<MomentRow> rows;
  std::vector<std::vector<double>> values;  // raw normalized values per n
  double constant = 0.0;                    // C or D
  double lambda = 0.0;
  std::uint64_t root_seed = 0;
};

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

inline std::vector<double> merge_nodes(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) {
                          return std::abs(x - y) <=
                                 1e-12 * std::max(std::abs(x), std::abs(y));
                        }),
            out.end());
  return out;
}

}  // namespace detail

inline MomentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Alphas a = cfg.spec.alphas();
  const double t_min = std::min(cfg.t1, cfg.t2);

  MomentReport report;
  report.lambda = a.lambda;
  report.root_seed = cfg.root_seed;
  report.constant = cfg.order == LawOrder::first
                        ? c_fd(cfg.spec.d, a.alpha2, cfg.f.mass())
                        : d_fd(cfg.spec.d, a.alpha2, cfg.f);

  LimitLawSpec law;
  law.order = cfg.order;
  law.lambda = a.lambda;
  law.t = t_min;
  law.constant = report.constant;
  law.d = cfg.spec.d;

  for (double n : cfg.n_list) {
    const auto start = std::chrono::steady_clock::now();
    const TimeGrid grid_u = build_grid(n, cfg.t1, cfg.m_lin, cfg.m_log);
    const TimeGrid grid_v = cfg.t2 == cfg.t1
                                ? grid_u
                                : build_grid(n, cfg.t2, cfg.m_lin, cfg.m_log);
    TimeGrid joint =
        cfg.t2 == cfg.t1
            ? grid_u
            : TimeGrid::from_nodes(detail::merge_nodes(grid_u.nodes, grid_v.nodes));
    const PathFactorization fact(cfg.spec, joint, FactorMethod::cholesky);

    std::vector<double> values(cfg.replicates);
    const double norm = cfg.order == LawOrder::first ? n : std::sqrt(n);
    detail::parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
      const PathBatch batch = sample(fact, cfg.spec.d, r, cfg.root_seed);
      values[r] = evaluate_F(cfg.f, batch, grid_u, grid_v).value / norm;
    });

    const MomentEstimate est = estimate_moments(values, cfg.m_max);
    MomentRow row;
    row.n = n;
    row.empirical = est.mean;
    row.se = est.se;
    for (int m = 1; m <= cfg.m_max; ++m) {
      const double target = limit_moment(law, m);
      row.target.push_back(target);
      const double se = est.se[static_cast<std::size_t>(m - 1)];
      const double err = est.mean[static_cast<std::size_t>(m - 1)] - target;
      row.zscore.push_back(se > 0.0 ? err / se : (err == 0.0 ? 0.0 : INFINITY));
    }
    row.runtime_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    report.rows.push_back(std::move(row));
    report.values.push_back(std::move(values));
  }
  return report;
}

}  // namespace critlim

#endif  // CRITLIM_MONTECARLO_HPP
