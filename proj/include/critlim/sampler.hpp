#ifndef CRITLIM_SAMPLER_HPP
#define CRITLIM_SAMPLER_HPP

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "critlim/grid.hpp"
#include "critlim/kernels.hpp"
#include "critlim/rng.hpp"

namespace critlim {

enum class FactorMethod { cholesky, circulant };

inline std::atomic<std::uint64_t>& factorization_counter() {
  static std::atomic<std::uint64_t> count{0};
  return count;
}
inline std::uint64_t factorization_count() { return factorization_counter().load(); }

template <kernel_like Kernel>
Eigen::MatrixXd gram_matrix(const Kernel& k, const std::vector<double>& nodes) {
  const Eigen::Index m = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = k.cov(nodes[static_cast<std::size_t>(i)],
                             nodes[static_cast<std::size_t>(j)]);
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

/// Reusable sampling factor for one (kernel, grid) pair: either a lower
/// Cholesky factor of the Gram matrix, or a circulant embedding spectrum of
/// the increment autocovariance (fbm on uniform grids only).
class PathFactorization {
 public:
  PathFactorization(const KernelSpec& spec, const TimeGrid& grid,
                    FactorMethod method)
      : spec_(spec), grid_(grid), method_(method) {
    factorization_counter().fetch_add(1);
    if (method_ == FactorMethod::cholesky) {
      init_cholesky();
    } else {
      init_circulant();
    }
  }

  const KernelSpec& spec() const { return spec_; }
  const TimeGrid& grid() const { return grid_; }
  FactorMethod method() const { return method_; }
  double jitter_used() const { return jitter_used_; }
  bool spectrum_clipped() const { return spectrum_clipped_; }
  const std::vector<double>& spectrum() const { return spectrum_; }

  // Covariance the sampling operator actually realizes; equals the kernel
  // Gram matrix up to factorization roundoff (and spectrum clipping).
  Eigen::MatrixXd implied_covariance() const {
    if (method_ == FactorMethod::cholesky)
      return chol_ * chol_.transpose();
    // autocovariance implied by the (possibly clipped) spectrum
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> lam(spectrum_.size()), ac;
    for (std::size_t i = 0; i < spectrum_.size(); ++i) lam[i] = spectrum_[i];
    fft.inv(ac, lam);
    const Eigen::Index m = static_cast<Eigen::Index>(grid_.size());
    Eigen::MatrixXd p(m, m);
    auto acov = [&](Eigen::Index i, Eigen::Index j) {
      return ac[static_cast<std::size_t>(std::abs(i - j))].real();
    };
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        p(i, j) = (i > 0 ? p(i - 1, j) : 0.0) + (j > 0 ? p(i, j - 1) : 0.0) -
                  (i > 0 && j > 0 ? p(i - 1, j - 1) : 0.0) + acov(i, j);
    return p;
  }

  // One component path given its own stream; length = grid size.
  Eigen::VectorXd sample_component(Philox& stream) const {
    if (method_ == FactorMethod::cholesky) {
      Eigen::VectorXd xi(chol_.rows());
      for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = stream.normal();
      return chol_ * xi;
    }
    return sample_circulant(stream);
  }

 private:
  void init_cholesky() {
    Eigen::MatrixXd g = gram_matrix(spec_, grid_.nodes);
    const double scale = g.trace() / static_cast<double>(g.rows());
    const double cap = 1e-12 * scale;
    for (double jitter : {0.0, 1e-16 * scale, 1e-15 * scale, 1e-14 * scale,
                          1e-13 * scale, cap}) {
      Eigen::MatrixXd gj = g;
      gj.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(gj);
      if (llt.info() == Eigen::Success) {
        chol_ = llt.matrixL();
        jitter_used_ = jitter;
        if (jitter > 0.0)
          std::cerr << "critlim: cholesky jitter " << jitter << " applied\n";
        return;
      }
    }
    throw std::runtime_error(
        "PathFactorization: cholesky failed within the jitter cap");
  }

  void init_circulant() {
    if (spec_.family != Family::fbm)
      throw std::invalid_argument(
          "PathFactorization: circulant requires the fbm family");
    const auto& u = grid_.nodes;
    const double h = u.front();
    for (std::size_t i = 0; i < u.size(); ++i)
      if (std::abs(u[i] - h * static_cast<double>(i + 1)) >
          1e-9 * grid_.horizon())
        throw std::invalid_argument(
            "PathFactorization: circulant requires a uniform grid {h,...,mh}");

    const std::size_t m = u.size();

    // increment autocovariance of the step-h stationary sequence
    const double twoH = 2.0 * spec_.H;
    auto gamma = [&](std::size_t k) {
      const double kk = static_cast<double>(k);
      return 0.5 * std::pow(h, twoH) *
             (std::pow(kk + 1.0, twoH) - 2.0 * std::pow(kk, twoH) +
              std::pow(std::abs(kk - 1.0), twoH));
    };

    // embed at size n = 2^k >= 2m; an indefinite embedding is retried at
    // double the size before giving up
    std::size_t n = 1;
    while (n < 2 * m) n *= 2;
    Eigen::FFT<double> fft;
    for (int attempt = 0; attempt < 8; ++attempt, n *= 2) {
      std::vector<std::complex<double>> c(n);
      for (std::size_t j = 0; j <= n / 2; ++j) c[j] = gamma(j);
      for (std::size_t j = 1; j < n / 2; ++j) c[n - j] = c[j];

      std::vector<std::complex<double>> lam;
      fft.fwd(lam, c);
      double max_eig = 0.0, min_eig = 0.0;
      for (const auto& l : lam) {
        max_eig = std::max(max_eig, l.real());
        min_eig = std::min(min_eig, l.real());
      }
      if (min_eig < -1e-8 * max_eig) continue;

      spectrum_.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        spectrum_[i] = std::max(lam[i].real(), 0.0);
      spectrum_clipped_ = min_eig < 0.0;
      if (spectrum_clipped_)
        std::cerr << "critlim: circulant spectrum had tiny negative "
                     "eigenvalues; clipped to 0\n";
      return;
    }
    throw std::runtime_error("PathFactorization: embedding not PSD");
  }

  Eigen::VectorXd sample_circulant(Philox& stream) const {
    const std::size_t n = spectrum_.size();
    std::vector<std::complex<double>> z(n);
    z[0] = std::sqrt(spectrum_[0]) * stream.normal();
    z[n / 2] = std::sqrt(spectrum_[n / 2]) * stream.normal();
    const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    for (std::size_t k = 1; k < n / 2; ++k) {
      const double a = stream.normal();
      const double b = stream.normal();
      z[k] = std::sqrt(spectrum_[k]) * std::complex<double>(a, b) * inv_sqrt2;
      z[n - k] = std::conj(z[k]);
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> e;
    fft.inv(e, z);  // scaled by 1/n
    const double root_n = std::sqrt(static_cast<double>(n));
    const std::size_t m = grid_.size();
    Eigen::VectorXd path(static_cast<Eigen::Index>(m));
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      acc += e[i].real() * root_n;
      path(static_cast<Eigen::Index>(i)) = acc;
    }
    return path;
  }

  KernelSpec spec_;
  TimeGrid grid_;
  FactorMethod method_;
  Eigen::MatrixXd chol_;
  std::vector<double> spectrum_;
  double jitter_used_ = 0.0;
  bool spectrum_clipped_ = false;
};

inline PathFactorization factorize(const KernelSpec& spec, const TimeGrid& grid,
                                   FactorMethod method) {
  return PathFactorization(spec, grid, method);
}

/// Jointly sampled values of the two independent d-dimensional processes on
/// one grid.  Rows are components, columns are grid nodes.
struct PathBatch {
  Eigen::MatrixXd x;   // d x m
  Eigen::MatrixXd xt;  // d x m, the independent copy
  std::vector<double> grid_nodes;
  std::uint64_t root_seed = 0;
  std::uint64_t replicate = 0;

  int d() const { return static_cast<int>(x.rows()); }
  Eigen::Index nodes() const { return x.cols(); }
};

inline PathBatch sample(const PathFactorization& fact, int d,
                        std::uint64_t replicate, std::uint64_t root_seed) {
  if (d < 1) throw std::invalid_argument("sample: d must be positive");
  const Eigen::Index m = static_cast<Eigen::Index>(fact.grid().size());
  PathBatch batch;
  batch.x.resize(d, m);
  batch.xt.resize(d, m);
  batch.grid_nodes = fact.grid().nodes;
  batch.root_seed = root_seed;
  batch.replicate = replicate;
  for (int comp = 0; comp < d; ++comp) {
    Philox sx = make_stream(root_seed, stream_tag::process_x,
                            static_cast<std::uint64_t>(comp), replicate);
    Philox st = make_stream(root_seed, stream_tag::process_xt,
                            static_cast<std::uint64_t>(comp), replicate);
    batch.x.row(comp) = fact.sample_component(sx).transpose();
    batch.xt.row(comp) = fact.sample_component(st).transpose();
  }
  return batch;
}

// --- binary dump (debug interface) --------------------------------------
// 32-byte little-endian header: magic "GLPB", u32 version, u32 d, u32 m,
// u64 root seed, u64 replicate; then x and xt as row-major f64.

inline void write_pathbatch(const std::string& path, const PathBatch& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pathbatch: cannot open " + path);
  const char magic[4] = {'G', 'L', 'P', 'B'};
  const std::uint32_t version = 1;
  const std::uint32_t d = static_cast<std::uint32_t>(b.x.rows());
  const std::uint32_t m = static_cast<std::uint32_t>(b.x.cols());
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(&m), 4);
  out.write(reinterpret_cast<const char*>(&b.root_seed), 8);
  out.write(reinterpret_cast<const char*>(&b.replicate), 8);
  auto write_rows = [&](const Eigen::MatrixXd& mat) {
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      for (Eigen::Index j = 0; j < mat.cols(); ++j) {
        const double v = mat(i, j);
        out.write(reinterpret_cast<const char*>(&v), 8);
      }
  };
  write_rows(b.x);
  write_rows(b.xt);
  if (!out) throw std::runtime_error("write_pathbatch: write failed");
}

inline PathBatch read_pathbatch(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pathbatch: cannot open " + path);
  char magic[4];
  std::uint32_t version, d, m;
  PathBatch b;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&d), 4);
  in.read(reinterpret_cast<char*>(&m), 4);
  in.read(reinterpret_cast<char*>(&b.root_seed), 8);
  in.read(reinterpret_cast<char*>(&b.replicate), 8);
  if (!in || std::memcmp(magic, "GLPB", 4) != 0 || version != 1)
    throw std::runtime_error("read_pathbatch: bad header");
  b.x.resize(d, m);
  b.xt.resize(d, m);
  auto read_rows = [&](Eigen::MatrixXd& mat) {
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      for (Eigen::Index j = 0; j < mat.cols(); ++j) {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        mat(i, j) = v;
      }
  };
  read_rows(b.x);
  read_rows(b.xt);
  if (!in) throw std::runtime_error("read_pathbatch: truncated file");
  return b;
}

}  // namespace critlim

#endif  // CRITLIM_SAMPLER_HPP
