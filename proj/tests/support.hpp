#pragma once

// Helpers shared by the test executables. Reference computations here are
// written from scratch so they do not share code paths with the library.

#include "connmaint/disturbance.hpp"
#include "connmaint/graph.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using connmaint::Position;
using connmaint::PositionList;

inline PositionList random_layout(std::mt19937_64& rng, std::size_t n, double box,
                                  std::size_t dim = 2) {
  std::uniform_real_distribution<double> u(-0.5 * box, 0.5 * box);
  PositionList p;
  for (std::size_t i = 0; i < n; ++i) {
    Position x(static_cast<Eigen::Index>(dim));
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = u(rng);
    p.push_back(x);
  }
  return p;
}

// Connected layout whose lambda2 is simple and every pair sits away from the
// range boundary, so finite differences stay on one smooth branch.
inline PositionList smooth_connected_layout(std::mt19937_64& rng, std::size_t n, double box,
                                            const connmaint::RangeParams& range) {
  for (;;) {
    PositionList p = random_layout(rng, n, box);
    bool near_edge = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs((p[i] - p[j]).norm() - range.range) < 1e-3) near_edge = true;
    if (near_edge) continue;
    const auto s = connmaint::spectral_oracle(connmaint::build_graph(p, range));
    if (s.lambda2 > 1e-3 && s.all_eigenvalues(2) - s.all_eigenvalues(1) > 1e-2) return p;
  }
}

// Weighted Laplacian assembled directly from the weight formula.
inline Eigen::MatrixXd reference_laplacian(const PositionList& p, double range, double sigma) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = (p[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(j)]).norm();
      const double a = d <= range ? std::exp(-d * d / (2.0 * sigma * sigma)) : 0.0;
      l(i, j) = -a;
      l(i, i) += a;
    }
  }
  return l;
}

inline Eigen::VectorXd reference_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("connmaint_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
