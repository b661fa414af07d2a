#include "connmaint/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace connmaint {

double sigma_from_range(double range, double delta) {
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw InvalidParameter("communication range must be positive, got " + std::to_string(range));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidParameter("weight threshold delta must lie in (0,1), got " +
                           std::to_string(delta));
  }
  return range / std::sqrt(-2.0 * std::log(delta));
}

RangeParams RangeParams::make(double range, double delta) {
  return RangeParams{range, delta, sigma_from_range(range, delta)};
}

double edge_weight(const Position& pi, const Position& pj, const RangeParams& params) {
  if (pi.size() != pj.size()) {
    throw InvalidParameter("edge_weight: position dimension mismatch (" +
                           std::to_string(pi.size()) + " vs " + std::to_string(pj.size()) + ")");
  }
  const double dist2 = (pi - pj).squaredNorm();
  if (dist2 > params.range * params.range) return 0.0;
  return std::exp(-dist2 / (2.0 * params.sigma * params.sigma));
}

std::vector<std::size_t> CommGraph::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j) {
    if (adjacent(i, j)) out.push_back(j);
  }
  return out;
}

CommGraph graph_from_weights(const Eigen::MatrixXd& weights) {
  CommGraph g;
  g.weights = weights;
  g.weights.diagonal().setZero();
  g.degrees = g.weights.rowwise().sum();
  g.laplacian = -g.weights;
  g.laplacian.diagonal() = g.degrees;
  return g;
}

CommGraph build_graph(std::span<const Position> positions, const RangeParams& params) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = edge_weight(positions[i], positions[j], params);
      w(i, j) = a;
      w(j, i) = a;
    }
  }
  return graph_from_weights(w);
}

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, double tolerance, int max_sweeps) {
  const Eigen::Index n = input.rows();
  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(1.0, a.norm());

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = 0; q < n; ++q)
        if (p != q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > tolerance * scale) {
    if (sweep >= max_sweeps) {
      throw NumericalError("jacobi_eigen: no convergence after " + std::to_string(sweep) +
                               " sweeps",
                           sweep);
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    ++sweep;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

namespace {

void normalize_sign(Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > 1e-12) {
      if (v(k) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

SpectralResult spectral_oracle(const CommGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  SpectralResult r;
  if (n == 0) return r;
  const SymmetricEigen eig = jacobi_eigen(graph.laplacian);
  r.all_eigenvalues = eig.values;
  if (n == 1) {
    r.lambda2 = 0.0;
    r.fiedler = Eigen::VectorXd::Zero(1);
    r.degenerate = true;
    return r;
  }
  // Tiny negative round-off on a PSD matrix.
  r.lambda2 = std::max(0.0, eig.values(1));
  r.fiedler = eig.vectors.col(1).normalized();
  normalize_sign(r.fiedler);
  r.degenerate = n > 2 && (eig.values(2) - eig.values(1)) < kDegenerateGap;
  return r;
}

GradientResult lambda2_gradient_exact(std::span<const Position> positions, const CommGraph& graph,
                                      const Eigen::VectorXd& fiedler, double sigma,
                                      bool degenerate) {
  const std::size_t n = positions.size();
  if (graph.size() != n || static_cast<std::size_t>(fiedler.size()) != n) {
    throw InvalidParameter("lambda2_gradient_exact: size mismatch");
  }
  GradientResult out;
  out.reliable = !degenerate;
  out.per_agent.reserve(n);
  const double inv_s2 = 1.0 / (sigma * sigma);
  for (std::size_t i = 0; i < n; ++i) {
    Vec g = Vec::Zero(positions[i].size());
    for (std::size_t j = 0; j < n; ++j) {
      if (!graph.adjacent(i, j)) continue;
      const double dv = fiedler(i) - fiedler(j);
      g -= graph.weights(i, j) * dv * dv * inv_s2 * (positions[i] - positions[j]);
    }
    out.per_agent.push_back(std::move(g));
  }
  return out;
}

}  // namespace connmaint
