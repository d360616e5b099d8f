#pragma once

#include "drot/core.hpp"
#include "drot/regularizers.hpp"
#include "drot/rng.hpp"
#include "drot/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

// Shared test oracles. Everything here is independent of the implementation
// paths it checks: theta via pure bisection through the public gradient
// calculus, exact OT via explicit vertex enumeration.
namespace testing_support {

inline double oracle_stepped(drot::Regularizer kind, double v, double gamma, double theta) {
  const double y = drot::grad_at(kind, v) + gamma * theta;
  if (kind == drot::Regularizer::exponential && !(y > 0.0)) {
    return -std::numeric_limits<double>::infinity();
  }
  return drot::grad_inverse_at(kind, y);
}

// Bisection root of f'(theta) + g'(theta) = C, where the stepped potentials
// go through grad / grad_inverse only.
inline double oracle_theta(drot::Regularizer phi, drot::Regularizer varphi, double f, double g,
                           double c, double gamma) {
  const auto residual = [&](double theta) {
    return oracle_stepped(phi, f, gamma, theta) + oracle_stepped(varphi, g, gamma, theta) - c;
  };
  const double at_zero = residual(0.0);
  if (at_zero == 0.0) return 0.0;
  double lo;
  double hi;
  if (at_zero > 0.0) {
    hi = 0.0;
    lo = -1.0;
    int guard = 0;
    while (!(residual(lo) < 0.0)) {
      lo *= 2.0;
      if (++guard > 300) throw std::runtime_error("oracle_theta: no lower bracket");
    }
  } else {
    lo = 0.0;
    hi = 1.0;
    int guard = 0;
    while (!(residual(hi) > 0.0)) {
      hi *= 2.0;
      if (++guard > 300) throw std::runtime_error("oracle_theta: no upper bracket");
    }
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double central_difference(drot::Regularizer kind, const drot::Vector& v, drot::Index i,
                                 double h) {
  drot::Vector hi = v;
  drot::Vector lo = v;
  hi[i] += h;
  lo[i] -= h;
  return (drot::value(kind, hi) - drot::value(kind, lo)) / (2.0 * h);
}

// Minimum transport cost by enumerating every spanning-tree basis of the
// transportation polytope (valid for desk-size balanced instances).
inline double brute_force_ot_cost(const drot::ProblemInstance& problem) {
  using drot::Index;
  const Index m = problem.a.size();
  const Index n = problem.b.size();
  const Index cells = m * n;
  const Index basis_size = m + n - 1;

  double best = std::numeric_limits<double>::infinity();

  std::vector<int> chosen(basis_size);
  std::iota(chosen.begin(), chosen.end(), 0);

  const auto evaluate = [&]() {
    // Leaf elimination on the candidate edge set; rejects cyclic or
    // disconnected sets and negative flows.
    std::vector<std::vector<int>> adjacency(m + n);
    for (int e = 0; e < basis_size; ++e) {
      const Index i = chosen[e] / n;
      const Index j = chosen[e] % n;
      adjacency[i].push_back(e);
      adjacency[m + j].push_back(e);
    }
    std::vector<double> residual(m + n);
    for (Index i = 0; i < m; ++i) residual[i] = problem.a[i];
    for (Index j = 0; j < n; ++j) residual[m + j] = problem.b[j];
    std::vector<int> degree(m + n);
    for (Index node = 0; node < m + n; ++node) {
      degree[node] = static_cast<int>(adjacency[node].size());
    }
    std::vector<char> edge_done(basis_size, 0);
    std::vector<char> node_done(m + n, 0);
    std::vector<Index> stack;
    for (Index node = 0; node < m + n; ++node) {
      if (degree[node] == 1) stack.push_back(node);
      if (degree[node] == 0) return;  // disconnected
    }
    double cost = 0.0;
    int processed = 0;
    while (!stack.empty()) {
      const Index node = stack.back();
      stack.pop_back();
      if (node_done[node] || degree[node] != 1) continue;
      int edge = -1;
      for (const int e : adjacency[node]) {
        if (!edge_done[e]) {
          edge = e;
          break;
        }
      }
      if (edge < 0) continue;
      const Index i = chosen[edge] / n;
      const Index j = chosen[edge] % n;
      const double flow = residual[node];
      if (flow < -1e-12) return;  // infeasible basis
      cost += std::max(flow, 0.0) * problem.cost(i, j);
      const Index other = (node == i) ? m + j : i;
      residual[other] -= flow;
      residual[node] = 0.0;
      edge_done[edge] = 1;
      node_done[node] = 1;
      --degree[node];
      --degree[other];
      ++processed;
      if (degree[other] == 1) stack.push_back(other);
    }
    if (processed != basis_size) return;  // had a cycle
    best = std::min(best, cost);
  };

  while (true) {
    evaluate();
    int slot = static_cast<int>(basis_size) - 1;
    while (slot >= 0 && chosen[slot] == cells - basis_size + slot) --slot;
    if (slot < 0) break;
    ++chosen[slot];
    for (int k = slot + 1; k < basis_size; ++k) chosen[k] = chosen[k - 1] + 1;
  }
  if (!std::isfinite(best)) throw std::runtime_error("brute_force_ot_cost: no feasible basis");
  return best;
}

inline drot::ProblemInstance random_balanced_instance(drot::Rng& rng, drot::Index m,
                                                      drot::Index n) {
  return drot::make_problem(drot::Measure(rng.simplex(m)), drot::Measure(rng.simplex(n)),
                            drot::CostMatrix(rng.uniform_matrix(m, n, 0.0, 1.0)));
}

// Blocky test image: a grid of palette patches with a little seeded noise, so
// coarse quantization stays faithful.
inline drot::transfer::Image make_patch_image(int width, int height,
                                              const std::vector<std::array<double, 3>>& palette,
                                              double noise, std::uint64_t seed) {
  drot::transfer::Image image;
  image.width = width;
  image.height = height;
  image.pixels.resize(static_cast<drot::Index>(width) * height, 3);
  drot::Rng rng(seed);
  const int patches = static_cast<int>(palette.size());
  drot::Index p = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x, ++p) {
      const int patch = (x * patches) / width;
      for (int ch = 0; ch < 3; ++ch) {
        const double v = palette[patch][ch] + noise * (rng.uniform() - 0.5);
        image.pixels(p, ch) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return image;
}

inline double mean_rgb_difference(const drot::transfer::Image& lhs,
                                  const drot::transfer::Image& rhs) {
  double total = 0.0;
  for (drot::Index p = 0; p < lhs.pixel_count(); ++p) {
    total += (lhs.pixels.row(p) - rhs.pixels.row(p)).cwiseAbs().sum() / 3.0;
  }
  return total / static_cast<double>(lhs.pixel_count());
}

}  // namespace testing_support
