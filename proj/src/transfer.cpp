#include "drot/transfer.hpp"

#include "drot/pnf_solver.hpp"
#include "drot/rng.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace drot::transfer {

namespace {

using Rgb = std::tuple<double, double, double>;

Rgb pixel_tuple(const Matrix& pixels, Index p) {
  return {pixels(p, 0), pixels(p, 1), pixels(p, 2)};
}

Index count_distinct(const Matrix& pixels) {
  std::set<Rgb> seen;
  for (Index p = 0; p < pixels.rows(); ++p) seen.insert(pixel_tuple(pixels, p));
  return static_cast<Index>(seen.size());
}

double sq_dist(const Matrix& pixels, Index p, const Matrix& centers, Index c) {
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = pixels(p, k) - centers(c, k);
    total += d * d;
  }
  return total;
}

// k-means++ seeding: distance-weighted draws via the cumulative distribution,
// falling back to the first unused distinct pixel when all remaining
// distances vanish.
Matrix seed_centers(const Matrix& pixels, Index k, Rng& rng) {
  const Index count = pixels.rows();
  Matrix centers(k, 3);
  centers.row(0) = pixels.row(rng.index(count));
  Vector dist2(count);
  for (Index p = 0; p < count; ++p) dist2[p] = sq_dist(pixels, p, centers, 0);

  for (Index c = 1; c < k; ++c) {
    const double total = dist2.sum();
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      Index chosen = count - 1;
      for (Index p = 0; p < count; ++p) {
        running += dist2[p];
        if (running > target) {
          chosen = p;
          break;
        }
      }
      centers.row(c) = pixels.row(chosen);
    } else {
      std::set<Rgb> used;
      for (Index done = 0; done < c; ++done) {
        used.insert({centers(done, 0), centers(done, 1), centers(done, 2)});
      }
      Index chosen = -1;
      for (Index p = 0; p < count; ++p) {
        if (!used.count(pixel_tuple(pixels, p))) {
          chosen = p;
          break;
        }
      }
      if (chosen < 0) throw InvalidProblem("k exceeds the number of distinct pixels");
      centers.row(c) = pixels.row(chosen);
    }
    for (Index p = 0; p < count; ++p) {
      dist2[p] = std::min(dist2[p], sq_dist(pixels, p, centers, c));
    }
  }
  return centers;
}

}  // namespace

Image read_image(const std::string& path) {
  const cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw InvalidProblem("cannot decode image: " + path);
  }
  Image image;
  image.width = bgr.cols;
  image.height = bgr.rows;
  image.pixels.resize(static_cast<Index>(bgr.rows) * bgr.cols, 3);
  Index p = 0;
  for (int y = 0; y < bgr.rows; ++y) {
    for (int x = 0; x < bgr.cols; ++x, ++p) {
      const cv::Vec3b px = bgr.at<cv::Vec3b>(y, x);
      image.pixels(p, 0) = px[2] / 255.0;
      image.pixels(p, 1) = px[1] / 255.0;
      image.pixels(p, 2) = px[0] / 255.0;
    }
  }
  return image;
}

void write_image(const std::string& path, const Image& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixel_count() != static_cast<Index>(image.width) * image.height) {
    throw InvalidProblem("image dimensions do not match the pixel buffer");
  }
  cv::Mat bgr(image.height, image.width, CV_8UC3);
  Index p = 0;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x, ++p) {
      const auto to_byte = [](double v) {
        return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      };
      bgr.at<cv::Vec3b>(y, x) =
          cv::Vec3b(to_byte(image.pixels(p, 2)), to_byte(image.pixels(p, 1)),
                    to_byte(image.pixels(p, 0)));
    }
  }
  if (!cv::imwrite(path, bgr)) {
    throw InvalidProblem("cannot encode image: " + path);
  }
}

QuantizedImage kmeans_quantize(const Image& image, Index k, std::uint64_t seed, int max_iters) {
  const Matrix& pixels = image.pixels;
  const Index count = pixels.rows();
  if (count < 1) throw InvalidProblem("empty image");
  if (k < 1) throw InvalidProblem("k must be at least 1");
  if (k > count_distinct(pixels)) {
    throw InvalidProblem("k exceeds the number of distinct pixels");
  }

  Rng rng(seed);
  Matrix centers = seed_centers(pixels, k, rng);
  std::vector<int> assignment(count, 0);
  std::vector<Index> counts(k, 0);

  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = iter == 0;
    for (Index p = 0; p < count; ++p) {
      int best = 0;
      double best_dist = sq_dist(pixels, p, centers, 0);
      for (Index c = 1; c < k; ++c) {
        const double d = sq_dist(pixels, p, centers, c);
        if (d < best_dist) {
          best_dist = d;
          best = static_cast<int>(c);
        }
      }
      if (assignment[p] != best) {
        assignment[p] = best;
        changed = true;
      }
    }
    if (!changed) break;

    centers.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Index p = 0; p < count; ++p) {
      centers.row(assignment[p]) += pixels.row(p);
      ++counts[assignment[p]];
    }
    for (Index c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) /= static_cast<double>(counts[c]);
        continue;
      }
      // Re-seed an emptied cluster at the pixel farthest from its center.
      Index farthest = 0;
      double worst = -1.0;
      for (Index p = 0; p < count; ++p) {
        const double d = sq_dist(pixels, p, centers, assignment[p]);
        if (d > worst) {
          worst = d;
          farthest = p;
        }
      }
      centers.row(c) = pixels.row(farthest);
      assignment[farthest] = static_cast<int>(c);
    }
  }

  std::fill(counts.begin(), counts.end(), 0);
  for (Index p = 0; p < count; ++p) ++counts[assignment[p]];

  Vector weights(k);
  for (Index c = 0; c < k; ++c) {
    weights[c] = static_cast<double>(counts[c]) / static_cast<double>(count);
  }
  // The largest cluster absorbs the rounding residual so the total is exact.
  const double residual = 1.0 - weights.sum();
  if (residual != 0.0) {
    Index largest = 0;
    weights.maxCoeff(&largest);
    weights[largest] += residual;
  }

  return QuantizedImage{std::move(centers), Measure(std::move(weights)), std::move(assignment),
                        image.width, image.height};
}

BarycentricResult barycentric_project(const TransportPlan& plan, const Matrix& sources,
                                      const Matrix& targets) {
  if (plan.cols() != targets.rows()) {
    throw InvalidProblem("plan columns must match the target point count");
  }
  if (plan.rows() != sources.rows()) {
    throw InvalidProblem("plan rows must match the source point count");
  }
  Matrix numerator = Matrix::Zero(plan.rows(), targets.cols());
  Vector mass = Vector::Zero(plan.rows());
  for (const TransportPlan::Entry& e : plan.entries()) {
    numerator.row(e.i) += e.value * targets.row(e.j);
    mass[e.i] += e.value;
  }
  BarycentricResult out;
  out.points.resize(plan.rows(), targets.cols());
  for (Index i = 0; i < plan.rows(); ++i) {
    if (mass[i] > 0.0) {
      out.points.row(i) = numerator.row(i) / mass[i];
    } else {
      out.points.row(i) = sources.row(i);
      out.zero_rows.push_back(i);
    }
  }
  return out;
}

TransferResult color_transfer(const Image& source, const Image& target, Index k,
                              SolverConfig config, std::uint64_t seed) {
  QuantizedImage src = kmeans_quantize(source, k, seed);
  QuantizedImage tgt = kmeans_quantize(target, k, seed + 1);

  const bool entropic =
      config.phi == Regularizer::entropy || config.varphi == Regularizer::entropy;
  if (entropic && config.cost_shift == 0.0) {
    config.cost_shift = 1e-3;
  }

  ProblemInstance problem =
      make_problem(src.weights, tgt.weights, sqeuclidean_cost(src.centers, tgt.centers));

  SolveResult solved;
  try {
    solved = solve(problem, config);
  } catch (const SolverError& err) {
    throw SolverError(std::string("color transfer solve stage: ") + err.what());
  }

  BarycentricResult projected = barycentric_project(solved.plan, src.centers, tgt.centers);
  projected.points = projected.points.cwiseMax(0.0).cwiseMin(1.0);

  Image output;
  output.width = source.width;
  output.height = source.height;
  output.pixels.resize(source.pixel_count(), 3);
  for (Index p = 0; p < source.pixel_count(); ++p) {
    output.pixels.row(p) = projected.points.row(src.assignment[p]);
  }
  DiagnosticsReport diagnostics = kkt_report(problem, config, solved);
  return TransferResult{std::move(output),        std::move(src),
                        std::move(tgt),           std::move(solved),
                        std::move(diagnostics),   std::move(projected.zero_rows)};
}

}  // namespace drot::transfer
