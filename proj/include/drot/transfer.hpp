#pragma once

#include "drot/core.hpp"
#include "drot/diagnostics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace drot::transfer {

/// RGB image, channels normalized to [0, 1], pixels row-major.
struct Image {
  int width = 0;
  int height = 0;
  Matrix pixels;  // (width * height) x 3

  Index pixel_count() const { return pixels.rows(); }
};

/// Decodes an 8-bit RGB PNG or JPEG.
Image read_image(const std::string& path);

/// Encodes 8-bit RGB by file extension (.png / .jpg / .jpeg).
void write_image(const std::string& path, const Image& image);

struct QuantizedImage {
  Matrix centers;               // k x 3, within [0, 1]^3
  Measure weights;              // cluster fractions, sum exactly 1
  std::vector<int> assignment;  // per-pixel center index
  int width = 0;
  int height = 0;
};

/// Lloyd's algorithm with seeded k-means++ initialization. Deterministic
/// given the seed; converged when assignments stop changing or max_iters is
/// reached. Every cluster keeps at least one pixel.
QuantizedImage kmeans_quantize(const Image& image, Index k, std::uint64_t seed,
                               int max_iters = 100);

struct BarycentricResult {
  Matrix points;
  std::vector<Index> zero_rows;  // rows without plan mass, kept at their source value
};

/// Maps row i to the plan-weighted average of the targets; rows that carry no
/// mass keep their source value and are flagged.
BarycentricResult barycentric_project(const TransportPlan& plan, const Matrix& sources,
                                      const Matrix& targets);

struct TransferResult {
  Image output;
  QuantizedImage source_clusters;
  QuantizedImage target_clusters;
  SolveResult solve;
  DiagnosticsReport diagnostics;
  std::vector<Index> zero_rows;
};

/// Quantize both images, transport source clusters onto target clusters
/// (squared Euclidean cost in RGB), barycentric-project the source centers
/// and recolor each pixel by its cluster's projected color, clamped to
/// [0, 1]^3. Fully destroyed clusters keep their source color so the output
/// stays total; the destruction remains visible in the diagnostics.
TransferResult color_transfer(const Image& source, const Image& target, Index k,
                              SolverConfig config, std::uint64_t seed);

}  // namespace drot::transfer
