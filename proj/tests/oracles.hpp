#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code paths it checks.

#include "dse/search.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace dse::oracle {

using BigFloat = boost::multiprecision::cpp_dec_float_50;

/// 20 log10(a^k / (p^b r^g)) evaluated as a ratio at 50 significant digits.
inline double netscore(double a, double p, double r, double kappa = 1.0, double beta = 0.45, double gamma = 0.2)
{
  using boost::multiprecision::log10;
  using boost::multiprecision::pow;
  const BigFloat ratio = pow(BigFloat(a), BigFloat(kappa)) / (pow(BigFloat(p), BigFloat(beta)) * pow(BigFloat(r), BigFloat(gamma)));
  return static_cast<double>(BigFloat(20) * log10(ratio));
}

// ---------------------------------------------------------------------------
// Spreadsheet-style parameter count. One row per layer with channels typed
// in by hand from the MobileNetV2 table (already rounded for the width
// multiplier), plus the SSDLite extra layers and predictors.

struct SheetRow
{
  const char  *name;
  std::int64_t weights;
  std::int64_t bn_channels;  // x2 trainable (gamma, beta)
  std::int64_t bias;
};

inline std::int64_t sheet_total(const std::vector<SheetRow> &rows)
{
  std::int64_t total = 0;
  for (const auto &r : rows)
    total += r.weights + 2 * r.bn_channels + r.bias;
  return total;
}

/// Channel plan of one width multiplier: stem, seven stage outputs, final conv,
/// extra-layer (mid, out) pairs.
struct ChannelPlan
{
  std::int64_t stem;
  std::int64_t stage[7];
  std::int64_t final_conv;
  std::int64_t extra_mid[4];
  std::int64_t extra_out[4];
};

inline constexpr ChannelPlan kPlanAlpha10{32, {16, 24, 32, 64, 96, 160, 320}, 1280, {256, 128, 128, 64}, {512, 256, 256, 128}};
inline constexpr ChannelPlan kPlanAlpha13{40, {24, 32, 40, 80, 128, 208, 416}, 1664, {336, 168, 168, 80}, {664, 336, 336, 168}};

inline std::vector<SheetRow> backbone_sheet(const ChannelPlan &c)
{
  constexpr int t[7] = {1, 6, 6, 6, 6, 6, 6};
  constexpr int n[7] = {1, 2, 3, 4, 3, 3, 1};

  std::vector<SheetRow> rows;
  rows.push_back({"stem 3x3", 9 * 3 * c.stem, c.stem, 0});
  std::int64_t in = c.stem;
  for (int s = 0; s < 7; ++s)
    for (int i = 0; i < n[s]; ++i)
    {
      const std::int64_t hidden = in * t[s];
      if (t[s] != 1)
        rows.push_back({"expand 1x1", in * hidden, hidden, 0});
      rows.push_back({"depthwise 3x3", 9 * hidden, hidden, 0});
      rows.push_back({"project 1x1", hidden * c.stage[s], c.stage[s], 0});
      in = c.stage[s];
    }
  rows.push_back({"final 1x1", in * c.final_conv, c.final_conv, 0});
  return rows;
}

inline std::vector<SheetRow> detection_sheet(const ChannelPlan &c, std::int64_t num_classes)
{
  auto               rows = backbone_sheet(c);
  std::int64_t       in   = c.final_conv;
  for (int e = 0; e < 4; ++e)
  {
    rows.push_back({"extra 1x1", in * c.extra_mid[e], c.extra_mid[e], 0});
    rows.push_back({"extra dw 3x3 s2", 9 * c.extra_mid[e], c.extra_mid[e], 0});
    rows.push_back({"extra pw 1x1", c.extra_mid[e] * c.extra_out[e], c.extra_out[e], 0});
    in = c.extra_out[e];
  }
  const std::int64_t sources[6] = {c.stage[4], c.final_conv, c.extra_out[0], c.extra_out[1], c.extra_out[2], c.extra_out[3]};
  const std::int64_t anchors[6] = {3, 6, 6, 6, 6, 6};
  for (int s = 0; s < 6; ++s)
    for (std::int64_t outputs : {anchors[s] * 4, anchors[s] * (num_classes + 1)})
    {
      rows.push_back({"predictor dw 3x3", 9 * sources[s], sources[s], 0});
      rows.push_back({"predictor 1x1", sources[s] * outputs, 0, outputs});
    }
  return rows;
}

// Frozen sheet totals (21 classes). Backbone totals match the published
// MobileNetV2 feature-extractor size (3,504,872 total minus 1,281,000 for
// the ImageNet classifier at width 1.0).
inline constexpr std::int64_t kBackboneParamsAlpha10 = 2'223'872;
inline constexpr std::int64_t kBackboneParamsAlpha13 = 3'721'792;
inline constexpr std::int64_t kDetectionParamsAlpha10 = 3'324'186;
inline constexpr std::int64_t kDetectionParamsAlpha13 = 5'415'562;

// ---------------------------------------------------------------------------

/// Exhaustive argmax by pairwise domination: the winner is the record no
/// other record beats under (score desc, params asc, runtime asc, alpha asc,
/// resolution asc). Written as an explicit lexicographic tuple compare.
inline std::size_t linear_scan_best(std::span<const ScoredRecord> records)
{
  const auto key = [](const ScoredRecord &r) {
    return std::tuple(-r.score, r.record.params_m, r.record.runtime_s, r.record.theta.alpha, r.record.theta.resolution);
  };
  std::size_t best = 0;
  for (std::size_t i = 0; i < records.size(); ++i)
  {
    bool dominated = false;
    for (std::size_t j = 0; j < records.size() && !dominated; ++j)
      dominated = key(records[j]) < key(records[i]);
    if (!dominated)
    {
      best = i;
      break;
    }
  }
  return best;
}

}  // namespace dse::oracle
