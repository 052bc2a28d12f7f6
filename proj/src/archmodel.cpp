#include "dse/archmodel.hpp"

#include "dse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dse {

namespace {

// MobileNetV2 inverted-residual stages: expansion t, output channels c,
// repeats n, first stride s.
struct StageRow
{
  int t, c, n, s;
};

constexpr StageRow kBackboneStages[] = {
    {1, 16, 1, 1}, {6, 24, 2, 2}, {6, 32, 3, 2}, {6, 64, 4, 2},
    {6, 96, 3, 1}, {6, 160, 3, 2}, {6, 320, 1, 1},
};

constexpr int kStemChannels  = 32;
constexpr int kFinalChannels = 1280;

// Extra SSD feature layers: 1x1 reduction to `mid`, then stride-2 3x3 to `out`.
struct ExtraRow
{
  int mid, out;
};

constexpr ExtraRow kExtraLayers[] = {{256, 512}, {128, 256}, {128, 256}, {64, 128}};

// Last block of the 96-channel stage (output stride 16).
constexpr int kStride16Source = 13;

std::int64_t bn_params(int channels)
{
  return 2 * static_cast<std::int64_t>(channels);
}

}  // namespace

void validate(const Theta &theta)
{
  if (!std::isfinite(theta.alpha) || theta.alpha <= 0.0)
    throw InvalidArgument("alpha must be finite and > 0");
  if (theta.resolution < 1)
    throw InvalidArgument("resolution must be >= 1");
}

std::string_view to_string(LayerKind kind)
{
  switch (kind)
  {
  case LayerKind::standard_conv:
    return "standard_conv";
  case LayerKind::depthwise_separable_conv:
    return "depthwise_separable_conv";
  case LayerKind::inverted_residual:
    return "inverted_residual";
  }
  return "?";
}

std::string_view to_string(HeadStyle style)
{
  return style == HeadStyle::ssd ? "ssd" : "ssdlite";
}

HeadStyle parse_head_style(std::string_view text)
{
  if (text == "ssd")
    return HeadStyle::ssd;
  if (text == "ssdlite")
    return HeadStyle::ssdlite;
  throw InvalidArgument("unknown head style '" + std::string(text) + "'");
}

int scale_channels(int base_channels, double alpha, int divisor)
{
  const double v       = base_channels * alpha;
  const auto   rounded = static_cast<long long>(v + divisor / 2.0) / divisor * divisor;
  long long    c       = std::max<long long>(divisor, rounded);
  if (static_cast<double>(c) < 0.9 * v)
    c += divisor;
  return static_cast<int>(c);
}

ArchitectureGraph build_graph(const Theta &theta, int num_classes, HeadStyle head_style)
{
  ModelConfig config;
  config.num_classes = num_classes;
  config.head_style  = head_style;
  return build_graph(theta, config);
}

ArchitectureGraph build_graph(const Theta &theta, const ModelConfig &config)
{
  validate(theta);
  if (theta.resolution < Theta::kMinResolution)
    throw ResolutionTooSmall(theta.resolution);
  if (config.num_classes < 1)
    throw InvalidArgument("num_classes must be >= 1");
  if (config.anchors_per_location.size() != 2 + std::size(kExtraLayers))
    throw InvalidArgument("anchors_per_location must name one count per feature source (" +
                          std::to_string(2 + std::size(kExtraLayers)) + ")");
  for (int a : config.anchors_per_location)
    if (a < 1)
      throw InvalidArgument("anchors_per_location entries must be >= 1");

  const int   divisor = config.divisor;
  const auto  scale   = [&](int c) { return scale_channels(c, theta.alpha, divisor); };
  const bool  lite    = config.head_style == HeadStyle::ssdlite;

  ArchitectureGraph g;
  g.theta       = theta;
  g.num_classes = config.num_classes;

  int channels = scale(kStemChannels);
  g.layers.push_back({LayerKind::standard_conv, 3, 3, channels, 2, 1, true, false});

  for (const auto &row : kBackboneStages)
  {
    const int out = scale(row.c);
    for (int i = 0; i < row.n; ++i)
    {
      g.layers.push_back(
          {LayerKind::inverted_residual, 3, channels, out, i == 0 ? row.s : 1, row.t, true, false});
      channels = out;
    }
  }

  const int final_channels = theta.alpha > 1.0 ? scale(kFinalChannels) : kFinalChannels;
  g.layers.push_back({LayerKind::standard_conv, 1, channels, final_channels, 1, 1, true, false});
  channels = final_channels;

  std::vector<int> source_layers{kStride16Source, static_cast<int>(g.layers.size()) - 1};
  for (const auto &row : kExtraLayers)
  {
    const int mid = scale(row.mid);
    const int out = scale(row.out);
    g.layers.push_back({LayerKind::standard_conv, 1, channels, mid, 1, 1, true, false});
    g.layers.push_back({lite ? LayerKind::depthwise_separable_conv : LayerKind::standard_conv, 3,
                        mid, out, 2, 1, true, false});
    source_layers.push_back(static_cast<int>(g.layers.size()) - 1);
    channels = out;
  }

  const auto sides = feature_sides(g);

  g.head.head_style           = config.head_style;
  g.head.anchors_per_location = config.anchors_per_location;
  for (std::size_t s = 0; s < source_layers.size(); ++s)
  {
    const int idx = source_layers[s];
    const int side = sides[static_cast<std::size_t>(idx) + 1];
    if (side < 1)
      throw ResolutionTooSmall(theta.resolution);
    g.head.feature_sources.push_back({idx, side});

    const int in      = g.layers[static_cast<std::size_t>(idx)].out_channels;
    const int anchors = config.anchors_per_location[s];
    const int src     = static_cast<int>(s);
    g.head.predictors.push_back({config.head_style, src, 3, in, anchors * 4});
    g.head.predictors.push_back({config.head_style, src, 3, in, anchors * (config.num_classes + 1)});
  }
  return g;
}

std::int64_t count_params(const LayerSpec &l)
{
  const std::int64_t k2  = static_cast<std::int64_t>(l.kernel) * l.kernel;
  const std::int64_t cin = l.in_channels;
  const std::int64_t cout = l.out_channels;
  const auto         bn  = [&](int c) { return l.has_batchnorm ? bn_params(c) : 0; };
  const auto         bias = [&](int c) { return l.has_bias ? static_cast<std::int64_t>(c) : 0; };

  switch (l.kind)
  {
  case LayerKind::standard_conv:
    return k2 * cin * cout + bn(l.out_channels) + bias(l.out_channels);
  case LayerKind::depthwise_separable_conv:
    return k2 * cin + bn(l.in_channels) + cin * cout + bn(l.out_channels) + bias(l.out_channels);
  case LayerKind::inverted_residual: {
    // expansion 1 has no expand conv (MobileNetV2 reference)
    const std::int64_t hidden = cin * l.expansion;
    std::int64_t       total  = 0;
    if (l.expansion != 1)
      total += cin * hidden + bn_params(static_cast<int>(hidden));
    total += k2 * hidden + bn_params(static_cast<int>(hidden));
    total += hidden * cout + bn_params(l.out_channels);
    return total;
  }
  }
  return 0;
}

std::int64_t count_params(const PredictorSpec &p)
{
  const std::int64_t k2   = static_cast<std::int64_t>(p.kernel) * p.kernel;
  const std::int64_t cin  = p.in_channels;
  const std::int64_t cout = p.out_channels;
  if (p.style == HeadStyle::ssdlite)
    return k2 * cin + bn_params(p.in_channels) + cin * cout + cout;
  return k2 * cin * cout + cout;
}

std::int64_t count_params(const ArchitectureGraph &graph)
{
  std::int64_t total = 0;
  for (const auto &l : graph.layers)
    total += count_params(l);
  for (const auto &p : graph.head.predictors)
    total += count_params(p);
  return total;
}

std::vector<int> feature_sides(const ArchitectureGraph &graph)
{
  std::vector<int> sides;
  sides.reserve(graph.layers.size() + 1);
  int side = graph.theta.resolution;
  sides.push_back(side);
  for (const auto &l : graph.layers)
  {
    side = output_side(side, l.stride);
    sides.push_back(side);
  }
  return sides;
}

std::int64_t count_macs(const LayerSpec &l, int input_side)
{
  const std::int64_t in_area  = static_cast<std::int64_t>(input_side) * input_side;
  const int          out_side = output_side(input_side, l.stride);
  const std::int64_t out_area = static_cast<std::int64_t>(out_side) * out_side;
  const std::int64_t k2       = static_cast<std::int64_t>(l.kernel) * l.kernel;
  const std::int64_t cin      = l.in_channels;
  const std::int64_t cout     = l.out_channels;

  switch (l.kind)
  {
  case LayerKind::standard_conv:
    return k2 * cin * cout * out_area;
  case LayerKind::depthwise_separable_conv:
    return (k2 * cin + cin * cout) * out_area;
  case LayerKind::inverted_residual: {
    const std::int64_t hidden = cin * l.expansion;
    std::int64_t       total  = 0;
    if (l.expansion != 1)
      total += cin * hidden * in_area;
    total += (k2 * hidden + hidden * cout) * out_area;
    return total;
  }
  }
  return 0;
}

std::int64_t count_macs(const ArchitectureGraph &graph)
{
  std::int64_t total = 0;
  int          side  = graph.theta.resolution;
  for (const auto &l : graph.layers)
  {
    total += count_macs(l, side);
    side = output_side(side, l.stride);
  }
  for (const auto &p : graph.head.predictors)
  {
    const auto         &src  = graph.head.feature_sources[static_cast<std::size_t>(p.source)];
    const std::int64_t  area = static_cast<std::int64_t>(src.side) * src.side;
    const std::int64_t  k2   = static_cast<std::int64_t>(p.kernel) * p.kernel;
    if (p.style == HeadStyle::ssdlite)
      total += (k2 * p.in_channels + static_cast<std::int64_t>(p.in_channels) * p.out_channels) * area;
    else
      total += k2 * p.in_channels * p.out_channels * area;
  }
  return total;
}

bool channel_consistent(const ArchitectureGraph &graph)
{
  for (std::size_t i = 1; i < graph.layers.size(); ++i)
    if (graph.layers[i - 1].out_channels != graph.layers[i].in_channels)
      return false;
  return true;
}

}  // namespace dse
