#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace dse {

/// A candidate design point: width multiplier and absolute input side length.
/// The resolution multiplier is derived, never stored.
struct Theta
{
  double alpha      = 1.0;
  int    resolution = 224;

  static constexpr int kReferenceResolution = 224;
  static constexpr int kMinResolution       = 32;

  double rho() const { return static_cast<double>(resolution) / kReferenceResolution; }

  friend bool operator==(const Theta &, const Theta &) = default;
  friend auto operator<=>(const Theta &, const Theta &) = default;
};

/// Throws InvalidArgument unless alpha is finite and > 0 and resolution >= 1.
void validate(const Theta &theta);

enum class LayerKind
{
  standard_conv,
  depthwise_separable_conv,
  inverted_residual,
};

enum class HeadStyle
{
  ssd,
  ssdlite,
};

std::string_view to_string(LayerKind kind);
std::string_view to_string(HeadStyle style);
HeadStyle        parse_head_style(std::string_view text);

struct LayerSpec
{
  LayerKind kind          = LayerKind::standard_conv;
  int       kernel        = 1;
  int       in_channels   = 1;
  int       out_channels  = 1;
  int       stride        = 1;
  int       expansion     = 1;  // inverted_residual only
  bool      has_batchnorm = true;
  bool      has_bias      = false;

  friend bool operator==(const LayerSpec &, const LayerSpec &) = default;
};

/// One box or class predictor attached to a feature source.
///  ssdlite: kxk depthwise (+BN) followed by a biased 1x1 projection.
///  ssd:     a single biased kxk convolution.
struct PredictorSpec
{
  HeadStyle style        = HeadStyle::ssdlite;
  int       source       = 0;  // index into SSDHeadSpec::feature_sources
  int       kernel       = 3;
  int       in_channels  = 1;
  int       out_channels = 1;

  friend bool operator==(const PredictorSpec &, const PredictorSpec &) = default;
};

struct FeatureSource
{
  int layer_index = 0;
  int side        = 1;

  friend bool operator==(const FeatureSource &, const FeatureSource &) = default;
};

struct SSDHeadSpec
{
  std::vector<FeatureSource> feature_sources;
  std::vector<int>           anchors_per_location;
  HeadStyle                  head_style = HeadStyle::ssdlite;
  std::vector<PredictorSpec> predictors;

  friend bool operator==(const SSDHeadSpec &, const SSDHeadSpec &) = default;
};

struct ArchitectureGraph
{
  std::vector<LayerSpec> layers;
  SSDHeadSpec            head;
  Theta                  theta;
  int                    num_classes = 0;
};

/// Knobs of the detection network family that are not part of Theta.
struct ModelConfig
{
  int              num_classes = 21;  // foreground classes; head adds background
  HeadStyle        head_style  = HeadStyle::ssdlite;
  std::vector<int> anchors_per_location{3, 6, 6, 6, 6, 6};
  int              divisor = 8;
};

/// Width-multiplier channel rounding ("make divisible"): nearest multiple of
/// divisor, at least divisor, bumped up one step if rounding lost > 10%.
int scale_channels(int base_channels, double alpha, int divisor = 8);

/// MobileNetV2 backbone plus SSD/SSDLite extra feature layers and predictors.
ArchitectureGraph build_graph(const Theta &theta, const ModelConfig &config = {});
ArchitectureGraph build_graph(const Theta &theta, int num_classes, HeadStyle head_style);

/// Trainable parameters only; batch-norm running statistics are excluded.
std::int64_t count_params(const ArchitectureGraph &graph);
std::int64_t count_params(const LayerSpec &layer);
std::int64_t count_params(const PredictorSpec &predictor);

/// Multiply-accumulates for one forward pass at graph.theta.resolution.
std::int64_t count_macs(const ArchitectureGraph &graph);
std::int64_t count_macs(const LayerSpec &layer, int input_side);

/// Spatial side after a same-padded convolution with the given stride.
constexpr int output_side(int input_side, int stride)
{
  return (input_side + stride - 1) / stride;
}

/// Side length at the input of every layer (size layers.size() + 1, last entry
/// is the output of the final layer).
std::vector<int> feature_sides(const ArchitectureGraph &graph);

/// True when every adjacent layer pair agrees on channel count.
bool channel_consistent(const ArchitectureGraph &graph);

inline double params_millions(std::int64_t count)
{
  return static_cast<double>(count) / 1e6;
}

}  // namespace dse
