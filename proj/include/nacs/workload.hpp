#pragma once

// Convolution workload descriptors: single layers, searchable block choices,
// and whole networks expanded from block choices.
//
// A layer is described by the six loop dimensions
//   X,Y : output width / height
//   R,S : kernel height / width
//   C,K : input / output channels
// plus stride and channel grouping. Output spatial sizes are stored, input
// sizes follow from stride and kernel. groups == c == k marks depthwise.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace nacs {

struct ConvLayerDesc {
  std::int64_t x = 1, y = 1;  // output width, height
  std::int64_t r = 1, s = 1;  // kernel height, width
  std::int64_t c = 1, k = 1;  // input, output channels
  std::int64_t stride = 1;
  std::int64_t groups = 1;    // divides both c and k; groups == c == k -> depthwise

  bool depthwise() const { return groups > 1 && groups == c && c == k; }

  void check() const {
    if (x < 1 || y < 1 || r < 1 || s < 1 || c < 1 || k < 1 || stride < 1 || groups < 1)
      throw std::invalid_argument("layer: all dimensions must be >= 1");
    if (c % groups != 0 || k % groups != 0)
      throw std::invalid_argument("layer: groups must divide both c and k");
  }
};

// One candidate operator for a block position. Either an identity skip or an
// inverted-residual triple (1x1 expand, depthwise kxk, 1x1 project).
struct BlockChoice {
  bool is_skip = false;
  std::int64_t kernel = 3;     // odd, >= 1; ignored when is_skip
  std::int64_t expansion = 1;  // >= 1; ignored when is_skip
  std::int64_t group = 1;      // grouping of the two 1x1 convs; ignored when is_skip

  void check() const {
    if (is_skip) return;
    if (kernel < 1 || kernel % 2 == 0) throw std::invalid_argument("block: kernel must be odd and >= 1");
    if (expansion < 1) throw std::invalid_argument("block: expansion must be >= 1");
    if (group < 1) throw std::invalid_argument("block: group must be >= 1");
  }
};

struct NetworkDesc {
  std::vector<ConvLayerDesc> layers;
};

// Footprints in words for one layer's three tensors.
struct TensorFootprints {
  std::int64_t weights = 0;
  std::int64_t ifmap = 0;
  std::int64_t ofmap = 0;
};

inline std::int64_t macs(const ConvLayerDesc& l) {
  l.check();
  // grouped conv: each output channel sees c/groups input channels
  return l.x * l.y * l.r * l.s * (l.c / l.groups) * l.k;
}

inline TensorFootprints tensor_footprints(const ConvLayerDesc& l) {
  l.check();
  TensorFootprints f;
  f.weights = l.r * l.s * (l.c / l.groups) * l.k;
  // input rows pair with kernel height, columns with kernel width
  f.ifmap = l.c * ((l.y - 1) * l.stride + l.r) * ((l.x - 1) * l.stride + l.s);
  f.ofmap = l.k * l.x * l.y;
  return f;
}

// Expands a block choice at a given position into concrete conv layers.
// spatial is the block's input width/height; output spatial = spatial/stride.
// Skip expands to nothing and is only legal when shapes pass through.
inline std::vector<ConvLayerDesc> expand_block(const BlockChoice& b, std::int64_t in_ch,
                                               std::int64_t out_ch, std::int64_t spatial,
                                               std::int64_t stride) {
  b.check();
  if (in_ch < 1 || out_ch < 1 || spatial < 1 || stride < 1)
    throw std::invalid_argument("expand_block: bad position shape");
  if (spatial % stride != 0)
    throw std::invalid_argument("expand_block: stride must divide spatial");
  if (b.is_skip) {
    if (in_ch != out_ch || stride != 1)
      throw std::invalid_argument("expand_block: skip needs in_ch == out_ch and stride 1");
    return {};
  }
  const std::int64_t mid = in_ch * b.expansion;
  if (mid % b.group != 0 || in_ch % b.group != 0 || out_ch % b.group != 0)
    throw std::invalid_argument("expand_block: group must divide channel counts");
  const std::int64_t out_sp = spatial / stride;

  ConvLayerDesc expand;   // 1x1, stride 1, at input resolution
  expand.x = expand.y = spatial;
  expand.c = in_ch;
  expand.k = mid;
  expand.groups = b.group;

  ConvLayerDesc dw;       // kxk depthwise, carries the block stride
  dw.x = dw.y = out_sp;
  dw.r = dw.s = b.kernel;
  dw.c = dw.k = mid;
  dw.stride = stride;
  dw.groups = mid;

  ConvLayerDesc project;  // 1x1, stride 1, at output resolution
  project.x = project.y = out_sp;
  project.c = mid;
  project.k = out_ch;
  project.groups = b.group;

  return {expand, dw, project};
}

// A block position in the searchable network space.
struct BlockSite {
  std::int64_t in_channels = 1;
  std::int64_t out_channels = 1;
  std::int64_t spatial = 1;  // input width == height
  std::int64_t stride = 1;
  std::vector<BlockChoice> candidates;
};

struct NetworkSpace {
  std::vector<BlockSite> blocks;

  void check() const {
    if (blocks.empty()) throw std::invalid_argument("network space: no blocks");
    for (const auto& site : blocks) {
      if (site.candidates.empty()) throw std::invalid_argument("network space: block with no candidates");
      for (const auto& cand : site.candidates) {
        // throws if a candidate cannot expand at this site
        expand_block(cand, site.in_channels, site.out_channels, site.spatial, site.stride);
      }
    }
  }
};

// Concrete network for one candidate choice per block.
inline NetworkDesc assemble_network(const NetworkSpace& space, const std::vector<int>& choice) {
  if (choice.size() != space.blocks.size())
    throw std::invalid_argument("assemble_network: one choice per block required");
  NetworkDesc net;
  for (std::size_t i = 0; i < choice.size(); ++i) {
    const auto& site = space.blocks[i];
    if (choice[i] < 0 || choice[i] >= static_cast<int>(site.candidates.size()))
      throw std::invalid_argument("assemble_network: choice out of range");
    auto layers = expand_block(site.candidates[choice[i]], site.in_channels, site.out_channels,
                               site.spatial, site.stride);
    net.layers.insert(net.layers.end(), layers.begin(), layers.end());
  }
  return net;
}

inline std::int64_t total_macs(const NetworkDesc& net) {
  std::int64_t sum = 0;
  for (const auto& l : net.layers) sum += macs(l);
  return sum;
}

}  // namespace nacs
