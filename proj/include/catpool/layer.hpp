#pragma once

#include "catpool/errors.hpp"

namespace catpool {

// Coverage of the loss slice between an attachment point and a limit.
struct LayerSpec {
  double attachment = 0.0;
  double limit = 0.0;

  double width() const noexcept { return limit - attachment; }
};

inline LayerSpec make_layer(double attachment, double limit) {
  if (!(attachment >= 0.0) || !(attachment <= limit))
    throw DomainError("layer requires 0 <= attachment <= limit");
  return {attachment, limit};
}

// Loss ceded to the pool by a participant with ground-up loss x:
//   0 below the attachment, x - d inside the layer, l - d above the limit.
inline double layer_loss(double x, const LayerSpec& layer) noexcept {
  if (x < layer.attachment) return 0.0;
  if (x < layer.limit) return x - layer.attachment;
  return layer.limit - layer.attachment;
}

}  // namespace catpool
