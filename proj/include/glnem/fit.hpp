#pragma once

#include "glnem/model.hpp"
#include "glnem/network.hpp"
#include "glnem/postprocess.hpp"
#include "glnem/sampler.hpp"
#include "glnem/ssibp_prior.hpp"

namespace glnem {

struct FitResult {
  DrawStore draws;       // raw sampler output
  AlignedDraws aligned;  // relabeled to the MAP reference
  Summary summary;
};

// Runs every chain, aligns the pooled draws and summarizes them.
FitResult fit_model(const NetworkData& data, const ModelSpec& spec, const HyperParams& hyper,
                    const SamplerConfig& config);

}  // namespace glnem
