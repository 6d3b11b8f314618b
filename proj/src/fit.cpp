#include "glnem/fit.hpp"

namespace glnem {

FitResult fit_model(const NetworkData& data, const ModelSpec& spec, const HyperParams& hyper,
                    const SamplerConfig& config) {
  const GlnemModel model(data, spec, hyper);
  FitResult out;
  out.draws = run_chains(model, config);
  out.aligned = align_draws(out.draws);
  out.summary = summarize(out.aligned);
  return out;
}

}  // namespace glnem
