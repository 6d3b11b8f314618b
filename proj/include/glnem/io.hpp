#pragma once

#include <map>
#include <string>
#include <vector>

#include "glnem/gof.hpp"
#include "glnem/network.hpp"
#include "glnem/postprocess.hpp"
#include "glnem/sampler.hpp"
#include "glnem/selection.hpp"
#include "glnem/simulate.hpp"

namespace glnem {

enum class NetworkFormat { EdgeCsv, DenseCsv };
NetworkFormat parse_network_format(const std::string& name);

struct LoadOptions {
  // Node count; 0 infers max id + 1 (edge-csv only).
  int nodes = 0;
  // Edge-csv dyads that are not listed are missing by default; with this
  // set they are observed zeros with zero covariates.
  bool unlisted_zero = false;
};

// edge-csv: rows `i,j,y,x1,...,xp` with 0-based ids, each unordered pair at
// most once; an optional header row is skipped. Listing any (i, i) row marks
// the diagonal observed.
// dense-csv: a manifest of `key=path` lines (`y`, `x1`..`xp`, optional
// `mask`, `diagonal_observed`), paths relative to the manifest; each file is
// an n x n comma-separated matrix.
NetworkData load_network(const std::string& path, NetworkFormat format, const LoadOptions& options = {});

// Writes the observed dyads (edge-csv) or every matrix plus a manifest
// (dense-csv, path names the manifest).
void save_network(const NetworkData& data, const std::string& path, NetworkFormat format);

// One row per draw: chain, beta.k, lambda.h, Z.h, U.i.h, phi, power, loglik,
// logpost, then sampler diagnostics.
void write_draws_csv(const DrawStore& draws, const std::string& path);
// Reads draws written by write_draws_csv; metadata other than the shapes is
// left at its defaults.
DrawStore read_draws_csv(const std::string& path);

// Per-draw sampler trace: iteration, chain, loglik, logpost, acceptance,
// step size, depth, divergence, active dimensions.
void write_trace_csv(const DrawStore& draws, const std::string& path);

void write_summary_json(const Summary& summary, const DrawStore& draws,
                        const std::map<std::string, std::string>& provenance, const std::string& path);

// Posterior pmf of the active dimension and per-dimension inclusion
// probabilities, one row each.
void write_dimension_csv(const Summary& summary, const std::string& path);
void write_inclusion_csv(const Summary& summary, const std::string& path);

void write_criteria_csv(const CriterionReport& report, const std::string& path);

void write_truth_json(const SimTruth& truth, const std::string& path);

void write_gof_csv(const GofReport& report, const std::string& statistic, const std::string& path);
void write_degree_csv(const DegreePredictive& degrees, const std::string& path);

void write_metrics_csv(const std::vector<RecoveryMetrics>& rows, const std::string& path);

std::string version_string();

}  // namespace glnem
