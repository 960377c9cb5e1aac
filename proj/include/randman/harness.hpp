#pragma once

#include "randman/atlas.hpp"
#include "randman/gp_model.hpp"
#include "randman/lkc_vector.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace randman {

enum class ExperimentKind { Converge, LkcConverge, Unbiased, ZeroCount };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Converge;
    std::string manifold = "torus:2";
    int nodes = 0;  ///< quadrature nodes; 0 selects the manifold default
    int waves = 64;
    SpectralShape spectrum = SpectralShape::UniformSphereShell;
    std::uint64_t seed = 1;
    std::vector<int> k_list{64, 256, 1024, 4096};
    int replicates = 50;
    int grid = 64;        ///< evaluation grid per axis for C^i norms
    int order = 2;        ///< highest C^i order computed; higher columns stay 0
    int zero_grid = 128;  ///< sign grid per axis for zero counting
    int threads = 1;
    std::string out_dir = "results";
    bool plot = false;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const ExperimentConfig& cfg);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Overlays the keys present in `j` onto `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

struct ReplicateResult {
    int k = 0;
    int replicate = 0;
    std::uint64_t seed = 0;
    bool excluded = false;
    std::string reason;
    std::vector<double> payload;
    double wall_seconds = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<std::string> columns;  ///< payload column names
    std::vector<ReplicateResult> replicates;  ///< ordered by (k position, replicate)
    nlohmann::json summary;
    double wall_seconds = 0.0;
};

/// Seed of replicate `rep` at embedding dimension k.
std::uint64_t replicate_seed(std::uint64_t root, int k, int rep);

/// Runs fn(0..count-1) on `threads` workers; fn must write only to its own slot.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

ExperimentResult run_converge(const ExperimentConfig& cfg);
ExperimentResult run_lkc_converge(const ExperimentConfig& cfg);
ExperimentResult run_unbiased(const ExperimentConfig& cfg);
ExperimentResult run_zero_count(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// One row per included replicate, header first; numbers printed with %.17g.
std::string results_csv(const ExperimentResult& result);
/// Median-versus-k log-log line plot, or an empty string when not applicable.
std::string results_svg(const ExperimentResult& result);

/**
 * Writes <out_dir>/<kind>.csv, <kind>_summary.json and, with cfg.plot,
 * <kind>.svg. Throws IoError on failure; `result` is untouched either way.
 */
void emit_outputs(const ExperimentResult& result, const ExperimentConfig& cfg);

enum class MetricSource { Reference, Pullback };

/// LKCs of the reference metric or of one pullback metric h^k (seed -> fields).
nlohmann::json lkc_report(const std::string& manifold, int nodes, MetricSource source, int k,
                          int waves, SpectralShape spectrum, std::uint64_t seed);
nlohmann::json gmf_report(int n, int j_max);
/// Expected LKCs of M cap f^{-1}(S) for a codimension-n subspace S.
nlohmann::json gkf_table(const std::string& manifold, int nodes, int codim);

std::string version();

/// Sample statistics used in summaries.
double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);
double mean(const std::vector<double>& v);
/// s / sqrt(N) with the unbiased sample standard deviation s.
double standard_error(const std::vector<double>& v);

}  // namespace randman
