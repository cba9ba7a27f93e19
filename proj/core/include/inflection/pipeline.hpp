#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inflection/matching.hpp"

namespace inflection {

std::string_view library_version();

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

enum class Stage { Simulate, Match, Estimate, Tost, Report };
enum class EstimateKind { Did, Event, Dual, Demand };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);
std::string_view to_string(EstimateKind kind);
EstimateKind estimate_kind_from_string(std::string_view name);

struct PipelineOptions {
  /// Empty runs every stage in order.
  std::vector<Stage> stages;
  /// Fits run by the estimate stage; empty runs all four.
  std::vector<EstimateKind> estimates;
  double alpha = 0.05;
  MatchOptions match;
  /// TOST equivalence bound; 0.36 x SD of the outcome when unset.
  std::optional<double> tost_bounds;
  OutcomeColumn outcome = OutcomeColumn::FjobNum;
  /// Estimate on every worker instead of the matched sample.
  bool skip_matching = false;
  /// Use these CSVs instead of simulating.
  std::optional<std::filesystem::path> panel_csv;
  std::optional<std::filesystem::path> demand_csv;
  std::optional<std::filesystem::path> covariates_csv;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct OutputFile {
  std::string name;  // relative to the out dir
  std::string sha256;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> stages;
  std::vector<StageTiming> timings;
  std::vector<OutputFile> outputs;  // sorted by name
  /// Hash of everything above except timings.
  std::string manifest_hash;
};

/// Runs the requested stages on the scenario at `config_path`, writing every
/// artifact plus manifest.json into `out_dir`. Work a stage needs from an
/// earlier, unrequested stage is recomputed in memory without being written.
/// Stage failures are rethrown as StageError.
RunManifest run_pipeline(const std::filesystem::path& config_path,
                         const std::filesystem::path& out_dir,
                         std::optional<std::uint64_t> seed,
                         const PipelineOptions& options = {});

}  // namespace inflection
