#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "inflection/panel_synth.hpp"

namespace inflection {

inline constexpr std::string_view kPanelHeader =
    "worker_id,market_id,month_index,treat,post35,post40,fjobnum,fjobearn,fjobratio,"
    "tenure,us,experienced";
inline constexpr std::string_view kDemandHeader = "market_id,week_index,postnum,treat,post";
inline constexpr std::string_view kCovariatesHeader =
    "worker_id,market_id,treat,log_acc_fjobnum,log_experience,log_avg_fjobprice,"
    "log_avg_fhourprice,avg_fjobrating";

// Writers print doubles with 17 significant digits so reads round-trip exactly.
void write_panel_csv(std::ostream& out, const Panel& panel);
void write_demand_csv(std::ostream& out, const std::vector<DemandRow>& rows);
void write_covariates_csv(std::ostream& out, const std::vector<WorkerCovariates>& rows);

void write_panel_csv(const std::filesystem::path& path, const Panel& panel);
void write_demand_csv(const std::filesystem::path& path, const std::vector<DemandRow>& rows);
void write_covariates_csv(const std::filesystem::path& path,
                          const std::vector<WorkerCovariates>& rows);

/// The header must equal kPanelHeader exactly (SchemaMismatchError otherwise).
/// Row checks raise InvariantViolationError carrying the 1-based data row:
///   binary flags are 0/1, post40 implies post35, counts and earnings are
///   nonnegative, zero jobs imply zero earnings and ratio, the ratio lies in
///   [0, 1], and each (worker_id, month_index) appears once.
Panel ingest_panel_csv(std::istream& in);
Panel ingest_panel_csv(const std::filesystem::path& path);

std::vector<DemandRow> ingest_demand_csv(std::istream& in);
std::vector<DemandRow> ingest_demand_csv(const std::filesystem::path& path);

std::vector<WorkerCovariates> ingest_covariates_csv(std::istream& in);
std::vector<WorkerCovariates> ingest_covariates_csv(const std::filesystem::path& path);

}  // namespace inflection
