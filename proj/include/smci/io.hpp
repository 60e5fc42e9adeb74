#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "smci/barnard.hpp"
#include "smci/engine.hpp"
#include "smci/med.hpp"
#include "smci/poisson.hpp"
#include "smci/space.hpp"
#include "smci/verify.hpp"

namespace smci::io {

using nlohmann::json;

/// Reads a whole file; std::invalid_argument when it cannot be opened.
std::string read_text(const std::string& path);

/// Writes via a sibling temp file plus rename so readers never observe a
/// half-written file.
void write_text_atomic(const std::string& path, const std::string& content);

// Ordered partitions: a JSON array of blocks, each block an array of
// [x, y] pairs, order significant. The shape is inferred from the
// largest coordinates and the partition must tile that space.
json partition_to_json(const space::OrderedPartition& partition);
space::OrderedPartition partition_from_json(const json& j);
space::OrderedPartition load_partition(const std::string& path);

// Lower-limit tables. CSV holds the per-point view (header x,y,lower,
// values at 6 decimal places); JSON holds the full structure
// {shape, alpha, partition, limits} with one limit per block and doubles
// serialized so they round-trip exactly. Loading is structural only: a
// loaded table may violate the monotone-class invariants on purpose
// (verification feeds such tables in deliberately). A table loaded from
// CSV regroups its blocks by equal limit value and carries alpha = NaN
// until the caller supplies one.
std::string table_to_csv(const engine::LowerLimitTable& table);
engine::LowerLimitTable table_from_csv(const std::string& text);
json table_to_json(const engine::LowerLimitTable& table);
engine::LowerLimitTable table_from_json(const json& j);
engine::LowerLimitTable load_table(const std::string& path);

/// Builder trace with columns step, block, neighbors, candidates,
/// candidate_limits, tie_merged, limit. Point lists are space-separated
/// "(x,y)" items inside quoted fields; candidate limits align with the
/// candidates field.
std::string trace_to_csv(const std::vector<barnard::BuildStep>& steps);

// Dose studies. CSV rows are dose,x,n with one control row at dose 0
// (its x and n columns hold the control's y and m); doses must then run
// 1..k. JSON mirrors the struct: {doses: [{x, n}...], control: {y, m},
// delta, alpha} with delta and alpha optional.
std::string study_to_csv(const med::DoseStudy& study);
med::DoseStudy study_from_csv(const std::string& text);
json study_to_json(const med::DoseStudy& study);
med::DoseStudy study_from_json(const json& j);
med::DoseStudy load_study(const std::string& path);

/// MED decision trail: per-dose limits and rejections plus the MED
/// itself (null when no dose is asserted).
json med_result_to_json(const med::MedResult& result,
                        const med::DoseStudy& study);

/// Keys x, y, alpha, L, U, L1, LG, g_table.
json poisson_report_to_json(const poisson::PoissonReport& report);

const char* dominance_name(verify::Dominance verdict);
json dominance_to_json(const verify::DominanceVerdict& verdict);

/// Coverage section of the verification report: min_coverage, argmin and
/// the grid points whose coverage fell below floor.
json coverage_report_to_json(const verify::CoverageProfile& profile,
                             double floor);

json fwer_to_json(const verify::FwerEstimate& estimate);

}  // namespace smci::io
