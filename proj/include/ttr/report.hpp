#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ttr/experiment.hpp"

namespace ttr {

struct TraceSeries {
    std::string run_id;
    std::uint64_t seed = 0;
    Index test_task = 0;
    RegretTrace trace;
};

/// Parses a trace CSV; throws FormatError on a bad header, row or episode order.
std::vector<TraceSeries> parse_trace_csv(const std::string& text);
std::vector<TraceSeries> read_trace_csv(const std::filesystem::path& path);

struct ReportGroup {
    std::string label;
    Index runs = 0;
    Index horizon = 0;
    double mean_regret = 0.0;
    double std_regret = 0.0;
    double mean_identify_episodes = 0.0;  // identify and truncated episodes
    Index truncated_runs = 0;
    Curves curves;
};

/// One group per CSV file, labelled by the file stem.
ReportGroup summarize_group(const std::string& label, const std::vector<TraceSeries>& series);

std::string markdown_table(const std::vector<ReportGroup>& groups);
/// Mean cumulative regret curves with a one-stddev band.
std::string regret_svg(const std::vector<ReportGroup>& groups, int width = 720, int height = 440);

}  // namespace ttr
