#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "optdesign/choice_model.hpp"
#include "optdesign/gisa.hpp"
#include "optdesign/simulation.hpp"

namespace optdesign {

/// Fixed 12-significant-digit rendering used by every CSV writer.
std::string format_number(double x);

/// One row per (run, q).
void write_runs_csv(std::ostream& out, const std::vector<RunMetrics>& runs);
std::string runs_json(const std::vector<RunMetrics>& runs);

/// Mean and bootstrap SEM per (strategy, q).
void write_comparison_csv(std::ostream& out, const std::vector<AggregateRow>& table);
std::string comparison_json(const std::vector<AggregateRow>& table);

/// Candidate table of one GISA selection: query, pi_l, rho, L~.
void write_query_scores_csv(std::ostream& out, const std::vector<QueryScore>& scores);

/// ix, iy, w1, w2, label.
void write_segment_map_csv(std::ostream& out, const SegmentMap& map);

}  // namespace optdesign
