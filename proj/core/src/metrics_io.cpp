#include "optdesign/metrics_io.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace optdesign {

std::string format_number(double x) {
  std::ostringstream ss;
  ss << std::setprecision(12) << x;
  return ss.str();
}

namespace {

std::string optional_index(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace

void write_runs_csv(std::ostream& out, const std::vector<RunMetrics>& runs) {
  out << "strategy,run,seed,competitor,k_star,q,pi_kstar,correct,c_hat,d_hat,entropy,"
         "profit_gap,expected_profit_gap,prior_strength,sampler,acceptance,recommendation,"
         "query_first,query_second,winner\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const RunMetrics& m = runs[r];
    for (const MetricsRow& row : m.rows) {
      out << to_string(m.strategy) << ',' << r << ',' << m.seed << ','
          << optional_index(m.competitor) << ',' << m.k_star << ',' << row.q << ','
          << format_number(row.pi_kstar) << ',' << (row.correct ? 1 : 0) << ','
          << format_number(row.c_hat) << ',' << format_number(row.d_hat) << ','
          << format_number(row.entropy) << ',' << format_number(row.profit_gap) << ','
          << format_number(row.expected_profit_gap) << ',' << format_number(row.prior_strength)
          << ',' << to_string(row.mode) << ',' << format_number(row.acceptance) << ','
          << row.recommendation << ','
          << (row.query ? std::to_string(row.query->first) : std::string()) << ','
          << (row.query ? std::to_string(row.query->second) : std::string()) << ','
          << optional_index(row.winner) << '\n';
    }
  }
}

std::string runs_json(const std::vector<RunMetrics>& runs) {
  nlohmann::json doc = nlohmann::json::array();
  for (const RunMetrics& m : runs) {
    nlohmann::json run;
    run["strategy"] = to_string(m.strategy);
    run["seed"] = m.seed;
    run["competitor"] = m.competitor ? nlohmann::json(*m.competitor) : nlohmann::json(nullptr);
    run["k_star"] = m.k_star;
    nlohmann::json rows = nlohmann::json::array();
    for (const MetricsRow& row : m.rows) {
      rows.push_back({{"q", row.q},
                      {"pi_kstar", row.pi_kstar},
                      {"correct", row.correct},
                      {"c_hat", row.c_hat},
                      {"d_hat", row.d_hat},
                      {"entropy", row.entropy},
                      {"profit_gap", row.profit_gap},
                      {"expected_profit_gap", row.expected_profit_gap},
                      {"prior_strength", row.prior_strength},
                      {"sampler", to_string(row.mode)},
                      {"acceptance", row.acceptance},
                      {"recommendation", row.recommendation},
                      {"query", row.query ? nlohmann::json{row.query->first, row.query->second}
                                          : nlohmann::json(nullptr)},
                      {"winner", row.winner ? nlohmann::json(*row.winner) : nlohmann::json(nullptr)}});
    }
    run["rows"] = std::move(rows);
    doc.push_back(std::move(run));
  }
  return doc.dump(2) + "\n";
}

void write_comparison_csv(std::ostream& out, const std::vector<AggregateRow>& table) {
  out << "strategy,q,pi_kstar,pi_kstar_sem,correct,correct_sem,c_hat,c_hat_sem,d_hat,d_hat_sem,"
         "entropy,entropy_sem,profit_gap,profit_gap_sem\n";
  for (const AggregateRow& a : table) {
    out << to_string(a.strategy) << ',' << a.q << ',' << format_number(a.pi_kstar) << ','
        << format_number(a.pi_kstar_sem) << ',' << format_number(a.correct) << ','
        << format_number(a.correct_sem) << ',' << format_number(a.c_hat) << ','
        << format_number(a.c_hat_sem) << ',' << format_number(a.d_hat) << ','
        << format_number(a.d_hat_sem) << ',' << format_number(a.entropy) << ','
        << format_number(a.entropy_sem) << ',' << format_number(a.profit_gap) << ','
        << format_number(a.profit_gap_sem) << '\n';
  }
}

std::string comparison_json(const std::vector<AggregateRow>& table) {
  nlohmann::json doc = nlohmann::json::array();
  for (const AggregateRow& a : table) {
    doc.push_back({{"strategy", to_string(a.strategy)},
                   {"q", a.q},
                   {"pi_kstar", a.pi_kstar},
                   {"pi_kstar_sem", a.pi_kstar_sem},
                   {"correct", a.correct},
                   {"correct_sem", a.correct_sem},
                   {"c_hat", a.c_hat},
                   {"c_hat_sem", a.c_hat_sem},
                   {"d_hat", a.d_hat},
                   {"d_hat_sem", a.d_hat_sem},
                   {"entropy", a.entropy},
                   {"entropy_sem", a.entropy_sem},
                   {"profit_gap", a.profit_gap},
                   {"profit_gap_sem", a.profit_gap_sem}});
  }
  return doc.dump(2) + "\n";
}

void write_query_scores_csv(std::ostream& out, const std::vector<QueryScore>& scores) {
  out << "candidate,first,second,pi_l,rho,l_tilde\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const QueryScore& s = scores[i];
    out << i << ',' << s.query.first << ',' << s.query.second << ',' << format_number(s.pi_left)
        << ',' << format_number(s.rho) << ',' << format_number(s.l_tilde) << '\n';
  }
}

void write_segment_map_csv(std::ostream& out, const SegmentMap& map) {
  out << "ix,iy,w1,w2,label\n";
  for (std::size_t iy = 0; iy < map.grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < map.grid.nx; ++ix) {
      const Eigen::Vector2d p = map.grid.point(ix, iy);
      out << ix << ',' << iy << ',' << format_number(p[0]) << ',' << format_number(p[1]) << ','
          << map.at(ix, iy) << '\n';
    }
  }
}

}  // namespace optdesign
