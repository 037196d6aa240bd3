#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coagent/util/json.hpp"

namespace coagent::simulator {

// Memoryless retry model: first attempt passes with p1, each retry with q,
// hard-capped at max_attempts synthesis attempts per shot.
struct RetryModel {
  double p1 = 0.72;
  double q = 0.6;
  int max_attempts = 3;
  std::uint64_t n_shots = 10000;
  std::uint64_t seed = 0;
};

struct RetryStats {
  double first_pass_rate = 0.0;
  std::optional<double> mean_extra_turns;  // over shots needing retries
  double convergence_rate = 0.0;
  std::vector<double> histogram;  // counts per attempts value 1..max
};

util::Json stats_to_json(const RetryStats& stats);

// Exact closed forms:
//   first_pass   = p1
//   mean_extra   = (1 - (1-q)^m) / q over failing shots, m = max_attempts-1
//                  (q = 0 degenerates to m); absent when p1 = 1
//   convergence  = p1 + (1-p1) * (1 - (1-q)^m)
// Histogram holds expected counts.
RetryStats analytic_stats(const RetryModel& model);

// Seeded Monte-Carlo over independent shots, same accounting as the
// pipeline's compute_stats.
RetryStats simulate(const RetryModel& model);

// Fits q separately to each reported headline statistic and quantifies
// whether the trio (first-pass 72%, mean extra 1.4, 98% convergence in 3)
// is jointly attainable under the memoryless model.
struct PaperFitReport {
  double p1 = 0.72;
  int max_attempts = 3;
  double q_for_mean_extra = 0.0;          // from mean extra turns = 1.4
  double convergence_at_q_mean = 0.0;
  double q_for_convergence = 0.0;         // from convergence = 0.98
  double mean_extra_at_q_convergence = 0.0;
  bool jointly_feasible = false;
  double convergence_gap = 0.0;           // |0.98 - convergence_at_q_mean|
  bool alt_reading_feasible = false;      // 1.4 averaged over all shots
  double alt_reading_required_q = 0.0;
};

PaperFitReport fit_to_paper();

util::Json fit_report_to_json(const PaperFitReport& report);

}  // namespace coagent::simulator
