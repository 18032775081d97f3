// Copyright 2026 The kbembed Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "kbembed/evaluation.hpp"

namespace kbembed {

namespace detail {

inline std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

inline std::string percent(double p) { return fmt("%.1f%%", 100.0 * p); }

}  // namespace detail

// Plain-text table in the usual link-prediction layout.
inline void write_report_table(std::ostream& out, const EvalReport& r,
                               const std::string& row_label = "model") {
  using detail::fmt;
  using detail::pad;
  using detail::percent;
  const std::string total = " / " + std::to_string(r.candidate_total);
  switch (r.task) {
    case Task::EntityInference:
      out << pad("METRIC", 12) << pad("MEAN RANK", 40) << "MEAN HIT@10\n";
      out << pad("", 12) << pad("Raw", 20) << pad("Filter", 20) << pad("Raw", 10) << "Filter\n";
      out << pad(row_label, 12) << pad(fmt("%.1f", r.mean_rank_raw) + total, 20)
          << pad(fmt("%.1f", r.mean_rank_filtered) + total, 20)
          << pad(percent(r.hit_at_10_raw), 10) << percent(r.hit_at_10_filtered) << '\n';
      break;
    case Task::RelationPrediction:
      out << pad("METRIC", 12) << pad("AVG. R.", 10) << pad("HIT@10", 10) << "HIT@1\n";
      out << pad(row_label, 12) << pad(fmt("%.2f", r.avg_rank), 10)
          << pad(percent(r.hit_at_10), 10) << percent(r.hit_at_1) << '\n';
      break;
    case Task::TripletClassification:
      out << pad("METRIC", 12) << "ACC.\n";
      out << pad(row_label, 12) << percent(r.accuracy) << '\n';
      break;
  }
}

// One key=value per line; full precision.
inline void write_report_key_values(std::ostream& out, const EvalReport& r) {
  auto kv = [&](const char* k, double v) { out << k << '=' << detail::fmt("%.17g", v) << '\n'; };
  out << "task=" << task_name(r.task) << '\n';
  out << "trials=" << r.trials << '\n';
  out << "candidate_total=" << r.candidate_total << '\n';
  switch (r.task) {
    case Task::EntityInference:
      kv("mean_rank_raw", r.mean_rank_raw);
      kv("mean_rank_filtered", r.mean_rank_filtered);
      kv("hit_at_10_raw", r.hit_at_10_raw);
      kv("hit_at_10_filtered", r.hit_at_10_filtered);
      break;
    case Task::RelationPrediction:
      kv("avg_rank", r.avg_rank);
      kv("hit_at_10", r.hit_at_10);
      kv("hit_at_1", r.hit_at_1);
      break;
    case Task::TripletClassification:
      kv("accuracy", r.accuracy);
      break;
  }
}

}  // namespace kbembed
