#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rppg::eval {

/// Agreement between estimated and reference heart rates, in bpm.
/// `se` is the population standard deviation of est - gt; r is NaN when
/// either list has zero variance or there is a single pair.
struct AgreementStats {
  std::size_t n = 0;
  double mae = 0.0;
  double se = 0.0;
  double r = 0.0;
  double bias = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
};

AgreementStats agreement(std::span<const double> est, std::span<const double> gt);

enum class SkinTone { Light, Medium, Dark };
enum class Condition { K3200, K5600, Room, Talking };
enum class Viewpoint { Front, Lower };

struct CohortKey {
  SkinTone skin_tone = SkinTone::Light;
  Condition condition = Condition::Room;
  Viewpoint viewpoint = Viewpoint::Front;
};

std::string_view to_string(SkinTone v);
std::string_view to_string(Condition v);
std::string_view to_string(Viewpoint v);
SkinTone parse_skin_tone(std::string_view s);
Condition parse_condition(std::string_view s);
Viewpoint parse_viewpoint(std::string_view s);

/// One video's outcome under one combination method.
struct EvalRecord {
  std::string method;
  CohortKey key;
  double est_bpm = 0.0;
  double gt_bpm = 0.0;
};

inline constexpr std::string_view kBaselineMethod = "aggregate";

/// Report columns: overall, the three skin tones, the four conditions and
/// the two viewpoints.
struct ReportColumn {
  std::string name;
  std::optional<AgreementStats> stats;  // empty when the cohort has no records
};

struct MethodRow {
  std::string method;
  std::vector<ReportColumn> columns;
};

struct CohortReport {
  std::vector<std::string> column_names;
  std::vector<MethodRow> rows;
  /// Per method other than the baseline: method MAE minus baseline MAE per
  /// column, negative when the method improves. Empty cells stay empty.
  std::vector<std::pair<std::string, std::vector<std::optional<double>>>> delta;
};

CohortReport cohort_report(std::span<const EvalRecord> records);

/// Table layout: one line per method and statistic, one column per cohort;
/// absent cells are written as "NA".
std::string report_csv(const CohortReport& report);

/// "gt,est" pairs for a scatter plot and "mean,diff" pairs for Bland-Altman.
std::string scatter_csv(std::span<const double> est, std::span<const double> gt);
std::string bland_altman_csv(std::span<const double> est, std::span<const double> gt);

}  // namespace rppg::eval
