#include "rppg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "rppg/error.hpp"
#include "rppg/numeric.hpp"

namespace rppg::eval {

AgreementStats agreement(std::span<const double> est, std::span<const double> gt) {
  if (est.size() != gt.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "est has " + std::to_string(est.size()) + " values, gt has " + std::to_string(gt.size()));
  }
  if (est.empty()) throw Error(ErrorCode::InvalidArgument, "agreement needs at least one pair");
  const std::size_t n = est.size();

  std::vector<double> diff(n), absdiff(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = est[i] - gt[i];
    absdiff[i] = std::abs(diff[i]);
  }
  AgreementStats s;
  s.n = n;
  s.mae = mean(absdiff);
  s.bias = mean(diff);
  s.se = stddev(diff);
  s.loa_low = s.bias - 1.96 * s.se;
  s.loa_high = s.bias + 1.96 * s.se;

  const double me = mean(est), mg = mean(gt);
  CompensatedSum sxy, sxx, syy;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = est[i] - me, b = gt[i] - mg;
    sxy.add(a * b);
    sxx.add(a * a);
    syy.add(b * b);
  }
  const double den = std::sqrt(sxx.value() * syy.value());
  if (n < 2 || !(den > 0.0)) {
    s.r = std::numeric_limits<double>::quiet_NaN();
  } else {
    s.r = std::clamp(sxy.value() / den, -1.0, 1.0);
  }
  return s;
}

std::string_view to_string(SkinTone v) {
  switch (v) {
    case SkinTone::Light: return "light";
    case SkinTone::Medium: return "medium";
    case SkinTone::Dark: return "dark";
  }
  return "?";
}

std::string_view to_string(Condition v) {
  switch (v) {
    case Condition::K3200: return "3200K";
    case Condition::K5600: return "5600K";
    case Condition::Room: return "room";
    case Condition::Talking: return "talking";
  }
  return "?";
}

std::string_view to_string(Viewpoint v) {
  switch (v) {
    case Viewpoint::Front: return "front";
    case Viewpoint::Lower: return "lower";
  }
  return "?";
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& all, const char* what) {
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  throw Error(ErrorCode::InvalidArgument, std::string("unknown ") + what + ": " + std::string(s));
}

constexpr std::array kTones = {SkinTone::Light, SkinTone::Medium, SkinTone::Dark};
constexpr std::array kConditions = {Condition::K3200, Condition::K5600, Condition::Room, Condition::Talking};
constexpr std::array kViewpoints = {Viewpoint::Front, Viewpoint::Lower};

std::vector<std::string> column_names() {
  std::vector<std::string> out = {"overall"};
  for (auto v : kTones) out.emplace_back(to_string(v));
  for (auto v : kConditions) out.emplace_back(to_string(v));
  for (auto v : kViewpoints) out.emplace_back(to_string(v));
  return out;
}

bool in_column(const EvalRecord& r, std::size_t col) {
  if (col == 0) return true;
  col -= 1;
  if (col < kTones.size()) return r.key.skin_tone == kTones[col];
  col -= kTones.size();
  if (col < kConditions.size()) return r.key.condition == kConditions[col];
  col -= kConditions.size();
  return r.key.viewpoint == kViewpoints[col];
}

int method_rank(const std::string& m) {
  if (m == "aggregate") return 0;
  if (m == "snr") return 1;
  if (m == "proposed") return 2;
  return 3;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "NaN";
  std::ostringstream o;
  o.precision(10);
  o << v;
  return o.str();
}

}  // namespace

SkinTone parse_skin_tone(std::string_view s) { return parse_enum(s, kTones, "skin tone"); }
Condition parse_condition(std::string_view s) { return parse_enum(s, kConditions, "condition"); }
Viewpoint parse_viewpoint(std::string_view s) { return parse_enum(s, kViewpoints, "viewpoint"); }

CohortReport cohort_report(std::span<const EvalRecord> records) {
  CohortReport rep;
  rep.column_names = column_names();

  std::vector<std::string> methods;
  for (const auto& r : records) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
  }
  std::stable_sort(methods.begin(), methods.end(), [](const std::string& a, const std::string& b) {
    const int ra = method_rank(a), rb = method_rank(b);
    return ra != rb ? ra < rb : (ra == 3 && a < b);
  });

  for (const auto& m : methods) {
    MethodRow row{m, {}};
    for (std::size_t c = 0; c < rep.column_names.size(); ++c) {
      std::vector<double> est, gt;
      for (const auto& r : records) {
        if (r.method == m && in_column(r, c)) {
          est.push_back(r.est_bpm);
          gt.push_back(r.gt_bpm);
        }
      }
      ReportColumn col{rep.column_names[c], std::nullopt};
      if (!est.empty()) col.stats = agreement(est, gt);
      row.columns.push_back(std::move(col));
    }
    rep.rows.push_back(std::move(row));
  }

  const auto base = std::find_if(rep.rows.begin(), rep.rows.end(),
                                 [](const MethodRow& r) { return r.method == kBaselineMethod; });
  if (base != rep.rows.end()) {
    for (const auto& row : rep.rows) {
      if (row.method == kBaselineMethod) continue;
      std::vector<std::optional<double>> d(row.columns.size());
      for (std::size_t c = 0; c < row.columns.size(); ++c) {
        if (row.columns[c].stats && base->columns[c].stats) {
          d[c] = row.columns[c].stats->mae - base->columns[c].stats->mae;
        }
      }
      rep.delta.emplace_back(row.method, std::move(d));
    }
  }
  return rep;
}

std::string report_csv(const CohortReport& rep) {
  std::ostringstream o;
  o << "method,statistic";
  for (const auto& c : rep.column_names) o << ',' << c;
  o << '\n';
  struct Stat {
    const char* name;
    double (*get)(const AgreementStats&);
  };
  static const Stat stats[] = {
      {"mae", [](const AgreementStats& s) { return s.mae; }},
      {"se", [](const AgreementStats& s) { return s.se; }},
      {"r", [](const AgreementStats& s) { return s.r; }},
      {"bias", [](const AgreementStats& s) { return s.bias; }},
      {"loa_low", [](const AgreementStats& s) { return s.loa_low; }},
      {"loa_high", [](const AgreementStats& s) { return s.loa_high; }},
      {"n", [](const AgreementStats& s) { return static_cast<double>(s.n); }},
  };
  for (const auto& row : rep.rows) {
    for (const auto& st : stats) {
      o << row.method << ',' << st.name;
      for (const auto& c : row.columns) o << ',' << (c.stats ? fmt(st.get(*c.stats)) : "NA");
      o << '\n';
    }
  }
  for (const auto& [method, d] : rep.delta) {
    o << method << ",delta_mae";
    for (const auto& v : d) o << ',' << (v ? fmt(*v) : "NA");
    o << '\n';
  }
  return o.str();
}

std::string scatter_csv(std::span<const double> est, std::span<const double> gt) {
  if (est.size() != gt.size()) throw Error(ErrorCode::LengthMismatch, "scatter: est and gt differ in length");
  std::ostringstream o;
  o << "gt,est\n";
  for (std::size_t i = 0; i < est.size(); ++i) o << fmt(gt[i]) << ',' << fmt(est[i]) << '\n';
  return o.str();
}

std::string bland_altman_csv(std::span<const double> est, std::span<const double> gt) {
  if (est.size() != gt.size()) throw Error(ErrorCode::LengthMismatch, "bland-altman: est and gt differ in length");
  std::ostringstream o;
  o << "mean,diff\n";
  for (std::size_t i = 0; i < est.size(); ++i) o << fmt(0.5 * (est[i] + gt[i])) << ',' << fmt(est[i] - gt[i]) << '\n';
  return o.str();
}

}  // namespace rppg::eval
