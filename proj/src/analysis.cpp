#include "ddrbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "ddrbench/error.hpp"
#include "ddrbench/transport.hpp"
#include "json.hpp"

namespace ddrbench {

double EcdfCurve::operator()(double x) const {
  auto const it = std::upper_bound(values.begin(), values.end(), x);
  if (it == values.begin()) return 0.0;
  return heights[static_cast<std::size_t>(it - values.begin()) - 1];
}

EcdfCurve ecdf(std::span<double const> samples) {
  if (samples.empty()) fail(ErrorCode::kEmptyInput, "ecdf needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  EcdfCurve curve;
  curve.sample_count = sorted.size();
  auto const n = static_cast<double>(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    // Only the last of a run of ties produces a step.
    if (k + 1 < sorted.size() && sorted[k + 1] == sorted[k]) continue;
    curve.values.push_back(sorted[k]);
    curve.heights.push_back(k + 1 == sorted.size() ? 1.0 : static_cast<double>(k + 1) / n);
  }
  return curve;
}

double separation_emd(std::span<double const> synonym_scores, std::span<double const> random_scores) {
  return emd_1d_unit_mass(synonym_scores, random_scores);
}

double pearson(std::span<double const> xs, std::span<double const> ys) {
  if (xs.size() != ys.size()) {
    fail(ErrorCode::kLengthMismatch, "pearson needs equal lengths, got " + std::to_string(xs.size()) +
                                         " and " + std::to_string(ys.size()));
  }
  if (xs.size() < 2) fail(ErrorCode::kEmptyInput, "pearson needs at least two points");
  auto constant = [](std::span<double const> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(xs) || constant(ys)) fail(ErrorCode::kUndefined, "pearson undefined: zero variance");

  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    long double const dx = xs[i] - mx;
    long double const dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(static_cast<double>(sxy / std::sqrt(sxx * syy)), -1.0, 1.0);
}

double lower_median(std::span<double const> samples) {
  if (samples.empty()) fail(ErrorCode::kEmptyInput, "median of no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  auto const mid = sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  return *mid;
}

ScatterResult scatter_pairs(std::span<ScoreRecord const> records, Method method, int depth) {
  struct Pair {
    std::optional<double> synonym;
    std::optional<double> random;
  };
  std::map<std::string, Pair> by_source;
  for (auto const& r : records) {
    if (r.method != method || r.depth != depth) continue;
    auto& slot = by_source[r.source_id];
    auto& value = r.kind == SubstitutionKind::kSynonym ? slot.synonym : slot.random;
    if (!value) value = r.score;
  }
  ScatterResult result;
  for (auto const& [source, pair] : by_source) {
    if (pair.synonym && pair.random) {
      result.points.push_back({source, *pair.random, *pair.synonym});
    } else {
      ++result.excluded;
    }
  }
  return result;
}

namespace {

std::vector<double> scores_of(std::span<ScoreRecord const> records, Method method, int depth,
                              SubstitutionKind kind) {
  std::vector<double> out;
  for (auto const& r : records) {
    if (r.method == method && r.depth == depth && r.kind == kind) out.push_back(r.score);
  }
  return out;
}

std::string cell_name(Method method, int depth) {
  return std::string(to_string(method)) + "/d" + std::to_string(depth);
}

}  // namespace

Report build_report(std::span<ScoreRecord const> records, std::span<Method const> methods,
                    std::span<int const> depths, std::string manifest_sha256) {
  Report report;
  report.manifest_sha256 = std::move(manifest_sha256);
  for (Method method : methods) {
    for (int depth : depths) {
      auto const syn = scores_of(records, method, depth, SubstitutionKind::kSynonym);
      auto const rnd = scores_of(records, method, depth, SubstitutionKind::kRandom);
      if (syn.empty() || rnd.empty()) {
        report.missing_cells.push_back(cell_name(method, depth));
        continue;
      }
      MethodDepthSummary s;
      s.method = method;
      s.depth = depth;
      s.n_synonym = syn.size();
      s.n_random = rnd.size();
      s.emd_separation = separation_emd(syn, rnd);
      s.synonym_median = lower_median(syn);
      s.random_median = lower_median(rnd);

      auto const scatter = scatter_pairs(records, method, depth);
      s.n_pairs = scatter.points.size();
      s.excluded = scatter.excluded;
      std::vector<double> xs, ys;
      std::size_t above = 0;
      for (auto const& p : scatter.points) {
        xs.push_back(p.random_score);
        ys.push_back(p.synonym_score);
        if (p.synonym_score > p.random_score) ++above;
      }
      if (!scatter.points.empty()) {
        s.above_diagonal_fraction = static_cast<double>(above) / static_cast<double>(scatter.points.size());
      }
      try {
        s.pearson_r = pearson(xs, ys);
      } catch (Error const& e) {
        if (e.code() != ErrorCode::kUndefined && e.code() != ErrorCode::kEmptyInput) throw;
      }
      report.summaries.push_back(s);
    }
  }
  return report;
}

std::string report_to_json(Report const& report) {
  nlohmann::ordered_json j;
  j["run_manifest_sha256"] = report.manifest_sha256;
  j["median_convention"] = "lower";
  j["note"] =
      "EMD separation is measured in each method's own score units; compare it across depths "
      "within a method, not across methods.";
  auto& summaries = j["summaries"] = nlohmann::ordered_json::array();
  for (auto const& s : report.summaries) {
    nlohmann::ordered_json e;
    e["method"] = to_string(s.method);
    e["depth"] = s.depth;
    if (s.pearson_r) {
      e["pearson_r"] = *s.pearson_r;
      e["pearson_status"] = "defined";
    } else {
      e["pearson_r"] = nullptr;
      e["pearson_status"] = "undefined";
    }
    e["emd_separation"] = s.emd_separation;
    e["n_pairs"] = s.n_pairs;
    e["excluded_sources"] = s.excluded;
    e["n_synonym"] = s.n_synonym;
    e["n_random"] = s.n_random;
    e["synonym_median"] = s.synonym_median;
    e["random_median"] = s.random_median;
    e["above_diagonal_fraction"] = s.above_diagonal_fraction;
    summaries.push_back(std::move(e));
  }
  j["missing_cells"] = report.missing_cells;
  return j.dump(2) + "\n";
}

namespace {

// (method, depth) cells present in the records, in canonical order.
std::vector<std::pair<Method, int>> cells_in(std::span<ScoreRecord const> records) {
  std::vector<std::pair<Method, int>> cells;
  for (auto const& r : records) cells.emplace_back(r.method, r.depth);
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

void provenance(std::ostream& out, std::string const& hash) {
  out << "# run_manifest_sha256=" << hash << '\n';
}

}  // namespace

void write_ecdf_csv(std::ostream& out, std::span<ScoreRecord const> records,
                    std::string const& manifest_sha256) {
  provenance(out, manifest_sha256);
  out << "method,depth,kind,value,height\n";
  for (auto const& [method, depth] : cells_in(records)) {
    for (auto kind : kAllKinds) {
      auto const scores = scores_of(records, method, depth, kind);
      if (scores.empty()) continue;
      auto const curve = ecdf(scores);
      for (std::size_t k = 0; k < curve.values.size(); ++k) {
        out << to_string(method) << ',' << depth << ',' << to_string(kind) << ','
            << format_double(curve.values[k]) << ',' << format_double(curve.heights[k]) << '\n';
      }
    }
  }
}

void write_scatter_csv(std::ostream& out, std::span<ScoreRecord const> records,
                       std::string const& manifest_sha256) {
  provenance(out, manifest_sha256);
  out << "method,depth,source_id,random_score,synonym_score\n";
  for (auto const& [method, depth] : cells_in(records)) {
    for (auto const& p : scatter_pairs(records, method, depth).points) {
      out << to_string(method) << ',' << depth << ',' << csv_field(p.source_id) << ','
          << format_double(p.random_score) << ',' << format_double(p.synonym_score) << '\n';
    }
  }
}

void write_reference_line_csv(std::ostream& out, std::span<ScoreRecord const> records,
                              std::string const& manifest_sha256) {
  provenance(out, manifest_sha256);
  out << "method,depth,x,y\n";
  for (auto const& [method, depth] : cells_in(records)) {
    double lo = 0, hi = 0;
    bool first = true;
    for (auto const& r : records) {
      if (r.method != method || r.depth != depth) continue;
      lo = first ? r.score : std::min(lo, r.score);
      hi = first ? r.score : std::max(hi, r.score);
      first = false;
    }
    for (double v : {lo, hi}) {
      out << to_string(method) << ',' << depth << ',' << format_double(v) << ',' << format_double(v) << '\n';
    }
  }
}

}  // namespace ddrbench
