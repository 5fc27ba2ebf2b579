#include "kolmo/labeling.hpp"

#include <cmath>

#include "kolmo/csv.hpp"
#include "kolmo/error.hpp"

namespace kolmo {

void LabelParams::validate() const {
  require(past >= 0 && future >= 0, ErrorKind::InvalidArgument, "window lengths must be non-negative");
  require(std::isfinite(norm_threshold) && std::isfinite(diff_threshold), ErrorKind::InvalidArgument,
          "thresholds must be finite");
}

std::vector<double> snapshot_norms(const SnapshotSeries& series) {
  std::vector<double> out(series.count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (double v : series.snapshot(i)) s += v * v;
    out[i] = std::sqrt(s);
  }
  return out;
}

LabelSeries label_norms(std::span<const double> norms, const LabelParams& params) {
  params.validate();
  const auto b = static_cast<std::size_t>(params.past);
  const auto f = static_cast<std::size_t>(params.future);
  require(norms.size() > b + f, ErrorKind::TooShort,
          "need more than " + std::to_string(b + f) + " snapshots to label, got " + std::to_string(norms.size()));
  LabelSeries out;
  out.norms.assign(norms.begin(), norms.end());
  out.first_labeled = b;
  out.last_labeled = norms.size() - f;
  out.labels.reserve(out.last_labeled - b);
  for (std::size_t i = b; i < out.last_labeled; ++i) {
    const double w = norms[i];
    if (w >= params.norm_threshold) {
      out.labels.push_back(1);
      continue;
    }
    // Past window [i - b, i) and future window [i, i + f), each counting
    // absolute norm changes above the threshold.
    int past_hits = 0;
    for (std::size_t k = i - b; k < i; ++k) past_hits += std::abs(norms[k] - w) > params.diff_threshold;
    int future_hits = 0;
    for (std::size_t k = i; k < i + f; ++k) future_hits += std::abs(norms[k] - w) > params.diff_threshold;
    out.labels.push_back(past_hits == 0 || future_hits == 0 ? 0 : 1);
  }
  return out;
}

LabelSeries label(const SnapshotSeries& series, const LabelParams& params) {
  return label_norms(snapshot_norms(series), params);
}

Durations durations(std::span<const std::uint8_t> labels, double tau) {
  require(tau > 0.0, ErrorKind::InvalidArgument, "tau must be positive");
  Durations out;
  std::size_t start = 0;
  while (start < labels.size()) {
    std::size_t end = start;
    while (end < labels.size() && labels[end] == labels[start]) ++end;
    if (start > 0 && end < labels.size()) {
      const double t = static_cast<double>(end - start) * tau;
      (labels[start] ? out.bursting : out.quiescent).push_back(t);
    }
    start = end;
  }
  return out;
}

void save_labels_csv(const std::filesystem::path& path, const LabelSeries& labels) {
  CsvTable t;
  t.header = {"index", "norm", "label"};
  for (std::size_t j = 0; j < labels.labels.size(); ++j) {
    const std::size_t i = labels.first_labeled + j;
    t.rows.push_back({static_cast<double>(i), labels.norms.at(i), static_cast<double>(labels.labels[j])});
  }
  write_csv(path, t);
}

LabelSeries load_labels_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto ci = t.column("index");
  const auto cn = t.column("norm");
  const auto cl = t.column("label");
  LabelSeries out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double idx = t.rows[r][ci];
    const double lab = t.rows[r][cl];
    require(idx >= 0 && idx == std::floor(idx), ErrorKind::Format, path.string() + ": bad index");
    require(lab == 0.0 || lab == 1.0, ErrorKind::Format, path.string() + ": labels must be 0 or 1");
    const auto i = static_cast<std::size_t>(idx);
    if (r == 0) out.first_labeled = i;
    require(i == out.first_labeled + r, ErrorKind::Format, path.string() + ": indices must be consecutive");
    out.labels.push_back(static_cast<std::uint8_t>(lab));
    if (out.norms.size() <= i) out.norms.resize(i + 1, std::nan(""));
    out.norms[i] = t.rows[r][cn];
  }
  out.last_labeled = out.first_labeled + out.labels.size();
  return out;
}

}  // namespace kolmo
