#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kolmo/snapshot.hpp"

namespace kolmo {

struct LabelParams {
  double norm_threshold = 60.0;
  double diff_threshold = 5.0;
  int past = 10;    // b
  int future = 10;  // f

  void validate() const;
};

/// labels[j] belongs to snapshot first_labeled + j; snapshots before
/// first_labeled and from last_labeled on are unlabeled.
struct LabelSeries {
  std::vector<std::uint8_t> labels;
  std::size_t first_labeled = 0;
  std::size_t last_labeled = 0;
  std::vector<double> norms;  // every snapshot
};

/// Euclidean norm of each flattened snapshot.
std::vector<double> snapshot_norms(const SnapshotSeries& series);

/// Quiescent (0) / bursting (1) labels from a norm sequence. Throws TooShort
/// unless the sequence is longer than past + future.
LabelSeries label_norms(std::span<const double> norms, const LabelParams& params = {});
LabelSeries label(const SnapshotSeries& series, const LabelParams& params = {});

struct Durations {
  std::vector<double> quiescent;  // t_q
  std::vector<double> bursting;   // t_b
};

/// Run lengths times tau. Runs touching either end of the sequence are
/// dropped because their true length is unknown.
Durations durations(std::span<const std::uint8_t> labels, double tau);

/// CSV: index, norm, label (unlabeled snapshots omitted).
void save_labels_csv(const std::filesystem::path& path, const LabelSeries& labels);
LabelSeries load_labels_csv(const std::filesystem::path& path);

}  // namespace kolmo
