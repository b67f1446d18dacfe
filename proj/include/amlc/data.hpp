#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amlc/model.hpp"
#include "amlc/rng.hpp"
#include "amlc/sparse_vector.hpp"

namespace amlc {

struct Example {
  SparseVector x;
  Label y = Label::positive;
  TaskId task = 0;

  friend bool operator==(const Example&, const Example&) = default;
};

struct TaskData {
  std::vector<Example> train;
  std::vector<Example> test;

  friend bool operator==(const TaskData&, const TaskData&) = default;
};

/// K tasks with their train/test splits. tasks[i] has 1-based id i + 1 in
/// manifests and reports, and every example in it carries task == i.
struct MultitaskDataset {
  std::string name;
  std::vector<TaskData> tasks;
  std::optional<std::size_t> feature_count_hint;
  std::string provenance;

  std::size_t task_count() const { return tasks.size(); }
  std::size_t train_size() const;
  std::size_t test_size() const;
  /// One past the largest feature index seen in any split.
  FeatureIndex feature_extent() const;

  /// Throws DataError when an example's task field disagrees with its slot.
  void validate() const;

  friend bool operator==(const MultitaskDataset&, const MultitaskDataset&) = default;
};

// ---------------------------------------------------------------------------
// Sparse example format: "<label> <index>:<value> ...", label +1 or -1,
// indices strictly increasing and nonnegative, '#' starts a comment.

/// Parses one line. Returns nullopt for blank and comment-only lines and
/// throws DataError (without location) on anything malformed.
std::optional<Example> parse_sparse_line(std::string_view line, TaskId task);

/// Reads a whole file; errors carry "path:line:".
std::vector<Example> read_sparse_file(const std::filesystem::path& path, TaskId task);

/// Round-trip exact (shortest decimal form of each value).
std::string format_sparse_line(const Example& example);
void write_sparse_file(const std::filesystem::path& path, std::span<const Example> examples);

// ---------------------------------------------------------------------------
// Manifest: "key = value" lines, '#' comments. Keys:
//   name, feature_count_hint, train_per_task, test_per_task, split_seed,
//   task.<id>.train, task.<id>.test, task.<id>.data
// Task ids are dense 1..K. A task either lists a pooled `data` file, which
// is split with train_per_task / test_per_task / split_seed, or a `train`
// file with an optional `test` file. Relative paths resolve against the
// manifest's directory.

struct ManifestTask {
  std::optional<std::filesystem::path> train;
  std::optional<std::filesystem::path> test;
  std::optional<std::filesystem::path> data;
};

struct Manifest {
  std::string name;
  std::optional<std::size_t> feature_count_hint;
  std::optional<std::size_t> train_per_task;
  std::optional<std::size_t> test_per_task;
  std::uint64_t split_seed = 0;
  std::vector<ManifestTask> tasks;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

MultitaskDataset load_sparse_dataset(const std::filesystem::path& manifest_path);

/// Random train selection per task (without replacement); the remainder,
/// in random order and capped at test_per_task, becomes the test set. Both
/// splits keep the examples' original relative order. One generator seeded
/// with `seed` is used across tasks in order.
MultitaskDataset split_train_test(std::vector<std::vector<Example>> raw, std::size_t train_per_task,
                                  std::optional<std::size_t> test_per_task, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct SynthConfig {
  std::size_t tasks = 10;
  std::size_t clusters = 2;
  std::size_t dim = 20;
  std::size_t n_train = 100;
  std::size_t n_test = 300;
  double label_noise = 0.05;
  double task_jitter = 0.1;
  std::uint64_t seed = 0;

  /// Throws ConfigError on invalid ranges.
  void validate() const;
};

/// Clustered linear tasks. Cluster c has a random unit direction u_c; task k,
/// assigned to cluster floor(k * clusters / K), uses
/// u_k = normalize(u_c + jitter * e_k) with e_k a random unit direction.
/// Inputs are uniform on the unit sphere, labels sign(<u_k, x>) flipped with
/// probability label_noise. Writes the u_k rows to `ground_truth` if given.
MultitaskDataset synth_clustered(const SynthConfig& config, WeightMatrix* ground_truth = nullptr);

/// L2-normalizes every example in place (zero vectors stay zero).
void normalize_examples(MultitaskDataset& dataset);

// ---------------------------------------------------------------------------

struct StreamItem {
  TaskId task;
  std::size_t index;  ///< into tasks[task].train

  friend bool operator==(const StreamItem&, const StreamItem&) = default;
};

struct StreamOrder {
  std::vector<StreamItem> items;
  std::uint64_t seed = 0;
};

/// Fisher-Yates over the pooled training examples (task-major initial order),
/// drawing from `rng`. The generator is left where a training run continues.
StreamOrder shuffle_stream(const MultitaskDataset& dataset, Rng& rng);
StreamOrder shuffle_stream(const MultitaskDataset& dataset, std::uint64_t seed);

}  // namespace amlc
