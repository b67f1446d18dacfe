#include "amlc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "amlc/errors.hpp"
#include "amlc/io.hpp"

namespace amlc {

std::size_t MultitaskDataset::train_size() const {
  std::size_t n = 0;
  for (const auto& t : tasks) n += t.train.size();
  return n;
}

std::size_t MultitaskDataset::test_size() const {
  std::size_t n = 0;
  for (const auto& t : tasks) n += t.test.size();
  return n;
}

FeatureIndex MultitaskDataset::feature_extent() const {
  FeatureIndex extent = 0;
  for (const auto& t : tasks) {
    for (const auto* split : {&t.train, &t.test}) {
      for (const auto& e : *split) extent = std::max(extent, e.x.extent());
    }
  }
  return extent;
}

void MultitaskDataset::validate() const {
  for (TaskId k = 0; k < tasks.size(); ++k) {
    for (const auto* split : {&tasks[k].train, &tasks[k].test}) {
      for (const auto& e : *split) {
        if (e.task != k) {
          throw DataError("example in task " + std::to_string(k + 1) + " is tagged with task " +
                          std::to_string(e.task + 1));
        }
      }
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

std::string_view strip_comment(std::string_view s) {
  const auto hash = s.find('#');
  return hash == std::string_view::npos ? s : s.substr(0, hash);
}

double parse_real(std::string_view tok, const char* what) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw DataError(std::string("invalid ") + what + " '" + std::string(tok) + "'");
  }
  return v;
}

template <typename Int>
Int parse_unsigned(std::string_view tok, const char* what) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw DataError(std::string("invalid ") + what + " '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::optional<Example> parse_sparse_line(std::string_view line, TaskId task) {
  line = trim(strip_comment(line));
  if (line.empty()) return std::nullopt;

  std::vector<std::string_view> tokens;
  for (std::size_t pos = 0; pos < line.size();) {
    const auto start = line.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    auto end = line.find_first_of(" \t", start);
    if (end == std::string_view::npos) end = line.size();
    tokens.push_back(line.substr(start, end - start));
    pos = end;
  }

  const double label = parse_real(tokens.front(), "label");
  if (label != 1.0 && label != -1.0) {
    throw DataError("label must be +1 or -1, got '" + std::string(tokens.front()) + "'");
  }

  std::vector<SparseEntry> entries;
  entries.reserve(tokens.size() - 1);
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto tok = tokens[i];
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) {
      throw DataError("expected <index>:<value>, got '" + std::string(tok) + "'");
    }
    const auto index = parse_unsigned<FeatureIndex>(tok.substr(0, colon), "feature index");
    const double value = parse_real(tok.substr(colon + 1), "feature value");
    if (!entries.empty()) {
      if (index == entries.back().index) {
        throw DataError("duplicate feature index " + std::to_string(index));
      }
      if (index < entries.back().index) {
        throw DataError("feature indices must be strictly increasing (" + std::to_string(index) +
                        " after " + std::to_string(entries.back().index) + ")");
      }
    }
    entries.push_back({index, value});
  }

  return Example{SparseVector::from_sorted(std::move(entries)),
                 label > 0 ? Label::positive : Label::negative, task};
}

std::vector<Example> read_sparse_file(const std::filesystem::path& path, TaskId task) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file " + path.string());
  std::vector<Example> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      if (auto ex = parse_sparse_line(line, task)) out.push_back(std::move(*ex));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string format_sparse_line(const Example& example) {
  std::string out = example.y == Label::positive ? "+1" : "-1";
  char buf[64];
  for (const auto& e : example.x.entries()) {
    out += ' ';
    auto r = std::to_chars(buf, buf + sizeof buf, e.index);
    out.append(buf, r.ptr);
    out += ':';
    r = std::to_chars(buf, buf + sizeof buf, e.value);
    out.append(buf, r.ptr);
  }
  return out;
}

void write_sparse_file(const std::filesystem::path& path, std::span<const Example> examples) {
  std::string content;
  for (const auto& e : examples) {
    content += format_sparse_line(e);
    content += '\n';
  }
  write_file_atomic(path, content);
}

// ---------------------------------------------------------------------------

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  auto resolve = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_absolute() ? p : base / p;
  };

  Manifest m;
  std::map<std::size_t, ManifestTask> tasks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto where = path.string() + ":" + std::to_string(lineno) + ": ";
    const auto body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw DataError(where + "expected key = value");
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    try {
      if (key == "name") {
        m.name = std::string(value);
      } else if (key == "feature_count_hint") {
        m.feature_count_hint = parse_unsigned<std::size_t>(value, "feature_count_hint");
      } else if (key == "train_per_task") {
        m.train_per_task = parse_unsigned<std::size_t>(value, "train_per_task");
      } else if (key == "test_per_task") {
        m.test_per_task = parse_unsigned<std::size_t>(value, "test_per_task");
      } else if (key == "split_seed") {
        m.split_seed = parse_unsigned<std::uint64_t>(value, "split_seed");
      } else if (key.starts_with("task.")) {
        const auto rest = key.substr(5);
        const auto dot_pos = rest.find('.');
        if (dot_pos == std::string_view::npos) throw DataError("expected task.<id>.<train|test|data>");
        const auto id = parse_unsigned<std::size_t>(rest.substr(0, dot_pos), "task id");
        if (id == 0) throw DataError("task ids start at 1");
        const auto field = rest.substr(dot_pos + 1);
        auto& t = tasks[id];
        if (field == "train") {
          t.train = resolve(value);
        } else if (field == "test") {
          t.test = resolve(value);
        } else if (field == "data") {
          t.data = resolve(value);
        } else {
          throw DataError("unknown task field '" + std::string(field) + "'");
        }
      } else {
        throw DataError("unknown key '" + std::string(key) + "'");
      }
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }

  if (tasks.empty()) throw DataError(path.string() + ": manifest lists no tasks");
  std::size_t expected = 1;
  for (auto& [id, t] : tasks) {
    const auto label = path.string() + ": task " + std::to_string(id);
    if (id != expected) throw DataError(label + ": task ids must be dense 1..K");
    ++expected;
    if (t.data && (t.train || t.test)) throw DataError(label + ": use either data or train/test");
    if (!t.data && !t.train) throw DataError(label + ": needs a train or data file");
    if (t.data && !m.train_per_task) {
      throw DataError(label + ": pooled data files need train_per_task");
    }
    m.tasks.push_back(std::move(t));
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ostringstream out;
  out << "# amlc dataset manifest\n";
  if (!m.name.empty()) out << "name = " << m.name << '\n';
  if (m.feature_count_hint) out << "feature_count_hint = " << *m.feature_count_hint << '\n';
  if (m.train_per_task) out << "train_per_task = " << *m.train_per_task << '\n';
  if (m.test_per_task) out << "test_per_task = " << *m.test_per_task << '\n';
  if (m.split_seed != 0) out << "split_seed = " << m.split_seed << '\n';
  for (std::size_t i = 0; i < m.tasks.size(); ++i) {
    const auto& t = m.tasks[i];
    const auto prefix = "task." + std::to_string(i + 1) + ".";
    if (t.data) out << prefix << "data = " << t.data->generic_string() << '\n';
    if (t.train) out << prefix << "train = " << t.train->generic_string() << '\n';
    if (t.test) out << prefix << "test = " << t.test->generic_string() << '\n';
  }
  write_file_atomic(path, out.str());
}

MultitaskDataset load_sparse_dataset(const std::filesystem::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  const std::size_t K = m.tasks.size();

  MultitaskDataset ds;
  ds.name = m.name.empty() ? manifest_path.stem().string() : m.name;
  ds.feature_count_hint = m.feature_count_hint;
  ds.provenance = "manifest " + manifest_path.string();
  ds.tasks.resize(K);

  std::vector<std::vector<Example>> pooled(K);
  bool any_pooled = false;
  for (TaskId k = 0; k < K; ++k) {
    const auto& t = m.tasks[k];
    if (t.data) {
      pooled[k] = read_sparse_file(*t.data, k);
      any_pooled = true;
    } else {
      ds.tasks[k].train = read_sparse_file(*t.train, k);
      if (t.test) ds.tasks[k].test = read_sparse_file(*t.test, k);
    }
  }

  if (any_pooled) {
    // Split only the pooled tasks, in task order, from one generator.
    std::vector<TaskId> which;
    std::vector<std::vector<Example>> raw;
    for (TaskId k = 0; k < K; ++k) {
      if (m.tasks[k].data) {
        which.push_back(k);
        raw.push_back(std::move(pooled[k]));
      }
    }
    auto split = split_train_test(std::move(raw), *m.train_per_task, m.test_per_task, m.split_seed);
    for (std::size_t i = 0; i < which.size(); ++i) {
      for (auto* part : {&split.tasks[i].train, &split.tasks[i].test}) {
        for (auto& e : *part) e.task = which[i];
      }
      ds.tasks[which[i]] = std::move(split.tasks[i]);
    }
    ds.provenance += "; split seed " + std::to_string(m.split_seed) + ", " +
                     std::to_string(*m.train_per_task) + " train per task";
  }

  for (TaskId k = 0; k < K; ++k) {
    if (ds.tasks[k].train.empty()) {
      throw DataError(manifest_path.string() + ": task " + std::to_string(k + 1) + " has no training examples");
    }
  }
  ds.validate();
  return ds;
}

MultitaskDataset split_train_test(std::vector<std::vector<Example>> raw, std::size_t train_per_task,
                                  std::optional<std::size_t> test_per_task, std::uint64_t seed) {
  Rng rng(seed);
  MultitaskDataset ds;
  ds.tasks.resize(raw.size());
  for (TaskId k = 0; k < raw.size(); ++k) {
    auto& examples = raw[k];
    const std::size_t n = examples.size();
    if (n < train_per_task) {
      throw DataError("task " + std::to_string(k + 1) + " has " + std::to_string(n) +
                      " examples, fewer than the " + std::to_string(train_per_task) + " requested for training");
    }
    if (n == train_per_task) {
      throw DataError("task " + std::to_string(k + 1) + " would have an empty test set");
    }

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);

    std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(train_per_task));
    std::size_t test_end = n;
    if (test_per_task) test_end = std::min(n, train_per_task + *test_per_task);
    std::vector<std::size_t> test_idx(perm.begin() + static_cast<std::ptrdiff_t>(train_per_task),
                                      perm.begin() + static_cast<std::ptrdiff_t>(test_end));
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    for (auto i : train_idx) {
      examples[i].task = k;
      ds.tasks[k].train.push_back(std::move(examples[i]));
    }
    for (auto i : test_idx) {
      examples[i].task = k;
      ds.tasks[k].test.push_back(std::move(examples[i]));
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------

void SynthConfig::validate() const {
  if (tasks == 0) throw ConfigError("synthetic data needs at least one task");
  if (clusters == 0 || clusters > tasks) throw ConfigError("clusters must be in [1, tasks]");
  if (dim == 0) throw ConfigError("dimension must be positive");
  if (n_train == 0) throw ConfigError("n_train must be positive");
  if (!(label_noise >= 0.0 && label_noise < 0.5)) throw ConfigError("label_noise must be in [0, 0.5)");
  if (!(task_jitter >= 0.0) || !std::isfinite(task_jitter)) throw ConfigError("task_jitter must be >= 0");
}

namespace {

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& c : v) {
      c = rng.normal();
      norm2 += c * c;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& c : v) c *= inv;
  return v;
}

double dense_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

MultitaskDataset synth_clustered(const SynthConfig& cfg, WeightMatrix* ground_truth) {
  cfg.validate();
  Rng rng(cfg.seed);

  std::vector<std::vector<double>> centers;
  for (std::size_t c = 0; c < cfg.clusters; ++c) centers.push_back(random_unit(rng, cfg.dim));

  std::vector<std::vector<double>> truth(cfg.tasks);
  for (TaskId k = 0; k < cfg.tasks; ++k) {
    const auto& center = centers[k * cfg.clusters / cfg.tasks];
    const auto jitter = random_unit(rng, cfg.dim);
    std::vector<double> u(cfg.dim);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < cfg.dim; ++i) {
      u[i] = center[i] + cfg.task_jitter * jitter[i];
      norm2 += u[i] * u[i];
    }
    // jitter == 1 with e_k = -u_c is a measure-zero event; fall back to u_c.
    if (norm2 == 0.0) {
      u = center;
      norm2 = 1.0;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& v : u) v *= inv;
    truth[k] = std::move(u);
  }

  MultitaskDataset ds;
  ds.name = "synthetic";
  ds.feature_count_hint = cfg.dim;
  ds.provenance = "synth_clustered K=" + std::to_string(cfg.tasks) + " clusters=" + std::to_string(cfg.clusters) +
                  " D=" + std::to_string(cfg.dim) + " seed=" + std::to_string(cfg.seed);
  ds.tasks.resize(cfg.tasks);
  for (TaskId k = 0; k < cfg.tasks; ++k) {
    auto draw = [&](std::size_t count, std::vector<Example>& into) {
      into.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> x;
        double margin = 0.0;
        do {
          x = random_unit(rng, cfg.dim);
          margin = dense_dot(truth[k], x);
        } while (margin == 0.0);
        Label y = margin > 0.0 ? Label::positive : Label::negative;
        if (rng.uniform() < cfg.label_noise) y = y == Label::positive ? Label::negative : Label::positive;
        into.push_back(Example{SparseVector::from_dense(x), y, k});
      }
    };
    draw(cfg.n_train, ds.tasks[k].train);
    draw(cfg.n_test, ds.tasks[k].test);
  }

  if (ground_truth) {
    *ground_truth = WeightMatrix(cfg.tasks);
    for (TaskId k = 0; k < cfg.tasks; ++k) ground_truth->row(k) = SparseVector::from_dense(truth[k]);
  }
  return ds;
}

void normalize_examples(MultitaskDataset& dataset) {
  for (auto& t : dataset.tasks) {
    for (auto* split : {&t.train, &t.test}) {
      for (auto& e : *split) {
        const double n2 = e.x.squared_norm();
        if (n2 > 0.0) e.x.scale(1.0 / std::sqrt(n2));
      }
    }
  }
}

// ---------------------------------------------------------------------------

StreamOrder shuffle_stream(const MultitaskDataset& dataset, Rng& rng) {
  StreamOrder order;
  order.items.reserve(dataset.train_size());
  for (TaskId k = 0; k < dataset.task_count(); ++k) {
    for (std::size_t i = 0; i < dataset.tasks[k].train.size(); ++i) order.items.push_back({k, i});
  }
  auto& items = order.items;
  for (std::size_t i = items.size(); i-- > 1;) std::swap(items[i], items[rng.uniform_index(i + 1)]);
  return order;
}

StreamOrder shuffle_stream(const MultitaskDataset& dataset, std::uint64_t seed) {
  Rng rng(seed);
  auto order = shuffle_stream(dataset, rng);
  order.seed = seed;
  return order;
}

}  // namespace amlc
