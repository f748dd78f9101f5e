#include "almn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "almn/error.hpp"

namespace almn {

Dataset::Dataset(Matrix features, std::vector<ClassId> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() != labels_.size())
    throw Error(ErrorCode::LabelFeatureCountMismatch, std::to_string(features_.rows()) + " feature rows vs " +
                                                          std::to_string(labels_.size()) + " labels");
  for (std::size_t i = 0; i < labels_.size(); ++i) class_index_[labels_[i]].push_back(i);
}

std::vector<ClassId> Dataset::classes() const {
  std::vector<ClassId> out;
  out.reserve(class_index_.size());
  for (const auto& [y, _] : class_index_) out.push_back(y);
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& items) const {
  Matrix f(items.size(), feature_dim());
  std::vector<ClassId> y(items.size());
  for (std::size_t t = 0; t < items.size(); ++t) {
    std::copy(features_.row(items[t]).begin(), features_.row(items[t]).end(), f.row(t).begin());
    y[t] = labels_[items[t]];
  }
  return Dataset(std::move(f), std::move(y));
}

std::pair<Dataset, Dataset> split_by_class(const Dataset& ds) {
  const auto classes = ds.classes();
  const std::set<ClassId> train_classes(classes.begin(), classes.begin() + classes.size() / 2);
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < ds.size(); ++i)
    (train_classes.count(ds.labels()[i]) ? train : test).push_back(i);
  return {ds.subset(train), ds.subset(test)};
}

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream is(state);
  is >> engine_;
  if (!is) throw Error(ErrorCode::MalformedFile, "unreadable rng state");
}

void BatchSpec::validate() const {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "batch needs m >= 2 classes");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "batch needs n >= 1 samples per class");
}

namespace {

/// First `count` entries of `pool` become a uniform sample without replacement.
template <typename T>
void partial_shuffle(std::vector<T>& pool, std::size_t count, std::mt19937_64& engine) {
  for (std::size_t t = 0; t < count; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, pool.size() - 1);
    std::swap(pool[t], pool[pick(engine)]);
  }
}

}  // namespace

std::vector<std::size_t> sample_batch(const Dataset& ds, const BatchSpec& spec, Rng& rng) {
  spec.validate();
  const auto& index = ds.class_index();
  if (index.size() < spec.m)
    throw Error(ErrorCode::InsufficientClasses, "dataset has " + std::to_string(index.size()) +
                                                    " classes, batch needs " + std::to_string(spec.m));
  std::vector<ClassId> eligible;
  for (const auto& [y, items] : index)
    if (items.size() >= spec.n) eligible.push_back(y);
  if (eligible.size() < spec.m)
    throw Error(ErrorCode::InsufficientSamplesInClass,
                "only " + std::to_string(eligible.size()) + " classes have " + std::to_string(spec.n) + " items");

  auto& engine = rng.engine();
  partial_shuffle(eligible, spec.m, engine);
  std::vector<std::size_t> out;
  out.reserve(spec.m * spec.n);
  for (std::size_t c = 0; c < spec.m; ++c) {
    std::vector<std::size_t> pool = index.at(eligible[c]);
    partial_shuffle(pool, spec.n, engine);
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(spec.n));
  }
  return out;
}

Dataset gen_multimodal(const MultimodalSpec& spec) {
  if (spec.classes < 1 || spec.subclusters_per_class < 1 || spec.points_per_class < 1)
    throw Error(ErrorCode::InvalidArgument, "gen_multimodal counts must be >= 1");
  if (spec.input_dim < 2) throw Error(ErrorCode::InvalidArgument, "gen_multimodal input_dim must be >= 2");
  if (!(spec.spread >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gen_multimodal spread must be >= 0");

  const auto p = static_cast<std::size_t>(spec.input_dim);
  const auto per_class = static_cast<std::size_t>(spec.points_per_class);
  const auto subs = static_cast<std::size_t>(spec.subclusters_per_class);
  std::mt19937_64 engine(spec.seed);
  std::uniform_real_distribution<double> mean_dist(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Matrix features(static_cast<std::size_t>(spec.classes) * per_class, p);
  std::vector<ClassId> labels(features.rows());
  std::size_t row = 0;
  for (int c = 0; c < spec.classes; ++c) {
    Matrix means(subs, p);
    for (double& v : means.flat()) v = mean_dist(engine);
    for (std::size_t s = 0; s < subs; ++s) {
      // Even split; the first (per_class % subs) subclusters take one extra point.
      const std::size_t count = per_class / subs + (s < per_class % subs ? 1 : 0);
      for (std::size_t t = 0; t < count; ++t, ++row) {
        for (std::size_t k = 0; k < p; ++k) features(row, k) = means(s, k) + spec.spread * noise(engine);
        labels[row] = c;
      }
    }
  }
  return Dataset(std::move(features), std::move(labels));
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset parse_csv(const std::string& text) {
  std::vector<double> values;
  std::vector<ClassId> labels;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    std::vector<std::string_view> fields;
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const auto where = "line " + std::to_string(line_no);
    if (fields.size() < 2) throw Error(ErrorCode::MalformedFile, where + ": need a label and at least one feature");
    if (width == 0) width = fields.size() - 1;
    if (fields.size() - 1 != width)
      throw Error(ErrorCode::MalformedFile, where + ": expected " + std::to_string(width) + " features, got " +
                                                std::to_string(fields.size() - 1));
    ClassId label = 0;
    auto lr = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), label);
    if (lr.ec != std::errc() || lr.ptr != fields[0].data() + fields[0].size())
      throw Error(ErrorCode::MalformedFile, where + ": bad label '" + std::string(fields[0]) + "'");
    labels.push_back(label);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      double v = 0.0;
      auto fr = std::from_chars(fields[f].data(), fields[f].data() + fields[f].size(), v);
      if (fr.ec != std::errc() || fr.ptr != fields[f].data() + fields[f].size() || !std::isfinite(v))
        throw Error(ErrorCode::MalformedFile, where + ": bad feature '" + std::string(fields[f]) + "'");
      values.push_back(v);
    }
  }
  if (labels.empty()) throw Error(ErrorCode::MalformedFile, "no data rows");
  Matrix features(labels.size(), width);
  std::copy(values.begin(), values.end(), features.flat().begin());
  return Dataset(std::move(features), std::move(labels));
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string format_csv(const Dataset& ds) {
  std::string out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += std::to_string(ds.labels()[i]);
    for (double v : ds.features().row(i)) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << format_csv(ds);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

namespace {

struct IdxHeader {
  std::vector<std::size_t> dims;
  std::size_t payload_offset = 0;
};

IdxHeader read_idx_header(const std::vector<std::uint8_t>& bytes, std::uint8_t expected_ndims, const char* what) {
  const std::string name(what);
  if (bytes.size() < 4) throw Error(ErrorCode::MalformedFile, name + ": truncated magic at offset 0");
  if (bytes[0] != 0 || bytes[1] != 0) throw Error(ErrorCode::MalformedFile, name + ": bad magic at offset 0");
  if (bytes[2] != 0x08) throw Error(ErrorCode::MalformedFile, name + ": only unsigned-byte payloads supported (offset 2)");
  if (bytes[3] != expected_ndims)
    throw Error(ErrorCode::MalformedFile, name + ": expected " + std::to_string(expected_ndims) +
                                              " dimensions at offset 3, got " + std::to_string(bytes[3]));
  IdxHeader h;
  std::size_t off = 4;
  for (std::uint8_t d = 0; d < expected_ndims; ++d, off += 4) {
    if (bytes.size() < off + 4)
      throw Error(ErrorCode::MalformedFile, name + ": truncated dimension at offset " + std::to_string(off));
    const std::size_t size = (std::size_t{bytes[off]} << 24) | (std::size_t{bytes[off + 1]} << 16) |
                             (std::size_t{bytes[off + 2]} << 8) | std::size_t{bytes[off + 3]};
    h.dims.push_back(size);
  }
  h.payload_offset = off;
  std::size_t payload = 1;
  for (std::size_t d : h.dims) payload *= d;
  if (bytes.size() != off + payload)
    throw Error(ErrorCode::MalformedFile, name + ": payload at offset " + std::to_string(off) + " has " +
                                              std::to_string(bytes.size() - off) + " bytes, header promises " +
                                              std::to_string(payload));
  return h;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Dataset parse_idx(const std::vector<std::uint8_t>& images, const std::vector<std::uint8_t>& labels) {
  const IdxHeader ih = read_idx_header(images, 3, "images");
  const IdxHeader lh = read_idx_header(labels, 1, "labels");
  const std::size_t count = ih.dims[0];
  if (lh.dims[0] != count)
    throw Error(ErrorCode::LabelFeatureCountMismatch,
                std::to_string(count) + " images vs " + std::to_string(lh.dims[0]) + " labels");
  const std::size_t width = ih.dims[1] * ih.dims[2];
  if (count == 0 || width == 0) throw Error(ErrorCode::MalformedFile, "images: empty payload");
  Matrix features(count, width);
  for (std::size_t i = 0; i < count * width; ++i)
    features.flat()[i] = static_cast<double>(images[ih.payload_offset + i]) / 255.0;
  std::vector<ClassId> y(count);
  for (std::size_t i = 0; i < count; ++i) y[i] = labels[lh.payload_offset + i];
  return Dataset(std::move(features), std::move(y));
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  return parse_idx(read_bytes(images), read_bytes(labels));
}

}  // namespace almn
