#include "ccf/feature_bank.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "ccf/error.hpp"
#include "ccf/rng.hpp"

namespace ccf {

namespace {

constexpr char kMagic[4] = {'F', 'B', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

// --- little-endian primitives ---------------------------------------------

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class ByteReader {
 public:
  ByteReader(const std::string& buf, std::string context)
      : buf_(buf), context_(std::move(context)) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() {
    const char* p = take(2);
    return static_cast<std::uint16_t>(byte(p, 0) | (byte(p, 1) << 8));
  }
  std::uint32_t u32() {
    const char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(p, i)) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte(p, i)) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string bytes(std::size_t n) { return std::string(take(n), n); }

  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  static std::uint32_t byte(const char* p, int i) {
    return static_cast<std::uint8_t>(p[i]);
  }
  const char* take(std::size_t n) {
    if (pos_ + n > buf_.size())
      throw FormatError(context_ + ": truncated file");
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  const std::string& buf_;
  std::string context_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// --- binary container -------------------------------------------------------

FeatureBank load_binary(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  ByteReader r(buf, path.string());

  const std::string magic = r.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0)
    throw FormatError(path.string() + ": bad magic, not a feature bank");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw FormatError(path.string() + ": unsupported version " + std::to_string(version));

  const std::uint32_t dim = r.u32();
  const std::uint32_t n_classes = r.u32();
  const std::uint64_t n_samples = r.u64();

  std::vector<Split> splits(n_classes);
  std::vector<std::string> names(n_classes);
  bool any_name = false;
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    const std::uint8_t tag = r.u8();
    if (tag > 2)
      throw FormatError(path.string() + ": bad split tag " + std::to_string(tag));
    splits[c] = static_cast<Split>(tag);
    const std::uint16_t len = r.u16();
    names[c] = r.bytes(len);
    any_name = any_name || len > 0;
  }

  const std::uint64_t expected = n_samples * (4ull + 4ull * dim);
  if (r.remaining() != expected)
    throw FormatError(path.string() + ": sample section size mismatch (" +
                      std::to_string(r.remaining()) + " bytes, expected " +
                      std::to_string(expected) + ")");

  Matrix features(n_samples, dim);
  std::vector<std::uint32_t> labels(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    labels[i] = r.u32();
    for (std::uint32_t j = 0; j < dim; ++j) {
      const float f = r.f32();
      if (!std::isfinite(f))
        throw DataError(path.string() + ": non-finite feature at sample " +
                        std::to_string(i));
      features(i, j) = static_cast<double>(f);
    }
  }

  if (!any_name) names.clear();
  return FeatureBank(std::move(features), std::move(labels), std::move(splits),
                     std::move(names));
}

void save_binary(const FeatureBank& bank, const std::filesystem::path& path) {
  std::string out;
  out.reserve(24 + bank.n_samples() * (4 + 4 * bank.feature_dim()));
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(bank.feature_dim()));
  put_u32(out, static_cast<std::uint32_t>(bank.n_classes()));
  put_u64(out, bank.n_samples());
  const auto& names = bank.class_names();
  for (std::uint32_t c = 0; c < bank.n_classes(); ++c) {
    out.push_back(static_cast<char>(bank.class_split(c)));
    const std::string& name = names.empty() ? std::string() : names[c];
    if (name.size() > 0xffff)
      throw DataError("class name too long for container: " + name.substr(0, 32));
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.append(name);
  }
  for (std::size_t i = 0; i < bank.n_samples(); ++i) {
    put_u32(out, bank.label(i));
    for (double v : bank.sample(i)) put_f32(out, static_cast<float>(v));
  }
  write_file(path, out);
}

// --- csv container -----------------------------------------------------------

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

FeatureBank load_csv(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  std::istringstream in(buf);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_fields(line);
  if (header.empty() || header[0] != "class_id")
    throw FormatError(path.string() + ": header must start with class_id");
  const std::size_t dim = header.size() - 1;
  for (std::size_t j = 0; j < dim; ++j)
    if (header[j + 1] != "f" + std::to_string(j))
      throw FormatError(path.string() + ": header column " + std::to_string(j + 1) +
                        " must be f" + std::to_string(j));

  std::vector<std::uint32_t> labels;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != dim + 1)
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dim + 1) + " fields, got " +
                        std::to_string(fields.size()));
    std::uint32_t label = 0;
    {
      const auto& f = fields[0];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
      if (ec != std::errc() || p != f.data() + f.size())
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": bad class_id '" + f + "'");
    }
    labels.push_back(label);
    for (std::size_t j = 0; j < dim; ++j) {
      const auto& f = fields[j + 1];
      double v = 0.0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size())
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": bad value '" + f + "'");
      if (!std::isfinite(v))
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": non-finite feature value");
      values.push_back(quantize_f32(v));
    }
  }

  const std::filesystem::path splits_file = csv_splits_path(path);
  if (!std::filesystem::exists(splits_file))
    throw FormatError("missing companion splits file " + splits_file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(splits_file));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(splits_file.string() + ": " + e.what());
  }
  if (!doc.is_object())
    throw FormatError(splits_file.string() + ": expected a JSON object");

  std::size_t n_classes = 0;
  for (const auto& [key, value] : doc.items()) {
    if (key != "base" && key != "val" && key != "novel" && key != "names")
      throw FormatError(splits_file.string() + ": unknown key '" + key + "'");
    if (key == "names") continue;
    if (!value.is_array() || !std::all_of(value.begin(), value.end(),
                                          [](const nlohmann::json& v) {
                                            return v.is_number_unsigned();
                                          }))
      throw FormatError(splits_file.string() + ": '" + key +
                        "' must be a list of class ids");
    for (const auto& id : value)
      n_classes = std::max(n_classes, static_cast<std::size_t>(id.get<std::uint64_t>()) + 1);
  }

  std::vector<Split> class_splits(n_classes);
  std::vector<bool> assigned(n_classes, false);
  for (Split s : {Split::base, Split::val, Split::novel}) {
    const char* key = split_name(s);
    if (!doc.contains(key)) continue;
    for (const auto& id_json : doc[key]) {
      const auto id = id_json.get<std::uint64_t>();
      if (assigned[id])
        throw DataError(splits_file.string() + ": class " + std::to_string(id) +
                        " assigned to more than one split");
      assigned[id] = true;
      class_splits[id] = s;
    }
  }
  for (std::size_t c = 0; c < n_classes; ++c)
    if (!assigned[c])
      throw DataError(splits_file.string() + ": class " + std::to_string(c) +
                      " missing from the split map");

  std::vector<std::string> names;
  if (doc.contains("names")) {
    names = doc["names"].get<std::vector<std::string>>();
    if (names.size() != n_classes)
      throw DataError(splits_file.string() + ": names list must have one entry per class");
  }

  Matrix features(labels.size(), dim);
  std::copy(values.begin(), values.end(), features.data());
  return FeatureBank(std::move(features), std::move(labels), std::move(class_splits),
                     std::move(names));
}

void save_csv(const FeatureBank& bank, const std::filesystem::path& path) {
  std::string out = "class_id";
  for (std::size_t j = 0; j < bank.feature_dim(); ++j) out += ",f" + std::to_string(j);
  out.push_back('\n');
  for (std::size_t i = 0; i < bank.n_samples(); ++i) {
    out += std::to_string(bank.label(i));
    for (double v : bank.sample(i)) {
      out.push_back(',');
      out += format_double(quantize_f32(v));
    }
    out.push_back('\n');
  }
  write_file(path, out);

  nlohmann::ordered_json doc;
  for (Split s : {Split::base, Split::val, Split::novel})
    doc[split_name(s)] = bank.classes_of(s);
  if (!bank.class_names().empty()) doc["names"] = bank.class_names();
  write_file(csv_splits_path(path), doc.dump(2) + "\n");
}

}  // namespace

const char* split_name(Split s) {
  switch (s) {
    case Split::base: return "base";
    case Split::val: return "val";
    case Split::novel: return "novel";
  }
  return "?";
}

Split split_from_name(const std::string& name) {
  if (name == "base") return Split::base;
  if (name == "val" || name == "validation") return Split::val;
  if (name == "novel") return Split::novel;
  throw std::invalid_argument("unknown split '" + name + "' (base|val|novel)");
}

FeatureBank::FeatureBank(Matrix features, std::vector<std::uint32_t> sample_classes,
                         std::vector<Split> class_splits,
                         std::vector<std::string> class_names)
    : features_(std::move(features)),
      sample_classes_(std::move(sample_classes)),
      class_splits_(std::move(class_splits)),
      class_names_(std::move(class_names)) {
  if (features_.rows() != sample_classes_.size())
    throw DataError("feature bank: one class id required per sample");
  if (!class_names_.empty() && class_names_.size() != class_splits_.size())
    throw DataError("feature bank: names must be empty or one per class");
  if (!features_.all_finite())
    throw DataError("feature bank: non-finite feature values");

  by_class_.resize(class_splits_.size());
  for (std::size_t i = 0; i < sample_classes_.size(); ++i) {
    const std::uint32_t c = sample_classes_[i];
    if (c >= class_splits_.size())
      throw DataError("feature bank: sample " + std::to_string(i) +
                      " references undeclared class " + std::to_string(c));
    by_class_[c].push_back(static_cast<std::uint32_t>(i));
  }
  for (std::size_t c = 0; c < by_class_.size(); ++c)
    if (by_class_[c].empty())
      throw DataError("feature bank: class " + std::to_string(c) + " has no samples");
}

Split FeatureBank::class_split(std::uint32_t class_id) const {
  if (class_id >= class_splits_.size())
    throw std::invalid_argument("class id out of range");
  return class_splits_[class_id];
}

const std::vector<std::uint32_t>& FeatureBank::class_samples(std::uint32_t class_id) const {
  if (class_id >= by_class_.size())
    throw std::invalid_argument("class id out of range");
  return by_class_[class_id];
}

std::vector<std::uint32_t> FeatureBank::classes_of(Split s) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t c = 0; c < class_splits_.size(); ++c)
    if (class_splits_[c] == s) out.push_back(c);
  return out;
}

std::vector<std::uint32_t> FeatureBank::samples_of(Split s) const {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < sample_classes_.size(); ++i)
    if (class_splits_[sample_classes_[i]] == s) out.push_back(static_cast<std::uint32_t>(i));
  return out;
}

bool FeatureBank::operator==(const FeatureBank& other) const {
  return features_ == other.features_ && sample_classes_ == other.sample_classes_ &&
         class_splits_ == other.class_splits_ && class_names_ == other.class_names_;
}

BankFormat bank_format_from_extension(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".fbk") return BankFormat::binary;
  if (ext == ".csv") return BankFormat::csv;
  throw UsageError("cannot infer bank format from '" + path.string() +
                   "' (expected .fbk or .csv)");
}

std::filesystem::path csv_splits_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".splits.json");
  return p;
}

FeatureBank load_bank(const std::filesystem::path& path, BankFormat format) {
  if (!std::filesystem::exists(path)) throw DataError("no such file: " + path.string());
  return format == BankFormat::binary ? load_binary(path) : load_csv(path);
}

void save_bank(const FeatureBank& bank, const std::filesystem::path& path,
               BankFormat format) {
  if (format == BankFormat::binary)
    save_binary(bank, path);
  else
    save_csv(bank, path);
}

void SyntheticSpec::validate() const {
  if (n_base_classes == 0 || n_val_classes == 0 || n_novel_classes == 0)
    throw UsageError("synthetic spec: class counts must be positive");
  if (feature_dim == 0) throw UsageError("synthetic spec: feature_dim must be positive");
  if (samples_per_class == 0)
    throw UsageError("synthetic spec: samples_per_class must be positive");
  if (!(within_class_stddev >= 0.0))
    throw UsageError("synthetic spec: within_class_stddev must be >= 0");
  if (!(centroid_scale > 0.0))
    throw UsageError("synthetic spec: centroid_scale must be positive");
  if (!(novel_correlation >= 0.0 && novel_correlation <= 1.0))
    throw UsageError("synthetic spec: novel_correlation must be in [0,1]");
}

FeatureBank generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t dim = spec.feature_dim;
  const std::size_t n_classes =
      spec.n_base_classes + spec.n_val_classes + spec.n_novel_classes;

  Matrix centroids(n_classes, dim);
  for (std::size_t c = 0; c < spec.n_base_classes; ++c)
    for (std::size_t j = 0; j < dim; ++j)
      centroids(c, j) = spec.centroid_scale * rng.normal();

  // Val and novel centroids: convex mixture of 2-3 base centroids blended
  // with a fresh direction by novel_correlation.
  for (std::size_t c = spec.n_base_classes; c < n_classes; ++c) {
    std::size_t n_mix = 2 + rng.below(2);
    n_mix = std::min(n_mix, spec.n_base_classes);
    const auto picks = rng.sample_without_replacement(
        static_cast<std::uint32_t>(spec.n_base_classes), static_cast<std::uint32_t>(n_mix));
    std::vector<double> w(n_mix);
    double wsum = 0.0;
    for (auto& wi : w) {
      wi = rng.uniform();
      wsum += wi;
    }
    if (wsum < 1e-12) {
      std::fill(w.begin(), w.end(), 1.0);
      wsum = static_cast<double>(n_mix);
    }
    for (std::size_t j = 0; j < dim; ++j) {
      double mix = 0.0;
      for (std::size_t m = 0; m < n_mix; ++m) mix += (w[m] / wsum) * centroids(picks[m], j);
      const double fresh = spec.centroid_scale * rng.normal();
      centroids(c, j) =
          spec.novel_correlation * mix + (1.0 - spec.novel_correlation) * fresh;
    }
  }

  const std::size_t n_samples = n_classes * spec.samples_per_class;
  Matrix features(n_samples, dim);
  std::vector<std::uint32_t> labels(n_samples);
  std::size_t row = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
      labels[row] = static_cast<std::uint32_t>(c);
      for (std::size_t j = 0; j < dim; ++j)
        features(row, j) =
            quantize_f32(centroids(c, j) + spec.within_class_stddev * rng.normal());
    }
  }

  std::vector<Split> splits(n_classes, Split::novel);
  for (std::size_t c = 0; c < spec.n_base_classes; ++c) splits[c] = Split::base;
  for (std::size_t c = spec.n_base_classes; c < spec.n_base_classes + spec.n_val_classes; ++c)
    splits[c] = Split::val;

  return FeatureBank(std::move(features), std::move(labels), std::move(splits));
}

Matrix class_centroids(const FeatureBank& bank, Split split) {
  const auto classes = bank.classes_of(split);
  if (classes.empty())
    throw std::invalid_argument(std::string("class_centroids: split '") +
                                split_name(split) + "' is empty");
  Matrix means(classes.size(), bank.feature_dim());
  for (std::size_t r = 0; r < classes.size(); ++r) {
    const auto& members = bank.class_samples(classes[r]);
    for (std::uint32_t idx : members) {
      const auto x = bank.sample(idx);
      for (std::size_t j = 0; j < bank.feature_dim(); ++j) means(r, j) += x[j];
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (std::size_t j = 0; j < bank.feature_dim(); ++j) means(r, j) *= inv;
  }
  return means;
}

}  // namespace ccf
