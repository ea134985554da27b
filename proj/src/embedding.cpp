#include "ideal/embedding.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "ideal/error.hpp"

namespace ideal {
namespace {

constexpr std::array<char, 8> kRawMagic = {'I', 'D', 'E', 'A', 'L', 'E', 'M', 'B'};

std::string row_label(std::size_t row) { return "row " + std::to_string(row + 1); }

std::ifstream open_for_read(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) fail_io("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_for_write(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? (std::ios::binary | std::ios::trunc) : std::ios::trunc);
  if (!out) fail_io("cannot open '" + path.string() + "' for writing");
  return out;
}

// Accumulates rows while enforcing a single dimension.
struct RowBuilder {
  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t dim = 0;

  void add(std::string id, const std::vector<double>& row) {
    const std::size_t index = ids.size();
    if (row.empty()) fail_validation("empty vector at " + row_label(index));
    if (index == 0) {
      dim = row.size();
    } else if (row.size() != dim) {
      fail_validation("dimension mismatch at " + row_label(index) + ": expected " +
                      std::to_string(dim) + ", got " + std::to_string(row.size()));
    }
    ids.push_back(std::move(id));
    values.insert(values.end(), row.begin(), row.end());
  }

  EmbeddingSet finish(const std::filesystem::path& path) {
    if (ids.empty()) fail_validation("empty file '" + path.string() + "'");
    return EmbeddingSet::create(std::move(ids), std::move(values), dim);
  }
};

double parse_double(std::string_view text, std::size_t row) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc::result_out_of_range) {
    fail_validation("non-finite value at " + row_label(row));
  }
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail_validation("cannot parse number '" + std::string(text) + "' at " + row_label(row));
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string format_double(double value) {
  std::array<char, 32> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), ptr);
}

EmbeddingSet load_jsonl(const std::filesystem::path& path) {
  auto in = open_for_read(path, false);
  RowBuilder rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::size_t row = rows.ids.size();
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail_validation("malformed JSON at " + row_label(row) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record.contains("vector")) {
      fail_validation("record at " + row_label(row) + " needs 'id' and 'vector'");
    }
    const auto& id = record["id"];
    std::string id_text;
    if (id.is_string()) {
      id_text = id.get<std::string>();
    } else if (id.is_number_integer()) {
      id_text = id.dump();
    } else {
      fail_validation("id at " + row_label(row) + " must be a string");
    }
    const auto& vec = record["vector"];
    if (!vec.is_array()) fail_validation("'vector' at " + row_label(row) + " must be an array");
    std::vector<double> values;
    values.reserve(vec.size());
    for (const auto& x : vec) {
      if (!x.is_number()) fail_validation("non-numeric vector entry at " + row_label(row));
      values.push_back(x.get<double>());
    }
    rows.add(std::move(id_text), values);
  }
  return rows.finish(path);
}

EmbeddingSet load_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path, false);
  std::string line;
  if (!std::getline(in, line)) fail_validation("empty file '" + path.string() + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 2 || header[0] != "id") {
    fail_validation("csv header must be 'id,v0,...,v{d-1}'");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != "v" + std::to_string(j - 1)) {
      fail_validation("csv header column " + std::to_string(j) + " must be 'v" +
                      std::to_string(j - 1) + "'");
    }
  }
  const std::size_t dim = header.size() - 1;
  RowBuilder rows;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t row = rows.ids.size();
    const auto fields = split_commas(line);
    if (fields.size() - 1 != dim) {
      fail_validation("dimension mismatch at " + row_label(row) + ": expected " +
                      std::to_string(dim) + ", got " + std::to_string(fields.size() - 1));
    }
    values.clear();
    for (std::size_t j = 1; j < fields.size(); ++j) values.push_back(parse_double(fields[j], row));
    rows.add(std::string(fields[0]), values);
  }
  return rows.finish(path);
}

std::uint32_t read_u32_le(const unsigned char* bytes) {
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t value) {
  const char bytes[4] = {static_cast<char>(value & 0xff), static_cast<char>((value >> 8) & 0xff),
                         static_cast<char>((value >> 16) & 0xff),
                         static_cast<char>((value >> 24) & 0xff)};
  out.write(bytes, 4);
}

EmbeddingSet load_raw_f32(const std::filesystem::path& path) {
  auto in = open_for_read(path, true);
  std::array<unsigned char, 16> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() == 0) fail_validation("empty file '" + path.string() + "'");
  if (in.gcount() != 16 || std::memcmp(header.data(), kRawMagic.data(), kRawMagic.size()) != 0) {
    fail_validation("'" + path.string() + "' is not an IDEALEMB file");
  }
  const std::uint32_t n = read_u32_le(header.data() + 8);
  const std::uint32_t d = read_u32_le(header.data() + 12);
  if (n == 0) fail_validation("empty file '" + path.string() + "'");
  if (d == 0) fail_validation("raw-f32 header declares dimension 0");

  std::vector<std::string> ids(n);
  std::vector<double> values(static_cast<std::size_t>(n) * d);
  std::vector<unsigned char> buffer(static_cast<std::size_t>(d) * 4);
  for (std::uint32_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
    if (static_cast<std::size_t>(in.gcount()) != buffer.size()) {
      fail_validation("truncated raw-f32 data at " + row_label(i));
    }
    for (std::uint32_t j = 0; j < d; ++j) {
      values[static_cast<std::size_t>(i) * d + j] =
          std::bit_cast<float>(read_u32_le(buffer.data() + 4 * j));
    }
    ids[i] = std::to_string(i);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    fail_validation("trailing bytes after " + std::to_string(n) + " raw-f32 rows");
  }
  return EmbeddingSet::create(std::move(ids), std::move(values), d);
}

}  // namespace

EmbeddingFormat parse_embedding_format(std::string_view name) {
  if (name == "jsonl") return EmbeddingFormat::jsonl;
  if (name == "csv") return EmbeddingFormat::csv;
  if (name == "raw-f32") return EmbeddingFormat::raw_f32;
  fail_usage("unknown embedding format '" + std::string(name) +
             "' (expected jsonl, csv or raw-f32)");
}

std::string_view format_name(EmbeddingFormat format) {
  switch (format) {
    case EmbeddingFormat::jsonl: return "jsonl";
    case EmbeddingFormat::csv: return "csv";
    case EmbeddingFormat::raw_f32: return "raw-f32";
  }
  return "unknown";
}

EmbeddingFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") return EmbeddingFormat::jsonl;
  if (ext == ".csv") return EmbeddingFormat::csv;
  if (ext == ".f32" || ext == ".bin" || ext == ".raw") return EmbeddingFormat::raw_f32;
  fail_usage("cannot infer embedding format from '" + path.string() + "'; pass --format");
}

EmbeddingSet EmbeddingSet::create(std::vector<std::string> ids, std::vector<double> values,
                                  std::size_t dim) {
  if (dim == 0) fail_validation("embedding dimension must be at least 1");
  if (ids.empty()) fail_validation("embedding set is empty");
  if (values.size() != ids.size() * dim) {
    fail_validation("expected " + std::to_string(ids.size() * dim) + " values, got " +
                    std::to_string(values.size()));
  }
  std::unordered_map<std::string_view, std::size_t> seen;
  seen.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto [it, inserted] = seen.emplace(ids[i], i);
    if (!inserted) {
      fail_validation("duplicate id '" + ids[i] + "' at " + row_label(i) + " (first at " +
                      row_label(it->second) + ")");
    }
    bool nonzero = false;
    for (std::size_t j = 0; j < dim; ++j) {
      const double x = values[i * dim + j];
      if (!std::isfinite(x)) fail_validation("non-finite value at " + row_label(i));
      nonzero = nonzero || x != 0.0;
    }
    if (!nonzero) fail_validation("all-zero vector at " + row_label(i) + " (id '" + ids[i] + "')");
  }
  EmbeddingSet e;
  e.ids_ = std::move(ids);
  e.values_ = std::move(values);
  e.dim_ = dim;
  return e;
}

VertexId EmbeddingSet::index_of(std::string_view id) const {
  // Linear scan; id lookups happen once per CLI input, not in hot loops.
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) fail_validation("unknown id '" + std::string(id) + "'");
  return static_cast<VertexId>(it - ids_.begin());
}

std::uint64_t EmbeddingSet::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t n = ids_.size();
  const std::uint64_t d = dim_;
  feed(&n, sizeof n);
  feed(&d, sizeof d);
  for (const auto& id : ids_) {
    const std::uint64_t len = id.size();
    feed(&len, sizeof len);
    feed(id.data(), id.size());
  }
  for (double x : values_) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    feed(&bits, sizeof bits);
  }
  return h;
}

EmbeddingSet EmbeddingSet::subset(std::span<const VertexId> rows) const {
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(rows.size());
  values.reserve(rows.size() * dim_);
  for (VertexId v : rows) {
    if (v >= size()) fail_validation("row index " + std::to_string(v) + " out of range");
    ids.push_back(ids_[v]);
    const auto r = row(v);
    values.insert(values.end(), r.begin(), r.end());
  }
  auto result = create(std::move(ids), std::move(values), dim_);
  result.normalized_ = normalized_;
  return result;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  switch (format) {
    case EmbeddingFormat::jsonl: return load_jsonl(path);
    case EmbeddingFormat::csv: return load_csv(path);
    case EmbeddingFormat::raw_f32: return load_raw_f32(path);
  }
  fail_usage("unknown embedding format");
}

void save_embeddings(const EmbeddingSet& e, const std::filesystem::path& path,
                     EmbeddingFormat format) {
  switch (format) {
    case EmbeddingFormat::jsonl: {
      auto out = open_for_write(path, false);
      for (VertexId i = 0; i < e.size(); ++i) {
        const auto r = e.row(i);
        nlohmann::ordered_json record;
        record["id"] = e.id(i);
        record["vector"] = std::vector<double>(r.begin(), r.end());
        out << record.dump() << '\n';
      }
      if (!out) fail_io("write failed for '" + path.string() + "'");
      return;
    }
    case EmbeddingFormat::csv: {
      auto out = open_for_write(path, false);
      out << "id";
      for (std::size_t j = 0; j < e.dim(); ++j) out << ",v" << j;
      out << '\n';
      for (VertexId i = 0; i < e.size(); ++i) {
        if (e.id(i).find_first_of(",\n\r") != std::string::npos) {
          fail_validation("id '" + e.id(i) + "' cannot be written to csv");
        }
        out << e.id(i);
        for (double x : e.row(i)) out << ',' << format_double(x);
        out << '\n';
      }
      if (!out) fail_io("write failed for '" + path.string() + "'");
      return;
    }
    case EmbeddingFormat::raw_f32: {
      if (e.size() > UINT32_MAX || e.dim() > UINT32_MAX) fail_validation("set too large for raw-f32");
      auto out = open_for_write(path, true);
      out.write(kRawMagic.data(), kRawMagic.size());
      write_u32_le(out, static_cast<std::uint32_t>(e.size()));
      write_u32_le(out, static_cast<std::uint32_t>(e.dim()));
      for (double x : e.values()) {
        write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
      }
      if (!out) fail_io("write failed for '" + path.string() + "'");
      return;
    }
  }
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

EmbeddingSet normalize(const EmbeddingSet& e) {
  if (e.normalized()) return e;
  EmbeddingSet result = e;
  const std::size_t d = e.dim();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double norm = l2_norm(e.row(static_cast<VertexId>(i)));
    if (norm == 0.0) fail_validation("cannot normalize all-zero vector '" + e.ids()[i] + "'");
    if (norm == 1.0) continue;
    for (std::size_t j = 0; j < d; ++j) result.values_[i * d + j] /= norm;
  }
  result.normalized_ = true;
  return result;
}

double cosine_unchecked(std::span<const double> u, double norm_u, std::span<const double> v,
                        double norm_v) {
  double dot = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) dot += u[j] * v[j];
  return std::clamp(dot / (norm_u * norm_v), -1.0, 1.0);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    fail_validation("dimension mismatch: " + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()));
  }
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) fail_validation("cosine of a zero vector is undefined");
  return cosine_unchecked(u, nu, v, nv);
}

}  // namespace ideal
