#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "retk/classifier.hpp"
#include "retk/common.hpp"

// Model artifact: "RTKM" magic, u32 format version, scheme byte, label
// vocabulary, training config, bias row, weight rows sorted by feature
// index, and a trailing CRC32 of everything before it. All integers and
// IEEE doubles little-endian, doubles bit-exact.

namespace retk {

namespace {

constexpr char kMagic[4] = {'R', 'T', 'K', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint32_t crc32(std::string_view bytes) {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; i++) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; k++)
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (unsigned char b : bytes) crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

struct Writer {
  std::string buf;

  void u8(std::uint8_t v) { buf.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; i++) buf.push_back(static_cast<char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; i++) buf.push_back(static_cast<char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf.append(s);
  }
};

[[noreturn]] void corrupt() {
  throw DataError("model artifact corrupted: checksum mismatch");
}

struct Reader {
  std::string_view buf;
  std::size_t pos = 0;

  std::uint8_t u8() {
    if (pos + 1 > buf.size()) corrupt();
    return static_cast<std::uint8_t>(buf[pos++]);
  }
  std::uint32_t u32() {
    if (pos + 4 > buf.size()) corrupt();
    std::uint32_t v = 0;
    for (int i = 0; i < 4; i++)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++]))
           << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    if (pos + 8 > buf.size()) corrupt();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; i++)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++]))
           << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    std::uint32_t n = u32();
    if (pos + n > buf.size()) corrupt();
    std::string s(buf.substr(pos, n));
    pos += n;
    return s;
  }
};

}  // namespace

std::string save_model_to_string(const SoftmaxModel& model) {
  Writer w;
  w.buf.append(kMagic, 4);
  w.u32(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(model.scheme));

  w.u32(static_cast<std::uint32_t>(model.labels.size()));
  for (const auto& label : model.labels) w.str(label.name);

  const TrainConfig& c = model.config;
  w.u64(c.batch_size);
  w.u64(c.epochs);
  w.f64(c.learning_rate);
  w.f64(c.l2);
  w.u64(c.seed);
  w.u32(c.dim);
  w.u32(static_cast<std::uint32_t>(c.ngram_orders.size()));
  for (std::size_t k : c.ngram_orders) w.u64(k);

  for (double b : model.bias) w.f64(b);

  std::vector<std::uint32_t> rows;
  rows.reserve(model.weights.size());
  for (const auto& [j, row] : model.weights) rows.push_back(j);
  std::sort(rows.begin(), rows.end());
  w.u64(rows.size());
  for (std::uint32_t j : rows) {
    w.u32(j);
    for (double v : model.weights.at(j)) w.f64(v);
  }

  w.u32(crc32(w.buf));
  return std::move(w.buf);
}

void save_model(const SoftmaxModel& model, std::ostream& out) {
  std::string bytes = save_model_to_string(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("error writing model artifact");
}

void save_model_file(const SoftmaxModel& model, const std::string& path) {
  write_file_atomic(path, save_model_to_string(model));
}

SoftmaxModel load_model_from_string(const std::string& bytes) {
  if (bytes.size() < 8) corrupt();
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DataError("not a model artifact (bad magic)");
  Reader header{bytes, 4};
  std::uint32_t version = header.u32();
  if (version != kFormatVersion)
    throw DataError("unsupported model format version " +
                    std::to_string(version) + " (expected " +
                    std::to_string(kFormatVersion) + ")");
  if (bytes.size() < 12) corrupt();
  std::string_view body(bytes.data(), bytes.size() - 4);
  Reader tail{bytes, bytes.size() - 4};
  if (tail.u32() != crc32(body)) corrupt();

  Reader r{body, 8};
  SoftmaxModel model;
  model.scheme = static_cast<MarkerScheme>(r.u8());
  std::uint32_t label_count = r.u32();
  model.labels.reserve(label_count);
  for (std::uint32_t i = 0; i < label_count; i++)
    model.labels.push_back(RelationLabel{r.str()});

  TrainConfig& c = model.config;
  c.batch_size = r.u64();
  c.epochs = r.u64();
  c.learning_rate = r.f64();
  c.l2 = r.f64();
  c.seed = r.u64();
  c.dim = r.u32();
  std::uint32_t order_count = r.u32();
  c.ngram_orders.clear();
  for (std::uint32_t i = 0; i < order_count; i++)
    c.ngram_orders.push_back(r.u64());

  model.bias.resize(label_count);
  for (auto& b : model.bias) b = r.f64();

  std::uint64_t row_count = r.u64();
  model.weights.reserve(row_count);
  for (std::uint64_t i = 0; i < row_count; i++) {
    std::uint32_t j = r.u32();
    auto& row = model.weights[j];
    row.resize(label_count);
    for (auto& v : row) v = r.f64();
  }
  if (r.pos != body.size()) corrupt();
  return model;
}

SoftmaxModel load_model(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model_from_string(buf.str());
}

SoftmaxModel load_model_file(const std::string& path) {
  return load_model_from_string(read_file(path));
}

}  // namespace retk
