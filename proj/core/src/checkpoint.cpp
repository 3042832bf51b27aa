#include "mechent/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mechent/errors.hpp"

namespace mechent {

namespace {

constexpr char magic[8] = {'M', 'E', 'C', 'H', 'C', 'K', 'P', 'T'};

template <class T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& data) : data_(data) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw CheckpointError("checkpoint: truncated file");
    unsigned char b[sizeof(T)];
    std::memcpy(b, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<unsigned char>& data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& s) {
  return fnv1a(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

std::uint64_t params_hash(const SystemParams& p, Frame frame) {
  std::vector<unsigned char> buf;
  for (const ParamField& f : param_schema()) put(buf, p.*(f.member));
  put(buf, static_cast<std::uint32_t>(frame));
  return fnv1a(buf);
}

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  int total = 1;
  for (int d : ck.dims) total *= d;
  if (ck.dims.empty() || ck.rho.rows() != total || ck.rho.cols() != total) {
    throw DimensionError("write_checkpoint: state does not match dims");
  }
  std::vector<unsigned char> buf(std::begin(magic), std::end(magic));
  put(buf, checkpoint_version);
  put(buf, static_cast<std::uint32_t>(ck.dims.size()));
  for (int d : ck.dims) put(buf, static_cast<std::int32_t>(d));
  put(buf, ck.t);
  put(buf, ck.params_hash);
  buf.reserve(buf.size() + static_cast<std::size_t>(total) * total * 16 + 8);
  for (int i = 0; i < total; ++i) {
    for (int j = 0; j < total; ++j) {
      put(buf, ck.rho(i, j).real());
      put(buf, ck.rho(i, j).imag());
    }
  }
  put(buf, fnv1a(buf));

  // Write to a sibling and rename so that a crash never leaves a torn checkpoint.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("write_checkpoint: cannot open " + tmp);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw IoError("write_checkpoint: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("write_checkpoint: cannot rename to " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("read_checkpoint: cannot open " + path);
  const std::vector<unsigned char> data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (data.size() < sizeof(magic) + 8 || !std::equal(std::begin(magic), std::end(magic), data.begin())) {
    throw CheckpointError("read_checkpoint: " + path + " is not a checkpoint file");
  }
  Reader r(data);
  for (std::size_t k = 0; k < sizeof(magic); ++k) r.get<unsigned char>();
  const auto version = r.get<std::uint32_t>();
  if (version != checkpoint_version) {
    std::ostringstream os;
    os << "read_checkpoint: unsupported version " << version;
    throw CheckpointError(os.str());
  }
  const auto nslots = r.get<std::uint32_t>();
  if (nslots == 0 || nslots > 16) throw CheckpointError("read_checkpoint: implausible slot count");
  Checkpoint ck;
  long long total = 1;
  for (std::uint32_t k = 0; k < nslots; ++k) {
    const auto d = r.get<std::int32_t>();
    if (d < 2 || d > 4096) throw CheckpointError("read_checkpoint: implausible dimension");
    ck.dims.push_back(d);
    total *= d;
  }
  if (total > 8192) throw CheckpointError("read_checkpoint: implausible total dimension");
  ck.t = r.get<double>();
  ck.params_hash = r.get<std::uint64_t>();
  const std::size_t expected = r.pos() + static_cast<std::size_t>(total * total) * 16 + 8;
  if (data.size() != expected) throw CheckpointError("read_checkpoint: size does not match header");
  ck.rho.resize(total, total);
  for (long long i = 0; i < total; ++i) {
    for (long long j = 0; j < total; ++j) {
      const double re = r.get<double>();
      const double im = r.get<double>();
      ck.rho(i, j) = Complex(re, im);
    }
  }
  const std::size_t body = r.pos();
  const auto stored = r.get<std::uint64_t>();
  if (stored != fnv1a(std::span<const unsigned char>(data.data(), body))) {
    throw CheckpointError("read_checkpoint: checksum mismatch (corrupt file)");
  }
  return ck;
}

}  // namespace mechent
