#include "csu/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace csu {

namespace {

template <typename UInt>
void put_le(std::vector<std::uint8_t>& out, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename UInt>
UInt get_le(const std::uint8_t* p) {
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(p[i]) << (8 * i);
  return v;
}

template <typename Scalar>
using Bits = std::conditional_t<sizeof(Scalar) == 4, std::uint32_t, std::uint64_t>;

template <typename Scalar>
void encode_payload(std::vector<std::uint8_t>& out, const FeatureMap<Scalar>& fm) {
  for (Scalar x : fm.data()) put_le(out, std::bit_cast<Bits<Scalar>>(x));
}

template <typename Scalar>
FeatureMap<Scalar> decode_payload(const Shape& shape, const std::uint8_t* p) {
  std::vector<Scalar> data(static_cast<std::size_t>(shape.numel()));
  for (auto& x : data) {
    x = std::bit_cast<Scalar>(get_le<Bits<Scalar>>(p));
    p += sizeof(Scalar);
  }
  return FeatureMap<Scalar>::create(shape, std::move(data));
}

}  // namespace

std::vector<std::uint8_t> encode_feature_map(const AnyFeatureMap& any) {
  std::vector<std::uint8_t> out;
  std::visit(
      [&](const auto& fm) {
        using Scalar = typename std::decay_t<decltype(fm)>::value_type;
        const Shape& s = fm.shape();
        for (Index d : {s.batch, s.channels, s.height, s.width})
          if (d > std::numeric_limits<std::uint32_t>::max())
            throw FormatError("dimension exceeds uint32 range");
        out.reserve(kFeatureMapHeaderSize + static_cast<std::size_t>(s.numel()) * sizeof(Scalar));
        out.insert(out.end(), std::begin(kFeatureMapMagic), std::end(kFeatureMapMagic));
        out.push_back(static_cast<std::uint8_t>(sizeof(Scalar) == 4 ? DType::f32 : DType::f64));
        out.insert(out.end(), 3, 0);
        for (Index d : {s.batch, s.channels, s.height, s.width})
          put_le(out, static_cast<std::uint32_t>(d));
        encode_payload(out, fm);
      },
      any);
  return out;
}

AnyFeatureMap decode_feature_map(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFeatureMapHeaderSize)
    throw FormatError("truncated header: " + std::to_string(bytes.size()) + " bytes");
  if (std::memcmp(bytes.data(), kFeatureMapMagic, sizeof(kFeatureMapMagic)) != 0)
    throw FormatError("bad magic (expected CSUFMAP1)");
  const std::uint8_t dtype = bytes[8];
  if (dtype > 1) throw FormatError("unknown dtype byte " + std::to_string(dtype));
  if (bytes[9] != 0 || bytes[10] != 0 || bytes[11] != 0)
    throw FormatError("reserved header bytes must be zero");

  Shape s;
  s.batch = get_le<std::uint32_t>(bytes.data() + 12);
  s.channels = get_le<std::uint32_t>(bytes.data() + 16);
  s.height = get_le<std::uint32_t>(bytes.data() + 20);
  s.width = get_le<std::uint32_t>(bytes.data() + 24);
  if (s.batch == 0 || s.channels == 0 || s.height == 0 || s.width == 0)
    throw FormatError("zero dimension in header " + to_string(s));

  const std::uint64_t elem = dtype == 0 ? 4 : 8;
  // Any product past the file size is truncated; stop before it can overflow.
  std::uint64_t expected = elem;
  for (Index d : {s.batch, s.channels, s.height, s.width}) {
    if (__builtin_mul_overflow(expected, static_cast<std::uint64_t>(d), &expected) ||
        expected > bytes.size()) {
      expected = std::numeric_limits<std::uint64_t>::max() - kFeatureMapHeaderSize;
      break;
    }
  }
  expected += kFeatureMapHeaderSize;
  if (bytes.size() < expected)
    throw FormatError("truncated payload: header " + to_string(s) + " needs more than the " +
                      std::to_string(bytes.size()) + " bytes in the file");
  if (bytes.size() > expected) throw FormatError("trailing bytes after payload");

  const std::uint8_t* payload = bytes.data() + kFeatureMapHeaderSize;
  if (dtype == 0) return decode_payload<float>(s, payload);
  return decode_payload<double>(s, payload);
}

AnyFeatureMap read_feature_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_feature_map(bytes);
}

void write_feature_map(const std::filesystem::path& path, const AnyFeatureMap& fm) {
  const std::vector<std::uint8_t> bytes = encode_feature_map(fm);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace csu
