#include "fpd/nn/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace fpd::nn {

namespace {

template <typename U>
void put(std::ostream& out, U v) {
  std::array<char, sizeof(U)> bytes;
  std::memcpy(bytes.data(), &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get(std::istream& in, const std::filesystem::path& path) {
  std::array<char, sizeof(U)> bytes;
  if (!in.read(bytes.data(), bytes.size())) {
    throw ParseError("checkpoint " + path.string() + " is truncated");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  U v;
  std::memcpy(&v, bytes.data(), sizeof(U));
  return v;
}

std::array<std::int32_t, 15> encode(const PolicyConfig& c) {
  return {static_cast<std::int32_t>(c.space), c.lookahead ? 1 : 0, c.in_channels, c.n_fg, c.n_fs,
          c.conv1_filters, c.conv1_kernel, c.conv2_filters, c.conv2_kernel,
          static_cast<std::int32_t>(c.head), c.mlp_hidden1, c.mlp_hidden2, c.lstm_units,
          c.n_outputs, c.with_value_head ? 1 : 0};
}

PolicyConfig decode(const std::array<std::int32_t, 15>& f) {
  if (f[0] < 0 || f[0] > 1) throw ParseError("checkpoint has an unknown action space tag");
  if (f[9] < 0 || f[9] > 1) throw ParseError("checkpoint has an unknown head tag");
  PolicyConfig c;
  c.space = static_cast<ActionSpaceKind>(f[0]);
  c.lookahead = f[1] != 0;
  c.in_channels = f[2];
  c.n_fg = f[3];
  c.n_fs = f[4];
  c.conv1_filters = f[5];
  c.conv1_kernel = f[6];
  c.conv2_filters = f[7];
  c.conv2_kernel = f[8];
  c.head = static_cast<HeadKind>(f[9]);
  c.mlp_hidden1 = f[10];
  c.mlp_hidden2 = f[11];
  c.lstm_units = f[12];
  c.n_outputs = f[13];
  c.with_value_head = f[14] != 0;
  return c;
}

}  // namespace

void save_checkpoint(const PolicyNet<float>& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  for (std::int32_t v : encode(net.config())) put(out, v);

  const NetParams<float>& p = net.params();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.count()));
  for (std::size_t i = 0; i < p.count(); ++i) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.names[i].size()));
    out.write(p.names[i].data(), static_cast<std::streamsize>(p.names[i].size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p[i].rank()));
    for (int d : p[i].shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  }
  for (const auto& t : p.tensors) {
    for (float v : t.values()) put(out, v);
  }
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

PolicyNet<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ParseError(path.string() + " is not a policy checkpoint");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  std::array<std::int32_t, 15> fields{};
  for (auto& f : fields) f = get<std::int32_t>(in, path);
  const PolicyConfig cfg = decode(fields);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint config invalid: ") + e.what());
  }

  const auto layout = parameter_layout(cfg);
  const auto count = get<std::uint32_t>(in, path);
  if (count != layout.size()) {
    throw ShapeError("checkpoint lists " + std::to_string(count) + " tensors, config implies " +
                     std::to_string(layout.size()));
  }
  NetParams<float> params;
  for (std::size_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint32_t>(in, path);
    if (name_len > 256) throw ParseError("checkpoint tensor name too long");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw ParseError("checkpoint " + path.string() + " is truncated");
    const auto rank = get<std::uint32_t>(in, path);
    if (rank > 8) throw ParseError("checkpoint tensor rank too large");
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(get<std::uint32_t>(in, path));
    if (name != layout[i].first) {
      throw ShapeError("checkpoint tensor " + std::to_string(i) + " is '" + name + "', expected '" +
                       layout[i].first + "'");
    }
    require_shape(shape, layout[i].second, name.c_str());
    params.names.push_back(name);
    params.tensors.emplace_back(shape);
  }
  for (auto& t : params.tensors) {
    for (float& v : t.values()) v = get<float>(in, path);
  }
  return PolicyNet<float>(cfg, std::move(params));
}

}  // namespace fpd::nn
