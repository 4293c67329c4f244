#pragma once

#include <filesystem>

#include "fpd/nn/policy.hpp"

namespace fpd::nn {

// Binary layout, little-endian:
//   8 bytes   "FPDPOLCY"
//   u32       format version (1)
//   i32 x 15  PolicyConfig fields (space, lookahead, in_channels, n_fg, n_fs,
//             conv1_filters, conv1_kernel, conv2_filters, conv2_kernel, head,
//             mlp_hidden1, mlp_hidden2, lstm_units, n_outputs, with_value_head)
//   u32       tensor count, then per tensor: u32 name length, name bytes,
//             u32 rank, u32 dims[rank]
//   f32[]     parameter data, tensors in declaration order
inline constexpr char kCheckpointMagic[8] = {'F', 'P', 'D', 'P', 'O', 'L', 'C', 'Y'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const PolicyNet<float>& net, const std::filesystem::path& path);

// Verifies the stored shape list against the layout its config implies.
PolicyNet<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace fpd::nn
