#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpg/ad/tensor.hpp"

namespace fpg::ad {

struct NamedTensor {
  std::string name;
  Tensor value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

using ParameterSet = std::vector<NamedTensor>;

inline constexpr const char* kCheckpointMagic = "FPGSTGCN-CKPT-1";

/// Text checkpoint: magic line, record count, then per record a header line
/// `name rank d0 .. dn` followed by one line of values printed with 17
/// significant digits (exact round trip).
void write_checkpoint(std::ostream& out, const ParameterSet& params);
ParameterSet read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);
ParameterSet load_checkpoint(const std::filesystem::path& path);

}  // namespace fpg::ad
