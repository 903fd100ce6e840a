#include "fpg/ad/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fpg::ad {

void write_checkpoint(std::ostream& out, const ParameterSet& params) {
  out << kCheckpointMagic << '\n' << "count " << params.size() << '\n';
  char buf[32];
  for (const auto& [name, value] : params) {
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
      throw std::invalid_argument("checkpoint: invalid parameter name '" + name + "'");
    }
    out << name << ' ' << value.rank();
    for (std::size_t d : value.shape()) out << ' ' << d;
    out << '\n';
    for (std::size_t i = 0; i < value.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", value[i]);
      if (i) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

ParameterSet read_checkpoint(std::istream& in) {
  std::string magic;
  std::getline(in, magic);
  if (magic != kCheckpointMagic) {
    throw std::runtime_error("checkpoint: bad magic header '" + magic + "'");
  }
  std::string word;
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "count") {
    throw std::runtime_error("checkpoint: missing record count");
  }
  ParameterSet params;
  params.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    std::string name;
    std::size_t rank = 0;
    if (!(in >> name >> rank) || rank == 0 || rank > 4) {
      throw std::runtime_error("checkpoint: malformed record header " + std::to_string(r));
    }
    Shape shape(rank);
    for (auto& d : shape) in >> d;
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) {
      std::string token;
      in >> token;
      char* end = nullptr;
      v = std::strtod(token.c_str(), &end);
      if (token.empty() || *end != '\0') {
        throw std::runtime_error("checkpoint: bad value '" + token + "' in " + name);
      }
    }
    if (!in) throw std::runtime_error("checkpoint: truncated record " + name);
    params.push_back({name, Tensor(std::move(shape), std::move(values))});
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(out, params);
}

ParameterSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace fpg::ad
