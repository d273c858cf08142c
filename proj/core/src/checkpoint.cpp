#include "proad/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "proad/error.hpp"

namespace proad {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'O', 'A', 'D', 'C', 'K', 'P'};

template <class T>
void put(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  template <class T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw IoError("truncated checkpoint " + source_);
  }
  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor* CheckpointData::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.tensor;
  return nullptr;
}

void save_checkpoint(const std::filesystem::path& path, const std::string& header, const ParameterList& tensors) {
  std::string out(kMagic, sizeof kMagic);
  put(out, kCheckpointVersion);
  put(out, static_cast<std::uint64_t>(header.size()));
  out += header;
  put(out, static_cast<std::uint64_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    put(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put(out, static_cast<std::uint32_t>(tensor.rank()));
    for (auto d : tensor.shape()) put(out, static_cast<std::uint64_t>(d));
    for (double v : tensor.data()) put(out, v);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write checkpoint " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("failed writing checkpoint " + path.string());
}

CheckpointData load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  Reader r(bytes, path.string());
  if (r.get_bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
    throw IoError(path.string() + " is not a checkpoint file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version) + " in " + path.string());
  }
  CheckpointData data;
  data.header = r.get_bytes(r.get<std::uint64_t>());
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.get_bytes(r.get<std::uint32_t>());
    Shape shape(r.get<std::uint32_t>());
    for (auto& d : shape) d = r.get<std::uint64_t>();
    std::vector<double> values(shape_numel(shape));
    for (auto& v : values) v = r.get<double>();
    data.tensors.push_back({std::move(name), Tensor::from(std::move(shape), std::move(values))});
  }
  return data;
}

void restore_parameters(const CheckpointData& checkpoint, const ParameterList& targets,
                        const std::string& name_prefix) {
  for (const auto& target : targets) {
    const std::string name = name_prefix + target.name;
    const Tensor* stored = checkpoint.find(name);
    if (!stored) throw ConfigError("checkpoint lacks tensor '" + name + "'");
    if (stored->shape() != target.tensor.shape()) {
      throw ConfigError("checkpoint tensor '" + name + "' has shape " + shape_to_string(stored->shape()) +
                        ", model expects " + shape_to_string(target.tensor.shape()));
    }
    Tensor dst = target.tensor;
    std::copy(stored->data().begin(), stored->data().end(), dst.mutable_data().begin());
  }
}

}  // namespace proad
