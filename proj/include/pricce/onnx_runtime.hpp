#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pricce::onnx {

/// Dense float32 tensor, row-major.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::size_t numel() const noexcept {
    std::size_t n = 1;
    for (auto d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
};

/// Operators the interpreter implements.
const std::vector<std::string>& supported_ops();

/// A small CPU interpreter for inference graphs built from common CNN
/// operators. The graph is validated when loaded; `run` is const and safe to
/// call concurrently.
class Model {
 public:
  /// Throws ModelError (MissingFile, Parse or Unsupported).
  static Model load(const std::filesystem::path& path);
  static Model from_bytes(std::span<const std::uint8_t> bytes, const std::string& origin);

  const std::map<std::string, std::string>& metadata() const noexcept;
  const std::string& input_name() const noexcept;
  /// Declared input/output dims; dynamic dims are -1.
  const std::vector<std::int64_t>& input_shape() const noexcept;
  const std::vector<std::int64_t>& output_shape() const noexcept;
  std::int64_t opset() const noexcept;

  Tensor run(const Tensor& input) const;

  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;
  ~Model();

 private:
  struct Graph;
  explicit Model(std::unique_ptr<Graph> g);
  std::unique_ptr<Graph> graph_;
};

/// Offset of the first byte where a top-level protobuf wire-format scan
/// fails, or the buffer size if the scan succeeds.
std::size_t wire_scan_offset(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace pricce::onnx
