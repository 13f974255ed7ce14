#include "pricce/onnx_runtime.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <set>
#include <unordered_map>

#include "onnx.pb.h"
#include "pricce/error.hpp"
#include "pricce/fileutil.hpp"

namespace pricce::onnx {

namespace {

using Kind = ModelError::Kind;
using Shape = std::vector<std::int64_t>;

struct Attr {
  std::int64_t i = 0;
  float f = 0.0f;
  std::string s;
  std::vector<std::int64_t> ints;
  std::vector<float> floats;
  Tensor t;
  std::vector<std::int64_t> t_ints;
  bool has_t = false;
};

struct Node {
  std::string op;
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::unordered_map<std::string, Attr> attrs;

  const Attr* attr(const std::string& key) const {
    auto it = attrs.find(key);
    return it == attrs.end() ? nullptr : &it->second;
  }
  std::int64_t int_attr(const std::string& key, std::int64_t fallback) const {
    const Attr* a = attr(key);
    return a ? a->i : fallback;
  }
  float float_attr(const std::string& key, float fallback) const {
    const Attr* a = attr(key);
    return a ? a->f : fallback;
  }
  std::vector<std::int64_t> ints_attr(const std::string& key, std::vector<std::int64_t> fallback) const {
    const Attr* a = attr(key);
    return a ? a->ints : fallback;
  }
  std::string label() const { return op + (name.empty() ? "" : " '" + name + "'"); }
};

Shape dims_of(const ::onnx::ValueInfoProto& v) {
  Shape out;
  if (!v.has_type() || !v.type().has_tensor_type() || !v.type().tensor_type().has_shape()) return out;
  for (const auto& d : v.type().tensor_type().shape().dim()) out.push_back(d.has_dim_value() ? d.dim_value() : -1);
  return out;
}

template <class T>
std::vector<T> raw_values(const std::string& raw) {
  std::vector<T> out(raw.size() / sizeof(T));
  std::memcpy(out.data(), raw.data(), out.size() * sizeof(T));
  return out;
}

// Converts to float storage; integer tensors also keep their exact values.
void convert_tensor(const ::onnx::TensorProto& tp, Tensor& t, std::vector<std::int64_t>& ints) {
  t.shape.assign(tp.dims().begin(), tp.dims().end());
  const std::size_t n = t.numel();
  const bool raw = tp.has_raw_data();
  switch (tp.data_type()) {
    case ::onnx::TensorProto::FLOAT:
      t.data = raw ? raw_values<float>(tp.raw_data()) : std::vector<float>(tp.float_data().begin(), tp.float_data().end());
      break;
    case ::onnx::TensorProto::DOUBLE: {
      const auto d = raw ? raw_values<double>(tp.raw_data())
                         : std::vector<double>(tp.double_data().begin(), tp.double_data().end());
      t.data.assign(d.begin(), d.end());
      break;
    }
    case ::onnx::TensorProto::INT64:
      ints = raw ? raw_values<std::int64_t>(tp.raw_data())
                 : std::vector<std::int64_t>(tp.int64_data().begin(), tp.int64_data().end());
      t.data.assign(ints.begin(), ints.end());
      break;
    case ::onnx::TensorProto::INT32: {
      const auto d = raw ? raw_values<std::int32_t>(tp.raw_data())
                         : std::vector<std::int32_t>(tp.int32_data().begin(), tp.int32_data().end());
      ints.assign(d.begin(), d.end());
      t.data.assign(d.begin(), d.end());
      break;
    }
    default:
      throw ModelError(Kind::Unsupported, "tensor '" + tp.name() + "' has unsupported data type " +
                                              std::to_string(tp.data_type()));
  }
  if (tp.has_data_location() && tp.data_location() == ::onnx::TensorProto::EXTERNAL) {
    throw ModelError(Kind::Unsupported, "tensor '" + tp.name() + "' uses external data");
  }
  if (t.data.size() != n) {
    throw ModelError(Kind::Parse, "tensor '" + tp.name() + "' holds " + std::to_string(t.data.size()) +
                                      " values but its shape needs " + std::to_string(n));
  }
}

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

[[noreturn]] void fail(const Node& n, const std::string& msg) {
  throw ModelError(Kind::Runtime, n.label() + ": " + msg);
}

void require_rank(const Node& n, const Tensor& t, std::size_t rank) {
  if (t.shape.size() != rank) fail(n, "expected rank " + std::to_string(rank) + " input, got " + shape_str(t.shape));
}

std::vector<std::int64_t> strides_of(const Shape& s) {
  std::vector<std::int64_t> st(s.size(), 1);
  for (std::size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
  return st;
}

Tensor broadcast_binary(const Node& n, const Tensor& a, const Tensor& b, const std::function<float(float, float)>& f) {
  const std::size_t rank = std::max(a.shape.size(), b.shape.size());
  Shape sa(rank, 1), sb(rank, 1), so(rank);
  std::copy(a.shape.begin(), a.shape.end(), sa.begin() + static_cast<std::ptrdiff_t>(rank - a.shape.size()));
  std::copy(b.shape.begin(), b.shape.end(), sb.begin() + static_cast<std::ptrdiff_t>(rank - b.shape.size()));
  for (std::size_t i = 0; i < rank; ++i) {
    if (sa[i] != sb[i] && sa[i] != 1 && sb[i] != 1) {
      fail(n, "shapes " + shape_str(a.shape) + " and " + shape_str(b.shape) + " do not broadcast");
    }
    so[i] = std::max(sa[i], sb[i]);
  }
  Tensor out{so, {}};
  out.data.resize(out.numel());
  const auto sta = strides_of(sa), stb = strides_of(sb), sto = strides_of(so);
  for (std::size_t k = 0; k < out.data.size(); ++k) {
    std::int64_t rem = static_cast<std::int64_t>(k), ia = 0, ib = 0;
    for (std::size_t d = 0; d < rank; ++d) {
      const std::int64_t idx = rem / sto[d];
      rem %= sto[d];
      if (sa[d] != 1) ia += idx * sta[d];
      if (sb[d] != 1) ib += idx * stb[d];
    }
    out.data[k] = f(a.data[static_cast<std::size_t>(ia)], b.data[static_cast<std::size_t>(ib)]);
  }
  return out;
}

Tensor conv(const Node& n, const Tensor& x, const Tensor& w, const Tensor* bias) {
  require_rank(n, x, 4);
  require_rank(n, w, 4);
  const std::int64_t N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  const std::int64_t M = w.shape[0], Cg = w.shape[1], kh = w.shape[2], kw = w.shape[3];
  const std::int64_t group = n.int_attr("group", 1);
  if (group < 1 || C != Cg * group || M % group != 0) fail(n, "channel/group mismatch");
  const auto strides = n.ints_attr("strides", {1, 1});
  const auto dil = n.ints_attr("dilations", {1, 1});
  auto pads = n.ints_attr("pads", {0, 0, 0, 0});
  if (const Attr* ap = n.attr("auto_pad"); ap && ap->s != "NOTSET" && ap->s != "VALID") fail(n, "auto_pad " + ap->s + " is not supported");
  if (strides.size() != 2 || dil.size() != 2 || pads.size() != 4) fail(n, "only 2D convolution is supported");
  const std::int64_t ekh = (kh - 1) * dil[0] + 1, ekw = (kw - 1) * dil[1] + 1;
  const std::int64_t OH = (H + pads[0] + pads[2] - ekh) / strides[0] + 1;
  const std::int64_t OW = (W + pads[1] + pads[3] - ekw) / strides[1] + 1;
  if (OH < 1 || OW < 1) fail(n, "kernel larger than padded input");
  Tensor out{{N, M, OH, OW}, {}};
  out.data.assign(out.numel(), 0.0f);
  const std::int64_t Mg = M / group;
  const std::int64_t K = Cg * kh * kw;
  const std::int64_t P = OH * OW;
  std::vector<float> cols(static_cast<std::size_t>(K * P));
  for (std::int64_t b = 0; b < N; ++b) {
    for (std::int64_t g = 0; g < group; ++g) {
      // im2col for this group
      for (std::int64_t c = 0; c < Cg; ++c) {
        const float* src = x.data.data() + ((b * C + g * Cg + c) * H) * W;
        for (std::int64_t i = 0; i < kh; ++i) {
          for (std::int64_t j = 0; j < kw; ++j) {
            float* dst = cols.data() + ((c * kh + i) * kw + j) * P;
            for (std::int64_t oy = 0; oy < OH; ++oy) {
              const std::int64_t iy = oy * strides[0] - pads[0] + i * dil[0];
              for (std::int64_t ox = 0; ox < OW; ++ox) {
                const std::int64_t ix = ox * strides[1] - pads[1] + j * dil[1];
                dst[oy * OW + ox] = (iy < 0 || iy >= H || ix < 0 || ix >= W) ? 0.0f : src[iy * W + ix];
              }
            }
          }
        }
      }
      for (std::int64_t m = 0; m < Mg; ++m) {
        const std::int64_t oc = g * Mg + m;
        float* dst = out.data.data() + (b * M + oc) * P;
        const float* wr = w.data.data() + oc * K;
        for (std::int64_t k = 0; k < K; ++k) {
          const float wk = wr[k];
          if (wk == 0.0f) continue;
          const float* cr = cols.data() + k * P;
          for (std::int64_t p = 0; p < P; ++p) dst[p] += wk * cr[p];
        }
        if (bias) {
          const float bv = bias->data[static_cast<std::size_t>(oc)];
          for (std::int64_t p = 0; p < P; ++p) dst[p] += bv;
        }
      }
    }
  }
  return out;
}

Tensor max_pool(const Node& n, const Tensor& x) {
  require_rank(n, x, 4);
  const auto k = n.ints_attr("kernel_shape", {});
  const auto strides = n.ints_attr("strides", {1, 1});
  const auto pads = n.ints_attr("pads", {0, 0, 0, 0});
  const bool ceil_mode = n.int_attr("ceil_mode", 0) != 0;
  if (k.size() != 2 || strides.size() != 2 || pads.size() != 4) fail(n, "only 2D pooling is supported");
  const std::int64_t N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  auto out_side = [&](std::int64_t in, std::int64_t p0, std::int64_t p1, std::int64_t kk, std::int64_t s) {
    const std::int64_t span = in + p0 + p1 - kk;
    return (ceil_mode ? (span + s - 1) / s : span / s) + 1;
  };
  const std::int64_t OH = out_side(H, pads[0], pads[2], k[0], strides[0]);
  const std::int64_t OW = out_side(W, pads[1], pads[3], k[1], strides[1]);
  Tensor out{{N, C, OH, OW}, {}};
  out.data.resize(out.numel());
  for (std::int64_t nc = 0; nc < N * C; ++nc) {
    const float* src = x.data.data() + nc * H * W;
    float* dst = out.data.data() + nc * OH * OW;
    for (std::int64_t oy = 0; oy < OH; ++oy) {
      for (std::int64_t ox = 0; ox < OW; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        for (std::int64_t i = 0; i < k[0]; ++i) {
          const std::int64_t iy = oy * strides[0] - pads[0] + i;
          if (iy < 0 || iy >= H) continue;
          for (std::int64_t j = 0; j < k[1]; ++j) {
            const std::int64_t ix = ox * strides[1] - pads[1] + j;
            if (ix >= 0 && ix < W) best = std::max(best, src[iy * W + ix]);
          }
        }
        dst[oy * OW + ox] = best;
      }
    }
  }
  return out;
}

Tensor gemm(const Node& n, const Tensor& a, const Tensor& b, const Tensor* c) {
  require_rank(n, a, 2);
  require_rank(n, b, 2);
  const bool ta = n.int_attr("transA", 0) != 0, tb = n.int_attr("transB", 0) != 0;
  const float alpha = n.float_attr("alpha", 1.0f), beta = n.float_attr("beta", 1.0f);
  const std::int64_t M = ta ? a.shape[1] : a.shape[0], K = ta ? a.shape[0] : a.shape[1];
  const std::int64_t Kb = tb ? b.shape[1] : b.shape[0], Nn = tb ? b.shape[0] : b.shape[1];
  if (K != Kb) fail(n, "inner dimensions differ: " + shape_str(a.shape) + " x " + shape_str(b.shape));
  Tensor out{{M, Nn}, std::vector<float>(static_cast<std::size_t>(M * Nn), 0.0f)};
  for (std::int64_t i = 0; i < M; ++i) {
    for (std::int64_t k = 0; k < K; ++k) {
      const float av = ta ? a.data[static_cast<std::size_t>(k * M + i)] : a.data[static_cast<std::size_t>(i * K + k)];
      for (std::int64_t j = 0; j < Nn; ++j) {
        const float bv = tb ? b.data[static_cast<std::size_t>(j * K + k)] : b.data[static_cast<std::size_t>(k * Nn + j)];
        out.data[static_cast<std::size_t>(i * Nn + j)] += av * bv;
      }
    }
  }
  for (auto& v : out.data) v *= alpha;
  if (c && beta != 0.0f) {
    Tensor scaled = *c;
    for (auto& v : scaled.data) v *= beta;
    out = broadcast_binary(n, out, scaled, std::plus<float>());
  }
  return out;
}

Tensor softmax(const Node& n, const Tensor& x, std::int64_t opset) {
  const auto rank = static_cast<std::int64_t>(x.shape.size());
  std::int64_t axis = n.int_attr("axis", opset >= 13 ? -1 : 1);
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) fail(n, "axis out of range");
  Tensor out = x;
  std::int64_t outer = 1, mid = 1, inner = 1;
  for (std::int64_t d = 0; d < rank; ++d) (d < axis ? outer : d == axis ? mid : inner) *= x.shape[static_cast<std::size_t>(d)];
  if (opset < 13) {
    // Older opsets coerce to 2D at `axis`.
    mid *= inner;
    inner = 1;
  }
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t in = 0; in < inner; ++in) {
      auto at = [&](std::int64_t m) -> float& { return out.data[static_cast<std::size_t>((o * mid + m) * inner + in)]; };
      float mx = -std::numeric_limits<float>::infinity();
      for (std::int64_t m = 0; m < mid; ++m) mx = std::max(mx, at(m));
      double sum = 0.0;
      for (std::int64_t m = 0; m < mid; ++m) sum += std::exp(static_cast<double>(at(m) - mx));
      for (std::int64_t m = 0; m < mid; ++m) at(m) = static_cast<float>(std::exp(static_cast<double>(at(m) - mx)) / sum);
    }
  }
  return out;
}

}  // namespace

struct Model::Graph {
  std::map<std::string, std::string> metadata;
  std::string input;
  std::string output;
  Shape input_shape;
  Shape output_shape;
  std::int64_t opset = 0;
  std::unordered_map<std::string, Tensor> constants;
  std::unordered_map<std::string, std::vector<std::int64_t>> int_constants;
  std::vector<Node> nodes;
};

const std::vector<std::string>& supported_ops() {
  static const std::vector<std::string> ops = {
      "Add",     "BatchNormalization", "Constant", "Conv",    "Div",     "Dropout", "Flatten", "Gemm",
      "GlobalAveragePool", "Identity", "MatMul", "MaxPool", "Mul",     "Relu",    "Reshape", "Sigmoid",
      "Softmax", "Sub"};
  return ops;
}

std::size_t wire_scan_offset(std::span<const std::uint8_t> bytes) noexcept {
  std::size_t pos = 0;
  auto varint = [&](std::uint64_t& v) {
    v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos >= bytes.size()) return false;
      const std::uint8_t b = bytes[pos++];
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) return true;
    }
    return false;
  };
  while (pos < bytes.size()) {
    const std::size_t start = pos;
    std::uint64_t key = 0, v = 0;
    if (!varint(key) || (key >> 3) == 0) return start;
    switch (key & 7) {
      case 0:
        if (!varint(v)) return start;
        break;
      case 1:
        if (bytes.size() - pos < 8) return start;
        pos += 8;
        break;
      case 2:
        if (!varint(v) || v > bytes.size() - pos) return start;
        pos += v;
        break;
      case 5:
        if (bytes.size() - pos < 4) return start;
        pos += 4;
        break;
      default:
        return start;
    }
  }
  return bytes.size();
}

Model::Model(std::unique_ptr<Graph> g) : graph_(std::move(g)) {}
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;
Model::~Model() = default;

const std::map<std::string, std::string>& Model::metadata() const noexcept { return graph_->metadata; }
const std::string& Model::input_name() const noexcept { return graph_->input; }
const std::vector<std::int64_t>& Model::input_shape() const noexcept { return graph_->input_shape; }
const std::vector<std::int64_t>& Model::output_shape() const noexcept { return graph_->output_shape; }
std::int64_t Model::opset() const noexcept { return graph_->opset; }

Model Model::load(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ModelError(Kind::MissingFile, "model file " + path.string() + " does not exist");
  }
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const IoError& e) {
    throw ModelError(Kind::MissingFile, e.what());
  }
  return from_bytes(bytes, path.string());
}

Model Model::from_bytes(std::span<const std::uint8_t> bytes, const std::string& origin) {
  ::onnx::ModelProto mp;
  if (bytes.empty() || bytes.size() > static_cast<std::size_t>(std::numeric_limits<int>::max()) ||
      !mp.ParseFromArray(bytes.data(), static_cast<int>(bytes.size()))) {
    const std::size_t off = wire_scan_offset(bytes);
    std::string where = off < bytes.size() ? "malformed field at byte offset " + std::to_string(off)
                                           : "top-level fields intact through byte " + std::to_string(off) +
                                                 ", nested message invalid";
    if (bytes.empty()) where = "file is empty";
    throw ModelError(Kind::Parse, origin + ": not a valid ONNX model (" + where + ")");
  }
  if (!mp.has_graph()) throw ModelError(Kind::Parse, origin + ": model has no graph");

  auto g = std::make_unique<Graph>();
  for (const auto& kv : mp.metadata_props()) g->metadata[kv.key()] = kv.value();
  for (const auto& os : mp.opset_import()) {
    if (os.domain().empty() || os.domain() == "ai.onnx") g->opset = os.version();
  }
  const auto& graph = mp.graph();
  try {
    for (const auto& init : graph.initializer()) {
      Tensor t;
      std::vector<std::int64_t> ints;
      convert_tensor(init, t, ints);
      if (!ints.empty() || init.data_type() == ::onnx::TensorProto::INT64) g->int_constants[init.name()] = ints;
      g->constants[init.name()] = std::move(t);
    }
  } catch (const ModelError& e) {
    throw ModelError(e.kind(), origin + ": " + e.what());
  }
  std::set<std::string> defined;
  for (const auto& [name, t] : g->constants) defined.insert(name);
  for (const auto& in : graph.input()) {
    if (g->constants.count(in.name())) continue;
    if (!g->input.empty()) throw ModelError(Kind::Unsupported, origin + ": model must have exactly one data input");
    g->input = in.name();
    g->input_shape = dims_of(in);
    defined.insert(in.name());
  }
  if (g->input.empty()) throw ModelError(Kind::Parse, origin + ": model declares no input");
  if (graph.output_size() < 1) throw ModelError(Kind::Parse, origin + ": model declares no output");
  g->output = graph.output(0).name();
  g->output_shape = dims_of(graph.output(0));

  const auto& ops = supported_ops();
  for (const auto& np : graph.node()) {
    Node n;
    n.op = np.op_type();
    n.name = np.name();
    if (!np.domain().empty() && np.domain() != "ai.onnx") {
      throw ModelError(Kind::Unsupported, origin + ": operator domain '" + np.domain() + "' is not supported");
    }
    if (std::find(ops.begin(), ops.end(), n.op) == ops.end()) {
      throw ModelError(Kind::Unsupported, origin + ": operator " + n.op + " is not supported");
    }
    n.inputs.assign(np.input().begin(), np.input().end());
    n.outputs.assign(np.output().begin(), np.output().end());
    for (const auto& ap : np.attribute()) {
      Attr a;
      a.i = ap.i();
      a.f = ap.f();
      a.s = ap.s();
      a.ints.assign(ap.ints().begin(), ap.ints().end());
      a.floats.assign(ap.floats().begin(), ap.floats().end());
      if (ap.has_t()) {
        try {
          convert_tensor(ap.t(), a.t, a.t_ints);
        } catch (const ModelError& e) {
          throw ModelError(e.kind(), origin + ": " + e.what());
        }
        a.has_t = true;
      }
      n.attrs[ap.name()] = std::move(a);
    }
    for (const auto& in : n.inputs) {
      if (!in.empty() && !defined.count(in)) {
        throw ModelError(Kind::Parse, origin + ": " + n.label() + " reads undefined value '" + in + "'");
      }
    }
    if (n.op == "Constant") {
      Tensor t;
      std::vector<std::int64_t> ints;
      if (const Attr* v = n.attr("value"); v && v->has_t) {
        t = v->t;
        ints = v->t_ints;
      } else if (const Attr* vf = n.attr("value_float")) {
        t = {{}, {vf->f}};
      } else if (const Attr* vfs = n.attr("value_floats")) {
        t = {{static_cast<std::int64_t>(vfs->floats.size())}, vfs->floats};
      } else if (const Attr* vi = n.attr("value_int")) {
        t = {{}, {static_cast<float>(vi->i)}};
        ints = {vi->i};
      } else if (const Attr* vis = n.attr("value_ints")) {
        t = {{static_cast<std::int64_t>(vis->ints.size())}, {vis->ints.begin(), vis->ints.end()}};
        ints = vis->ints;
      } else {
        throw ModelError(Kind::Unsupported, origin + ": " + n.label() + " has no supported value attribute");
      }
      if (n.outputs.size() != 1) throw ModelError(Kind::Parse, origin + ": Constant must have one output");
      if (!ints.empty()) g->int_constants[n.outputs[0]] = ints;
      g->constants[n.outputs[0]] = std::move(t);
      defined.insert(n.outputs[0]);
      continue;
    }
    if (n.op == "Reshape" && (n.inputs.size() < 2 || !g->int_constants.count(n.inputs[1]))) {
      throw ModelError(Kind::Unsupported, origin + ": " + n.label() + " needs a constant int64 shape");
    }
    for (const auto& out : n.outputs) {
      if (!out.empty()) defined.insert(out);
    }
    g->nodes.push_back(std::move(n));
  }
  if (!defined.count(g->output)) {
    throw ModelError(Kind::Parse, origin + ": graph output '" + g->output + "' is never produced");
  }
  return Model(std::move(g));
}

Tensor Model::run(const Tensor& input) const {
  const Graph& g = *graph_;
  if (input.data.size() != input.numel()) throw ModelError(Kind::Runtime, "input tensor size does not match its shape");
  if (!g.input_shape.empty()) {
    bool ok = g.input_shape.size() == input.shape.size();
    for (std::size_t i = 0; ok && i < input.shape.size(); ++i) ok = g.input_shape[i] < 0 || g.input_shape[i] == input.shape[i];
    if (!ok) {
      throw ModelError(Kind::Runtime, "input shape " + shape_str(input.shape) + " does not match declared " +
                                          shape_str(g.input_shape));
    }
  }
  std::unordered_map<std::string, Tensor> env;
  env[g.input] = input;
  auto get = [&](const Node& n, std::size_t i) -> const Tensor& {
    if (i >= n.inputs.size() || n.inputs[i].empty()) fail(n, "missing input " + std::to_string(i));
    if (auto it = env.find(n.inputs[i]); it != env.end()) return it->second;
    if (auto it = g.constants.find(n.inputs[i]); it != g.constants.end()) return it->second;
    fail(n, "value '" + n.inputs[i] + "' is not available");
  };
  auto opt = [&](const Node& n, std::size_t i) -> const Tensor* {
    if (i >= n.inputs.size() || n.inputs[i].empty()) return nullptr;
    return &get(n, i);
  };

  for (const Node& n : g.nodes) {
    Tensor out;
    const std::string& op = n.op;
    if (op == "Conv") {
      out = conv(n, get(n, 0), get(n, 1), opt(n, 2));
    } else if (op == "BatchNormalization") {
      const Tensor& x = get(n, 0);
      const Tensor &scale = get(n, 1), &bias = get(n, 2), &mean = get(n, 3), &var = get(n, 4);
      if (x.shape.size() < 2) fail(n, "input must have a channel axis");
      const float eps = n.float_attr("epsilon", 1e-5f);
      out = x;
      const std::int64_t C = x.shape[1];
      std::int64_t inner = 1;
      for (std::size_t d = 2; d < x.shape.size(); ++d) inner *= x.shape[d];
      for (std::size_t k = 0; k < out.data.size(); ++k) {
        const auto c = static_cast<std::size_t>((static_cast<std::int64_t>(k) / inner) % C);
        out.data[k] = (out.data[k] - mean.data[c]) / std::sqrt(var.data[c] + eps) * scale.data[c] + bias.data[c];
      }
    } else if (op == "Relu") {
      out = get(n, 0);
      for (auto& v : out.data) v = std::max(v, 0.0f);
    } else if (op == "Sigmoid") {
      out = get(n, 0);
      for (auto& v : out.data) v = 1.0f / (1.0f + std::exp(-v));
    } else if (op == "Identity" || op == "Dropout") {
      out = get(n, 0);
    } else if (op == "MaxPool") {
      out = max_pool(n, get(n, 0));
    } else if (op == "GlobalAveragePool") {
      const Tensor& x = get(n, 0);
      require_rank(n, x, 4);
      const std::int64_t hw = x.shape[2] * x.shape[3];
      out = {{x.shape[0], x.shape[1], 1, 1}, {}};
      out.data.resize(out.numel());
      for (std::size_t k = 0; k < out.data.size(); ++k) {
        double s = 0.0;
        for (std::int64_t p = 0; p < hw; ++p) s += x.data[k * static_cast<std::size_t>(hw) + static_cast<std::size_t>(p)];
        out.data[k] = static_cast<float>(s / static_cast<double>(hw));
      }
    } else if (op == "Add") {
      out = broadcast_binary(n, get(n, 0), get(n, 1), std::plus<float>());
    } else if (op == "Sub") {
      out = broadcast_binary(n, get(n, 0), get(n, 1), std::minus<float>());
    } else if (op == "Mul") {
      out = broadcast_binary(n, get(n, 0), get(n, 1), std::multiplies<float>());
    } else if (op == "Div") {
      out = broadcast_binary(n, get(n, 0), get(n, 1), std::divides<float>());
    } else if (op == "Flatten") {
      out = get(n, 0);
      const auto rank = static_cast<std::int64_t>(out.shape.size());
      std::int64_t axis = n.int_attr("axis", 1);
      if (axis < 0) axis += rank;
      if (axis < 0 || axis > rank) fail(n, "axis out of range");
      std::int64_t outer = 1;
      for (std::int64_t d = 0; d < axis; ++d) outer *= out.shape[static_cast<std::size_t>(d)];
      out.shape = {outer, static_cast<std::int64_t>(out.numel()) / std::max<std::int64_t>(outer, 1)};
    } else if (op == "Reshape") {
      out = get(n, 0);
      Shape target = g.int_constants.at(n.inputs[1]);
      std::int64_t known = 1;
      int infer = -1;
      for (std::size_t d = 0; d < target.size(); ++d) {
        if (target[d] == 0) {
          if (d >= out.shape.size()) fail(n, "shape 0 refers past input rank");
          target[d] = out.shape[d];
        }
        if (target[d] == -1) {
          if (infer >= 0) fail(n, "more than one -1 in shape");
          infer = static_cast<int>(d);
        } else {
          known *= target[d];
        }
      }
      const auto total = static_cast<std::int64_t>(out.numel());
      if (infer >= 0 && known > 0) target[static_cast<std::size_t>(infer)] = total / known;
      out.shape = target;
      if (static_cast<std::int64_t>(out.numel()) != total) fail(n, "cannot reshape to " + shape_str(target));
    } else if (op == "Gemm") {
      out = gemm(n, get(n, 0), get(n, 1), opt(n, 2));
    } else if (op == "MatMul") {
      const Tensor& a = get(n, 0);
      const Tensor& b = get(n, 1);
      if (a.shape.size() < 2 || b.shape.size() != 2) fail(n, "only [..,M,K] x [K,N] is supported");
      Tensor a2 = a;
      const std::int64_t K = a.shape.back();
      a2.shape = {static_cast<std::int64_t>(a.numel()) / K, K};
      Node plain;
      plain.op = "MatMul";
      out = gemm(plain, a2, b, nullptr);
      Shape s = a.shape;
      s.back() = b.shape[1];
      out.shape = s;
    } else if (op == "Softmax") {
      out = softmax(n, get(n, 0), g.opset);
    } else {
      fail(n, "operator is not implemented");
    }
    for (const float v : out.data) {
      if (!std::isfinite(v)) {
        if (op == "MaxPool") fail(n, "window covers only padding");
        fail(n, "produced a non-finite value");
      }
    }
    env[n.outputs.at(0)] = std::move(out);
  }
  if (auto it = env.find(g.output); it != env.end()) return it->second;
  if (auto it = g.constants.find(g.output); it != g.constants.end()) return it->second;
  throw ModelError(Kind::Runtime, "graph output '" + g.output + "' was not produced");
}

}  // namespace pricce::onnx
