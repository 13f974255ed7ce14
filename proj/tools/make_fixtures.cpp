// Regenerates tests/fixtures: small images, dummy ONNX models and the
// expected predictions of the dummy classifier.
//
//   make_fixtures <fixtures-dir>

#include <cstring>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include <json.hpp>

#include "onnx.pb.h"
#include "pricce/classifier.hpp"
#include "pricce/fileutil.hpp"
#include "pricce/image_io.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kFixtureImages = 10;

void add_tensor(::onnx::GraphProto& g, const std::string& name, std::vector<std::int64_t> dims, std::mt19937& rng,
                double scale) {
  auto* t = g.add_initializer();
  t->set_name(name);
  t->set_data_type(::onnx::TensorProto::FLOAT);
  std::size_t n = 1;
  for (auto d : dims) {
    t->add_dims(d);
    n *= static_cast<std::size_t>(d);
  }
  std::normal_distribution<float> dist(0.0f, static_cast<float>(scale));
  std::vector<float> v(n);
  for (auto& x : v) x = dist(rng);
  t->set_raw_data(std::string(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float)));
}

::onnx::NodeProto* add_node(::onnx::GraphProto& g, const std::string& op, std::vector<std::string> in,
                            std::vector<std::string> out) {
  auto* n = g.add_node();
  n->set_op_type(op);
  n->set_name(op + "_" + std::to_string(g.node_size()));
  for (auto& s : in) n->add_input(s);
  for (auto& s : out) n->add_output(s);
  return n;
}

void ints_attr(::onnx::NodeProto* n, const std::string& name, std::vector<std::int64_t> v) {
  auto* a = n->add_attribute();
  a->set_name(name);
  a->set_type(::onnx::AttributeProto::INTS);
  for (auto x : v) a->add_ints(x);
}

void int_attr(::onnx::NodeProto* n, const std::string& name, std::int64_t v) {
  auto* a = n->add_attribute();
  a->set_name(name);
  a->set_type(::onnx::AttributeProto::INT);
  a->set_i(v);
}

void set_value_info(::onnx::ValueInfoProto* v, const std::string& name, std::vector<std::int64_t> dims) {
  v->set_name(name);
  auto* tt = v->mutable_type()->mutable_tensor_type();
  tt->set_elem_type(::onnx::TensorProto::FLOAT);
  for (auto d : dims) tt->mutable_shape()->add_dim()->set_dim_value(d);
}

struct ModelOptions {
  int classes = 7;
  bool class_order = true;
};

std::string build_model(const ModelOptions& opt) {
  ::onnx::ModelProto m;
  m.set_ir_version(8);
  m.set_producer_name("make_fixtures");
  auto* os = m.add_opset_import();
  os->set_domain("");
  os->set_version(13);
  auto meta = [&](const std::string& k, const std::string& v) {
    auto* p = m.add_metadata_props();
    p->set_key(k);
    p->set_value(v);
  };
  // Deliberately not in EnhancerId order, so reordering is exercised.
  if (opt.class_order) meta("class_order", R"(["msrcr","he","dhe","ying","simplest-cb","bpdhe","cao"])");
  meta("normalization_mean", "[0.485, 0.456, 0.406]");
  meta("normalization_std", "[0.229, 0.224, 0.225]");
  meta("resize", "bilinear");
  meta("output", "logits");

  auto& g = *m.mutable_graph();
  g.set_name("dummy_classifier");
  std::mt19937 rng(20240607);
  add_tensor(g, "conv_w", {4, 3, 3, 3}, rng, 0.3);
  add_tensor(g, "conv_b", {4}, rng, 0.1);
  add_tensor(g, "fc1_w", {8, 4}, rng, 4.0);
  add_tensor(g, "fc1_b", {8}, rng, 0.1);
  add_tensor(g, "fc2_w", {opt.classes, 8}, rng, 0.2);
  add_tensor(g, "fc2_b", {opt.classes}, rng, 0.1);

  auto* conv = add_node(g, "Conv", {"input", "conv_w", "conv_b"}, {"c1"});
  ints_attr(conv, "kernel_shape", {3, 3});
  ints_attr(conv, "strides", {2, 2});
  ints_attr(conv, "pads", {1, 1, 1, 1});
  add_node(g, "Relu", {"c1"}, {"r1"});
  auto* pool = add_node(g, "MaxPool", {"r1"}, {"p1"});
  ints_attr(pool, "kernel_shape", {2, 2});
  ints_attr(pool, "strides", {2, 2});
  add_node(g, "GlobalAveragePool", {"p1"}, {"gap"});
  int_attr(add_node(g, "Flatten", {"gap"}, {"flat"}), "axis", 1);
  int_attr(add_node(g, "Gemm", {"flat", "fc1_w", "fc1_b"}, {"h1"}), "transB", 1);
  add_node(g, "Relu", {"h1"}, {"h1r"});
  add_node(g, "Dropout", {"h1r"}, {"h1d"});
  int_attr(add_node(g, "Gemm", {"h1d", "fc2_w", "fc2_b"}, {"logits"}), "transB", 1);

  set_value_info(g.add_input(), "input", {1, 3, pricce::kModelInputSide, pricce::kModelInputSide});
  set_value_info(g.add_output(), "logits", {1, opt.classes});
  return m.SerializeAsString();
}

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <fixtures-dir>\n";
    return 1;
  }
  const fs::path root = argv[1];
  try {
    for (int i = 0; i < kFixtureImages; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "fx%02d.png", i);
      pricce::write_image(root / "images" / name, pricce::support::natural_image(32, 32, 1000 + i));
    }

    const std::string model = build_model({});
    pricce::atomic_write(root / "models" / "dummy.onnx", model);
    pricce::atomic_write(root / "models" / "six_class.onnx", build_model({6, true}));
    pricce::atomic_write(root / "models" / "no_class_order.onnx", build_model({7, false}));
    std::string corrupt = model.substr(0, model.size() / 2);
    corrupt[corrupt.size() / 3] = '\xff';
    pricce::atomic_write(root / "models" / "corrupt.onnx", corrupt);

    const auto handle = pricce::load_model(root / "models" / "dummy.onnx");
    nlohmann::ordered_json expected = nlohmann::ordered_json::object();
    for (int i = 0; i < kFixtureImages; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "fx%02d.png", i);
      const auto p = pricce::predict(handle, pricce::read_image(root / "images" / name));
      nlohmann::ordered_json probs = nlohmann::ordered_json::array();
      for (double v : p.probabilities) probs.push_back(hexfloat(v));
      expected[name] = {{"label", std::string(pricce::enhancer_name(p.label))}, {"probabilities", probs}};
    }
    pricce::atomic_write(root / "expected_predictions.json", expected.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "make_fixtures: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
