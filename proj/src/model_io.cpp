#include "ekl/model_io.hpp"

#include <bit>
#include <cstring>
#include <map>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "ekl/errors.hpp"
#include "ekl/features.hpp"
#include "ekl/io_util.hpp"

// Arrays are dumped as raw column-major float64; the format pins them as
// little-endian, which is all this code supports.
static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; add byte swapping for this platform");

namespace ekl {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'E', 'K', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_matrix(std::string& buf, const Eigen::MatrixXd& m) {
  buf.append(reinterpret_cast<const char*>(m.data()),
             static_cast<std::size_t>(m.size()) * sizeof(double));
}

struct Cursor {
  const std::string& buf;
  std::size_t pos = 0;

  const char* take(std::size_t n) {
    if (buf.size() - pos < n) throw std::runtime_error("truncated model file");
    const char* ptr = buf.data() + pos;
    pos += n;
    return ptr;
  }

  std::uint32_t u32() {
    const char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    const char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) {
    const auto count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    const char* p = take(count * sizeof(double));
    Eigen::MatrixXd m(rows, cols);
    std::memcpy(m.data(), p, count * sizeof(double));
    return m;
  }
};

struct ArraySpec {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

Eigen::Index json_index(const json& j, const char* key) {
  const auto v = j.at(key).get<std::int64_t>();
  if (v < 0) throw std::runtime_error(std::string("model header: '") + key + "' is negative");
  return static_cast<Eigen::Index>(v);
}

/// Fill the derived prediction state from the serialized members.
void prepare(TrainedModel& tm) {
  if (tm.mode == ModelMode::Ovk) {
    tm.ovk.lambda = tm.lambda;
    tm.ovk.c = tm.ovk_coef;
    tm.ovk.z = low_rank_factor(tm.em, tm.phi);
  } else {
    tm.sc.lambda = tm.lambda;
    tm.sc.coef = tm.ptr_coef;
    // b and proj are loaded verbatim by load_model before prepare() runs; a
    // freshly packaged model gets them from the original fit instead.
  }
}

}  // namespace

TrainedModel make_trained(const FittedModel& fm) {
  if (fm.method != Method::Ekl && fm.method != Method::PtrEkl)
    throw StructuralError("make_trained: only entangled models can be packaged");
  TrainedModel tm;
  tm.mode = fm.method == Method::Ekl ? ModelMode::Ovk : ModelMode::Ptr;
  tm.lambda = fm.lambda;
  tm.gamma = fm.gamma;
  tm.seed = fm.cfg.learn.seed;
  tm.em = fm.em;
  tm.phi = apply_feature_map(fm.fmap, fm.x_train);
  if (tm.mode == ModelMode::Ovk) {
    tm.ovk = fm.ovk;
    tm.ovk_coef = fm.ovk.c;
  } else {
    tm.sc = fm.sc;
    tm.ptr_coef = fm.sc.coef;
  }
  return tm;
}

Eigen::MatrixXd predict_trained(const TrainedModel& tm, const Eigen::MatrixXd& x_test) {
  const Eigen::MatrixXd phi_t = apply_feature_map(tm.em.fmap, x_test);
  if (tm.mode == ModelMode::Ovk) return predict_operator_valued(tm.em, tm.ovk, phi_t);
  return predict_scalar(tm.sc, phi_t);
}

void save_model(const TrainedModel& tm, const std::string& path) {
  const Eigen::Index p = tm.em.p;
  const Eigen::Index m = tm.em.m;
  const Eigen::Index r = tm.em.q.cols();
  const Eigen::Index n = tm.phi.cols();
  if (tm.em.q.rows() != m * p) throw StructuralError("save_model: Q has the wrong row count");
  if (tm.phi.rows() != m) throw StructuralError("save_model: training features have the wrong row count");

  std::vector<std::pair<ArraySpec, const Eigen::MatrixXd*>> arrays;
  Eigen::MatrixXd ovk_coef_mat;  // column view of the flat coefficient
  arrays.push_back({{"q", tm.em.q.rows(), r}, &tm.em.q});
  arrays.push_back({{"phi", m, n}, &tm.phi});
  const FeatureMap& fmap = tm.em.fmap;
  switch (fmap.method) {
    case FeatureMethod::ExactLinear:
      break;
    case FeatureMethod::Nystrom:
      arrays.push_back({{"landmarks", fmap.landmarks.rows(), fmap.landmarks.cols()}, &fmap.landmarks});
      arrays.push_back({{"whiten", fmap.whiten.rows(), fmap.whiten.cols()}, &fmap.whiten});
      break;
    case FeatureMethod::Rff: {
      arrays.push_back({{"freqs", fmap.freqs.rows(), fmap.freqs.cols()}, &fmap.freqs});
      break;  // phases appended below as a matrix
    }
  }
  Eigen::MatrixXd phases_mat;
  if (fmap.method == FeatureMethod::Rff) {
    phases_mat = fmap.phases;
    arrays.push_back({{"phases", phases_mat.rows(), 1}, &phases_mat});
  }
  if (tm.mode == ModelMode::Ovk) {
    if (tm.ovk_coef.size() != n * p) throw StructuralError("save_model: coefficient length is not n*p");
    ovk_coef_mat = tm.ovk_coef;
    arrays.push_back({{"coef", ovk_coef_mat.rows(), 1}, &ovk_coef_mat});
  } else {
    if (tm.ptr_coef.rows() != n || tm.ptr_coef.cols() != p)
      throw StructuralError("save_model: coefficient is not n x p");
    arrays.push_back({{"coef", n, p}, &tm.ptr_coef});
    arrays.push_back({{"scalar_b", tm.sc.b.rows(), tm.sc.b.cols()}, &tm.sc.b});
    arrays.push_back({{"scalar_proj", tm.sc.proj.rows(), tm.sc.proj.cols()}, &tm.sc.proj});
  }

  json header;
  header["format"] = "entangled-kernel-model";
  header["mode"] = model_mode_name(tm.mode);
  header["lambda"] = tm.lambda;
  header["gamma"] = tm.gamma;
  header["seed"] = tm.seed;
  header["p"] = p;
  header["m"] = m;
  header["r"] = r;
  header["n"] = n;
  header["d"] = fmap.input_dim;
  header["kernel"] = {{"kind", kernel_kind_name(fmap.kernel.kind)},
                      {"bandwidth", fmap.kernel.bandwidth}};
  header["feature_map"] = {{"method", feature_method_name(fmap.method)},
                           {"dim", fmap.dim},
                           {"input_dim", fmap.input_dim},
                           {"seed", fmap.seed}};
  header["arrays"] = json::array();
  for (const auto& [spec, ptr] : arrays)
    header["arrays"].push_back({{"name", spec.name}, {"rows", spec.rows}, {"cols", spec.cols}});

  const std::string header_text = header.dump();
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u64(buf, header_text.size());
  buf += header_text;
  for (const auto& [spec, ptr] : arrays) put_matrix(buf, *ptr);
  atomic_write_file(path, buf);
}

TrainedModel load_model(const std::string& path) {
  const std::string buf = read_file(path);
  Cursor cur{buf};
  const char* magic = cur.take(4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": not a model file (bad magic)");
  const std::uint32_t version = cur.u32();
  if (version != kVersion)
    throw std::runtime_error(path + ": unsupported model format version " +
                             std::to_string(version));
  const std::uint64_t header_len = cur.u64();
  if (header_len > buf.size() - cur.pos)
    throw std::runtime_error(path + ": truncated model file");
  const char* header_start = cur.take(static_cast<std::size_t>(header_len));

  TrainedModel tm;
  std::vector<ArraySpec> specs;
  try {
    const json header = json::parse(header_start, header_start + header_len);
    tm.mode = model_mode_from_name(header.at("mode").get<std::string>());
    tm.lambda = header.at("lambda").get<double>();
    tm.gamma = header.at("gamma").get<double>();
    tm.seed = header.at("seed").get<std::uint64_t>();
    tm.em.p = json_index(header, "p");
    tm.em.m = json_index(header, "m");

    const json& kj = header.at("kernel");
    FeatureMap& fmap = tm.em.fmap;
    fmap.kernel.kind = kernel_kind_from_name(kj.at("kind").get<std::string>());
    fmap.kernel.bandwidth = kj.at("bandwidth").get<double>();
    const json& fj = header.at("feature_map");
    fmap.method = feature_method_from_name(fj.at("method").get<std::string>());
    fmap.dim = json_index(fj, "dim");
    fmap.input_dim = json_index(fj, "input_dim");
    fmap.seed = fj.at("seed").get<std::uint64_t>();

    for (const json& aj : header.at("arrays")) {
      ArraySpec spec;
      spec.name = aj.at("name").get<std::string>();
      spec.rows = json_index(aj, "rows");
      spec.cols = json_index(aj, "cols");
      if (static_cast<std::uint64_t>(spec.rows) * static_cast<std::uint64_t>(spec.cols) >
          (std::uint64_t{1} << 32))
        throw std::runtime_error("array '" + spec.name + "' is implausibly large");
      specs.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": malformed model header: " + e.what());
  }

  std::map<std::string, Eigen::MatrixXd> data;
  for (const ArraySpec& spec : specs) data[spec.name] = cur.matrix(spec.rows, spec.cols);
  if (cur.pos != buf.size())
    throw std::runtime_error(path + ": trailing bytes after the last array");

  const auto want = [&](const char* name) -> Eigen::MatrixXd& {
    const auto it = data.find(name);
    if (it == data.end())
      throw std::runtime_error(path + ": model file is missing array '" + std::string(name) + "'");
    return it->second;
  };

  const Eigen::Index p = tm.em.p;
  const Eigen::Index m = tm.em.m;
  if (p < 1 || m < 1) throw std::runtime_error(path + ": dimensions must be positive");
  tm.em.q = std::move(want("q"));
  if (tm.em.q.rows() != m * p || tm.em.q.cols() < 1)
    throw std::runtime_error(path + ": factor array has the wrong shape");
  tm.phi = std::move(want("phi"));
  if (tm.phi.rows() != m || tm.phi.cols() < 1)
    throw std::runtime_error(path + ": training feature array has the wrong shape");
  const Eigen::Index n = tm.phi.cols();

  FeatureMap& fmap = tm.em.fmap;
  if (fmap.dim != m) throw std::runtime_error(path + ": feature map dimension disagrees with m");
  switch (fmap.method) {
    case FeatureMethod::ExactLinear:
      if (fmap.input_dim != m)
        throw std::runtime_error(path + ": exact feature map must have dim == input_dim");
      break;
    case FeatureMethod::Nystrom:
      fmap.landmarks = std::move(want("landmarks"));
      fmap.whiten = std::move(want("whiten"));
      if (fmap.landmarks.cols() != fmap.input_dim || fmap.whiten.rows() != m ||
          fmap.whiten.cols() != fmap.landmarks.rows())
        throw std::runtime_error(path + ": landmark arrays have inconsistent shapes");
      break;
    case FeatureMethod::Rff:
      fmap.freqs = std::move(want("freqs"));
      fmap.phases = std::move(want("phases"));
      if (fmap.freqs.rows() != m || fmap.freqs.cols() != fmap.input_dim ||
          fmap.phases.size() != m)
        throw std::runtime_error(path + ": frequency arrays have inconsistent shapes");
      break;
  }

  if (tm.mode == ModelMode::Ovk) {
    Eigen::MatrixXd& coef = want("coef");
    if (coef.rows() != n * p || coef.cols() != 1)
      throw std::runtime_error(path + ": coefficient array has the wrong shape");
    tm.ovk_coef = coef.col(0);
  } else {
    Eigen::MatrixXd& coef = want("coef");
    if (coef.rows() != n || coef.cols() != p)
      throw std::runtime_error(path + ": coefficient array has the wrong shape");
    tm.ptr_coef = std::move(coef);
    tm.sc.b = std::move(want("scalar_b"));
    tm.sc.proj = std::move(want("scalar_proj"));
    if (tm.sc.b.rows() != m || tm.sc.b.cols() != m || tm.sc.proj.rows() != m ||
        tm.sc.proj.cols() != p)
      throw std::runtime_error(path + ": scalar solve arrays have inconsistent shapes");
  }

  prepare(tm);
  return tm;
}

const char* model_mode_name(ModelMode mode) {
  return mode == ModelMode::Ovk ? "ovk" : "ptr";
}

ModelMode model_mode_from_name(const std::string& name) {
  if (name == "ovk") return ModelMode::Ovk;
  if (name == "ptr") return ModelMode::Ptr;
  throw std::runtime_error("unknown model mode '" + name + "'");
}

}  // namespace ekl
