#include "ser/model/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "ser/errors.hpp"

namespace ser::model {

namespace {

constexpr std::uint8_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
               static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | b[1] << 8 | b[2] << 16 |
         static_cast<std::uint32_t>(b[3]) << 24;
}

std::string config_text(const CheckpointData& data) {
  std::ostringstream os;
  const ModelConfig& c = data.config;
  os << "input_dim=" << c.input_dim << "\n"
     << "seq_len=" << c.seq_len << "\n"
     << "lstm_units=" << c.lstm_units << "\n"
     << "lstm_layers=" << c.lstm_layers << "\n"
     << "dense_units=" << c.dense_units << "\n"
     << "dropout=" << c.dropout << "\n"
     << "l2_coeff=" << c.l2_coeff << "\n"
     << "n_classes=" << c.n_classes << "\n"
     << "leaky_slope=" << c.leaky_slope << "\n"
     << "loss_mode=" << loss_mode_name(c.loss_mode) << "\n";
  os << "classes=";
  for (std::size_t i = 0; i < data.class_names.size(); ++i)
    os << (i ? "," : "") << data.class_names[i];
  os << "\n";
  return os.str();
}

void parse_config(const std::string& text, CheckpointData* data) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    ModelConfig& c = data->config;
    if (key == "input_dim") c.input_dim = std::stoi(value);
    else if (key == "seq_len") c.seq_len = std::stoi(value);
    else if (key == "lstm_units") c.lstm_units = std::stoi(value);
    else if (key == "lstm_layers") c.lstm_layers = std::stoi(value);
    else if (key == "dense_units") c.dense_units = std::stoi(value);
    else if (key == "dropout") c.dropout = std::stod(value);
    else if (key == "l2_coeff") c.l2_coeff = std::stod(value);
    else if (key == "n_classes") c.n_classes = std::stoi(value);
    else if (key == "leaky_slope") c.leaky_slope = std::stod(value);
    else if (key == "loss_mode") c.loss_mode = loss_mode_from_name(value);
    else if (key == "classes") {
      data->class_names.clear();
      std::istringstream cs(value);
      std::string name;
      while (std::getline(cs, name, ','))
        if (!name.empty()) data->class_names.push_back(name);
    }
  }
}

}  // namespace

const Mat* CheckpointData::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

void save_checkpoint(const CheckpointData& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);

  out.write("DCRF", 4);
  out.put(static_cast<char>(kVersion));
  const std::string cfg = config_text(data);
  write_u32(out, static_cast<std::uint32_t>(cfg.size()));
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));

  write_u32(out, static_cast<std::uint32_t>(data.tensors.size()));
  for (const auto& [name, tensor] : data.tensors) {
    const auto len = static_cast<std::uint16_t>(name.size());
    char b[2] = {static_cast<char>(len), static_cast<char>(len >> 8)};
    out.write(b, 2);
    out.write(name.data(), len);
    write_u32(out, static_cast<std::uint32_t>(tensor.rows()));
    write_u32(out, static_cast<std::uint32_t>(tensor.cols()));
    for (Eigen::Index i = 0; i < tensor.rows(); ++i)
      for (Eigen::Index j = 0; j < tensor.cols(); ++j) {
        const float v = static_cast<float>(tensor(i, j));
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        write_u32(out, bits);
      }
  }
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "DCRF", 4) != 0)
    throw DataError(path + ": not a checkpoint file");
  const int version = in.get();
  if (version != kVersion)
    throw DataError(path + ": unsupported checkpoint version " +
                    std::to_string(version));

  CheckpointData data;
  const std::uint32_t cfg_len = read_u32(in);
  std::string cfg(cfg_len, '\0');
  in.read(cfg.data(), cfg_len);
  parse_config(cfg, &data);

  const std::uint32_t n_tensors = read_u32(in);
  data.tensors.reserve(n_tensors);
  for (std::uint32_t t = 0; t < n_tensors; ++t) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    std::string name(b[0] | b[1] << 8, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    Mat tensor(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) {
        const std::uint32_t bits = read_u32(in);
        float v;
        std::memcpy(&v, &bits, 4);
        tensor(i, j) = v;
      }
    data.tensors.emplace_back(std::move(name), std::move(tensor));
  }
  if (!in) throw DataError(path + ": truncated checkpoint");
  return data;
}

CheckpointData snapshot(Network& net,
                        const std::vector<std::string>& class_names) {
  CheckpointData data;
  data.config = net.config();
  data.class_names = class_names;
  for (const auto& p : net.params().all())
    data.tensors.emplace_back(p->name, p->value);
  return data;
}

void restore(Network& net, const CheckpointData& data) {
  for (const auto& p : net.params().all()) {
    const Mat* t = data.find(p->name);
    if (t == nullptr)
      throw DataError("checkpoint missing tensor: " + p->name);
    if (t->rows() != p->value.rows() || t->cols() != p->value.cols())
      throw ShapeMismatch("checkpoint shape mismatch for " + p->name);
    p->value = *t;
  }
}

}  // namespace ser::model
