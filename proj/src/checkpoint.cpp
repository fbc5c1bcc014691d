#include "grokmlp/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace grokmlp {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index r, Eigen::Index c,
                                 const char* name) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != r) {
    throw std::runtime_error(std::string("checkpoint: field '") + name + "' must be " +
                             std::to_string(r) + " rows");
  }
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
      throw std::runtime_error(std::string("checkpoint: row ") + std::to_string(i) + " of '" +
                               name + "' must have " + std::to_string(c) + " entries");
    }
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

}  // namespace

void write_text_atomic(const std::string& text, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_checkpoint(const Model& model, const CheckpointInfo& info,
                     const std::filesystem::path& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["p"] = model.p;
  j["n_hidden"] = model.n_hidden;
  j["alpha"] = info.alpha;
  j["master_seed"] = info.master_seed;
  j["step"] = info.step;
  j["kind"] = info.kind;
  j["stop_reason"] = info.stop_reason;
  if (info.setting) j["setting"] = *info.setting;
  if (info.source_checkpoint) j["source_checkpoint"] = *info.source_checkpoint;
  j["w_a"] = matrix_to_json(model.w_a);
  j["w_b"] = matrix_to_json(model.w_b);
  json bias = json::array();
  for (Eigen::Index i = 0; i < model.bias_h.size(); ++i) bias.push_back(model.bias_h[i]);
  j["bias_h"] = std::move(bias);
  j["w_out"] = matrix_to_json(model.w_out);
  write_text_atomic(j.dump(), path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint: " + path.string() + " is not valid JSON: " + e.what());
  }

  for (const char* field : {"format_version", "p", "n_hidden", "alpha", "master_seed", "step",
                            "kind", "stop_reason", "w_a", "w_b", "bias_h", "w_out"}) {
    if (!j.contains(field)) {
      throw std::runtime_error(std::string("checkpoint: missing field '") + field + "' in " +
                               path.string());
    }
  }
  const int version = j["format_version"].get<int>();
  if (version != kFormatVersion) {
    throw std::runtime_error("checkpoint: format_version " + std::to_string(version) +
                             " in " + path.string() + " (this build reads version " +
                             std::to_string(kFormatVersion) + ")");
  }

  LoadedCheckpoint loaded;
  loaded.model.p = j["p"].get<int>();
  loaded.model.n_hidden = j["n_hidden"].get<int>();
  if (loaded.model.p < 2 || loaded.model.n_hidden < 1) {
    throw std::runtime_error("checkpoint: invalid dimensions in " + path.string());
  }
  const auto n = static_cast<Eigen::Index>(loaded.model.n_hidden);
  const auto p = static_cast<Eigen::Index>(loaded.model.p);
  loaded.model.w_a = matrix_from_json(j["w_a"], n, p, "w_a");
  loaded.model.w_b = matrix_from_json(j["w_b"], n, p, "w_b");
  loaded.model.w_out = matrix_from_json(j["w_out"], n, p, "w_out");
  const json& bias = j["bias_h"];
  if (!bias.is_array() || static_cast<Eigen::Index>(bias.size()) != n) {
    throw std::runtime_error("checkpoint: field 'bias_h' must have n_hidden entries");
  }
  loaded.model.bias_h.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    loaded.model.bias_h[i] = bias[static_cast<std::size_t>(i)].get<double>();
  }

  loaded.info.kind = j["kind"].get<std::string>();
  loaded.info.step = j["step"].get<long>();
  loaded.info.alpha = j["alpha"].get<double>();
  loaded.info.master_seed = j["master_seed"].get<std::uint64_t>();
  loaded.info.stop_reason = j["stop_reason"].get<std::string>();
  if (j.contains("setting")) loaded.info.setting = j["setting"].get<std::string>();
  if (j.contains("source_checkpoint")) {
    loaded.info.source_checkpoint = j["source_checkpoint"].get<std::string>();
  }
  return loaded;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string metrics_csv_header() {
  return "# format_version=" + std::to_string(kFormatVersion) +
         "\nstep,train_loss,train_acc,val_acc\n";
}

std::string metrics_csv_row(const MetricsRow& row) {
  std::ostringstream out;
  out << row.step << ',' << format_double(row.train_loss) << ',' << format_double(row.train_acc)
      << ',' << format_double(row.val_acc) << '\n';
  return out.str();
}

void write_metrics_csv(const std::vector<MetricsRow>& history,
                       const std::filesystem::path& path) {
  std::string text = metrics_csv_header();
  for (const MetricsRow& row : history) text += metrics_csv_row(row);
  write_text_atomic(text, path);
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("metrics: cannot open " + path.string());
  std::vector<MetricsRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("step,", 0) == 0) continue;
    MetricsRow row;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf", &row.step, &row.train_loss, &row.train_acc,
                    &row.val_acc) != 4) {
      throw std::runtime_error("metrics: malformed row in " + path.string() + ": " + line);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace grokmlp
