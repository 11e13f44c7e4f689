#include "bvf/adapters.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bvf/errors.hpp"
#include "bvf/rng.hpp"

namespace fs = std::filesystem;

namespace bvf {

Eigen::VectorXd default_t_grid() {
  Eigen::VectorXd t(10);
  for (int k = 0; k < 10; ++k) t(k) = k + 1;
  return t;
}

Eigen::MatrixXd eval_analytic10d(const Eigen::MatrixXd& thetas,
                                 const Eigen::VectorXd& t_grid) {
  if (thetas.cols() != 10)
    throw std::invalid_argument("eval_analytic10d: expects 10 input parameters");
  const auto n = thetas.rows();
  const auto nt = t_grid.size();
  Eigen::MatrixXd out(n, nt);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double t1 = thetas(r, 0);
    const double t2 = thetas(r, 1);
    double cubic = 0.0;
    for (int i = 2; i <= 10; ++i) {
      const double v = thetas(r, i - 1);
      cubic += v * v * v / static_cast<double>(i);
    }
    const double quad = t1 * t1 + t2 - 1.0;
    const double base = quad * quad + t1 * t1 + 0.1 * t1 * std::exp(t2) + 1.0 + cubic;
    for (Eigen::Index k = 0; k < nt; ++k)
      out(r, k) = base - 2.0 * t1 * std::sqrt(0.5 * t_grid(k));
  }
  return out;
}

Analytic10dAdapter::Analytic10dAdapter(Eigen::VectorXd t_grid, double time_bias)
    : t_grid_(std::move(t_grid)), time_bias_(time_bias) {}

std::string Analytic10dAdapter::name() const {
  return time_bias_ == 0.0 ? "analytic10d" : "analytic10d-biased";
}

Eigen::MatrixXd Analytic10dAdapter::evaluate(const Eigen::MatrixXd& thetas) {
  Eigen::MatrixXd y = eval_analytic10d(thetas, t_grid_);
  if (time_bias_ != 0.0)
    y.rowwise() += (time_bias_ * t_grid_.transpose()).eval();
  return y;
}

std::string format_csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string row_to_csv(const Eigen::MatrixXd& m, Eigen::Index row) {
  std::string out;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c) out += ',';
    out += format_csv_number(m(row, c));
  }
  return out;
}

std::vector<double> parse_csv_row(const std::string& line, const std::string& context) {
  std::vector<double> cells;
  std::istringstream row(line);
  std::string cell;
  while (std::getline(row, cell, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(cell, &used);
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
        ++used;
      if (used != cell.size()) throw std::invalid_argument("trailing characters");
      cells.push_back(v);
    } catch (const std::exception&) {
      throw protocol_error(context + ": unparseable cell '" + cell + "'");
    }
  }
  return cells;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

ExternalAdapter::ExternalAdapter(std::string command, std::string workdir,
                                 std::string cache_dir, int n_outputs)
    : command_(std::move(command)),
      workdir_(std::move(workdir)),
      cache_dir_(std::move(cache_dir)),
      n_outputs_(n_outputs) {
  if (command_.empty())
    throw std::invalid_argument("external adapter requires a nonempty command");
  if (n_outputs_ < 1)
    throw std::invalid_argument("external adapter requires a declared output count");
  if (workdir_.empty()) workdir_ = ".";
  if (cache_dir_.empty()) cache_dir_ = (fs::path(workdir_) / ".bvf_cache").string();
}

Eigen::MatrixXd ExternalAdapter::evaluate(const Eigen::MatrixXd& thetas) {
  const auto n = thetas.rows();
  if (n == 0) throw std::invalid_argument("external adapter: empty parameter batch");
  fs::create_directories(cache_dir_);

  Eigen::MatrixXd result(n, n_outputs_);
  std::vector<Eigen::Index> missing;
  std::vector<std::string> keys(static_cast<std::size_t>(n));

  for (Eigen::Index r = 0; r < n; ++r) {
    const std::string row = row_to_csv(thetas, r);
    keys[static_cast<std::size_t>(r)] =
        hex64(fnv1a64(command_ + "\n" + row));
    const fs::path entry = fs::path(cache_dir_) / (keys[static_cast<std::size_t>(r)] + ".csv");
    std::ifstream cached(entry);
    std::string line;
    if (cached && std::getline(cached, line)) {
      auto cells = parse_csv_row(line, "cache entry " + entry.string());
      if (static_cast<int>(cells.size()) == n_outputs_) {
        for (int c = 0; c < n_outputs_; ++c) result(r, c) = cells[static_cast<std::size_t>(c)];
        continue;
      }
    }
    missing.push_back(r);
  }
  if (missing.empty()) return result;

  // One subprocess call for the whole uncached batch.
  static std::atomic<std::uint64_t> call_counter{0};
  const std::string tag = hex64(derive_seed(fnv1a64(command_), call_counter.fetch_add(1)));
  const fs::path in_path = fs::path(workdir_) / ("bvf_in_" + tag + ".csv");
  const fs::path out_path = fs::path(workdir_) / ("bvf_out_" + tag + ".csv");
  {
    std::ofstream in(in_path);
    for (Eigen::Index c = 0; c < thetas.cols(); ++c)
      in << (c ? "," : "") << "p" << (c + 1);
    in << "\n";
    for (Eigen::Index r : missing) in << row_to_csv(thetas, r) << "\n";
  }

  const std::string cmdline =
      command_ + " " + in_path.string() + " " + out_path.string() + " 2>&1";
  ++launches_;
  FILE* pipe = popen(cmdline.c_str(), "r");
  if (!pipe) throw model_failure_error("failed to launch model command: " + command_);
  std::string captured;
  char buf[512];
  while (std::fgets(buf, sizeof(buf), pipe)) captured += buf;
  const int status = pclose(pipe);
  if (status != 0) {
    std::error_code ec;
    fs::remove(in_path, ec);
    fs::remove(out_path, ec);
    throw model_failure_error(
        "model command exited with status " + std::to_string(status), captured);
  }

  std::ifstream out_file(out_path);
  if (!out_file)
    throw protocol_error("model wrote no output file: " + out_path.string());
  std::string line;
  if (!std::getline(out_file, line))
    throw protocol_error("model output missing header row");
  std::vector<std::vector<double>> rows;
  while (std::getline(out_file, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_csv_row(line, "model output"));
  }
  if (rows.size() != missing.size())
    throw protocol_error("model returned " + std::to_string(rows.size()) +
                         " rows for " + std::to_string(missing.size()) + " inputs");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != n_outputs_)
      throw protocol_error("model row has " + std::to_string(rows[i].size()) +
                           " columns, expected " + std::to_string(n_outputs_));
    const Eigen::Index r = missing[i];
    for (int c = 0; c < n_outputs_; ++c) result(r, c) = rows[i][static_cast<std::size_t>(c)];
    std::ofstream entry(fs::path(cache_dir_) /
                        (keys[static_cast<std::size_t>(r)] + ".csv"));
    for (int c = 0; c < n_outputs_; ++c)
      entry << (c ? "," : "") << format_csv_number(result(r, c));
    entry << "\n";
  }
  std::error_code ec;
  fs::remove(in_path, ec);
  fs::remove(out_path, ec);
  return result;
}

std::unique_ptr<ModelAdapter> make_adapter(const nlohmann::json& spec) {
  if (!spec.contains("kind")) throw config_error("model.kind", "missing");
  const std::string kind = spec["kind"].get<std::string>();

  auto t_grid = [&]() -> Eigen::VectorXd {
    if (!spec.contains("t_grid")) return default_t_grid();
    auto v = spec["t_grid"].get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  };

  if (kind == "analytic10d") {
    return std::make_unique<Analytic10dAdapter>(t_grid(), 0.0);
  }
  if (kind == "analytic10d-biased") {
    const double bias = spec.value("bias", 1.0);
    return std::make_unique<Analytic10dAdapter>(t_grid(), bias);
  }
  if (kind == "identity") {
    if (!spec.contains("dim")) throw config_error("model.dim", "missing for identity model");
    return std::make_unique<IdentityAdapter>(spec["dim"].get<int>());
  }
  if (kind == "external") {
    if (!spec.contains("command"))
      throw config_error("model.command", "missing for external model");
    if (!spec.contains("outputs"))
      throw config_error("model.outputs", "missing for external model");
    std::string cache = spec.value("cache_dir", std::string());
    if (const char* env = std::getenv("BVF_CACHE_DIR")) cache = env;
    return std::make_unique<ExternalAdapter>(spec["command"].get<std::string>(),
                                             spec.value("workdir", std::string(".")),
                                             cache, spec["outputs"].get<int>());
  }
  throw config_error("model.kind", "unknown model kind '" + kind + "'");
}

}  // namespace bvf
