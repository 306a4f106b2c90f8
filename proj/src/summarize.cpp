#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "asd/experiments.hpp"
#include "asd/stats.hpp"

namespace asd {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("'" + path + "': malformed number '" + s + "'");
  }
}

struct Acc {
  double n = 0.0;
  double s = 0.0;
  double s2 = 0.0;
  void add(double v) {
    n += 1.0;
    s += v;
    s2 += v * v;
  }
  double mean() const { return s / n; }
  double se() const {
    if (n < 2.0) return 0.0;
    return std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1.0)) / n);
  }
};

std::string num(double v, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

void summarize_scaling_csv(const std::string& path, const std::vector<std::vector<std::string>>& rows,
                           std::ostringstream& os) {
  std::map<int, Acc> by_k;
  for (const auto& r : rows) {
    if (r.size() < 6) throw InputError("'" + path + "': short row");
    by_k[static_cast<int>(to_double(r[0], path))].add(to_double(r[3], path));
  }
  os << path << " (per-K rounds)\n";
  os << "  K        mean R       SE      K/(2 mean R)\n";
  std::vector<std::pair<double, double>> pts;
  for (const auto& [K, a] : by_k) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-8d %-12.4f %-8.4f %.3f\n", K, a.mean(), a.se(),
                  K / (2.0 * a.mean()));
    os << line;
    pts.emplace_back(K, a.mean());
  }
  try {
    const SlopeFit fit = fit_scaling(pts);
    os << "  slope " << num(fit.slope) << "  intercept " << num(fit.intercept) << "  r² "
       << num(fit.r_squared) << '\n';
  } catch (const Error& e) {
    os << "  slope fit unavailable: " << e.what() << '\n';
  }
}

void summarize_correctness_csv(const std::string& path,
                               const std::vector<std::vector<std::string>>& rows,
                               std::ostringstream& os) {
  std::map<std::pair<std::string, std::string>, Acc> by;
  for (const auto& r : rows) {
    if (r.size() < 6) throw InputError("'" + path + "': short row");
    by[{r[0], r[1]}].add(to_double(r[3], path));
  }
  os << path << " (per-target rounds)\n";
  for (const auto& [key, a] : by) {
    os << "  " << key.first << " " << key.second << ": mean R " << num(a.mean()) << " SE "
       << num(a.se()) << " (" << static_cast<long>(a.n) << " runs)\n";
  }
}

void summarize_csv(const std::string& path, const std::string& body, std::ostringstream& os) {
  std::istringstream is(body);
  std::string header;
  std::getline(is, header);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(is, line);) {
    if (!line.empty()) rows.push_back(split(line, ','));
  }
  if (header.rfind("K,theta,seed,R,seq_calls,par_rounds", 0) == 0) {
    summarize_scaling_csv(path, rows, os);
  } else if (header.rfind("target,arm,seed,R,seq_calls,par_rounds", 0) == 0) {
    summarize_correctness_csv(path, rows, os);
  } else {
    throw InputError("'" + path + "': unrecognized CSV header");
  }
}

}  // namespace

std::string summarize(const std::vector<std::string>& paths) {
  if (paths.empty()) throw InputError("no result files given");
  std::ostringstream os;
  struct Row {
    std::string file;
    std::string experiment;
    std::string check;
    bool passed;
  };
  std::vector<Row> matrix;
  for (const auto& path : paths) {
    const std::string body = read_file(path);
    const auto first = body.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && body[first] == '{') {
      Json j;
      try {
        j = Json::parse(body);
      } catch (const nlohmann::json::exception& e) {
        throw InputError("'" + path + "': " + e.what());
      }
      if (!j.is_object() || !j.contains("experiment") || !j.contains("checks") ||
          !j.contains("schema_version") || !j["checks"].is_array()) {
        throw InputError("'" + path + "': not an experiment result file");
      }
      if (j["schema_version"] != ExperimentConfig::kSchemaVersion) {
        throw InputError("'" + path + "': unsupported schema_version");
      }
      const std::string exp = j["experiment"].get<std::string>();
      for (const auto& c : j["checks"]) {
        matrix.push_back({path, exp, c.at("name").get<std::string>(), c.at("passed").get<bool>()});
      }
      if (exp == "scaling" && j.contains("results") && j["results"].contains("fit")) {
        const auto& f = j["results"]["fit"];
        os << path << ": slope " << num(f["slope"].get<double>()) << "  r² "
           << num(f["r_squared"].get<double>()) << '\n';
      }
    } else if (first != std::string::npos) {
      summarize_csv(path, body, os);
    } else {
      throw InputError("'" + path + "': empty file");
    }
  }
  if (!matrix.empty()) {
    os << "pass/fail matrix\n";
    std::size_t passed = 0;
    for (const auto& r : matrix) {
      os << "  " << (r.passed ? "PASS" : "FAIL") << "  " << r.experiment << "  " << r.check
         << "  [" << r.file << "]\n";
      passed += r.passed ? 1 : 0;
    }
    os << "  " << passed << "/" << matrix.size() << " checks passed\n";
  }
  return os.str();
}

}  // namespace asd
