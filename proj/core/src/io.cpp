#include "gmmfit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gmmfit/learner.hpp"
#include "json_util.hpp"

namespace gmmfit {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<double> read_samples_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    std::string tok = line.substr(b, e - b + 1);
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v))
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": not a finite number");
    out.push_back(v);
  }
  return out;
}

void write_samples_csv(const std::string& path, const std::vector<double>& values) {
  std::string text;
  text.reserve(values.size() * 24);
  char buf[64];
  for (double v : values) {
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    text.append(buf, r.ptr);
    text.push_back('\n');
  }
  write_text_file(path, text);
}

std::string to_json(const FitReport& r) {
  nlohmann::ordered_json j;
  j["model"] = nlohmann::ordered_json::parse(to_json(r.theta));
  j["nu"] = r.nu;
  j["allocation"] = r.allocation;
  j["l1_to_estimate"] = r.l1_to_estimate;
  j["ak_to_estimate"] = r.ak_to_estimate;
  const auto& s = r.solver;
  j["solver"] = {{"achieved", s.achieved},
                 {"nu_iterations", s.nu_iterations},
                 {"max_nu_iterations", s.max_nu_iterations},
                 {"allocations", s.allocations},
                 {"evaluations", s.evaluations},
                 {"lambda", s.lambda},
                 {"eta", s.eta},
                 {"phi", s.phi},
                 {"lipschitz", s.lipschitz},
                 {"K", s.K},
                 {"taylor_degree", s.taylor_degree},
                 {"estimate_pieces", s.estimate_pieces},
                 {"estimate_degree", s.estimate_degree},
                 {"fallback", s.fallback}};
  return j.dump(2);
}

}  // namespace gmmfit
