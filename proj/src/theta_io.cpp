#include "fractalscape/theta_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fractalscape/error.hpp"

namespace fractalscape {

namespace {

constexpr const char* kMagic = "fractalscape-theta";

std::string format_value(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_value(const std::string& token) {
  std::string t;
  for (char c : token) {
    if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
  }
  if (t == "-inf") return -INFINITY;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error(ErrorKind::layout_mismatch, "not a number: '" + token + "'");
  }
  return v;
}

std::size_t header_count(const std::map<std::string, std::string>& kv, const std::string& key, std::size_t fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return static_cast<std::size_t>(std::stoull(it->second));
  } catch (const std::exception&) {
    throw Error(ErrorKind::layout_mismatch, "bad header field " + key + "=" + it->second);
  }
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) out.push_back(parse_value(token));
  return out;
}

void write_theta(std::ostream& out, const ParamVector& theta) {
  const auto& spec = theta.spec();
  out << "# " << kMagic << " p=" << theta.size() << " policy=" << spec.kind_name() << " n=" << spec.state_dim
      << " m=" << spec.action_dim << " r=" << spec.hidden << " beta=" << format_value(spec.beta) << '\n';
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (i) out << ',';
    out << format_value(theta[i]);
  }
  out << '\n';
}

void write_theta(const std::string& path, const ParamVector& theta) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot open " + path + " for writing");
  write_theta(out, theta);
}

ParamVector read_theta(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.empty()) {
    throw Error(ErrorKind::layout_mismatch, "theta file is empty");
  }
  std::istringstream hs(header);
  std::string hash, magic;
  hs >> hash >> magic;
  if (hash != "#" || magic != kMagic) throw Error(ErrorKind::layout_mismatch, "theta file has no layout header");
  std::map<std::string, std::string> kv;
  std::string field;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::layout_mismatch, "bad header field '" + field + "'");
    kv[field.substr(0, eq)] = field.substr(eq + 1);
  }
  if (!kv.count("p") || !kv.count("policy")) {
    throw Error(ErrorKind::layout_mismatch, "theta header needs p= and policy=");
  }

  PolicySpec spec;
  try {
    spec.kind = PolicySpec::kind_from_name(kv["policy"]);
  } catch (const Error& e) {
    throw Error(ErrorKind::layout_mismatch, e.what());
  }
  spec.state_dim = header_count(kv, "n", 1);
  spec.action_dim = header_count(kv, "m", 1);
  spec.hidden = header_count(kv, "r", 0);
  if (kv.count("beta")) spec.beta = parse_value(kv["beta"]);
  const std::size_t p = header_count(kv, "p", 0);

  std::string row;
  std::vector<double> values;
  if (std::getline(in, row) && !row.empty()) values = parse_number_list(row);
  if (values.size() != p) {
    throw Error(ErrorKind::layout_mismatch, "header says p=" + std::to_string(p) + " but the row has " +
                                                std::to_string(values.size()) + " values");
  }
  if (spec.param_count() != p) {
    throw Error(ErrorKind::layout_mismatch, "header p=" + std::to_string(p) + " disagrees with its layout (" +
                                                std::to_string(spec.param_count()) + ")");
  }
  return ParamVector(spec, std::move(values));
}

ParamVector read_theta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot open theta file " + path);
  return read_theta(in);
}

}  // namespace fractalscape
