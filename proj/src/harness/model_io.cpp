#include "mixguide/harness/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json_util.hpp"
#include "mixguide/harness/csv.hpp"

namespace mixguide::harness {

namespace detail {

json parse_json_document(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is a 1-based offset into the text; recover line:column.
    std::size_t line = 1, col = 1;
    const std::size_t stop = e.byte > 0 ? std::min(text.size(), e.byte - 1) : 0;
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                      e.what());
  }
}

void config_fail(const std::string& origin, const std::string& what) {
  throw ConfigError(origin + ": " + what);
}

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& origin, const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const auto& k : allowed) ok = ok || item.key() == k;
    if (!ok) config_fail(origin, where + ": unknown key \"" + item.key() + "\"");
  }
}

double get_finite(const json& v, const std::string& origin, const std::string& where) {
  if (!v.is_number()) config_fail(origin, where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_fail(origin, where + ": must be finite");
  return x;
}

namespace {

std::vector<double> number_array(const json& v, const std::string& origin,
                                 const std::string& where) {
  if (!v.is_array()) config_fail(origin, where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(get_finite(v[i], origin, where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

ModelSpec model_from_json(const json& j, const std::string& origin) {
  if (!j.is_object()) config_fail(origin, "model: expected an object");
  check_keys(j, {"weights", "means", "covariance", "label"}, origin, "model");
  if (!j.contains("weights")) config_fail(origin, "model: missing \"weights\"");
  if (!j.contains("means")) config_fail(origin, "model: missing \"means\"");

  std::vector<double> weights = number_array(j["weights"], origin, "model.weights");

  const json& jm = j["means"];
  if (!jm.is_array() || jm.empty()) config_fail(origin, "model.means: expected array of arrays");
  std::vector<Vec> means;
  means.reserve(jm.size());
  for (std::size_t i = 0; i < jm.size(); ++i)
    means.push_back(number_array(jm[i], origin, "model.means[" + std::to_string(i) + "]"));
  const std::size_t d = means.front().size();

  int label = 1;
  if (j.contains("label")) {
    if (!j["label"].is_number_integer()) config_fail(origin, "model.label: expected an integer");
    label = j["label"].get<int>();
  }
  if (label < 1 || label > static_cast<int>(weights.size()))
    config_fail(origin, "model.label: out of range (one-based, 1.." +
                            std::to_string(weights.size()) + ")");

  try {
    if (j.contains("covariance")) {
      const json& jc = j["covariance"];
      if (!jc.is_array() || jc.size() != d)
        config_fail(origin, "model.covariance: expected a " + std::to_string(d) + "x" +
                                std::to_string(d) + " array of arrays");
      std::vector<double> cov;
      cov.reserve(d * d);
      for (std::size_t r = 0; r < d; ++r) {
        std::vector<double> row =
            number_array(jc[r], origin, "model.covariance[" + std::to_string(r) + "]");
        if (row.size() != d)
          config_fail(origin, "model.covariance[" + std::to_string(r) + "]: wrong length");
        cov.insert(cov.end(), row.begin(), row.end());
      }
      return ModelSpec(MixtureModel(std::move(weights), std::move(means), std::move(cov)),
                       label - 1);
    }
    return ModelSpec(MixtureModel::isotropic(std::move(weights), std::move(means)), label - 1);
  } catch (const std::invalid_argument& e) {
    config_fail(origin, std::string("model: ") + e.what());
  }
}

}  // namespace detail

ModelSpec parse_model_text(const std::string& text, const std::string& origin) {
  return detail::model_from_json(detail::parse_json_document(text, origin), origin);
}

ModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_text(buf.str(), path);
}

std::string model_to_text(const MixtureModel& m, int label) {
  detail::json j;
  j["weights"] = m.weights();
  j["means"] = m.means();
  const int d = m.dim();
  std::vector<std::vector<double>> cov(d, std::vector<double>(d));
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) cov[r][c] = m.covariance()[r * d + c];
  j["covariance"] = cov;
  j["label"] = label + 1;
  return j.dump(2) + "\n";
}

}  // namespace mixguide::harness
