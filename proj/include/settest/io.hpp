#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "settest/data.hpp"

namespace settest {

// JSONL formats, one JSON object per line:
//   sample line:  {"id": "...", "points": [[...], ...], "weight": <optional>}
//   paired line:  {"id": "...", "x": [[...], ...], "y": [[...], ...],
//                  "weight_x": <optional>, "weight_y": <optional>}
// Explicit weights are all-or-none per file and are normalized on load.

namespace detail {

inline Eigen::MatrixXd parse_points(const nlohmann::json& arr,
                                    const std::string& where) {
  if (!arr.is_array() || arr.empty())
    throw validation_error(where + ": 'points' must be a nonempty array of vectors");
  const std::size_t n = arr.size();
  std::size_t d = 0;
  if (!arr[0].is_array() || arr[0].empty())
    throw validation_error(where + ": each point must be a nonempty array of numbers");
  d = arr[0].size();
  Eigen::MatrixXd points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    if (!arr[i].is_array() || arr[i].size() != d)
      throw validation_error(where + ": point " + std::to_string(i) +
                             " has inconsistent dimension");
    for (std::size_t j = 0; j < d; ++j) {
      if (!arr[i][j].is_number())
        throw validation_error(where + ": point " + std::to_string(i) +
                               " has a non-numeric coordinate");
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          arr[i][j].get<double>();
    }
  }
  return points;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline nlohmann::json parse_line(const std::string& path, std::size_t lineno,
                                 const std::string& line) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw io_error(path + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

inline std::string line_context(const std::string& path, std::size_t lineno) {
  return path + ":" + std::to_string(lineno);
}

}  // namespace detail

/// Loads a two-sample-format JSONL file. Weights default to the set-size
/// rule unless every line carries an explicit "weight".
inline Sample load_sample(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<ObservationSet> sets;
  std::vector<double> weights;
  bool expect_weights = false;
  std::size_t lineno = 0;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    lineno = k + 1;
    if (lines[k].empty()) continue;
    const auto obj = detail::parse_line(path, lineno, lines[k]);
    const std::string where = detail::line_context(path, lineno);
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("points"))
      throw validation_error(where + ": expected an object with 'id' and 'points'");
    ObservationSet set;
    set.id = obj["id"].get<std::string>();
    set.points = detail::parse_points(obj["points"], where + ": set '" + set.id + "'");
    const bool has_weight = obj.contains("weight");
    if (sets.empty()) {
      expect_weights = has_weight;
    } else if (has_weight != expect_weights) {
      throw validation_error(where + ": explicit weights must be present on all lines or none");
    }
    if (has_weight) weights.push_back(obj["weight"].get<double>());
    try {
      validate(set);
    } catch (const validation_error& e) {
      throw validation_error(where + ": " + e.what());
    }
    sets.push_back(std::move(set));
  }
  if (sets.empty()) throw validation_error(path + ": no sets found");
  std::optional<Eigen::VectorXd> w;
  if (expect_weights)
    w = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                          static_cast<Eigen::Index>(weights.size()));
  try {
    return make_sample(std::move(sets), std::move(w));
  } catch (const validation_error& e) {
    throw validation_error(path + ": " + e.what());
  }
}

/// Loads a paired-format JSONL file.
inline PairedSample load_paired_sample(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<ObservationSet> xs, ys;
  std::vector<double> wx, wy;
  bool expect_weights = false;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::size_t lineno = k + 1;
    if (lines[k].empty()) continue;
    const auto obj = detail::parse_line(path, lineno, lines[k]);
    const std::string where = detail::line_context(path, lineno);
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("x") || !obj.contains("y"))
      throw validation_error(where + ": expected an object with 'id', 'x' and 'y'");
    const std::string id = obj["id"].get<std::string>();
    ObservationSet x{id, detail::parse_points(obj["x"], where + ": pair '" + id + "' (x)")};
    ObservationSet y{id, detail::parse_points(obj["y"], where + ": pair '" + id + "' (y)")};
    const bool has_weight = obj.contains("weight_x") || obj.contains("weight_y");
    if (has_weight && !(obj.contains("weight_x") && obj.contains("weight_y")))
      throw validation_error(where + ": provide both 'weight_x' and 'weight_y' or neither");
    if (xs.empty()) {
      expect_weights = has_weight;
    } else if (has_weight != expect_weights) {
      throw validation_error(where + ": explicit weights must be present on all lines or none");
    }
    if (has_weight) {
      wx.push_back(obj["weight_x"].get<double>());
      wy.push_back(obj["weight_y"].get<double>());
    }
    try {
      validate(x);
      validate(y);
    } catch (const validation_error& e) {
      throw validation_error(where + ": " + e.what());
    }
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
  if (xs.empty()) throw validation_error(path + ": no pairs found");
  std::optional<Eigen::VectorXd> owx, owy;
  if (expect_weights) {
    owx = Eigen::Map<const Eigen::VectorXd>(wx.data(), static_cast<Eigen::Index>(wx.size()));
    owy = Eigen::Map<const Eigen::VectorXd>(wy.data(), static_cast<Eigen::Index>(wy.size()));
  }
  try {
    return make_paired_sample(std::move(xs), std::move(ys), std::move(owx), std::move(owy));
  } catch (const validation_error& e) {
    throw validation_error(path + ": " + e.what());
  }
}

namespace detail {

inline nlohmann::ordered_json points_to_json(const Eigen::MatrixXd& points) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < points.cols(); ++j) row.push_back(points(i, j));
    arr.push_back(std::move(row));
  }
  return arr;
}

}  // namespace detail

inline void save_sample(const Sample& sample, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    nlohmann::ordered_json obj;
    obj["id"] = sample.sets[static_cast<std::size_t>(i)].id;
    obj["points"] = detail::points_to_json(sample.sets[static_cast<std::size_t>(i)].points);
    obj["weight"] = sample.weights(i);
    out << obj.dump() << '\n';
  }
}

inline void save_paired_sample(const PairedSample& sample, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    nlohmann::ordered_json obj;
    obj["id"] = sample.x_sets[k].id;
    obj["x"] = detail::points_to_json(sample.x_sets[k].points);
    obj["y"] = detail::points_to_json(sample.y_sets[k].points);
    obj["weight_x"] = sample.weights_x(i);
    obj["weight_y"] = sample.weights_y(i);
    out << obj.dump() << '\n';
  }
}

}  // namespace settest
