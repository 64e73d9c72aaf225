#include "zsinfer/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "zsinfer/errors.hpp"

namespace zsinfer::io {

namespace {

using nlohmann::json;

std::string loc(const std::filesystem::path& path, std::size_t line) {
  std::ostringstream os;
  os << path.string() << ":" << line;
  return os.str();
}

json parse_line(const std::filesystem::path& path, std::size_t line_no, const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(loc(path, line_no) + ": malformed JSON (" + e.what() + ")");
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

template <typename T>
std::vector<T> field_array(const json& j, const char* key, const std::filesystem::path& path, std::size_t line_no) {
  if (!j.contains(key) || !j[key].is_array())
    throw DataError(loc(path, line_no) + ": missing array field \"" + key + "\"");
  try {
    return j[key].get<std::vector<T>>();
  } catch (const json::exception&) {
    throw DataError(loc(path, line_no) + ": field \"" + key + "\" has the wrong element type");
  }
}

}  // namespace

EventDataset load_event_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  EventDataset dataset;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(path, line_no, line);
    if (!have_header) {
      if (!j.contains("num_marks") || !j["num_marks"].is_number_integer())
        throw DataError(loc(path, line_no) + ": expected header with integer \"num_marks\"");
      dataset.num_marks = j["num_marks"].get<int>();
      if (dataset.num_marks < 1) throw DataError(loc(path, line_no) + ": num_marks must be at least 1");
      have_header = true;
      continue;
    }
    EventSequence seq;
    seq.times = field_array<double>(j, "times", path, line_no);
    seq.marks = field_array<int>(j, "marks", path, line_no);
    auto check = validate_event_sequence(seq, dataset.num_marks);
    if (!check.ok())
      throw DataError(loc(path, line_no) + ": invalid sequence (" + check.violations.front() + ")");
    dataset.sequences.push_back(std::move(seq));
  }
  if (!have_header) throw DataError(path.string() + ": missing dataset header");
  return dataset;
}

void save_event_dataset(const std::filesystem::path& path, const EventDataset& dataset) {
  auto out = open_output(path);
  out << json{{"num_marks", dataset.num_marks}}.dump() << "\n";
  for (const auto& seq : dataset.sequences) {
    json j;
    j["times"] = seq.times;
    j["marks"] = seq.marks;
    out << j.dump() << "\n";
  }
}

MjpObservationSet load_mjp_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  int n_states = 0;
  bool have_header = false;
  std::vector<std::vector<double>> grids;
  std::vector<std::vector<int>> states;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(path, line_no, line);
    if (!have_header) {
      if (!j.contains("n_states") || !j["n_states"].is_number_integer())
        throw DataError(loc(path, line_no) + ": expected header with integer \"n_states\"");
      n_states = j["n_states"].get<int>();
      if (n_states < 1) throw DataError(loc(path, line_no) + ": n_states must be at least 1");
      have_header = true;
      continue;
    }
    auto g = field_array<double>(j, "grid", path, line_no);
    auto s = field_array<int>(j, "states", path, line_no);
    if (g.size() != s.size())
      throw DataError(loc(path, line_no) + ": grid and states differ in length");
    grids.push_back(std::move(g));
    states.push_back(std::move(s));
  }
  if (!have_header) throw DataError(path.string() + ": missing dataset header");

  std::size_t max_len = 0;
  for (const auto& g : grids) max_len = std::max(max_len, g.size());
  MjpObservationSet obs;
  obs.n_states = n_states;
  obs.grid = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grids.size()), static_cast<Eigen::Index>(max_len));
  obs.values = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(grids.size()), static_cast<Eigen::Index>(max_len));
  obs.seq_lengths = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(grids.size()));
  for (std::size_t p = 0; p < grids.size(); ++p) {
    obs.seq_lengths(static_cast<Eigen::Index>(p)) = static_cast<int>(grids[p].size());
    for (std::size_t k = 0; k < grids[p].size(); ++k) {
      obs.grid(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = grids[p][k];
      obs.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = states[p][k];
    }
  }
  auto check = validate_observation_set(obs);
  if (!check.ok()) throw DataError(path.string() + ": invalid dataset (" + check.violations.front() + ")");
  return obs;
}

void save_mjp_dataset(const std::filesystem::path& path, const MjpObservationSet& obs) {
  auto out = open_output(path);
  out << json{{"n_states", obs.n_states}}.dump() << "\n";
  for (Eigen::Index p = 0; p < obs.num_paths(); ++p) {
    int len = obs.seq_lengths(p);
    std::vector<double> g(static_cast<std::size_t>(len));
    std::vector<int> s(static_cast<std::size_t>(len));
    for (int k = 0; k < len; ++k) {
      g[static_cast<std::size_t>(k)] = obs.grid(p, k);
      s[static_cast<std::size_t>(k)] = obs.values(p, k);
    }
    json j;
    j["grid"] = g;
    j["states"] = s;
    out << j.dump() << "\n";
  }
}

MjpTruth load_mjp_truth(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j = parse_line(path, 1, buffer.str());
  auto qrows = j.find("Q");
  auto pi = j.find("pi0");
  if (qrows == j.end() || !qrows->is_array() || pi == j.end() || !pi->is_array())
    throw DataError(path.string() + ": truth file needs array fields \"Q\" and \"pi0\"");
  const auto& qj = *qrows;
  Eigen::Index k = static_cast<Eigen::Index>(qj.size());
  MjpTruth truth;
  truth.q.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!qj[static_cast<std::size_t>(i)].is_array() || static_cast<Eigen::Index>(qj[static_cast<std::size_t>(i)].size()) != k)
      throw DataError(path.string() + ": \"Q\" must be a square matrix");
    for (Eigen::Index c = 0; c < k; ++c)
      truth.q(i, c) = qj[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
  }
  truth.pi0.resize(static_cast<Eigen::Index>(pi->size()));
  for (Eigen::Index i = 0; i < truth.pi0.size(); ++i)
    truth.pi0(i) = (*pi)[static_cast<std::size_t>(i)].get<double>();
  if (truth.pi0.size() != k) throw DataError(path.string() + ": \"pi0\" length does not match \"Q\"");
  return truth;
}

void save_mjp_truth(const std::filesystem::path& path, const Eigen::MatrixXd& q, const Eigen::VectorXd& pi0) {
  auto out = open_output(path);
  json qj = json::array();
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < q.cols(); ++j) row.push_back(q(i, j));
    qj.push_back(std::move(row));
  }
  json pj = json::array();
  for (Eigen::Index i = 0; i < pi0.size(); ++i) pj.push_back(pi0(i));
  out << json{{"Q", std::move(qj)}, {"pi0", std::move(pj)}}.dump() << "\n";
}

std::vector<TimeSeriesPanel> load_panels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<TimeSeriesPanel> panels;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(path, line_no, line);
    TimeSeriesPanel panel;
    panel.times = field_array<double>(j, "times", path, line_no);
    if (!j.contains("values") || !j["values"].is_array())
      throw DataError(loc(path, line_no) + ": missing array field \"values\"");
    const auto& vals = j["values"];
    Eigen::Index t_len = static_cast<Eigen::Index>(vals.size());
    Eigen::Index d_len = t_len > 0 ? static_cast<Eigen::Index>(vals[0].size()) : 0;
    panel.values.resize(t_len, d_len);
    for (Eigen::Index t = 0; t < t_len; ++t) {
      const auto& row = vals[static_cast<std::size_t>(t)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d_len)
        throw DataError(loc(path, line_no) + ": ragged \"values\" rows");
      for (Eigen::Index d = 0; d < d_len; ++d) {
        const auto& cell = row[static_cast<std::size_t>(d)];
        panel.values(t, d) = cell.is_null() ? std::numeric_limits<double>::quiet_NaN() : cell.get<double>();
      }
    }
    panel.mask = BoolGrid::Constant(t_len, d_len, false);
    if (j.contains("mask")) {
      const auto& mj = j["mask"];
      if (!mj.is_array() || static_cast<Eigen::Index>(mj.size()) != t_len)
        throw DataError(loc(path, line_no) + ": \"mask\" shape does not match \"values\"");
      for (Eigen::Index t = 0; t < t_len; ++t) {
        const auto& row = mj[static_cast<std::size_t>(t)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d_len)
          throw DataError(loc(path, line_no) + ": \"mask\" shape does not match \"values\"");
        for (Eigen::Index d = 0; d < d_len; ++d)
          panel.mask(t, d) = row[static_cast<std::size_t>(d)].get<bool>();
      }
    } else {
      panel.mask = panel.values.array().isNaN();
    }
    auto check = validate_panel(panel);
    if (!check.ok()) throw DataError(loc(path, line_no) + ": invalid panel (" + check.violations.front() + ")");
    panels.push_back(std::move(panel));
  }
  return panels;
}

void save_panels(const std::filesystem::path& path, const std::vector<TimeSeriesPanel>& panels) {
  auto out = open_output(path);
  for (const auto& panel : panels) {
    json j;
    j["times"] = panel.times;
    json vals = json::array();
    json mask = json::array();
    for (Eigen::Index t = 0; t < panel.values.rows(); ++t) {
      json vrow = json::array();
      json mrow = json::array();
      for (Eigen::Index d = 0; d < panel.values.cols(); ++d) {
        if (std::isnan(panel.values(t, d)))
          vrow.push_back(nullptr);
        else
          vrow.push_back(panel.values(t, d));
        mrow.push_back(static_cast<bool>(panel.mask(t, d)));
      }
      vals.push_back(std::move(vrow));
      mask.push_back(std::move(mrow));
    }
    j["values"] = std::move(vals);
    j["mask"] = std::move(mask);
    out << j.dump() << "\n";
  }
}

}  // namespace zsinfer::io
