#pragma once

#include <json.hpp>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zsinfer/types.hpp"

namespace testutil {

inline nlohmann::json load_fixture(const std::string& name) {
  const std::filesystem::path path =
      std::filesystem::path(ZSINFER_TEST_DATA_DIR) / name;
  std::ifstream f(path);
  if (!f) throw std::runtime_error("missing fixture: " + path.string());
  return nlohmann::json::parse(f);
}

// Scratch directory that is unique per test binary run and removed on exit.
class TempDir {
 public:
  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / ("zsinfer-test-" + std::to_string(::getpid()) +
                               "-" + std::to_string(counter_++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline zsinfer::EventSequence make_sequence(std::vector<double> times,
                                            std::vector<int> marks) {
  zsinfer::EventSequence s;
  s.times = std::move(times);
  s.marks = std::move(marks);
  return s;
}

// NaN-aware elementwise closeness for fixture comparison.
inline bool close(double a, double b, double tol) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::abs(a - b) <= tol;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
