#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <unistd.h>

#include "handover/dataset/loader.hpp"
#include "handover/dataset/synthetic.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, unique per name and process.
inline fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("handover_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// Synthetic dataset written once per process and option set.
inline std::vector<handover::dataset::DatasetEntry> fixture(const std::string& name,
                                                           const handover::dataset::synthetic::FixtureOptions& opt) {
  static std::mutex mu;
  static std::map<std::string, std::vector<handover::dataset::DatasetEntry>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  const auto root = scratch_dir("fixture_" + name);
  handover::dataset::synthetic::write_fixture_dataset(root, opt);
  auto entries = handover::dataset::load_dataset(root);
  cache.emplace(name, entries);
  return entries;
}

inline fs::path fixture_root(const std::string& name) {
  return fs::temp_directory_path() / ("handover_test_" + std::to_string(::getpid()) + "_fixture_" + name);
}

}  // namespace testing_support
