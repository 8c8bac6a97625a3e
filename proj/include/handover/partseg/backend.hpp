#pragma once

// Segmentation backend adapters. Both read the same on-disk contract, a
// proposals.json next to the mask PNGs:
//
//   {"format": "handover-proposals/1",
//    "proposals": [{"label": "handle", "mask": "handle.png", "score": 0.8}, ...]}
//
// Masks are full-image single-channel PNGs (nonzero = member); paths are
// relative to the JSON file.

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "handover/errors.hpp"
#include "handover/geometry/png_io.hpp"
#include "handover/partseg/types.hpp"

namespace handover::partseg {

namespace fs = std::filesystem;

inline constexpr std::string_view kProposalsFormat = "handover-proposals/1";

struct BackendRequest {
  fs::path rgb_path;
  geometry::Region crop;
  int width{0};
  int height{0};
  std::optional<fs::path> proposals_path;  // fixture output shipped with the entry
};

class SegmentationBackend {
 public:
  virtual ~SegmentationBackend() = default;
  virtual std::string_view name() const = 0;
  /// Hypotheses in backend order; labels are not checked against the taxonomy.
  virtual std::vector<PartHypothesis> propose(const BackendRequest& req) = 0;
};

inline std::vector<PartHypothesis> read_proposals(const fs::path& file, int width, int height) {
  std::ifstream in(file);
  if (!in) throw BackendError("cannot read proposals " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError("malformed proposals " + file.string() + ": " + e.what());
  }
  if (doc.contains("format") && doc.at("format") != kProposalsFormat) {
    throw BackendError("unsupported proposals format " + doc.at("format").dump());
  }
  std::vector<PartHypothesis> out;
  try {
    for (const auto& p : doc.at("proposals")) {
      PartHypothesis h;
      h.label = p.at("label").get<std::string>();
      const fs::path mask_path = file.parent_path() / p.at("mask").get<std::string>();
      try {
        h.mask = geometry::read_mask_png(mask_path);
      } catch (const Error& e) {
        throw BackendError(e.message());
      }
      if (h.mask.width() != width || h.mask.height() != height) {
        throw BackendError("proposal mask " + mask_path.filename().string() + " does not match the image size");
      }
      if (p.contains("score") && !p.at("score").is_null()) h.score = p.at("score").get<double>();
      if (h.mask.empty()) continue;
      out.push_back(std::move(h));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendError("malformed proposals " + file.string() + ": " + e.what());
  }
  return out;
}

/// Reads stored backend output: the entry's proposals file, else
/// proposals.json beside the RGB image.
class FixtureBackend : public SegmentationBackend {
 public:
  std::string_view name() const override { return "fixture"; }

  std::vector<PartHypothesis> propose(const BackendRequest& req) override {
    const fs::path file = req.proposals_path ? *req.proposals_path : req.rgb_path.parent_path() / "proposals.json";
    if (!fs::exists(file)) throw BackendError("no stored proposals at " + file.string());
    return read_proposals(file, req.width, req.height);
  }
};

/// Runs `<command> --rgb <image> --crop u0,v0,u1,v1 --out <dir>` and reads
/// <dir>/proposals.json. A real segmentation model can be wrapped this way.
class ExternalProcessBackend : public SegmentationBackend {
 public:
  explicit ExternalProcessBackend(std::string command) : command_(std::move(command)) {
    if (command_.empty()) throw InputError("external backend: empty command");
  }

  std::string_view name() const override { return "external"; }

  std::vector<PartHypothesis> propose(const BackendRequest& req) override {
    static std::atomic<unsigned> counter{0};
    const fs::path dir = fs::temp_directory_path() /
                         ("handover-backend-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir);
    struct Cleanup {
      fs::path dir;
      ~Cleanup() {
        std::error_code ec;
        fs::remove_all(dir, ec);
      }
    } cleanup{dir};

    const auto& c = req.crop;
    const std::string cmd = command_ + " --rgb " + quote(req.rgb_path.string()) + " --crop " +
                            std::to_string(c.u_min) + "," + std::to_string(c.v_min) + "," +
                            std::to_string(c.u_max) + "," + std::to_string(c.v_max) + " --out " + quote(dir.string());
    const int status = std::system(cmd.c_str());
    if (status != 0) throw BackendError("backend command failed with status " + std::to_string(status));
    const fs::path file = dir / "proposals.json";
    if (!fs::exists(file)) throw BackendError("backend command wrote no proposals.json");
    return read_proposals(file, req.width, req.height);
  }

 private:
  static std::string quote(const std::string& s) {
    std::string out = "'";
    for (char ch : s) {
      if (ch == '\'') {
        out += "'\\''";
      } else {
        out += ch;
      }
    }
    return out + "'";
  }

  std::string command_;
};

}  // namespace handover::partseg
