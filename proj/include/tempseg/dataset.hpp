#pragma once

#include "tempseg/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tempseg {

struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct load_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Split { Train, Valid, Eval };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

/// An RGB image with its per-pixel class-index mask; the unit of sparse
/// annotation.
struct AnnotatedStill {
  std::string image_id;
  ImageU8 image;  // H x W x 3
  ImageU8 mask;   // H x W, values < num_classes (255 = ignore)

  int width() const { return image.width; }
  int height() const { return image.height; }

  /// Checks matching dimensions and class-index range (mask values must be
  /// < num_classes, except the 255 ignore label).
  void validate(int num_classes) const;
};

/// Gaussian per-frame-index step model plus the permitted directions of
/// travel. Units are pixels per frame-index.
struct MotionModel {
  double mu_w = 5.0;
  double sigma_w = 10.0;
  double mu_h = 1.0;
  double sigma_h = 3.0;
  std::vector<int> allowed_lambda = {-1, +1};  // left-right direction signs
  std::vector<int> allowed_gamma = {-1, +1};   // up-down direction signs

  void validate() const;
};

/// Ordered list of frames forming one temporal sample. Virtual sequences are
/// fully labelled; real sequences carry a mask only on the final frame.
struct FrameSequence {
  struct Frame {
    ImageU8 image;
    std::optional<ImageU8> mask;
    int origin_x = 0;  // crop origin in source-image coordinates
    int origin_y = 0;
  };

  std::vector<Frame> frames;
  bool fully_labelled = false;
  int lambda = +1;
  int gamma = +1;
  std::string source_image_id;

  int size() const { return static_cast<int>(frames.size()); }
  void validate() const;
};

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path image_path;
  std::filesystem::path mask_path;
  Split split = Split::Train;
};

/// In-memory dataset: annotated stills grouped by split.
struct Dataset {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
  std::vector<AnnotatedStill> stills;  // parallel to entries
  int num_classes = 3;

  std::vector<const AnnotatedStill*> split(Split s) const;
  std::vector<size_t> split_indices(Split s) const;
};

/// Parse the tab-separated manifest without loading any pixels.
/// Format: one record per line, `image_id<TAB>image_path<TAB>mask_path<TAB>split`.
std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& manifest_path);

void write_manifest(const std::filesystem::path& manifest_path, const std::vector<ManifestEntry>& entries);

/// Load every referenced image/mask pair, validating dimensions, class
/// indices and split disjointness. Paths are resolved relative to the
/// manifest's directory.
Dataset load_dataset(const std::filesystem::path& manifest_path, int num_classes);

}  // namespace tempseg
