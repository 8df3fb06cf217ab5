#pragma once

#include "tempseg/dataset.hpp"
#include "tempseg/rng.hpp"

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

namespace tempseg::seq {

/// Planned set of N crop origins inside one source image. Frame n's origin is
/// start + round(g * direction * n) with g drawn from the motion model,
/// clamped so every window stays in-bounds.
struct SequencingTemplate {
  int n_frames = 0;
  int crop_w = 0, crop_h = 0;
  int src_w = 0, src_h = 0;
  int start_x = 0, start_y = 0;
  int lambda = +1, gamma = +1;
  std::vector<std::pair<int, int>> origins;  // (x, y) per frame

  void validate() const;
};

struct PlanOptions {
  /// Draw the Gaussian step once per sequence instead of once per frame
  /// index (both readings of the step formula are supported).
  bool per_sequence_draw = false;
  /// Fix the start corner instead of sampling it uniformly from the
  /// feasible region.
  std::optional<std::pair<int, int>> start;
};

/// Compute the feasible start region such that the worst-case deterministic
/// drift (mu + 3*sigma)*(N-1) in the given direction stays inside the image.
/// Returns {lo, hi} inclusive ranges for x and y; throws if empty.
struct StartRegion {
  int x_lo, x_hi, y_lo, y_hi;
};
StartRegion feasible_start_region(int img_w, int img_h, int crop_w, int crop_h, int n_frames,
                                  const MotionModel& motion, int lambda, int gamma);

SequencingTemplate plan_template(int img_w, int img_h, int crop_w, int crop_h, int n_frames,
                                 const MotionModel& motion, int lambda, int gamma, Rng& rng,
                                 const PlanOptions& opts = {});

/// Uniform draw of the direction of travel from the motion model's allowed
/// sets; fixed for all frames of one sequence.
std::pair<int, int> choose_direction(const MotionModel& motion, Rng& rng);

/// Crop the still's image and mask at every template origin. Every frame
/// inherits an exact (non-interpolated) label crop.
FrameSequence generate_virtual_sequence(const AnnotatedStill& still, const SequencingTemplate& tmpl);

/// Build a real temporal sequence: the last n_frames-1 entries of `preceding`
/// followed by the annotated frame. Only the final frame carries a mask.
FrameSequence assemble_real_sequence(const std::vector<ImageU8>& preceding, const AnnotatedStill& annotated_last,
                                     int n_frames);

/// Reverse frame order and negate the direction signs. Only valid for fully
/// labelled sequences.
FrameSequence reverse_sequence(const FrameSequence& s);

/// One directory per sequence: frame_%04d.png, mask_%04d.png (where
/// labelled) and a sequence.meta text file.
void write_sequence_dir(const std::filesystem::path& dir, const FrameSequence& s, std::uint64_t seed);

struct SequenceMeta {
  std::string source_image_id;
  int n_frames = 0;
  int crop_w = 0, crop_h = 0;
  int lambda = +1, gamma = +1;
  bool fully_labelled = true;
  std::uint64_t seed = 0;
  std::vector<std::pair<int, int>> origins;
};

SequenceMeta read_sequence_meta(const std::filesystem::path& dir);
FrameSequence read_sequence_dir(const std::filesystem::path& dir);

/// Re-crop the source still at the recorded origins; bit-identical to the
/// frames originally written alongside the meta file.
FrameSequence regenerate_from_meta(const AnnotatedStill& still, const SequenceMeta& meta);

}  // namespace tempseg::seq
