#include "tempseg/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tempseg::seq {

void SequencingTemplate::validate() const {
  if (static_cast<int>(origins.size()) != n_frames) throw validation_error("template origin count != n_frames");
  for (auto [x, y] : origins) {
    if (x < 0 || y < 0 || x + crop_w > src_w || y + crop_h > src_h)
      throw validation_error("template window (" + std::to_string(x) + "," + std::to_string(y) +
                             ") exceeds source image bounds");
  }
}

StartRegion feasible_start_region(int img_w, int img_h, int crop_w, int crop_h, int n_frames,
                                  const MotionModel& motion, int lambda, int gamma) {
  if (crop_w > img_w || crop_h > img_h)
    throw validation_error("crop " + std::to_string(crop_w) + "x" + std::to_string(crop_h) +
                           " larger than source image " + std::to_string(img_w) + "x" + std::to_string(img_h));
  const int span = n_frames - 1;
  const int drift_x = static_cast<int>(std::ceil((motion.mu_w + 3.0 * motion.sigma_w) * span));
  const int drift_y = static_cast<int>(std::ceil((motion.mu_h + 3.0 * motion.sigma_h) * span));
  StartRegion r{};
  if (lambda >= 0) {
    r.x_lo = 0;
    r.x_hi = img_w - crop_w - drift_x;
  } else {
    r.x_lo = drift_x;
    r.x_hi = img_w - crop_w;
  }
  if (gamma >= 0) {
    r.y_lo = 0;
    r.y_hi = img_h - crop_h - drift_y;
  } else {
    r.y_lo = drift_y;
    r.y_hi = img_h - crop_h;
  }
  if (r.x_hi < r.x_lo || r.y_hi < r.y_lo)
    throw validation_error("no feasible start position for N=" + std::to_string(n_frames) + ", crop " +
                           std::to_string(crop_w) + "x" + std::to_string(crop_h) + " in image " +
                           std::to_string(img_w) + "x" + std::to_string(img_h) +
                           "; reduce N or the crop size");
  return r;
}

SequencingTemplate plan_template(int img_w, int img_h, int crop_w, int crop_h, int n_frames,
                                 const MotionModel& motion, int lambda, int gamma, Rng& rng,
                                 const PlanOptions& opts) {
  if (n_frames < 1) throw validation_error("n_frames must be >= 1");
  motion.validate();
  if (std::find(motion.allowed_lambda.begin(), motion.allowed_lambda.end(), lambda) == motion.allowed_lambda.end())
    throw validation_error("lambda not in allowed set");
  if (std::find(motion.allowed_gamma.begin(), motion.allowed_gamma.end(), gamma) == motion.allowed_gamma.end())
    throw validation_error("gamma not in allowed set");

  const StartRegion region = feasible_start_region(img_w, img_h, crop_w, crop_h, n_frames, motion, lambda, gamma);

  SequencingTemplate t;
  t.n_frames = n_frames;
  t.crop_w = crop_w;
  t.crop_h = crop_h;
  t.src_w = img_w;
  t.src_h = img_h;
  t.lambda = lambda;
  t.gamma = gamma;
  if (opts.start) {
    t.start_x = opts.start->first;
    t.start_y = opts.start->second;
    if (t.start_x < 0 || t.start_y < 0 || t.start_x + crop_w > img_w || t.start_y + crop_h > img_h)
      throw validation_error("explicit start position places the crop outside the image");
  } else {
    t.start_x = region.x_lo + static_cast<int>(rng.uniform_index(region.x_hi - region.x_lo + 1));
    t.start_y = region.y_lo + static_cast<int>(rng.uniform_index(region.y_hi - region.y_lo + 1));
  }

  double gw_seq = 0.0, gh_seq = 0.0;
  if (opts.per_sequence_draw) {
    gw_seq = rng.normal(motion.mu_w, motion.sigma_w);
    gh_seq = rng.normal(motion.mu_h, motion.sigma_h);
  }
  t.origins.reserve(n_frames);
  for (int n = 0; n < n_frames; ++n) {
    double gw = gw_seq, gh = gh_seq;
    if (!opts.per_sequence_draw) {
      gw = rng.normal(motion.mu_w, motion.sigma_w);
      gh = rng.normal(motion.mu_h, motion.sigma_h);
    }
    int x = t.start_x + static_cast<int>(std::lround(gw * lambda * n));
    int y = t.start_y + static_cast<int>(std::lround(gh * gamma * n));
    x = std::clamp(x, 0, img_w - crop_w);
    y = std::clamp(y, 0, img_h - crop_h);
    t.origins.emplace_back(x, y);
  }
  t.validate();
  return t;
}

std::pair<int, int> choose_direction(const MotionModel& motion, Rng& rng) {
  motion.validate();
  const int lambda = motion.allowed_lambda[rng.uniform_index(motion.allowed_lambda.size())];
  const int gamma = motion.allowed_gamma[rng.uniform_index(motion.allowed_gamma.size())];
  return {lambda, gamma};
}

FrameSequence generate_virtual_sequence(const AnnotatedStill& still, const SequencingTemplate& tmpl) {
  if (tmpl.src_w != still.width() || tmpl.src_h != still.height())
    throw validation_error("template planned for " + std::to_string(tmpl.src_w) + "x" + std::to_string(tmpl.src_h) +
                           " but still '" + still.image_id + "' is " + std::to_string(still.width()) + "x" +
                           std::to_string(still.height()));
  tmpl.validate();
  FrameSequence s;
  s.fully_labelled = true;
  s.lambda = tmpl.lambda;
  s.gamma = tmpl.gamma;
  s.source_image_id = still.image_id;
  s.frames.reserve(tmpl.n_frames);
  for (auto [x, y] : tmpl.origins) {
    FrameSequence::Frame f;
    f.image = still.image.crop(x, y, tmpl.crop_w, tmpl.crop_h);
    f.mask = still.mask.crop(x, y, tmpl.crop_w, tmpl.crop_h);
    f.origin_x = x;
    f.origin_y = y;
    s.frames.push_back(std::move(f));
  }
  s.validate();
  return s;
}

FrameSequence assemble_real_sequence(const std::vector<ImageU8>& preceding, const AnnotatedStill& annotated_last,
                                     int n_frames) {
  if (n_frames < 1) throw validation_error("n_frames must be >= 1");
  if (static_cast<int>(preceding.size()) < n_frames - 1)
    throw validation_error("real sequence ending at '" + annotated_last.image_id + "' needs " +
                           std::to_string(n_frames - 1) + " preceding frames, got " +
                           std::to_string(preceding.size()));
  FrameSequence s;
  s.fully_labelled = false;
  s.source_image_id = annotated_last.image_id;
  s.frames.reserve(n_frames);
  const size_t first = preceding.size() - static_cast<size_t>(n_frames - 1);
  for (size_t i = first; i < preceding.size(); ++i) {
    const ImageU8& img = preceding[i];
    if (img.width != annotated_last.width() || img.height != annotated_last.height())
      throw validation_error("preceding frame dimensions differ from annotated frame '" + annotated_last.image_id +
                             "'");
    FrameSequence::Frame f;
    f.image = img;
    s.frames.push_back(std::move(f));
  }
  FrameSequence::Frame last;
  last.image = annotated_last.image;
  last.mask = annotated_last.mask;
  s.frames.push_back(std::move(last));
  s.validate();
  return s;
}

FrameSequence reverse_sequence(const FrameSequence& s) {
  if (!s.fully_labelled)
    throw validation_error("cannot reverse a last-frame-only labelled sequence (source '" + s.source_image_id + "')");
  FrameSequence r = s;
  std::reverse(r.frames.begin(), r.frames.end());
  r.lambda = -s.lambda;
  r.gamma = -s.gamma;
  return r;
}

namespace {
std::string frame_name(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d.png", prefix, i);
  return buf;
}
}  // namespace

void write_sequence_dir(const std::filesystem::path& dir, const FrameSequence& s, std::uint64_t seed) {
  s.validate();
  std::filesystem::create_directories(dir);
  for (int i = 0; i < s.size(); ++i) {
    write_png(dir / frame_name("frame", i), s.frames[i].image);
    if (s.frames[i].mask) write_png(dir / frame_name("mask", i), *s.frames[i].mask);
  }
  std::ofstream meta(dir / "sequence.meta");
  if (!meta) throw io_error("cannot write " + (dir / "sequence.meta").string());
  meta << "source_image_id " << s.source_image_id << "\n";
  meta << "n " << s.size() << "\n";
  meta << "direction " << s.lambda << " " << s.gamma << "\n";
  meta << "crop " << s.frames[0].image.width << " " << s.frames[0].image.height << "\n";
  meta << "fully_labelled " << (s.fully_labelled ? 1 : 0) << "\n";
  meta << "seed " << seed << "\n";
  for (const auto& f : s.frames) meta << "origin " << f.origin_x << " " << f.origin_y << "\n";
}

SequenceMeta read_sequence_meta(const std::filesystem::path& dir) {
  std::ifstream in(dir / "sequence.meta");
  if (!in) throw load_error("cannot open " + (dir / "sequence.meta").string());
  SequenceMeta m;
  std::string key;
  while (in >> key) {
    if (key == "source_image_id") in >> m.source_image_id;
    else if (key == "n") in >> m.n_frames;
    else if (key == "direction") in >> m.lambda >> m.gamma;
    else if (key == "crop") in >> m.crop_w >> m.crop_h;
    else if (key == "fully_labelled") { int v; in >> v; m.fully_labelled = v != 0; }
    else if (key == "seed") in >> m.seed;
    else if (key == "origin") {
      int x, y;
      in >> x >> y;
      m.origins.emplace_back(x, y);
    } else {
      throw validation_error("unknown key '" + key + "' in " + (dir / "sequence.meta").string());
    }
  }
  if (static_cast<int>(m.origins.size()) != m.n_frames)
    throw validation_error("sequence.meta origin count mismatch in " + dir.string());
  return m;
}

FrameSequence read_sequence_dir(const std::filesystem::path& dir) {
  const SequenceMeta m = read_sequence_meta(dir);
  FrameSequence s;
  s.fully_labelled = m.fully_labelled;
  s.lambda = m.lambda;
  s.gamma = m.gamma;
  s.source_image_id = m.source_image_id;
  for (int i = 0; i < m.n_frames; ++i) {
    FrameSequence::Frame f;
    f.image = read_png(dir / frame_name("frame", i));
    const auto mask_path = dir / frame_name("mask", i);
    if (std::filesystem::exists(mask_path)) f.mask = read_png(mask_path);
    f.origin_x = m.origins[i].first;
    f.origin_y = m.origins[i].second;
    s.frames.push_back(std::move(f));
  }
  s.validate();
  return s;
}

FrameSequence regenerate_from_meta(const AnnotatedStill& still, const SequenceMeta& meta) {
  SequencingTemplate t;
  t.n_frames = meta.n_frames;
  t.crop_w = meta.crop_w;
  t.crop_h = meta.crop_h;
  t.src_w = still.width();
  t.src_h = still.height();
  t.lambda = meta.lambda;
  t.gamma = meta.gamma;
  t.start_x = meta.origins.empty() ? 0 : meta.origins[0].first;
  t.start_y = meta.origins.empty() ? 0 : meta.origins[0].second;
  t.origins = meta.origins;
  return generate_virtual_sequence(still, t);
}

}  // namespace tempseg::seq
