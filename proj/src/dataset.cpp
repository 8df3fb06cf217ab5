#include "tempseg/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace tempseg {

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Eval: return "eval";
  }
  return "?";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "eval") return Split::Eval;
  throw validation_error("unknown split name: '" + s + "'");
}

void AnnotatedStill::validate(int num_classes) const {
  if (image.channels != 3) throw validation_error(image_id + ": image must have 3 channels");
  if (mask.channels != 1) throw validation_error(image_id + ": mask must be single-channel");
  if (image.width != mask.width || image.height != mask.height)
    throw validation_error(image_id + ": image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                           " and mask " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                           " dimensions differ");
  for (std::uint8_t v : mask.pixels) {
    if (v != 255 && v >= num_classes)
      throw validation_error(image_id + ": mask value " + std::to_string(int(v)) + " outside [0, " +
                             std::to_string(num_classes) + ")");
  }
}

void MotionModel::validate() const {
  if (sigma_w < 0 || sigma_h < 0) throw validation_error("motion sigmas must be >= 0");
  auto check = [](const std::vector<int>& v, const char* name) {
    if (v.empty()) throw validation_error(std::string(name) + " must be non-empty");
    for (int d : v)
      if (d != -1 && d != 1) throw validation_error(std::string(name) + " entries must be -1 or +1");
  };
  check(allowed_lambda, "allowed_lambda");
  check(allowed_gamma, "allowed_gamma");
}

void FrameSequence::validate() const {
  if (frames.empty()) throw validation_error("sequence has no frames");
  const int h = frames.front().image.height, w = frames.front().image.width;
  int masks = 0;
  for (size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.image.height != h || f.image.width != w)
      throw validation_error("sequence frames have mixed dimensions (frame " + std::to_string(i) + ")");
    if (f.mask) {
      ++masks;
      if (f.mask->height != h || f.mask->width != w)
        throw validation_error("frame " + std::to_string(i) + " mask dimensions differ from image");
    }
  }
  if (fully_labelled) {
    if (masks != size()) throw validation_error("fully labelled sequence must carry a mask on every frame");
  } else {
    if (masks != 1 || !frames.back().mask)
      throw validation_error("real sequence must carry exactly one mask, on the final frame");
  }
}

std::vector<const AnnotatedStill*> Dataset::split(Split s) const {
  std::vector<const AnnotatedStill*> out;
  for (size_t i = 0; i < entries.size(); ++i)
    if (entries[i].split == s) out.push_back(&stills[i]);
  return out;
}

std::vector<size_t> Dataset::split_indices(Split s) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < entries.size(); ++i)
    if (entries[i].split == s) out.push_back(i);
  return out;
}

std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw load_error("cannot open manifest: " + manifest_path.string());
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 4)
      throw validation_error(manifest_path.string() + ":" + std::to_string(lineno) +
                             ": expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    ManifestEntry e;
    e.image_id = fields[0];
    e.image_path = fields[1];
    e.mask_path = fields[2];
    e.split = split_from_string(fields[3]);
    if (!seen.insert(e.image_id).second)
      throw validation_error("image_id '" + e.image_id + "' appears more than once in manifest");
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& manifest_path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(manifest_path);
  if (!out) throw io_error("cannot write manifest: " + manifest_path.string());
  for (const auto& e : entries)
    out << e.image_id << '\t' << e.image_path.generic_string() << '\t' << e.mask_path.generic_string() << '\t'
        << to_string(e.split) << '\n';
}

Dataset load_dataset(const std::filesystem::path& manifest_path, int num_classes) {
  Dataset ds;
  ds.root = manifest_path.parent_path();
  ds.entries = parse_manifest(manifest_path);
  ds.num_classes = num_classes;
  ds.stills.reserve(ds.entries.size());
  for (const auto& e : ds.entries) {
    auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() ? p : ds.root / p; };
    AnnotatedStill still;
    still.image_id = e.image_id;
    const auto img_path = resolve(e.image_path);
    const auto mask_path = resolve(e.mask_path);
    if (!std::filesystem::exists(img_path)) throw load_error("missing image file: " + img_path.string());
    if (!std::filesystem::exists(mask_path)) throw load_error("missing mask file: " + mask_path.string());
    still.image = read_png(img_path);
    still.mask = read_png(mask_path);
    still.validate(num_classes);
    ds.stills.push_back(std::move(still));
  }
  return ds;
}

}  // namespace tempseg
