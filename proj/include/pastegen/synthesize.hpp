#pragma once

#include <iosfwd>
#include <string>

#include "pastegen/config.hpp"
#include "pastegen/manifest.hpp"

namespace pastegen {

struct SynthesisReport {
    int scenes_requested = 0;
    int scenes_rendered = 0;
    int scenes_failed = 0;
    int images_written = 0;
    std::string manifest_path;
    std::string manifest_sha256;
};

/// Generate a full dataset under cfg.output_dir:
///   images/scene_{index:06}_{mode}.png
///   blueprints/scene_{index:06}.txt
///   annotations/voc/scene_{index:06}_{mode}.xml   (format "voc")
///   annotations/coco.json                         (format "coco")
///   manifest.json
/// Scene i uses background i mod B and the seed derived from (cfg.seed, i),
/// so output bytes are identical for any worker count. Optional `log`
/// receives one structured line per scene.
SynthesisReport run_synthesize(const RunConfig& cfg, std::ostream* log = nullptr);

} // namespace pastegen
