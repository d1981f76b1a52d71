#pragma once

#include <stdexcept>
#include <string>

namespace pastegen {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// imgcore
struct DegenerateTransform : Error { using Error::Error; };

// maskgen
struct BadBorder : Error { using Error::Error; };
struct NoForeground : Error { using Error::Error; };
struct MaskVanished : Error { using Error::Error; };

// placement
struct PlacementExhausted : Error { using Error::Error; };
struct SceneUnsatisfiable : Error { using Error::Error; };

// blending
struct NoOverlap : Error { using Error::Error; };
struct SolverDiverged : Error { using Error::Error; };

// dataset_io
struct EmptyAssets : Error { using Error::Error; };
struct UnreadableImage : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// evaluator
struct NoGroundTruth : Error { using Error::Error; };
struct CorruptDataset : Error { using Error::Error; };

// cli / config
struct ConfigError : Error { using Error::Error; };

} // namespace pastegen
