#pragma once

#include <string>

#include "loralab/model.hpp"

namespace loralab {

// 16-hex-digit FNV-1a hash over the model configuration. Adapter checkpoints
// record it so they refuse to load onto a differently shaped (or differently
// seeded) base model.
std::string config_hash(const ModelConfig& config);

// Full model checkpoint: versioned JSON-of-arrays holding config, vocab,
// base weights, and any attached adapters. load_model(save_model(m))
// reproduces every value bitwise; see README for the exact layout.
void save_model(const TransformerModel& model, const std::string& path);
TransformerModel load_model(const std::string& path);

// Adapter-only checkpoint (base weights excluded). Loading attaches the
// stored adapters onto `model`, whose config hash must match the recorded
// one and whose target slots must be empty. When the file holds at least one
// adapter the base parameters are frozen, mirroring attach-time behavior;
// adapter trainable flags come from the file.
void save_adapters(const TransformerModel& model, const std::string& path);
void load_adapters(TransformerModel& model, const std::string& path);

}  // namespace loralab
