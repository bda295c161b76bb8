#pragma once

#include <optional>
#include <string>

#include "sea/encoders/encoder.hpp"
#include "sea/nn/tape.hpp"

namespace sea::aff {

enum class Stage { raw, final };

// raw: patch-text cosines in [-1,1], bilinearly upsampled to image
// resolution. final: min-max normalized to [0,1] with values below beta
// zeroed out.
struct AffordanceHeatmap {
  Matrix grid;
  Stage stage = Stage::raw;
  enc::Domain domain = enc::Domain::ego;
};

struct ThresholdConfig {
  double beta = 0.5;
  double eps_norm = 1e-12;
};

struct AffordanceConfig {
  ThresholdConfig threshold;
  std::string prompt_style = "pair";  // pair | template
  std::string caption_template = "I will [action] [object]";
};

// grid[i,j] = cos(text, feats[i,j]) at patch resolution, upsampled to the
// feature map's image resolution. Zero-norm vectors score 0 rather than
// erroring. Requires a multimodal-family map of matching dim.
AffordanceHeatmap similarity_heatmap(const enc::TextEmbedding& text,
                                     const enc::FeatureMap& feats);

// v' = (v - min) / (max - min + eps), then v' < beta -> 0. A constant map
// comes out all-zero.
AffordanceHeatmap normalize_and_filter(const AffordanceHeatmap& raw,
                                       const ThresholdConfig& cfg);

// "<action> <object>" or the rendered caption template, per prompt_style.
std::string build_prompt(const std::string& action, const std::string& object,
                         const AffordanceConfig& cfg);

struct LocalizeResult {
  AffordanceHeatmap ego;
  std::optional<AffordanceHeatmap> exo;
};

// Composes prompt -> text encoding -> similarity -> normalize/filter for the
// ego stream and, when given, one exo stream.
LocalizeResult localize(const std::string& action, const std::string& object,
                        const enc::TextEncoder& text_encoder,
                        const enc::FeatureMap& ego_feats,
                        const enc::FeatureMap* exo_feats,
                        const AffordanceConfig& cfg);

// Tape-side twins used by the training graph; numerics match the plain
// functions exactly.
nn::Node* similarity_grid(nn::Tape& t, nn::Node* tokens,
                          const Eigen::RowVectorXd& text, int h, int w,
                          int img_h, int img_w);
nn::Node* normalize_and_filter(nn::Tape& t, nn::Node* grid,
                               const ThresholdConfig& cfg);

}  // namespace sea::aff
