#pragma once

#include <cstdint>
#include <string>

#include "gmmnet/train.hpp"
#include "gmmnet/translate.hpp"

namespace gmmnet {

/// 17-significant-digit decimal rendering; round-trips doubles exactly.
std::string format_real(double v);

// Dataset CSV: header x0..x{d-1},label, LF line endings.
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

// Mixture JSON: {"weights": [...], "components": [{"mean": [...], "covariance": [[...]]}]}.
std::string mixture_to_json(const GaussianMixture& m);
GaussianMixture mixture_from_json(const std::string& text);
void write_mixture_json(const GaussianMixture& m, const std::string& path);
GaussianMixture read_mixture_json(const std::string& path);

/// Model JSON (format version 1); reals stored as 17-significant-digit
/// decimal strings so save -> load -> save is byte-identical.
struct ModelMetadata {
    std::uint64_t seed = 0;
    std::string creation_parameters;
};

std::string model_to_json(const MLPModel& m, const ModelMetadata& meta);
std::pair<MLPModel, ModelMetadata> model_from_json(const std::string& text);
void write_model_json(const MLPModel& m, const ModelMetadata& meta, const std::string& path);
std::pair<MLPModel, ModelMetadata> read_model_json(const std::string& path);

// Loss history CSV: epoch,loss,penalty,total.
void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gmmnet
