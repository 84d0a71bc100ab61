#include "ingrex/error.hpp"

namespace ingrex {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::DuplicateEdge: return "duplicate_edge";
    case ErrorCode::EmptyGraph: return "empty_graph";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::InvalidParams: return "invalid_params";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::MisalignedMask: return "misaligned_mask";
    case ErrorCode::BadDistribution: return "bad_distribution";
    case ErrorCode::TargetOutOfRange: return "target_out_of_range";
    case ErrorCode::IncompatibleModel: return "incompatible_model";
    case ErrorCode::TooManyFeatures: return "too_many_features";
    case ErrorCode::TooFewSamples: return "too_few_samples";
    case ErrorCode::EmptySample: return "empty_sample";
    case ErrorCode::DatasetMismatch: return "dataset_mismatch";
    case ErrorCode::NoSameClassItem: return "no_same_class_item";
    case ErrorCode::NoDiffClassItem: return "no_diff_class_item";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::ParseError: return "parse_error";
  }
  return "unknown";
}

}  // namespace ingrex
