#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "neurosym/predictors.hpp"

namespace neurosym {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Little-endian container:
///   "NSYM" | u32 version | u32 model kind | u32 reserved
///   u32 D | D x u64 dimension table
///   u32 B | B x (u32 name length, name bytes, u64 rows, u64 cols)
///   f64 parameter values, blocks in declared order, column-major
void save_model(const Predictor& model, std::ostream& out);
void save_model_file(const Predictor& model, const std::string& path);

/// Throws ParseError on a bad magic, unsupported version, or a block table that does not
/// match the architecture rebuilt from the dimension table.
std::unique_ptr<Predictor> load_model(std::istream& in);
std::unique_ptr<Predictor> load_model_file(const std::string& path);

}  // namespace neurosym
