#pragma once

// Crossing record streams.
//
//   ndjson: {"k":1,"t":1,"y":1,"o":"+","d":1}
//   csv:    k,t,y,o,d   (header line first)
//
// Floats use 17 significant digits.

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "ebp/engine.hpp"

namespace ebp {

enum class RecordFormat { Ndjson, Csv };

RecordFormat parse_record_format(std::string_view name);
std::string_view csv_header() noexcept;
// One line including the trailing newline.
std::string format_record(const SamplePoint& p, RecordFormat format);

// Reads either format, detected from the first non-empty line.  Throws
// MalformedPath with the line number on bad input.
std::vector<SamplePoint> read_records(std::istream& in);

}  // namespace ebp
