#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "txg/amount.hpp"

namespace txg {

/// First Polkadot block with balance transfers enabled.
inline constexpr std::uint64_t kPolkadotTransferStartBlock = 1'205'128;

/// One pre-decoded extrinsic as read from a record stream.
struct ExtrinsicRecord {
  std::uint64_t block_number = 0;
  std::int64_t timestamp = 0;  // ms since epoch
  std::string module_id;
  std::string call_id;
  bool is_signed = false;
  bool success = false;
  std::optional<std::string> sender;
  std::optional<std::string> recipient;
  Planck amount_planck = 0;

  bool operator==(const ExtrinsicRecord&) const = default;
};

/// A successful user-initiated balance transfer. amount_planck > 0.
struct TransferRecord {
  std::string sender;
  std::string recipient;
  Planck amount_planck = 0;
  std::uint64_t block_number = 0;
  std::int64_t timestamp = 0;

  bool operator==(const TransferRecord&) const = default;
};

/// True for call ids accepted as balance transfers. Comparison is on the
/// lower-cased name; "Transfer" and "transfer" are the same call.
bool is_transfer_call(std::string_view call_id);

/// Parses one JSON-object line. Unknown fields are ignored. Throws
/// RecordError (kMalformedRecord or kMissingField) tagged with `line_no`.
ExtrinsicRecord parse_extrinsic_line(std::string_view line,
                                     std::size_t line_no = 0);

/// Keeps the record iff it is a signed, successful Balances transfer
/// variant with a positive amount.
std::optional<TransferRecord> filter_transfer(const ExtrinsicRecord& rec);

enum class ErrorPolicy { kFailFast, kSkip };

struct IngestOptions {
  std::uint64_t start_block = 0;
  ErrorPolicy on_error = ErrorPolicy::kFailFast;
};

struct IngestSummary {
  std::size_t lines = 0;          // non-blank lines seen
  std::size_t parsed = 0;         // records parsed successfully
  std::size_t kept = 0;
  std::size_t dropped = 0;        // parsed but not emitted
  std::size_t below_start = 0;    // subset of dropped
  std::size_t zero_amount = 0;    // subset of dropped
  std::size_t errors = 0;         // lines skipped under ErrorPolicy::kSkip

  bool operator==(const IngestSummary&) const = default;
};

using TransferSink = std::function<void(const TransferRecord&)>;

/// Streams `source` line by line, emitting kept transfers in input order.
IngestSummary ingest(std::istream& source, const IngestOptions& options,
                     const TransferSink& sink);

std::vector<TransferRecord> ingest_all(std::istream& source,
                                       const IngestOptions& options,
                                       IngestSummary* summary = nullptr);

/// Serializes a record as one line (no trailing newline) in the input
/// format, so the output of `ingest` can be fed back into it.
std::string to_line(const ExtrinsicRecord& rec);
std::string to_line(const TransferRecord& rec);

}  // namespace txg
