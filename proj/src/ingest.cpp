#include "txg/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <istream>
#include <limits>

#include <json.hpp>

#include "txg/error.hpp"

namespace txg {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(std::size_t line_no, const std::string& reason) {
  throw RecordError(ErrorKind::kMalformedRecord, line_no, reason);
}

[[noreturn]] void missing(std::size_t line_no, const char* field) {
  throw RecordError(ErrorKind::kMissingField, line_no,
                    std::string("missing mandatory field '") + field + "'");
}

const json& require(const json& obj, const char* field, std::size_t line_no) {
  const auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) missing(line_no, field);
  return *it;
}

std::uint64_t as_unsigned(const json& v, const char* field, std::size_t line_no) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  malformed(line_no, std::string("field '") + field +
                         "' must be a non-negative integer");
}

bool as_flag(const json& v, const char* field, std::size_t line_no) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i == 0 || i == 1) return i == 1;
  }
  malformed(line_no, std::string("field '") + field + "' must be a boolean");
}

std::optional<std::string> optional_string(const json& obj, const char* field,
                                           std::size_t line_no) {
  const auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    malformed(line_no, std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

Planck parse_amount(const json& obj, std::size_t line_no) {
  const auto planck = obj.find("amount_planck");
  const auto dot = obj.find("amount_dot");
  const bool has_planck = planck != obj.end() && !planck->is_null();
  const bool has_dot = dot != obj.end() && !dot->is_null();
  if (has_planck && has_dot) {
    malformed(line_no, "amount_planck and amount_dot are mutually exclusive");
  }
  try {
    if (has_planck) {
      if (planck->is_string()) {
        const Flux v = parse_flux(planck->get<std::string>());
        if (v > std::numeric_limits<Planck>::max()) {
          malformed(line_no, "amount_planck out of range");
        }
        return static_cast<Planck>(v);
      }
      return as_unsigned(*planck, "amount_planck", line_no);
    }
    if (has_dot) {
      if (!dot->is_string()) {
        malformed(line_no, "amount_dot must be a decimal string");
      }
      return parse_dot(dot->get<std::string>());
    }
  } catch (const std::invalid_argument& e) {
    malformed(line_no, e.what());
  }
  return 0;
}

bool has_amount(const json& obj) {
  for (const char* f : {"amount_planck", "amount_dot"}) {
    const auto it = obj.find(f);
    if (it != obj.end() && !it->is_null()) return true;
  }
  return false;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void append_quoted(std::string& out, const std::string& s) {
  out += json(s).dump();
}

}  // namespace

bool is_transfer_call(std::string_view call_id) {
  static constexpr std::array<std::string_view, 3> kCalls = {
      "transfer", "transfer_keep_alive", "transfer_all"};
  const std::string name = lower(call_id);
  return std::find(kCalls.begin(), kCalls.end(), name) != kCalls.end();
}

ExtrinsicRecord parse_extrinsic_line(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    malformed(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) malformed(line_no, "record is not a JSON object");

  ExtrinsicRecord rec;
  rec.block_number = as_unsigned(require(obj, "block_number", line_no),
                                 "block_number", line_no);
  const json& ts = require(obj, "timestamp", line_no);
  if (!ts.is_number_integer()) malformed(line_no, "timestamp must be an integer");
  rec.timestamp = ts.get<std::int64_t>();

  for (auto [field, target] : {std::pair{"module_id", &rec.module_id},
                               std::pair{"call_id", &rec.call_id}}) {
    const json& v = require(obj, field, line_no);
    if (!v.is_string()) {
      malformed(line_no, std::string("field '") + field + "' must be a string");
    }
    *target = v.get<std::string>();
  }
  rec.is_signed = as_flag(require(obj, "signed", line_no), "signed", line_no);
  rec.success = as_flag(require(obj, "success", line_no), "success", line_no);
  rec.sender = optional_string(obj, "sender", line_no);
  rec.recipient = optional_string(obj, "recipient", line_no);
  rec.amount_planck = parse_amount(obj, line_no);

  if (rec.module_id == "Balances" && is_transfer_call(rec.call_id)) {
    if (!rec.sender || rec.sender->empty()) missing(line_no, "sender");
    if (!rec.recipient || rec.recipient->empty()) missing(line_no, "recipient");
    if (!has_amount(obj)) missing(line_no, "amount_planck");
  }
  return rec;
}

std::optional<TransferRecord> filter_transfer(const ExtrinsicRecord& rec) {
  if (rec.module_id != "Balances" || !is_transfer_call(rec.call_id) ||
      !rec.is_signed || !rec.success || rec.amount_planck == 0 ||
      !rec.sender || rec.sender->empty() || !rec.recipient ||
      rec.recipient->empty()) {
    return std::nullopt;
  }
  return TransferRecord{*rec.sender, *rec.recipient, rec.amount_planck,
                        rec.block_number, rec.timestamp};
}

IngestSummary ingest(std::istream& source, const IngestOptions& options,
                     const TransferSink& sink) {
  IngestSummary summary;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c) != 0; })) {
      continue;
    }
    ++summary.lines;
    ExtrinsicRecord rec;
    try {
      rec = parse_extrinsic_line(line, line_no);
    } catch (const RecordError&) {
      if (options.on_error == ErrorPolicy::kFailFast) throw;
      ++summary.errors;
      continue;
    }
    ++summary.parsed;
    if (rec.block_number < options.start_block) {
      ++summary.dropped;
      ++summary.below_start;
      continue;
    }
    auto transfer = filter_transfer(rec);
    if (!transfer) {
      ++summary.dropped;
      if (rec.module_id == "Balances" && is_transfer_call(rec.call_id) &&
          rec.is_signed && rec.success && rec.amount_planck == 0) {
        ++summary.zero_amount;
      }
      continue;
    }
    ++summary.kept;
    sink(*transfer);
  }
  return summary;
}

std::vector<TransferRecord> ingest_all(std::istream& source,
                                       const IngestOptions& options,
                                       IngestSummary* summary) {
  std::vector<TransferRecord> out;
  const auto s = ingest(source, options,
                        [&out](const TransferRecord& t) { out.push_back(t); });
  if (summary != nullptr) *summary = s;
  return out;
}

std::string to_line(const ExtrinsicRecord& rec) {
  std::string out = "{\"block_number\":" + std::to_string(rec.block_number) +
                    ",\"timestamp\":" + std::to_string(rec.timestamp) +
                    ",\"module_id\":";
  append_quoted(out, rec.module_id);
  out += ",\"call_id\":";
  append_quoted(out, rec.call_id);
  out += rec.is_signed ? ",\"signed\":true" : ",\"signed\":false";
  out += rec.success ? ",\"success\":true" : ",\"success\":false";
  if (rec.sender) {
    out += ",\"sender\":";
    append_quoted(out, *rec.sender);
  }
  if (rec.recipient) {
    out += ",\"recipient\":";
    append_quoted(out, *rec.recipient);
  }
  out += ",\"amount_planck\":" + std::to_string(rec.amount_planck) + "}";
  return out;
}

std::string to_line(const TransferRecord& rec) {
  ExtrinsicRecord e;
  e.block_number = rec.block_number;
  e.timestamp = rec.timestamp;
  e.module_id = "Balances";
  e.call_id = "transfer";
  e.is_signed = true;
  e.success = true;
  e.sender = rec.sender;
  e.recipient = rec.recipient;
  e.amount_planck = rec.amount_planck;
  return to_line(e);
}

}  // namespace txg
