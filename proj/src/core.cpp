#include "flare/core.hpp"

#include "flare/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <tuple>
#include <vector>

namespace flare {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::UnknownClass: return "UnknownClass";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::LayoutError: return "LayoutError";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::ServiceUnavailable: return "ServiceUnavailable";
    case ErrorKind::ProtocolViolation: return "ProtocolViolation";
    case ErrorKind::ChannelError: return "ChannelError";
    case ErrorKind::InvalidWeight: return "InvalidWeight";
    case ErrorKind::StageError: return "StageError";
    case ErrorKind::TaxonomyError: return "TaxonomyError";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Error";
}

SampleId::SampleId(std::string hex) : hex_(std::move(hex)) {
  const bool ok = hex_.size() == 64 && std::all_of(hex_.begin(), hex_.end(), [](char c) {
                    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                  });
  if (!ok) throw Error(ErrorKind::InvalidInput, "malformed sample id '" + hex_ + "'");
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes) {
  std::array<std::uint8_t, 32> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != digest.size())
    throw Error(ErrorKind::InvalidInput, "SHA-256 computation failed");
  return digest;
}

SampleId content_hash(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(ErrorKind::InvalidInput, "cannot hash an empty byte sequence");
  static constexpr char kHex[] = "0123456789abcdef";
  const auto digest = sha256(bytes);
  std::string hex;
  hex.reserve(64);
  for (std::uint8_t b : digest) {
    hex.push_back(kHex[b >> 4]);
    hex.push_back(kHex[b & 0x0f]);
  }
  return SampleId(std::move(hex));
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key, std::string_view stage,
                          std::uint32_t variant_index) {
  std::vector<std::uint8_t> message(key.begin(), key.end());
  message.insert(message.end(), stage.begin(), stage.end());
  for (int shift = 24; shift >= 0; shift -= 8)
    message.push_back(static_cast<std::uint8_t>(variant_index >> shift));

  const auto digest = sha256(message);
  std::uint64_t prefix = 0;
  for (int i = 0; i < 8; ++i) prefix = (prefix << 8) | digest[i];

  std::uint64_t state = global_seed ^ prefix;
  return splitmix64(state);
}

std::string_view to_string(Tier tier) { return tier == Tier::HR ? "HR" : "LR"; }

namespace {

constexpr std::array<std::pair<StageTag, std::string_view>, 8> kStageNames{{
    {StageTag::Raw_LR, "Raw_LR"},
    {StageTag::Raw_Aug_LR, "Raw_Aug_LR"},
    {StageTag::Raw_HR, "Raw_HR"},
    {StageTag::Raw_Aug_HR, "Raw_Aug_HR"},
    {StageTag::T2I, "T2I"},
    {StageTag::I2I, "I2I"},
    {StageTag::T2I_Aug_HR, "T2I_Aug_HR"},
    {StageTag::Combined, "Combined"},
}};

}  // namespace

std::string_view to_string(StageTag tag) {
  for (const auto& [t, name] : kStageNames)
    if (t == tag) return name;
  return "?";
}

Tier parse_tier(std::string_view text) {
  if (text == "LR") return Tier::LR;
  if (text == "HR") return Tier::HR;
  throw Error(ErrorKind::InvalidInput, "unknown tier '" + std::string(text) + "'");
}

StageTag parse_stage_tag(std::string_view text) {
  for (const auto& [t, name] : kStageNames)
    if (name == text) return t;
  throw Error(ErrorKind::InvalidInput, "unknown stage tag '" + std::string(text) + "'");
}

SampleId parent_of(const Provenance& p) {
  return std::visit(
      [](const auto& v) -> SampleId {
        if constexpr (requires { v.parent_id; })
          return v.parent_id;
        else
          return {};
      },
      p);
}

std::string_view provenance_type(const Provenance& p) {
  static constexpr std::array<std::string_view, 5> kNames{
      "RawIngested", "Restored", "Augmented", "SyntheticT2I", "SyntheticI2I"};
  return kNames[p.index()];
}

bool record_less(const SampleRecord& a, const SampleRecord& b) {
  return std::forward_as_tuple(a.id, a.variant, parent_of(a.provenance).str()) <
         std::forward_as_tuple(b.id, b.variant, parent_of(b.provenance).str());
}

}  // namespace flare
