// SPDX-License-Identifier: Apache-2.0

#include "olc/range_coder.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace olc {

ProbabilityTable makeTable(std::vector<uint32_t> weights) {
  if (weights.size() < 2) throw DomainError("probability table needs K >= 2");
  uint64_t sum = 0;
  for (uint32_t w : weights) {
    if (w == 0) throw DomainError("probability table weight must be >= 1");
    sum += w;
  }
  if (sum != ProbabilityTable::kTotal) throw DomainError("probability table weights must sum to 65536");

  ProbabilityTable t;
  t.weights = std::move(weights);
  t.cum.resize(t.weights.size());
  uint32_t acc = 0;
  for (size_t i = 0; i < t.weights.size(); ++i) {
    t.cum[i] = acc;
    acc += t.weights[i];
  }
  return t;
}

ProbabilityTable quantizeProbs(std::span<const double> p) {
  const size_t k = p.size();
  if (k < 2) throw DomainError("quantizeProbs: K must be >= 2");
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0 || !std::isfinite(v)) throw DomainError("quantizeProbs: negative or non-finite probability");
    sum += v;
  }
  if (sum <= 0.0) throw DomainError("quantizeProbs: probabilities sum to zero");

  std::vector<uint32_t> w(k);
  std::vector<std::pair<double, size_t>> rem(k);
  uint64_t assigned = 0;
  for (size_t i = 0; i < k; ++i) {
    double scaled = p[i] / sum * ProbabilityTable::kTotal;
    double fl = std::floor(scaled);
    w[i] = static_cast<uint32_t>(fl);
    rem[i] = {scaled - fl, i};
    assigned += w[i];
  }

  // Distribute the leftover units by largest remainder, lowest index first on
  // ties, so both coder sides agree bit for bit.
  int64_t deficit = static_cast<int64_t>(ProbabilityTable::kTotal) - static_cast<int64_t>(assigned);
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (size_t i = 0; deficit > 0; i = (i + 1) % k, --deficit) w[rem[i].second] += 1;
  while (deficit < 0) {  // only reachable through floating rounding at the sum
    size_t maxIdx = 0;
    for (size_t j = 1; j < k; ++j)
      if (w[j] > w[maxIdx]) maxIdx = j;
    if (w[maxIdx] == 0) throw DomainError("quantizeProbs: apportionment failed");
    w[maxIdx] -= 1;
    ++deficit;
  }

  // Enforce the floor: lift zero weights, taking units from the largest entry.
  for (size_t i = 0; i < k; ++i) {
    if (w[i] == 0) {
      size_t maxIdx = 0;
      for (size_t j = 1; j < k; ++j)
        if (w[j] > w[maxIdx]) maxIdx = j;
      if (w[maxIdx] <= 1) throw DomainError("quantizeProbs: cannot satisfy weight floor");
      w[maxIdx] -= 1;
      w[i] = 1;
    }
  }
  return makeTable(std::move(w));
}

void RangeEncoder::encode(int symbol, const ProbabilityTable& table) {
  if (symbol < 0 || symbol >= table.symbolCount())
    throw DomainError("RangeEncoder: symbol out of range");
  range_ >>= 16;
  low_ += table.cum[symbol] * range_;
  range_ *= table.weights[symbol];
  normalize();
}

void RangeEncoder::normalize() {
  while ((low_ ^ (low_ + range_)) < kTop || (range_ < kBot && ((range_ = (0u - low_) & (kBot - 1)), true))) {
    out_.push_back(static_cast<uint8_t>(low_ >> 24));
    low_ <<= 8;
    range_ <<= 8;
  }
}

std::vector<uint8_t> RangeEncoder::finish() {
  if (!finished_) {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(static_cast<uint8_t>(low_ >> 24));
      low_ <<= 8;
    }
    finished_ = true;
  }
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | nextByte();
}

uint8_t RangeDecoder::nextByte() {
  if (pos_ >= bytes_.size()) throw CorruptionError("range decoder: payload exhausted");
  return bytes_[pos_++];
}

int RangeDecoder::decode(const ProbabilityTable& table) {
  range_ >>= 16;
  uint32_t target = (code_ - low_) / range_;
  if (target >= ProbabilityTable::kTotal) throw CorruptionError("range decoder: corrupt payload");

  // weights are small (K <= 255); linear scan of the prefix sums
  int symbol = table.symbolCount() - 1;
  for (int s = 1; s < table.symbolCount(); ++s) {
    if (table.cum[s] > target) {
      symbol = s - 1;
      break;
    }
  }

  low_ += table.cum[symbol] * range_;
  range_ *= table.weights[symbol];
  while ((low_ ^ (low_ + range_)) < kTop || (range_ < kBot && ((range_ = (0u - low_) & (kBot - 1)), true))) {
    code_ = (code_ << 8) | nextByte();
    low_ <<= 8;
    range_ <<= 8;
  }
  return symbol;
}

Bitpayload encodeSymbols(std::span<const int> symbols, std::span<const ProbabilityTable> tables) {
  if (symbols.size() != tables.size())
    throw DomainError("encodeSymbols: symbol/table count mismatch");
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i) enc.encode(symbols[i], tables[i]);
  Bitpayload p;
  p.bytes = enc.finish();
  p.symbolCount = symbols.size();
  return p;
}

std::vector<int> decodeSymbols(const Bitpayload& payload, std::span<const ProbabilityTable> tables) {
  if (payload.symbolCount != tables.size())
    throw DomainError("decodeSymbols: symbol/table count mismatch");
  RangeDecoder dec(payload.bytes);
  std::vector<int> out;
  out.reserve(tables.size());
  for (const auto& t : tables) out.push_back(dec.decode(t));
  return out;
}

std::vector<int> decodeSymbols(const Bitpayload& payload, uint64_t symbolCount,
                               const std::function<ProbabilityTable(std::span<const int>)>& nextTable) {
  RangeDecoder dec(payload.bytes);
  std::vector<int> out;
  out.reserve(symbolCount);
  for (uint64_t i = 0; i < symbolCount; ++i) out.push_back(dec.decode(nextTable(out)));
  return out;
}

double crossEntropyBits(std::span<const int> symbols, std::span<const ProbabilityTable> tables) {
  double bits = 0.0;
  for (size_t i = 0; i < symbols.size(); ++i)
    bits -= std::log2(static_cast<double>(tables[i].weights[symbols[i]]) / ProbabilityTable::kTotal);
  return bits;
}

}  // namespace olc
