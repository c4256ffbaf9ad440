#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>

#include "mail/core/types.hpp"

namespace mail {

// Counter-based SplitMix64 stream.
//
// The n-th draw of a stream with key s is mix64(s + (n + 1) * 0x9E3779B97F4A7C15),
// where mix64 is the SplitMix64 finalizer. Doubles take the top 53 bits.
// Nothing here depends on the standard library's distributions, so any language
// reproduces the same streams from the same key.
class Rng {
  public:
   static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

   explicit Rng(std::uint64_t key = 0) noexcept : key_(key) {}

   static constexpr std::uint64_t mix64(std::uint64_t z) noexcept
   {
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      return z ^ (z >> 31);
   }

   // Folds a list of words into a stream key.
   static constexpr std::uint64_t combine(std::initializer_list<std::uint64_t> words) noexcept
   {
      std::uint64_t h = 0x6A09E667F3BCC909ULL;
      for (auto w : words) h = mix64(h ^ mix64(w + kGamma));
      return h;
   }

   // FNV-1a, used to turn names (algorithm ids) into stream words.
   static constexpr std::uint64_t hash_name(std::string_view s) noexcept
   {
      std::uint64_t h = 0xCBF29CE484222325ULL;
      for (unsigned char c : s) {
         h ^= c;
         h *= 0x100000001B3ULL;
      }
      return h;
   }

   std::uint64_t key() const noexcept { return key_; }
   std::uint64_t counter() const noexcept { return counter_; }

   // Independent child stream; does not advance this one.
   Rng split(std::uint64_t tag) const noexcept { return Rng(combine({key_, tag})); }

   std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * kGamma); }

   // Uniform in [0, 1).
   double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

   // Uniform integer in [0, n); modulo with rejection.
   int uniform_int(int n)
   {
      if (n <= 0) throw ArgumentError("uniform_int: n must be positive");
      const auto un = static_cast<std::uint64_t>(n);
      const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % un);
      std::uint64_t r;
      do {
         r = next_u64();
      } while (r >= limit);
      return static_cast<int>(r % un);
   }

   // Inverse-CDF draw from a probability vector. Falls back to the last index
   // with positive mass when rounding leaves u above the running sum.
   template <typename Probs>
   int categorical(const Probs& probs)
   {
      const double u = uniform();
      double acc = 0.0;
      int last_positive = -1;
      const int n = static_cast<int>(probs.size());
      for (int i = 0; i < n; ++i) {
         const double p = probs[i];
         if (p > 0.0) last_positive = i;
         acc += p;
         if (u < acc && p > 0.0) return i;
      }
      if (last_positive < 0) throw NumericalError("categorical: distribution has no mass");
      return last_positive;
   }

  private:
   std::uint64_t key_;
   std::uint64_t counter_ = 0;
};

}  // namespace mail
