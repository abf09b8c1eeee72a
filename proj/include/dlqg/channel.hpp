#pragma once

// Bernoulli erasure channel with acknowledgments: on success the receiver
// gets the transmitted state exactly, on a drop it gets nothing, and both
// controllers observe the same outcome. Also home to the seeded substream
// scheme that keeps episodes reproducible and independent.

#include <cstdint>
#include <optional>
#include <random>
#include <utility>

#include "dlqg/errors.hpp"
#include "dlqg/model.hpp"
#include "dlqg/types.hpp"

namespace dlqg {

/// Channel output: either the transmitted state vector or nothing.
template <typename Scalar>
class ChannelOutput {
 public:
  static ChannelOutput received(VectorX<Scalar> x) { return ChannelOutput(std::move(x)); }
  static ChannelOutput dropped() { return ChannelOutput(); }

  bool is_received() const { return x_.has_value(); }
  const VectorX<Scalar>& value() const {
    if (!x_) throw Error("ChannelOutput: no value in a dropped packet");
    return *x_;
  }

 private:
  ChannelOutput() = default;
  explicit ChannelOutput(VectorX<Scalar> x) : x_(std::move(x)) {}
  std::optional<VectorX<Scalar>> x_;
};

using ChannelOutputd = ChannelOutput<double>;

/// Deterministic map from (state, link bit) to the channel output.
template <typename Scalar>
ChannelOutput<Scalar> transmit(const VectorX<Scalar>& x, int gamma) {
  return gamma != 0 ? ChannelOutput<Scalar>::received(x) : ChannelOutput<Scalar>::dropped();
}

using RandomStream = std::mt19937_64;

namespace stream_label {
inline constexpr std::uint32_t gamma = 0;
inline constexpr std::uint32_t noise = 1;
inline constexpr std::uint32_t init = 2;
}  // namespace stream_label

/// Substream derived from (master seed, episode index, label). Equal inputs
/// give identical sequences; distinct labels decorrelate the channel, noise,
/// and initial-state draws within an episode.
inline RandomStream make_stream(std::uint64_t master_seed, std::uint64_t episode,
                                std::uint32_t label) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(episode),
                    static_cast<std::uint32_t>(episode >> 32), label};
  return RandomStream(seq);
}

struct EpisodeStreams {
  RandomStream gamma;
  RandomStream noise;
  RandomStream init;
};

inline EpisodeStreams make_episode_streams(std::uint64_t master_seed, std::uint64_t episode) {
  return {make_stream(master_seed, episode, stream_label::gamma),
          make_stream(master_seed, episode, stream_label::noise),
          make_stream(master_seed, episode, stream_label::init)};
}

/// One Bernoulli(1-p) link bit. Exact at the boundaries: p = 0 always
/// succeeds, p = 1 always drops.
inline int sample_gamma(RandomStream& stream, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw BadProbability("drop probability must lie in [0, 1]");
  const double u = std::generate_canonical<double, 53>(stream);  // u in [0, 1)
  return u >= p ? 1 : 0;
}

/// Zero-mean sample with covariance sqrt_cov * sqrt_cov^T, from either an
/// i.i.d. standard normal or an i.i.d. +/-1 factor vector.
template <typename Scalar>
VectorX<Scalar> sample_zero_mean(RandomStream& stream, const MatrixX<Scalar>& sqrt_cov,
                                 NoiseKind kind) {
  VectorX<Scalar> factors(sqrt_cov.cols());
  if (kind == NoiseKind::gaussian) {
    std::normal_distribution<double> n01;
    for (Index i = 0; i < factors.size(); ++i) factors(i) = Scalar(n01(stream));
  } else {
    for (Index i = 0; i < factors.size(); ++i) {
      factors(i) = std::generate_canonical<double, 53>(stream) < 0.5 ? Scalar(-1) : Scalar(1);
    }
  }
  return sqrt_cov * factors;
}

}  // namespace dlqg
