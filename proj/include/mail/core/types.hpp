#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mail {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Player : int { One = 1, Two = 2 };

constexpr Player other(Player p) noexcept { return p == Player::One ? Player::Two : Player::One; }
constexpr int index_of(Player p) noexcept { return p == Player::One ? 0 : 1; }
constexpr Player player_from_index(int i) noexcept { return i == 0 ? Player::One : Player::Two; }

inline std::string to_string(Player p) { return p == Player::One ? "1" : "2"; }

// Error hierarchy. Every failure the library reports derives from Error so
// callers (the harness in particular) can tag a run without aborting a sweep.
class Error : public std::runtime_error {
  public:
   using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
  public:
   using Error::Error;
};

class ArgumentError : public Error {
  public:
   using Error::Error;
};

class NumericalError : public Error {
  public:
   using Error::Error;
};

class SingularityError : public NumericalError {
  public:
   SingularityError(const std::string& what, int stage) : NumericalError(what), stage_(stage) {}
   int stage() const noexcept { return stage_; }

  private:
   int stage_;
};

class DecodeError : public Error {
  public:
   using Error::Error;
};

class ConfigError : public Error {
  public:
   using Error::Error;
};

}  // namespace mail
