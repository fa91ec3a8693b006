#include <algorithm>
#include <cmath>

#include "consensus/certify.h"
#include "consensus/error.h"

namespace consensus::certify {
namespace {

// Support pattern of a nonnegative matrix; powers of A have the support of
// the boolean powers of its pattern, so indices are computed exactly.
class Support {
 public:
  explicit Support(const Eigen::MatrixXd& a)
      : n_(static_cast<std::size_t>(a.rows())), bits_(n_ * n_, false) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) bits_[i * n_ + j] = a(i, j) > kSupportThreshold;
    }
  }

  Support times(const Support& b) const {
    Support out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = 0; k < n_; ++k) {
        if (!at(i, k)) continue;
        for (std::size_t j = 0; j < n_; ++j) {
          if (b.at(k, j)) out.bits_[i * n_ + j] = true;
        }
      }
    }
    return out;
  }

  bool positive() const { return std::all_of(bits_.begin(), bits_.end(), [](bool b) { return b; }); }

  bool scrambling() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        bool shared = false;
        for (std::size_t k = 0; k < n_ && !shared; ++k) shared = at(i, k) && at(j, k);
        if (!shared) return false;
      }
    }
    return true;
  }

  friend bool operator==(const Support&, const Support&) = default;

 private:
  explicit Support(std::size_t n) : n_(n), bits_(n * n, false) {}
  bool at(std::size_t i, std::size_t j) const { return bits_[i * n_ + j]; }

  std::size_t n_;
  std::vector<bool> bits_;
};

template <typename Done>
std::optional<int> FirstPower(const Eigen::MatrixXd& a, int cap, Done done) {
  maps::require_row_stochastic(a);
  if (cap < 1) throw InvalidArgument("matrix index cap must be >= 1");
  const Support base(a);
  Support power = base;
  std::vector<Support> seen;
  for (int k = 1; k <= cap; ++k) {
    if (done(power)) return k;
    // Support sequences are eventually periodic; once a pattern repeats
    // nothing new can appear.
    if (std::find(seen.begin(), seen.end(), power) != seen.end()) return std::nullopt;
    seen.push_back(power);
    power = power.times(base);
  }
  return std::nullopt;
}

int DefaultCap(std::size_t n) {
  const int m = static_cast<int>(n) - 1;
  return m * m + 1;
}

}  // namespace

double scrambling_coefficient(const Eigen::MatrixXd& a) {
  maps::require_row_stochastic(a);
  // 1 - sum_k min(a_ik, a_jk) equals half the l1 row distance for stochastic
  // rows, and is exactly 1 for disjoint supports, so tau < 1 agrees with the
  // support test under rounding.
  double overlap = 1.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.rows(); ++j) {
      overlap = std::min(overlap, a.row(i).cwiseMin(a.row(j)).sum());
    }
  }
  if (a.rows() < 2) return 0.0;
  return std::clamp(1.0 - overlap, 0.0, 1.0);
}

bool is_scrambling(const Eigen::MatrixXd& a) {
  maps::require_row_stochastic(a);
  return Support(a).scrambling();
}

std::optional<int> scrambling_index(const Eigen::MatrixXd& a, int cap) {
  return FirstPower(a, cap, [](const Support& s) { return s.scrambling(); });
}

std::optional<int> regularity_index(const Eigen::MatrixXd& a, int cap) {
  return FirstPower(a, cap, [](const Support& s) { return s.positive(); });
}

MatrixAnalysis analyze_matrix(const Eigen::MatrixXd& a, std::optional<int> cap) {
  maps::require_row_stochastic(a);
  MatrixAnalysis out;
  out.size = static_cast<std::size_t>(a.rows());
  out.cap = cap.value_or(DefaultCap(out.size));
  out.tau = scrambling_coefficient(a);
  out.scrambling = is_scrambling(a);
  out.regularity_index = regularity_index(a, out.cap);
  out.scrambling_index = scrambling_index(a, out.cap);
  return out;
}

nlohmann::json MatrixAnalysis::to_json() const {
  nlohmann::json j = {{"size", size},
                      {"tau", tau},
                      {"scrambling", scrambling},
                      {"regularity_index", nullptr},
                      {"scrambling_index", nullptr},
                      {"cap", cap}};
  if (regularity_index) j["regularity_index"] = *regularity_index;
  if (scrambling_index) j["scrambling_index"] = *scrambling_index;
  return j;
}

}  // namespace consensus::certify
