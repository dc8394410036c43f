#pragma once

#include <cstdint>
#include <vector>

#include "udlab/common.hpp"

namespace udlab {

// Result of jointly parsing the pair sequence (y_i, z_i) into phrases, where
// each phrase is the shortest pair string not seen as an earlier phrase.
struct PhraseParse {
  // n_0 = 0 < n_1 < ... < n_c = n; phrase i covers positions (n_{i-1}, n_i].
  std::vector<int> boundaries;
  int c_yz = 0;                    // number of joint phrases (last one included)
  std::vector<int> z_phrase_ids;   // per joint phrase: 0-based id of its z-projection
  int c_z = 0;                     // number of distinct z-projections
  std::vector<int> c_ell;          // per distinct z-projection: how many joint phrases map to it
  bool last_complete = true;       // false when input ended inside the dictionary
};

// Reusable parser: keeps trie arenas alive across calls so the per-call cost
// is O(n) with no allocation churn in steady state.
class JointParser {
 public:
  JointParser(int y_alphabet_size, int z_alphabet_size);

  void parse_into(const Sequence& y, const Sequence& z, PhraseParse& out);

  PhraseParse parse(const Sequence& y, const Sequence& z) {
    PhraseParse out;
    parse_into(y, z, out);
    return out;
  }

  int y_alphabet_size() const { return ya_; }
  int z_alphabet_size() const { return za_; }

 private:
  int ya_;
  int za_;
  int fanout_;                       // ya_ * za_
  std::vector<std::int32_t> pair_children_;  // joint trie, node*fanout_ + pair
  std::vector<std::int32_t> z_children_;     // z trie, node*za_ + symbol
  std::vector<std::int32_t> z_class_of_node_;
};

PhraseParse joint_parse(const Sequence& y, const Sequence& z, int y_alphabet_size,
                        int z_alphabet_size);

// v(y,z) = sum_l c_l log2 c_l over distinct z-phrases (1*log2(1) = 0).
double v_metric(const PhraseParse& parse);

// Largest phrase count any length-n pair sequence over an alphabet of size A
// can produce: c-1 distinct phrases of minimal total length plus a final
// phrase of length >= 1.
long long cbar(long long n, int pair_alphabet_size);

// Back-solves eps from cbar = n*log(A) / ((1-eps)*log n). Diagnostic only;
// requires n >= 2.
double cbar_formula_epsilon(long long n, int pair_alphabet_size);

}  // namespace udlab
