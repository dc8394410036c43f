#include "udlab/lz.hpp"

#include <cmath>

namespace udlab {

JointParser::JointParser(int y_alphabet_size, int z_alphabet_size)
    : ya_(y_alphabet_size), za_(z_alphabet_size), fanout_(y_alphabet_size * z_alphabet_size) {
  if (ya_ < 1 || za_ < 1) throw DomainError("JointParser: alphabet sizes must be >= 1");
}

void JointParser::parse_into(const Sequence& y, const Sequence& z, PhraseParse& out) {
  const std::size_t n = y.size();
  if (n != z.size()) throw LengthMismatch("joint_parse: y and z lengths differ");
  if (n == 0) throw LengthMismatch("joint_parse: empty input");

  // At most n phrases, hence at most n+1 trie nodes per trie.
  pair_children_.assign((n + 1) * static_cast<std::size_t>(fanout_), -1);
  z_children_.assign((n + 1) * static_cast<std::size_t>(za_), -1);
  z_class_of_node_.assign(n + 1, -1);

  out.boundaries.clear();
  out.boundaries.push_back(0);
  out.z_phrase_ids.clear();
  out.c_ell.clear();
  out.c_yz = 0;
  out.c_z = 0;
  out.last_complete = true;

  std::int32_t pair_nodes = 1;  // node 0 is the root
  std::int32_t z_nodes = 1;

  std::size_t i = 0;
  while (i < n) {
    std::int32_t node = 0;
    std::int32_t z_node = 0;
    bool complete = false;
    while (i < n) {
      const Symbol ys = y[i];
      const Symbol zs = z[i];
      if (ys < 0 || ys >= ya_ || zs < 0 || zs >= za_)
        throw DomainError("joint_parse: symbol outside alphabet");
      ++i;

      std::int32_t& zc = z_children_[static_cast<std::size_t>(z_node) * za_ + zs];
      if (zc < 0) zc = z_nodes++;
      z_node = zc;

      std::int32_t& pc =
          pair_children_[static_cast<std::size_t>(node) * fanout_ + ys * za_ + zs];
      if (pc < 0) {
        pc = pair_nodes++;
        complete = true;
        break;
      }
      node = pc;
    }

    out.boundaries.push_back(static_cast<int>(i));
    ++out.c_yz;
    std::int32_t& cls = z_class_of_node_[static_cast<std::size_t>(z_node)];
    if (cls < 0) {
      cls = out.c_z++;
      out.c_ell.push_back(0);
    }
    out.z_phrase_ids.push_back(cls);
    ++out.c_ell[static_cast<std::size_t>(cls)];
    if (!complete) out.last_complete = false;
  }
}

PhraseParse joint_parse(const Sequence& y, const Sequence& z, int y_alphabet_size,
                        int z_alphabet_size) {
  JointParser parser(y_alphabet_size, z_alphabet_size);
  return parser.parse(y, z);
}

double v_metric(const PhraseParse& parse) {
  // An incomplete final phrase ends inside the trie, so its content repeats an
  // earlier phrase; it is not a distinct phrase and does not contribute to the
  // per-class distinct counts entering sum c_l * log2(c_l).
  const int dup_class = parse.last_complete ? -1 : parse.z_phrase_ids.back();
  double v = 0.0;
  for (std::size_t l = 0; l < parse.c_ell.size(); ++l) {
    int c = parse.c_ell[l];
    if (static_cast<int>(l) == dup_class) --c;
    if (c > 1) v += static_cast<double>(c) * std::log2(static_cast<double>(c));
  }
  return v;
}

long long cbar(long long n, int pair_alphabet_size) {
  if (n < 1) throw DomainError("cbar: n must be >= 1");
  if (pair_alphabet_size < 2) throw DomainError("cbar: alphabet size must be >= 2");
  const long long budget = n - 1;  // the final phrase always consumes >= 1 symbol
  long long used = 0;
  long long count = 0;
  long long capacity = 1;  // number of distinct strings of the current length
  for (long long len = 1; used < budget; ++len) {
    if (capacity <= budget / pair_alphabet_size + 1) {
      capacity *= pair_alphabet_size;
    } else {
      capacity = budget + 1;  // saturate; more capacity than we can ever use
    }
    long long take = (budget - used) / len;
    if (take > capacity) take = capacity;
    if (take <= 0) break;
    count += take;
    used += take * len;
    if (take < capacity) break;  // length budget, not capacity, was binding
  }
  return count + 1;
}

double cbar_formula_epsilon(long long n, int pair_alphabet_size) {
  if (n < 2) throw DomainError("cbar_formula_epsilon: n must be >= 2");
  const double c = static_cast<double>(cbar(n, pair_alphabet_size));
  const double num = static_cast<double>(n) * std::log2(static_cast<double>(pair_alphabet_size));
  return 1.0 - num / (c * std::log2(static_cast<double>(n)));
}

}  // namespace udlab
