#ifndef LER_TESTS_MUTATION_HPP
#define LER_TESTS_MUTATION_HPP

#include "ler/canonical.hpp"

#include <random>
#include <string>
#include <vector>

namespace ler::testing {

/// JSON pointers of every non-null scalar leaf.
std::vector<std::string> mutable_leaves(const Json& doc);

/// Copy of `doc` with the leaf at `pointer` changed and its JSON type kept:
/// hex strings get one bit flipped, DIDs one identifier character swapped,
/// known enum words mapped to another member, other strings one character
/// replaced, integers XORed with 1<<k, doubles nudged, booleans negated.
Json mutate_leaf(const Json& doc, const std::string& pointer, std::mt19937_64& gen);

} // namespace ler::testing

#endif
