/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "stacksurgeon/sample.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stacksurgeon {

/// Count-annotated call-tree node. `count` is inclusive: the number of
/// samples whose chain passed through this node. Invariants:
///   count >= sum of children counts (difference = samples ending here),
///   count >= 1 for any node present in a tree.
struct CallNode {
    std::string name;
    std::uint64_t count = 0;
    std::map<std::string, CallNode> children;

    bool operator==(const CallNode&) const = default;
};

/// Accumulated profile. total_samples equals the number of ingested chains,
/// which equals the sum of root counts; with a single root it equals that
/// root's count.
struct CallTree {
    std::map<std::string, CallNode> roots;
    std::uint64_t total_samples = 0;

    bool operator==(const CallTree&) const = default;
};

/// Exact reversal of a leaf-first chain into root-first order.
/// Throws EmptyChain.
std::vector<FrameName> reverse_chain(std::vector<FrameName> chain);
std::vector<std::string> reverse_chain(std::vector<std::string> chain);

/// Adds one root-first chain: every node along the path is created on first
/// sight with count 1, or incremented; total_samples grows by one.
void ingest(CallTree& tree, std::span<const std::string> root_first_chain);
void ingest(CallTree& tree, std::span<const FrameName> root_first_chain);

/// Node-wise sum of two trees. Commutative and associative.
CallTree merge(const CallTree& a, const CallTree& b);

/// Percentage of the total: exactly 100 * count / total_samples.
/// Throws ZeroTotal.
double share(std::uint64_t count, std::uint64_t total_samples);

/// Exclusive count: samples that terminated at this node.
std::uint64_t self_count(const CallNode& node);

/// Emits the callstack.json form: every node object holds an integer
/// "count" member first, then its children in lexicographic name order.
/// Deterministic byte-for-byte. Functions literally named "count" (or
/// already carrying the escape suffix) gain one "#fn" on output.
std::string serialize(const CallTree& tree);

/// Parses and validates callstack.json text. Throws SchemaViolation with
/// the offending node path on missing/invalid counts, non-object members,
/// or a child-count sum exceeding its parent.
CallTree deserialize(std::string_view json_text);

}  // namespace stacksurgeon
