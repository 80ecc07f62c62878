/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/calltree.hpp"

#include "stacksurgeon/errors.hpp"

#include <algorithm>
#include <json.hpp>

namespace stacksurgeon {

namespace {

// A function literally named "count" (or already carrying the escape
// suffix) would collide with the reserved JSON member; one "#fn" is
// appended on output and stripped on input.
bool needs_count_escape(std::string_view name) {
    if (!name.starts_with("count")) {
        return false;
    }
    std::string_view rest = name.substr(5);
    while (rest.starts_with("#fn")) {
        rest.remove_prefix(3);
    }
    return rest.empty();
}

std::string escape_key(std::string_view name) {
    std::string key{name};
    if (needs_count_escape(name)) {
        key += "#fn";
    }
    return key;
}

std::string unescape_key(std::string_view key) {
    std::string name{key};
    if (key != "count" && needs_count_escape(key)) {
        name.resize(name.size() - 3);
    }
    return name;
}

// nlohmann's dump() of a string value is exactly a JSON string literal.
std::string quote(std::string_view text) {
    return nlohmann::json(text).dump();
}

void write_node(const CallNode& node, std::string& out) {
    out += "{\"count\": ";
    out += std::to_string(node.count);
    for (const auto& [name, child] : node.children) {
        out += ", ";
        out += quote(escape_key(name));
        out += ": ";
        write_node(child, out);
    }
    out += '}';
}

[[noreturn]] void schema_violation(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::SchemaViolation, "callstack.json schema violation at " + path + ": " + what);
}

CallNode read_node(std::string name, const nlohmann::json& value, const std::string& path) {
    if (!value.is_object()) {
        schema_violation(path, "node is not an object");
    }
    CallNode node;
    node.name = std::move(name);

    auto count_it = value.find("count");
    if (count_it == value.end()) {
        schema_violation(path, "missing \"count\"");
    }
    if (count_it->is_number_integer() && count_it->get<std::int64_t>() < 0) {
        schema_violation(path, "negative count");
    }
    if (!count_it->is_number_unsigned()) {
        schema_violation(path, "\"count\" is not a non-negative integer");
    }
    node.count = count_it->get<std::uint64_t>();
    if (node.count < 1) {
        schema_violation(path, "count must be >= 1");
    }

    std::uint64_t child_sum = 0;
    for (const auto& [key, child_value] : value.items()) {
        if (key == "count") {
            continue;
        }
        std::string child_name = unescape_key(key);
        CallNode child = read_node(child_name, child_value, path + "." + key);
        child_sum += child.count;
        node.children.emplace(child.name, std::move(child));
    }
    if (child_sum > node.count) {
        schema_violation(path, "children counts sum to " + std::to_string(child_sum) +
                                   ", exceeding parent count " + std::to_string(node.count));
    }
    return node;
}

}  // namespace

std::vector<FrameName> reverse_chain(std::vector<FrameName> chain) {
    if (chain.empty()) {
        throw Error(ErrorCode::EmptyChain, "cannot reverse an empty chain");
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

std::vector<std::string> reverse_chain(std::vector<std::string> chain) {
    if (chain.empty()) {
        throw Error(ErrorCode::EmptyChain, "cannot reverse an empty chain");
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

void ingest(CallTree& tree, std::span<const std::string> root_first_chain) {
    if (root_first_chain.empty()) {
        throw Error(ErrorCode::EmptyChain, "cannot ingest an empty chain");
    }
    std::map<std::string, CallNode>* level = &tree.roots;
    for (const std::string& name : root_first_chain) {
        CallNode& node = (*level)[name];
        if (node.name.empty()) {
            node.name = name;
        }
        ++node.count;
        level = &node.children;
    }
    ++tree.total_samples;
}

void ingest(CallTree& tree, std::span<const FrameName> root_first_chain) {
    std::vector<std::string> names;
    names.reserve(root_first_chain.size());
    for (const FrameName& frame : root_first_chain) {
        names.push_back(frame.display);
    }
    ingest(tree, names);
}

namespace {

void merge_into(CallNode& dst, const CallNode& src) {
    dst.count += src.count;
    for (const auto& [name, child] : src.children) {
        CallNode& target = dst.children[name];
        if (target.name.empty()) {
            target.name = name;
        }
        merge_into(target, child);
    }
}

}  // namespace

CallTree merge(const CallTree& a, const CallTree& b) {
    CallTree out = a;
    for (const auto& [name, root] : b.roots) {
        CallNode& target = out.roots[name];
        if (target.name.empty()) {
            target.name = name;
        }
        merge_into(target, root);
    }
    out.total_samples = a.total_samples + b.total_samples;
    return out;
}

double share(std::uint64_t count, std::uint64_t total_samples) {
    if (total_samples == 0) {
        throw Error(ErrorCode::ZeroTotal, "share undefined for zero total samples");
    }
    return 100.0 * static_cast<double>(count) / static_cast<double>(total_samples);
}

std::uint64_t self_count(const CallNode& node) {
    std::uint64_t child_sum = 0;
    for (const auto& [name, child] : node.children) {
        child_sum += child.count;
    }
    return node.count - child_sum;
}

std::string serialize(const CallTree& tree) {
    std::string out = "{";
    bool first = true;
    for (const auto& [name, root] : tree.roots) {
        if (!first) {
            out += ", ";
        }
        first = false;
        out += quote(escape_key(name));
        out += ": ";
        write_node(root, out);
    }
    out += '}';
    return out;
}

CallTree deserialize(std::string_view json_text) {
    nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(ErrorCode::SchemaViolation, "callstack.json schema violation at $: not valid JSON");
    }
    if (!doc.is_object()) {
        throw Error(ErrorCode::SchemaViolation,
                    "callstack.json schema violation at $: top level is not an object");
    }
    CallTree tree;
    for (const auto& [key, value] : doc.items()) {
        std::string name = unescape_key(key);
        CallNode root = read_node(name, value, "$." + key);
        tree.total_samples += root.count;
        tree.roots.emplace(root.name, std::move(root));
    }
    return tree;
}

}  // namespace stacksurgeon
