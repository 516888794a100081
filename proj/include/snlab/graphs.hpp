#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace snlab {

enum class FamilyKind { RegularTree, Cycle, Torus };

struct GraphFamily {
    FamilyKind kind = FamilyKind::Cycle;
    int degree = 2;
    int dim = 1;             // periodic families only
    std::uint64_t side = 3;  // periodic families only

    static GraphFamily regular_tree(int d);
    static GraphFamily cycle(std::uint64_t n);
    static GraphFamily torus(int dim, std::uint64_t side);

    bool is_tree() const { return kind == FamilyKind::RegularTree; }
    bool is_periodic() const { return !is_tree(); }
    // Number of vertices of a periodic family; throws for trees.
    std::uint64_t order() const;
    std::string name() const;

    bool operator==(const GraphFamily&) const = default;
};

enum class BoundaryPolicy { Absorb, Reject };

std::string to_string(BoundaryPolicy p);
BoundaryPolicy boundary_policy_from_string(const std::string& s);

using VertexId = std::uint64_t;

struct Neighbor {
    VertexId id = 0;
    bool in_window = false;
    bool operator==(const Neighbor&) const = default;
};

// Tree vertices are numbered in breadth-first order from the root: the root is
// 0, depth-k vertices occupy [level_start(k), level_start(k+1)), and within a
// level the offset is the mixed-radix reading of the child-index path (first
// index in [0, d), later ones in [0, d-1)). Codes exist only while they fit in
// 64 bits.
namespace tree_code {
std::optional<std::uint64_t> level_start(int d, int k);
int max_encodable_depth(int d);
VertexId encode(int d, std::span<const int> path);
std::vector<int> decode(int d, VertexId v);
}  // namespace tree_code

class Window {
public:
    Window(GraphFamily family, int radius, BoundaryPolicy policy = BoundaryPolicy::Reject);

    const GraphFamily& family() const { return family_; }
    int radius() const { return radius_; }
    BoundaryPolicy policy() const { return policy_; }
    int degree() const { return family_.degree; }
    VertexId root() const { return 0; }

    bool contains(VertexId v) const;
    // Distance from the root.
    int depth(VertexId v) const;
    std::vector<Neighbor> neighbors(VertexId v) const;
    int distance(VertexId u, VertexId v) const;
    // Closed-form |B_R(root)|. Throws std::overflow_error when not representable.
    std::uint64_t ball_size() const;
    bool on_boundary(VertexId v) const;
    // True when the window is the whole (finite) periodic graph.
    bool covers_graph() const;
    // All window vertices in increasing id order. Throws std::length_error above `limit`.
    std::vector<VertexId> vertices(std::uint64_t limit = 50'000'000) const;

    // Tree helpers.
    VertexId parent(VertexId v) const;
    VertexId child(VertexId v, int j) const;
    std::vector<VertexId> children(VertexId v) const;
    int encodable_depth() const { return static_cast<int>(level_starts_.size()) - 2; }

    // Periodic helpers.
    std::vector<std::int64_t> coords(VertexId v) const;
    VertexId from_coords(std::span<const std::int64_t> c) const;

    bool operator==(const Window& o) const {
        return family_ == o.family_ && radius_ == o.radius_ && policy_ == o.policy_;
    }

private:
    void require(VertexId v) const;
    int tree_depth(VertexId v) const;
    int torus_distance(VertexId u, VertexId v) const;
    VertexId shift(VertexId v, int axis, int sign) const;

    GraphFamily family_;
    int radius_;
    BoundaryPolicy policy_;
    std::vector<std::uint64_t> level_starts_;  // tree only; one past the last encodable level
};

// Children of a are split by index: the first l = floor((d-1)/2) are the left
// set, the rest the right set (d-l-1 of them, or d-l at the root).
std::pair<std::vector<VertexId>, std::vector<VertexId>> left_right_split(const Window& w,
                                                                         VertexId a);
int left_count(int d);

}  // namespace snlab
