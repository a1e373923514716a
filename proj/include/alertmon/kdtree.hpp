#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace alertmon {

// Exact k-nearest-neighbour index over a row-major point matrix.
//
// Neighbours are ranked by the total order (squared Euclidean distance,
// coordinates lexicographically, tie key), so the selected set does not depend
// on insertion order except among exact duplicates sharing a tie key. The
// tree splits at the median of the widest dimension and stops at leaf_size.
class KdTree {
public:
    struct Neighbor {
        std::size_t index = 0;
        double dist2 = 0.0;
    };

    static constexpr std::size_t kDefaultLeafSize = 16;

    KdTree() = default;
    KdTree(std::vector<double> points, std::size_t dim, std::vector<std::int32_t> tie_keys = {},
           std::size_t leaf_size = kDefaultLeafSize);

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : points_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }
    std::int32_t tie_key(std::size_t i) const { return tie_keys_[i]; }

    // Nearest first; returns min(k, size()) neighbours.
    std::vector<Neighbor> query(std::span<const double> q, std::size_t k) const;

    // Strict-weak "a ranks before b" for two candidates at the given distances.
    bool precedes(const Neighbor& a, const Neighbor& b) const;

private:
    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t split_dim = 0;
        double split_value = 0.0;
        bool leaf() const noexcept { return left < 0; }
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::int32_t node, std::span<const double> q, std::size_t k,
                std::vector<Neighbor>& heap) const;
    double dist2(std::span<const double> q, std::size_t i) const noexcept;

    std::vector<double> points_;
    std::size_t dim_ = 0;
    std::vector<std::int32_t> tie_keys_;
    std::size_t leaf_size_ = kDefaultLeafSize;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

} // namespace alertmon
