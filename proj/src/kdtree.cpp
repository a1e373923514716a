#include "alertmon/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "alertmon/error.hpp"

namespace alertmon {

KdTree::KdTree(std::vector<double> points, std::size_t dim, std::vector<std::int32_t> tie_keys,
               std::size_t leaf_size)
    : points_(std::move(points)), dim_(dim), tie_keys_(std::move(tie_keys)),
      leaf_size_(std::max<std::size_t>(1, leaf_size))
{
    if (dim_ == 0 || points_.size() % dim_ != 0)
        throw Error(ErrorCode::DimensionMismatch, "point matrix is not a multiple of dim");
    const std::size_t n = size();
    if (n > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorCode::InvalidConfig, "too many points for kd-tree");
    if (tie_keys_.empty())
        tie_keys_.assign(n, 0);
    if (tie_keys_.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "tie key count differs from point count");

    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0U);
    if (n > 0) {
        nodes_.reserve(2 * (n / leaf_size_ + 1));
        root_ = build(0, static_cast<std::uint32_t>(n));
    }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end)
{
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_)
        return id;

    std::size_t widest = 0;
    double widest_spread = -1.0;
    for (std::size_t d = 0; d < dim_; ++d) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (auto i = begin; i < end; ++i) {
            const double v = points_[order_[i] * dim_ + d];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > widest_spread) {
            widest_spread = hi - lo;
            widest = d;
        }
    }
    // All points identical: splitting cannot separate them.
    if (widest_spread <= 0.0)
        return id;

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         return points_[a * dim_ + widest] < points_[b * dim_ + widest];
                     });
    const double split = points_[order_[mid] * dim_ + widest];

    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.left = left;
    node.right = right;
    node.split_dim = static_cast<std::uint32_t>(widest);
    node.split_value = split;
    return id;
}

double KdTree::dist2(std::span<const double> q, std::size_t i) const noexcept
{
    const double* p = points_.data() + i * dim_;
    double s = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) {
        const double diff = q[d] - p[d];
        s += diff * diff;
    }
    return s;
}

bool KdTree::precedes(const Neighbor& a, const Neighbor& b) const
{
    if (a.dist2 != b.dist2)
        return a.dist2 < b.dist2;
    const double* pa = points_.data() + a.index * dim_;
    const double* pb = points_.data() + b.index * dim_;
    for (std::size_t d = 0; d < dim_; ++d)
        if (pa[d] != pb[d])
            return pa[d] < pb[d];
    if (tie_keys_[a.index] != tie_keys_[b.index])
        return tie_keys_[a.index] < tie_keys_[b.index];
    return a.index < b.index;
}

void KdTree::search(std::int32_t node_id, std::span<const double> q, std::size_t k,
                    std::vector<Neighbor>& heap) const
{
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    auto worse = [this](const Neighbor& a, const Neighbor& b) { return precedes(a, b); };

    if (node.leaf()) {
        for (auto i = node.begin; i < node.end; ++i) {
            const Neighbor cand{order_[i], dist2(q, order_[i])};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), worse);
            } else if (precedes(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), worse);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), worse);
            }
        }
        return;
    }

    // Left holds coordinates <= split, right holds >= split.
    const double diff = q[node.split_dim] - node.split_value;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, k, heap);
    // Equal distances must still be visited: a tied point may rank earlier.
    if (heap.size() < k || diff * diff <= heap.front().dist2)
        search(far, q, k, heap);
}

std::vector<KdTree::Neighbor> KdTree::query(std::span<const double> q, std::size_t k) const
{
    if (q.size() != dim_)
        throw Error(ErrorCode::DimensionMismatch,
                    "query has " + std::to_string(q.size()) + " dims, index has " + std::to_string(dim_));
    std::vector<Neighbor> heap;
    k = std::min(k, size());
    if (k == 0 || root_ < 0)
        return heap;
    heap.reserve(k + 1);
    search(root_, q, k, heap);
    std::sort(heap.begin(), heap.end(), [this](const Neighbor& a, const Neighbor& b) { return precedes(a, b); });
    return heap;
}

} // namespace alertmon
