#pragma once

// Rating datasets: loading, dense reindexing, held-out item splits, and
// per-item rater pools.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coldstart/errors.hpp"

namespace coldstart {

class LatentModel;

/// Dense 0-based reindexing of external string identifiers.
class IdIndex {
 public:
  /// Index of `label`, inserting it if new.
  std::size_t intern(std::string_view label);
  std::optional<std::size_t> find(std::string_view label) const;
  /// Throws Error when `label` is unknown.
  std::size_t at(std::string_view label) const;
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// One observed rating. `user` and `item` index into the owning dataset's
/// indices, except for ratings produced by reveal(), whose `user` is the
/// model's user index.
struct Rating {
  std::size_t user = 0;
  std::size_t item = 0;
  double value = 0.0;
  std::int64_t timestamp = 0;
};

struct RatingScale {
  double min = 1.0;
  double max = 5.0;
  bool contains(double v) const noexcept { return v >= min && v <= max; }
};

/// Parses "MIN:MAX".
RatingScale parse_scale(std::string_view text);

enum class RatingFormat { csv, movielens };

RatingFormat parse_format(std::string_view text);

class RatingDataset;

/// Accumulates ratings, enforcing scale and (user, item) uniqueness.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(RatingScale scale = {});

  /// Throws Error on a duplicate pair or an out-of-scale value.
  void add(std::string_view user, std::string_view item, double value, std::int64_t timestamp = 0);
  std::size_t size() const noexcept { return ratings_.size(); }
  RatingDataset build() &&;

 private:
  RatingScale scale_;
  IdIndex users_;
  IdIndex items_;
  std::vector<Rating> ratings_;
  std::unordered_map<std::uint64_t, std::size_t> seen_;
};

/// Immutable sparse rating collection with dense user/item indices.
class RatingDataset {
 public:
  RatingDataset() = default;

  const std::vector<Rating>& ratings() const noexcept { return ratings_; }
  const IdIndex& users() const noexcept { return users_; }
  const IdIndex& items() const noexcept { return items_; }
  RatingScale scale() const noexcept { return scale_; }
  std::size_t size() const noexcept { return ratings_.size(); }
  bool empty() const noexcept { return ratings_.empty(); }

  /// Positions in ratings() of the ratings of `item`, in input order.
  std::span<const std::size_t> item_ratings(std::size_t item) const;
  /// Positions in ratings() of the ratings by `user`, in input order.
  std::span<const std::size_t> user_ratings(std::size_t user) const;

 private:
  friend class DatasetBuilder;
  RatingDataset(std::vector<Rating> ratings, IdIndex users, IdIndex items, RatingScale scale);

  std::vector<Rating> ratings_;
  IdIndex users_;
  IdIndex items_;
  RatingScale scale_;
  std::vector<std::vector<std::size_t>> by_item_;
  std::vector<std::vector<std::size_t>> by_user_;
};

RatingDataset parse_ratings(std::istream& in, RatingFormat format, RatingScale scale = {});
RatingDataset load_ratings(const std::filesystem::path& path, RatingFormat format,
                           RatingScale scale = {});
/// Writes every rating (with timestamp) so that parse_ratings reproduces the dataset.
void write_ratings(std::ostream& out, const RatingDataset& dataset, RatingFormat format);

/// Keeps the ratings accepted by `keep`, reindexing users and items by first appearance.
template <typename Pred>
RatingDataset filter_ratings(const RatingDataset& dataset, Pred keep) {
  DatasetBuilder builder(dataset.scale());
  for (const Rating& r : dataset.ratings()) {
    if (keep(r)) {
      builder.add(dataset.users().label(r.user), dataset.items().label(r.item), r.value,
                  r.timestamp);
    }
  }
  return std::move(builder).build();
}

struct ItemSplit {
  RatingDataset train;
  RatingDataset heldout;             ///< all ratings of the held-out items
  std::vector<std::string> new_items;  ///< held-out item labels, in draw order
};

/// Holds out `heldout_count` items drawn uniformly at random from `seed`.
ItemSplit split_items(const RatingDataset& dataset, std::size_t heldout_count, std::uint64_t seed);

/// Candidate raters of a new item with their augmented vectors (1, P_v).
struct RaterPool {
  std::string item;
  std::vector<std::size_t> users;   ///< model user indices, ascending
  std::vector<std::string> labels;  ///< external user labels, aligned with `users`
  Eigen::MatrixXd vectors;          ///< (k+1) x |users|
  std::vector<double> variances;    ///< empty, or per-user noise variances aligned with `users`

  std::size_t size() const noexcept { return users.size(); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(vectors.rows()); }
  bool has_variances() const noexcept { return !variances.empty(); }
  /// Column position of each user; throws Error for users outside the pool.
  std::vector<std::size_t> positions(std::span<const std::size_t> subset) const;
};

enum class UnknownUserPolicy { skip, error };

/// Pool of the users who rated `item` in `dataset`, restricted to users known to `model`.
RaterPool rater_pool(const RatingDataset& dataset, const LatentModel& model, std::string_view item,
                     UnknownUserPolicy policy = UnknownUserPolicy::skip);

/// Builds a pool directly from model user indices.
RaterPool pool_from_users(const LatentModel& model, std::string item,
                          std::span<const std::size_t> users);

/// Attaches per-user variances (indexed by model user) to the pool. Throws
/// Error when a value is below `floor` or not positive.
void attach_variances(RaterPool& pool, std::span<const double> user_variances, double floor);

struct Reveal {
  std::vector<Rating> revealed;   ///< ratings by the subset, in subset order
  std::vector<Rating> remainder;  ///< ratings by the other pool users, in pool order
};

/// Partitions the pool item's ratings in `heldout` into the subset's and the rest.
/// `user` in the returned ratings is the model user index.
Reveal reveal(const RaterPool& pool, std::span<const std::size_t> subset,
              const RatingDataset& heldout);

/// The pool item's rating by every pool user, aligned with pool.users.
std::vector<Rating> pool_ratings(const RaterPool& pool, const RatingDataset& heldout);

}  // namespace coldstart
