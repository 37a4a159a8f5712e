#include "coldstart/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "coldstart/lfm.hpp"

namespace coldstart {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + sep.size();
  }
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return value;
}

std::uint64_t pair_key(std::size_t user, std::size_t item) {
  return (static_cast<std::uint64_t>(user) << 32) ^ static_cast<std::uint64_t>(item);
}

}  // namespace

std::size_t IdIndex::intern(std::string_view label) {
  std::string key(label);
  auto it = lookup_.find(key);
  if (it != lookup_.end()) return it->second;
  const std::size_t index = labels_.size();
  labels_.push_back(key);
  lookup_.emplace(std::move(key), index);
  return index;
}

std::optional<std::size_t> IdIndex::find(std::string_view label) const {
  auto it = lookup_.find(std::string(label));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t IdIndex::at(std::string_view label) const {
  auto found = find(label);
  if (!found) throw Error("unknown identifier '" + std::string(label) + "'");
  return *found;
}

RatingScale parse_scale(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error("scale must look like MIN:MAX");
  auto lo = parse_number<double>(trim(text.substr(0, colon)));
  auto hi = parse_number<double>(trim(text.substr(colon + 1)));
  if (!lo || !hi || !(*lo < *hi)) throw Error("invalid scale '" + std::string(text) + "'");
  return {*lo, *hi};
}

RatingFormat parse_format(std::string_view text) {
  if (text == "csv") return RatingFormat::csv;
  if (text == "movielens") return RatingFormat::movielens;
  throw Error("unknown rating format '" + std::string(text) + "'");
}

DatasetBuilder::DatasetBuilder(RatingScale scale) : scale_(scale) {}

void DatasetBuilder::add(std::string_view user, std::string_view item, double value,
                         std::int64_t timestamp) {
  if (user.empty() || item.empty()) throw Error("empty user or item identifier");
  if (!std::isfinite(value) || !scale_.contains(value)) {
    std::ostringstream msg;
    msg << "rating " << value << " outside scale [" << scale_.min << ", " << scale_.max << "]";
    throw Error(msg.str());
  }
  const std::size_t u = users_.intern(user);
  const std::size_t i = items_.intern(item);
  if (!seen_.emplace(pair_key(u, i), ratings_.size()).second) {
    throw Error("duplicate rating for (user '" + std::string(user) + "', item '" +
                std::string(item) + "')");
  }
  ratings_.push_back({u, i, value, timestamp});
}

RatingDataset DatasetBuilder::build() && {
  return RatingDataset(std::move(ratings_), std::move(users_), std::move(items_), scale_);
}

RatingDataset::RatingDataset(std::vector<Rating> ratings, IdIndex users, IdIndex items,
                             RatingScale scale)
    : ratings_(std::move(ratings)),
      users_(std::move(users)),
      items_(std::move(items)),
      scale_(scale),
      by_item_(items_.size()),
      by_user_(users_.size()) {
  for (std::size_t n = 0; n < ratings_.size(); ++n) {
    by_item_[ratings_[n].item].push_back(n);
    by_user_[ratings_[n].user].push_back(n);
  }
}

std::span<const std::size_t> RatingDataset::item_ratings(std::size_t item) const {
  return by_item_.at(item);
}

std::span<const std::size_t> RatingDataset::user_ratings(std::size_t user) const {
  return by_user_.at(user);
}

RatingDataset parse_ratings(std::istream& in, RatingFormat format, RatingScale scale) {
  DatasetBuilder builder(scale);
  const std::string_view sep = format == RatingFormat::csv ? "," : "::";
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text, sep);
    const bool was_first = std::exchange(first_content, false);
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError(line_no, "expected 3 or 4 fields, got " + std::to_string(fields.size()));
    }
    const auto value = parse_number<double>(fields[2]);
    if (!value) {
      if (format == RatingFormat::csv && was_first) continue;  // header row
      throw ParseError(line_no, "non-numeric rating '" + std::string(fields[2]) + "'");
    }
    std::int64_t timestamp = 0;
    if (fields.size() == 4) {
      const auto ts = parse_number<std::int64_t>(fields[3]);
      if (!ts) throw ParseError(line_no, "non-integer timestamp '" + std::string(fields[3]) + "'");
      timestamp = *ts;
    }
    try {
      builder.add(fields[0], fields[1], *value, timestamp);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return std::move(builder).build();
}

RatingDataset load_ratings(const std::filesystem::path& path, RatingFormat format,
                           RatingScale scale) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ratings file '" + path.string() + "'");
  return parse_ratings(in, format, scale);
}

void write_ratings(std::ostream& out, const RatingDataset& dataset, RatingFormat format) {
  const char* sep = format == RatingFormat::csv ? "," : "::";
  const auto old_precision = out.precision(17);
  for (const Rating& r : dataset.ratings()) {
    out << dataset.users().label(r.user) << sep << dataset.items().label(r.item) << sep << r.value
        << sep << r.timestamp << '\n';
  }
  out.precision(old_precision);
}

ItemSplit split_items(const RatingDataset& dataset, std::size_t heldout_count,
                      std::uint64_t seed) {
  const std::size_t item_count = dataset.items().size();
  if (heldout_count >= item_count) {
    throw Error("cannot hold out " + std::to_string(heldout_count) + " of " +
                std::to_string(item_count) + " items");
  }
  std::vector<std::size_t> order(item_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<char> held(item_count, 0);
  ItemSplit split;
  for (std::size_t n = 0; n < heldout_count; ++n) {
    held[order[n]] = 1;
    split.new_items.push_back(dataset.items().label(order[n]));
  }
  split.train = filter_ratings(dataset, [&](const Rating& r) { return held[r.item] == 0; });
  split.heldout = filter_ratings(dataset, [&](const Rating& r) { return held[r.item] != 0; });
  return split;
}

std::vector<std::size_t> RaterPool::positions(std::span<const std::size_t> subset) const {
  std::unordered_map<std::size_t, std::size_t> where;
  where.reserve(users.size());
  for (std::size_t p = 0; p < users.size(); ++p) where.emplace(users[p], p);
  std::vector<std::size_t> out;
  out.reserve(subset.size());
  std::vector<char> taken(users.size(), 0);
  for (std::size_t u : subset) {
    auto it = where.find(u);
    if (it == where.end()) throw Error("user " + std::to_string(u) + " is not in the pool");
    if (taken[it->second]) throw Error("user " + std::to_string(u) + " repeated in subset");
    taken[it->second] = 1;
    out.push_back(it->second);
  }
  return out;
}

RaterPool pool_from_users(const LatentModel& model, std::string item,
                          std::span<const std::size_t> users) {
  RaterPool pool;
  pool.item = std::move(item);
  pool.users.assign(users.begin(), users.end());
  pool.vectors.resize(static_cast<Eigen::Index>(model.k() + 1),
                      static_cast<Eigen::Index>(users.size()));
  for (std::size_t p = 0; p < users.size(); ++p) {
    pool.labels.push_back(model.users().label(users[p]));
    pool.vectors.col(static_cast<Eigen::Index>(p)) = augment(model, users[p]);
  }
  return pool;
}

RaterPool rater_pool(const RatingDataset& dataset, const LatentModel& model, std::string_view item,
                     UnknownUserPolicy policy) {
  const auto item_index = dataset.items().find(item);
  if (!item_index) throw Error("unknown item '" + std::string(item) + "'");
  std::vector<std::size_t> users;
  for (std::size_t n : dataset.item_ratings(*item_index)) {
    const std::string& label = dataset.users().label(dataset.ratings()[n].user);
    const auto model_user = model.users().find(label);
    if (!model_user) {
      if (policy == UnknownUserPolicy::error) {
        throw Error("pool user '" + label + "' is missing from the model");
      }
      continue;
    }
    users.push_back(*model_user);
  }
  if (users.empty()) throw Error("item '" + std::string(item) + "' has an empty rater pool");
  std::sort(users.begin(), users.end());
  return pool_from_users(model, std::string(item), users);
}

void attach_variances(RaterPool& pool, std::span<const double> user_variances, double floor) {
  pool.variances.clear();
  pool.variances.reserve(pool.users.size());
  for (std::size_t u : pool.users) {
    if (u >= user_variances.size()) throw Error("no variance for user " + std::to_string(u));
    const double v = user_variances[u];
    if (!(v >= floor) || !(v > 0.0)) {
      throw Error("variance of user " + std::to_string(u) + " is below the floor or not positive");
    }
    pool.variances.push_back(v);
  }
}

std::vector<Rating> pool_ratings(const RaterPool& pool, const RatingDataset& heldout) {
  const auto item_index = heldout.items().find(pool.item);
  if (!item_index) throw Error("item '" + pool.item + "' is not in the held-out ratings");
  std::unordered_map<std::string_view, std::size_t> by_label;
  by_label.reserve(pool.labels.size());
  for (std::size_t p = 0; p < pool.labels.size(); ++p) by_label.emplace(pool.labels[p], p);

  std::vector<std::optional<Rating>> aligned(pool.size());
  for (std::size_t n : heldout.item_ratings(*item_index)) {
    const Rating& r = heldout.ratings()[n];
    auto it = by_label.find(heldout.users().label(r.user));
    if (it == by_label.end()) continue;
    aligned[it->second] = Rating{pool.users[it->second], r.item, r.value, r.timestamp};
  }
  std::vector<Rating> out;
  out.reserve(pool.size());
  for (std::size_t p = 0; p < aligned.size(); ++p) {
    if (!aligned[p]) throw Error("pool user '" + pool.labels[p] + "' has no rating of the item");
    out.push_back(*aligned[p]);
  }
  return out;
}

Reveal reveal(const RaterPool& pool, std::span<const std::size_t> subset,
              const RatingDataset& heldout) {
  const std::vector<std::size_t> chosen = pool.positions(subset);
  const std::vector<Rating> all = pool_ratings(pool, heldout);
  std::vector<char> in_subset(pool.size(), 0);
  Reveal out;
  out.revealed.reserve(chosen.size());
  for (std::size_t p : chosen) {
    in_subset[p] = 1;
    out.revealed.push_back(all[p]);
  }
  for (std::size_t p = 0; p < all.size(); ++p) {
    if (!in_subset[p]) out.remainder.push_back(all[p]);
  }
  return out;
}

}  // namespace coldstart
