#pragma once

#include "erimap/bn/network.hpp"

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

namespace erimap::bn {

/// Non-negative table over a sorted set of network variables.
/// Values are stored row-major with the last variable varying fastest.
class Factor {
 public:
  Factor() : values_{1.0} {}

  Factor(std::vector<NodeIndex> vars, std::vector<std::size_t> cards, std::vector<double> values)
      : vars_(std::move(vars)), cards_(std::move(cards)), values_(std::move(values)) {}

  /// CPT of `n` as a factor over {n} ∪ parents(n).
  static Factor from_cpt(const Network& net, NodeIndex n) {
    const auto& node = net.node(n);
    std::vector<NodeIndex> scope = node.parents;
    scope.push_back(n);
    std::vector<NodeIndex> sorted = scope;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> cards;
    for (NodeIndex v : sorted) cards.push_back(net.node(v).num_states());

    Factor f(sorted, cards, std::vector<double>(node.cpt.size()));
    // Walk the CPT in its native order (parents in table order, then own
    // state) and scatter into the sorted layout.
    std::vector<std::size_t> assign(scope.size(), 0);
    std::vector<std::size_t> pos(scope.size());
    for (std::size_t k = 0; k < scope.size(); ++k) {
      pos[k] = static_cast<std::size_t>(std::find(sorted.begin(), sorted.end(), scope[k]) - sorted.begin());
    }
    std::vector<std::size_t> scope_cards;
    for (NodeIndex v : scope) scope_cards.push_back(net.node(v).num_states());
    std::vector<std::size_t> sorted_assign(sorted.size());
    for (std::size_t flat = 0; flat < node.cpt.size(); ++flat) {
      for (std::size_t k = 0; k < scope.size(); ++k) sorted_assign[pos[k]] = assign[k];
      f.values_[f.offset(sorted_assign)] = node.cpt[flat];
      advance(assign, scope_cards);
    }
    return f;
  }

  static Factor unary(NodeIndex v, std::vector<double> values) {
    std::size_t card = values.size();
    return Factor({v}, {card}, std::move(values));
  }

  [[nodiscard]] const std::vector<NodeIndex>& vars() const noexcept { return vars_; }
  [[nodiscard]] const std::vector<std::size_t>& cards() const noexcept { return cards_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] bool contains(NodeIndex v) const { return std::binary_search(vars_.begin(), vars_.end(), v); }

  friend Factor operator*(const Factor& a, const Factor& b) {
    std::vector<NodeIndex> vars;
    std::set_union(a.vars_.begin(), a.vars_.end(), b.vars_.begin(), b.vars_.end(), std::back_inserter(vars));
    std::vector<std::size_t> cards(vars.size());
    for (std::size_t k = 0; k < vars.size(); ++k) cards[k] = a.card_of(vars[k]) ? a.card_of(vars[k]) : b.card_of(vars[k]);

    const auto stride_a = a.strides_in(vars);
    const auto stride_b = b.strides_in(vars);
    std::size_t total = 1;
    for (auto c : cards) total *= c;

    std::vector<double> out(total);
    std::vector<std::size_t> assign(vars.size(), 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < total; ++i) {
      out[i] = a.values_[ia] * b.values_[ib];
      // odometer increment, keeping both source offsets in step
      for (std::size_t k = vars.size(); k-- > 0;) {
        if (++assign[k] < cards[k]) {
          ia += stride_a[k];
          ib += stride_b[k];
          break;
        }
        ia -= stride_a[k] * (cards[k] - 1);
        ib -= stride_b[k] * (cards[k] - 1);
        assign[k] = 0;
      }
    }
    return Factor(std::move(vars), std::move(cards), std::move(out));
  }

  /// Marginalizes `v` out of the factor.
  [[nodiscard]] Factor sum_out(NodeIndex v) const {
    auto it = std::lower_bound(vars_.begin(), vars_.end(), v);
    if (it == vars_.end() || *it != v) return *this;
    const std::size_t k = static_cast<std::size_t>(it - vars_.begin());

    std::size_t inner = 1;
    for (std::size_t j = k + 1; j < cards_.size(); ++j) inner *= cards_[j];
    const std::size_t card = cards_[k];
    const std::size_t outer = values_.size() / (inner * card);

    std::vector<double> out(outer * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t s = 0; s < card; ++s) {
        const double* src = &values_[(o * card + s) * inner];
        double* dst = &out[o * inner];
        for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
      }
    }
    std::vector<NodeIndex> vars = vars_;
    std::vector<std::size_t> cards = cards_;
    vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(k));
    cards.erase(cards.begin() + static_cast<std::ptrdiff_t>(k));
    return Factor(std::move(vars), std::move(cards), std::move(out));
  }

 private:
  static void advance(std::vector<std::size_t>& assign, const std::vector<std::size_t>& cards) {
    for (std::size_t k = assign.size(); k-- > 0;) {
      if (++assign[k] < cards[k]) return;
      assign[k] = 0;
    }
  }

  [[nodiscard]] std::size_t offset(const std::vector<std::size_t>& assign) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < vars_.size(); ++k) off = off * cards_[k] + assign[k];
    return off;
  }

  [[nodiscard]] std::size_t card_of(NodeIndex v) const {
    auto it = std::lower_bound(vars_.begin(), vars_.end(), v);
    return (it != vars_.end() && *it == v) ? cards_[static_cast<std::size_t>(it - vars_.begin())] : 0;
  }

  // Stride of each variable of `scope` inside this factor (0 if absent).
  [[nodiscard]] std::vector<std::size_t> strides_in(const std::vector<NodeIndex>& scope) const {
    std::vector<std::size_t> own(vars_.size());
    std::size_t s = 1;
    for (std::size_t k = vars_.size(); k-- > 0;) {
      own[k] = s;
      s *= cards_[k];
    }
    std::vector<std::size_t> out(scope.size(), 0);
    for (std::size_t k = 0; k < scope.size(); ++k) {
      auto it = std::lower_bound(vars_.begin(), vars_.end(), scope[k]);
      if (it != vars_.end() && *it == scope[k]) out[k] = own[static_cast<std::size_t>(it - vars_.begin())];
    }
    return out;
  }

  std::vector<NodeIndex> vars_;
  std::vector<std::size_t> cards_;
  std::vector<double> values_;
};

}  // namespace erimap::bn
