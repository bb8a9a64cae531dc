#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace linearrag {

/// Binary (presence-only) sparse matrix in compressed-row form. Column indices
/// are strictly increasing within each row, so the row-major walk of
/// (row, col) pairs is the sorted, deduplicated coordinate list.
class SparseBinaryMatrix {
 public:
  using Index = std::uint32_t;
  using Entry = std::pair<Index, Index>;

  SparseBinaryMatrix() = default;
  SparseBinaryMatrix(std::size_t rows, std::size_t cols);

  /// Sorts and deduplicates; throws Error(consistency) on out-of-range entries.
  static SparseBinaryMatrix from_entries(std::size_t rows, std::size_t cols,
                                         std::vector<Entry> entries);

  /// Adopts CSR arrays after validating them (prefix sums, ordering, range).
  static SparseBinaryMatrix from_csr(std::size_t rows, std::size_t cols,
                                     std::vector<std::size_t> row_offsets,
                                     std::vector<Index> col_indices);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return indices_.size(); }

  std::span<const Index> row(std::size_t r) const noexcept {
    return {indices_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  std::span<const std::size_t> row_offsets() const noexcept { return offsets_; }
  std::span<const Index> col_indices() const noexcept { return indices_; }

  bool contains(std::size_t r, std::size_t c) const noexcept;
  /// Position of (r, c) in col_indices(), or nnz() when absent.
  std::size_t find(std::size_t r, std::size_t c) const noexcept;

  std::vector<Entry> entries() const;
  std::vector<std::uint32_t> column_counts() const;

  /// Appends a block of rows (each sorted, unique) and widens to `new_cols`.
  void append_rows(std::span<const std::vector<Index>> new_rows, std::size_t new_cols);

  /// Throws Error(consistency) if any structural invariant is violated.
  void validate() const;

  friend bool operator==(const SparseBinaryMatrix&, const SparseBinaryMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Index> indices_;
};

}  // namespace linearrag
