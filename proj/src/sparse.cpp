#include "linearrag/sparse.hpp"

#include <algorithm>
#include <string>

#include "linearrag/error.hpp"

namespace linearrag {

SparseBinaryMatrix::SparseBinaryMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

SparseBinaryMatrix SparseBinaryMatrix::from_entries(std::size_t rows, std::size_t cols,
                                                    std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  SparseBinaryMatrix m(rows, cols);
  m.indices_.reserve(entries.size());
  for (const auto& [r, c] : entries) {
    if (r >= rows || c >= cols)
      throw Error(ErrorCode::consistency, "entry (" + std::to_string(r) + ", " +
                                              std::to_string(c) + ") out of range");
    ++m.offsets_[r + 1];
    m.indices_.push_back(c);
  }
  for (std::size_t r = 0; r < rows; ++r) m.offsets_[r + 1] += m.offsets_[r];
  return m;
}

SparseBinaryMatrix SparseBinaryMatrix::from_csr(std::size_t rows, std::size_t cols,
                                                std::vector<std::size_t> row_offsets,
                                                std::vector<Index> col_indices) {
  SparseBinaryMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.offsets_ = std::move(row_offsets);
  m.indices_ = std::move(col_indices);
  m.validate();
  return m;
}

bool SparseBinaryMatrix::contains(std::size_t r, std::size_t c) const noexcept {
  return find(r, c) != nnz();
}

std::size_t SparseBinaryMatrix::find(std::size_t r, std::size_t c) const noexcept {
  if (r >= rows_) return nnz();
  const auto begin = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[r]);
  const auto end = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[r + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<Index>(c));
  if (it == end || *it != c) return nnz();
  return static_cast<std::size_t>(it - indices_.begin());
}

std::vector<SparseBinaryMatrix::Entry> SparseBinaryMatrix::entries() const {
  std::vector<Entry> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r)
    for (Index c : row(r)) out.emplace_back(static_cast<Index>(r), c);
  return out;
}

std::vector<std::uint32_t> SparseBinaryMatrix::column_counts() const {
  std::vector<std::uint32_t> counts(cols_, 0);
  for (Index c : indices_) ++counts[c];
  return counts;
}

void SparseBinaryMatrix::append_rows(std::span<const std::vector<Index>> new_rows,
                                     std::size_t new_cols) {
  if (new_cols < cols_) throw Error(ErrorCode::consistency, "matrix cannot shrink columns");
  for (const auto& cols : new_rows) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] >= new_cols || (k > 0 && cols[k] <= cols[k - 1]))
        throw Error(ErrorCode::consistency, "appended row is unsorted or out of range");
    }
    indices_.insert(indices_.end(), cols.begin(), cols.end());
    offsets_.push_back(indices_.size());
  }
  rows_ += new_rows.size();
  cols_ = new_cols;
}

void SparseBinaryMatrix::validate() const {
  if (offsets_.size() != rows_ + 1 || offsets_.front() != 0)
    throw Error(ErrorCode::consistency, "row offset array has wrong length");
  if (offsets_.back() != indices_.size())
    throw Error(ErrorCode::consistency,
                "csr prefix mismatch: offsets end at " + std::to_string(offsets_.back()) +
                    " but " + std::to_string(indices_.size()) + " entries present");
  for (std::size_t r = 0; r < rows_; ++r) {
    if (offsets_[r + 1] < offsets_[r])
      throw Error(ErrorCode::consistency, "row offsets decrease at row " + std::to_string(r));
    for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      if (indices_[k] >= cols_)
        throw Error(ErrorCode::consistency, "column out of range in row " + std::to_string(r));
      if (k > offsets_[r] && indices_[k] <= indices_[k - 1])
        throw Error(ErrorCode::consistency, "row " + std::to_string(r) + " is unsorted or duplicated");
    }
  }
}

}  // namespace linearrag
