#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gnids/tape.hpp"

namespace gnids {

enum class Activation { None, ReLU, Softmax };

// Elementwise and structural ops. All inputs must live on the same tape.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var one_minus(Var a);
/// x[m x n] + b[n] broadcast over rows.
Var add_bias(Var x, Var b);
Var relu(Var x);  ///< subgradient 0 at 0
Var sigmoid(Var x);
Var tanh_act(Var x);
Var sum(Var x);     ///< scalar [1]
Var dot(Var a, Var b);  ///< scalar [1], same shapes

/// act(input[batch x in] * weights[in x out] + bias[out]). Throws ShapeError
/// naming both shapes on mismatch.
Var dense(Var input, Var weights, Var bias, Activation activation);

Var gather_rows(Var x, std::vector<std::uint32_t> rows);
Var slice_rows(Var x, std::size_t begin, std::size_t end);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(Var a, Var b);

/// Row i = mean of rows of `messages` whose segment id is i; empty segments
/// produce a zero row. Rows are summed in input order.
Var segment_mean(Var messages, std::vector<std::uint32_t> segment_ids, std::size_t segment_count);

/// Mean over the batch of -log softmax(logits)[label], max-subtracted.
Var softmax_cross_entropy(Var logits, std::span<const int> labels);

struct GruWeights {
  Var w_z, u_z, b_z;  ///< update gate
  Var w_r, u_r, b_r;  ///< reset gate
  Var w_c, u_c, b_c;  ///< candidate
};

/// z = sigmoid(x W_z + h U_z + b_z), r = sigmoid(x W_r + h U_r + b_r),
/// c = tanh(x W_c + (r * h) U_c + b_c), h' = (1 - z) * h + z * c.
/// state: [batch x n], input: [batch x m], W_*: [m x n], U_*: [n x n].
Var gru_cell(Var state, Var input, const GruWeights& w);

/// Row-wise softmax of a plain tensor (no tape).
Tensor softmax_rows(const Tensor& logits);

}  // namespace gnids
