#pragma once

#include "ptn/core.hpp"
#include "ptn/io.hpp"

namespace ptn {

struct LossGrad {
    double loss = 0.0;
    Mat grad_a;  // d loss / d view_a
    Mat grad_b;  // d loss / d view_b
};

/// NT-Xent over the fused 2n-point batch: each point anchors once, the
/// denominator runs over the other 2n-1 points, cosine similarities at
/// temperature tau, mean reduction.
double nt_xent_loss(const ContrastiveBatch& batch, double tau);

/// Mean KL(softmax(a_i) || softmax(b_i)) over the paired rows.
double kl_regularizer(const ContrastiveBatch& batch);

/// Transfer loss nt_xent + lambda * kl with its analytic feature gradient.
LossGrad ut_loss_and_grad(const ContrastiveBatch& batch, double tau, double lambda);

}  // namespace ptn
