#include "ptn/contrastive.hpp"

#include <cmath>

namespace ptn {
namespace {

Mat fuse_views(const ContrastiveBatch& batch) {
    if (batch.view_a.rows() != batch.view_b.rows() || batch.view_a.cols() != batch.view_b.cols())
        throw data_error("contrastive views must have matching shapes");
    if (batch.pairs() < 1) throw data_error("empty contrastive batch");
    Mat z(2 * batch.pairs(), batch.dim());
    z.topRows(batch.pairs()) = batch.view_a;
    z.bottomRows(batch.pairs()) = batch.view_b;
    return z;
}

struct CosineStats {
    Mat units;  // row-normalized features
    Vec norms;
    Mat sims;   // units * units'
};

CosineStats cosine_stats(const Mat& z) {
    CosineStats st;
    st.norms = z.rowwise().norm();
    for (int i = 0; i < z.rows(); ++i) {
        if (st.norms[i] <= 0.0)
            throw data_error("zero-norm row " + std::to_string(i) + ": cosine undefined");
    }
    st.units = st.norms.cwiseInverse().asDiagonal() * z;
    st.sims = st.units * st.units.transpose();
    return st;
}

// Anchor i's positive in the fused [view_a; view_b] layout.
int positive_of(int i, int n) { return i < n ? i + n : i - n; }

}  // namespace

double nt_xent_loss(const ContrastiveBatch& batch, double tau) {
    if (tau <= 0.0) throw config_error("tau must be positive");
    const int n = batch.pairs();
    const Mat z = fuse_views(batch);
    const CosineStats st = cosine_stats(z);
    const int m = 2 * n;
    double loss = 0.0;
    for (int i = 0; i < m; ++i) {
        double max_s = -2.0;
        for (int k = 0; k < m; ++k) {
            if (k != i) max_s = std::max(max_s, st.sims(i, k));
        }
        double denom = 0.0;
        for (int k = 0; k < m; ++k) {
            if (k != i) denom += std::exp((st.sims(i, k) - max_s) / tau);
        }
        loss += -(st.sims(i, positive_of(i, n)) - max_s) / tau + std::log(denom);
    }
    return loss / m;
}

double kl_regularizer(const ContrastiveBatch& batch) {
    const int n = batch.pairs();
    if (n < 1) throw data_error("empty contrastive batch");
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec a = batch.view_a.row(i).transpose();
        const Vec b = batch.view_b.row(i).transpose();
        const Vec pa = (a.array() - a.maxCoeff()).exp();
        const Vec pb = (b.array() - b.maxCoeff()).exp();
        const Vec p = pa / pa.sum();
        const Vec q = pb / pb.sum();
        total += (p.array() * (p.array().log() - q.array().log())).sum();
    }
    return total / n;
}

LossGrad ut_loss_and_grad(const ContrastiveBatch& batch, double tau, double lambda) {
    if (tau <= 0.0) throw config_error("tau must be positive");
    const int n = batch.pairs();
    const int d = batch.dim();
    const Mat z = fuse_views(batch);
    const CosineStats st = cosine_stats(z);
    const int m = 2 * n;

    // coef(i, j) = dL/ds_ij contributed by anchor i.
    Mat coef = Mat::Zero(m, m);
    double loss = 0.0;
    for (int i = 0; i < m; ++i) {
        double max_s = -2.0;
        for (int k = 0; k < m; ++k) {
            if (k != i) max_s = std::max(max_s, st.sims(i, k));
        }
        double denom = 0.0;
        for (int k = 0; k < m; ++k) {
            if (k != i) denom += std::exp((st.sims(i, k) - max_s) / tau);
        }
        const int pos = positive_of(i, n);
        loss += -(st.sims(i, pos) - max_s) / tau + std::log(denom);
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            const double soft = std::exp((st.sims(i, j) - max_s) / tau) / denom;
            coef(i, j) = (soft - (j == pos ? 1.0 : 0.0)) / (tau * m);
        }
    }
    loss /= m;

    Mat grad = Mat::Zero(m, d);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            const double c = coef(i, j) + coef(j, i);
            if (c == 0.0) continue;
            // d cos(z_i, z_j) / d z_i = (u_j - s_ij u_i) / |z_i|
            grad.row(i) += c / st.norms[i] *
                           (st.units.row(j) - st.sims(i, j) * st.units.row(i));
        }
    }

    LossGrad out;
    out.grad_a = grad.topRows(n);
    out.grad_b = grad.bottomRows(n);

    if (lambda != 0.0) {
        const double kl = kl_regularizer(batch);
        loss += lambda * kl;
        for (int i = 0; i < n; ++i) {
            const Vec a = batch.view_a.row(i).transpose();
            const Vec b = batch.view_b.row(i).transpose();
            const Vec pa = (a.array() - a.maxCoeff()).exp();
            const Vec pb = (b.array() - b.maxCoeff()).exp();
            const Vec p = pa / pa.sum();
            const Vec q = pb / pb.sum();
            const Vec diff = a - b;
            const double mean_diff = p.dot(diff);
            out.grad_a.row(i) +=
                (lambda / n) * (p.array() * (diff.array() - mean_diff)).matrix().transpose();
            out.grad_b.row(i) += (lambda / n) * (q - p).transpose();
        }
    }
    out.loss = loss;
    return out;
}

}  // namespace ptn
