#include "ptn/calibration.hpp"

namespace ptn {

Vec cross_class_bias(const EpisodeData& e) {
    const int pool = e.query_offset();
    if (pool < 1) throw data_error("cross-class bias needs a nonempty support pool");
    if (e.queries < 1) throw data_error("cross-class bias needs at least one query");
    Vec pool_mean = Vec::Zero(e.dim());
    for (int i = 0; i < pool; ++i) pool_mean += e.points[i].vector;
    pool_mean /= pool;
    Vec query_mean = Vec::Zero(e.dim());
    for (int i = pool; i < e.size(); ++i) query_mean += e.points[i].vector;
    query_mean /= e.queries;
    return pool_mean - query_mean;
}

EpisodeData calibrate_queries(const EpisodeData& e, const Vec& delta) {
    if (delta.size() != e.dim()) throw data_error("bias dimension mismatch");
    EpisodeData out = e;
    for (int i = e.query_offset(); i < e.size(); ++i) out.points[i].vector += delta;
    return out;
}

}  // namespace ptn
