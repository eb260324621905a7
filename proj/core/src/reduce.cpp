#include "loghint/reduce.hpp"

#include <cmath>
#include <stdexcept>

#ifdef LOGHINT_HAVE_EIGEN
#include <Eigen/Dense>
#endif

namespace loghint {

#ifdef LOGHINT_HAVE_EIGEN

std::vector<std::vector<double>> PcaReducer::reduce(
    const std::vector<std::vector<double>>& vectors, int target_dim) {
    const std::size_t n = vectors.size();
    if (n == 0) return {};
    const std::size_t d = vectors[0].size();

    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i][j];
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    // Work in the smaller space: Gram trick when n < d.
    Eigen::MatrixXd components;  // d x target
    Eigen::VectorXd eigenvalues;
    if (n < d) {
        Eigen::MatrixXd gram = x * x.transpose();  // n x n
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        eigenvalues = es.eigenvalues().reverse();
        Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();  // n x n, desc order
        components.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(target_dim));
        components.setZero();
        for (int k = 0; k < target_dim && k < static_cast<int>(n); ++k) {
            double ev = eigenvalues(k);
            if (ev <= 1e-12) break;
            components.col(k) = x.transpose() * u.col(k) / std::sqrt(ev);
        }
    } else {
        Eigen::MatrixXd cov = x.transpose() * x;  // d x d (unnormalized; order only)
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        eigenvalues = es.eigenvalues().reverse();
        Eigen::MatrixXd v = es.eigenvectors().rowwise().reverse();
        components.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(target_dim));
        components.setZero();
        for (int k = 0; k < target_dim && k < static_cast<int>(d); ++k) {
            if (eigenvalues(k) <= 1e-12) break;
            components.col(k) = v.col(k);
        }
    }

    // Deterministic sign: largest-|entry| component positive.
    int rank = 0;
    for (int k = 0; k < target_dim; ++k) {
        double norm = components.col(k).norm();
        if (norm <= 1e-12) break;
        ++rank;
        Eigen::Index arg = 0;
        components.col(k).cwiseAbs().maxCoeff(&arg);
        if (components(arg, k) < 0) components.col(k) = -components.col(k);
    }
    last_effective_rank = rank;

    Eigen::MatrixXd projected = x * components;  // n x target
    std::vector<std::vector<double>> out(n, std::vector<double>(static_cast<std::size_t>(target_dim), 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < target_dim; ++j)
            out[i][static_cast<std::size_t>(j)] = projected(static_cast<Eigen::Index>(i), j);
    return out;
}

#else

std::vector<std::vector<double>> PcaReducer::reduce(const std::vector<std::vector<double>>&, int) {
    throw std::runtime_error("PCA reducer requires Eigen; rebuild with libeigen3-dev installed");
}

#endif

ReduceInfo reduce_embeddings(EmbeddingSet& set, int target_dim, Reducer* reducer) {
    if (target_dim >= set.dim)
        throw std::invalid_argument("reduce: target_dim must be below the embedding dimension");
    if (static_cast<int>(set.vectors.size()) < target_dim + 1)
        throw std::invalid_argument("reduce: need at least target_dim + 1 files");

    PcaReducer fallback;
    Reducer* r = reducer ? reducer : &fallback;
    set.reduced = r->reduce(set.vectors, target_dim);
    set.reduced_dim = target_dim;

    ReduceInfo info;
    info.reducer_id = r->id();
    if (auto* pca = dynamic_cast<PcaReducer*>(r)) {
        info.effective_rank = pca->last_effective_rank;
        info.padded = pca->last_effective_rank < target_dim;
    } else {
        info.effective_rank = target_dim;
    }
    return info;
}

}  // namespace loghint
