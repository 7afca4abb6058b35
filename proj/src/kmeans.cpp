#include "pricewar/kmeans.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "pricewar/error.hpp"
#include "pricewar/rng.hpp"

namespace pricewar {
namespace {

double sq_dist(const FeatureMatrix& x, int r, const std::vector<double>& centroids, int c) {
    double s = 0.0;
    for (int d = 0; d < x.cols; ++d) {
        const double diff = x.at(r, d) - centroids[static_cast<std::size_t>(c) * x.cols + d];
        s += diff * diff;
    }
    return s;
}

void copy_row(const FeatureMatrix& x, int r, std::vector<double>& centroids, int c) {
    for (int d = 0; d < x.cols; ++d) centroids[static_cast<std::size_t>(c) * x.cols + d] = x.at(r, d);
}

}  // namespace

void standardize(FeatureMatrix& x) {
    if (x.rows == 0) return;
    for (int d = 0; d < x.cols; ++d) {
        double mean = 0.0;
        for (int r = 0; r < x.rows; ++r) mean += x.at(r, d);
        mean /= x.rows;
        double var = 0.0;
        for (int r = 0; r < x.rows; ++r) var += (x.at(r, d) - mean) * (x.at(r, d) - mean);
        const double sd = std::sqrt(var / x.rows);
        for (int r = 0; r < x.rows; ++r) x.at(r, d) = sd > 1e-12 ? (x.at(r, d) - mean) / sd : 0.0;
    }
}

namespace {

KMeansResult lloyd(const FeatureMatrix& x, int k, Rng& rng, int max_iterations) {
    std::vector<double> centroids(static_cast<std::size_t>(k) * x.cols);
    std::vector<double> nearest(static_cast<std::size_t>(x.rows), std::numeric_limits<double>::infinity());

    // k-means++ seeding.
    std::uniform_int_distribution<int> pick(0, x.rows - 1);
    copy_row(x, pick(rng), centroids, 0);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int r = 0; r < x.rows; ++r) {
            nearest[r] = std::min(nearest[r], sq_dist(x, r, centroids, c - 1));
            total += nearest[r];
        }
        int chosen = 0;
        if (total > 0.0) {
            double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            chosen = x.rows - 1;
            for (int r = 0; r < x.rows; ++r) {
                u -= nearest[r];
                if (u < 0.0) {
                    chosen = r;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        copy_row(x, chosen, centroids, c);
    }

    KMeansResult result;
    result.labels.assign(static_cast<std::size_t>(x.rows), -1);
    std::vector<int> sizes(static_cast<std::size_t>(k));
    for (int it = 0; it < max_iterations; ++it) {
        bool changed = false;
        for (int r = 0; r < x.rows; ++r) {
            int best = 0;
            double best_d = sq_dist(x, r, centroids, 0);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(x, r, centroids, c);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (result.labels[r] != best) {
                result.labels[r] = best;
                changed = true;
            }
        }
        result.iterations = it + 1;

        std::fill(centroids.begin(), centroids.end(), 0.0);
        std::fill(sizes.begin(), sizes.end(), 0);
        for (int r = 0; r < x.rows; ++r) {
            const int c = result.labels[r];
            ++sizes[c];
            for (int d = 0; d < x.cols; ++d) centroids[static_cast<std::size_t>(c) * x.cols + d] += x.at(r, d);
        }
        bool reseeded = false;
        for (int c = 0; c < k; ++c) {
            if (sizes[c] > 0) {
                for (int d = 0; d < x.cols; ++d) centroids[static_cast<std::size_t>(c) * x.cols + d] /= sizes[c];
            }
        }
        for (int c = 0; c < k; ++c) {
            if (sizes[c] > 0) continue;
            // Farthest point from its current centroid, taken from a cluster with >1 member.
            int far = -1;
            double far_d = -1.0;
            for (int r = 0; r < x.rows; ++r) {
                if (sizes[result.labels[r]] <= 1) continue;
                const double d = sq_dist(x, r, centroids, result.labels[r]);
                if (d > far_d) {
                    far_d = d;
                    far = r;
                }
            }
            if (far < 0) break;
            --sizes[result.labels[far]];
            result.labels[far] = c;
            sizes[c] = 1;
            copy_row(x, far, centroids, c);
            reseeded = true;
        }
        if (!changed && !reseeded) break;
    }

    result.centroids = centroids;
    for (int r = 0; r < x.rows; ++r) result.inertia += sq_dist(x, r, centroids, result.labels[r]);
    return result;
}

}  // namespace

KMeansResult kmeans_cluster(const FeatureMatrix& x, int k, std::uint64_t seed, int max_iterations, int restarts) {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (restarts < 1) throw ConfigError("restarts must be >= 1");
    if (x.rows < k)
        throw DataError("cannot form " + std::to_string(k) + " clusters from " + std::to_string(x.rows) + " users");
    if (x.data.size() != static_cast<std::size_t>(x.rows) * x.cols) throw DataError("feature matrix size mismatch");

    KMeansResult best;
    for (int r = 0; r < restarts; ++r) {
        Rng rng = make_stream(seed, {0x6b6d, static_cast<std::uint64_t>(r)});
        KMeansResult run = lloyd(x, k, rng, max_iterations);
        if (r == 0 || run.inertia < best.inertia) best = std::move(run);
    }
    return best;
}

}  // namespace pricewar
