#pragma once

#include <cstdint>
#include <vector>

namespace pricewar {

/// Row-major feature matrix: rows are users, columns are features.
struct FeatureMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

/// Rescales every column to zero mean and unit variance. Constant columns
/// become all zeros.
void standardize(FeatureMatrix& features);

struct KMeansResult {
    std::vector<int> labels;
    std::vector<double> centroids;  // k x cols, row-major
    double inertia = 0.0;
    int iterations = 0;
};

/// Lloyd iterations from k-means++ seeding, restarted `restarts` times; the
/// lowest-inertia run wins. Empty clusters are re-seeded at the point farthest
/// from its centroid. Throws DataError if rows < k.
KMeansResult kmeans_cluster(const FeatureMatrix& features, int k, std::uint64_t seed,
                            int max_iterations = 100, int restarts = 10);

}  // namespace pricewar
