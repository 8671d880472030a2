#include "augbench/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "augbench/common.hpp"

namespace augbench {

void TsneConfig::validate(std::size_t n) const {
    if (perplexity <= 0.0 || learning_rate <= 0.0 || iterations <= 0 || init_stddev <= 0.0 ||
        early_exaggeration <= 0.0) {
        throw UsageError("t-SNE config values must be positive");
    }
    if (!(1.0 < 3.0 * perplexity && 3.0 * perplexity < static_cast<double>(n))) {
        throw UsageError("t-SNE needs 1 < 3*perplexity < n (perplexity " +
                         std::to_string(perplexity) + ", n " + std::to_string(n) + ")");
    }
}

namespace {

DenseMatrix squared_distances(const DenseMatrix& points) {
    DenseMatrix dist(points.n, points.n);
    for (std::size_t i = 0; i < points.n; ++i) {
        for (std::size_t j = i + 1; j < points.n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < points.d; ++c) {
                double diff = points.at(i, c) - points.at(j, c);
                s += diff * diff;
            }
            dist.at(i, j) = s;
            dist.at(j, i) = s;
        }
    }
    return dist;
}

// Conditional row p_j|i for one bandwidth; returns the entropy in bits.
double conditional_row(const DenseMatrix& dist, std::size_t i, double beta,
                       std::vector<double>& row) {
    std::size_t n = dist.n;
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            row[j] = 0.0;
            continue;
        }
        double p = std::exp(-beta * dist.at(i, j));
        row[j] = p;
        sum += p;
        weighted += p * dist.at(i, j);
    }
    if (sum <= 0.0 || !std::isfinite(sum)) {
        std::fill(row.begin(), row.end(), 0.0);
        return 0.0;
    }
    double entropy_nats = std::log(sum) + beta * weighted / sum;
    for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
    return entropy_nats / std::log(2.0);
}

}  // namespace

DenseMatrix pairwise_affinities(const DenseMatrix& points, double perplexity) {
    std::size_t n = points.n;
    if (!(1.0 < 3.0 * perplexity && 3.0 * perplexity < static_cast<double>(n))) {
        throw UsageError("pairwise affinities need 1 < 3*perplexity < n");
    }
    DenseMatrix dist = squared_distances(points);
    bool any_positive = std::any_of(dist.data.begin(), dist.data.end(),
                                    [](double v) { return v > 0.0; });
    if (!any_positive) throw DataError("t-SNE input is degenerate: all points identical");

    const double target_bits = std::log2(perplexity);
    DenseMatrix conditional(n, n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        double beta = 1.0;
        double beta_min = -std::numeric_limits<double>::infinity();
        double beta_max = std::numeric_limits<double>::infinity();
        double entropy = conditional_row(dist, i, beta, row);
        for (int step = 0; step < 64 && std::abs(entropy - target_bits) > 1e-5; ++step) {
            if (entropy > target_bits) {
                beta_min = beta;
                beta = std::isinf(beta_max) ? beta * 2.0 : (beta + beta_max) / 2.0;
            } else {
                beta_max = beta;
                beta = std::isinf(beta_min) ? beta / 2.0 : (beta + beta_min) / 2.0;
            }
            entropy = conditional_row(dist, i, beta, row);
        }
        for (std::size_t j = 0; j < n; ++j) conditional.at(i, j) = row[j];
    }

    DenseMatrix P(n, n);
    double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            P.at(i, j) = (conditional.at(i, j) + conditional.at(j, i)) * scale;
        }
    }
    return P;
}

double kl_divergence(const DenseMatrix& P, const DenseMatrix& Q) {
    if (P.n != Q.n || P.d != Q.d) throw UsageError("KL divergence: shape mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < P.data.size(); ++i) {
        double p = P.data[i];
        if (p <= 0.0) continue;
        double q = std::max(Q.data[i], 1e-12);
        kl += p * std::log(p / q);
    }
    return kl;
}

Projection2D tsne(const DenseMatrix& points, const TsneConfig& config, std::uint64_t seed) {
    std::size_t n = points.n;
    config.validate(n);

    DenseMatrix P = pairwise_affinities(points, config.perplexity);
    for (double& p : P.data) p *= config.early_exaggeration;
    bool exaggerated = true;

    Rng rng = Rng(seed).derive("tsne.init");
    std::vector<std::array<double, 2>> Y(n), velocity(n, {0.0, 0.0});
    for (auto& y : Y) {
        y[0] = rng.next_gaussian() * config.init_stddev;
        y[1] = rng.next_gaussian() * config.init_stddev;
    }

    Projection2D proj;
    DenseMatrix num(n, n);
    DenseMatrix Q(n, n);
    std::vector<std::array<double, 2>> grad(n);

    auto compute_q = [&] {
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double dx = Y[i][0] - Y[j][0];
                double dy = Y[i][1] - Y[j][1];
                double v = 1.0 / (1.0 + dx * dx + dy * dy);
                num.at(i, j) = v;
                num.at(j, i) = v;
                z += 2.0 * v;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                Q.at(i, j) = i == j ? 0.0 : std::max(num.at(i, j) / z, 1e-12);
            }
        }
    };

    for (int iter = 0; iter < config.iterations; ++iter) {
        if (exaggerated && iter >= config.exaggeration_iters) {
            for (double& p : P.data) p /= config.early_exaggeration;
            exaggerated = false;
            compute_q();
            proj.initial_kl = kl_divergence(P, Q);
            proj.kl_history.push_back(proj.initial_kl);
        }

        compute_q();
        for (std::size_t i = 0; i < n; ++i) {
            double gx = 0.0, gy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double mult = (P.at(i, j) - Q.at(i, j)) * num.at(i, j);
                gx += mult * (Y[i][0] - Y[j][0]);
                gy += mult * (Y[i][1] - Y[j][1]);
            }
            grad[i][0] = 4.0 * gx;
            grad[i][1] = 4.0 * gy;
            if (!std::isfinite(grad[i][0]) || !std::isfinite(grad[i][1])) {
                throw DataError("t-SNE gradient became non-finite at iteration " +
                                std::to_string(iter) + ", point " + std::to_string(i));
            }
        }

        double momentum =
            iter < config.momentum_switch_iter ? config.momentum_initial : config.momentum_final;
        double mean_x = 0.0, mean_y = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            velocity[i][0] = momentum * velocity[i][0] - config.learning_rate * grad[i][0];
            velocity[i][1] = momentum * velocity[i][1] - config.learning_rate * grad[i][1];
            Y[i][0] += velocity[i][0];
            Y[i][1] += velocity[i][1];
            mean_x += Y[i][0];
            mean_y += Y[i][1];
        }
        mean_x /= static_cast<double>(n);
        mean_y /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            Y[i][0] -= mean_x;
            Y[i][1] -= mean_y;
        }

        if (!exaggerated && (iter + 1) % 50 == 0 && iter + 1 < config.iterations) {
            compute_q();
            proj.kl_history.push_back(kl_divergence(P, Q));
        }
    }

    if (exaggerated) {
        // Exaggeration never ended (short runs); report KL on the true P.
        for (double& p : P.data) p /= config.early_exaggeration;
        compute_q();
        proj.initial_kl = kl_divergence(P, Q);
    }
    compute_q();
    proj.final_kl = kl_divergence(P, Q);
    proj.kl_history.push_back(proj.final_kl);
    proj.coords = std::move(Y);
    return proj;
}

namespace {

struct GroupStyle {
    std::string name;
    std::string color;
};

GroupStyle style_for(Source source, Label label) {
    if (source == Source::Original) {
        return label == Label::Positive ? GroupStyle{"Original positive", "#d62728"}
                                        : GroupStyle{"Original negative", "#2ca02c"};
    }
    std::string name(source_display(source));
    switch (source) {
        case Source::Backtranslation: return {name, "#1f77b4"};
        case Source::SingleClassGen: return {name, "#4ea3dd"};
        default: return {name, "#0b5394"};
    }
}

std::string format_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

void emit_scatter(const Projection2D& proj, const std::string& svg_path) {
    std::size_t n = proj.coords.size();
    if (n == 0) throw UsageError("emit_scatter: empty projection");
    if (proj.ids.size() != n || proj.sources.size() != n || proj.labels.size() != n) {
        throw UsageError("emit_scatter: projection tags incomplete");
    }

    double min_x = proj.coords[0][0], max_x = min_x;
    double min_y = proj.coords[0][1], max_y = min_y;
    for (const auto& c : proj.coords) {
        min_x = std::min(min_x, c[0]);
        max_x = std::max(max_x, c[0]);
        min_y = std::min(min_y, c[1]);
        max_y = std::max(max_y, c[1]);
    }
    double span_x = max_x - min_x, span_y = max_y - min_y;
    if (span_x <= 0.0) span_x = 1.0;
    if (span_y <= 0.0) span_y = 1.0;

    const double width = 800.0, height = 620.0, margin = 45.0;
    auto map_x = [&](double x) {
        return margin + (x - min_x) / span_x * (width - 2.0 * margin);
    };
    auto map_y = [&](double y) {
        // SVG y grows downward.
        return height - margin - (y - min_y) / span_y * (height - 2.0 * margin);
    };

    // Legend entries in first-seen order of (source, label) groups.
    std::vector<std::pair<GroupStyle, int>> legend;
    auto style_index = [&](Source s, Label l) {
        GroupStyle gs = style_for(s, l);
        for (std::size_t i = 0; i < legend.size(); ++i) {
            if (legend[i].first.name == gs.name) return i;
        }
        legend.push_back({gs, 0});
        return legend.size() - 1;
    };

    std::string circles;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t g = style_index(proj.sources[i], proj.labels[i]);
        ++legend[g].second;
        circles += "  <circle cx=\"" + format_coord(map_x(proj.coords[i][0])) + "\" cy=\"" +
                   format_coord(map_y(proj.coords[i][1])) + "\" r=\"3\" fill=\"" +
                   legend[g].first.color + "\" fill-opacity=\"0.7\"/>\n";
    }

    std::ofstream svg(svg_path, std::ios::binary);
    if (!svg) throw DataError("cannot write " + svg_path);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n"
        << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
        << "\" height=\"" << height - 2 * margin
        << "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n"
        << circles;
    double ly = margin + 16.0;
    for (const auto& [style, count] : legend) {
        svg << "  <rect x=\"" << margin + 10.0 << "\" y=\"" << ly - 9.0
            << "\" width=\"10\" height=\"10\" fill=\"" << style.color << "\"/>\n"
            << "  <text x=\"" << margin + 26.0 << "\" y=\"" << ly
            << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#333333\">" << style.name
            << " (" << count << ")</text>\n";
        ly += 18.0;
    }
    svg << "</svg>\n";
    if (!svg.good()) throw DataError("write failed for " + svg_path);

    std::string csv_path = svg_path;
    if (csv_path.size() > 4 && csv_path.substr(csv_path.size() - 4) == ".svg") {
        csv_path = csv_path.substr(0, csv_path.size() - 4) + ".csv";
    } else {
        csv_path += ".csv";
    }
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw DataError("cannot write " + csv_path);
    csv << "id,source,label,x,y\n";
    char buf[64];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", proj.coords[i][0], proj.coords[i][1]);
        csv << proj.ids[i] << ',' << source_token(proj.sources[i]) << ','
            << label_token(proj.labels[i]) << ',' << buf << '\n';
    }
    if (!csv.good()) throw DataError("write failed for " + csv_path);
}

}  // namespace augbench
