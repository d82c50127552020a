#include "varsample/tda.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace varsample::tda {

namespace {

int lex_compare(const std::uint32_t* a, const std::uint32_t* b, int n) {
    for (int i = 0; i < n; ++i)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}

}  // namespace

FiltrationComplex FiltrationComplex::rips(const std::vector<Eigen::VectorXd>& points,
                                          double t_max, int p_max, std::size_t simplex_cap) {
    if (t_max < 0.0) throw std::invalid_argument("negative threshold");
    if (p_max < 0) throw std::invalid_argument("negative homology dimension cap");
    const std::size_t m = points.size();
    if (m > std::numeric_limits<std::uint32_t>::max())
        throw std::invalid_argument("too many points");

    FiltrationComplex fc;
    fc.t_max_ = t_max;
    fc.p_max_ = p_max;
    const int top_dim = p_max + 1;
    fc.layers_.resize(top_dim + 1);

    // dense pairwise distances (desk-scale clouds)
    Eigen::MatrixXd dist(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        dist(i, i) = 0.0;
        for (std::size_t j = i + 1; j < m; ++j) {
            double d = (points[i] - points[j]).norm();
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }

    std::size_t total = 0;
    auto bump = [&](std::size_t n) {
        total += n;
        if (total > simplex_cap) throw SimplexCapError(total, simplex_cap);
    };

    // vertices
    Layer& v0 = fc.layers_[0];
    v0.verts.resize(m);
    v0.diameter.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) v0.verts[i] = static_cast<std::uint32_t>(i);
    bump(m);

    // upper neighbor lists
    std::vector<std::vector<std::uint32_t>> nb(m);
    if (top_dim >= 1) {
        Layer& e = fc.layers_[1];
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                if (dist(i, j) <= t_max) {
                    nb[i].push_back(static_cast<std::uint32_t>(j));
                    e.verts.push_back(static_cast<std::uint32_t>(i));
                    e.verts.push_back(static_cast<std::uint32_t>(j));
                    e.diameter.push_back(dist(i, j));
                    bump(1);
                }
            }
        }
    }

    // expand dimension by dimension: extend each simplex by common upper
    // neighbors; tuples come out in lexicographic order by construction
    for (int dim = 2; dim <= top_dim; ++dim) {
        const Layer& prev = fc.layers_[dim - 1];
        Layer& cur = fc.layers_[dim];
        const std::size_t prev_n = prev.diameter.size();
        std::vector<std::uint32_t> common;
        for (std::size_t s = 0; s < prev_n; ++s) {
            const std::uint32_t* vs = prev.verts.data() + s * dim;
            // candidates: upper neighbors common to every vertex of the simplex
            common.assign(nb[vs[0]].begin(), nb[vs[0]].end());
            for (int k = 1; k < dim && !common.empty(); ++k) {
                const auto& list = nb[vs[k]];
                std::vector<std::uint32_t> tmp;
                std::set_intersection(common.begin(), common.end(), list.begin(), list.end(),
                                      std::back_inserter(tmp));
                common.swap(tmp);
            }
            for (std::uint32_t w : common) {
                if (w <= vs[dim - 1]) continue;
                double diam = prev.diameter[s];
                for (int k = 0; k < dim; ++k) diam = std::max(diam, dist(vs[k], w));
                cur.verts.insert(cur.verts.end(), vs, vs + dim);
                cur.verts.push_back(w);
                cur.diameter.push_back(diam);
                bump(1);
            }
        }
    }

    // filtration order per dimension: (diameter, lexicographic vertices)
    for (int dim = 0; dim <= top_dim; ++dim) {
        Layer& layer = fc.layers_[dim];
        const std::size_t n = layer.diameter.size();
        layer.filt_order.resize(n);
        std::iota(layer.filt_order.begin(), layer.filt_order.end(), 0u);
        const int width = dim + 1;
        std::sort(layer.filt_order.begin(), layer.filt_order.end(),
                  [&](std::uint32_t a, std::uint32_t b) {
                      if (layer.diameter[a] != layer.diameter[b])
                          return layer.diameter[a] < layer.diameter[b];
                      return lex_compare(layer.verts.data() + a * width,
                                         layer.verts.data() + b * width, width) < 0;
                  });
        layer.filt_pos.resize(n);
        for (std::size_t k = 0; k < n; ++k) layer.filt_pos[layer.filt_order[k]] = k;
    }
    return fc;
}

std::size_t FiltrationComplex::total_count() const {
    std::size_t t = 0;
    for (const auto& l : layers_) t += l.diameter.size();
    return t;
}

std::size_t FiltrationComplex::lex_lookup(int dim, const std::uint32_t* key) const {
    const Layer& layer = layers_[dim];
    const int width = dim + 1;
    std::size_t lo = 0, hi = layer.diameter.size();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (lex_compare(layer.verts.data() + mid * width, key, width) < 0)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo;
}

std::vector<std::uint32_t> FiltrationComplex::boundary_positions(int dim,
                                                                 std::size_t storage_idx) const {
    std::vector<std::uint32_t> out;
    if (dim == 0) return out;
    const std::uint32_t* vs = vertices(dim, storage_idx);
    std::uint32_t face[16];
    out.reserve(dim + 1);
    for (int drop = 0; drop <= dim; ++drop) {
        int w = 0;
        for (int k = 0; k <= dim; ++k)
            if (k != drop) face[w++] = vs[k];
        std::size_t idx = lex_lookup(dim - 1, face);
        out.push_back(layers_[dim - 1].filt_pos[idx]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// XOR-merge of two sorted index lists (symmetric difference over Z/2)
void xor_into(std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
              std::vector<std::uint32_t>& scratch) {
    scratch.clear();
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(scratch));
    a.swap(scratch);
}

struct RawPair {
    int dim;  // homology dimension of the interval
    double birth;
    double death;
};

void finalize(PersistenceDiagram& diag, std::vector<RawPair>& pairs) {
    for (const RawPair& p : pairs) {
        if (p.birth == p.death) {
            ++diag.suppressed_zero_pairs;
            continue;
        }
        diag.points.push_back({p.birth, p.death, p.dim});
    }
    std::sort(diag.points.begin(), diag.points.end(), [](const DiagramPoint& a,
                                                          const DiagramPoint& b) {
        if (a.dim != b.dim) return a.dim < b.dim;
        if (a.birth != b.birth) return a.birth < b.birth;
        return a.death < b.death;
    });
}

}  // namespace

PersistenceDiagram compute_persistence(const FiltrationComplex& fc) {
    PersistenceDiagram diag;
    diag.threshold = fc.threshold();
    diag.p_max = fc.homology_dim_cap();
    std::vector<RawPair> pairs;

    const int top = fc.max_dim();
    // cleared[dim][filt_pos]: known to reduce to zero (paired as a birth above)
    std::vector<std::vector<char>> cleared(top + 1);
    std::vector<std::vector<char>> is_death(top + 1);  // paired as a death
    for (int d = 0; d <= top; ++d) {
        cleared[d].assign(fc.count(d), 0);
        is_death[d].assign(fc.count(d), 0);
    }

    std::vector<std::uint32_t> scratch;
    for (int dim = top; dim >= 1; --dim) {
        const std::size_t rows = fc.count(dim - 1);
        const std::size_t cols = fc.count(dim);
        std::vector<std::int64_t> pivot_owner(rows, -1);
        std::vector<std::vector<std::uint32_t>> reduced;
        reduced.reserve(cols / 4 + 1);

        const auto& order = fc.filtration_order(dim);
        for (std::size_t k = 0; k < cols; ++k) {
            if (cleared[dim][k]) continue;
            std::uint32_t storage = order[k];
            std::vector<std::uint32_t> col = fc.boundary_positions(dim, storage);
            while (!col.empty()) {
                std::uint32_t low = col.back();
                std::int64_t owner = pivot_owner[low];
                if (owner < 0) break;
                xor_into(col, reduced[owner], scratch);
            }
            if (col.empty()) continue;  // creates a dim-cycle; pairing handled above

            std::uint32_t low = col.back();
            pivot_owner[low] = static_cast<std::int64_t>(reduced.size());
            reduced.push_back(std::move(col));
            cleared[dim - 1][low] = 1;
            is_death[dim][k] = 1;

            double birth = fc.diameter(dim - 1, fc.filtration_order(dim - 1)[low]);
            double death = fc.diameter(dim, storage);
            pairs.push_back({dim - 1, birth, death});
        }
    }

    // essential classes: simplices neither cleared (paired as birth) nor deaths
    for (int dim = 0; dim <= std::min(top, fc.homology_dim_cap()); ++dim) {
        for (std::size_t k = 0; k < fc.count(dim); ++k) {
            if (cleared[dim][k] || is_death[dim][k]) continue;
            // columns that reduced to zero were skipped above only when
            // cleared; recompute nothing: a simplex is a birth iff it is not a
            // death, so unflagged simplices are births of essential classes
            pairs.push_back({dim, fc.diameter(dim, fc.filtration_order(dim)[k]), kInfDeath});
        }
    }

    finalize(diag, pairs);
    return diag;
}

PersistenceDiagram compute_persistence_standard(const FiltrationComplex& fc) {
    PersistenceDiagram diag;
    diag.threshold = fc.threshold();
    diag.p_max = fc.homology_dim_cap();
    std::vector<RawPair> pairs;

    const int top = fc.max_dim();
    // global filtration order: (value, dim, lex)
    struct Entry {
        int dim;
        std::uint32_t storage;
    };
    std::vector<Entry> order;
    order.reserve(fc.total_count());
    {
        std::vector<std::size_t> cursor(top + 1, 0);
        for (;;) {
            int best = -1;
            for (int d = 0; d <= top; ++d) {
                if (cursor[d] >= fc.count(d)) continue;
                if (best < 0) {
                    best = d;
                    continue;
                }
                double vd = fc.diameter(d, fc.filtration_order(d)[cursor[d]]);
                double vb = fc.diameter(best, fc.filtration_order(best)[cursor[best]]);
                if (vd < vb || (vd == vb && d < best)) best = d;
            }
            if (best < 0) break;
            order.push_back({best, fc.filtration_order(best)[cursor[best]]});
            ++cursor[best];
        }
    }

    // global ids: (dim, filt_pos) -> global position
    std::vector<std::vector<std::size_t>> global_of(top + 1);
    for (int d = 0; d <= top; ++d) global_of[d].assign(fc.count(d), 0);
    for (std::size_t g = 0; g < order.size(); ++g)
        global_of[order[g].dim][fc.filtration_position(order[g].dim)[order[g].storage]] = g;

    std::vector<std::int64_t> pivot_owner(order.size(), -1);
    std::vector<std::vector<std::uint32_t>> reduced(order.size());
    std::vector<char> has_pivot(order.size(), 0);
    std::vector<std::uint32_t> scratch;

    for (std::size_t g = 0; g < order.size(); ++g) {
        const auto [dim, storage] = order[g];
        std::vector<std::uint32_t> col;
        if (dim > 0) {
            for (std::uint32_t fp : fc.boundary_positions(dim, storage))
                col.push_back(static_cast<std::uint32_t>(global_of[dim - 1][fp]));
            std::sort(col.begin(), col.end());
        }
        while (!col.empty()) {
            std::uint32_t low = col.back();
            std::int64_t owner = pivot_owner[low];
            if (owner < 0) break;
            xor_into(col, reduced[owner], scratch);
        }
        if (!col.empty()) {
            std::uint32_t low = col.back();
            pivot_owner[low] = static_cast<std::int64_t>(g);
            has_pivot[g] = 1;
            const auto [bdim, bstorage] = order[low];
            pairs.push_back({bdim, fc.diameter(bdim, bstorage), fc.diameter(dim, storage)});
        }
        reduced[g] = std::move(col);
    }

    // essential: zero columns never used as a pivot row
    for (std::size_t g = 0; g < order.size(); ++g) {
        const auto [dim, storage] = order[g];
        if (dim > fc.homology_dim_cap()) continue;
        if (!reduced[g].empty() || has_pivot[g]) continue;
        if (pivot_owner[g] >= 0) continue;  // killed later
        pairs.push_back({dim, fc.diameter(dim, storage), kInfDeath});
    }

    finalize(diag, pairs);
    return diag;
}

std::vector<std::size_t> PersistenceDiagram::betti_at(double t) const {
    int top = 0;
    for (const auto& p : points) top = std::max(top, p.dim);
    std::vector<std::size_t> counts(std::max(top + 1, p_max + 1), 0);
    for (const auto& p : points)
        if (p.birth <= t && t < p.death) ++counts[p.dim];
    return counts;
}

InferenceCorner inference_corner(int n, double epsilon, double delta) {
    if (n < 1) throw std::invalid_argument("ambient dimension must be >= 1");
    if (delta < 0.0 || epsilon < delta)
        throw std::invalid_argument("need 0 <= delta <= epsilon");
    InferenceCorner c;
    c.a = 2.0 * epsilon * std::sqrt((n + 1.0) / (2.0 * n));
    c.b = 4.0 * epsilon + 2.0 * delta;
    return c;
}

InferenceVerdict infer_betti(const PersistenceDiagram& diag, int n, double epsilon,
                             double delta) {
    InferenceVerdict v;
    v.corner = inference_corner(n, epsilon, delta);
    v.epsilon = epsilon;
    v.delta = delta;
    v.ambient_dim = n;
    v.hfs_assumption = 2.0 * (epsilon + delta);
    v.threshold_censored = diag.threshold < v.corner.b;

    int top = diag.p_max;
    for (const auto& p : diag.points) top = std::max(top, p.dim);
    v.counts.assign(top + 1, 0);
    for (const auto& p : diag.points) {
        if (p.birth > v.corner.a) continue;
        bool death_beyond;
        if (std::isinf(p.death)) {
            // alive at the diagram threshold: counts only when the threshold
            // itself reaches past the corner
            death_beyond = diag.threshold >= v.corner.b;
        } else {
            death_beyond = p.death > v.corner.b;
        }
        if (death_beyond) ++v.counts[p.dim];
    }
    return v;
}

void write_diagram_csv(const PersistenceDiagram& diag, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "# ambient_dim: " << diag.ambient_dim << "\n";
    out << "# epsilon: " << diag.epsilon << "\n";
    out << "# delta: " << diag.delta << "\n";
    out << "# threshold: " << diag.threshold << "\n";
    out << "# pmax: " << diag.p_max << "\n";
    out << "birth,death,dim\n";
    for (const auto& p : diag.points) {
        out << p.birth << ",";
        if (std::isinf(p.death))
            out << "inf";
        else
            out << p.death;
        out << "," << p.dim << "\n";
    }
}

PersistenceDiagram read_diagram_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    PersistenceDiagram diag;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "ambient_dim:")
                hs >> diag.ambient_dim;
            else if (key == "epsilon:")
                hs >> diag.epsilon;
            else if (key == "delta:")
                hs >> diag.delta;
            else if (key == "threshold:")
                hs >> diag.threshold;
            else if (key == "pmax:")
                hs >> diag.p_max;
            continue;
        }
        if (line.rfind("birth", 0) == 0) continue;
        std::istringstream ls(line);
        std::string b, d, dim;
        if (!std::getline(ls, b, ',') || !std::getline(ls, d, ',') || !std::getline(ls, dim))
            throw std::runtime_error("malformed diagram row: " + line);
        DiagramPoint p;
        p.birth = std::stod(b);
        p.death = (d == "inf") ? kInfDeath : std::stod(d);
        p.dim = std::stoi(dim);
        diag.points.push_back(p);
    }
    return diag;
}

void write_diagram_svg(const PersistenceDiagram& diag, const InferenceVerdict& verdict,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);

    double top = verdict.corner.b;
    for (const auto& p : diag.points) {
        top = std::max(top, p.birth);
        if (!std::isinf(p.death)) top = std::max(top, p.death);
    }
    if (std::isfinite(diag.threshold)) top = std::max(top, diag.threshold);
    top *= 1.1;
    if (top <= 0.0) top = 1.0;

    const double size = 520.0, margin = 40.0, plot = size - 2 * margin;
    auto X = [&](double v) { return margin + plot * (v / top); };
    auto Y = [&](double v) { return size - margin - plot * (v / top); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << size << "' height='" << size
        << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    // shaded inference region: above and to the left of the corner
    out << "<rect x='" << X(0) << "' y='" << Y(top) << "' width='" << X(verdict.corner.a) - X(0)
        << "' height='" << Y(verdict.corner.b) - Y(top)
        << "' fill='#ffb6c1' fill-opacity='0.5'/>\n";
    // axes and diagonal
    out << "<line x1='" << X(0) << "' y1='" << Y(0) << "' x2='" << X(top) << "' y2='" << Y(0)
        << "' stroke='black'/>\n";
    out << "<line x1='" << X(0) << "' y1='" << Y(0) << "' x2='" << X(0) << "' y2='" << Y(top)
        << "' stroke='black'/>\n";
    out << "<line x1='" << X(0) << "' y1='" << Y(0) << "' x2='" << X(top) << "' y2='" << Y(top)
        << "' stroke='#888' stroke-dasharray='4 3'/>\n";
    // corner marker
    out << "<circle cx='" << X(verdict.corner.a) << "' cy='" << Y(verdict.corner.b)
        << "' r='3' fill='black'/>\n";
    for (const auto& p : diag.points) {
        double death = std::isinf(p.death) ? top : p.death;
        const char* c = colors[p.dim % 5];
        out << "<circle cx='" << X(p.birth) << "' cy='" << Y(death) << "' r='4' fill='" << c
            << "' fill-opacity='0.8'><title>dim " << p.dim << " [" << p.birth << ", "
            << (std::isinf(p.death) ? std::string("inf") : std::to_string(p.death))
            << ")</title></circle>\n";
    }
    out << "<text x='" << margin << "' y='" << margin / 2
        << "' font-size='12'>corner (" << verdict.corner.a << ", " << verdict.corner.b
        << "); assumes hfs > " << verdict.hfs_assumption << "</text>\n";
    out << "</svg>\n";
}

}  // namespace varsample::tda
