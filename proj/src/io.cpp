#include "varsample/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace varsample::io {

void write_sample_csv(const sampler::SampleCloud& cloud, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + path);
    std::fprintf(f, "# vars:");
    for (const auto& n : cloud.var_names) std::fprintf(f, " %s", n.c_str());
    std::fprintf(f, "\n# epsilon: %.17g\n", cloud.epsilon);
    std::fprintf(f, "# delta: %.17g\n", cloud.delta);
    std::fprintf(f, "# certificate: (%.17g, %.17g)\n", cloud.certificate.delta,
                 cloud.certificate.epsilon);
    std::fprintf(f, "# seed: %" PRIu64 "\n", cloud.seed);
    std::fprintf(f, "# mindist_calls: %zu\n", cloud.certificate.mindist_calls);
    std::fprintf(f, "# tree_depth: %d\n", cloud.certificate.tree_depth);
    for (const auto& p : cloud.points) {
        for (int i = 0; i < p.x.size(); ++i)
            std::fprintf(f, "%s%.17g", i ? "," : "", p.x[i]);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

sampler::SampleCloud read_sample_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    sampler::SampleCloud cloud;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "vars:") {
                std::string name;
                while (hs >> name) cloud.var_names.push_back(name);
            } else if (key == "epsilon:") {
                hs >> cloud.epsilon;
            } else if (key == "delta:") {
                hs >> cloud.delta;
            } else if (key == "certificate:") {
                std::string rest;
                std::getline(hs, rest);
                double d = 0, e = 0;
                if (std::sscanf(rest.c_str(), " (%lg, %lg)", &d, &e) == 2) {
                    cloud.certificate.delta = d;
                    cloud.certificate.epsilon = e;
                }
            } else if (key == "seed:") {
                hs >> cloud.seed;
            } else if (key == "mindist_calls:") {
                hs >> cloud.certificate.mindist_calls;
            } else if (key == "tree_depth:") {
                hs >> cloud.certificate.tree_depth;
            }
            continue;
        }
        std::vector<double> coords;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) coords.push_back(std::stod(cell));
        if (coords.empty()) continue;
        sampler::SamplePoint p;
        p.x = Eigen::Map<Eigen::VectorXd>(coords.data(), static_cast<long>(coords.size()));
        p.origin = Eigen::VectorXd::Zero(p.x.size());
        cloud.points.push_back(std::move(p));
    }
    if (cloud.certificate.epsilon == 0.0) {
        cloud.certificate.delta = cloud.delta;
        cloud.certificate.epsilon = cloud.epsilon;
    }
    return cloud;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace varsample::io
